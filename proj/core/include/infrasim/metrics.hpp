#pragma once

#include "infrasim/simulation.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace infrasim
{
    /// Equitable consumer serviceability: mean of min(s/S, 1) over consumers
    /// with S > 0. nullopt when no consumer has positive demand.
    std::optional<double> ecs(std::vector<double> const& supply, std::vector<double> const& demand);

    /// Prioritized consumer serviceability: sum of min(s, S) over sum of S
    /// for consumers with S > 0. nullopt when total demand is zero.
    std::optional<double> pcs(std::vector<double> const& supply, std::vector<double> const& demand);

    enum class Mop
    {
        ecs,
        pcs,
    };

    /// MOP curve of a series; undefined instants are nullopt.
    std::vector<std::optional<double>> mop_curve(NetworkSeries const& series, Mop mop);

    /// (1/3600) * integral of (1 - MOP) over [t0, T] by the trapezoid rule on
    /// the sample grid; trapezoids touching an undefined instant are skipped.
    /// Throws std::invalid_argument when T <= t0 or times are decreasing.
    double system_eoh(
        std::vector<double> const& time,
        std::vector<std::optional<double>> const& curve,
        double t0,
        double T);

    double system_eoh(NetworkSeries const& series, Mop mop, double t0, double T);

    /// Per-consumer EOH in hours over instants with S > 0; nullopt for a
    /// consumer whose demand is zero throughout.
    std::optional<double> consumer_eoh(
        NetworkSeries const& series, std::size_t consumer, double t0, double T);

    /// Sum of w_K * EOH_K over the networks present in both maps. Throws
    /// std::invalid_argument on a negative weight.
    double weighted_eoh(
        std::map<std::string, double> const& eoh_by_network,
        std::map<std::string, double> const& weights);

    /// Water and power, 0.5 each.
    std::map<std::string, double> default_eoh_weights();

    struct NetworkReport
    {
        std::vector<double> time;
        std::vector<std::optional<double>> ecs;
        std::vector<std::optional<double>> pcs;
        double eoh_ecs = 0.0;  ///< h
        double eoh_pcs = 0.0;  ///< h
        std::map<std::string, std::optional<double>> consumer_eoh;  ///< h
    };

    struct ResilienceReport
    {
        Mop mop = Mop::pcs;
        double t0 = 0.0;
        double T = 0.0;
        std::map<std::string, NetworkReport> networks;  ///< "water", "power"
        std::map<std::string, double> weights;
        double weighted_eoh = 0.0;  ///< h, using `mop`

        double eoh(std::string const& network) const;
    };

    ResilienceReport make_report(
        PerformanceTimeSeries const& series,
        Mop mop = Mop::pcs,
        std::map<std::string, double> weights = default_eoh_weights());
}
