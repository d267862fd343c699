#pragma once

#include "infrasim/event_table.hpp"
#include "infrasim/hydraulics.hpp"
#include "infrasim/network.hpp"
#include "infrasim/power_flow.hpp"

#include <optional>
#include <string>
#include <vector>

namespace infrasim
{
    /// Consumer supply s_i(t) and normal demand S_i(t) for one network.
    ///
    /// Samples are time ordered. At an instant where statuses change the
    /// series holds two samples with the same time: the state just before
    /// the change, then the state just after it.
    struct NetworkSeries
    {
        std::vector<double> time;              ///< s
        std::vector<std::string> consumers;
        std::vector<std::vector<double>> supply;  ///< [sample][consumer], clamped to demand
        std::vector<std::vector<double>> demand;  ///< [sample][consumer]
        /// Optional per-link flow traces ([sample] -> id -> flow).
        std::vector<std::map<std::string, double>> link_flow;

        std::size_t size() const { return time.size(); }
    };

    struct PerformanceTimeSeries
    {
        NetworkSeries water;  ///< m3/s
        NetworkSeries power;  ///< MW
        double start = 0.0;
        double end = 0.0;
    };

    struct SimulationParams
    {
        PdaParams pda;
        HydraulicOptions hydraulic;
        PowerOptions power;
        double water_step = 60.0;  ///< s, hydraulic time step and sample spacing
        bool record_link_flows = false;
    };

    /// Last repair_end plus a day (a day when nothing fails).
    double default_horizon(EventTable const& table);

    /// Time-stepped interdependent simulation from t = 0 to `horizon`.
    ///
    /// Between consecutive event timestamps the power network is solved once
    /// at the interval start and held; pumps whose motor is not running are
    /// switched off; the water network is advanced in water_step steps (and
    /// sampled on the global water_step grid). A finite reservoir that runs
    /// dry takes the generators it feeds out of service from that sample on,
    /// which also re-solves power there. Normal demand S comes from an
    /// undisturbed run stepped alongside. Throws SolverError naming the
    /// failing time.
    PerformanceTimeSeries simulate(
        IntegratedNetwork const& net,
        EventTable const& table,
        double horizon,
        SimulationParams const& params = {});
}
