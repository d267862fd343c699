#pragma once

#include "infrasim/network.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace infrasim
{
    struct PowerOptions
    {
        double base_mva = 100.0;   ///< susceptance is per unit on this base
        double tolerance = 1e-9;   ///< simplex pivot tolerance
    };

    struct PowerState
    {
        std::map<std::string, double> bus_angle;    ///< rad
        std::map<std::string, double> line_flow;    ///< MW, from -> to
        std::map<std::string, double> generation;   ///< MW per source
        /// Consumers are loads and motors.
        std::map<std::string, double> served_load;  ///< MW
        std::map<std::string, double> shed_load;    ///< MW
        std::set<std::string> energized_buses;
        double max_balance_residual = 0.0;          ///< MW

        double total_served() const;
        double total_demand() const;
    };

    /// DC power flow with minimum-shedding dispatch.
    ///
    /// Buses joined by closed switches are merged. Each electrical island
    /// is solved as a linear program: first maximize served load subject to
    /// generator limits, line limits and nodal balance, then minimize linear
    /// generation cost with served load held at that optimum. Islands
    /// without an in-service source shed everything.
    PowerState solve_power(
        IntegratedNetwork const& net,
        StatusMap const& statuses,
        PowerOptions const& options = {});

    /// A motor runs only when fully served.
    bool motor_running(PowerState const& state, std::string const& motor_id);

    /// Pumps (or other targets) that lose their driver under `state`.
    std::set<std::string> unpowered_dependents(
        IntegratedNetwork const& net, PowerState const& state);
}
