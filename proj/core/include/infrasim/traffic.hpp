#pragma once

#include "infrasim/network.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace infrasim
{
    struct TrafficOptions
    {
        double gap_tolerance = 1e-4;
        int max_iterations = 500;
        /// BPR defaults; a road link may override them with `alpha` / `beta`
        /// attributes.
        double bpr_alpha = 0.15;
        double bpr_beta = 4.0;
    };

    struct UnreachableDemand
    {
        std::string origin;
        std::string destination;
        double demand = 0.0;
    };

    struct RoadLink
    {
        std::string id;
        std::size_t from = 0;
        std::size_t to = 0;
        double free_flow_time = 0.0;  ///< s
        double time = 0.0;            ///< s, congested
        bool in_service = true;
    };

    struct TrafficState
    {
        std::map<std::string, double> link_flow;  ///< veh/h
        std::map<std::string, double> link_time;  ///< s
        double relative_gap = 0.0;
        int iterations = 0;
        /// Beckmann objective after each iteration.
        std::vector<double> objective_history;
        std::vector<UnreachableDemand> unreachable;

        /// Routing graph: traffic nodes in network order and every road link.
        std::vector<std::string> nodes;
        std::vector<RoadLink> links;

        std::optional<std::size_t> node_index(std::string const& id) const;
    };

    /// Travel time on a link under BPR: t0 (1 + alpha (x / c)^beta).
    double bpr_time(
        Component const& link, double flow, TrafficOptions const& options = {});

    /// Static user-equilibrium assignment by Frank-Wolfe with an exact line
    /// search. Failed road links carry no traffic.
    TrafficState assign_traffic(
        IntegratedNetwork const& net,
        StatusMap const& statuses,
        TrafficOptions const& options = {});

    struct RoutingOptions
    {
        /// When positive, out-of-service links may be used at this multiple
        /// of their free-flow time (crew routing of last resort).
        double failed_link_factor = 0.0;
        /// Use free-flow instead of congested times.
        bool free_flow = false;
    };

    /// Shortest congested travel time from `origin` to every node; nullopt
    /// marks unreachable nodes.
    std::vector<std::optional<double>> travel_times_from(
        TrafficState const& state,
        std::string const& origin,
        RoutingOptions const& routing = {});

    /// Shortest congested travel time; nullopt if unreachable.
    std::optional<double> shortest_travel_time(
        TrafficState const& state,
        std::string const& origin,
        std::string const& destination,
        RoutingOptions const& routing = {});
}
