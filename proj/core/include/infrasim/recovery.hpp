#pragma once

#include "infrasim/hydraulics.hpp"
#include "infrasim/network.hpp"
#include "infrasim/traffic.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace infrasim
{
    enum class Strategy
    {
        max_flow,
        centrality,
        crew_distance,
        zone,
        mpc,
    };

    std::string_view to_string(Strategy s);
    /// Accepts "capacity" as another name for max_flow.
    std::optional<Strategy> parse_strategy(std::string_view s);

    /// Hours of work per component kind, stored in seconds.
    struct RepairDurations
    {
        double pipe = 4 * 3600.0;
        double pump = 8 * 3600.0;
        double line = 3 * 3600.0;
        double transformer = 6 * 3600.0;
        double road_link = 12 * 3600.0;
        /// Anything else a scenario may fail.
        double other = 4 * 3600.0;

        double of(ComponentKind k) const;
    };

    struct Crew
    {
        std::string id;
        NetworkKind network = NetworkKind::water;
        std::string location;     ///< traffic node
        double busy_until = 0.0;  ///< s

        friend bool operator==(Crew const&, Crew const&) = default;
    };

    /// One crew per network, each starting at the access node of its
    /// network's first component.
    std::vector<Crew> default_crews(IntegratedNetwork const& net);

    /// Throws ValidationError on duplicate ids or off-network locations.
    void validate_crews(IntegratedNetwork const& net, std::vector<Crew> const& crews);

    struct RepairTask
    {
        std::string component_id;
        double repair_duration = 0.0;  ///< s
        int priority_rank = 0;         ///< 0 first
    };

    /// Repair sequence per network (water, power, traffic keys only when
    /// something failed there).
    using RepairOrder = std::map<NetworkKind, std::vector<std::string>>;

    std::vector<RepairTask> to_tasks(
        IntegratedNetwork const& net,
        RepairOrder const& order,
        RepairDurations const& durations = {});

    struct RankingContext
    {
        /// Peak pre-disaster flow magnitude per component (max_flow, zone).
        std::map<std::string, double> const* peak_flow = nullptr;
        /// Edge betweenness per component; computed from the pre-disaster
        /// graphs when absent.
        std::map<std::string, double> const* centrality = nullptr;
        /// Crew start locations (crew_distance).
        std::vector<Crew> const* crews = nullptr;
        /// Road state the crews travel on (crew_distance).
        TrafficState const* traffic = nullptr;
    };

    /// Orders the failed components of each network by a heuristic; residual
    /// ties go to the smaller id. Throws std::invalid_argument when the
    /// strategy's context is missing or for Strategy::mpc.
    RepairOrder rank_components(
        IntegratedNetwork const& net,
        std::set<std::string> const& failed,
        Strategy strategy,
        RankingContext const& context);

    /// Edge betweenness of every edge component, per own network.
    std::map<std::string, double> component_centrality(IntegratedNetwork const& net);

    /// Peak undisrupted flow magnitude per component: water links (m3/s)
    /// over `duration` at `step`, power branches (MW), road links (veh/h).
    std::map<std::string, double> baseline_peak_flows(
        IntegratedNetwork const& net,
        PdaParams const& pda,
        double duration = 86400.0,
        double step = 60.0);

    /// Scores a complete candidate repair order (lower is better).
    using OrderEvaluator = std::function<double(RepairOrder const&)>;

    inline constexpr double kMpcMaxCandidates = 1e4;

    /// Receding-horizon search. Each round visits the networks in order
    /// (water, power, traffic); for a network with remaining failures it
    /// scores every ordered pick of min(k, remaining) of them, followed by
    /// the rest in id order, with other networks held at their committed
    /// prefix plus remaining ids in order. The first component of the best
    /// pick is committed. Throws Error when a round would need more than
    /// kMpcMaxCandidates candidates.
    RepairOrder mpc_sequence(
        IntegratedNetwork const& net,
        std::set<std::string> const& failed,
        int horizon,
        OrderEvaluator const& evaluate);

    /// Number of ordered picks of k out of n.
    double permutation_count(std::size_t n, std::size_t k);
}
