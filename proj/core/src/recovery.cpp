#include "infrasim/recovery.hpp"

#include "infrasim/centrality.hpp"
#include "infrasim/error.hpp"
#include "infrasim/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace infrasim
{
    namespace
    {
        constexpr std::string_view kStrategyNames[] = {
            "max_flow", "centrality", "crew_distance", "zone", "mpc"};

        // Sort ids by descending key, then ascending id.
        void
        sort_descending(std::vector<std::string>& ids, std::map<std::string, double> const& key)
        {
            auto value = [&](std::string const& id) {
                auto it = key.find(id);
                return it == key.end() ? 0.0 : it->second;
            };
            std::sort(ids.begin(), ids.end(), [&](auto const& a, auto const& b) {
                double const va = value(a);
                double const vb = value(b);
                if (va != vb)
                {
                    return va > vb;
                }
                return a < b;
            });
        }

        std::map<NetworkKind, std::vector<std::string>>
        split_by_network(IntegratedNetwork const& net, std::set<std::string> const& failed)
        {
            std::map<NetworkKind, std::vector<std::string>> out;
            for (auto const& id : failed)
            {
                out[net.at(id).network].push_back(id);
            }
            return out;
        }
    }

    std::string_view
    to_string(Strategy s)
    {
        return kStrategyNames[static_cast<int>(s)];
    }

    std::optional<Strategy>
    parse_strategy(std::string_view s)
    {
        if (s == "capacity")
        {
            return Strategy::max_flow;
        }
        for (std::size_t i = 0; i < std::size(kStrategyNames); ++i)
        {
            if (kStrategyNames[i] == s)
            {
                return static_cast<Strategy>(i);
            }
        }
        return std::nullopt;
    }

    double
    RepairDurations::of(ComponentKind k) const
    {
        switch (k)
        {
        case ComponentKind::pipe:
            return pipe;
        case ComponentKind::pump:
            return pump;
        case ComponentKind::line:
            return line;
        case ComponentKind::transformer:
            return transformer;
        case ComponentKind::road_link:
            return road_link;
        default:
            return other;
        }
    }

    std::vector<Crew>
    default_crews(IntegratedNetwork const& net)
    {
        std::vector<Crew> out;
        for (auto k : kAllNetworks)
        {
            auto const& comps = net.components(k);
            if (comps.empty())
            {
                continue;
            }
            Crew c;
            c.id = std::string("crew_") + std::string(to_string(k));
            c.network = k;
            c.location = access_node(net, comps.front());
            out.push_back(std::move(c));
        }
        return out;
    }

    void
    validate_crews(IntegratedNetwork const& net, std::vector<Crew> const& crews)
    {
        std::set<std::string> ids;
        for (auto const& c : crews)
        {
            if (c.id.empty() || !ids.insert(c.id).second)
            {
                throw ValidationError("crew ids must be unique and non-empty ('" + c.id + "')");
            }
            auto const* loc = net.find(c.location);
            if (loc == nullptr || loc->kind != ComponentKind::zone_node)
            {
                throw ValidationError(
                    "crew '" + c.id + "' must start at a traffic node, not '" + c.location + "'");
            }
            if (!std::isfinite(c.busy_until) || c.busy_until < 0.0)
            {
                throw ValidationError("crew '" + c.id + "' has an invalid busy_until");
            }
        }
    }

    std::vector<RepairTask>
    to_tasks(IntegratedNetwork const& net, RepairOrder const& order, RepairDurations const& durations)
    {
        std::vector<RepairTask> out;
        for (auto const& [k, ids] : order)
        {
            int rank = 0;
            for (auto const& id : ids)
            {
                out.push_back({id, durations.of(net.at(id).kind), rank++});
            }
        }
        return out;
    }

    std::map<std::string, double>
    component_centrality(IntegratedNetwork const& net)
    {
        std::map<std::string, double> out;
        for (auto k : kAllNetworks)
        {
            for (auto const& [id, v] : edge_betweenness(network_graph(net, k)))
            {
                out[id] = v;
            }
        }
        return out;
    }

    std::map<std::string, double>
    baseline_peak_flows(IntegratedNetwork const& net, PdaParams const& pda, double duration, double step)
    {
        std::map<std::string, double> peak;
        auto bump = [&](std::string const& id, double v) {
            double& p = peak[id];
            p = std::max(p, std::abs(v));
        };
        StatusMap const none;
        if (!net.water.empty())
        {
            for (auto const& st : solve_hydraulics(net, none, duration, step, pda))
            {
                for (auto const& [id, q] : st.link_flow)
                {
                    bump(id, q);
                }
            }
        }
        if (!net.power.empty())
        {
            for (auto const& [id, f] : solve_power(net, none).line_flow)
            {
                bump(id, f);
            }
        }
        if (!net.traffic.empty())
        {
            for (auto const& [id, x] : assign_traffic(net, none).link_flow)
            {
                bump(id, x);
            }
        }
        return peak;
    }

    RepairOrder
    rank_components(
        IntegratedNetwork const& net,
        std::set<std::string> const& failed,
        Strategy strategy,
        RankingContext const& context)
    {
        RepairOrder order = split_by_network(net, failed);
        switch (strategy)
        {
        case Strategy::max_flow:
        {
            if (context.peak_flow == nullptr)
            {
                throw std::invalid_argument("max_flow ranking needs baseline peak flows");
            }
            for (auto& [k, ids] : order)
            {
                sort_descending(ids, *context.peak_flow);
            }
            break;
        }
        case Strategy::centrality:
        {
            std::map<std::string, double> computed;
            auto const* scores = context.centrality;
            if (scores == nullptr)
            {
                computed = component_centrality(net);
                scores = &computed;
            }
            for (auto& [k, ids] : order)
            {
                sort_descending(ids, *scores);
            }
            break;
        }
        case Strategy::crew_distance:
        {
            if (context.crews == nullptr || context.traffic == nullptr)
            {
                throw std::invalid_argument("crew_distance ranking needs crews and a traffic state");
            }
            for (auto& [k, ids] : order)
            {
                auto crew = std::find_if(
                    context.crews->begin(), context.crews->end(),
                    [k = k](Crew const& c) { return c.network == k; });
                if (crew == context.crews->end())
                {
                    throw std::invalid_argument(
                        "crew_distance ranking: no crew serves the " +
                        std::string(to_string(k)) + " network");
                }
                auto const times = travel_times_from(*context.traffic, crew->location);
                std::map<std::string, double> minus_time;
                for (auto const& id : ids)
                {
                    auto idx = context.traffic->node_index(access_node(net, net.at(id)));
                    double t = std::numeric_limits<double>::infinity();
                    if (idx && times[*idx])
                    {
                        t = *times[*idx];
                    }
                    minus_time[id] = -t;
                }
                sort_descending(ids, minus_time);
            }
            break;
        }
        case Strategy::zone:
        {
            if (context.peak_flow == nullptr)
            {
                throw std::invalid_argument("zone ranking needs baseline peak flows for ties");
            }
            for (auto& [k, ids] : order)
            {
                std::sort(ids.begin(), ids.end(), [&](auto const& a, auto const& b) {
                    int const za = zone_priority(net, net.at(a));
                    int const zb = zone_priority(net, net.at(b));
                    if (za != zb)
                    {
                        return za > zb;
                    }
                    auto flow = [&](std::string const& id) {
                        auto it = context.peak_flow->find(id);
                        return it == context.peak_flow->end() ? 0.0 : it->second;
                    };
                    double const fa = flow(a);
                    double const fb = flow(b);
                    if (fa != fb)
                    {
                        return fa > fb;
                    }
                    return a < b;
                });
            }
            break;
        }
        case Strategy::mpc:
            throw std::invalid_argument("mpc is not a ranking heuristic; use mpc_sequence");
        }
        return order;
    }

    double
    permutation_count(std::size_t n, std::size_t k)
    {
        double p = 1.0;
        for (std::size_t i = 0; i < k && i < n; ++i)
        {
            p *= static_cast<double>(n - i);
        }
        return k > n ? 0.0 : p;
    }

    RepairOrder
    mpc_sequence(
        IntegratedNetwork const& net,
        std::set<std::string> const& failed,
        int horizon,
        OrderEvaluator const& evaluate)
    {
        if (horizon < 1)
        {
            throw std::invalid_argument("mpc horizon must be at least 1");
        }
        auto remaining = split_by_network(net, failed);  // ids sorted
        RepairOrder committed;
        for (auto const& [k, ids] : remaining)
        {
            committed[k];
        }

        auto candidate_base = [&]() {
            RepairOrder order = committed;
            for (auto const& [k, ids] : remaining)
            {
                order[k].insert(order[k].end(), ids.begin(), ids.end());
            }
            return order;
        };

        bool any = true;
        while (any)
        {
            any = false;
            for (auto k : kAllNetworks)
            {
                auto it = remaining.find(k);
                if (it == remaining.end() || it->second.empty())
                {
                    continue;
                }
                any = true;
                auto& rest = it->second;
                std::size_t const n = rest.size();
                if (n == 1)
                {
                    committed[k].push_back(rest.front());
                    rest.clear();
                    continue;
                }
                std::size_t const depth = std::min(n, static_cast<std::size_t>(horizon));
                if (permutation_count(n, depth) > kMpcMaxCandidates)
                {
                    throw Error(
                        "mpc: " + std::to_string(n) + " failed " + std::string(to_string(k)) +
                        " components with horizon " + std::to_string(horizon) +
                        " exceed the candidate limit; use a smaller horizon or a heuristic strategy");
                }

                // Enumerate ordered picks of `depth` indices in lexicographic
                // order; the first strictly better score wins.
                std::vector<std::size_t> pick;
                std::vector<bool> used(n, false);
                double best = std::numeric_limits<double>::infinity();
                std::optional<std::size_t> best_first;
                std::function<void()> recurse = [&]() {
                    if (pick.size() == depth)
                    {
                        RepairOrder order = candidate_base();
                        auto& seq = order[k];
                        seq = committed[k];
                        for (auto i : pick)
                        {
                            seq.push_back(rest[i]);
                        }
                        for (std::size_t i = 0; i < n; ++i)
                        {
                            if (!used[i])
                            {
                                seq.push_back(rest[i]);
                            }
                        }
                        double const score = evaluate(order);
                        if (score < best || !best_first)
                        {
                            best = score;
                            best_first = pick.front();
                        }
                        return;
                    }
                    for (std::size_t i = 0; i < n; ++i)
                    {
                        if (!used[i])
                        {
                            used[i] = true;
                            pick.push_back(i);
                            recurse();
                            pick.pop_back();
                            used[i] = false;
                        }
                    }
                };
                recurse();
                committed[k].push_back(rest[*best_first]);
                rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(*best_first));
            }
        }
        return committed;
    }
}
