#include "infrasim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

namespace infrasim
{
    namespace
    {
        constexpr double kInf = std::numeric_limits<double>::infinity();

        struct Bpr
        {
            double t0;
            double alpha;
            double beta;
            double capacity;

            double
            time(double x) const
            {
                return t0 * (1.0 + alpha * std::pow(x / capacity, beta));
            }

            // Integral of time() from 0 to x.
            double
            integral(double x) const
            {
                return t0 * (x + alpha * capacity / (beta + 1.0) *
                                     std::pow(x / capacity, beta + 1.0));
            }
        };

        Bpr
        bpr_of(Component const& c, TrafficOptions const& o)
        {
            return {
                c.attr("free_flow_time"), c.attr_or("alpha", o.bpr_alpha),
                c.attr_or("beta", o.bpr_beta), c.attr("capacity")};
        }

        struct RoadGraph
        {
            std::size_t n = 0;
            // Outgoing (link index) lists in link order.
            std::vector<std::vector<std::size_t>> out;
        };

        // Dijkstra with (distance, node) ordering; predecessors change only on
        // strict improvement, so ties resolve the same way every run.
        void
        dijkstra(
            RoadGraph const& g,
            std::vector<RoadLink> const& links,
            std::vector<double> const& cost,
            std::size_t source,
            std::vector<double>& dist,
            std::vector<std::ptrdiff_t>& pred)
        {
            dist.assign(g.n, kInf);
            pred.assign(g.n, -1);
            using Item = std::pair<double, std::size_t>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
            dist[source] = 0.0;
            heap.push({0.0, source});
            while (!heap.empty())
            {
                auto [d, u] = heap.top();
                heap.pop();
                if (d > dist[u])
                {
                    continue;
                }
                for (auto l : g.out[u])
                {
                    if (!std::isfinite(cost[l]))
                    {
                        continue;
                    }
                    std::size_t const v = links[l].to;
                    double const nd = d + cost[l];
                    if (nd < dist[v])
                    {
                        dist[v] = nd;
                        pred[v] = static_cast<std::ptrdiff_t>(l);
                        heap.push({nd, v});
                    }
                }
            }
        }
    }

    std::optional<std::size_t>
    TrafficState::node_index(std::string const& id) const
    {
        auto it = std::find(nodes.begin(), nodes.end(), id);
        if (it == nodes.end())
        {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - nodes.begin());
    }

    double
    bpr_time(Component const& link, double flow, TrafficOptions const& options)
    {
        return bpr_of(link, options).time(flow);
    }

    TrafficState
    assign_traffic(
        IntegratedNetwork const& net,
        StatusMap const& statuses,
        TrafficOptions const& options)
    {
        TrafficState st;
        std::map<std::string, std::size_t> index;
        for (auto const& c : net.traffic)
        {
            if (c.kind == ComponentKind::zone_node)
            {
                index[c.id] = st.nodes.size();
                st.nodes.push_back(c.id);
            }
        }
        RoadGraph g;
        g.n = st.nodes.size();
        g.out.resize(g.n);
        std::vector<Bpr> bpr;
        std::vector<std::size_t> active;
        for (auto const& c : net.traffic)
        {
            if (c.kind != ComponentKind::road_link)
            {
                continue;
            }
            RoadLink l;
            l.id = c.id;
            l.from = index.at(c.from);
            l.to = index.at(c.to);
            l.free_flow_time = c.attr("free_flow_time");
            l.time = l.free_flow_time;
            l.in_service = statuses.in_service(c);
            if (l.in_service)
            {
                g.out[l.from].push_back(st.links.size());
                active.push_back(st.links.size());
            }
            bpr.push_back(bpr_of(c, options));
            st.links.push_back(std::move(l));
        }
        std::size_t const nl = st.links.size();

        // Demand grouped by origin, in OD-matrix order.
        std::map<std::size_t, std::vector<std::pair<std::size_t, double>>> by_origin;
        for (auto const& od : net.od_matrix)
        {
            if (od.demand > 0.0)
            {
                by_origin[index.at(od.origin)].push_back(
                    {index.at(od.destination), od.demand});
            }
        }

        std::vector<double> cost(nl, kInf);
        auto update_cost = [&](std::vector<double> const& x) {
            for (auto l : active)
            {
                cost[l] = bpr[l].time(x[l]);
            }
        };
        std::vector<double> dist;
        std::vector<std::ptrdiff_t> pred;
        bool first_pass = true;
        auto all_or_nothing = [&](std::vector<double>& y) {
            std::fill(y.begin(), y.end(), 0.0);
            for (auto const& [o, dests] : by_origin)
            {
                dijkstra(g, st.links, cost, o, dist, pred);
                for (auto [d, demand] : dests)
                {
                    if (!std::isfinite(dist[d]))
                    {
                        if (first_pass)
                        {
                            st.unreachable.push_back(
                                {st.nodes[o], st.nodes[d], demand});
                        }
                        continue;
                    }
                    for (std::size_t v = d; v != o;)
                    {
                        auto const l = static_cast<std::size_t>(pred[v]);
                        y[l] += demand;
                        v = st.links[l].from;
                    }
                }
            }
            first_pass = false;
        };
        auto beckmann = [&](std::vector<double> const& x) {
            double z = 0.0;
            for (auto l : active)
            {
                z += bpr[l].integral(x[l]);
            }
            return z;
        };

        std::vector<double> x(nl, 0.0);
        std::vector<double> y(nl, 0.0);
        update_cost(x);
        all_or_nothing(x);
        st.objective_history.push_back(beckmann(x));

        for (int it = 1; it <= options.max_iterations; ++it)
        {
            update_cost(x);
            all_or_nothing(y);
            double tx = 0.0;
            double ty = 0.0;
            for (auto l : active)
            {
                tx += cost[l] * x[l];
                ty += cost[l] * y[l];
            }
            st.relative_gap = tx > 0.0 ? (tx - ty) / tx : 0.0;
            st.iterations = it;
            if (st.relative_gap <= options.gap_tolerance)
            {
                break;
            }
            // Exact line search: the Beckmann derivative along y - x is
            // increasing in the step, so bisect for its root.
            auto slope = [&](double lambda) {
                double s = 0.0;
                for (auto l : active)
                {
                    double const dl = y[l] - x[l];
                    if (dl != 0.0)
                    {
                        s += dl * bpr[l].time(x[l] + lambda * dl);
                    }
                }
                return s;
            };
            double lambda = 1.0;
            if (slope(1.0) > 0.0)
            {
                double lo = 0.0;
                double hi = 1.0;
                for (int k = 0; k < 64; ++k)
                {
                    double const mid = 0.5 * (lo + hi);
                    (slope(mid) > 0.0 ? hi : lo) = mid;
                }
                lambda = 0.5 * (lo + hi);
            }
            for (auto l : active)
            {
                x[l] += lambda * (y[l] - x[l]);
            }
            st.objective_history.push_back(beckmann(x));
        }

        for (std::size_t l = 0; l < nl; ++l)
        {
            auto& link = st.links[l];
            double const flow = link.in_service ? x[l] : 0.0;
            link.time = link.in_service ? bpr[l].time(flow) : kInf;
            st.link_flow[link.id] = flow;
            st.link_time[link.id] = link.time;
        }
        return st;
    }

    std::vector<std::optional<double>>
    travel_times_from(
        TrafficState const& state,
        std::string const& origin,
        RoutingOptions const& routing)
    {
        auto o = state.node_index(origin);
        std::vector<std::optional<double>> out(state.nodes.size());
        if (!o)
        {
            return out;
        }
        RoadGraph g;
        g.n = state.nodes.size();
        g.out.resize(g.n);
        std::vector<double> cost(state.links.size(), kInf);
        for (std::size_t l = 0; l < state.links.size(); ++l)
        {
            auto const& link = state.links[l];
            if (link.in_service)
            {
                cost[l] = routing.free_flow ? link.free_flow_time : link.time;
            }
            else if (routing.failed_link_factor > 0.0)
            {
                cost[l] = routing.failed_link_factor * link.free_flow_time;
            }
            if (std::isfinite(cost[l]))
            {
                g.out[link.from].push_back(l);
            }
        }
        std::vector<double> dist;
        std::vector<std::ptrdiff_t> pred;
        dijkstra(g, state.links, cost, *o, dist, pred);
        for (std::size_t v = 0; v < g.n; ++v)
        {
            if (std::isfinite(dist[v]))
            {
                out[v] = dist[v];
            }
        }
        return out;
    }

    std::optional<double>
    shortest_travel_time(
        TrafficState const& state,
        std::string const& origin,
        std::string const& destination,
        RoutingOptions const& routing)
    {
        auto d = state.node_index(destination);
        if (!d)
        {
            return std::nullopt;
        }
        return travel_times_from(state, origin, routing)[*d];
    }
}
