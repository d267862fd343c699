#include "infrasim/power_flow.hpp"

#include "infrasim/error.hpp"
#include "infrasim/linear_program.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace infrasim
{
    namespace
    {
        class DisjointSets
        {
        public:
            explicit DisjointSets(std::size_t n) : parent_(n)
            {
                std::iota(parent_.begin(), parent_.end(), std::size_t{0});
            }

            std::size_t
            find(std::size_t x)
            {
                while (parent_[x] != x)
                {
                    parent_[x] = parent_[parent_[x]];
                    x = parent_[x];
                }
                return x;
            }

            // The smaller index stays the representative.
            void
            unite(std::size_t a, std::size_t b)
            {
                a = find(a);
                b = find(b);
                if (a != b)
                {
                    parent_[std::max(a, b)] = std::min(a, b);
                }
            }

        private:
            std::vector<std::size_t> parent_;
        };

        bool
        is_source(ComponentKind k)
        {
            return k == ComponentKind::generator ||
                   k == ComponentKind::external_grid;
        }

        bool
        is_consumer(ComponentKind k)
        {
            return k == ComponentKind::load || k == ComponentKind::motor;
        }

        bool
        is_branch(ComponentKind k)
        {
            return k == ComponentKind::line || k == ComponentKind::transformer;
        }
    }

    double
    PowerState::total_served() const
    {
        double s = 0.0;
        for (auto const& [id, v] : served_load)
        {
            s += v;
        }
        return s;
    }

    double
    PowerState::total_demand() const
    {
        double s = total_served();
        for (auto const& [id, v] : shed_load)
        {
            s += v;
        }
        return s;
    }

    PowerState
    solve_power(
        IntegratedNetwork const& net,
        StatusMap const& statuses,
        PowerOptions const& options)
    {
        if (net.power.empty())
        {
            throw std::invalid_argument("power network is empty");
        }
        std::vector<Component const*> buses;
        std::map<std::string, std::size_t> bus_index;
        for (auto const& c : net.power)
        {
            if (c.kind == ComponentKind::bus)
            {
                bus_index[c.id] = buses.size();
                buses.push_back(&c);
            }
        }
        std::size_t const nb = buses.size();
        std::vector<bool> bus_up(nb);
        for (std::size_t i = 0; i < nb; ++i)
        {
            bus_up[i] = statuses.in_service(*buses[i]);
        }
        auto up_bus = [&](std::string const& id) -> std::ptrdiff_t {
            auto it = bus_index.find(id);
            if (it == bus_index.end() || !bus_up[it->second])
            {
                return -1;
            }
            return static_cast<std::ptrdiff_t>(it->second);
        };

        DisjointSets merged(nb);
        for (auto const& c : net.power)
        {
            if (c.kind == ComponentKind::power_switch && statuses.in_service(c))
            {
                auto a = up_bus(c.from);
                auto b = up_bus(c.to);
                if (a >= 0 && b >= 0)
                {
                    merged.unite(
                        static_cast<std::size_t>(a), static_cast<std::size_t>(b));
                }
            }
        }

        struct Branch
        {
            Component const* c;
            std::size_t from;
            std::size_t to;
            double b;
        };
        std::vector<Branch> branches;
        DisjointSets island(nb);
        for (auto const& c : net.power)
        {
            if (!is_branch(c.kind) || !statuses.in_service(c))
            {
                continue;
            }
            auto a = up_bus(c.from);
            auto b = up_bus(c.to);
            if (a < 0 || b < 0)
            {
                continue;
            }
            std::size_t const ra = merged.find(static_cast<std::size_t>(a));
            std::size_t const rb = merged.find(static_cast<std::size_t>(b));
            if (ra == rb)
            {
                continue;
            }
            branches.push_back(
                {&c, ra, rb, options.base_mva * c.attr("susceptance")});
            island.unite(ra, rb);
        }

        PowerState out;
        std::map<std::size_t, std::vector<Component const*>> sources;
        std::map<std::size_t, std::vector<Component const*>> consumers;
        for (auto const& c : net.power)
        {
            if (is_consumer(c.kind))
            {
                out.served_load[c.id] = 0.0;
                out.shed_load[c.id] = c.attr("demand_mw");
            }
            if (is_branch(c.kind))
            {
                out.line_flow[c.id] = 0.0;
            }
            if (is_source(c.kind))
            {
                out.generation[c.id] = 0.0;
            }
            if (!(is_consumer(c.kind) || is_source(c.kind)) ||
                !statuses.in_service(c))
            {
                continue;
            }
            auto b = up_bus(c.bus);
            if (b < 0)
            {
                continue;
            }
            std::size_t const r = merged.find(static_cast<std::size_t>(b));
            (is_source(c.kind) ? sources : consumers)[r].push_back(&c);
        }
        for (std::size_t i = 0; i < nb; ++i)
        {
            out.bus_angle[buses[i]->id] = 0.0;
        }

        // Group merged buses into islands.
        std::map<std::size_t, std::vector<std::size_t>> islands;
        for (std::size_t i = 0; i < nb; ++i)
        {
            if (bus_up[i] && merged.find(i) == i)
            {
                islands[island.find(i)].push_back(i);
            }
        }

        std::vector<double> angle(nb, 0.0);
        std::vector<double> injection(nb, 0.0);
        for (auto const& [key, members] : islands)
        {
            std::vector<Component const*> src;
            std::vector<Component const*> con;
            for (auto m : members)
            {
                for (auto* s : sources[m])
                {
                    src.push_back(s);
                }
                for (auto* c : consumers[m])
                {
                    con.push_back(c);
                }
            }
            if (src.empty())
            {
                continue;
            }

            LinearProgram lp;
            std::map<std::size_t, std::size_t> theta;
            std::size_t const reference = members.front();
            for (auto m : members)
            {
                if (m != reference)
                {
                    theta[m] = lp.add_variable(
                        -LinearProgram::kInf, LinearProgram::kInf, 0.0);
                }
            }
            std::vector<std::size_t> g_var;
            for (auto* s : src)
            {
                g_var.push_back(lp.add_variable(0.0, s->attr("max_mw"), 0.0));
            }
            std::vector<std::size_t> s_var;
            for (auto* c : con)
            {
                s_var.push_back(lp.add_variable(0.0, c->attr("demand_mw"), -1.0));
            }

            std::map<std::size_t, std::vector<std::pair<std::size_t, double>>> balance;
            for (auto m : members)
            {
                balance[m];
            }
            auto bus_of = [&](Component const* c) {
                return merged.find(bus_index.at(c->bus));
            };
            for (std::size_t k = 0; k < src.size(); ++k)
            {
                balance[bus_of(src[k])].push_back({g_var[k], 1.0});
            }
            for (std::size_t k = 0; k < con.size(); ++k)
            {
                balance[bus_of(con[k])].push_back({s_var[k], -1.0});
            }
            for (auto const& br : branches)
            {
                if (island.find(br.from) != key)
                {
                    continue;
                }
                // flow = b (theta_from - theta_to), leaving `from`.
                std::vector<std::pair<std::size_t, double>> flow;
                if (br.from != reference)
                {
                    flow.push_back({theta.at(br.from), br.b});
                }
                if (br.to != reference)
                {
                    flow.push_back({theta.at(br.to), -br.b});
                }
                double const limit = br.c->attr("limit_mw");
                lp.add_row(flow, RowSense::less_equal, limit);
                lp.add_row(flow, RowSense::greater_equal, -limit);
                for (auto [v, coef] : flow)
                {
                    balance[br.from].push_back({v, -coef});
                    balance[br.to].push_back({v, coef});
                }
            }
            for (auto& [bus, terms] : balance)
            {
                lp.add_row(terms, RowSense::equal, 0.0);
            }

            // Without losses every served MW needs exactly one generated MW,
            // so a shedding penalty above the dearest source makes the single
            // objective lexicographic: served load first, then cost.
            double dearest = 0.0;
            for (std::size_t k = 0; k < src.size(); ++k)
            {
                double const c = src[k]->attr("cost");
                dearest = std::max(dearest, c);
                lp.set_cost(g_var[k], c);
            }
            double const penalty = 10.0 * (dearest + 1.0);
            for (auto v : s_var)
            {
                lp.set_cost(v, -penalty);
            }
            auto const sol = solve_lp(lp, options.tolerance);
            if (sol.status != LpStatus::optimal)
            {
                throw SolverError(
                    "power dispatch is infeasible even with full shedding "
                    "(internal error)");
            }

            for (auto m : members)
            {
                out.energized_buses.insert(buses[m]->id);
                if (m != reference)
                {
                    angle[m] = sol.x[theta.at(m)];
                }
            }
            for (std::size_t k = 0; k < src.size(); ++k)
            {
                double const g = std::max(0.0, sol.x[g_var[k]]);
                out.generation[src[k]->id] = g;
                injection[bus_of(src[k])] += g;
            }
            for (std::size_t k = 0; k < con.size(); ++k)
            {
                double const d = con[k]->attr("demand_mw");
                double const s = std::clamp(sol.x[s_var[k]], 0.0, d);
                out.served_load[con[k]->id] = s;
                out.shed_load[con[k]->id] = d - s;
                injection[bus_of(con[k])] -= s;
            }
        }

        for (std::size_t i = 0; i < nb; ++i)
        {
            if (bus_up[i])
            {
                out.bus_angle[buses[i]->id] = angle[merged.find(i)];
                if (out.energized_buses.contains(buses[merged.find(i)]->id))
                {
                    out.energized_buses.insert(buses[i]->id);
                }
            }
        }
        for (auto const& br : branches)
        {
            double const f = br.b * (angle[br.from] - angle[br.to]);
            out.line_flow[br.c->id] = f;
            injection[br.from] -= f;
            injection[br.to] += f;
        }
        for (double r : injection)
        {
            out.max_balance_residual =
                std::max(out.max_balance_residual, std::abs(r));
        }
        return out;
    }

    bool
    motor_running(PowerState const& state, std::string const& motor_id)
    {
        auto served = state.served_load.find(motor_id);
        auto shed = state.shed_load.find(motor_id);
        if (served == state.served_load.end() || shed == state.shed_load.end())
        {
            return false;
        }
        return served->second > 0.0 && shed->second <= 1e-6;
    }

    std::set<std::string>
    unpowered_dependents(IntegratedNetwork const& net, PowerState const& state)
    {
        std::set<std::string> out;
        for (auto const& d : net.dependencies)
        {
            if (d.kind != DependencyKind::motor_drives_pump)
            {
                continue;
            }
            auto const* src = net.find(d.source_id);
            if (src == nullptr)
            {
                continue;
            }
            bool const running = src->kind == ComponentKind::bus
                                     ? state.energized_buses.contains(src->id)
                                     : motor_running(state, src->id);
            if (!running)
            {
                out.insert(d.target_id);
            }
        }
        return out;
    }
}
