#include "infrasim/hydraulics.hpp"

#include "infrasim/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

namespace infrasim
{
    namespace
    {
        constexpr double kGravity = 9.81;
        constexpr double kHwExponent = 1.852;
        constexpr double kLevelEps = 1e-9;

        // Reverse flow through a pump meets a steep artificial resistance so
        // the curve stays monotone; the check valve then closes the pump.
        constexpr double kReverseFlowPenalty = 100.0;

        double
        hazen_williams_resistance(double length, double diameter, double c)
        {
            return 10.667 * length /
                   (std::pow(c, kHwExponent) * std::pow(diameter, 4.871));
        }
    }

    void
    PdaParams::validate() const
    {
        if (!(pf > p0) || p0 < 0.0 || !(e > 0.0))
        {
            throw std::invalid_argument(
                "PDA parameters require pf > p0 >= 0 and e > 0");
        }
    }

    double
    pda_demand(double pressure, double desired, PdaParams const& params)
    {
        if (pressure <= params.p0)
        {
            return 0.0;
        }
        if (pressure > params.pf)
        {
            return desired;
        }
        double const u = (pressure - params.p0) / (params.pf - params.p0);
        return desired * std::pow(u, 1.0 / params.e);
    }

    WaterStorage
    WaterStorage::initial(IntegratedNetwork const& net)
    {
        WaterStorage s;
        for (auto const& c : net.water)
        {
            if (c.kind == ComponentKind::tank)
            {
                s.tank_level[c.id] = c.attr("init_level");
            }
            else if (c.kind == ComponentKind::reservoir &&
                     c.capacity_attrs.contains("volume"))
            {
                s.reservoir_volume[c.id] = c.attr("volume");
            }
        }
        return s;
    }

    HydraulicModel::HydraulicModel(
        IntegratedNetwork const& net,
        StatusMap const& statuses,
        std::set<std::string> const& inactive,
        PdaParams params,
        HydraulicOptions options)
        : params_(params), options_(options)
    {
        params_.validate();
        std::map<std::string, std::size_t> index;
        for (auto const& c : net.water)
        {
            Node n;
            n.id = c.id;
            switch (c.kind)
            {
                case ComponentKind::demand_node:
                    n.type = NodeType::junction;
                    n.elevation = c.attr("elevation");
                    n.desired = c.attr("base_demand");
                    break;
                case ComponentKind::tank:
                    n.type = NodeType::tank;
                    n.elevation = c.attr("elevation");
                    n.area = c.attr("area");
                    n.min_level = c.attr("min_level");
                    n.max_level = c.attr("max_level");
                    break;
                case ComponentKind::reservoir:
                    n.type = NodeType::reservoir;
                    n.elevation = c.attr("head");
                    n.finite_volume = c.capacity_attrs.contains("volume");
                    break;
                default:
                    continue;
            }
            index[c.id] = nodes_.size();
            if (n.type == NodeType::tank)
            {
                tanks_.push_back(nodes_.size());
            }
            if (n.type == NodeType::reservoir)
            {
                reservoirs_.push_back(nodes_.size());
            }
            if (n.type == NodeType::junction)
            {
                consumer_ids_.push_back(n.id);
                consumer_nodes_.push_back(nodes_.size());
                consumer_desired_.push_back(n.desired);
            }
            nodes_.push_back(std::move(n));
        }

        for (auto const& c : net.water)
        {
            if (c.kind == ComponentKind::pipe)
            {
                pipe_ids_.push_back(c.id);
                Status const s = statuses.of(c);
                if (s == Status::under_repair)
                {
                    continue;  // isolated while crews work on it
                }
                double const d = c.attr("diameter");
                double const r = hazen_williams_resistance(
                    c.attr("length"), d, c.attr("roughness"));
                double const q0 =
                    0.3 * std::numbers::pi * d * d / 4.0;  // 0.3 m/s
                std::size_t const a = index.at(c.from);
                std::size_t const b = index.at(c.to);
                if (s == Status::failed)
                {
                    Node leak;
                    leak.id = c.id + "#leak";
                    leak.type = NodeType::leak;
                    // A reservoir's "elevation" is its water surface, so the
                    // ground level comes from the other end.
                    double ea = nodes_[a].elevation;
                    double eb = nodes_[b].elevation;
                    if (nodes_[a].type == NodeType::reservoir)
                    {
                        ea = eb;
                    }
                    if (nodes_[b].type == NodeType::reservoir)
                    {
                        eb = ea;
                    }
                    leak.elevation = 0.5 * (ea + eb);
                    leak.leak_area = 0.5 * std::numbers::pi * d * d / 4.0;
                    std::size_t const m = nodes_.size();
                    leak_node_of_pipe_[c.id] = m;
                    nodes_.push_back(std::move(leak));
                    links_.push_back(
                        {c.id, LinkType::pipe, a, m, 0.5 * r, 0, 0, q0});
                    links_.push_back(
                        {c.id, LinkType::pipe, m, b, 0.5 * r, 0, 0, q0});
                }
                else
                {
                    links_.push_back({c.id, LinkType::pipe, a, b, r, 0, 0, q0});
                }
            }
            else if (c.kind == ComponentKind::pump)
            {
                pump_ids_.push_back(c.id);
                if (!statuses.in_service(c) || inactive.contains(c.id))
                {
                    continue;
                }
                double const qmax = c.attr("max_flow");
                links_.push_back(
                    {c.id,
                     LinkType::pump,
                     index.at(c.from),
                     index.at(c.to),
                     0.0,
                     c.attr("shutoff_head"),
                     qmax,
                     0.5 * qmax});
            }
        }
    }

    namespace
    {
        /// Odd power law q = sign(x) c |x|^m, made linear inside |x| < band so
        /// the slope stays finite at zero. Returns flow, slope and the
        /// antiderivative (content) at x.
        HydraulicModel::Law
        power_law(double x, double c, double m, double band)
        {
            double const ax = std::abs(x);
            double const sign = x < 0.0 ? -1.0 : 1.0;
            double const qb = c * std::pow(band, m);
            if (ax < band)
            {
                double const slope = qb / band;
                return {slope * x, slope, 0.5 * slope * x * x};
            }
            double const q = c * std::pow(ax, m);
            double const content =
                0.5 * qb * band + c * (std::pow(ax, m + 1.0) - std::pow(band, m + 1.0)) / (m + 1.0);
            return {sign * q, m * q / ax, content};
        }
    }

    HydraulicModel::Law
    HydraulicModel::link_law(Link const& l, double dh) const
    {
        double const band = options_.linear_band;
        if (l.type == LinkType::pump)
        {
            // -H0 + k q|q| = dh, with a steeper k against the pump.
            double const x = dh + l.shutoff_head;
            double k = l.shutoff_head / (l.max_flow * l.max_flow);
            if (x < 0.0)
            {
                k *= kReverseFlowPenalty;
            }
            return power_law(x, 1.0 / std::sqrt(k), 0.5, band);
        }
        // Hazen-Williams: dh = r q|q|^0.852.
        return power_law(dh, std::pow(l.resistance, -1.0 / kHwExponent), 1.0 / kHwExponent, band);
    }

    HydraulicModel::Law
    HydraulicModel::node_law(Node const& n, double head) const
    {
        double const p = head - n.elevation;
        if (n.type == NodeType::junction)
        {
            if (p <= params_.p0 || n.desired == 0.0)
            {
                return {};
            }
            double const span = params_.pf - params_.p0;
            double const m = 1.0 / params_.e;
            if (p > params_.pf)
            {
                return {n.desired, 0.0, n.desired * (span / (m + 1.0) + (p - params_.pf))};
            }
            double const u = (p - params_.p0) / span;
            double const q = n.desired * std::pow(u, m);
            // The slope is unbounded at p0 when e > 1; cap it for the
            // Newton matrix only.
            double const slope = n.desired * m / span * std::pow(std::max(u, 1e-12), m - 1.0);
            return {q, slope, n.desired * span * std::pow(u, m + 1.0) / (m + 1.0)};
        }
        if (n.type == NodeType::leak)
        {
            if (p <= 0.0)
            {
                return {};
            }
            double const c = options_.leak_discharge_coefficient * n.leak_area * std::sqrt(2.0 * kGravity);
            return power_law(p, c, 0.5, options_.linear_band);
        }
        return {};
    }

    double
    HydraulicModel::node_outflow(Node const& n, double head) const
    {
        return node_law(n, head).flow;
    }

    bool
    HydraulicModel::newton(
        std::vector<bool> const& fixed,
        std::vector<double> const& fixed_head,
        std::vector<bool> const& link_open,
        std::vector<double>& head,
        std::vector<double>& flow,
        int& iterations,
        double& residual) const
    {
        std::size_t const n_nodes = nodes_.size();
        std::size_t const n_links = links_.size();

        // Nodes reachable from a fixed head over open links take part in the
        // solve; the rest are dry (zero pressure, zero flow).
        std::vector<std::vector<std::size_t>> adj(n_nodes);
        for (std::size_t l = 0; l < n_links; ++l)
        {
            if (link_open[l])
            {
                adj[links_[l].from].push_back(l);
                adj[links_[l].to].push_back(l);
            }
        }
        std::vector<bool> reached(n_nodes, false);
        std::deque<std::size_t> queue;
        for (std::size_t i = 0; i < n_nodes; ++i)
        {
            if (fixed[i])
            {
                reached[i] = true;
                queue.push_back(i);
            }
        }
        while (!queue.empty())
        {
            auto u = queue.front();
            queue.pop_front();
            for (auto l : adj[u])
            {
                auto v = links_[l].from == u ? links_[l].to : links_[l].from;
                if (!reached[v])
                {
                    reached[v] = true;
                    queue.push_back(v);
                }
            }
        }

        std::vector<int> var(n_nodes, -1);
        std::vector<std::size_t> free_nodes;
        for (std::size_t i = 0; i < n_nodes; ++i)
        {
            if (fixed[i])
            {
                head[i] = fixed_head[i];
            }
            else if (reached[i])
            {
                var[i] = static_cast<int>(free_nodes.size());
                free_nodes.push_back(i);
            }
            else
            {
                head[i] = nodes_[i].elevation;
            }
        }
        std::vector<std::size_t> active;
        for (std::size_t l = 0; l < n_links; ++l)
        {
            if (link_open[l] && reached[links_[l].from])
            {
                active.push_back(l);
            }
            else
            {
                flow[l] = 0.0;
            }
        }

        auto const nf = static_cast<Eigen::Index>(free_nodes.size());
        iterations = 0;
        residual = 0.0;

        // Flows follow from heads through the link laws, so only the free
        // heads are unknown. Equilibrium minimizes the convex total content
        //   F(h) = sum over links of Phi_l(h_from - h_to) + sum over nodes of D_i(h_i)
        // whose gradient is the nodal mass imbalance.
        Eigen::VectorXd grad(nf);
        Eigen::MatrixXd hess(nf, nf);
        auto evaluate = [&](std::vector<double> const& h, std::vector<double>& q, bool with_hessian) {
            grad.setZero();
            if (with_hessian)
            {
                hess.setZero();
            }
            double content = 0.0;
            for (auto l : active)
            {
                auto const& link = links_[l];
                auto const law = link_law(link, h[link.from] - h[link.to]);
                q[l] = law.flow;
                content += law.content;
                int const a = var[link.from];
                int const b = var[link.to];
                if (a >= 0)
                {
                    grad[a] += law.flow;
                }
                if (b >= 0)
                {
                    grad[b] -= law.flow;
                }
                if (with_hessian)
                {
                    if (a >= 0)
                    {
                        hess(a, a) += law.slope;
                    }
                    if (b >= 0)
                    {
                        hess(b, b) += law.slope;
                    }
                    if (a >= 0 && b >= 0)
                    {
                        hess(a, b) -= law.slope;
                        hess(b, a) -= law.slope;
                    }
                }
            }
            for (Eigen::Index k = 0; k < nf; ++k)
            {
                auto const law = node_law(nodes_[free_nodes[static_cast<std::size_t>(k)]],
                                          h[free_nodes[static_cast<std::size_t>(k)]]);
                grad[k] += law.flow;
                content += law.content;
                if (with_hessian)
                {
                    hess(k, k) += law.slope;
                }
            }
            return content;
        };

        if (nf == 0)
        {
            evaluate(head, flow, false);
            return true;
        }

        double content = evaluate(head, flow, true);
        std::vector<double> trial_h(head);
        std::vector<double> trial_q(flow);
        for (int it = 0; it < options_.max_iterations; ++it)
        {
            double const imbalance = grad.cwiseAbs().maxCoeff();
            if (imbalance < options_.tolerance)
            {
                // One full step polishes smooth solutions to rounding level;
                // keep it only if it helps.
                Eigen::VectorXd const step = hess.ldlt().solve(-grad);
                if (step.allFinite())
                {
                    for (Eigen::Index k = 0; k < nf; ++k)
                    {
                        auto const i = free_nodes[static_cast<std::size_t>(k)];
                        trial_h[i] = head[i] + step[k];
                    }
                    Eigen::VectorXd const kept = grad;
                    evaluate(trial_h, trial_q, false);
                    if (grad.cwiseAbs().maxCoeff() < imbalance)
                    {
                        std::swap(head, trial_h);
                        std::swap(flow, trial_q);
                    }
                    else
                    {
                        grad = kept;
                    }
                }
                iterations = it;
                residual = grad.cwiseAbs().maxCoeff();
                return true;
            }
            Eigen::VectorXd const step = hess.ldlt().solve(-grad);
            if (!step.allFinite())
            {
                break;
            }
            double const slope = grad.dot(step);
            Eigen::VectorXd const old_grad = grad;
            double alpha = 1.0;
            double trial = 0.0;
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls)
            {
                for (Eigen::Index k = 0; k < nf; ++k)
                {
                    auto const i = free_nodes[static_cast<std::size_t>(k)];
                    trial_h[i] = head[i] + alpha * step[k];
                }
                trial = evaluate(trial_h, trial_q, false);
                // Armijo on the content; near the solution rounding swamps
                // the decrease, so a smaller imbalance also passes.
                if (trial <= content + 1e-4 * alpha * slope ||
                    (std::abs(trial - content) <= 1e-12 * std::max(1.0, std::abs(content)) &&
                     grad.cwiseAbs().maxCoeff() < old_grad.cwiseAbs().maxCoeff()))
                {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted)
            {
                grad = old_grad;
                break;
            }
            std::swap(head, trial_h);
            std::swap(flow, trial_q);
            trial_h = head;
            trial_q = flow;
            content = evaluate(head, flow, true);
        }
        iterations = options_.max_iterations;
        residual = grad.cwiseAbs().maxCoeff();
        return residual < options_.tolerance;
    }

    HydraulicModel::Snapshot
    HydraulicModel::solve(WaterStorage const& storage)
    {
        std::size_t const n_nodes = nodes_.size();
        std::size_t const n_links = links_.size();

        std::vector<double> fixed_head(n_nodes, 0.0);
        std::vector<bool> reservoir_dry(reservoirs_.size(), false);
        for (std::size_t r = 0; r < reservoirs_.size(); ++r)
        {
            auto const& n = nodes_[reservoirs_[r]];
            fixed_head[reservoirs_[r]] = n.elevation;
            if (n.finite_volume)
            {
                auto it = storage.reservoir_volume.find(n.id);
                reservoir_dry[r] =
                    it == storage.reservoir_volume.end() || it->second <= 0.0;
            }
        }
        std::vector<double> level(tanks_.size(), 0.0);
        for (std::size_t t = 0; t < tanks_.size(); ++t)
        {
            auto const& n = nodes_[tanks_[t]];
            auto it = storage.tank_level.find(n.id);
            level[t] = it != storage.tank_level.end() ? it->second : n.min_level;
            fixed_head[tanks_[t]] = n.elevation + level[t];
        }

        if (warm_head_.size() != n_nodes)
        {
            double top = 0.0;
            for (double h : fixed_head)
            {
                top = std::max(top, h);
            }
            warm_head_.assign(n_nodes, top);
            warm_flow_.resize(n_links);
            for (std::size_t l = 0; l < n_links; ++l)
            {
                warm_flow_[l] = links_[l].initial_flow;
            }
        }

        std::vector<bool> tank_closed(tanks_.size(), false);
        std::vector<bool> link_open(n_links, true);
        Snapshot snap;
        snap.reservoir_dry = reservoir_dry;

        for (int pass = 0; pass < 2 * static_cast<int>(n_links + tanks_.size()) + 2;
             ++pass)
        {
            std::vector<bool> fixed(n_nodes, false);
            for (std::size_t r = 0; r < reservoirs_.size(); ++r)
            {
                fixed[reservoirs_[r]] = !reservoir_dry[r];
            }
            for (std::size_t t = 0; t < tanks_.size(); ++t)
            {
                fixed[tanks_[t]] = !tank_closed[t];
            }

            std::vector<double> head = warm_head_;
            std::vector<double> flow = warm_flow_;
            for (std::size_t l = 0; l < n_links; ++l)
            {
                if (link_open[l] && flow[l] == 0.0)
                {
                    flow[l] = links_[l].initial_flow;
                }
            }
            int iterations = 0;
            double residual = 0.0;
            bool ok = newton(
                fixed, fixed_head, link_open, head, flow, iterations, residual);
            if (!ok)
            {
                // Retry once from a cold start before giving up.
                for (std::size_t l = 0; l < n_links; ++l)
                {
                    flow[l] = link_open[l] ? links_[l].initial_flow : 0.0;
                }
                double top = 0.0;
                for (std::size_t i = 0; i < n_nodes; ++i)
                {
                    if (fixed[i])
                    {
                        top = std::max(top, fixed_head[i]);
                    }
                }
                std::fill(head.begin(), head.end(), top);
                int more = 0;
                ok = newton(
                    fixed, fixed_head, link_open, head, flow, more, residual);
                iterations += more;
            }
            if (!ok)
            {
                std::ostringstream oss;
                oss << "hydraulic solver did not converge after "
                    << iterations << " iterations (worst mass residual "
                    << residual << " m3/s)";
                throw SolverError(oss.str());
            }

            bool changed = false;
            for (std::size_t l = 0; l < n_links; ++l)
            {
                if (links_[l].type == LinkType::pump && link_open[l] &&
                    flow[l] < -options_.tolerance)
                {
                    link_open[l] = false;  // check valve
                    changed = true;
                }
            }
            std::vector<double> tank_out(tanks_.size(), 0.0);
            for (std::size_t l = 0; l < n_links; ++l)
            {
                for (std::size_t t = 0; t < tanks_.size(); ++t)
                {
                    if (links_[l].from == tanks_[t])
                    {
                        tank_out[t] += flow[l];
                    }
                    if (links_[l].to == tanks_[t])
                    {
                        tank_out[t] -= flow[l];
                    }
                }
            }
            for (std::size_t t = 0; t < tanks_.size(); ++t)
            {
                if (tank_closed[t])
                {
                    continue;
                }
                auto const& n = nodes_[tanks_[t]];
                bool const empty = level[t] <= n.min_level + kLevelEps &&
                                   tank_out[t] > options_.tolerance;
                bool const full = level[t] >= n.max_level - kLevelEps &&
                                  tank_out[t] < -options_.tolerance;
                if (empty || full)
                {
                    tank_closed[t] = true;
                    changed = true;
                }
            }

            snap.head = head;
            snap.flow = flow;
            snap.iterations = iterations;
            snap.max_mass_residual = residual;
            snap.tank_outflow = tank_out;
            if (!changed)
            {
                warm_head_ = head;
                warm_flow_ = flow;
                break;
            }
        }

        snap.demand.assign(n_nodes, 0.0);
        snap.leak.assign(n_nodes, 0.0);
        for (std::size_t i = 0; i < n_nodes; ++i)
        {
            if (nodes_[i].type == NodeType::junction)
            {
                snap.demand[i] = node_outflow(nodes_[i], snap.head[i]);
            }
            else if (nodes_[i].type == NodeType::leak)
            {
                snap.leak[i] = node_outflow(nodes_[i], snap.head[i]);
            }
        }
        snap.reservoir_outflow.assign(reservoirs_.size(), 0.0);
        for (std::size_t l = 0; l < n_links; ++l)
        {
            for (std::size_t r = 0; r < reservoirs_.size(); ++r)
            {
                if (links_[l].from == reservoirs_[r])
                {
                    snap.reservoir_outflow[r] += snap.flow[l];
                }
                if (links_[l].to == reservoirs_[r])
                {
                    snap.reservoir_outflow[r] -= snap.flow[l];
                }
            }
        }
        return snap;
    }

    void
    HydraulicModel::advance(
        WaterStorage& storage, Snapshot const& s, double dt) const
    {
        for (std::size_t t = 0; t < tanks_.size(); ++t)
        {
            auto const& n = nodes_[tanks_[t]];
            double& lvl = storage.tank_level[n.id];
            lvl -= s.tank_outflow[t] * dt / n.area;
            lvl = std::clamp(lvl, n.min_level, n.max_level);
        }
        for (std::size_t r = 0; r < reservoirs_.size(); ++r)
        {
            auto const& n = nodes_[reservoirs_[r]];
            if (!n.finite_volume)
            {
                continue;
            }
            double& vol = storage.reservoir_volume[n.id];
            vol = std::max(0.0, vol - s.reservoir_outflow[r] * dt);
        }
    }

    std::vector<double>
    HydraulicModel::consumer_supply(Snapshot const& s) const
    {
        std::vector<double> out;
        out.reserve(consumer_nodes_.size());
        for (auto i : consumer_nodes_)
        {
            out.push_back(s.demand[i]);
        }
        return out;
    }

    HydraulicState
    HydraulicModel::to_state(
        Snapshot const& s, WaterStorage const& storage, double time) const
    {
        HydraulicState st;
        st.time = time;
        st.iterations = s.iterations;
        st.max_mass_residual = s.max_mass_residual;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
        {
            auto const& n = nodes_[i];
            if (n.type == NodeType::leak)
            {
                continue;
            }
            st.node_pressure[n.id] = s.head[i] - n.elevation;
            if (n.type == NodeType::junction)
            {
                st.node_actual_demand[n.id] = s.demand[i];
                st.node_desired_demand[n.id] = n.desired;
            }
        }
        for (auto const& id : pipe_ids_)
        {
            st.link_flow[id] = 0.0;
        }
        for (auto const& id : pump_ids_)
        {
            st.link_flow[id] = 0.0;
        }
        // For a leaking pipe report the upstream half.
        for (std::size_t l = links_.size(); l-- > 0;)
        {
            st.link_flow[links_[l].id] = s.flow[l];
        }
        for (auto const& [pipe, node] : leak_node_of_pipe_)
        {
            st.leak_flow[pipe] = s.leak[node];
        }
        for (auto t : tanks_)
        {
            auto it = storage.tank_level.find(nodes_[t].id);
            st.tank_level[nodes_[t].id] =
                it != storage.tank_level.end() ? it->second : 0.0;
        }
        for (std::size_t r = 0; r < reservoirs_.size(); ++r)
        {
            if (s.reservoir_dry[r])
            {
                st.dry_reservoirs.push_back(nodes_[reservoirs_[r]].id);
            }
        }
        return st;
    }

    std::vector<HydraulicState>
    solve_hydraulics(
        IntegratedNetwork const& net,
        StatusMap const& statuses,
        double duration,
        double step,
        PdaParams const& params,
        HydraulicOptions const& options,
        WaterStorage* storage)
    {
        if (net.water.empty())
        {
            throw std::invalid_argument("water network is empty");
        }
        if (!(step > 0.0) || duration < 0.0)
        {
            throw std::invalid_argument("step must be > 0 and duration >= 0");
        }
        double const ratio = duration / step;
        auto const n_steps = static_cast<long>(std::llround(ratio));
        if (std::abs(ratio - static_cast<double>(n_steps)) > 1e-9)
        {
            throw std::invalid_argument("step must divide duration");
        }
        WaterStorage local =
            storage != nullptr ? *storage : WaterStorage::initial(net);
        HydraulicModel model(net, statuses, {}, params, options);
        std::vector<HydraulicState> out;
        out.reserve(static_cast<std::size_t>(n_steps + 1));
        for (long k = 0; k <= n_steps; ++k)
        {
            auto snap = model.solve(local);
            out.push_back(
                model.to_state(snap, local, static_cast<double>(k) * step));
            if (k < n_steps)
            {
                model.advance(local, snap, step);
            }
        }
        if (storage != nullptr)
        {
            *storage = local;
        }
        return out;
    }
}
