#pragma once

#include "infrasim/network.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace infrasim
{
    /// Pressure thresholds for pressure-dependent demand.
    struct PdaParams
    {
        double p0 = 0.0;   ///< m, no consumption at or below
        double pf = 20.0;  ///< m, full desired demand above
        double e = 2.0;    ///< exponent

        void validate() const;
    };

    /// Delivered demand at `pressure` for a node that wants `desired`.
    ///   0                                   p <= p0
    ///   desired * ((p - p0)/(pf - p0))^(1/e)  p0 < p <= pf
    ///   desired                             p > pf
    double pda_demand(double pressure, double desired, PdaParams const& params);

    struct HydraulicOptions
    {
        double tolerance = 1e-6;           ///< mass (m3/s) and head (m) residual
        int max_iterations = 100;
        /// m; link and leak laws are linear inside this head band around
        /// zero so their slopes stay finite.
        double linear_band = 1e-6;
        double leak_discharge_coefficient = 0.75;
    };

    /// Water held between time steps: tank levels and the remaining volume
    /// of finite reservoirs.
    struct WaterStorage
    {
        std::map<std::string, double> tank_level;
        std::map<std::string, double> reservoir_volume;

        static WaterStorage initial(IntegratedNetwork const& net);

        friend bool operator==(WaterStorage const&, WaterStorage const&) =
            default;
    };

    struct HydraulicState
    {
        double time = 0.0;
        std::map<std::string, double> node_pressure;
        std::map<std::string, double> node_actual_demand;
        std::map<std::string, double> node_desired_demand;
        std::map<std::string, double> link_flow;
        /// Orifice discharge of leaking pipes, keyed by pipe id.
        std::map<std::string, double> leak_flow;
        std::map<std::string, double> tank_level;
        std::vector<std::string> dry_reservoirs;
        int iterations = 0;
        double max_mass_residual = 0.0;
    };

    /// Compiled water network for one set of component statuses.
    ///
    /// Steady-state heads and flows are found by a damped Newton iteration on
    /// the joint head/flow system (Hazen-Williams pipes, single-point pump
    /// curves with check valves, pressure-dependent demands, leak orifices).
    /// Tanks and reservoirs are fixed-head boundaries; an empty tank cannot
    /// discharge and a full one cannot fill.
    class HydraulicModel
    {
    public:
        /// `inactive` lists components out of service for indirect reasons
        /// (a pump whose motor lost power).
        HydraulicModel(
            IntegratedNetwork const& net,
            StatusMap const& statuses,
            std::set<std::string> const& inactive,
            PdaParams params,
            HydraulicOptions options = {});

        struct Snapshot
        {
            std::vector<double> head;    ///< per model node
            std::vector<double> demand;  ///< delivered, per model node
            std::vector<double> leak;    ///< orifice outflow, per model node
            std::vector<double> flow;    ///< per model link (0 if inactive)
            std::vector<double> tank_outflow;  ///< per tank, into the network
            std::vector<double> reservoir_outflow;
            std::vector<bool> reservoir_dry;
            int iterations = 0;
            double max_mass_residual = 0.0;
        };

        Snapshot solve(WaterStorage const& storage);

        /// Explicit Euler update of tank levels and reservoir volumes.
        void advance(WaterStorage& storage, Snapshot const& s, double dt) const;

        HydraulicState to_state(
            Snapshot const& s, WaterStorage const& storage, double time) const;

        /// Demand nodes with their desired demand, in network order.
        std::vector<std::string> const& consumer_ids() const
        {
            return consumer_ids_;
        }
        /// Delivered demand per consumer for a snapshot.
        std::vector<double> consumer_supply(Snapshot const& s) const;
        std::vector<double> const& consumer_desired() const
        {
            return consumer_desired_;
        }

        /// Flow as a function of head (difference), its slope and its
        /// antiderivative.
        struct Law
        {
            double flow = 0.0;
            double slope = 0.0;
            double content = 0.0;
        };

    private:
        enum class NodeType
        {
            junction,
            tank,
            reservoir,
            leak,
        };
        struct Node
        {
            std::string id;
            NodeType type = NodeType::junction;
            double elevation = 0.0;
            double desired = 0.0;
            double leak_area = 0.0;
            double area = 0.0;
            double min_level = 0.0;
            double max_level = 0.0;
            bool finite_volume = false;
        };
        enum class LinkType
        {
            pipe,
            pump,
        };
        struct Link
        {
            std::string id;  ///< network id; half pipes share their parent's
            LinkType type = LinkType::pipe;
            std::size_t from = 0;
            std::size_t to = 0;
            double resistance = 0.0;  ///< pipe Hazen-Williams coefficient
            double shutoff_head = 0.0;
            double max_flow = 0.0;
            double initial_flow = 0.0;
        };

        Law link_law(Link const& l, double dh) const;
        Law node_law(Node const& n, double head) const;
        double node_outflow(Node const& n, double head) const;

        bool newton(
            std::vector<bool> const& fixed,
            std::vector<double> const& fixed_head,
            std::vector<bool> const& link_open,
            std::vector<double>& head,
            std::vector<double>& flow,
            int& iterations,
            double& residual) const;

        PdaParams params_;
        HydraulicOptions options_;
        std::vector<Node> nodes_;
        std::vector<Link> links_;
        std::vector<std::size_t> tanks_;
        std::vector<std::size_t> reservoirs_;
        std::vector<std::string> consumer_ids_;
        std::vector<std::size_t> consumer_nodes_;
        std::vector<double> consumer_desired_;
        std::map<std::string, std::size_t> leak_node_of_pipe_;
        std::vector<std::string> pipe_ids_;
        std::vector<std::string> pump_ids_;
        std::vector<double> warm_head_;
        std::vector<double> warm_flow_;
    };

    /// Runs `duration / step + 1` snapshots from t = 0, updating tank levels
    /// between them. `storage` (optional) supplies initial levels and
    /// receives the final ones. Throws SolverError on non-convergence.
    std::vector<HydraulicState> solve_hydraulics(
        IntegratedNetwork const& net,
        StatusMap const& statuses,
        double duration,
        double step,
        PdaParams const& params,
        HydraulicOptions const& options = {},
        WaterStorage* storage = nullptr);
}
