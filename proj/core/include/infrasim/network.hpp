#pragma once

#include "infrasim/geometry.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace infrasim
{
    enum class NetworkKind
    {
        water,
        power,
        traffic,
    };

    inline constexpr NetworkKind kAllNetworks[] = {
        NetworkKind::water, NetworkKind::power, NetworkKind::traffic};

    enum class ComponentKind
    {
        // water
        pipe,
        demand_node,
        pump,
        tank,
        reservoir,
        // power
        bus,
        load,
        line,
        transformer,
        motor,
        generator,
        external_grid,
        power_switch,
        // traffic
        road_link,
        zone_node,
    };

    /// Lifecycle of a component through a disaster. Transitions only move
    /// forward: operational -> failed -> under_repair -> repaired.
    enum class Status
    {
        operational,
        failed,
        under_repair,
        repaired,
    };

    enum class DependencyKind
    {
        motor_drives_pump,
        reservoir_feeds_generator,
        road_provides_access,
    };

    std::string_view to_string(NetworkKind k);
    std::string_view to_string(ComponentKind k);
    std::string_view to_string(Status s);
    std::string_view to_string(DependencyKind k);

    std::optional<NetworkKind> parse_network_kind(std::string_view s);
    std::optional<ComponentKind> parse_component_kind(std::string_view s);
    std::optional<Status> parse_status(std::string_view s);
    std::optional<DependencyKind> parse_dependency_kind(std::string_view s);

    NetworkKind network_of(ComponentKind k);

    /// Kinds that are graph edges (have from/to endpoints).
    bool is_edge_kind(ComponentKind k);

    /// Power elements hanging off a bus (load, motor, generator, grid).
    bool is_bus_attached_kind(ComponentKind k);

    bool is_valid_transition(Status from, Status to);

    inline bool
    is_in_service(Status s)
    {
        return s == Status::operational || s == Status::repaired;
    }

    struct Component
    {
        std::string id;
        NetworkKind network = NetworkKind::water;
        ComponentKind kind = ComponentKind::demand_node;
        Point location;
        Status status = Status::operational;
        /// Kind-specific parameters in SI units (see README for the schema).
        std::map<std::string, double> capacity_attrs;
        /// Edge endpoints (node ids in the same network) for edge kinds.
        std::string from;
        std::string to;
        /// Host bus for bus-attached power elements.
        std::string bus;

        double attr(std::string_view name) const;
        double attr_or(std::string_view name, double fallback) const;

        friend bool operator==(Component const&, Component const&) = default;
    };

    struct Dependency
    {
        std::string source_id;
        std::string target_id;
        DependencyKind kind = DependencyKind::motor_drives_pump;

        friend bool operator==(Dependency const&, Dependency const&) = default;
    };

    /// Origin-destination trip rate between two zone nodes (veh/h).
    struct OdDemand
    {
        std::string origin;
        std::string destination;
        double demand = 0.0;

        friend bool operator==(OdDemand const&, OdDemand const&) = default;
    };

    struct Violation
    {
        std::string component_id;
        std::string rule;
        std::string message;
    };

    /// Three typed infrastructure graphs plus the cross-network dependency
    /// table. Treated as immutable once validated; runs keep their own
    /// StatusMap instead of mutating components.
    class IntegratedNetwork
    {
    public:
        std::string name;
        std::vector<Component> water;
        std::vector<Component> power;
        std::vector<Component> traffic;
        std::vector<Dependency> dependencies;
        std::vector<OdDemand> od_matrix;

        std::vector<Component> const& components(NetworkKind k) const;
        std::vector<Component>& components(NetworkKind k);

        Component const* find(std::string_view id) const;
        /// Throws UnknownComponentError.
        Component const& at(std::string_view id) const;

        std::size_t component_count() const
        {
            return water.size() + power.size() + traffic.size();
        }

        friend bool
        operator==(IntegratedNetwork const&, IntegratedNetwork const&) =
            default;
    };

    /// Per-run status overrides layered over the network's stored statuses.
    class StatusMap
    {
    public:
        Status of(Component const& c) const;
        Status of(std::string const& id, Status fallback) const;
        bool in_service(Component const& c) const
        {
            return is_in_service(of(c));
        }
        void set(std::string const& id, Status s) { overrides_[id] = s; }
        std::map<std::string, Status> const& overrides() const
        {
            return overrides_;
        }

        friend bool operator==(StatusMap const&, StatusMap const&) = default;

    private:
        std::map<std::string, Status> overrides_;
    };

    /// Empty iff every type invariant holds. Each violation names the
    /// component and the rule broken.
    std::vector<Violation> validate_network(IntegratedNetwork const& net);

    /// Dependencies whose source is `id`, or whose source is attached to bus
    /// `id`, paired with the resolved target component.
    std::vector<std::pair<Dependency, Component>>
    dependents_of(IntegratedNetwork const& net, std::string_view id);

    /// Closest traffic node by Euclidean distance; ties go to the smaller id.
    std::string const& nearest_traffic_node(
        IntegratedNetwork const& net, Point p);

    /// Traffic node a repair crew must reach to work on `c`: the tail of a
    /// road link, the node itself, or the nearest node for water/power assets.
    std::string const& access_node(
        IntegratedNetwork const& net, Component const& c);

    /// Zone priority (1..3) of the traffic node serving `c`; defaults to 1.
    int zone_priority(IntegratedNetwork const& net, Component const& c);

    /// Node ids of a network graph, in component order.
    std::vector<std::string> graph_nodes(
        IntegratedNetwork const& net, NetworkKind k);
}
