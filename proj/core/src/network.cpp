#include "infrasim/network.hpp"

#include "infrasim/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <unordered_map>

namespace infrasim
{
    namespace
    {
        template <typename Enum, std::size_t N>
        std::optional<Enum>
        parse_enum(
            std::string_view s,
            std::array<std::pair<std::string_view, Enum>, N> const& table)
        {
            for (auto const& [name, value] : table)
            {
                if (name == s)
                {
                    return value;
                }
            }
            return std::nullopt;
        }

        constexpr std::array<std::pair<std::string_view, NetworkKind>, 3>
            kNetworkNames{{
                {"water", NetworkKind::water},
                {"power", NetworkKind::power},
                {"traffic", NetworkKind::traffic},
            }};

        constexpr std::array<std::pair<std::string_view, ComponentKind>, 15>
            kComponentNames{{
                {"pipe", ComponentKind::pipe},
                {"demand_node", ComponentKind::demand_node},
                {"pump", ComponentKind::pump},
                {"tank", ComponentKind::tank},
                {"reservoir", ComponentKind::reservoir},
                {"bus", ComponentKind::bus},
                {"load", ComponentKind::load},
                {"line", ComponentKind::line},
                {"transformer", ComponentKind::transformer},
                {"motor", ComponentKind::motor},
                {"generator", ComponentKind::generator},
                {"external_grid", ComponentKind::external_grid},
                {"switch", ComponentKind::power_switch},
                {"road_link", ComponentKind::road_link},
                {"zone_node", ComponentKind::zone_node},
            }};

        constexpr std::array<std::pair<std::string_view, Status>, 4>
            kStatusNames{{
                {"operational", Status::operational},
                {"failed", Status::failed},
                {"under_repair", Status::under_repair},
                {"repaired", Status::repaired},
            }};

        constexpr std::array<std::pair<std::string_view, DependencyKind>, 3>
            kDependencyNames{{
                {"motor_drives_pump", DependencyKind::motor_drives_pump},
                {"reservoir_feeds_generator",
                 DependencyKind::reservoir_feeds_generator},
                {"road_provides_access", DependencyKind::road_provides_access},
            }};

        template <typename Enum, std::size_t N>
        std::string_view
        enum_name(
            Enum v,
            std::array<std::pair<std::string_view, Enum>, N> const& table)
        {
            for (auto const& [name, value] : table)
            {
                if (value == v)
                {
                    return name;
                }
            }
            return "?";
        }

        struct AttrRule
        {
            std::string_view name;
            bool required;
            bool allow_zero;
        };

        std::vector<AttrRule>
        attr_rules(ComponentKind k)
        {
            switch (k)
            {
                case ComponentKind::pipe:
                    return {
                        {"length", true, false},
                        {"diameter", true, false},
                        {"roughness", true, false}};
                case ComponentKind::demand_node:
                    return {
                        {"elevation", true, true},
                        {"base_demand", true, true}};
                case ComponentKind::pump:
                    return {
                        {"shutoff_head", true, false},
                        {"max_flow", true, false}};
                case ComponentKind::tank:
                    return {
                        {"elevation", true, true},
                        {"area", true, false},
                        {"min_level", true, true},
                        {"max_level", true, false},
                        {"init_level", true, true}};
                case ComponentKind::reservoir:
                    return {{"head", true, true}, {"volume", false, false}};
                case ComponentKind::bus:
                    return {{"base_kv", false, false}};
                case ComponentKind::load:
                case ComponentKind::motor:
                    return {{"demand_mw", true, true}};
                case ComponentKind::line:
                case ComponentKind::transformer:
                    return {
                        {"susceptance", true, false},
                        {"limit_mw", true, false}};
                case ComponentKind::generator:
                case ComponentKind::external_grid:
                    return {{"max_mw", true, false}, {"cost", true, true}};
                case ComponentKind::power_switch:
                    return {};
                case ComponentKind::road_link:
                    return {
                        {"free_flow_time", true, false},
                        {"capacity", true, false},
                        {"alpha", false, false},
                        {"beta", false, false}};
                case ComponentKind::zone_node:
                    return {{"priority", false, false}};
            }
            return {};
        }

        bool
        is_graph_node_kind(ComponentKind k)
        {
            switch (k)
            {
                case ComponentKind::demand_node:
                case ComponentKind::tank:
                case ComponentKind::reservoir:
                case ComponentKind::bus:
                case ComponentKind::zone_node:
                    return true;
                default:
                    return false;
            }
        }

        std::string_view
        id_prefix(NetworkKind k)
        {
            switch (k)
            {
                case NetworkKind::water:
                    return "W_";
                case NetworkKind::power:
                    return "P_";
                case NetworkKind::traffic:
                    return "T_";
            }
            return "";
        }

        void
        add(std::vector<Violation>& out,
            std::string id,
            std::string rule,
            std::string message)
        {
            out.push_back({std::move(id), std::move(rule), std::move(message)});
        }

        // Undirected reachability over the given node set; returns the
        // component label per node.
        std::vector<int>
        undirected_components(
            std::vector<std::string> const& nodes,
            std::vector<std::pair<std::string, std::string>> const& edges)
        {
            std::unordered_map<std::string, std::size_t> index;
            for (std::size_t i = 0; i < nodes.size(); ++i)
            {
                index.emplace(nodes[i], i);
            }
            std::vector<std::vector<std::size_t>> adj(nodes.size());
            for (auto const& [a, b] : edges)
            {
                auto ia = index.find(a);
                auto ib = index.find(b);
                if (ia == index.end() || ib == index.end())
                {
                    continue;
                }
                adj[ia->second].push_back(ib->second);
                adj[ib->second].push_back(ia->second);
            }
            std::vector<int> label(nodes.size(), -1);
            int next = 0;
            for (std::size_t s = 0; s < nodes.size(); ++s)
            {
                if (label[s] >= 0)
                {
                    continue;
                }
                std::deque<std::size_t> q{s};
                label[s] = next;
                while (!q.empty())
                {
                    auto u = q.front();
                    q.pop_front();
                    for (auto v : adj[u])
                    {
                        if (label[v] < 0)
                        {
                            label[v] = next;
                            q.push_back(v);
                        }
                    }
                }
                ++next;
            }
            return label;
        }

        void
        report_disconnected(
            std::vector<Violation>& out,
            std::vector<std::string> const& nodes,
            std::vector<int> const& label,
            std::string_view network)
        {
            if (nodes.empty())
            {
                return;
            }
            std::map<int, std::size_t> sizes;
            for (int l : label)
            {
                ++sizes[l];
            }
            // Largest component is the reference; ties go to the first one.
            int ref = label.front();
            for (auto const& [l, n] : sizes)
            {
                if (n > sizes[ref])
                {
                    ref = l;
                }
            }
            for (std::size_t i = 0; i < nodes.size(); ++i)
            {
                if (label[i] != ref)
                {
                    add(out,
                        nodes[i],
                        "connectivity",
                        std::string(network) +
                            " node is disconnected from the main graph");
                }
            }
        }

        std::vector<bool>
        directed_reach(
            std::size_t n,
            std::vector<std::vector<std::size_t>> const& adj,
            std::size_t start)
        {
            std::vector<bool> seen(n, false);
            std::deque<std::size_t> q{start};
            seen[start] = true;
            while (!q.empty())
            {
                auto u = q.front();
                q.pop_front();
                for (auto v : adj[u])
                {
                    if (!seen[v])
                    {
                        seen[v] = true;
                        q.push_back(v);
                    }
                }
            }
            return seen;
        }
    }

    std::string_view
    to_string(NetworkKind k)
    {
        return enum_name(k, kNetworkNames);
    }

    std::string_view
    to_string(ComponentKind k)
    {
        return enum_name(k, kComponentNames);
    }

    std::string_view
    to_string(Status s)
    {
        return enum_name(s, kStatusNames);
    }

    std::string_view
    to_string(DependencyKind k)
    {
        return enum_name(k, kDependencyNames);
    }

    std::optional<NetworkKind>
    parse_network_kind(std::string_view s)
    {
        return parse_enum(s, kNetworkNames);
    }

    std::optional<ComponentKind>
    parse_component_kind(std::string_view s)
    {
        return parse_enum(s, kComponentNames);
    }

    std::optional<Status>
    parse_status(std::string_view s)
    {
        return parse_enum(s, kStatusNames);
    }

    std::optional<DependencyKind>
    parse_dependency_kind(std::string_view s)
    {
        return parse_enum(s, kDependencyNames);
    }

    NetworkKind
    network_of(ComponentKind k)
    {
        switch (k)
        {
            case ComponentKind::pipe:
            case ComponentKind::demand_node:
            case ComponentKind::pump:
            case ComponentKind::tank:
            case ComponentKind::reservoir:
                return NetworkKind::water;
            case ComponentKind::road_link:
            case ComponentKind::zone_node:
                return NetworkKind::traffic;
            default:
                return NetworkKind::power;
        }
    }

    bool
    is_edge_kind(ComponentKind k)
    {
        switch (k)
        {
            case ComponentKind::pipe:
            case ComponentKind::pump:
            case ComponentKind::line:
            case ComponentKind::transformer:
            case ComponentKind::power_switch:
            case ComponentKind::road_link:
                return true;
            default:
                return false;
        }
    }

    bool
    is_bus_attached_kind(ComponentKind k)
    {
        switch (k)
        {
            case ComponentKind::load:
            case ComponentKind::motor:
            case ComponentKind::generator:
            case ComponentKind::external_grid:
                return true;
            default:
                return false;
        }
    }

    bool
    is_valid_transition(Status from, Status to)
    {
        return (from == Status::operational && to == Status::failed) ||
               (from == Status::failed && to == Status::under_repair) ||
               (from == Status::under_repair && to == Status::repaired);
    }

    double
    Component::attr(std::string_view name) const
    {
        auto it = capacity_attrs.find(std::string(name));
        if (it == capacity_attrs.end())
        {
            throw Error(
                "component '" + id + "' has no attribute '" +
                std::string(name) + "'");
        }
        return it->second;
    }

    double
    Component::attr_or(std::string_view name, double fallback) const
    {
        auto it = capacity_attrs.find(std::string(name));
        return it == capacity_attrs.end() ? fallback : it->second;
    }

    std::vector<Component> const&
    IntegratedNetwork::components(NetworkKind k) const
    {
        switch (k)
        {
            case NetworkKind::water:
                return water;
            case NetworkKind::power:
                return power;
            case NetworkKind::traffic:
                return traffic;
        }
        return water;
    }

    std::vector<Component>&
    IntegratedNetwork::components(NetworkKind k)
    {
        return const_cast<std::vector<Component>&>(
            static_cast<IntegratedNetwork const&>(*this).components(k));
    }

    Component const*
    IntegratedNetwork::find(std::string_view id) const
    {
        for (auto k : kAllNetworks)
        {
            for (auto const& c : components(k))
            {
                if (c.id == id)
                {
                    return &c;
                }
            }
        }
        return nullptr;
    }

    Component const&
    IntegratedNetwork::at(std::string_view id) const
    {
        auto const* c = find(id);
        if (c == nullptr)
        {
            throw UnknownComponentError(std::string(id));
        }
        return *c;
    }

    Status
    StatusMap::of(Component const& c) const
    {
        return of(c.id, c.status);
    }

    Status
    StatusMap::of(std::string const& id, Status fallback) const
    {
        auto it = overrides_.find(id);
        return it == overrides_.end() ? fallback : it->second;
    }

    std::vector<std::string>
    graph_nodes(IntegratedNetwork const& net, NetworkKind k)
    {
        std::vector<std::string> out;
        for (auto const& c : net.components(k))
        {
            if (is_graph_node_kind(c.kind))
            {
                out.push_back(c.id);
            }
        }
        return out;
    }

    std::vector<Violation>
    validate_network(IntegratedNetwork const& net)
    {
        std::vector<Violation> out;
        std::unordered_map<std::string, Component const*> by_id;

        for (auto k : kAllNetworks)
        {
            for (auto const& c : net.components(k))
            {
                if (c.id.empty())
                {
                    add(out, c.id, "id", "component id is empty");
                    continue;
                }
                if (!by_id.emplace(c.id, &c).second)
                {
                    add(out, c.id, "unique_id", "duplicate component id");
                }
                if (c.network != k || network_of(c.kind) != k)
                {
                    add(out,
                        c.id,
                        "network_kind",
                        std::string(to_string(c.kind)) +
                            " is not a valid kind for the " +
                            std::string(to_string(k)) + " network");
                }
                if (!c.id.starts_with(id_prefix(k)))
                {
                    add(out,
                        c.id,
                        "id_prefix",
                        "id must start with '" + std::string(id_prefix(k)) +
                            "'");
                }
                if (!std::isfinite(c.location.x) ||
                    !std::isfinite(c.location.y))
                {
                    add(out, c.id, "location", "location is not finite");
                }
                auto const rules = attr_rules(c.kind);
                for (auto const& rule : rules)
                {
                    if (rule.required &&
                        !c.capacity_attrs.contains(std::string(rule.name)))
                    {
                        add(out,
                            c.id,
                            "attribute_missing",
                            "missing attribute '" + std::string(rule.name) +
                                "'");
                    }
                }
                for (auto const& [name, value] : c.capacity_attrs)
                {
                    auto it = std::find_if(
                        rules.begin(), rules.end(), [&](AttrRule const& r) {
                            return r.name == name;
                        });
                    bool const allow_zero =
                        it != rules.end() ? it->allow_zero : false;
                    bool const ok = std::isfinite(value) &&
                                    (allow_zero ? value >= 0.0 : value > 0.0);
                    if (!ok)
                    {
                        add(out,
                            c.id,
                            "attribute_range",
                            "attribute '" + name + "' must be " +
                                (allow_zero ? "non-negative" : "positive"));
                    }
                }
                if (c.kind == ComponentKind::tank)
                {
                    double const lo = c.attr_or("min_level", 0.0);
                    double const hi = c.attr_or("max_level", 0.0);
                    double const init = c.attr_or("init_level", 0.0);
                    if (!(lo < hi) || init < lo || init > hi)
                    {
                        add(out,
                            c.id,
                            "tank_levels",
                            "tank levels must satisfy min < max and "
                            "min <= init <= max");
                    }
                }
                if (c.kind == ComponentKind::zone_node)
                {
                    double const p = c.attr_or("priority", 1.0);
                    if (p != 1.0 && p != 2.0 && p != 3.0)
                    {
                        add(out,
                            c.id,
                            "zone_priority",
                            "zone priority must be 1, 2 or 3");
                    }
                }
            }
        }

        auto node_of_kind = [&](std::string const& id, NetworkKind k) {
            auto it = by_id.find(id);
            return it != by_id.end() && it->second->network == k &&
                   is_graph_node_kind(it->second->kind);
        };

        // Edge endpoints and bus attachments.
        for (auto k : kAllNetworks)
        {
            for (auto const& c : net.components(k))
            {
                if (is_edge_kind(c.kind))
                {
                    for (auto const* end : {&c.from, &c.to})
                    {
                        if (!node_of_kind(*end, k))
                        {
                            add(out,
                                c.id,
                                "edge_endpoint",
                                "endpoint '" + *end +
                                    "' is not a node of the same network");
                        }
                    }
                    if (c.from == c.to)
                    {
                        add(out, c.id, "self_loop", "edge is a self loop");
                    }
                }
                if (is_bus_attached_kind(c.kind) &&
                    !node_of_kind(c.bus, NetworkKind::power))
                {
                    add(out,
                        c.id,
                        "bus_attachment",
                        "host bus '" + c.bus + "' does not exist");
                }
            }
        }

        // Water: every node in one undirected component.
        {
            auto nodes = graph_nodes(net, NetworkKind::water);
            std::vector<std::pair<std::string, std::string>> edges;
            for (auto const& c : net.water)
            {
                if (is_edge_kind(c.kind))
                {
                    edges.emplace_back(c.from, c.to);
                }
            }
            report_disconnected(
                out, nodes, undirected_components(nodes, edges), "water");
        }

        // Power: buses carrying a branch or an element form one component.
        // A bare pole with nothing attached is tolerated.
        {
            std::set<std::string> used;
            std::vector<std::pair<std::string, std::string>> edges;
            for (auto const& c : net.power)
            {
                if (is_edge_kind(c.kind))
                {
                    edges.emplace_back(c.from, c.to);
                    used.insert(c.from);
                    used.insert(c.to);
                }
                else if (is_bus_attached_kind(c.kind))
                {
                    used.insert(c.bus);
                }
            }
            std::vector<std::string> nodes;
            for (auto const& id : graph_nodes(net, NetworkKind::power))
            {
                if (used.contains(id))
                {
                    nodes.push_back(id);
                }
            }
            report_disconnected(
                out, nodes, undirected_components(nodes, edges), "power");
        }

        // Traffic: strongly connected so every OD pair is routable.
        {
            auto nodes = graph_nodes(net, NetworkKind::traffic);
            if (!nodes.empty())
            {
                std::unordered_map<std::string, std::size_t> index;
                for (std::size_t i = 0; i < nodes.size(); ++i)
                {
                    index.emplace(nodes[i], i);
                }
                std::vector<std::vector<std::size_t>> fwd(nodes.size());
                std::vector<std::vector<std::size_t>> bwd(nodes.size());
                for (auto const& c : net.traffic)
                {
                    if (c.kind != ComponentKind::road_link)
                    {
                        continue;
                    }
                    auto a = index.find(c.from);
                    auto b = index.find(c.to);
                    if (a == index.end() || b == index.end())
                    {
                        continue;
                    }
                    fwd[a->second].push_back(b->second);
                    bwd[b->second].push_back(a->second);
                }
                auto f = directed_reach(nodes.size(), fwd, 0);
                auto b = directed_reach(nodes.size(), bwd, 0);
                for (std::size_t i = 0; i < nodes.size(); ++i)
                {
                    if (!f[i] || !b[i])
                    {
                        add(out,
                            nodes[i],
                            "connectivity",
                            "traffic node is not strongly connected to the "
                            "road graph");
                    }
                }
            }
        }

        for (auto const& d : net.dependencies)
        {
            auto src = by_id.find(d.source_id);
            auto dst = by_id.find(d.target_id);
            if (src == by_id.end() || dst == by_id.end())
            {
                add(out,
                    src == by_id.end() ? d.source_id : d.target_id,
                    "dependency_endpoint",
                    "dependency endpoint does not exist");
                continue;
            }
            Component const& s = *src->second;
            Component const& t = *dst->second;
            if (s.network == t.network)
            {
                add(out,
                    d.target_id,
                    "cross_network",
                    "dependency endpoints must belong to different networks");
                continue;
            }
            bool ok = true;
            switch (d.kind)
            {
                case DependencyKind::motor_drives_pump:
                    ok = (s.kind == ComponentKind::motor ||
                          s.kind == ComponentKind::bus) &&
                         t.kind == ComponentKind::pump;
                    break;
                case DependencyKind::reservoir_feeds_generator:
                    ok = s.kind == ComponentKind::reservoir &&
                         t.kind == ComponentKind::generator;
                    break;
                case DependencyKind::road_provides_access:
                    ok = s.kind == ComponentKind::road_link &&
                         t.network != NetworkKind::traffic;
                    break;
            }
            if (!ok)
            {
                add(out,
                    d.target_id,
                    "dependency_kind",
                    std::string(to_string(d.kind)) +
                        " does not match the endpoint kinds");
            }
        }

        std::set<std::pair<std::string, std::string>> od_seen;
        for (auto const& od : net.od_matrix)
        {
            for (auto const* end : {&od.origin, &od.destination})
            {
                auto it = by_id.find(*end);
                if (it == by_id.end() ||
                    it->second->kind != ComponentKind::zone_node)
                {
                    add(out,
                        *end,
                        "od_endpoint",
                        "OD endpoint is not a zone node");
                }
            }
            if (!std::isfinite(od.demand) || od.demand < 0.0)
            {
                add(out, od.origin, "od_demand", "OD demand must be >= 0");
            }
            if (od.origin == od.destination && od.demand != 0.0)
            {
                add(out,
                    od.origin,
                    "od_diagonal",
                    "OD matrix diagonal must be zero");
            }
            if (!od_seen.emplace(od.origin, od.destination).second)
            {
                add(out, od.origin, "od_duplicate", "duplicate OD pair");
            }
        }
        return out;
    }

    std::vector<std::pair<Dependency, Component>>
    dependents_of(IntegratedNetwork const& net, std::string_view id)
    {
        Component const& self = net.at(id);
        std::set<std::string> sources{self.id};
        if (self.kind == ComponentKind::bus)
        {
            for (auto const& c : net.power)
            {
                if (is_bus_attached_kind(c.kind) && c.bus == self.id)
                {
                    sources.insert(c.id);
                }
            }
        }
        std::vector<std::pair<Dependency, Component>> out;
        for (auto const& d : net.dependencies)
        {
            if (sources.contains(d.source_id))
            {
                out.emplace_back(d, net.at(d.target_id));
            }
        }
        return out;
    }

    std::string const&
    nearest_traffic_node(IntegratedNetwork const& net, Point p)
    {
        Component const* best = nullptr;
        double best_d = std::numeric_limits<double>::infinity();
        for (auto const& c : net.traffic)
        {
            if (c.kind != ComponentKind::zone_node)
            {
                continue;
            }
            double const d = distance(p, c.location);
            if (d < best_d || (d == best_d && best && c.id < best->id))
            {
                best = &c;
                best_d = d;
            }
        }
        if (best == nullptr)
        {
            throw Error("network has no traffic nodes");
        }
        return best->id;
    }

    std::string const&
    access_node(IntegratedNetwork const& net, Component const& c)
    {
        if (c.kind == ComponentKind::road_link)
        {
            return c.from;
        }
        if (c.kind == ComponentKind::zone_node)
        {
            return c.id;
        }
        return nearest_traffic_node(net, c.location);
    }

    int
    zone_priority(IntegratedNetwork const& net, Component const& c)
    {
        auto const& node = net.at(access_node(net, c));
        return static_cast<int>(node.attr_or("priority", 1.0));
    }
}
