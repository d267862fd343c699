#include "infrasim/testbed.hpp"

#include <string>
#include <utility>

namespace infrasim
{
    namespace
    {
        constexpr double kBlock = 500.0;

        Point
        grid_point(int index, double offset)
        {
            int const i = (index - 1) % 3;
            int const j = (index - 1) / 3;
            return {i * kBlock + offset, j * kBlock + offset};
        }

        Component
        node(std::string id,
             NetworkKind net,
             ComponentKind kind,
             Point at,
             std::map<std::string, double> attrs)
        {
            Component c;
            c.id = std::move(id);
            c.network = net;
            c.kind = kind;
            c.location = at;
            c.capacity_attrs = std::move(attrs);
            return c;
        }

        Component
        edge(std::string id,
             NetworkKind net,
             ComponentKind kind,
             Component const& a,
             Component const& b,
             std::map<std::string, double> attrs)
        {
            Component c = node(
                std::move(id), net, kind, midpoint(a.location, b.location),
                std::move(attrs));
            c.from = a.id;
            c.to = b.id;
            return c;
        }

        Component
        attached(
            std::string id,
            ComponentKind kind,
            Component const& bus,
            std::map<std::string, double> attrs)
        {
            Component c = node(
                std::move(id), NetworkKind::power, kind, bus.location,
                std::move(attrs));
            c.bus = bus.id;
            return c;
        }

        Component const&
        by_id(std::vector<Component> const& v, std::string const& id)
        {
            for (auto const& c : v)
            {
                if (c.id == id)
                {
                    return c;
                }
            }
            return v.front();
        }

        // Block edges of the 3x3 grid as (a, b) node indices.
        constexpr std::pair<int, int> kGridEdges[] = {
            {1, 2}, {2, 3}, {4, 5}, {5, 6}, {7, 8}, {8, 9},
            {1, 4}, {4, 7}, {2, 5}, {5, 8}, {3, 6}, {6, 9},
        };

        void
        build_traffic(IntegratedNetwork& net)
        {
            for (int k = 1; k <= 9; ++k)
            {
                std::map<std::string, double> attrs;
                if (k == 5)
                {
                    attrs["priority"] = 3.0;  // central business district
                }
                else if (k == 1 || k == 3)
                {
                    attrs["priority"] = 2.0;  // industrial
                }
                net.traffic.push_back(node(
                    "T_N" + std::to_string(k), NetworkKind::traffic,
                    ComponentKind::zone_node, grid_point(k, 0.0),
                    std::move(attrs)));
            }
            for (auto [a, b] : kGridEdges)
            {
                if (a == 5 && b == 8)
                {
                    continue;
                }
                for (auto [u, v] : {std::pair{a, b}, std::pair{b, a}})
                {
                    auto const& nu = by_id(net.traffic, "T_N" + std::to_string(u));
                    auto const& nv = by_id(net.traffic, "T_N" + std::to_string(v));
                    // Edge ids are built before push_back invalidates refs.
                    Component link = edge(
                        "T_R" + std::to_string(u) + "_" + std::to_string(v),
                        NetworkKind::traffic, ComponentKind::road_link, nu, nv,
                        {{"free_flow_time", 60.0}, {"capacity", 600.0}});
                    net.traffic.push_back(std::move(link));
                }
            }
            for (int o = 1; o <= 9; ++o)
            {
                for (int d = 1; d <= 9; ++d)
                {
                    if (o != d)
                    {
                        net.od_matrix.push_back(
                            {"T_N" + std::to_string(o),
                             "T_N" + std::to_string(d), 30.0});
                    }
                }
            }
        }

        void
        build_water(IntegratedNetwork& net)
        {
            auto& w = net.water;
            for (int k = 1; k <= 9; ++k)
            {
                w.push_back(node(
                    "W_J" + std::to_string(k), NetworkKind::water,
                    ComponentKind::demand_node, grid_point(k, 40.0),
                    {{"elevation", 0.0}, {"base_demand", 0.01}}));
            }
            w.push_back(node(
                "W_R1", NetworkKind::water, ComponentKind::reservoir,
                {-260.0, 40.0}, {{"head", 5.0}}));
            w.push_back(node(
                "W_T1", NetworkKind::water, ComponentKind::tank,
                {1240.0, 1040.0},
                {{"elevation", 15.0},
                 {"area", 20.0},
                 {"min_level", 0.5},
                 {"max_level", 10.0},
                 {"init_level", 10.0}}));

            std::vector<Component> links;
            int pipe = 1;
            for (auto [a, b] : kGridEdges)
            {
                if (a == 5 && b == 6)
                {
                    continue;
                }
                links.push_back(edge(
                    "W_P" + std::to_string(pipe++), NetworkKind::water,
                    ComponentKind::pipe, by_id(w, "W_J" + std::to_string(a)),
                    by_id(w, "W_J" + std::to_string(b)),
                    {{"length", kBlock}, {"diameter", 0.3}, {"roughness", 120.0}}));
            }
            links.push_back(edge(
                "W_P" + std::to_string(pipe++), NetworkKind::water,
                ComponentKind::pipe, by_id(w, "W_J9"), by_id(w, "W_T1"),
                {{"length", 200.0}, {"diameter", 0.3}, {"roughness", 120.0}}));
            links.push_back(edge(
                "W_PU1", NetworkKind::water, ComponentKind::pump,
                by_id(w, "W_R1"), by_id(w, "W_J1"),
                {{"shutoff_head", 25.0}, {"max_flow", 0.2}}));
            for (auto& l : links)
            {
                w.push_back(std::move(l));
            }
        }

        void
        build_power(IntegratedNetwork& net)
        {
            auto& p = net.power;
            Point const buses[] = {
                {460.0, -40.0},   // B1 grid connection
                {-40.0, -40.0},   // B2 west substation
                {460.0, 460.0},   // B3 central substation
                {-100.0, 80.0},   // B4 pump motor
                {-40.0, 460.0},   // B5
                {960.0, 460.0},   // B6
                {960.0, 960.0},   // B7
                {460.0, 960.0},   // B8
                {-40.0, 960.0},   // B9 spare pole
            };
            for (int k = 1; k <= 9; ++k)
            {
                p.push_back(node(
                    "P_B" + std::to_string(k), NetworkKind::power,
                    ComponentKind::bus, buses[k - 1], {{"base_kv", 11.0}}));
            }
            auto bus = [&](int k) -> Component const& {
                return by_id(p, "P_B" + std::to_string(k));
            };

            std::vector<Component> extra;
            extra.push_back(attached(
                "P_G1", ComponentKind::external_grid, bus(1),
                {{"max_mw", 100.0}, {"cost", 50.0}}));
            extra.push_back(edge(
                "P_TR1", NetworkKind::power, ComponentKind::transformer, bus(1),
                bus(2), {{"susceptance", 20.0}, {"limit_mw", 40.0}}));
            extra.push_back(edge(
                "P_TR2", NetworkKind::power, ComponentKind::transformer, bus(1),
                bus(3), {{"susceptance", 20.0}, {"limit_mw", 40.0}}));
            std::pair<int, int> const lines[] = {
                {2, 4}, {4, 5}, {3, 6}, {6, 7}, {3, 8}};
            for (int k = 0; k < 5; ++k)
            {
                extra.push_back(edge(
                    "P_L" + std::to_string(k + 1), NetworkKind::power,
                    ComponentKind::line, bus(lines[k].first),
                    bus(lines[k].second),
                    {{"susceptance", 10.0}, {"limit_mw", 30.0}}));
            }
            extra.push_back(attached(
                "P_M1", ComponentKind::motor, bus(4), {{"demand_mw", 0.5}}));
            extra.push_back(attached(
                "P_LD1", ComponentKind::load, bus(5), {{"demand_mw", 8.0}}));
            extra.push_back(attached(
                "P_LD2", ComponentKind::load, bus(7), {{"demand_mw", 6.0}}));
            extra.push_back(attached(
                "P_LD3", ComponentKind::load, bus(8), {{"demand_mw", 10.0}}));
            for (auto& c : extra)
            {
                p.push_back(std::move(c));
            }
        }
    }

    IntegratedNetwork
    build_simple_testbed()
    {
        IntegratedNetwork net;
        net.name = "simple";
        build_water(net);
        build_power(net);
        build_traffic(net);
        net.dependencies.push_back(
            {"P_M1", "W_PU1", DependencyKind::motor_drives_pump});
        return net;
    }
}
