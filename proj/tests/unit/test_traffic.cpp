#include "doctest.h"

#include "builders.hpp"

#include "infrasim/testbed.hpp"
#include "infrasim/traffic.hpp"

#include <cmath>
#include <random>

using namespace infrasim;
using namespace infrasim::test;

namespace
{
    // Two nodes joined by two parallel links.
    IntegratedNetwork
    parallel(Component a, Component b, double demand)
    {
        IntegratedNetwork net;
        net.traffic = {zone("T_O", {0, 0}), zone("T_D", {1000, 0}), std::move(a), std::move(b)};
        net.od_matrix = {{"T_O", "T_D", demand}};
        return net;
    }

    Component
    linear_link(std::string id, double t0, double slope)
    {
        // t0 (1 + alpha x / 1) with alpha = slope / t0 gives t0 + slope x.
        auto c = road(std::move(id), "T_O", "T_D", t0, 1.0);
        c.capacity_attrs["alpha"] = slope / t0;
        c.capacity_attrs["beta"] = 1.0;
        return c;
    }
}

TEST_CASE("identical parallel links split evenly")
{
    auto net = parallel(road("T_A", "T_O", "T_D", 60.0, 10.0), road("T_B", "T_O", "T_D", 60.0, 10.0), 10.0);
    auto const st = assign_traffic(net, {});
    CHECK(st.link_flow.at("T_A") == doctest::Approx(5.0).epsilon(0.01));
    CHECK(st.link_flow.at("T_B") == doctest::Approx(5.0).epsilon(0.01));
    CHECK(st.link_flow.at("T_A") + st.link_flow.at("T_B") == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(st.relative_gap <= 1e-4);
}

TEST_CASE("linear two-link equilibrium: all flow on the cheap link")
{
    // t1 = 10 + x1, t2 = 20 + x2, demand 10  ->  x1 = 10, x2 = 0.
    auto net = parallel(linear_link("T_A", 10.0, 1.0), linear_link("T_B", 20.0, 1.0), 10.0);
    auto const st = assign_traffic(net, {});
    CHECK(std::abs(st.link_flow.at("T_A") - 10.0) <= 0.1);
    CHECK(st.link_flow.at("T_B") <= 0.1);
    // Unused path costs at least as much as the used one.
    CHECK(st.link_time.at("T_B") >= st.link_time.at("T_A") - 1e-3 * st.link_time.at("T_A"));
}

TEST_CASE("linear two-link equilibrium with an interior split")
{
    // t1 = 10 + x1, t2 = 20 + x2, demand 30  ->  x1 = 20, x2 = 10 (both cost 30).
    auto net = parallel(linear_link("T_A", 10.0, 1.0), linear_link("T_B", 20.0, 1.0), 30.0);
    auto const st = assign_traffic(net, {});
    CHECK(st.link_flow.at("T_A") == doctest::Approx(20.0).epsilon(0.01));
    CHECK(st.link_flow.at("T_B") == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("zero demand gives zero flow at free-flow times")
{
    auto net = build_simple_testbed();
    for (auto& od : net.od_matrix)
    {
        od.demand = 0.0;
    }
    auto const st = assign_traffic(net, {});
    for (auto const& c : net.traffic)
    {
        if (c.kind == ComponentKind::road_link)
        {
            CHECK(st.link_flow.at(c.id) == 0.0);
            CHECK(st.link_time.at(c.id) == c.attr("free_flow_time"));
        }
    }
}

TEST_CASE("testbed assignment invariants")
{
    auto const net = build_simple_testbed();
    auto const st = assign_traffic(net, {});
    CHECK(st.relative_gap <= 1e-4);
    CHECK(st.unreachable.empty());
    for (std::size_t i = 1; i < st.objective_history.size(); ++i)
    {
        CHECK(st.objective_history[i] <= st.objective_history[i - 1] + 1e-9 * std::abs(st.objective_history[i - 1]));
    }
    TrafficOptions const opt{};
    for (auto const& c : net.traffic)
    {
        if (c.kind != ComponentKind::road_link)
        {
            continue;
        }
        double const x = st.link_flow.at(c.id);
        CHECK(x >= 0.0);
        CHECK(st.link_time.at(c.id) == doctest::Approx(bpr_time(c, x, opt)).epsilon(1e-12));
    }
    // Node conservation: net outflow at each zone equals its OD balance.
    std::map<std::string, double> net_out;
    for (auto const& c : net.traffic)
    {
        if (c.kind == ComponentKind::road_link)
        {
            net_out[c.from] += st.link_flow.at(c.id);
            net_out[c.to] -= st.link_flow.at(c.id);
        }
    }
    std::map<std::string, double> od_out;
    for (auto const& od : net.od_matrix)
    {
        od_out[od.origin] += od.demand;
        od_out[od.destination] -= od.demand;
    }
    for (auto const& [node, v] : od_out)
    {
        CHECK(net_out[node] == doctest::Approx(v).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("epsilon user equilibrium on enumerable paths")
{
    // Three disjoint O-D paths with different BPR parameters.
    IntegratedNetwork net;
    net.traffic = {
        zone("T_O", {0, 0}), zone("T_D", {3000, 0}),
        zone("T_M1", {1500, 500}), zone("T_M2", {1500, 0}), zone("T_M3", {1500, -500}),
        road("T_A1", "T_O", "T_M1", 300.0, 800.0), road("T_A2", "T_M1", "T_D", 300.0, 800.0),
        road("T_B1", "T_O", "T_M2", 240.0, 500.0), road("T_B2", "T_M2", "T_D", 240.0, 500.0),
        road("T_C1", "T_O", "T_M3", 420.0, 2000.0), road("T_C2", "T_M3", "T_D", 420.0, 2000.0),
    };
    net.od_matrix = {{"T_O", "T_D", 2500.0}};
    auto const st = assign_traffic(net, {});
    std::vector<std::pair<std::string, std::string>> const paths = {
        {"T_A1", "T_A2"}, {"T_B1", "T_B2"}, {"T_C1", "T_C2"}};
    double best = 1e300;
    for (auto const& [a, b] : paths)
    {
        best = std::min(best, st.link_time.at(a) + st.link_time.at(b));
    }
    for (auto const& [a, b] : paths)
    {
        double const cost = st.link_time.at(a) + st.link_time.at(b);
        if (st.link_flow.at(a) > 1e-6)
        {
            CHECK(cost <= best + 1e-3 * cost);
        }
    }
}

TEST_CASE("failed links carry no traffic and unreachable demand is reported")
{
    auto net = parallel(road("T_A", "T_O", "T_D", 60.0, 10.0), road("T_B", "T_O", "T_D", 60.0, 10.0), 10.0);
    StatusMap s;
    s.set("T_A", Status::failed);
    auto st = assign_traffic(net, s);
    CHECK(st.link_flow.at("T_A") == 0.0);
    CHECK(st.link_flow.at("T_B") == doctest::Approx(10.0));

    s.set("T_B", Status::failed);
    st = assign_traffic(net, s);
    REQUIRE(st.unreachable.size() == 1);
    CHECK(st.unreachable[0].origin == "T_O");
    CHECK(st.unreachable[0].demand == 10.0);
}

TEST_CASE("shortest travel time")
{
    IntegratedNetwork net;
    net.traffic = {zone("T_1", {0, 0}), zone("T_2", {100, 0}), zone("T_3", {200, 0}),
                   road("T_12", "T_1", "T_2", 300.0), road("T_23", "T_2", "T_3", 200.0)};
    auto st = assign_traffic(net, {});
    CHECK(shortest_travel_time(st, "T_1", "T_1") == 0.0);
    CHECK(shortest_travel_time(st, "T_1", "T_2") == doctest::Approx(300.0));
    CHECK(shortest_travel_time(st, "T_1", "T_3") == doctest::Approx(500.0));
    CHECK_FALSE(shortest_travel_time(st, "T_3", "T_1").has_value());

    StatusMap s;
    s.set("T_12", Status::failed);
    st = assign_traffic(net, s);
    CHECK_FALSE(shortest_travel_time(st, "T_1", "T_2").has_value());
    RoutingOptions detour;
    detour.failed_link_factor = 5.0;
    CHECK(shortest_travel_time(st, "T_1", "T_2", detour) == doctest::Approx(1500.0));
}

TEST_CASE("traffic assignment is deterministic")
{
    auto const net = build_simple_testbed();
    StatusMap s;
    s.set("T_R2_5", Status::failed);
    auto a = assign_traffic(net, s);
    auto b = assign_traffic(net, s);
    CHECK(a.link_flow == b.link_flow);
    CHECK(a.objective_history == b.objective_history);
}
