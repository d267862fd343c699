#include "doctest.h"

#include "builders.hpp"

#include "infrasim/metrics.hpp"
#include "infrasim/simulation.hpp"
#include "infrasim/testbed.hpp"

#include <cmath>
#include <stdexcept>

using namespace infrasim;
using namespace infrasim::test;

namespace
{
    EventTable
    line_outage(double fail, std::optional<double> repaired)
    {
        EventTable t;
        t.rows.push_back({fail, "P_L1", EventAction::fail, {}});
        if (repaired)
        {
            t.rows.push_back({fail + 60, "P_L1", EventAction::repair_start, "c"});
            t.rows.push_back({*repaired, "P_L1", EventAction::repair_end, "c"});
        }
        return t;
    }

    // First sample index at or after t (right-hand sample at duplicates).
    std::size_t
    right_index(NetworkSeries const& s, double t)
    {
        std::size_t k = 0;
        while (k < s.size() && s.time[k] < t)
        {
            ++k;
        }
        while (k + 1 < s.size() && s.time[k + 1] == t)
        {
            ++k;
        }
        return k;
    }
}

TEST_CASE("no events: supply equals normal demand everywhere")
{
    auto const net = build_simple_testbed();
    auto const s = simulate(net, EventTable{}, 6 * 3600.0);
    CHECK(s.water.size() == 6 * 60 + 1);
    for (auto const* series : {&s.water, &s.power})
    {
        REQUIRE(series->size() > 0);
        for (std::size_t k = 0; k < series->size(); ++k)
        {
            CHECK(series->supply[k] == series->demand[k]);
        }
        for (auto v : mop_curve(*series, Mop::ecs))
        {
            CHECK(v == 1.0);
        }
        for (auto v : mop_curve(*series, Mop::pcs))
        {
            CHECK(v == 1.0);
        }
    }
    CHECK(s.water.consumers.size() == 9);
    CHECK(s.power.consumers.size() == 4);  // three loads and the motor
}

TEST_CASE("sampling grid: 60 s water steps plus event instants")
{
    auto const net = build_simple_testbed();
    auto const table = line_outage(3630.5, 3630.5 + 3 * 3600);
    auto const s = simulate(net, table, default_horizon(table));
    CHECK(s.end == table.last_time() + 86400.0);
    for (std::size_t k = 1; k < s.water.size(); ++k)
    {
        double const a = s.water.time[k - 1];
        double const b = s.water.time[k];
        CHECK(b >= a);
        CHECK(b - a <= 60.0);
        bool const on_grid = std::fmod(b, 60.0) == 0.0;
        bool const event = b == 3630.5 || b == 3690.5 || b == 3630.5 + 3 * 3600 || b == s.end;
        CHECK((on_grid || event));
    }
    // Duplicate samples only at event instants.
    int dups = 0;
    for (std::size_t k = 1; k < s.water.size(); ++k)
    {
        dups += s.water.time[k] == s.water.time[k - 1];
    }
    CHECK(dups == 3);
}

TEST_CASE("power is piecewise constant between events and switches at them")
{
    auto const net = build_simple_testbed();
    auto const table = line_outage(3600, 3 * 3600 + 3600);
    auto const s = simulate(net, table, 12 * 3600.0);
    auto const pcs = mop_curve(s.power, Mop::pcs);
    for (std::size_t k = 1; k < s.power.size(); ++k)
    {
        double const t = s.power.time[k];
        bool const same_instant = t == s.power.time[k - 1];
        if (!same_instant)
        {
            CHECK(s.power.supply[k] == s.power.supply[k - 1]);
        }
    }
    auto const fail_right = right_index(s.power, 3600);
    CHECK(*pcs[fail_right - 1] == 1.0);
    CHECK(*pcs[fail_right] < 1.0);
    auto const fix_right = right_index(s.power, 4 * 3600);
    CHECK(*pcs[fix_right - 1] < 1.0);
    CHECK(*pcs[fix_right] == 1.0);
}

TEST_CASE("losing the motor feeder starves water consumers, refill lags power")
{
    auto const net = build_simple_testbed();
    double const fail = 3600;
    double const fixed = fail + 3 * 3600;
    auto const table = line_outage(fail, fixed);
    auto const s = simulate(net, table, default_horizon(table));
    auto const water = mop_curve(s.water, Mop::pcs);
    auto const power = mop_curve(s.power, Mop::pcs);

    // Water degrades within an hour of the outage.
    bool degraded = false;
    for (std::size_t k = 0; k < s.water.size(); ++k)
    {
        if (s.water.time[k] > fail && s.water.time[k] <= fail + 3600 && *water[k] < 1.0)
        {
            degraded = true;
        }
    }
    CHECK(degraded);

    // Power is back at the repair instant.
    CHECK(*power[right_index(s.power, fixed)] == 1.0);

    // Water comes back no earlier than power.
    double water_back = s.end;
    for (std::size_t k = right_index(s.water, fixed); k < s.water.size(); ++k)
    {
        bool all_after = true;
        for (std::size_t j = k; j < s.water.size(); ++j)
        {
            all_after = all_after && *water[j] >= 1.0 - 1e-9;
        }
        if (all_after)
        {
            water_back = s.water.time[k];
            break;
        }
    }
    CHECK(water_back >= fixed);
}

TEST_CASE("dry reservoir takes its generator out")
{
    IntegratedNetwork net;
    net.water = {
        make_node("W_R", ComponentKind::reservoir, {0, 0}, {{"head", 40.0}, {"volume", 30.0}}),
        junction("W_J", 0.0, 0.01, {100, 0}),
        pipe("W_P", "W_R", "W_J", 100.0),
    };
    net.power = {
        make_node("P_B", ComponentKind::bus, {0, 0}),
        make_attached("P_G", ComponentKind::generator, "P_B", {{"max_mw", 10.0}, {"cost", 1.0}}),
        make_attached("P_D", ComponentKind::load, "P_B", {{"demand_mw", 4.0}}),
    };
    net.dependencies = {{"W_R", "P_G", DependencyKind::reservoir_feeds_generator}};
    auto const s = simulate(net, EventTable{}, 7200.0);
    auto const power = mop_curve(s.power, Mop::pcs);
    auto const water = mop_curve(s.water, Mop::pcs);
    REQUIRE(power.size() == water.size());
    // The baseline dries out too; compare supplies directly.
    std::size_t first_dark = s.power.size();
    for (std::size_t k = 0; k < s.power.size(); ++k)
    {
        if (s.power.supply[k][0] == 0.0)
        {
            first_dark = k;
            break;
        }
    }
    REQUIRE(first_dark < s.power.size());
    double const t = s.power.time[first_dark];
    CHECK(t == doctest::Approx(3000.0).epsilon(0.05));  // 30 m3 at 0.01 m3/s
    CHECK(s.power.time[first_dark - 1] == t);            // left sample still lit
    CHECK(s.power.supply[first_dark - 1][0] == 4.0);
    CHECK(s.water.supply[first_dark][0] == 0.0);
    CHECK(s.power.supply.back()[0] == 0.0);
}

TEST_CASE("simulation is deterministic and checks its inputs")
{
    auto const net = build_simple_testbed();
    auto const table = line_outage(3600, 7200);
    auto const a = simulate(net, table, 5 * 3600.0);
    auto const b = simulate(net, table, 5 * 3600.0);
    CHECK(a.water.time == b.water.time);
    CHECK(a.water.supply == b.water.supply);
    CHECK(a.power.supply == b.power.supply);

    CHECK_THROWS_AS(simulate(net, table, 3600.0), std::invalid_argument);
    SimulationParams bad;
    bad.water_step = 0;
    CHECK_THROWS_AS(simulate(net, table, 5 * 3600.0, bad), std::invalid_argument);
    EventTable unsorted{{{7200, "P_L1", EventAction::fail, {}}, {3600, "W_P1", EventAction::fail, {}}}};
    CHECK_THROWS_AS(simulate(net, unsorted, 5 * 3600.0), std::invalid_argument);
}
