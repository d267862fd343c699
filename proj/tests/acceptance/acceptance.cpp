// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include "builders.hpp"

#include "infrasim/event_table.hpp"
#include "infrasim/hazard.hpp"
#include "infrasim/hydraulics.hpp"
#include "infrasim/metrics.hpp"
#include "infrasim/pipeline.hpp"
#include "infrasim/power_flow.hpp"
#include "infrasim/simulation.hpp"
#include "infrasim/statistics.hpp"
#include "infrasim/testbed.hpp"
#include "infrasim/traffic.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace infrasim;
using namespace infrasim::test;

namespace fs = std::filesystem;

namespace
{
    // Collects failed checks; the first few go into the report line.
    struct Checks
    {
        std::vector<std::string> failed;
        std::vector<std::string> notes;

        void
        expect(bool ok, std::string what)
        {
            if (!ok)
            {
                failed.push_back(std::move(what));
            }
        }

        void
        near(double got, double want, double tol, std::string const& what)
        {
            expect(std::abs(got - want) <= tol, fmt::format("{}: got {:.12g}, want {:.12g} (tol {:g})", what, got, want, tol));
        }

        void
        note(std::string s)
        {
            notes.push_back(std::move(s));
        }
    };

    struct Criterion
    {
        int id;
        std::string name;
        std::optional<double> limit_s;
        std::function<void(Checks&)> body;
    };

    using Curve = std::vector<std::optional<double>>;

    // ---- 1: metrics ------------------------------------------------------

    NetworkSeries
    one_consumer(std::vector<double> time, std::vector<double> supply, double demand)
    {
        NetworkSeries s;
        s.time = std::move(time);
        s.consumers = {"c"};
        for (double v : supply)
        {
            s.supply.push_back({v});
            s.demand.push_back({demand});
        }
        return s;
    }

    void
    metric_exactness(Checks& c)
    {
        double const tol = 1e-9;
        c.near(*ecs({1.0, 0.5}, {1.0, 1.0}), 0.75, tol, "ECS ratios 1, 0.5");
        c.near(*ecs({3.0, 7.0}, {3.0, 7.0}), 1.0, tol, "ECS all served");
        c.near(*ecs({0.0, 0.0}, {3.0, 7.0}), 0.0, tol, "ECS no supply");
        c.near(*pcs({5, 10}, {10, 10}), 0.75, tol, "PCS {5,10}/{10,10}");
        c.near(*pcs({30, 0}, {30, 10}), 0.75, tol, "PCS large consumer");
        c.near(*ecs({30, 0}, {30, 10}), 0.5, tol, "ECS same input");
        c.near(*pcs({30, 10}, {30, 10}), 1.0, tol, "PCS full supply");

        c.near(system_eoh({0, 3600, 7200}, Curve{1.0, 1.0, 1.0}, 0, 7200), 0.0, tol, "EOH of MOP 1");
        c.near(system_eoh({0, 60, 3600}, Curve{0.0, 0.0, 0.0}, 0, 3600), 1.0, tol, "EOH of full outage hour");
        double const half = system_eoh({0, 7200}, Curve{0.5, 0.5}, 0, 7200);
        c.expect(half == 1.0, fmt::format("EOH of 2 h half service is {:.17g}, not exactly 1", half));
        // Same curve on the one-minute grid.
        std::vector<double> t;
        Curve m;
        for (int k = 0; k <= 120; ++k)
        {
            t.push_back(60.0 * k);
            m.push_back(0.5);
        }
        double const half_grid = system_eoh(t, m, 0, 7200);
        c.expect(half_grid == 1.0, fmt::format("EOH of 2 h half service on a 60 s grid is {:.17g}", half_grid));

        std::vector<double> const steps{0, 3600, 3600, 10800, 10800, 14400};
        c.near(*consumer_eoh(one_consumer(steps, {4, 4, 4, 4, 4, 4}, 4), 0, 0, 14400), 0.0, tol, "consumer EOH fully served");
        c.near(*consumer_eoh(one_consumer(steps, {4, 4, 0, 0, 4, 4}, 4), 0, 0, 14400), 2.0, tol, "consumer EOH 2 h out");
        c.near(*consumer_eoh(one_consumer({0, 14400}, {1, 1}, 2), 0, 0, 14400), 2.0, tol, "consumer EOH half served 4 h");

        c.near(weighted_eoh({{"water", 2.0}, {"power", 4.0}}, default_eoh_weights()), 3.0, tol, "weighted EOH equal weights");
        c.near(weighted_eoh({{"water", 2.0}, {"power", 4.0}}, {{"water", 1.0}, {"power", 0.0}}), 2.0, tol, "weighted EOH one-hot");
        c.near(weighted_eoh({{"water", 0.0}, {"power", 0.0}}, default_eoh_weights()), 0.0, tol, "weighted EOH zeros");
        c.note(fmt::format("half-service EOH = {:g} h", half));
    }

    // ---- 2: pressure-dependent demand -----------------------------------

    // Closed form written out directly.
    double
    pda_oracle(double p, double d, double p0, double pf, double e)
    {
        if (p <= p0)
        {
            return 0.0;
        }
        if (p >= pf)
        {
            return d;
        }
        return d * std::pow((p - p0) / (pf - p0), 1.0 / e);
    }

    void
    pda_conformance(Checks& c)
    {
        struct Case
        {
            double d, p0, pf, e;
        };
        // Default parameters first, then shifted thresholds and exponents
        // on both sides of one.
        std::vector<Case> const cases{{10, 0, 20, 2}, {0.05, 0, 20, 2}, {3, 5, 25, 1.5}, {1, 2, 12, 0.5}, {7, 0, 30, 1}};
        double worst = 0.0;
        for (auto const& k : cases)
        {
            PdaParams const p{k.p0, k.pf, k.e};
            // 100 pressures from below p0 to above pf, hitting both thresholds.
            double const lo = k.p0 - 5.0;
            double const hi = k.pf + 5.0;
            std::vector<double> grid;
            for (int i = 0; i < 100; ++i)
            {
                grid.push_back(lo + (hi - lo) * i / 99.0);
            }
            grid[10] = k.p0;
            grid[90] = k.pf;
            for (double x : grid)
            {
                double const got = pda_demand(x, k.d, p);
                double const want = pda_oracle(x, k.d, k.p0, k.pf, k.e);
                worst = std::max(worst, std::abs(got - want));
                c.near(got, want, 1e-12, fmt::format("d({}) with p0 {}, pf {}, e {}", x, k.p0, k.pf, k.e));
            }

            // The branches meet at both thresholds.
            double const mid_at_p0 = k.d * std::pow(0.0, 1.0 / k.e);
            double const mid_at_pf = k.d * std::pow(1.0, 1.0 / k.e);
            c.near(mid_at_p0, 0.0, 1e-9, "middle branch at p0");
            c.near(mid_at_pf, k.d, 1e-9, "middle branch at pf");
            c.near(pda_demand(k.p0, k.d, p), 0.0, 1e-9, "value at p0");
            c.near(pda_demand(k.pf, k.d, p), k.d, 1e-9, "value at pf");

            // Around pf the curve is Lipschitz, so +-1e-9 stays within 1e-9.
            double const delta = 1e-9;
            double const jump_pf = std::abs(pda_demand(k.pf + delta, k.d, p) - pda_demand(k.pf - delta, k.d, p));
            c.expect(jump_pf <= 1e-9, fmt::format("pf +-1e-9 differ by {:g}", jump_pf));
            // Around p0 the left side is 0 and the right side follows the
            // power law, which shrinks to 0 with delta.
            c.expect(pda_demand(k.p0 - delta, k.d, p) == 0.0, "left of p0 is not 0");
            for (double dd : {1e-3, 1e-6, 1e-9, 1e-12})
            {
                c.near(pda_demand(k.p0 + dd, k.d, p), pda_oracle(k.p0 + dd, k.d, k.p0, k.pf, k.e), 1e-12,
                       fmt::format("d(p0 + {:g})", dd));
            }
            double const jump_p0 = std::abs(pda_demand(k.p0 + delta, k.d, p) - pda_demand(k.p0 - delta, k.d, p));
            if (k.e <= 1.0)
            {
                c.expect(jump_p0 <= 1e-9, fmt::format("p0 +-1e-9 differ by {:g}", jump_p0));
            }
        }
        c.note(fmt::format("{} parameter sets x 100 pressures, max |error| {:.2g}", cases.size(), worst));
    }

    // ---- 3: solver oracles ------------------------------------------------

    double
    hw_r(double length, double diameter, double chw)
    {
        return 10.667 * length / (std::pow(chw, 1.852) * std::pow(diameter, 4.871));
    }

    double
    hw_loss(double r, double q)
    {
        return r * q * std::pow(std::abs(q), 0.852);
    }

    Component
    linear_link(std::string id, double t0, double slope)
    {
        // t0 (1 + alpha x) with alpha = slope / t0 and unit capacity.
        auto l = road(std::move(id), "T_O", "T_D", t0, 1.0);
        l.capacity_attrs["alpha"] = slope / t0;
        l.capacity_attrs["beta"] = 1.0;
        return l;
    }

    void
    solver_oracles(Checks& c)
    {
        // Hydraulics: reservoir -> A, loop A-B-C, demands at B and C.
        double const db = 0.02;
        double const dc = 0.05;
        IntegratedNetwork tri;
        tri.water = {
            reservoir("W_R", 120.0),
            junction("W_A", 0.0, 0.0),
            junction("W_B", 0.0, db),
            junction("W_C", 0.0, dc),
            pipe("W_P0", "W_R", "W_A", 100.0, 0.4),
            pipe("W_PAB", "W_A", "W_B", 300.0, 0.2),
            pipe("W_PBC", "W_B", "W_C", 400.0, 0.15),
            pipe("W_PAC", "W_A", "W_C", 500.0, 0.2),
        };
        double const r_ab = hw_r(300.0, 0.2, 120.0);
        double const r_bc = hw_r(400.0, 0.15, 120.0);
        double const r_ac = hw_r(500.0, 0.2, 120.0);
        // x = flow A->C; both routes from A to C lose the same head.
        auto loop = [&](double x) {
            return hw_loss(r_ac, x) - hw_loss(r_ab, db + dc - x) - hw_loss(r_bc, dc - x);
        };
        double lo = 0.0;
        double hi = db + dc;
        for (int i = 0; i < 200; ++i)
        {
            double const mid = 0.5 * (lo + hi);
            (loop(mid) > 0.0 ? hi : lo) = mid;
        }
        double const x = 0.5 * (lo + hi);
        auto const hs = solve_hydraulics(tri, {}, 0.0, 60.0, PdaParams{});
        auto const& st = hs.front();
        c.near(st.link_flow.at("W_PAC"), x, 1e-4, "W_PAC flow");
        c.near(st.link_flow.at("W_PAB"), db + dc - x, 1e-4, "W_PAB flow");
        c.near(st.link_flow.at("W_PBC"), dc - x, 1e-4, "W_PBC flow");
        c.near(st.link_flow.at("W_P0"), db + dc, 1e-4, "W_P0 flow");
        double const herr = std::max({std::abs(st.link_flow.at("W_PAC") - x),
                                      std::abs(st.link_flow.at("W_PAB") - (db + dc - x)),
                                      std::abs(st.link_flow.at("W_PBC") - (dc - x))});

        // Traffic: t1 = 10 + x1, t2 = 20 + x2.
        auto parallel = [](double demand) {
            IntegratedNetwork net;
            net.traffic = {zone("T_O", {0, 0}), zone("T_D", {1000, 0}), linear_link("T_A", 10.0, 1.0),
                           linear_link("T_B", 20.0, 1.0)};
            net.od_matrix = {{"T_O", "T_D", demand}};
            return net;
        };
        // Demand 10: all on the cheap link, the unused one costs at least as much.
        auto const t10 = assign_traffic(parallel(10.0), {});
        c.near(t10.link_flow.at("T_A"), 10.0, 0.01 * 10.0, "UE x1 (demand 10)");
        c.near(t10.link_flow.at("T_B"), 0.0, 0.01 * 10.0, "UE x2 (demand 10)");
        c.expect(t10.link_time.at("T_B") >= t10.link_time.at("T_A") * (1 - 0.01), "unused link is cheaper");
        // Demand 30: interior split 20 / 10.
        auto const t30 = assign_traffic(parallel(30.0), {});
        c.near(t30.link_flow.at("T_A"), 20.0, 0.01 * 20.0, "UE x1 (demand 30)");
        c.near(t30.link_flow.at("T_B"), 10.0, 0.01 * 10.0, "UE x2 (demand 30)");

        // Dispatch: one grid source, one line, one 60 MW load.
        auto two_bus = [](double limit) {
            IntegratedNetwork net;
            net.power = {
                make_node("P_B1", ComponentKind::bus, {0, 0}),
                make_node("P_B2", ComponentKind::bus, {100, 0}),
                make_attached("P_G", ComponentKind::external_grid, "P_B1", {{"max_mw", 100.0}, {"cost", 10.0}}),
                make_edge("P_L", ComponentKind::line, "P_B1", "P_B2", {{"susceptance", 10.0}, {"limit_mw", limit}}),
                make_attached("P_D", ComponentKind::load, "P_B2", {{"demand_mw", 60.0}}),
            };
            return net;
        };
        auto const open = solve_power(two_bus(80.0), {});
        c.expect(open.served_load.at("P_D") == 60.0, fmt::format("uncongested served {:.17g}", open.served_load.at("P_D")));
        c.expect(open.shed_load.at("P_D") == 0.0, fmt::format("uncongested shed {:.17g}", open.shed_load.at("P_D")));
        auto const tight = solve_power(two_bus(50.0), {});
        c.expect(tight.served_load.at("P_D") == 50.0, fmt::format("binding served {:.17g}", tight.served_load.at("P_D")));
        c.expect(tight.shed_load.at("P_D") == 10.0, fmt::format("binding shed {:.17g}", tight.shed_load.at("P_D")));

        c.note(fmt::format("hydraulic max error {:.2g} m3/s, UE x1 {:.4f}, served {:g} shed {:g}", herr,
                           t10.link_flow.at("T_A"), tight.served_load.at("P_D"), tight.shed_load.at("P_D")));
    }

    // ---- 4: failure frequency ---------------------------------------------

    void
    failure_frequency(Checks& c)
    {
        double const radius = 100.0;
        double const p_hazard = 0.9;
        int const n = 100000;
        // Pipe along y = 0 from x = 0 to 10; the centre sits at distance d
        // above its midpoint.
        IntegratedNetwork net;
        net.water = {junction("W_A", 0, 0, {0, 0}), junction("W_B", 0, 0, {10, 0}), pipe("W_P", "W_A", "W_B", 10)};
        struct Level
        {
            Intensity i;
            double cond;
        };
        std::vector<Level> const levels{{Intensity::low, 0.1}, {Intensity::moderate, 0.3}, {Intensity::high, 0.6}};
        double worst_z = 0.0;
        int combo = 0;
        for (double d : {0.0, 25.0, 60.0})
        {
            for (auto const& lv : levels)
            {
                HazardEvent e;
                e.kind = HazardKind::point;
                e.center = {5, d};
                e.radius = radius;
                e.intensity = lv.i;
                double const p = p_hazard * (1.0 - d / radius) * lv.cond;
                double const lib = failure_probability(net, net.at("W_P"), e, lv.i, p_hazard);
                c.near(lib, p, 1e-12, fmt::format("failure_probability d={} {}", d, to_string(lv.i)));

                int hits = 0;
                auto const base = static_cast<std::uint64_t>(combo) * 1000003ULL;
                for (int k = 0; k < n; ++k)
                {
                    hits += static_cast<int>(!sample_scenario(net, e, p_hazard, base + static_cast<std::uint64_t>(k)).failures.empty());
                }
                double const f = static_cast<double>(hits) / n;
                double const se = std::sqrt(lib * (1 - lib) / n);
                double const z = std::abs(f - lib) / se;
                worst_z = std::max(worst_z, z);
                c.expect(z < 3.0, fmt::format("d={} {}: frequency {:.5f} vs {:.5f} ({:.2f} SE)", d, to_string(lv.i), f, lib, z));
                ++combo;
            }
        }
        c.note(fmt::format("9 combinations x {} draws, worst deviation {:.2f} SE", n, worst_z));
    }

    // ---- 5: interdependency -----------------------------------------------

    // Earliest sample time from which the curve stays at 1.
    double
    recovery_time(NetworkSeries const& s, Curve const& curve)
    {
        double back = s.time.front();
        for (std::size_t k = 0; k < s.size(); ++k)
        {
            if (!curve[k] || *curve[k] < 1.0 - 1e-9)
            {
                back = k + 1 < s.size() ? s.time[k + 1] : s.time[k];
            }
        }
        return back;
    }

    void
    interdependency(Checks& c)
    {
        auto const net = build_simple_testbed();
        double const fail = 3600;
        double const fixed = fail + 3 * 3600;
        EventTable table;
        table.rows = {{fail, "P_L1", EventAction::fail, {}},
                      {fail + 60, "P_L1", EventAction::repair_start, "c"},
                      {fixed, "P_L1", EventAction::repair_end, "c"}};
        auto const s = simulate(net, table, default_horizon(table));
        auto const water = mop_curve(s.water, Mop::pcs);
        auto const power = mop_curve(s.power, Mop::pcs);

        double first_drop = -1.0;
        for (std::size_t k = 0; k < s.water.size(); ++k)
        {
            if (s.water.time[k] > fail && s.water.time[k] <= fail + 3600 && water[k] && *water[k] < 1.0)
            {
                first_drop = s.water.time[k];
                break;
            }
        }
        c.expect(first_drop > 0, "water PCS stayed at 1 during the first hour of the outage");

        // At the repair instant: the left sample is still dark, the right one lit.
        std::optional<double> left;
        std::optional<double> right;
        for (std::size_t k = 0; k < s.power.size(); ++k)
        {
            if (s.power.time[k] == fixed)
            {
                if (!left)
                {
                    left = *power[k];
                }
                right = *power[k];
            }
        }
        c.expect(left && *left < 1.0, "power PCS not below 1 just before repair_end");
        c.expect(right && *right == 1.0, "power PCS not 1 at repair_end");
        double const power_back = recovery_time(s.power, power);
        double const water_back = recovery_time(s.water, water);
        c.expect(power_back == fixed, fmt::format("power recovered at {} s, repair_end {} s", power_back, fixed));
        c.expect(water_back >= power_back, fmt::format("water recovered at {} s before power at {} s", water_back, power_back));
        c.note(fmt::format("water PCS < 1 at {:g} s, power back at {:g} s, water back at {:g} s (lag {:g} s)", first_drop,
                           power_back, water_back, water_back - power_back));
    }

    // ---- 6: scheduling ----------------------------------------------------

    Component
    located_pipe(std::string id, Point at)
    {
        auto p = pipe(std::move(id), "W_J1", "W_J2", 100);
        p.location = at;
        return p;
    }

    DisasterScenario
    failures_at(double t, std::vector<std::pair<std::string, Severity>> const& ids)
    {
        DisasterScenario s;
        s.event.occurrence_time = t;
        for (auto const& [id, sev] : ids)
        {
            s.failures.push_back({id, t, sev});
        }
        return s;
    }

    void
    scheduling(Checks& c)
    {
        // One road of 600 s between the crew and the component.
        {
            IntegratedNetwork net;
            net.traffic = {zone("T_A", {0, 0}), zone("T_B", {1000, 0}), road("T_AB", "T_A", "T_B", 600.0),
                           road("T_BA", "T_B", "T_A", 600.0)};
            net.water = {junction("W_J1", 0, 0), junction("W_J2", 0, 0), located_pipe("W_X", {990, 0})};
            ScheduleOptions opt;
            opt.durations.pipe = 7200.0;
            auto const t = build_event_table(net, failures_at(3600, {{"W_X", Severity::leak}}),
                                             {{NetworkKind::water, {"W_X"}}}, {{"cw", NetworkKind::water, "T_A", 3600.0}}, opt);
            std::vector<EventRow> const want{{3600, "W_X", EventAction::fail, {}},
                                             {4200, "W_X", EventAction::repair_start, "cw"},
                                             {11400, "W_X", EventAction::repair_end, "cw"}};
            c.expect(t.rows == want, "arithmetic example:\n" + event_table_to_csv(t));
        }

        // 2x2 road grid, 100 s per block. Both roads into T_N2 are cut, so
        // the nearer pipe waits for the road crew.
        IntegratedNetwork net;
        net.traffic = {zone("T_N1", {0, 0}), zone("T_N2", {1000, 0}), zone("T_N3", {0, 1000}), zone("T_N4", {1000, 1000})};
        for (auto [a, b] : {std::pair{1, 2}, {1, 3}, {2, 4}, {3, 4}})
        {
            auto const sa = std::to_string(a);
            auto const sb = std::to_string(b);
            net.traffic.push_back(road("T_" + sa + sb, "T_N" + sa, "T_N" + sb, 100.0));
            net.traffic.push_back(road("T_" + sb + sa, "T_N" + sb, "T_N" + sa, 100.0));
        }
        net.water = {junction("W_J1", 0, 0, {500, 500}), junction("W_J2", 0, 0, {510, 500}),
                     located_pipe("W_near", {990, 10}), located_pipe("W_far", {990, 990})};
        auto const sc = failures_at(3600, {{"T_12", Severity::full}, {"T_42", Severity::full},
                                           {"W_near", Severity::leak}, {"W_far", Severity::leak}});
        RepairOrder const order{{NetworkKind::water, {"W_near", "W_far"}}, {NetworkKind::traffic, {"T_12", "T_42"}}};
        std::vector<Crew> const crews{{"crew_road", NetworkKind::traffic, "T_N1", 0.0},
                                      {"crew_water", NetworkKind::water, "T_N1", 0.0}};
        auto const t = build_event_table(net, sc, order, crews);
        // Pipes take 4 h, roads 12 h (defaults). Water crew goes to W_far
        // (2 blocks) first, then reaches W_near 1 block after T_12 reopens.
        std::vector<EventRow> const want{
            {3600, "T_12", EventAction::fail, {}},
            {3600, "T_42", EventAction::fail, {}},
            {3600, "W_far", EventAction::fail, {}},
            {3600, "W_near", EventAction::fail, {}},
            {3600, "T_12", EventAction::repair_start, "crew_road"},
            {3800, "W_far", EventAction::repair_start, "crew_water"},
            {18200, "W_far", EventAction::repair_end, "crew_water"},
            {46800, "T_12", EventAction::repair_end, "crew_road"},
            {47000, "T_42", EventAction::repair_start, "crew_road"},
            {47100, "W_near", EventAction::repair_start, "crew_water"},
            {61500, "W_near", EventAction::repair_end, "crew_water"},
            {90200, "T_42", EventAction::repair_end, "crew_road"},
        };
        c.expect(t.rows == want, "blocked-road trace:\n" + event_table_to_csv(t));
        c.note("arithmetic 4200 / 11400 and 12-row blocked-road trace reproduced");
    }

    // ---- 7: MPC -----------------------------------------------------------

    NetworkContext const&
    testbed()
    {
        static NetworkContext const ctx = prepare_network(build_simple_testbed());
        return ctx;
    }

    void
    mpc_dominance(Checks& c)
    {
        RunConfig cfg;
        cfg.mpc_horizon = 3;
        DisasterScenario s;
        for (auto id : {"W_P2", "W_P5", "W_P9"})
        {
            s.failures.push_back({id, 3600.0, Severity::leak});
        }
        auto const order = plan_repairs(testbed(), s, Strategy::mpc, cfg);
        double const mpc = evaluate_order(testbed(), s, order, cfg).report.weighted_eoh;

        std::vector<std::string> perm{"W_P2", "W_P5", "W_P9"};
        double best = INFINITY;
        double worst = -INFINITY;
        int count = 0;
        do
        {
            double const v = evaluate_order(testbed(), s, {{NetworkKind::water, perm}}, cfg).report.weighted_eoh;
            best = std::min(best, v);
            worst = std::max(worst, v);
            ++count;
        } while (std::next_permutation(perm.begin(), perm.end()));
        c.expect(count == 6, "expected 6 permutations");
        c.expect(mpc == best, fmt::format("MPC {:.17g} vs exhaustive minimum {:.17g}", mpc, best));
        std::string heur;
        for (auto st : {Strategy::max_flow, Strategy::centrality, Strategy::crew_distance, Strategy::zone})
        {
            double const h = run_scenario(testbed(), s, st, cfg).outcome.report.weighted_eoh;
            c.expect(mpc <= h, fmt::format("MPC {:.6f} above {} {:.6f}", mpc, to_string(st), h));
            heur += fmt::format(" {} {:.4f}", to_string(st), h);
        }
        c.note(fmt::format("MPC {:.4f} h, permutations {:.4f}..{:.4f} h;{}", mpc, best, worst, heur));
    }

    // ---- 8 and 9: batch ---------------------------------------------------

    std::vector<Point>
    stream_track()
    {
        std::ifstream in(fs::path(INFRASIM_DATA_DIR) / "stream.json");
        auto const j = nlohmann::json::parse(in);
        std::vector<Point> pts;
        for (auto const& p : j.at("track"))
        {
            pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
        return pts;
    }

    BatchConfig
    flood_batch()
    {
        BatchConfig bc;
        bc.run.event.kind = HazardKind::track;
        bc.run.event.track = stream_track();
        bc.run.event.offset = 100.0;
        bc.run.event.intensity = Intensity::random;
        bc.run.event.intensity_weights = kFloodIntensity;
        bc.run.seed = 7;
        bc.scenarios = 50;
        bc.strategies = {Strategy::max_flow, Strategy::centrality, Strategy::zone};
        bc.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        return bc;
    }

    struct HandAnova
    {
        double F = 0.0;
        double ss_error = 0.0;
    };

    // Spreadsheet layout: row and column totals, correction term, then the
    // sums of squares by subtraction.
    HandAnova
    hand_anova(std::vector<std::vector<double>> const& m)
    {
        double const n = static_cast<double>(m.size());
        double const k = static_cast<double>(m.front().size());
        double total = 0.0;
        double sum_sq = 0.0;
        std::vector<double> col(m.front().size(), 0.0);
        std::vector<double> row(m.size(), 0.0);
        for (std::size_t i = 0; i < m.size(); ++i)
        {
            for (std::size_t j = 0; j < m[i].size(); ++j)
            {
                total += m[i][j];
                sum_sq += m[i][j] * m[i][j];
                col[j] += m[i][j];
                row[i] += m[i][j];
            }
        }
        double const cf = total * total / (n * k);
        double col_sq = 0.0;
        for (double v : col)
        {
            col_sq += v * v;
        }
        double row_sq = 0.0;
        for (double v : row)
        {
            row_sq += v * v;
        }
        double const ss_total = sum_sq - cf;
        double const ss_treat = col_sq / n - cf;
        double const ss_subj = row_sq / k - cf;
        double const ss_err = ss_total - ss_treat - ss_subj;
        double const ms_treat = ss_treat / (k - 1);
        double const ms_err = ss_err / ((k - 1) * (n - 1));
        return {ms_treat / ms_err, ss_err};
    }

    void
    pipeline_shape(Checks& c)
    {
        auto const bc = flood_batch();
        auto const r = run_batch(testbed(), bc);
        c.expect(r.scenarios.size() == 50, "scenario count");
        c.expect(r.completed() == 50, fmt::format("{} of 50 scenarios completed", r.completed()));
        std::string summary;
        for (auto metric : {"water", "power", "weighted"})
        {
            auto const m = r.matrix(metric);
            bool complete = m.size() == r.completed();
            for (auto const& row : m)
            {
                complete = complete && row.size() == 3 && std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v) && v >= 0; });
            }
            c.expect(complete, fmt::format("{} matrix incomplete", metric));

            auto const& st = r.stats.at(metric);
            c.expect(st.anova.has_value(), fmt::format("{} ANOVA missing", metric));
            if (st.anova)
            {
                c.expect(st.anova->df_treatment == 2.0 && st.anova->df_error == 2.0 * (static_cast<double>(m.size()) - 1),
                         fmt::format("{} ANOVA df ({}, {})", metric, st.anova->df_treatment, st.anova->df_error));
                auto const full = hand_anova(m);
                c.expect(std::abs(st.anova->F - full.F) <= 1e-9 * std::max(1.0, std::abs(full.F)),
                         fmt::format("{} full-matrix F {:.12g} vs hand {:.12g}", metric, st.anova->F, full.F));
            }

            // Post-hoc: the three pairs, adjusted by hand (step-up over 3).
            c.expect(st.posthoc.size() == 3, fmt::format("{} post-hoc rows {}", metric, st.posthoc.size()));
            if (st.posthoc.size() == 3)
            {
                std::vector<std::pair<double, std::size_t>> raw;
                for (std::size_t i = 0; i < 3; ++i)
                {
                    raw.push_back({st.posthoc[i].result.p, i});
                }
                std::sort(raw.begin(), raw.end());
                std::vector<double> adj(3);
                double running = 1.0;
                for (int rank = 2; rank >= 0; --rank)
                {
                    running = std::min(running, raw[rank].first * 3.0 / (rank + 1));
                    adj[raw[rank].second] = running;
                }
                std::set<std::pair<std::size_t, std::size_t>> pairs;
                for (std::size_t i = 0; i < 3; ++i)
                {
                    auto const& ph = st.posthoc[i];
                    pairs.insert({ph.a, ph.b});
                    c.near(ph.result.p_adjusted, adj[i], 1e-12, fmt::format("{} BH p for pair {}-{}", metric, ph.a, ph.b));
                    std::vector<double> a;
                    std::vector<double> b;
                    for (auto const& row : m)
                    {
                        a.push_back(row[ph.a]);
                        b.push_back(row[ph.b]);
                    }
                    c.near(ph.result.t, paired_comparison(a, b).t, 1e-12, fmt::format("{} t for pair {}-{}", metric, ph.a, ph.b));
                }
                c.expect(pairs == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}, {1, 2}}, "post-hoc pairs");
            }

            // First three scenarios with a non-zero residual.
            std::optional<std::vector<std::vector<double>>> sub;
            for (std::size_t i = 0; i < m.size() && !sub; ++i)
            {
                for (std::size_t j = i + 1; j < m.size() && !sub; ++j)
                {
                    for (std::size_t k = j + 1; k < m.size() && !sub; ++k)
                    {
                        std::vector<std::vector<double>> cand{m[i], m[j], m[k]};
                        auto const h = hand_anova(cand);
                        if (h.ss_error > 1e-6 && std::isfinite(h.F))
                        {
                            sub = cand;
                        }
                    }
                }
            }
            c.expect(sub.has_value(), fmt::format("{}: no 3x3 submatrix with a residual", metric));
            if (sub)
            {
                auto const lib = repeated_measures_anova(*sub);
                auto const hand = hand_anova(*sub);
                c.expect(std::abs(lib.F - hand.F) <= 1e-9 * std::max(1.0, std::abs(hand.F)),
                         fmt::format("{} 3x3 F {:.15g} vs hand {:.15g}", metric, lib.F, hand.F));
                summary += fmt::format(" {} F={:.3f} (3x3 {:.4f})", metric, st.anova ? st.anova->F : NAN, lib.F);
            }
        }
        c.note(fmt::format("{} scenarios x 3 strategies;{}", r.completed(), summary));
    }

    std::string
    slurp(fs::path const& p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    void
    write_file(fs::path const& p, std::string const& text)
    {
        std::ofstream out(p, std::ios::binary);
        out << text;
    }

    void
    determinism(Checks& c)
    {
        auto const bc = flood_batch();
        auto const root = fs::temp_directory_path() / fmt::format("infrasim_acceptance_{}", std::chrono::steady_clock::now().time_since_epoch().count());
        std::vector<std::string> const names{"batch_summary.csv", "stats.json", "scenario.json", "event_table.csv",
                                             "performance.csv", "report.json"};
        for (int pass = 0; pass < 2; ++pass)
        {
            auto const dir = root / std::to_string(pass);
            fs::create_directories(dir);
            auto const r = run_batch(testbed(), bc);
            write_file(dir / names[0], batch_summary_csv(r));
            write_file(dir / names[1], batch_stats_json(r, bc));
            // One single run of the same flood as well.
            auto cfg = bc.run;
            cfg.strategy = Strategy::centrality;
            auto const one = run(testbed(), cfg);
            write_file(dir / names[2], scenario_to_json(one.scenario));
            write_file(dir / names[3], event_table_to_csv(one.outcome.table));
            write_file(dir / names[4], performance_to_csv(one.outcome.series));
            write_file(dir / names[5], report_to_json(one, cfg));
        }
        std::size_t bytes = 0;
        for (auto const& n : names)
        {
            auto const a = slurp(root / "0" / n);
            auto const b = slurp(root / "1" / n);
            c.expect(!a.empty(), n + " is empty");
            c.expect(a == b, n + " differs between runs");
            bytes += a.size();
        }
        fs::remove_all(root);
        c.note(fmt::format("{} files, {} bytes identical", names.size(), bytes));
    }
}

int
main(int argc, char** argv)
{
    std::vector<Criterion> const all{
        {1, "metric exactness", 1.0, metric_exactness},
        {2, "pressure-dependent demand closed form", std::nullopt, pda_conformance},
        {3, "solver oracles", 5.0, solver_oracles},
        {4, "failure frequency", 30.0, failure_frequency},
        {5, "interdependency propagation", std::nullopt, interdependency},
        {6, "repair scheduling traces", std::nullopt, scheduling},
        {7, "MPC dominance", 120.0, mpc_dominance},
        {8, "flood batch pipeline", 600.0, pipeline_shape},
        {9, "determinism", std::nullopt, determinism},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i)
    {
        only.insert(std::atoi(argv[i]));
    }

    int failed = 0;
    for (auto const& cr : all)
    {
        if (!only.empty() && !only.contains(cr.id))
        {
            continue;
        }
        Checks c;
        auto const t0 = std::chrono::steady_clock::now();
        try
        {
            cr.body(c);
        }
        catch (std::exception const& e)
        {
            c.failed.push_back(std::string("exception: ") + e.what());
        }
        double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.limit_s && secs >= *cr.limit_s)
        {
            c.failed.push_back(fmt::format("took {:.2f} s, limit {:g} s", secs, *cr.limit_s));
        }
        bool const ok = c.failed.empty();
        failed += !ok;
        std::string limit = cr.limit_s ? fmt::format(" < {:g} s", *cr.limit_s) : "";
        std::string detail;
        if (ok)
        {
            for (auto const& n : c.notes)
            {
                detail += (detail.empty() ? "" : "; ") + n;
            }
        }
        else
        {
            for (std::size_t i = 0; i < c.failed.size() && i < 5; ++i)
            {
                detail += (detail.empty() ? "" : "; ") + c.failed[i];
            }
            if (c.failed.size() > 5)
            {
                detail += fmt::format("; ... {} more", c.failed.size() - 5);
            }
        }
        std::cout << fmt::format("{} {} {} ({:.2f} s{}): {}", ok ? "PASS" : "FAIL", cr.id, cr.name, secs, limit, detail)
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
