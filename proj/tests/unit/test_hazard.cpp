#include "doctest.h"

#include "builders.hpp"

#include "infrasim/error.hpp"
#include "infrasim/hazard.hpp"
#include "infrasim/testbed.hpp"

#include <cmath>
#include <set>

using namespace infrasim;
using namespace infrasim::test;

namespace
{
    // One pipe from (x0, 0) to (x1, 0) between two junctions.
    IntegratedNetwork
    one_pipe(double x0, double x1)
    {
        IntegratedNetwork net;
        net.water = {junction("W_A", 0, 0, {x0, 0}), junction("W_B", 0, 0, {x1, 0}),
                     pipe("W_P", "W_A", "W_B", std::abs(x1 - x0))};
        return net;
    }

    HazardEvent
    point_event(Point c, double r, Intensity i = Intensity::high)
    {
        HazardEvent e;
        e.kind = HazardKind::point;
        e.center = c;
        e.radius = r;
        e.intensity = i;
        return e;
    }
}

TEST_CASE("exposure decays linearly with distance over the radius")
{
    IntegratedNetwork net;
    net.water = {junction("W_J", 0, 0, {300, 400})};
    auto const& j = net.water[0];
    // d = 500
    CHECK(exposure_probability(net, j, point_event({0, 0}, 1000)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(exposure_probability(net, j, point_event({300, 400}, 10)) == 1.0);
    CHECK(exposure_probability(net, j, point_event({0, 0}, 500)) == 0.0);
    CHECK(exposure_probability(net, j, point_event({0, 0}, 499)) == 0.0);
    CHECK(exposure_decay(0.0) == 1.0);
    CHECK(exposure_decay(1.0) == 0.0);
    CHECK(exposure_decay(2.5) == 0.0);
}

TEST_CASE("edge exposure uses the closest point of the segment")
{
    auto net = one_pipe(-1000, 1000);
    auto const& p = net.at("W_P");
    // Perpendicular foot at the origin, 100 m away.
    CHECK(exposure_probability(net, p, point_event({0, 100}, 400)) == doctest::Approx(0.75));
    // Beyond the end: distance to the endpoint.
    CHECK(exposure_probability(net, p, point_event({1300, 400}, 1000)) == doctest::Approx(0.5));
}

TEST_CASE("track exposure uses perpendicular distance to the polyline")
{
    IntegratedNetwork net;
    net.water = {junction("W_J", 0, 0, {50, 30})};
    HazardEvent e;
    e.kind = HazardKind::track;
    e.track = {{0, 0}, {100, 0}, {100, 100}};
    e.offset = 120;
    // Nearest: horizontal leg at 30 m, vertical leg at 50 m.
    CHECK(exposure_probability(net, net.water[0], e) == doctest::Approx(0.75));
    // A pipe crossing the track is fully exposed.
    auto crossing = one_pipe(40, 60);
    crossing.water[0].location = {50, -10};
    crossing.water[1].location = {50, 10};
    CHECK(exposure_probability(crossing, crossing.at("W_P"), e) == 1.0);
}

TEST_CASE("conditional failure by intensity")
{
    CHECK(conditional_failure_probability(Intensity::low) == 0.1);
    CHECK(conditional_failure_probability(Intensity::moderate) == 0.3);
    CHECK(conditional_failure_probability(Intensity::high) == 0.6);
    CHECK(conditional_failure_probability(Intensity::extreme) == 0.9);
    CHECK_THROWS_AS(conditional_failure_probability(Intensity::random), std::invalid_argument);
}

TEST_CASE("failure probability is the product of its factors")
{
    CHECK(failure_probability(0.5, 0.8, 0.6) == doctest::Approx(0.24).epsilon(1e-15));
    CHECK(failure_probability(0.7, 0.0, 0.9) == 0.0);
    CHECK(failure_probability(1.0, 1.0, 1.0) == 1.0);
}

TEST_CASE("property: failure probability is bounded and monotone in each factor")
{
    Rng rng = make_rng(11);
    for (int i = 0; i < 2000; ++i)
    {
        double const a = uniform01(rng);
        double const b = uniform01(rng);
        double const c = uniform01(rng);
        double const bump = uniform01(rng) * 0.5;
        double const p = failure_probability(a, b, c);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(failure_probability(std::min(1.0, a + bump), b, c) >= p);
        CHECK(failure_probability(a, std::min(1.0, b + bump), c) >= p);
        CHECK(failure_probability(a, b, std::min(1.0, c + bump)) >= p);
    }
}

TEST_CASE("property: exposure is zero strictly outside the footprint")
{
    auto const net = build_simple_testbed();
    Rng rng = make_rng(5);
    for (int trial = 0; trial < 200; ++trial)
    {
        auto const e = point_event(
            {uniform01(rng) * 1200 - 100, uniform01(rng) * 1200 - 100},
            50 + uniform01(rng) * 600);
        for (auto k : kAllNetworks)
        {
            for (auto const& c : net.components(k))
            {
                double const d = distance_to_polyline(e.center, component_shape(net, c));
                double const x = exposure_probability(net, c, e);
                CHECK(x >= 0.0);
                CHECK(x <= 1.0);
                if (d > e.radius)
                {
                    CHECK(x == 0.0);
                }
            }
        }
    }
}

TEST_CASE("sampling: zero hazard probability fails nothing")
{
    auto const net = build_simple_testbed();
    auto const s = sample_scenario(net, point_event({500, 500}, 5000), 0.0, 9);
    CHECK(s.failures.empty());
}

TEST_CASE("sampling: eligibility, severity and timestamps")
{
    auto const net = build_simple_testbed();
    auto e = point_event({500, 500}, 1e6, Intensity::extreme);
    e.occurrence_time = 7200;
    auto const s = sample_scenario(net, e, 1.0, 3);
    REQUIRE_FALSE(s.failures.empty());
    for (auto const& f : s.failures)
    {
        auto const& c = net.at(f.component_id);
        CHECK(is_hazard_eligible(c.kind));
        CHECK(f.severity == (c.kind == ComponentKind::pipe ? Severity::leak : Severity::full));
        CHECK(f.time == 7200.0);
    }
}

TEST_CASE("sampling: random events fail exactly count distinct components")
{
    auto const net = build_simple_testbed();
    HazardEvent e;
    e.kind = HazardKind::random;
    e.count = 3;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
    {
        auto const s = sample_scenario(net, e, 1.0, seed);
        REQUIRE(s.failures.size() == 3);
        std::set<std::string> ids;
        for (auto const& f : s.failures)
        {
            ids.insert(f.component_id);
            CHECK(is_hazard_eligible(net.at(f.component_id).kind));
        }
        CHECK(ids.size() == 3);
    }
    e.count = 1000;
    CHECK_THROWS_AS(sample_scenario(net, e, 1.0, 1), ValidationError);
}

TEST_CASE("sampling is deterministic per seed")
{
    auto const net = build_simple_testbed();
    auto e = point_event({400, 600}, 700, Intensity::random);
    auto const a = sample_scenario(net, e, 0.8, 1234);
    auto const b = sample_scenario(net, e, 0.8, 1234);
    CHECK(a == b);
    bool differs = false;
    for (std::uint64_t s = 1; s < 20 && !differs; ++s)
    {
        differs = sample_scenario(net, e, 0.8, 1234 + s).failures != a.failures;
    }
    CHECK(differs);
}

TEST_CASE("empirical failure frequency matches the probability")
{
    // Binomial check: |f - p| < 3 sqrt(p (1 - p) / n).
    auto const net = one_pipe(0, 10);
    auto const e = point_event({5, 40}, 100, Intensity::moderate);
    double const p = failure_probability(0.9, 0.6, 0.3);
    CHECK(failure_probability(net, net.at("W_P"), e, Intensity::moderate, 0.9) == doctest::Approx(p));
    int const n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i)
    {
        hits += static_cast<int>(!sample_scenario(net, e, 0.9, static_cast<std::uint64_t>(i)).failures.empty());
    }
    double const f = static_cast<double>(hits) / n;
    CHECK(std::abs(f - p) < 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("random intensity follows the occurrence weights")
{
    HazardEvent e = point_event({0, 0}, 1, Intensity::random);
    e.intensity_weights = kFloodIntensity;
    int counts[4] = {0, 0, 0, 0};
    Rng rng = make_rng(77);
    int const n = 90000;
    for (int i = 0; i < n; ++i)
    {
        ++counts[static_cast<int>(resolve_intensity(e, rng))];
    }
    CHECK(counts[3] == 0);
    double const expected[3] = {0.1 / 0.9, 0.3 / 0.9, 0.5 / 0.9};
    for (int k = 0; k < 3; ++k)
    {
        double const f = static_cast<double>(counts[k]) / n;
        CHECK(std::abs(f - expected[k]) < 4.0 * std::sqrt(expected[k] * (1 - expected[k]) / n));
    }
    e.intensity = Intensity::low;
    CHECK(resolve_intensity(e, rng) == Intensity::low);
}

TEST_CASE("event validation")
{
    CHECK_THROWS_AS(validate_event(point_event({0, 0}, 0)), ValidationError);
    HazardEvent t;
    t.kind = HazardKind::track;
    t.offset = 10;
    t.track = {{0, 0}};
    CHECK_THROWS_AS(validate_event(t), ValidationError);
    HazardEvent r;
    r.kind = HazardKind::random;
    CHECK_THROWS_AS(validate_event(r), ValidationError);
    auto w = point_event({0, 0}, 5);
    w.intensity_weights = {0, 0, 0, 0};
    CHECK_THROWS_AS(validate_event(w), ValidationError);
}

TEST_CASE("track generation")
{
    Bounds const box{{0, 0}, {1000, 600}};
    SUBCASE("two control points give a straight chord")
    {
        auto const t = generate_track(4, box, 2);
        REQUIRE(t.size() >= 51);
        Point const a = t.front();
        Point const b = t.back();
        for (auto p : t)
        {
            CHECK(distance_to_segment(p, a, b) < 1e-9);
        }
        CHECK(a.x == 0.0);
        CHECK(b.x == 1000.0);
    }
    SUBCASE("deterministic per seed")
    {
        CHECK(generate_track(8, box, 5) == generate_track(8, box, 5));
        CHECK(generate_track(8, box, 5) != generate_track(9, box, 5));
    }
    SUBCASE("stays inside the overshoot margin")
    {
        auto const grown = track_overshoot_bounds(box);
        for (std::uint64_t seed = 0; seed < 1000; ++seed)
        {
            int const n = 2 + static_cast<int>(seed % 7);
            auto const t = generate_track(seed, box, n);
            CHECK(t.size() >= 51);
            for (auto p : t)
            {
                CHECK(p.x >= grown.min.x);
                CHECK(p.x <= grown.max.x);
                CHECK(p.y >= grown.min.y);
                CHECK(p.y <= grown.max.y);
            }
        }
    }
    CHECK_THROWS_AS(generate_track(1, box, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_track(1, Bounds{{0, 0}, {0, 10}}, 3), std::invalid_argument);
}

TEST_CASE("scenario JSON round trip")
{
    auto const net = build_simple_testbed();
    HazardEvent e;
    e.kind = HazardKind::track;
    e.track = generate_track(3, network_bounds(net), 4);
    e.offset = 150;
    e.intensity = Intensity::random;
    e.intensity_weights = kFloodIntensity;
    auto const s = sample_scenario(net, e, 1.0, 21);
    auto const text = scenario_to_json(s);
    auto const back = scenario_from_json(text, &net);
    CHECK(back == s);
    CHECK(scenario_to_json(back) == text);

    CHECK_THROWS_AS(scenario_from_json("{", &net), ParseError);
    auto bad = s;
    bad.failures.push_back({"W_NOPE", 3600, Severity::leak});
    CHECK_THROWS_AS(scenario_from_json(scenario_to_json(bad), &net), ParseError);
    bad = s;
    bad.failures = {{"P_L1", 3600, Severity::leak}};
    CHECK_THROWS_AS(scenario_from_json(scenario_to_json(bad), &net), ParseError);
}
