#include "infrasim/hazard.hpp"

#include "infrasim/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace infrasim
{
    using nlohmann::json;

    namespace
    {
        constexpr std::string_view kHazardNames[] = {"point", "track", "random"};
        constexpr std::string_view kIntensityNames[] = {
            "low", "moderate", "high", "extreme", "random"};
        constexpr std::string_view kSeverityNames[] = {"leak", "full"};

        template <typename E, std::size_t N>
        std::optional<E>
        parse_enum(std::string_view s, std::string_view const (&names)[N])
        {
            for (std::size_t i = 0; i < N; ++i)
            {
                if (names[i] == s)
                {
                    return static_cast<E>(i);
                }
            }
            return std::nullopt;
        }

        // Catmull-Rom point on the span p1 -> p2.
        Point
        catmull_rom(Point p0, Point p1, Point p2, Point p3, double t)
        {
            double const t2 = t * t;
            double const t3 = t2 * t;
            auto blend = [&](double a, double b, double c, double d) {
                return 0.5 * ((2.0 * b) + (-a + c) * t +
                              (2.0 * a - 5.0 * b + 4.0 * c - d) * t2 +
                              (-a + 3.0 * b - 3.0 * c + d) * t3);
            };
            return {blend(p0.x, p1.x, p2.x, p3.x), blend(p0.y, p1.y, p2.y, p3.y)};
        }
    }

    std::string_view
    to_string(HazardKind k)
    {
        return kHazardNames[static_cast<int>(k)];
    }

    std::string_view
    to_string(Intensity i)
    {
        return kIntensityNames[static_cast<int>(i)];
    }

    std::string_view
    to_string(Severity s)
    {
        return kSeverityNames[static_cast<int>(s)];
    }

    std::optional<HazardKind>
    parse_hazard_kind(std::string_view s)
    {
        return parse_enum<HazardKind>(s, kHazardNames);
    }

    std::optional<Intensity>
    parse_intensity(std::string_view s)
    {
        return parse_enum<Intensity>(s, kIntensityNames);
    }

    std::optional<Severity>
    parse_severity(std::string_view s)
    {
        return parse_enum<Severity>(s, kSeverityNames);
    }

    void
    validate_event(HazardEvent const& e)
    {
        auto fail = [](std::string const& m) { throw ValidationError("hazard event: " + m); };
        switch (e.kind)
        {
        case HazardKind::point:
            if (!(e.radius > 0.0) || !std::isfinite(e.radius))
            {
                fail("point events need radius > 0");
            }
            break;
        case HazardKind::track:
            if (!(e.offset > 0.0) || !std::isfinite(e.offset))
            {
                fail("track events need offset > 0");
            }
            if (e.track.size() < 2)
            {
                fail("track events need at least two track points");
            }
            break;
        case HazardKind::random:
            if (e.count < 1)
            {
                fail("random events need count >= 1");
            }
            break;
        }
        if (!std::isfinite(e.occurrence_time) || e.occurrence_time < 0.0)
        {
            fail("occurrence time must be finite and >= 0");
        }
        double total = 0.0;
        for (double w : e.intensity_weights)
        {
            if (!(w >= 0.0) || !std::isfinite(w))
            {
                fail("intensity weights must be finite and >= 0");
            }
            total += w;
        }
        if (!(total > 0.0))
        {
            fail("intensity weights must not all be zero");
        }
    }

    double
    exposure_decay(double u)
    {
        return std::max(0.0, 1.0 - u);
    }

    bool
    is_hazard_eligible(ComponentKind k)
    {
        return k == ComponentKind::pipe || k == ComponentKind::line ||
               k == ComponentKind::road_link;
    }

    Severity
    failure_severity(ComponentKind k)
    {
        return k == ComponentKind::pipe ? Severity::leak : Severity::full;
    }

    std::vector<Point>
    component_shape(IntegratedNetwork const& net, Component const& c)
    {
        if (is_edge_kind(c.kind))
        {
            auto const* a = net.find(c.from);
            auto const* b = net.find(c.to);
            if (a != nullptr && b != nullptr)
            {
                return {a->location, b->location};
            }
        }
        return {c.location};
    }

    double
    exposure_probability(
        IntegratedNetwork const& net,
        Component const& c,
        HazardEvent const& event)
    {
        auto const shape = component_shape(net, c);
        switch (event.kind)
        {
        case HazardKind::point:
            return exposure_decay(
                distance_to_polyline(event.center, shape) / event.radius);
        case HazardKind::track:
            return exposure_decay(
                polyline_distance(shape, event.track) / event.offset);
        case HazardKind::random:
            return 1.0;
        }
        return 0.0;
    }

    double
    conditional_failure_probability(Intensity intensity)
    {
        switch (intensity)
        {
        case Intensity::low:
            return 0.1;
        case Intensity::moderate:
            return 0.3;
        case Intensity::high:
            return 0.6;
        case Intensity::extreme:
            return 0.9;
        case Intensity::random:
            break;
        }
        throw std::invalid_argument(
            "intensity 'random' must be resolved before sampling");
    }

    double
    failure_probability(double p_hazard, double exposure, double conditional)
    {
        return p_hazard * exposure * conditional;
    }

    double
    failure_probability(
        IntegratedNetwork const& net,
        Component const& c,
        HazardEvent const& event,
        Intensity resolved,
        double p_hazard)
    {
        return failure_probability(
            p_hazard, exposure_probability(net, c, event),
            conditional_failure_probability(resolved));
    }

    Intensity
    resolve_intensity(HazardEvent const& event, Rng& rng)
    {
        if (event.intensity != Intensity::random)
        {
            return event.intensity;
        }
        auto const& w = event.intensity_weights;
        double const total = std::accumulate(w.begin(), w.end(), 0.0);
        double const u = uniform01(rng) * total;
        double acc = 0.0;
        int last = 0;
        for (int i = 0; i < 4; ++i)
        {
            if (w[i] <= 0.0)
            {
                continue;
            }
            last = i;
            acc += w[i];
            if (u < acc)
            {
                return static_cast<Intensity>(i);
            }
        }
        return static_cast<Intensity>(last);
    }

    DisasterScenario
    sample_scenario(
        IntegratedNetwork const& net,
        HazardEvent const& event,
        double p_hazard,
        std::uint64_t seed)
    {
        validate_event(event);
        if (!(p_hazard >= 0.0 && p_hazard <= 1.0))
        {
            throw ValidationError("p_hazard must lie in [0, 1]");
        }
        DisasterScenario out;
        out.event = event;
        out.event.seed = seed;
        out.p_hazard = p_hazard;
        Rng rng = make_rng(seed);
        out.resolved_intensity = resolve_intensity(event, rng);

        std::vector<Component const*> eligible;
        for (auto k : kAllNetworks)
        {
            for (auto const& c : net.components(k))
            {
                if (is_hazard_eligible(c.kind))
                {
                    eligible.push_back(&c);
                }
            }
        }

        auto record = [&](Component const& c) {
            out.failures.push_back(
                {c.id, event.occurrence_time, failure_severity(c.kind)});
        };
        if (event.kind == HazardKind::random)
        {
            if (static_cast<std::size_t>(event.count) > eligible.size())
            {
                throw ValidationError(
                    "random event count exceeds the number of eligible components");
            }
            // Partial Fisher-Yates; failures are then listed in network order.
            std::vector<std::size_t> idx(eligible.size());
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::size_t i = 0; i < static_cast<std::size_t>(event.count); ++i)
            {
                auto const j = i + uniform_index(rng, idx.size() - i);
                std::swap(idx[i], idx[j]);
            }
            std::sort(idx.begin(), idx.begin() + event.count);
            for (int i = 0; i < event.count; ++i)
            {
                record(*eligible[idx[static_cast<std::size_t>(i)]]);
            }
            return out;
        }

        double const conditional =
            conditional_failure_probability(out.resolved_intensity);
        for (auto const* c : eligible)
        {
            double const p = failure_probability(
                p_hazard, exposure_probability(net, *c, event), conditional);
            // One draw per component keeps later components' draws fixed.
            if (uniform01(rng) < p)
            {
                record(*c);
            }
        }
        return out;
    }

    std::vector<Point>
    generate_track(std::uint64_t seed, Bounds const& bounds, int n_control_points)
    {
        if (n_control_points < 2)
        {
            throw std::invalid_argument("a track needs at least two control points");
        }
        if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0) ||
            !std::isfinite(bounds.width()) || !std::isfinite(bounds.height()))
        {
            throw std::invalid_argument("track bounds are degenerate");
        }
        Rng rng = make_rng(seed);
        auto const n = static_cast<std::size_t>(n_control_points);
        std::vector<Point> ctrl(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            double const fx = static_cast<double>(i) / static_cast<double>(n - 1);
            ctrl[i] = {bounds.min.x + fx * bounds.width(),
                       bounds.min.y + uniform01(rng) * bounds.height()};
        }

        std::size_t const spans = n - 1;
        std::size_t const per_span = (50 + spans - 1) / spans;
        std::vector<Point> out;
        out.reserve(spans * per_span + 1);
        for (std::size_t s = 0; s < spans; ++s)
        {
            Point const p0 = ctrl[s == 0 ? 0 : s - 1];
            Point const p1 = ctrl[s];
            Point const p2 = ctrl[s + 1];
            Point const p3 = ctrl[std::min(s + 2, n - 1)];
            for (std::size_t k = 0; k < per_span; ++k)
            {
                double const t = static_cast<double>(k) / static_cast<double>(per_span);
                out.push_back(catmull_rom(p0, p1, p2, p3, t));
            }
        }
        out.push_back(ctrl.back());
        return out;
    }

    Bounds
    track_overshoot_bounds(Bounds const& b)
    {
        double const mx = 0.125 * b.width();
        double const my = 0.125 * b.height();
        return {{b.min.x - mx, b.min.y - my}, {b.max.x + mx, b.max.y + my}};
    }

    Bounds
    network_bounds(IntegratedNetwork const& net)
    {
        Bounds b{{HUGE_VAL, HUGE_VAL}, {-HUGE_VAL, -HUGE_VAL}};
        for (auto k : kAllNetworks)
        {
            for (auto const& c : net.components(k))
            {
                b.min.x = std::min(b.min.x, c.location.x);
                b.min.y = std::min(b.min.y, c.location.y);
                b.max.x = std::max(b.max.x, c.location.x);
                b.max.y = std::max(b.max.y, c.location.y);
            }
        }
        return b;
    }

    std::string
    scenario_to_json(DisasterScenario const& s)
    {
        auto const& e = s.event;
        json ev;
        ev["kind"] = std::string(to_string(e.kind));
        ev["intensity"] = std::string(to_string(e.intensity));
        ev["intensity_weights"] = e.intensity_weights;
        ev["occurrence_time_s"] = e.occurrence_time;
        ev["seed"] = e.seed;
        switch (e.kind)
        {
        case HazardKind::point:
            ev["center"] = json::array({e.center.x, e.center.y});
            ev["radius_m"] = e.radius;
            break;
        case HazardKind::track:
        {
            json pts = json::array();
            for (auto p : e.track)
            {
                pts.push_back(json::array({p.x, p.y}));
            }
            ev["track"] = pts;
            ev["offset_m"] = e.offset;
            break;
        }
        case HazardKind::random:
            ev["count"] = e.count;
            break;
        }
        json fails = json::array();
        for (auto const& f : s.failures)
        {
            fails.push_back(
                {{"component_id", f.component_id},
                 {"time_s", f.time},
                 {"severity", std::string(to_string(f.severity))}});
        }
        json j;
        j["schema_version"] = kScenarioSchemaVersion;
        j["event"] = ev;
        j["resolved_intensity"] = std::string(to_string(s.resolved_intensity));
        j["p_hazard"] = s.p_hazard;
        j["failures"] = fails;
        return j.dump(2) + "\n";
    }

    DisasterScenario
    scenario_from_json(std::string_view text, IntegratedNetwork const* net)
    {
        DisasterScenario s;
        try
        {
            json const j = json::parse(text);
            if (j.at("schema_version").get<int>() != kScenarioSchemaVersion)
            {
                throw ParseError("unsupported scenario schema_version");
            }
            auto const& ev = j.at("event");
            auto& e = s.event;
            auto enum_field = [](json const& obj, char const* key, auto parse) {
                auto v = parse(obj.at(key).template get<std::string>());
                if (!v)
                {
                    throw ParseError(std::string("bad value for '") + key + "'");
                }
                return *v;
            };
            e.kind = enum_field(ev, "kind", parse_hazard_kind);
            e.intensity = enum_field(ev, "intensity", parse_intensity);
            if (ev.contains("intensity_weights"))
            {
                e.intensity_weights = ev.at("intensity_weights").get<IntensityWeights>();
            }
            e.occurrence_time = ev.at("occurrence_time_s").get<double>();
            e.seed = ev.at("seed").get<std::uint64_t>();
            auto point = [](json const& p) {
                if (!p.is_array() || p.size() != 2)
                {
                    throw ParseError("a point must be [x, y]");
                }
                return Point{p[0].get<double>(), p[1].get<double>()};
            };
            switch (e.kind)
            {
            case HazardKind::point:
                e.center = point(ev.at("center"));
                e.radius = ev.at("radius_m").get<double>();
                break;
            case HazardKind::track:
                for (auto const& p : ev.at("track"))
                {
                    e.track.push_back(point(p));
                }
                e.offset = ev.at("offset_m").get<double>();
                break;
            case HazardKind::random:
                e.count = ev.at("count").get<int>();
                break;
            }
            s.resolved_intensity = enum_field(j, "resolved_intensity", parse_intensity);
            s.p_hazard = j.at("p_hazard").get<double>();
            for (auto const& f : j.at("failures"))
            {
                Failure fl;
                fl.component_id = f.at("component_id").get<std::string>();
                fl.time = f.at("time_s").get<double>();
                fl.severity = enum_field(f, "severity", parse_severity);
                s.failures.push_back(std::move(fl));
            }
        }
        catch (json::exception const& ex)
        {
            throw ParseError(std::string("scenario document: ") + ex.what());
        }
        try
        {
            validate_event(s.event);
        }
        catch (ValidationError const& ex)
        {
            throw ParseError(std::string("scenario document: ") + ex.what());
        }
        std::set<std::string> seen;
        for (auto const& f : s.failures)
        {
            if (!seen.insert(f.component_id).second)
            {
                throw ParseError("scenario lists '" + f.component_id + "' twice");
            }
            if (f.time < s.event.occurrence_time)
            {
                throw ParseError(
                    "failure of '" + f.component_id + "' precedes the event");
            }
            if (net != nullptr)
            {
                auto const* c = net->find(f.component_id);
                if (c == nullptr)
                {
                    throw ParseError(
                        "scenario names unknown component '" + f.component_id + "'");
                }
                if (!is_hazard_eligible(c->kind) || failure_severity(c->kind) != f.severity)
                {
                    throw ParseError(
                        "component '" + f.component_id +
                        "' cannot fail with severity " + std::string(to_string(f.severity)));
                }
            }
        }
        return s;
    }
}
