#pragma once

#include "infrasim/network.hpp"
#include "infrasim/random.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace infrasim
{
    enum class HazardKind
    {
        point,
        track,
        random,
    };

    enum class Intensity
    {
        low,
        moderate,
        high,
        extreme,
        random,
    };

    enum class Severity
    {
        leak,
        full,
    };

    std::string_view to_string(HazardKind k);
    std::string_view to_string(Intensity i);
    std::string_view to_string(Severity s);
    std::optional<HazardKind> parse_hazard_kind(std::string_view s);
    std::optional<Intensity> parse_intensity(std::string_view s);
    std::optional<Severity> parse_severity(std::string_view s);

    /// Relative odds of low, moderate, high, extreme when a `random`
    /// intensity is resolved. Need not sum to one.
    using IntensityWeights = std::array<double, 4>;
    inline constexpr IntensityWeights kUniformIntensity{1.0, 1.0, 1.0, 1.0};
    /// Flood occurrence profile: low 0.1, moderate 0.3, high 0.5, no extreme.
    inline constexpr IntensityWeights kFloodIntensity{0.1, 0.3, 0.5, 0.0};

    struct HazardEvent
    {
        HazardKind kind = HazardKind::point;
        Intensity intensity = Intensity::moderate;
        IntensityWeights intensity_weights = kUniformIntensity;
        // point
        Point center;
        double radius = 0.0;  ///< m
        // track
        std::vector<Point> track;
        double offset = 0.0;  ///< m
        // random
        int count = 0;
        double occurrence_time = 3600.0;  ///< s
        std::uint64_t seed = 0;

        friend bool operator==(HazardEvent const&, HazardEvent const&) = default;
    };

    /// Throws ValidationError on a malformed event.
    void validate_event(HazardEvent const& event);

    struct Failure
    {
        std::string component_id;
        double time = 0.0;  ///< s
        Severity severity = Severity::full;

        friend bool operator==(Failure const&, Failure const&) = default;
    };

    struct DisasterScenario
    {
        HazardEvent event;
        /// The concrete level used for sampling.
        Intensity resolved_intensity = Intensity::moderate;
        double p_hazard = 1.0;
        std::vector<Failure> failures;

        friend bool
        operator==(DisasterScenario const&, DisasterScenario const&) = default;
    };

    /// Linear decay g(u) = max(0, 1 - u).
    double exposure_decay(double u);

    /// Pipes, power lines and road links; the only kinds a hazard can fail.
    bool is_hazard_eligible(ComponentKind k);
    Severity failure_severity(ComponentKind k);

    /// Geometry used for distance tests: the endpoint segment for edges, the
    /// location otherwise.
    std::vector<Point> component_shape(
        IntegratedNetwork const& net, Component const& c);

    /// P(exposure | hazard). Random events expose everything (1).
    double exposure_probability(
        IntegratedNetwork const& net,
        Component const& c,
        HazardEvent const& event);

    /// P(failure | exposure) for a concrete level. Throws std::invalid_argument
    /// for Intensity::random.
    double conditional_failure_probability(Intensity intensity);

    double failure_probability(
        double p_hazard, double exposure, double conditional);

    double failure_probability(
        IntegratedNetwork const& net,
        Component const& c,
        HazardEvent const& event,
        Intensity resolved,
        double p_hazard);

    /// Draws a concrete level by the event's weights when `random`.
    Intensity resolve_intensity(HazardEvent const& event, Rng& rng);

    /// Seeded failure draw. Point and track events draw one Bernoulli per
    /// eligible component (water, power, traffic order); random events fail
    /// exactly `count` eligible components regardless of p_hazard.
    DisasterScenario sample_scenario(
        IntegratedNetwork const& net,
        HazardEvent const& event,
        double p_hazard,
        std::uint64_t seed);

    /// Catmull-Rom track through `n_control_points` seeded control points
    /// spread left to right over `bounds`. Discretized to at least 50
    /// segments; stays within `bounds` grown by track_overshoot_margin.
    std::vector<Point> generate_track(
        std::uint64_t seed, Bounds const& bounds, int n_control_points);

    /// Worst-case excursion of a uniform Catmull-Rom curve outside its
    /// control-point box, per axis: one eighth of the extent.
    Bounds track_overshoot_bounds(Bounds const& bounds);

    /// Bounding box of every located component.
    Bounds network_bounds(IntegratedNetwork const& net);

    inline constexpr int kScenarioSchemaVersion = 1;

    std::string scenario_to_json(DisasterScenario const& s);
    /// Throws ParseError; ids are checked against `net` when given.
    DisasterScenario scenario_from_json(
        std::string_view text, IntegratedNetwork const* net = nullptr);
}
