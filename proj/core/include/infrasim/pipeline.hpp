#pragma once

#include "infrasim/event_table.hpp"
#include "infrasim/hazard.hpp"
#include "infrasim/metrics.hpp"
#include "infrasim/recovery.hpp"
#include "infrasim/simulation.hpp"
#include "infrasim/statistics.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace infrasim
{
    inline constexpr int kReportSchemaVersion = 1;

    struct RunConfig
    {
        HazardEvent event;
        double p_hazard = 1.0;
        Strategy strategy = Strategy::max_flow;
        int mpc_horizon = 2;
        std::vector<Crew> crews;  ///< empty: default_crews
        std::uint64_t seed = 0;
        /// Simulation end (s); default is the last event plus 24 h.
        std::optional<double> horizon;
        /// Control points of a generated track (track events without one).
        int track_control_points = 4;
        SimulationParams simulation;
        ScheduleOptions schedule;
        Mop mop = Mop::pcs;
        std::map<std::string, double> weights = default_eoh_weights();
    };

    /// Undisrupted quantities shared by every run on one network.
    struct NetworkContext
    {
        IntegratedNetwork net;
        std::map<std::string, double> peak_flow;
        std::map<std::string, double> centrality;
    };

    NetworkContext prepare_network(IntegratedNetwork net, PdaParams const& pda = {});

    /// The configured event, with a seeded track filled in for track events
    /// that have none.
    HazardEvent concrete_event(NetworkContext const& ctx, RunConfig const& config, std::uint64_t seed);

    DisasterScenario draw_scenario(NetworkContext const& ctx, RunConfig const& config, std::uint64_t seed);

    std::vector<Crew> crews_for(NetworkContext const& ctx, RunConfig const& config);

    struct Outcome
    {
        EventTable table;
        PerformanceTimeSeries series;
        ResilienceReport report;
    };

    /// Schedules and simulates one repair order.
    Outcome evaluate_order(
        NetworkContext const& ctx,
        DisasterScenario const& scenario,
        RepairOrder const& order,
        RunConfig const& config);

    /// Repair order for a strategy. MPC scores candidates by the weighted
    /// EOH of a full schedule-and-simulate pass.
    RepairOrder plan_repairs(
        NetworkContext const& ctx,
        DisasterScenario const& scenario,
        Strategy strategy,
        RunConfig const& config);

    struct RunResult
    {
        DisasterScenario scenario;
        Strategy strategy = Strategy::max_flow;
        RepairOrder order;
        Outcome outcome;
    };

    RunResult run_scenario(
        NetworkContext const& ctx,
        DisasterScenario const& scenario,
        Strategy strategy,
        RunConfig const& config);

    /// draw_scenario with config.seed, then run_scenario.
    RunResult run(NetworkContext const& ctx, RunConfig const& config);

    /// Curves as time_s,network,ECS,PCS; undefined values are left empty.
    std::string performance_to_csv(PerformanceTimeSeries const& series);
    std::string report_to_json(RunResult const& result, RunConfig const& config);

    struct BatchConfig
    {
        RunConfig run;
        int scenarios = 1;
        std::vector<Strategy> strategies;
        int jobs = 1;
    };

    struct ScenarioOutcome
    {
        std::size_t index = 0;
        std::uint64_t seed = 0;
        std::size_t failures = 0;
        std::optional<std::string> error;
        /// Per strategy, in batch order.
        std::vector<double> water_eoh;
        std::vector<double> power_eoh;
        std::vector<double> weighted_eoh;
    };

    struct PostHoc
    {
        std::size_t a = 0;  ///< strategy indices
        std::size_t b = 0;
        PairedResult result;
    };

    struct MetricStats
    {
        std::vector<double> mean;  ///< per strategy
        std::optional<AnovaResult> anova;
        std::vector<PostHoc> posthoc;  ///< BH-adjusted within the metric
    };

    struct BatchResult
    {
        std::vector<Strategy> strategies;
        std::vector<ScenarioOutcome> scenarios;
        /// "water", "power", "weighted"
        std::map<std::string, MetricStats> stats;

        std::size_t completed() const;
        /// Complete rows of one metric: [scenario][strategy].
        std::vector<std::vector<double>> matrix(std::string const& metric) const;
    };

    /// Seed of scenario i in a batch.
    std::uint64_t scenario_seed(std::uint64_t base, std::size_t i);

    using BatchProgress = std::function<void(ScenarioOutcome const&)>;

    /// Paired design: each scenario is drawn once and every strategy repairs
    /// the same failures. Scenarios that throw are recorded and left out of
    /// the statistics; throws Error only when all of them fail.
    BatchResult run_batch(NetworkContext const& ctx, BatchConfig const& config, BatchProgress const& progress = {});

    /// One row per (scenario, strategy, network): scenario,seed,failures,
    /// strategy,network,eoh_h.
    std::string batch_summary_csv(BatchResult const& result);
    std::string batch_stats_json(BatchResult const& result, BatchConfig const& config);
}
