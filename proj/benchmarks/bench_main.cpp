#include "infrasim/event_table.hpp"
#include "infrasim/hazard.hpp"
#include "infrasim/hydraulics.hpp"
#include "infrasim/pipeline.hpp"
#include "infrasim/power_flow.hpp"
#include "infrasim/recovery.hpp"
#include "infrasim/simulation.hpp"
#include "infrasim/testbed.hpp"
#include "infrasim/traffic.hpp"

#include <benchmark/benchmark.h>

using namespace infrasim;

namespace
{
    IntegratedNetwork const&
    net()
    {
        static IntegratedNetwork const n = build_simple_testbed();
        return n;
    }

    NetworkContext const&
    ctx()
    {
        static NetworkContext const c = prepare_network(build_simple_testbed());
        return c;
    }

    DisasterScenario
    three_leaks()
    {
        DisasterScenario s;
        for (auto id : {"W_P2", "W_P5", "W_P9"})
        {
            s.failures.push_back({id, 3600.0, Severity::leak});
        }
        return s;
    }
}

static void
BM_HydraulicsSteady(benchmark::State& state)
{
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(solve_hydraulics(net(), {}, 0.0, 60.0, PdaParams{}));
    }
}
BENCHMARK(BM_HydraulicsSteady);

static void
BM_HydraulicsDay(benchmark::State& state)
{
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(solve_hydraulics(net(), {}, 86400.0, 60.0, PdaParams{}));
    }
}
BENCHMARK(BM_HydraulicsDay)->Unit(benchmark::kMillisecond);

static void
BM_PowerDispatch(benchmark::State& state)
{
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(solve_power(net(), {}));
    }
}
BENCHMARK(BM_PowerDispatch);

static void
BM_TrafficAssignment(benchmark::State& state)
{
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(assign_traffic(net(), {}));
    }
}
BENCHMARK(BM_TrafficAssignment);

static void
BM_Centrality(benchmark::State& state)
{
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(component_centrality(net()));
    }
}
BENCHMARK(BM_Centrality);

static void
BM_HazardDraw(benchmark::State& state)
{
    HazardEvent e;
    e.center = {750, 500};
    e.radius = 600;
    e.intensity = Intensity::high;
    std::uint64_t seed = 0;
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(sample_scenario(net(), e, 1.0, seed++));
    }
}
BENCHMARK(BM_HazardDraw);

static void
BM_ScheduleAndSimulate(benchmark::State& state)
{
    auto const s = three_leaks();
    RunConfig cfg;
    auto const order = plan_repairs(ctx(), s, Strategy::max_flow, cfg);
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(evaluate_order(ctx(), s, order, cfg));
    }
}
BENCHMARK(BM_ScheduleAndSimulate)->Unit(benchmark::kMillisecond);

static void
BM_MpcFullHorizon(benchmark::State& state)
{
    auto const s = three_leaks();
    RunConfig cfg;
    cfg.mpc_horizon = static_cast<int>(state.range(0));
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(plan_repairs(ctx(), s, Strategy::mpc, cfg));
    }
}
BENCHMARK(BM_MpcFullHorizon)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
