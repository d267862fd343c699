#include "infrasim/pipeline.hpp"

#include "infrasim/centrality.hpp"
#include "infrasim/error.hpp"
#include "infrasim/random.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <mutex>
#include <set>
#include <thread>

namespace infrasim
{
    namespace
    {
        using nlohmann::json;

        constexpr std::uint64_t kTrackStream = 0x747261636bULL;

        std::string_view
        mop_name(Mop m)
        {
            return m == Mop::ecs ? "ecs" : "pcs";
        }

        std::set<std::string>
        failed_ids(DisasterScenario const& scenario)
        {
            std::set<std::string> ids;
            for (auto const& f : scenario.failures)
            {
                ids.insert(f.component_id);
            }
            return ids;
        }

        json
        order_json(RepairOrder const& order)
        {
            json j = json::object();
            for (auto const& [k, ids] : order)
            {
                j[std::string(to_string(k))] = ids;
            }
            return j;
        }

        json
        optional_number(std::optional<double> v)
        {
            return v ? json(*v) : json(nullptr);
        }

        std::string
        fmt_optional(std::optional<double> v)
        {
            return v ? fmt::format("{}", *v) : std::string();
        }

        json
        anova_json(AnovaResult const& a)
        {
            return {
                {"subjects", a.subjects},
                {"treatments", a.treatments},
                {"ss_treatment", a.ss_treatment},
                {"ss_subject", a.ss_subject},
                {"ss_error", a.ss_error},
                {"ss_total", a.ss_total},
                {"df_treatment", a.df_treatment},
                {"df_error", a.df_error},
                {"ms_treatment", a.ms_treatment},
                {"ms_error", a.ms_error},
                {"F", a.F},  // null when infinite
                {"p", a.p},
                {"degenerate", a.degenerate},
            };
        }
    }

    NetworkContext
    prepare_network(IntegratedNetwork net, PdaParams const& pda)
    {
        NetworkContext ctx;
        ctx.peak_flow = baseline_peak_flows(net, pda);
        ctx.centrality = component_centrality(net);
        ctx.net = std::move(net);
        return ctx;
    }

    HazardEvent
    concrete_event(NetworkContext const& ctx, RunConfig const& config, std::uint64_t seed)
    {
        HazardEvent e = config.event;
        e.seed = seed;
        if (e.kind == HazardKind::track && e.track.empty())
        {
            e.track = generate_track(derive_seed(seed, kTrackStream), network_bounds(ctx.net),
                                     config.track_control_points);
        }
        return e;
    }

    DisasterScenario
    draw_scenario(NetworkContext const& ctx, RunConfig const& config, std::uint64_t seed)
    {
        return sample_scenario(ctx.net, concrete_event(ctx, config, seed), config.p_hazard, seed);
    }

    std::vector<Crew>
    crews_for(NetworkContext const& ctx, RunConfig const& config)
    {
        return config.crews.empty() ? default_crews(ctx.net) : config.crews;
    }

    Outcome
    evaluate_order(
        NetworkContext const& ctx,
        DisasterScenario const& scenario,
        RepairOrder const& order,
        RunConfig const& config)
    {
        Outcome out;
        out.table = build_event_table(ctx.net, scenario, order, crews_for(ctx, config), config.schedule);
        double const horizon = config.horizon.value_or(default_horizon(out.table));
        out.series = simulate(ctx.net, out.table, horizon, config.simulation);
        out.report = make_report(out.series, config.mop, config.weights);
        return out;
    }

    RepairOrder
    plan_repairs(
        NetworkContext const& ctx,
        DisasterScenario const& scenario,
        Strategy strategy,
        RunConfig const& config)
    {
        auto const failed = failed_ids(scenario);
        if (strategy == Strategy::mpc)
        {
            auto evaluate = [&](RepairOrder const& o) { return evaluate_order(ctx, scenario, o, config).report.weighted_eoh; };
            return mpc_sequence(ctx.net, failed, config.mpc_horizon, evaluate);
        }
        auto const crews = crews_for(ctx, config);
        std::optional<TrafficState> traffic;
        if (strategy == Strategy::crew_distance)
        {
            StatusMap s;
            for (auto const& f : scenario.failures)
            {
                s.set(f.component_id, Status::failed);
            }
            traffic = assign_traffic(ctx.net, s, config.schedule.traffic);
        }
        RankingContext rc;
        rc.peak_flow = &ctx.peak_flow;
        rc.centrality = &ctx.centrality;
        rc.crews = &crews;
        rc.traffic = traffic ? &*traffic : nullptr;
        return rank_components(ctx.net, failed, strategy, rc);
    }

    RunResult
    run_scenario(
        NetworkContext const& ctx,
        DisasterScenario const& scenario,
        Strategy strategy,
        RunConfig const& config)
    {
        RunResult r;
        r.scenario = scenario;
        r.strategy = strategy;
        r.order = plan_repairs(ctx, scenario, strategy, config);
        r.outcome = evaluate_order(ctx, scenario, r.order, config);
        return r;
    }

    RunResult
    run(NetworkContext const& ctx, RunConfig const& config)
    {
        return run_scenario(ctx, draw_scenario(ctx, config, config.seed), config.strategy, config);
    }

    std::string
    performance_to_csv(PerformanceTimeSeries const& series)
    {
        std::string out = "time_s,network,ECS,PCS\n";
        for (auto const& [name, s] : {std::pair{"water", &series.water}, std::pair{"power", &series.power}})
        {
            auto const e = mop_curve(*s, Mop::ecs);
            auto const p = mop_curve(*s, Mop::pcs);
            for (std::size_t k = 0; k < s->size(); ++k)
            {
                out += fmt::format("{},{},{},{}\n", s->time[k], name, fmt_optional(e[k]), fmt_optional(p[k]));
            }
        }
        return out;
    }

    std::string
    report_to_json(RunResult const& result, RunConfig const& config)
    {
        auto const& rep = result.outcome.report;
        json networks = json::object();
        for (auto const& [name, n] : rep.networks)
        {
            json consumers = json::object();
            for (auto const& [id, v] : n.consumer_eoh)
            {
                consumers[id] = optional_number(v);
            }
            networks[name] = {
                {"eoh_ecs_h", n.eoh_ecs},
                {"eoh_pcs_h", n.eoh_pcs},
                {"consumer_eoh_h", consumers},
            };
        }
        json failures = json::array();
        for (auto const& f : result.scenario.failures)
        {
            failures.push_back(f.component_id);
        }
        json j = {
            {"schema_version", kReportSchemaVersion},
            {"seed", config.seed},
            {"strategy", std::string(to_string(result.strategy))},
            {"mop", std::string(mop_name(rep.mop))},
            {"t0_s", rep.t0},
            {"T_s", rep.T},
            {"hazard", std::string(to_string(result.scenario.event.kind))},
            {"intensity", std::string(to_string(result.scenario.resolved_intensity))},
            {"p_hazard", result.scenario.p_hazard},
            {"failures", failures},
            {"repair_order", order_json(result.order)},
            {"weights", rep.weights},
            {"weighted_eoh_h", rep.weighted_eoh},
            {"networks", networks},
        };
        if (result.strategy == Strategy::mpc)
        {
            j["mpc_horizon"] = config.mpc_horizon;
        }
        return j.dump(2) + "\n";
    }

    std::size_t
    BatchResult::completed() const
    {
        std::size_t n = 0;
        for (auto const& s : scenarios)
        {
            n += !s.error;
        }
        return n;
    }

    std::vector<std::vector<double>>
    BatchResult::matrix(std::string const& metric) const
    {
        std::vector<std::vector<double>> m;
        for (auto const& s : scenarios)
        {
            if (s.error)
            {
                continue;
            }
            if (metric == "water")
            {
                m.push_back(s.water_eoh);
            }
            else if (metric == "power")
            {
                m.push_back(s.power_eoh);
            }
            else if (metric == "weighted")
            {
                m.push_back(s.weighted_eoh);
            }
            else
            {
                throw std::invalid_argument("unknown batch metric '" + metric + "'");
            }
        }
        return m;
    }

    std::uint64_t
    scenario_seed(std::uint64_t base, std::size_t i)
    {
        return derive_seed(base, i);
    }

    BatchResult
    run_batch(NetworkContext const& ctx, BatchConfig const& config, BatchProgress const& progress)
    {
        if (config.scenarios < 1)
        {
            throw std::invalid_argument("batch needs at least one scenario");
        }
        if (config.strategies.empty())
        {
            throw std::invalid_argument("batch needs at least one strategy");
        }
        BatchResult out;
        out.strategies = config.strategies;
        auto const n = static_cast<std::size_t>(config.scenarios);
        out.scenarios.resize(n);

        std::atomic<std::size_t> next{0};
        std::mutex progress_mutex;
        auto worker = [&] {
            for (std::size_t i = next++; i < n; i = next++)
            {
                ScenarioOutcome& o = out.scenarios[i];
                o.index = i;
                o.seed = scenario_seed(config.run.seed, i);
                try
                {
                    auto const scenario = draw_scenario(ctx, config.run, o.seed);
                    o.failures = scenario.failures.size();
                    for (auto s : config.strategies)
                    {
                        auto const r = run_scenario(ctx, scenario, s, config.run);
                        o.water_eoh.push_back(r.outcome.report.eoh("water"));
                        o.power_eoh.push_back(r.outcome.report.eoh("power"));
                        o.weighted_eoh.push_back(r.outcome.report.weighted_eoh);
                    }
                }
                catch (std::exception const& e)
                {
                    o.error = e.what();
                    o.water_eoh.clear();
                    o.power_eoh.clear();
                    o.weighted_eoh.clear();
                }
                if (progress)
                {
                    std::lock_guard lock(progress_mutex);
                    progress(o);
                }
            }
        };
        auto const jobs = static_cast<std::size_t>(std::max(1, config.jobs));
        std::vector<std::thread> pool;
        for (std::size_t j = 1; j < std::min(jobs, n); ++j)
        {
            pool.emplace_back(worker);
        }
        worker();
        for (auto& t : pool)
        {
            t.join();
        }

        if (out.completed() == 0)
        {
            throw Error("every batch scenario failed; first error: " + *out.scenarios.front().error);
        }

        auto const k = config.strategies.size();
        for (std::string metric : {"water", "power", "weighted"})
        {
            auto const m = out.matrix(metric);
            MetricStats st;
            st.mean.assign(k, 0.0);
            for (auto const& row : m)
            {
                for (std::size_t j = 0; j < k; ++j)
                {
                    st.mean[j] += row[j];
                }
            }
            for (auto& v : st.mean)
            {
                v /= static_cast<double>(m.size());
            }
            if (k >= 2 && m.size() >= 2)
            {
                st.anova = repeated_measures_anova(m);
                std::vector<double> p;
                for (std::size_t a = 0; a < k; ++a)
                {
                    for (std::size_t b = a + 1; b < k; ++b)
                    {
                        std::vector<double> xa;
                        std::vector<double> xb;
                        for (auto const& row : m)
                        {
                            xa.push_back(row[a]);
                            xb.push_back(row[b]);
                        }
                        st.posthoc.push_back({a, b, paired_comparison(xa, xb)});
                        p.push_back(st.posthoc.back().result.p);
                    }
                }
                auto const adj = benjamini_hochberg(p);
                for (std::size_t i = 0; i < adj.size(); ++i)
                {
                    st.posthoc[i].result.p_adjusted = adj[i];
                }
            }
            out.stats[metric] = std::move(st);
        }
        return out;
    }

    std::string
    batch_summary_csv(BatchResult const& result)
    {
        std::string out = "scenario,seed,failures,strategy,network,eoh_h\n";
        for (auto const& s : result.scenarios)
        {
            if (s.error)
            {
                continue;
            }
            for (std::size_t j = 0; j < result.strategies.size(); ++j)
            {
                auto const name = to_string(result.strategies[j]);
                out += fmt::format("{},{},{},{},water,{}\n", s.index, s.seed, s.failures, name, s.water_eoh[j]);
                out += fmt::format("{},{},{},{},power,{}\n", s.index, s.seed, s.failures, name, s.power_eoh[j]);
                out += fmt::format("{},{},{},{},weighted,{}\n", s.index, s.seed, s.failures, name, s.weighted_eoh[j]);
            }
        }
        return out;
    }

    std::string
    batch_stats_json(BatchResult const& result, BatchConfig const& config)
    {
        json strategies = json::array();
        for (auto s : result.strategies)
        {
            strategies.push_back(std::string(to_string(s)));
        }
        json skipped = json::array();
        for (auto const& s : result.scenarios)
        {
            if (s.error)
            {
                skipped.push_back({{"scenario", s.index}, {"seed", s.seed}, {"error", *s.error}});
            }
        }
        json metrics = json::object();
        for (auto const& [name, st] : result.stats)
        {
            json posthoc = json::array();
            for (auto const& ph : st.posthoc)
            {
                auto const& r = ph.result;
                posthoc.push_back({
                    {"a", strategies[ph.a]},
                    {"b", strategies[ph.b]},
                    {"a_index", ph.a},
                    {"b_index", ph.b},
                    {"n", r.n},
                    {"mean_difference", r.mean_difference},
                    {"sd_difference", r.sd_difference},
                    {"t", r.t},
                    {"df", r.df},
                    {"p", r.p},
                    {"p_adjusted", r.p_adjusted},
                    {"degenerate", r.degenerate},
                });
            }
            metrics[name] = {
                {"mean_eoh_h", st.mean},
                {"anova", st.anova ? anova_json(*st.anova) : json(nullptr)},
                {"posthoc", posthoc},
            };
        }
        json j = {
            {"schema_version", kReportSchemaVersion},
            {"seed", config.run.seed},
            {"scenarios", config.scenarios},
            {"completed", result.completed()},
            {"strategies", strategies},
            {"mop", std::string(mop_name(config.run.mop))},
            {"skipped", skipped},
            {"metrics", metrics},
        };
        return j.dump(2) + "\n";
    }
}
