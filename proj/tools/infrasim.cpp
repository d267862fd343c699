// infrasim command-line tool: run, batch, validate, make-testbed.
#include "infrasim/error.hpp"
#include "infrasim/network_io.hpp"
#include "infrasim/pipeline.hpp"
#include "infrasim/testbed.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <filesystem>

namespace fs = std::filesystem;
using namespace infrasim;

namespace
{
    constexpr int kExitFailure = 1;
    constexpr int kExitInvalid = 2;
    constexpr int kExitSolver = 3;

    struct Options
    {
        std::string network = "builtin:simple";
        std::string hazard = "point";
        std::string center;
        double radius = 0.0;
        std::string track;
        double offset = 0.0;
        int count = 0;
        std::string intensity = "moderate";
        std::string intensity_weights;
        double occurrence = 3600.0;
        double p_hazard = 1.0;
        std::vector<std::string> strategies{"max_flow"};
        int horizon = 2;
        std::optional<double> sim_horizon;
        std::string crews;
        std::optional<std::uint64_t> seed;
        int scenarios = 1;
        int jobs = 1;
        std::string mop = "pcs";
        std::string out = "out";
    };

    /// Failure tagged with the pipeline stage it happened in.
    struct StageError : std::runtime_error
    {
        StageError(std::string const& stage, std::exception const& e, int code)
            : std::runtime_error(stage + ": " + e.what()), exit_code(code)
        {
        }
        int exit_code;
    };

    int
    code_for(std::exception const& e)
    {
        if (dynamic_cast<ParseError const*>(&e) || dynamic_cast<ValidationError const*>(&e) ||
            dynamic_cast<UnknownComponentError const*>(&e) || dynamic_cast<std::invalid_argument const*>(&e))
        {
            return kExitInvalid;
        }
        if (dynamic_cast<SolverError const*>(&e))
        {
            return kExitSolver;
        }
        return kExitFailure;
    }

    template <class F>
    auto
    stage(std::string const& name, F&& f)
    {
        spdlog::info("stage {}: start", name);
        try
        {
            if constexpr (std::is_void_v<decltype(f())>)
            {
                f();
                spdlog::info("stage {}: done", name);
            }
            else
            {
                auto r = f();
                spdlog::info("stage {}: done", name);
                return r;
            }
        }
        catch (StageError const&)
        {
            throw;
        }
        catch (std::exception const& e)
        {
            throw StageError(name, e, code_for(e));
        }
    }

    std::vector<double>
    parse_numbers(std::string const& text, std::size_t expected, std::string const& what)
    {
        std::vector<double> v;
        std::size_t pos = 0;
        while (pos <= text.size())
        {
            auto const comma = std::min(text.find(',', pos), text.size());
            double x = 0.0;
            auto const* b = text.data() + pos;
            auto const* e = text.data() + comma;
            auto [ptr, ec] = std::from_chars(b, e, x);
            if (ec != std::errc() || ptr != e)
            {
                throw std::invalid_argument(what + ": expected " + std::to_string(expected) + " comma-separated numbers");
            }
            v.push_back(x);
            pos = comma + 1;
        }
        if (v.size() != expected)
        {
            throw std::invalid_argument(what + ": expected " + std::to_string(expected) + " comma-separated numbers");
        }
        return v;
    }

    IntegratedNetwork
    load_any_network(std::string const& source)
    {
        if (source == "builtin:simple")
        {
            return build_simple_testbed();
        }
        return load_network(source);
    }

    /// Track file: JSON array of [x, y] pairs, or an object with "track".
    std::vector<Point>
    load_track(fs::path const& path)
    {
        auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
        if (j.is_discarded())
        {
            throw ParseError("track file " + path.string() + " is not valid JSON");
        }
        if (j.is_object())
        {
            j = j.value("track", nlohmann::json());
        }
        if (!j.is_array())
        {
            throw ParseError("track file " + path.string() + ": expected an array of [x, y] points");
        }
        std::vector<Point> pts;
        for (auto const& p : j)
        {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            {
                throw ParseError("track file " + path.string() + ": expected an array of [x, y] points");
            }
            pts.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        return pts;
    }

    /// Crew file: [{"id", "network", "location", "busy_until"?}, ...].
    std::vector<Crew>
    load_crews(fs::path const& path)
    {
        auto const j = nlohmann::json::parse(read_text_file(path), nullptr, false);
        if (j.is_discarded() || !j.is_array())
        {
            throw ParseError("crew file " + path.string() + ": expected a JSON array");
        }
        std::vector<Crew> crews;
        for (auto const& c : j)
        {
            Crew crew;
            try
            {
                crew.id = c.at("id").get<std::string>();
                auto const net = parse_network_kind(c.at("network").get<std::string>());
                if (!net)
                {
                    throw ParseError("unknown network '" + c.at("network").get<std::string>() + "'");
                }
                crew.network = *net;
                crew.location = c.at("location").get<std::string>();
                crew.busy_until = c.value("busy_until", 0.0);
            }
            catch (nlohmann::json::exception const& e)
            {
                throw ParseError("crew file " + path.string() + ": " + e.what());
            }
            crews.push_back(std::move(crew));
        }
        return crews;
    }

    RunConfig
    make_config(Options const& o, IntegratedNetwork const& net)
    {
        RunConfig c;
        auto const kind = parse_hazard_kind(o.hazard);
        if (!kind)
        {
            throw std::invalid_argument("unknown hazard '" + o.hazard + "'");
        }
        c.event.kind = *kind;
        auto const intensity = parse_intensity(o.intensity);
        if (!intensity)
        {
            throw std::invalid_argument("unknown intensity '" + o.intensity + "'");
        }
        c.event.intensity = *intensity;
        if (!o.intensity_weights.empty())
        {
            auto const w = parse_numbers(o.intensity_weights, 4, "--intensity-weights");
            std::copy(w.begin(), w.end(), c.event.intensity_weights.begin());
        }
        c.event.occurrence_time = o.occurrence;
        switch (c.event.kind)
        {
        case HazardKind::point:
        {
            if (o.center.empty())
            {
                throw std::invalid_argument("point hazard needs --center X,Y");
            }
            auto const xy = parse_numbers(o.center, 2, "--center");
            c.event.center = {xy[0], xy[1]};
            c.event.radius = o.radius;
            break;
        }
        case HazardKind::track:
            if (!o.track.empty())
            {
                c.event.track = load_track(o.track);
            }
            c.event.offset = o.offset;
            break;
        case HazardKind::random:
            c.event.count = o.count;
            break;
        }
        c.p_hazard = o.p_hazard;
        auto const strategy = parse_strategy(o.strategies.front());
        if (!strategy)
        {
            throw std::invalid_argument("unknown strategy '" + o.strategies.front() + "'");
        }
        c.strategy = *strategy;
        c.mpc_horizon = o.horizon;
        if (!o.crews.empty())
        {
            c.crews = load_crews(o.crews);
            validate_crews(net, c.crews);
        }
        c.seed = *o.seed;
        c.horizon = o.sim_horizon;
        c.mop = o.mop == "ecs" ? Mop::ecs : Mop::pcs;
        // Validate the static parts now (a generated track is filled in later).
        auto probe = c.event;
        if (probe.kind == HazardKind::track && probe.track.empty())
        {
            probe.track = {{0, 0}, {1, 0}};
        }
        validate_event(probe);
        if (!(c.p_hazard >= 0.0 && c.p_hazard <= 1.0))
        {
            throw std::invalid_argument("--p-hazard must be in [0, 1]");
        }
        if (c.mpc_horizon < 1)
        {
            throw std::invalid_argument("--horizon must be at least 1");
        }
        return c;
    }

    void
    write_output(fs::path const& dir, std::string const& name, std::string const& text)
    {
        write_text_file(dir / name, text);
        spdlog::info("wrote {}", (dir / name).string());
    }

    void
    cmd_run(Options const& o)
    {
        auto const net = stage("load network", [&] { return load_any_network(o.network); });
        auto const config = stage("configure", [&] { return make_config(o, net); });
        auto const ctx = stage("baseline", [&] { return prepare_network(net, config.simulation.pda); });
        auto const scenario = stage("hazard", [&] { return draw_scenario(ctx, config, config.seed); });
        spdlog::info("{} component(s) failed", scenario.failures.size());
        RunResult r;
        r.scenario = scenario;
        r.strategy = config.strategy;
        r.order = stage("recovery", [&] { return plan_repairs(ctx, scenario, config.strategy, config); });
        r.outcome.table = stage("schedule", [&] {
            return build_event_table(ctx.net, scenario, r.order, crews_for(ctx, config), config.schedule);
        });
        r.outcome.series = stage("simulate", [&] {
            return simulate(ctx.net, r.outcome.table, config.horizon.value_or(default_horizon(r.outcome.table)),
                            config.simulation);
        });
        r.outcome.report = stage("metrics", [&] { return make_report(r.outcome.series, config.mop, config.weights); });
        stage("write outputs", [&] {
            fs::create_directories(o.out);
            write_output(o.out, "scenario.json", scenario_to_json(scenario));
            write_output(o.out, "event_table.csv", event_table_to_csv(r.outcome.table));
            write_output(o.out, "performance.csv", performance_to_csv(r.outcome.series));
            write_output(o.out, "report.json", report_to_json(r, config));
        });
        spdlog::info("weighted EOH {:.4f} h (water {:.4f}, power {:.4f})", r.outcome.report.weighted_eoh,
                     r.outcome.report.eoh("water"), r.outcome.report.eoh("power"));
    }

    void
    cmd_batch(Options const& o)
    {
        auto const net = stage("load network", [&] { return load_any_network(o.network); });
        BatchConfig bc;
        stage("configure", [&] {
            bc.run = make_config(o, net);
            for (auto const& s : o.strategies)
            {
                auto const st = parse_strategy(s);
                if (!st)
                {
                    throw std::invalid_argument("unknown strategy '" + s + "'");
                }
                bc.strategies.push_back(*st);
            }
            if (o.scenarios < 1)
            {
                throw std::invalid_argument("--scenarios must be at least 1");
            }
            bc.scenarios = o.scenarios;
            bc.jobs = std::max(1, o.jobs);
        });
        auto const ctx = stage("baseline", [&] { return prepare_network(net, bc.run.simulation.pda); });
        auto const result = stage("batch", [&] {
            return run_batch(ctx, bc, [](ScenarioOutcome const& s) {
                if (s.error)
                {
                    spdlog::warn("scenario {} (seed {}) skipped: {}", s.index, s.seed, *s.error);
                }
                else
                {
                    spdlog::info("scenario {} done: {} failure(s)", s.index, s.failures);
                }
            });
        });
        stage("write outputs", [&] {
            fs::create_directories(o.out);
            write_output(o.out, "batch_summary.csv", batch_summary_csv(result));
            write_output(o.out, "stats.json", batch_stats_json(result, bc));
        });
        spdlog::info("{} of {} scenario(s) completed", result.completed(), result.scenarios.size());
    }

    void
    cmd_validate(Options const& o, std::string const& scenario_file, std::string const& table_file)
    {
        auto const net = stage("load network", [&] { return load_any_network(o.network); });
        spdlog::info("network ok: {} water, {} power, {} traffic component(s), {} dependencies", net.water.size(),
                     net.power.size(), net.traffic.size(), net.dependencies.size());
        if (!scenario_file.empty())
        {
            auto const s = stage("scenario", [&] { return scenario_from_json(read_text_file(scenario_file), &net); });
            spdlog::info("scenario ok: {} failure(s)", s.failures.size());
        }
        if (!table_file.empty())
        {
            stage("event table", [&] { validate_event_table(net, event_table_from_csv(read_text_file(table_file))); });
            spdlog::info("event table ok");
        }
    }

    void
    add_network(CLI::App* app, Options& o)
    {
        app->add_option("--network", o.network, "Network JSON file or builtin:simple")->capture_default_str();
    }

    void
    add_scenario_options(CLI::App* app, Options& o)
    {
        add_network(app, o);
        app->add_option("--hazard", o.hazard, "Hazard kind")
            ->check(CLI::IsMember({"point", "track", "random"}))
            ->capture_default_str();
        app->add_option("--center", o.center, "Point event centre X,Y (m)");
        app->add_option("--radius", o.radius, "Point event radius (m)");
        app->add_option("--track", o.track, "Track JSON file ([[x, y], ...]); generated from the seed when absent")
            ->check(CLI::ExistingFile);
        app->add_option("--offset", o.offset, "Track offset distance (m)");
        app->add_option("--count", o.count, "Components failed by a random event");
        app->add_option("--intensity", o.intensity, "Hazard intensity")
            ->check(CLI::IsMember({"low", "moderate", "high", "extreme", "random"}))
            ->capture_default_str();
        app->add_option("--intensity-weights", o.intensity_weights,
                        "Odds of low,moderate,high,extreme for a random intensity");
        app->add_option("--occurrence-time", o.occurrence, "Hazard time (s)")->capture_default_str();
        app->add_option("--p-hazard", o.p_hazard, "Probability the hazard occurs")->capture_default_str();
        app->add_option("--horizon", o.horizon, "MPC look-ahead k")->capture_default_str();
        app->add_option("--sim-horizon", o.sim_horizon, "Simulation end (s); default last event + 24 h");
        app->add_option("--crews", o.crews, "Crew JSON file; default one crew per network")->check(CLI::ExistingFile);
        app->add_option("--seed", o.seed, "Random seed")->required();
        app->add_option("--mop", o.mop, "Performance measure")->check(CLI::IsMember({"pcs", "ecs"}))->capture_default_str();
        app->add_option("--out", o.out, "Output directory")->capture_default_str();
    }
}

int
main(int argc, char** argv)
{
    auto logger = spdlog::stderr_color_mt("infrasim");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%Y-%m-%d %H:%M:%S.%e] [%^%l%$] %v");

    CLI::App app{"Interdependent water, power and road network disaster simulator"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");

    Options o;
    auto const strategy_check = CLI::IsMember({"max_flow", "capacity", "centrality", "crew_distance", "zone", "mpc"});

    auto* run = app.add_subcommand("run", "Simulate one seeded scenario");
    add_scenario_options(run, o);
    run->add_option("--strategy", o.strategies, "Recovery strategy")
        ->expected(1)
        ->check(strategy_check)
        ->capture_default_str();

    auto* batch = app.add_subcommand("batch", "Seeded scenarios x strategies, paired");
    add_scenario_options(batch, o);
    batch->add_option("--strategy", o.strategies, "Recovery strategies (comma-separated or repeated)")
        ->delimiter(',')
        ->check(strategy_check)
        ->capture_default_str();
    batch->add_option("--scenarios", o.scenarios, "Number of scenarios")->capture_default_str();
    batch->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();

    auto* validate = app.add_subcommand("validate", "Check a network and optional scenario or event table");
    add_network(validate, o);
    std::string scenario_file;
    std::string table_file;
    validate->add_option("--scenario", scenario_file, "Scenario JSON")->check(CLI::ExistingFile);
    validate->add_option("--event-table", table_file, "Event table CSV")->check(CLI::ExistingFile);

    auto* make = app.add_subcommand("make-testbed", "Write the built-in testbed as JSON");
    std::string testbed_out = "simple_testbed.json";
    make->add_option("--out", testbed_out, "Output file")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    if (verbose)
    {
        spdlog::set_level(spdlog::level::debug);
    }

    try
    {
        if (*run)
        {
            cmd_run(o);
        }
        else if (*batch)
        {
            cmd_batch(o);
        }
        else if (*validate)
        {
            cmd_validate(o, scenario_file, table_file);
        }
        else if (*make)
        {
            stage("write testbed", [&] { save_network(build_simple_testbed(), testbed_out); });
            spdlog::info("wrote {}", testbed_out);
        }
    }
    catch (StageError const& e)
    {
        spdlog::error("{}", e.what());
        return e.exit_code;
    }
    catch (std::exception const& e)
    {
        spdlog::error("{}", e.what());
        return kExitFailure;
    }
    return 0;
}
