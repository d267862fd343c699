#include "infrasim/simulation.hpp"

#include "infrasim/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace infrasim
{
    namespace
    {
        Status
        status_after(EventAction a)
        {
            switch (a)
            {
            case EventAction::fail:
                return Status::failed;
            case EventAction::repair_start:
                return Status::under_repair;
            case EventAction::repair_end:
                return Status::repaired;
            }
            return Status::operational;
        }

        // One copy of the coupled networks (the disrupted run or the
        // undisturbed baseline).
        class Runner
        {
        public:
            Runner(IntegratedNetwork const& net, SimulationParams const& params)
                : net_(net), params_(params), storage_(WaterStorage::initial(net))
            {
                dry_ = dry_feeders();
                rebuild();
            }

            void
            apply(EventRow const& r)
            {
                statuses_.set(r.component_id, status_after(r.action));
            }

            // Reservoirs that are dry and feed something.
            std::set<std::string>
            dry_feeders() const
            {
                std::set<std::string> out;
                for (auto const& d : net_.dependencies)
                {
                    if (d.kind != DependencyKind::reservoir_feeds_generator)
                    {
                        continue;
                    }
                    auto it = storage_.reservoir_volume.find(d.source_id);
                    if (it != storage_.reservoir_volume.end() && it->second <= 0.0)
                    {
                        out.insert(d.source_id);
                    }
                }
                return out;
            }

            bool
            dry_changed() const
            {
                return dry_feeders() != dry_;
            }

            void
            rebuild()
            {
                dry_ = dry_feeders();
                std::set<std::string> inactive;
                if (!net_.power.empty())
                {
                    StatusMap ps = statuses_;
                    for (auto const& d : net_.dependencies)
                    {
                        if (d.kind == DependencyKind::reservoir_feeds_generator &&
                            dry_.contains(d.source_id))
                        {
                            ps.set(d.target_id, Status::failed);
                        }
                    }
                    power_ = solve_power(net_, ps, params_.power);
                    inactive = unpowered_dependents(net_, power_);
                }
                if (!net_.water.empty())
                {
                    model_.emplace(net_, statuses_, inactive, params_.pda, params_.hydraulic);
                }
            }

            void
            solve()
            {
                if (model_)
                {
                    snap_ = model_->solve(storage_);
                }
            }

            void
            advance(double dt)
            {
                if (model_ && dt > 0.0)
                {
                    model_->advance(storage_, snap_, dt);
                }
            }

            std::vector<double>
            water_supply() const
            {
                return model_ ? model_->consumer_supply(snap_) : std::vector<double>{};
            }

            std::vector<std::string>
            water_consumers() const
            {
                return model_ ? model_->consumer_ids() : std::vector<std::string>{};
            }

            std::vector<std::string>
            power_consumers() const
            {
                std::vector<std::string> out;
                for (auto const& [id, v] : power_.served_load)
                {
                    out.push_back(id);
                }
                return out;
            }

            std::vector<double>
            power_supply() const
            {
                std::vector<double> out;
                for (auto const& [id, v] : power_.served_load)
                {
                    out.push_back(v);
                }
                return out;
            }

            std::map<std::string, double>
            water_links(double t) const
            {
                return model_ ? model_->to_state(snap_, storage_, t).link_flow
                              : std::map<std::string, double>{};
            }

            std::map<std::string, double> const&
            power_links() const
            {
                return power_.line_flow;
            }

        private:
            IntegratedNetwork const& net_;
            SimulationParams const& params_;
            StatusMap statuses_;
            WaterStorage storage_;
            std::set<std::string> dry_;
            PowerState power_;
            std::optional<HydraulicModel> model_;
            HydraulicModel::Snapshot snap_;
        };

        void
        record(
            NetworkSeries& series,
            double t,
            std::vector<double> const& s,
            std::vector<double> const& S)
        {
            if (s.size() != S.size())
            {
                throw SolverError("consumer sets of the disrupted and baseline runs differ");
            }
            std::vector<double> clamped(s.size());
            for (std::size_t i = 0; i < s.size(); ++i)
            {
                clamped[i] = std::clamp(s[i], 0.0, std::max(0.0, S[i]));
            }
            series.time.push_back(t);
            series.supply.push_back(std::move(clamped));
            series.demand.push_back(S);
        }
    }

    double
    default_horizon(EventTable const& table)
    {
        double last = 0.0;
        for (auto const& r : table.rows)
        {
            last = std::max(last, r.time);
        }
        return last + 24.0 * 3600.0;
    }

    PerformanceTimeSeries
    simulate(
        IntegratedNetwork const& net,
        EventTable const& table,
        double horizon,
        SimulationParams const& params)
    {
        if (!(params.water_step > 0.0) || !std::isfinite(params.water_step))
        {
            throw std::invalid_argument("water_step must be positive");
        }
        if (!(horizon > 0.0) || !std::isfinite(horizon) || horizon < table.last_time())
        {
            throw std::invalid_argument(
                fmt::format("horizon {} s must be positive and cover the last event at {} s",
                            horizon, table.last_time()));
        }
        params.pda.validate();
        for (std::size_t i = 1; i < table.rows.size(); ++i)
        {
            if (table.rows[i].time < table.rows[i - 1].time)
            {
                throw std::invalid_argument("event table rows are not time ordered");
            }
        }

        std::vector<double> times;
        for (long k = 0;; ++k)
        {
            double const t = static_cast<double>(k) * params.water_step;
            if (t >= horizon)
            {
                break;
            }
            times.push_back(t);
        }
        times.push_back(horizon);
        for (auto const& r : table.rows)
        {
            times.push_back(r.time);
        }
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());

        std::optional<Runner> run;
        std::optional<Runner> base;
        try
        {
            run.emplace(net, params);
            base.emplace(net, params);
        }
        catch (SolverError const& e)
        {
            throw SolverError(fmt::format("at t = 0 s: {}", e.what()));
        }

        PerformanceTimeSeries out;
        out.start = 0.0;
        out.end = horizon;
        out.water.consumers = run->water_consumers();
        out.power.consumers = run->power_consumers();

        auto sample = [&](double t) {
            if (!net.water.empty())
            {
                record(out.water, t, run->water_supply(), base->water_supply());
                if (params.record_link_flows)
                {
                    out.water.link_flow.push_back(run->water_links(t));
                }
            }
            if (!net.power.empty())
            {
                record(out.power, t, run->power_supply(), base->power_supply());
                if (params.record_link_flows)
                {
                    out.power.link_flow.push_back(run->power_links());
                }
            }
        };

        std::size_t next_row = 0;
        for (std::size_t j = 0; j < times.size(); ++j)
        {
            double const t = times[j];
            try
            {
                bool const has_events =
                    next_row < table.rows.size() && table.rows[next_row].time == t;
                bool const run_dry = run->dry_changed();
                bool const base_dry = base->dry_changed();
                run->solve();
                base->solve();
                if (has_events || run_dry || base_dry)
                {
                    sample(t);  // just before the change
                    while (next_row < table.rows.size() && table.rows[next_row].time == t)
                    {
                        run->apply(table.rows[next_row++]);
                    }
                    if (has_events || run_dry)
                    {
                        run->rebuild();
                        run->solve();
                    }
                    if (base_dry)
                    {
                        base->rebuild();
                        base->solve();
                    }
                }
                sample(t);
                if (j + 1 < times.size())
                {
                    double const dt = times[j + 1] - t;
                    run->advance(dt);
                    base->advance(dt);
                }
            }
            catch (SolverError const& e)
            {
                double const prev = j > 0 ? times[j - 1] : 0.0;
                throw SolverError(fmt::format(
                    "at t = {} s (interval {}-{} s): {}", t, prev, t, e.what()));
            }
        }
        return out;
    }
}
