#include "infrasim/event_table.hpp"

#include "infrasim/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace infrasim
{
    namespace
    {
        constexpr std::string_view kActionNames[] = {"fail", "repair_start", "repair_end"};

        bool
        row_less(EventRow const& a, EventRow const& b)
        {
            if (a.time != b.time)
            {
                return a.time < b.time;
            }
            if (a.action != b.action)
            {
                return a.action < b.action;
            }
            return a.component_id < b.component_id;
        }

        struct CrewState
        {
            Crew crew;
            double free = 0.0;
        };

        class Scheduler
        {
        public:
            Scheduler(
                IntegratedNetwork const& net,
                DisasterScenario const& scenario,
                RepairOrder const& order,
                std::vector<Crew> const& crews,
                ScheduleOptions const& options)
                : net_(net), options_(options)
            {
                for (auto const& f : scenario.failures)
                {
                    net.at(f.component_id);
                    if (!fail_time_.emplace(f.component_id, f.time).second)
                    {
                        throw std::invalid_argument(
                            "scenario fails '" + f.component_id + "' twice");
                    }
                    table_.rows.push_back({f.time, f.component_id, EventAction::fail, {}});
                }
                std::set<std::string> listed;
                for (auto const& [k, ids] : order)
                {
                    for (auto const& id : ids)
                    {
                        if (!fail_time_.contains(id) || net.at(id).network != k ||
                            !listed.insert(id).second)
                        {
                            throw std::invalid_argument(
                                "repair order entry '" + id +
                                "' is not a distinct failed component of its network");
                        }
                    }
                    if (!ids.empty())
                    {
                        pending_[k] = ids;
                    }
                }
                if (listed.size() != fail_time_.size())
                {
                    throw std::invalid_argument(
                        "repair order does not cover every failed component");
                }
                for (auto const& c : crews)
                {
                    crews_.push_back({c, c.busy_until});
                }
                // Networks without a crew stay broken.
                for (auto it = pending_.begin(); it != pending_.end();)
                {
                    bool const served = std::any_of(crews_.begin(), crews_.end(), [k = it->first](auto const& c) {
                        return c.crew.network == k;
                    });
                    it = served ? std::next(it) : pending_.erase(it);
                }
            }

            EventTable
            run()
            {
                while (!pending_.empty())
                {
                    if (!step())
                    {
                        resolve_deadlock();
                    }
                }
                std::sort(table_.rows.begin(), table_.rows.end(), row_less);
                return std::move(table_);
            }

        private:
            double
            dispatch_time(CrewState const& c) const
            {
                double earliest = std::numeric_limits<double>::infinity();
                for (auto const& id : pending_.at(c.crew.network))
                {
                    earliest = std::min(earliest, fail_time_.at(id));
                }
                return std::max(c.free, earliest);
            }

            // Crews with work, in dispatch order.
            std::vector<std::pair<double, CrewState*>>
            candidates()
            {
                std::vector<std::pair<double, CrewState*>> out;
                for (auto& c : crews_)
                {
                    if (pending_.contains(c.crew.network))
                    {
                        out.push_back({dispatch_time(c), &c});
                    }
                }
                std::sort(out.begin(), out.end(), [](auto const& a, auto const& b) {
                    if (a.first != b.first)
                    {
                        return a.first < b.first;
                    }
                    return a.second->crew.id < b.second->crew.id;
                });
                return out;
            }

            TrafficState const&
            traffic_at(double t)
            {
                StatusMap s;
                std::set<std::string> out_of_service;
                for (auto const& [id, ft] : fail_time_)
                {
                    if (ft > t || net_.at(id).kind != ComponentKind::road_link)
                    {
                        continue;
                    }
                    auto done = road_end_.find(id);
                    if (done != road_end_.end() && done->second <= t)
                    {
                        continue;
                    }
                    s.set(id, Status::failed);
                    out_of_service.insert(id);
                }
                auto it = traffic_cache_.find(out_of_service);
                if (it == traffic_cache_.end())
                {
                    it = traffic_cache_
                             .emplace(out_of_service, assign_traffic(net_, s, options_.traffic))
                             .first;
                }
                return it->second;
            }

            std::optional<double>
            travel(TrafficState const& ts, std::string const& from, std::string const& id,
                   RoutingOptions const& routing) const
            {
                auto idx = ts.node_index(access_node(net_, net_.at(id)));
                if (!idx)
                {
                    return std::nullopt;
                }
                return travel_times_from(ts, from, routing)[*idx];
            }

            void
            schedule(CrewState& c, std::string const& id, double t, double travel_time)
            {
                double const depart = std::max(t, fail_time_.at(id));
                double const start = depart + travel_time;
                auto const& comp = net_.at(id);
                double const end = start + options_.durations.of(comp.kind);
                table_.rows.push_back({start, id, EventAction::repair_start, c.crew.id});
                table_.rows.push_back({end, id, EventAction::repair_end, c.crew.id});
                c.free = end;
                c.crew.location = access_node(net_, comp);
                if (comp.kind == ComponentKind::road_link)
                {
                    road_end_[id] = end;
                }
                auto& list = pending_.at(c.crew.network);
                list.erase(std::find(list.begin(), list.end(), id));
                if (list.empty())
                {
                    pending_.erase(c.crew.network);
                }
            }

            RoutingOptions
            routing() const
            {
                RoutingOptions r;
                if (detour_)
                {
                    r.failed_link_factor = options_.blocked_link_factor;
                }
                return r;
            }

            // One dispatch or wait; false when every crew is stuck.
            bool
            step()
            {
                for (auto [t, crew] : candidates())
                {
                    auto const& ts = traffic_at(t);
                    auto const times = travel_times_from(ts, crew->crew.location, routing());
                    for (auto const& id : pending_.at(crew->crew.network))
                    {
                        auto idx = ts.node_index(access_node(net_, net_.at(id)));
                        if (idx && times[*idx])
                        {
                            schedule(*crew, id, t, *times[*idx]);
                            return true;
                        }
                    }
                    double next = std::numeric_limits<double>::infinity();
                    for (auto const& [id, end] : road_end_)
                    {
                        if (end > t)
                        {
                            next = std::min(next, end);
                        }
                    }
                    if (std::isfinite(next))
                    {
                        crew->free = next;
                        return true;
                    }
                }
                return false;
            }

            void
            resolve_deadlock()
            {
                RoutingOptions free_flow;
                free_flow.free_flow = true;
                free_flow.failed_link_factor = options_.blocked_link_factor;
                for (auto [t, crew] : candidates())
                {
                    if (crew->crew.network != NetworkKind::traffic)
                    {
                        continue;
                    }
                    auto const& ts = traffic_at(t);
                    std::string best;
                    double best_time = std::numeric_limits<double>::infinity();
                    for (auto const& id : pending_.at(NetworkKind::traffic))
                    {
                        auto tt = travel(ts, crew->crew.location, id, free_flow);
                        if (tt && (*tt < best_time || (*tt == best_time && id < best)))
                        {
                            best_time = *tt;
                            best = id;
                        }
                    }
                    if (!best.empty())
                    {
                        schedule(*crew, best, t, best_time);
                        return;
                    }
                }
                if (detour_)
                {
                    throw SolverError(
                        "repair scheduling stalled: some failed components cannot be "
                        "reached even over failed roads");
                }
                detour_ = true;
            }

            IntegratedNetwork const& net_;
            ScheduleOptions options_;
            EventTable table_;
            std::map<std::string, double> fail_time_;
            std::map<NetworkKind, std::vector<std::string>> pending_;
            std::vector<CrewState> crews_;
            std::map<std::string, double> road_end_;
            std::map<std::set<std::string>, TrafficState> traffic_cache_;
            bool detour_ = false;
        };
    }

    std::string_view
    to_string(EventAction a)
    {
        return kActionNames[static_cast<int>(a)];
    }

    std::optional<EventAction>
    parse_event_action(std::string_view s)
    {
        for (std::size_t i = 0; i < std::size(kActionNames); ++i)
        {
            if (kActionNames[i] == s)
            {
                return static_cast<EventAction>(i);
            }
        }
        return std::nullopt;
    }

    double
    EventTable::last_time() const
    {
        double t = 0.0;
        for (auto const& r : rows)
        {
            t = std::max(t, r.time);
        }
        return t;
    }

    EventTable
    build_event_table(
        IntegratedNetwork const& net,
        DisasterScenario const& scenario,
        RepairOrder const& order,
        std::vector<Crew> const& crews,
        ScheduleOptions const& options)
    {
        return Scheduler(net, scenario, order, crews, options).run();
    }

    void
    validate_event_table(IntegratedNetwork const& net, EventTable const& table)
    {
        auto fail = [](std::string const& m) { throw ValidationError("event table: " + m); };
        struct Life
        {
            int stage = 0;  // 1 failed, 2 started, 3 ended
            double time = 0.0;
            std::string crew;
        };
        std::map<std::string, Life> life;
        std::map<std::string, std::vector<std::pair<double, double>>> busy;
        for (std::size_t i = 0; i < table.rows.size(); ++i)
        {
            auto const& r = table.rows[i];
            if (!std::isfinite(r.time) || r.time < 0.0)
            {
                fail("row " + std::to_string(i + 1) + " has an invalid time");
            }
            if (i > 0 && row_less(r, table.rows[i - 1]))
            {
                fail("rows are not sorted at row " + std::to_string(i + 1));
            }
            if (net.find(r.component_id) == nullptr)
            {
                fail("unknown component '" + r.component_id + "'");
            }
            auto& l = life[r.component_id];
            int const want = static_cast<int>(r.action) + 1;
            if (l.stage != want - 1)
            {
                fail("'" + r.component_id + "' has " + std::string(to_string(r.action)) +
                     " out of sequence");
            }
            if (r.action == EventAction::fail)
            {
                if (!r.crew_id.empty())
                {
                    fail("failure rows carry no crew");
                }
            }
            else
            {
                if (r.crew_id.empty())
                {
                    fail("repair rows need a crew id");
                }
                if (r.action == EventAction::repair_end)
                {
                    if (r.crew_id != l.crew)
                    {
                        fail("'" + r.component_id + "' ends with a different crew");
                    }
                    if (!(r.time > l.time))
                    {
                        fail("'" + r.component_id + "' has a non-positive repair duration");
                    }
                    busy[r.crew_id].push_back({l.time, r.time});
                }
                l.crew = r.crew_id;
            }
            l.stage = want;
            l.time = r.time;
        }
        for (auto& [crew, spans] : busy)
        {
            std::sort(spans.begin(), spans.end());
            for (std::size_t i = 1; i < spans.size(); ++i)
            {
                if (spans[i].first < spans[i - 1].second)
                {
                    fail("crew '" + crew + "' works two repairs at once");
                }
            }
        }
    }

    std::string
    event_table_to_csv(EventTable const& table)
    {
        std::string out = "time_s,component_id,action,crew_id\n";
        for (auto const& r : table.rows)
        {
            out += fmt::format("{},{},{},{}\n", r.time, r.component_id, to_string(r.action), r.crew_id);
        }
        return out;
    }

    EventTable
    event_table_from_csv(std::string_view text)
    {
        EventTable table;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        auto bad = [&](std::string const& m) {
            throw ParseError("event table line " + std::to_string(line_no) + ": " + m);
        };
        while (pos < text.size())
        {
            std::size_t end = text.find('\n', pos);
            if (end == std::string_view::npos)
            {
                end = text.size();
            }
            std::string_view line = text.substr(pos, end - pos);
            pos = end + 1;
            ++line_no;
            if (!line.empty() && line.back() == '\r')
            {
                line.remove_suffix(1);
            }
            if (line_no == 1)
            {
                if (line != "time_s,component_id,action,crew_id")
                {
                    bad("expected header time_s,component_id,action,crew_id");
                }
                continue;
            }
            if (line.empty())
            {
                continue;
            }
            std::vector<std::string_view> cells;
            std::size_t start = 0;
            while (true)
            {
                auto comma = line.find(',', start);
                cells.push_back(line.substr(start, comma - start));
                if (comma == std::string_view::npos)
                {
                    break;
                }
                start = comma + 1;
            }
            if (cells.size() != 4)
            {
                bad("expected 4 fields, got " + std::to_string(cells.size()));
            }
            EventRow r;
            auto const [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), r.time);
            if (ec != std::errc{} || ptr != cells[0].data() + cells[0].size())
            {
                bad("time_s '" + std::string(cells[0]) + "' is not a number");
            }
            r.component_id = std::string(cells[1]);
            if (r.component_id.empty())
            {
                bad("empty component_id");
            }
            auto action = parse_event_action(cells[2]);
            if (!action)
            {
                bad("unknown action '" + std::string(cells[2]) + "'");
            }
            r.action = *action;
            r.crew_id = std::string(cells[3]);
            table.rows.push_back(std::move(r));
        }
        if (line_no == 0)
        {
            throw ParseError("event table is empty (no header)");
        }
        return table;
    }
}
