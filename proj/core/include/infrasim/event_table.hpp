#pragma once

#include "infrasim/hazard.hpp"
#include "infrasim/network.hpp"
#include "infrasim/recovery.hpp"
#include "infrasim/traffic.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace infrasim
{
    enum class EventAction
    {
        fail,
        repair_start,
        repair_end,
    };

    std::string_view to_string(EventAction a);
    std::optional<EventAction> parse_event_action(std::string_view s);

    struct EventRow
    {
        double time = 0.0;  ///< s
        std::string component_id;
        EventAction action = EventAction::fail;
        std::string crew_id;  ///< empty for failures

        friend bool operator==(EventRow const&, EventRow const&) = default;
    };

    /// Rows sorted by (time, action, component id).
    struct EventTable
    {
        std::vector<EventRow> rows;

        /// Time of the last repair_end (or last row; 0 when empty).
        double last_time() const;

        friend bool operator==(EventTable const&, EventTable const&) = default;
    };

    struct ScheduleOptions
    {
        RepairDurations durations;
        TrafficOptions traffic;
        /// Detour cost factor on failed road links when the schedule would
        /// otherwise stall.
        double blocked_link_factor = 5.0;
    };

    /// Repair scheduling with road accessibility.
    ///
    /// Crews are dispatched in order of availability (ties by crew id). A
    /// dispatched crew takes the first component of its network's sequence
    /// whose access node it can reach over in-service roads, travels there on
    /// congested times, repairs it and stays there. Components it cannot
    /// reach are deferred. A crew with nothing reachable waits for the next
    /// scheduled road repair. Road state (and the traffic assignment used for
    /// travel times) at a dispatch time reflects every road repair finished
    /// by then. When every crew is stuck the road crew is sent to the failed
    /// road nearest on free-flow times (routing over failed links at
    /// blocked_link_factor times free flow); without one, all crews may
    /// route over failed links at that cost from then on. Failures in a
    /// network no crew serves are never repaired.
    EventTable build_event_table(
        IntegratedNetwork const& net,
        DisasterScenario const& scenario,
        RepairOrder const& order,
        std::vector<Crew> const& crews,
        ScheduleOptions const& options = {});

    /// Checks ordering, the fail -> start -> end life cycle of each
    /// component, and that a crew never works two repairs at once. Throws
    /// ValidationError.
    void validate_event_table(IntegratedNetwork const& net, EventTable const& table);

    /// CSV with header time_s,component_id,action,crew_id.
    std::string event_table_to_csv(EventTable const& table);
    /// Throws ParseError with the offending line number.
    EventTable event_table_from_csv(std::string_view text);
}
