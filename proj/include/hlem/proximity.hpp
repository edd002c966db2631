#pragma once

#include <map>
#include <memory>
#include <string_view>
#include <vector>

#include "hlem/detection.hpp"

namespace hlem {

enum class ProximityMethod : std::uint8_t { Link, StrictLink, SegmentOverlap, InstanceOverlap };

std::string_view to_string(ProximityMethod method);
ProximityMethod parse_proximity_method(std::string_view text);

/// Component closeness from the whole log: the Jaccard similarity of the
/// components' involvement sets. An activity involves the events executing it
/// and their direct neighbours; a resource likewise; a segment (a,b) involves
/// both ends of every step that realises it.
class LinkTable {
public:
    explicit LinkTable(const EventLog& log);

    double link(const ComponentId& a, const ComponentId& b) const;
    const std::vector<EventIndex>& involvement(const ComponentId& c) const;

private:
    const EventLog* log_;
    std::map<ComponentId, std::vector<EventIndex>> sets_;
};

/// Jaccard overlap of the participating cases.
double case_overlap(const EventLog& log, const HighLevelEvent& h1, const HighLevelEvent& h2);

/// |next(F1) ∩ F2| / |next(F1) ∪ F2| over the causing event sets.
double instance_overlap(const EventLog& log, const HighLevelEvent& h1, const HighLevelEvent& h2);

/// Both events segment-based and h1's segment ends where h2's begins.
bool location_overlap(const HighLevelEvent& h1, const HighLevelEvent& h2);

/// Events executing the second activity of h's segment: the causing events
/// themselves for exit/handover/delayEnd, their successors otherwise.
std::vector<EventIndex> segment_end_events(const EventLog& log, const HighLevelEvent& h);
/// Events executing the first activity of h's segment: the causing events for
/// enter/cross/delayStart/delayIn/delayNow, their predecessors otherwise.
std::vector<EventIndex> segment_start_events(const EventLog& log, const HighLevelEvent& h);

/// The closed time span of h1's end side contains, or is contained in, the
/// span of h2's start side.
bool time_overlap(const EventLog& log, const HighLevelEvent& h1, const HighLevelEvent& h2);

/// A proximity function over high-level events of one log.
class Proximity {
public:
    Proximity(const EventLog& log, ProximityMethod method);

    ProximityMethod method() const { return method_; }
    const EventLog& log() const { return *log_; }
    const LinkTable* links() const { return links_.get(); }

    /// Value in [0, 1]; throws when segment_overlap meets a non-segment aspect.
    double operator()(const HighLevelEvent& h1, const HighLevelEvent& h2) const;

private:
    const EventLog* log_;
    ProximityMethod method_;
    std::shared_ptr<const LinkTable> links_;
};

}  // namespace hlem
