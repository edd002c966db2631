#include "hlem/proximity.hpp"

#include <algorithm>
#include <memory>

namespace hlem {

std::string_view to_string(ProximityMethod method) {
    switch (method) {
        case ProximityMethod::Link: return "link";
        case ProximityMethod::StrictLink: return "strict_link";
        case ProximityMethod::SegmentOverlap: return "segment_overlap";
        case ProximityMethod::InstanceOverlap: return "instance_overlap";
    }
    return "?";
}

ProximityMethod parse_proximity_method(std::string_view text) {
    for (auto m : {ProximityMethod::Link, ProximityMethod::StrictLink, ProximityMethod::SegmentOverlap,
                   ProximityMethod::InstanceOverlap})
        if (to_string(m) == text) return m;
    throw Error("unknown proximity method '" + std::string(text) +
                "' (expected link, strict_link, segment_overlap or instance_overlap)");
}

LinkTable::LinkTable(const EventLog& log) : log_(&log) {
    for (const auto& c : log.components()) sets_[c];
    for (EventIndex e = 0; e < log.size(); ++e) {
        const EventIndex prev = log.prev(e);
        const EventIndex next = log.next(e);
        auto& own = sets_[ComponentId::activity(log.activity(e))];
        own.push_back(e);
        if (next != kNoEvent) sets_[ComponentId::activity(log.activity(next))].push_back(e);
        if (prev != kNoEvent) sets_[ComponentId::activity(log.activity(prev))].push_back(e);
        if (log.has_resources()) {
            if (auto r = log.resource(e)) sets_[ComponentId::resource(*r)].push_back(e);
            if (next != kNoEvent)
                if (auto r = log.resource(next)) sets_[ComponentId::resource(*r)].push_back(e);
            if (prev != kNoEvent)
                if (auto r = log.resource(prev)) sets_[ComponentId::resource(*r)].push_back(e);
        }
        if (next != kNoEvent) sets_[ComponentId::segment(log.activity(e), log.activity(next))].push_back(e);
        if (prev != kNoEvent) sets_[ComponentId::segment(log.activity(prev), log.activity(e))].push_back(e);
    }
    for (auto& [_, v] : sets_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
}

const std::vector<EventIndex>& LinkTable::involvement(const ComponentId& c) const {
    auto it = sets_.find(c);
    if (it == sets_.end()) throw Error("unknown component in link table");
    return it->second;
}

double LinkTable::link(const ComponentId& a, const ComponentId& b) const {
    const auto& ia = involvement(a);
    const auto& ib = involvement(b);
    if (a == b) return 1.0;
    return jaccard(ia, ib);
}

double case_overlap(const EventLog& log, const HighLevelEvent& h1, const HighLevelEvent& h2) {
    return jaccard(cases_of(log, h1), cases_of(log, h2));
}

double instance_overlap(const EventLog& log, const HighLevelEvent& h1, const HighLevelEvent& h2) {
    std::vector<EventIndex> successors;
    successors.reserve(h1.events.size());
    for (EventIndex e : h1.events)
        if (log.next(e) != kNoEvent) successors.push_back(log.next(e));
    std::sort(successors.begin(), successors.end());
    successors.erase(std::unique(successors.begin(), successors.end()), successors.end());
    return jaccard(successors, h2.events);
}

namespace {

bool is_segment(const HighLevelEvent& h) { return info(h.aspect).level == ComponentKind::Segment; }

// Aspects whose causing events execute the segment's second activity.
bool executes_second(Aspect a) { return a == Aspect::Exit || a == Aspect::Handover || a == Aspect::DelayEnd; }

std::vector<EventIndex> project(const EventLog& log, const std::vector<EventIndex>& events, bool forward) {
    std::vector<EventIndex> out;
    out.reserve(events.size());
    for (EventIndex e : events) {
        EventIndex p = forward ? log.next(e) : log.prev(e);
        if (p != kNoEvent) out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct Span {
    double lo;
    double hi;
    bool contains(const Span& o) const { return lo <= o.lo && o.hi <= hi; }
};

std::optional<Span> span_of(const EventLog& log, const std::vector<EventIndex>& events) {
    if (events.empty()) return std::nullopt;
    Span s{log.time(events.front()), log.time(events.front())};
    for (EventIndex e : events) {
        s.lo = std::min(s.lo, log.time(e));
        s.hi = std::max(s.hi, log.time(e));
    }
    return s;
}

}  // namespace

bool location_overlap(const HighLevelEvent& h1, const HighLevelEvent& h2) {
    return is_segment(h1) && is_segment(h2) && h1.component.second == h2.component.first;
}

std::vector<EventIndex> segment_end_events(const EventLog& log, const HighLevelEvent& h) {
    if (!is_segment(h)) throw Error("segment_end_events needs a segment-based high-level event");
    if (executes_second(h.aspect)) return h.events;
    return project(log, h.events, true);
}

std::vector<EventIndex> segment_start_events(const EventLog& log, const HighLevelEvent& h) {
    if (!is_segment(h)) throw Error("segment_start_events needs a segment-based high-level event");
    if (!executes_second(h.aspect)) return h.events;
    return project(log, h.events, false);
}

bool time_overlap(const EventLog& log, const HighLevelEvent& h1, const HighLevelEvent& h2) {
    auto a = span_of(log, segment_end_events(log, h1));
    auto b = span_of(log, segment_start_events(log, h2));
    if (!a || !b) return false;
    return a->contains(*b) || b->contains(*a);
}

Proximity::Proximity(const EventLog& log, ProximityMethod method) : log_(&log), method_(method) {
    if (method == ProximityMethod::Link) links_ = std::make_shared<LinkTable>(log);
}

double Proximity::operator()(const HighLevelEvent& h1, const HighLevelEvent& h2) const {
    switch (method_) {
        case ProximityMethod::Link:
        case ProximityMethod::StrictLink: {
            // Same or directly subsequent window; ordered pairs only.
            if (h2.window != h1.window && h2.window != h1.window + 1) return 0.0;
            if (method_ == ProximityMethod::StrictLink) return h1.component == h2.component ? 1.0 : 0.0;
            return links_->link(h1.component, h2.component);
        }
        case ProximityMethod::SegmentOverlap: {
            if (!is_segment(h1) || !is_segment(h2))
                throw Error("segment_overlap proximity requires segment-based aspects");
            if (h1.window > h2.window) return 0.0;
            if (!location_overlap(h1, h2) || !time_overlap(*log_, h1, h2)) return 0.0;
            return case_overlap(*log_, h1, h2);
        }
        case ProximityMethod::InstanceOverlap: return instance_overlap(*log_, h1, h2);
    }
    return 0.0;
}

}  // namespace hlem
