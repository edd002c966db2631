#include "hlem/aspects.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace hlem {

const AspectInfo& info(Aspect aspect) { return kAspects[static_cast<std::size_t>(aspect)]; }

std::string_view to_string(Aspect aspect) { return info(aspect).name; }

Aspect parse_aspect(std::string_view name) {
    for (const auto& a : kAspects)
        if (a.name == name) return a.aspect;
    throw Error("unknown aspect '" + std::string(name) + "'");
}

AspectEvaluator::AspectEvaluator(const EventLog& log, const Framing& framing) : log_(&log), framing_(&framing) {
    by_activity_.resize(log.activity_count());
    by_next_activity_.resize(log.activity_count());
    by_resource_.resize(log.resource_count());
    by_next_resource_.resize(log.resource_count());
    for (EventIndex e = 0; e < log.size(); ++e) {
        by_activity_[log.activity(e)].push_back(e);
        if (auto r = log.resource(e)) by_resource_[*r].push_back(e);
        EventIndex n = log.next(e);
        if (n == kNoEvent) continue;
        by_next_activity_[log.activity(n)].push_back(e);
        if (auto r = log.resource(n)) by_next_resource_[*r].push_back(e);
        Segment s{log.activity(e), log.activity(n)};
        segment_entries_[s].push_back(e);
        segment_exits_[s].push_back(n);
    }
    for (auto& [_, exits] : segment_exits_) std::sort(exits.begin(), exits.end());
}

void AspectEvaluator::check(Aspect aspect, const ComponentId& c) const {
    const auto& ai = info(aspect);
    if (c.kind != ai.level)
        throw Error("aspect '" + std::string(ai.name) + "' expects a " + std::string(to_string(ai.level)) +
                    " component, got a " + std::string(to_string(c.kind)));
    const bool needs_resources = ai.level == ComponentKind::Resource || aspect == Aspect::Handover;
    if (needs_resources && !log_->has_resources())
        throw Error("aspect '" + std::string(ai.name) + "' needs the resource attribute, which is absent from the log");
    log_->require_component(c);
}

std::vector<ComponentId> AspectEvaluator::components_for(Aspect aspect) const {
    std::vector<ComponentId> out;
    const auto level = info(aspect).level;
    for (const auto& c : log_->components())
        if (c.kind == level) out.push_back(c);
    return out;
}

std::span<const EventIndex> AspectEvaluator::candidates(Aspect aspect, const ComponentId& c) const {
    static const std::vector<EventIndex> kEmpty;
    auto seg = [&](const std::map<Segment, std::vector<EventIndex>>& m) -> std::span<const EventIndex> {
        auto it = m.find({c.first, c.second});
        return it == m.end() ? std::span<const EventIndex>(kEmpty) : std::span<const EventIndex>(it->second);
    };
    switch (aspect) {
        case Aspect::Exec: return by_activity_[c.first];
        case Aspect::Enqueue:
        case Aspect::Queue: return by_next_activity_[c.first];
        case Aspect::Do: return by_resource_[c.first];
        case Aspect::Todo:
        case Aspect::Workload: return by_next_resource_[c.first];
        case Aspect::Enter:
        case Aspect::Cross:
        case Aspect::DelayStart:
        case Aspect::DelayIn:
        case Aspect::DelayNow: return seg(segment_entries_);
        case Aspect::Exit:
        case Aspect::Handover:
        case Aspect::DelayEnd: return seg(segment_exits_);
    }
    return kEmpty;
}

bool AspectEvaluator::member(Aspect aspect, EventIndex e, const TimeWindow& w) const {
    const WindowIndex at = framing_->window_of(log_->time(e));
    if (info(aspect).category == AspectCategory::Action) return at == w.index;
    // State aspects: e <= w and next(e) >= w under half-open windows.
    return at <= w.index && framing_->window_of(log_->time(log_->next(e))) >= w.index;
}

std::optional<double> AspectEvaluator::value_of(Aspect aspect, std::span<const EventIndex> events,
                                                const TimeWindow& w) const {
    const auto& ai = info(aspect);
    if (ai.counting) return static_cast<double>(events.size());
    if (events.empty()) return std::nullopt;
    const EventLog& log = *log_;
    switch (aspect) {
        case Aspect::Handover: {
            std::set<NameIndex> before, current;
            for (EventIndex e : events) {
                if (auto r = log.resource(log.prev(e))) before.insert(*r);
                if (auto r = log.resource(e)) current.insert(*r);
            }
            if (current.empty()) return std::nullopt;
            return static_cast<double>(before.size()) / static_cast<double>(current.size());
        }
        case Aspect::DelayStart:
        case Aspect::DelayIn: {
            double sum = 0.0;
            for (EventIndex e : events) sum += log.time(log.next(e)) - log.time(e);
            return sum / static_cast<double>(events.size());
        }
        case Aspect::DelayEnd: {
            double sum = 0.0;
            for (EventIndex e : events) sum += log.time(e) - log.time(log.prev(e));
            return sum / static_cast<double>(events.size());
        }
        case Aspect::DelayNow: {
            double sum = 0.0;
            for (EventIndex e : events) {
                const double t_next = log.time(log.next(e));
                // Waits still open at the end of w are cut at its exclusive bound.
                if (framing_->window_of(t_next) == w.index)
                    sum += t_next - log.time(e);
                else
                    sum += w.end - log.time(e);
            }
            return sum / static_cast<double>(events.size());
        }
        default: break;
    }
    return std::nullopt;
}

AspectEvaluation AspectEvaluator::evaluate(Aspect aspect, const ComponentId& c, WindowIndex w) const {
    check(aspect, c);
    const TimeWindow win = framing_->window(w);
    AspectEvaluation out{aspect, c, w, {}, std::nullopt};
    for (EventIndex e : candidates(aspect, c))
        if (member(aspect, e, win)) out.events.push_back(e);
    out.value = value_of(aspect, out.events, win);
    return out;
}

std::vector<AspectEvaluation> AspectEvaluator::series(Aspect aspect, const ComponentId& c) const {
    check(aspect, c);
    const Framing& fr = *framing_;
    const std::size_t n = fr.window_count();
    std::vector<std::vector<EventIndex>> buckets(n);
    const bool state = info(aspect).category == AspectCategory::State;
    for (EventIndex e : candidates(aspect, c)) {
        WindowIndex lo = fr.window_of(log_->time(e));
        WindowIndex hi = state ? fr.window_of(log_->time(log_->next(e))) : lo;
        lo = std::max(lo, fr.first());
        hi = std::min(hi, fr.last());
        for (WindowIndex w = lo; w <= hi; ++w) buckets[fr.slot(w)].push_back(e);
    }
    std::vector<AspectEvaluation> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const WindowIndex w = fr.first() + static_cast<WindowIndex>(i);
        const TimeWindow win = fr.window(w);
        auto value = value_of(aspect, buckets[i], win);
        out.push_back({aspect, c, w, std::move(buckets[i]), value});
    }
    return out;
}

namespace {

void require_level(Aspect kind, std::initializer_list<Aspect> allowed, const char* op) {
    for (Aspect a : allowed)
        if (a == kind) return;
    throw Error(std::string(op) + " does not evaluate aspect '" + std::string(to_string(kind)) + "'");
}

}  // namespace

AspectEvaluation eval_activity(const AspectEvaluator& ev, Aspect kind, NameIndex activity, WindowIndex w) {
    require_level(kind, {Aspect::Exec, Aspect::Enqueue, Aspect::Queue}, "eval_activity");
    return ev.evaluate(kind, ComponentId::activity(activity), w);
}

AspectEvaluation eval_resource(const AspectEvaluator& ev, Aspect kind, NameIndex resource, WindowIndex w) {
    require_level(kind, {Aspect::Do, Aspect::Todo, Aspect::Workload}, "eval_resource");
    return ev.evaluate(kind, ComponentId::resource(resource), w);
}

AspectEvaluation eval_segment_count(const AspectEvaluator& ev, Aspect kind, Segment s, WindowIndex w) {
    require_level(kind, {Aspect::Enter, Aspect::Exit, Aspect::Cross}, "eval_segment_count");
    return ev.evaluate(kind, ComponentId::segment(s.first, s.second), w);
}

AspectEvaluation eval_handover(const AspectEvaluator& ev, Segment s, WindowIndex w) {
    return ev.evaluate(Aspect::Handover, ComponentId::segment(s.first, s.second), w);
}

AspectEvaluation eval_delay(const AspectEvaluator& ev, Aspect kind, Segment s, WindowIndex w) {
    require_level(kind, {Aspect::DelayStart, Aspect::DelayEnd, Aspect::DelayIn, Aspect::DelayNow}, "eval_delay");
    return ev.evaluate(kind, ComponentId::segment(s.first, s.second), w);
}

}  // namespace hlem
