#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hlem/event_log.hpp"
#include "hlem/framing.hpp"

namespace hlem {

enum class Aspect : std::uint8_t {
    Exec,
    Enqueue,
    Queue,
    Do,
    Todo,
    Workload,
    Enter,
    Exit,
    Cross,
    Handover,
    DelayStart,
    DelayEnd,
    DelayIn,
    DelayNow,
};

enum class AspectCategory : std::uint8_t { Action, State };

struct AspectInfo {
    Aspect aspect;
    std::string_view name;
    ComponentKind level;
    AspectCategory category;
    bool counting;  // value == |event set|
    bool delay;     // value is a mean waiting time in seconds
};

inline constexpr std::array<AspectInfo, 14> kAspects{{
    {Aspect::Exec, "exec", ComponentKind::Activity, AspectCategory::Action, true, false},
    {Aspect::Enqueue, "enqueue", ComponentKind::Activity, AspectCategory::Action, true, false},
    {Aspect::Queue, "queue", ComponentKind::Activity, AspectCategory::State, true, false},
    {Aspect::Do, "do", ComponentKind::Resource, AspectCategory::Action, true, false},
    {Aspect::Todo, "todo", ComponentKind::Resource, AspectCategory::Action, true, false},
    {Aspect::Workload, "workload", ComponentKind::Resource, AspectCategory::State, true, false},
    {Aspect::Enter, "enter", ComponentKind::Segment, AspectCategory::Action, true, false},
    {Aspect::Exit, "exit", ComponentKind::Segment, AspectCategory::Action, true, false},
    // Not confined to E_w, hence a state aspect.
    {Aspect::Cross, "cross", ComponentKind::Segment, AspectCategory::State, true, false},
    {Aspect::Handover, "handover", ComponentKind::Segment, AspectCategory::Action, false, false},
    {Aspect::DelayStart, "delayStart", ComponentKind::Segment, AspectCategory::Action, false, true},
    {Aspect::DelayEnd, "delayEnd", ComponentKind::Segment, AspectCategory::Action, false, true},
    {Aspect::DelayIn, "delayIn", ComponentKind::Segment, AspectCategory::State, false, true},
    {Aspect::DelayNow, "delayNow", ComponentKind::Segment, AspectCategory::State, false, true},
}};

const AspectInfo& info(Aspect aspect);
/// Resource-level aspects and handover read the resource attribute.
inline bool needs_resources(Aspect aspect) {
    return info(aspect).level == ComponentKind::Resource || aspect == Aspect::Handover;
}
std::string_view to_string(Aspect aspect);
/// Accepts exactly the names in kAspects.
Aspect parse_aspect(std::string_view name);

/// f_asp(c, w): the causing event set and the value. `value` is empty for
/// undefined evaluations (ratios and means over an empty set).
struct AspectEvaluation {
    Aspect aspect = Aspect::Exec;
    ComponentId component;
    WindowIndex window = 0;
    std::vector<EventIndex> events;  // sorted ascending
    std::optional<double> value;
};

/// Evaluates aspect functions over one framed log. Construction builds the
/// per-component event indexes; afterwards every call is const and may run
/// concurrently.
class AspectEvaluator {
public:
    AspectEvaluator(const EventLog& log, const Framing& framing);

    const EventLog& log() const { return *log_; }
    const Framing& framing() const { return *framing_; }

    /// Throws when the component has the wrong level, is unknown, or needs a
    /// resource attribute the log lacks.
    AspectEvaluation evaluate(Aspect aspect, const ComponentId& c, WindowIndex w) const;
    /// One evaluation per window of W, in window order.
    std::vector<AspectEvaluation> series(Aspect aspect, const ComponentId& c) const;
    /// All components of the aspect's level.
    std::vector<ComponentId> components_for(Aspect aspect) const;

    /// Events whose membership in f_asp^ev(c, ·) is possible at all: the
    /// candidate list the set-builder filters run over.
    std::span<const EventIndex> candidates(Aspect aspect, const ComponentId& c) const;

private:
    const EventLog* log_;
    const Framing* framing_;

    std::vector<std::vector<EventIndex>> by_activity_;
    std::vector<std::vector<EventIndex>> by_next_activity_;
    std::vector<std::vector<EventIndex>> by_resource_;
    std::vector<std::vector<EventIndex>> by_next_resource_;
    std::map<Segment, std::vector<EventIndex>> segment_entries_;
    std::map<Segment, std::vector<EventIndex>> segment_exits_;

    void check(Aspect aspect, const ComponentId& c) const;
    bool member(Aspect aspect, EventIndex e, const TimeWindow& w) const;
    std::optional<double> value_of(Aspect aspect, std::span<const EventIndex> events, const TimeWindow& w) const;
};

// Level-specific entry points; each rejects aspects of another level.
AspectEvaluation eval_activity(const AspectEvaluator& ev, Aspect kind, NameIndex activity, WindowIndex w);
AspectEvaluation eval_resource(const AspectEvaluator& ev, Aspect kind, NameIndex resource, WindowIndex w);
AspectEvaluation eval_segment_count(const AspectEvaluator& ev, Aspect kind, Segment s, WindowIndex w);
AspectEvaluation eval_handover(const AspectEvaluator& ev, Segment s, WindowIndex w);
AspectEvaluation eval_delay(const AspectEvaluator& ev, Aspect kind, Segment s, WindowIndex w);

}  // namespace hlem
