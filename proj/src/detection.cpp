#include "hlem/detection.hpp"

#include <algorithm>
#include <cmath>

namespace hlem {

Direction parse_direction(std::string_view text) {
    if (text == "high") return Direction::High;
    if (text == "low") return Direction::Low;
    throw Error("direction must be 'high' or 'low', got '" + std::string(text) + "'");
}

void ThresholdPolicy::validate() const {
    if (!(percentile > 0.0 && percentile <= 100.0)) throw Error("percentile must lie in (0, 100]");
    if (min_coverage < 0.0 || min_coverage > 1.0) throw Error("min_coverage must lie in [0, 1]");
    for (const auto& [name, _] : aspect_overrides) parse_aspect(name);
    for (const auto& [key, _] : overrides) parse_aspect(key.first);
}

double nearest_rank(std::vector<double> values, double percentile) {
    if (values.empty()) throw Error("percentile of an empty value list");
    if (!(percentile > 0.0 && percentile <= 100.0)) throw Error("percentile must lie in (0, 100]");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    // The small slack keeps exact products such as 0.75 * 4 from rounding up.
    auto rank = static_cast<std::size_t>(std::ceil(percentile * n / 100.0 - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

bool is_eligible(const ThresholdPolicy& policy, const AspectEvaluation& ev) {
    if (!ev.value) return false;
    if (info(ev.aspect).delay && ev.events.size() < policy.min_case_count) return false;
    return true;
}

std::optional<double> resolve_threshold(const ThresholdPolicy& policy, Aspect aspect, const std::string& component_label,
                                        std::span<const AspectEvaluation> series) {
    const std::string name(to_string(aspect));
    if (auto it = policy.overrides.find({name, component_label}); it != policy.overrides.end()) return it->second;
    if (auto it = policy.aspect_overrides.find(name); it != policy.aspect_overrides.end()) return it->second;
    std::vector<double> values;
    for (const auto& ev : series)
        if (is_eligible(policy, ev)) values.push_back(*ev.value);
    if (values.empty()) return std::nullopt;
    return nearest_rank(std::move(values), policy.percentile);
}

std::string label(const EventLog& log, const HighLevelActivity& activity) {
    return std::string(to_string(activity.aspect)) + "@" + log.component_label(activity.component);
}

std::vector<HighLevelEvent> detect(const AspectEvaluator& evaluator, std::span<const Aspect> aspects,
                                   const ThresholdPolicy& policy, unsigned parallelism) {
    if (aspects.empty()) throw Error("no aspects selected for detection");
    policy.validate();
    const EventLog& log = evaluator.log();

    std::vector<HighLevelActivity> pairs;
    for (Aspect a : aspects) {
        if (needs_resources(a) && !log.has_resources())
            throw Error("aspect '" + std::string(to_string(a)) +
                        "' needs the resource attribute, which is absent from the log");
        for (const auto& c : evaluator.components_for(a)) pairs.push_back({a, c});
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    std::vector<std::vector<HighLevelEvent>> found(pairs.size());
    parallel_for(pairs.size(), parallelism, [&](std::size_t i) {
        const auto [aspect, component] = pairs[i];
        if (policy.min_coverage > 0.0 && info(aspect).category == AspectCategory::Action &&
            coverage(evaluator, aspect, component) < policy.min_coverage)
            return;
        auto series = evaluator.series(aspect, component);
        auto threshold = resolve_threshold(policy, aspect, log.component_label(component), series);
        if (!threshold) return;
        for (auto& ev : series) {
            if (!is_eligible(policy, ev)) continue;
            const double v = *ev.value;
            const bool hit = policy.direction == Direction::High ? v >= *threshold : v <= *threshold;
            if (hit) found[i].push_back({aspect, component, ev.window, v, *threshold, std::move(ev.events)});
        }
    });

    std::vector<HighLevelEvent> out;
    for (auto& part : found)
        for (auto& h : part) out.push_back(std::move(h));
    std::stable_sort(out.begin(), out.end(), [](const HighLevelEvent& a, const HighLevelEvent& b) {
        auto an = to_string(a.aspect), bn = to_string(b.aspect);
        if (an != bn) return an < bn;
        if (a.component != b.component) return a.component < b.component;
        return a.window < b.window;
    });
    return out;
}

double coverage(const AspectEvaluator& evaluator, Aspect aspect, const ComponentId& component) {
    if (info(aspect).category != AspectCategory::Action)
        throw Error("coverage is only defined for action aspects, not '" + std::string(to_string(aspect)) + "'");
    const EventLog& log = evaluator.log();
    if (log.empty()) return 0.0;
    std::size_t covered = 0;
    for (const auto& ev : evaluator.series(aspect, component)) covered += ev.events.size();
    return static_cast<double>(covered) / static_cast<double>(log.size());
}

std::vector<CaseIndex> cases_of(const EventLog& log, const HighLevelEvent& h) {
    std::vector<CaseIndex> out;
    out.reserve(h.events.size());
    for (EventIndex e : h.events) out.push_back(log.case_of(e));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace hlem
