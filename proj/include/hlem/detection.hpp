#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hlem/aspects.hpp"

namespace hlem {

enum class Direction : std::uint8_t { High, Low };

Direction parse_direction(std::string_view text);

struct ThresholdPolicy {
    double percentile = 90.0;  // (0, 100]
    Direction direction = Direction::High;
    /// Minimum event-set size for delay aspects; smaller sets neither enter the
    /// percentile nor trigger detection.
    std::size_t min_case_count = 3;
    /// Shared threshold for every component of an aspect, keyed by aspect name.
    std::map<std::string, double> aspect_overrides;
    /// Threshold for one (aspect name, component label) pair. Wins over both
    /// the aspect-wide override and the percentile.
    std::map<std::pair<std::string, std::string>, double> overrides;
    /// Action aspects whose coverage falls below this are skipped.
    double min_coverage = 0.0;

    void validate() const;
};

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (1-based).
double nearest_rank(std::vector<double> values, double percentile);

/// True when the evaluation may take part in threshold resolution and
/// detection under `policy`.
bool is_eligible(const ThresholdPolicy& policy, const AspectEvaluation& ev);

/// Threshold for one (aspect, component) series; empty when no value is
/// eligible and no override applies.
std::optional<double> resolve_threshold(const ThresholdPolicy& policy, Aspect aspect, const std::string& component_label,
                                        std::span<const AspectEvaluation> series);

/// act'(h): the time-free projection of a high-level event.
struct HighLevelActivity {
    Aspect aspect = Aspect::Exec;
    ComponentId component;
    auto operator<=>(const HighLevelActivity&) const = default;
};

/// "aspect@component", e.g. "delayEnd@submit->review".
std::string label(const EventLog& log, const HighLevelActivity& activity);

struct HighLevelEvent {
    Aspect aspect = Aspect::Exec;
    ComponentId component;
    WindowIndex window = 0;
    double value = 0.0;
    double threshold = 0.0;
    std::vector<EventIndex> events;  // f_asp^ev(c, w), sorted

    HighLevelActivity activity() const { return {aspect, component}; }
};

/// All high-level events for the given aspects over every component of the
/// matching level, sorted by (aspect name, component, window). Pairs are
/// evaluated in parallel; the result does not depend on `parallelism`.
std::vector<HighLevelEvent> detect(const AspectEvaluator& evaluator, std::span<const Aspect> aspects,
                                   const ThresholdPolicy& policy, unsigned parallelism = 1);

/// Share of the log's events covered by an action aspect at one component,
/// summed over all windows.
double coverage(const AspectEvaluator& evaluator, Aspect aspect, const ComponentId& component);

/// Distinct case ids behind a high-level event, sorted.
std::vector<CaseIndex> cases_of(const EventLog& log, const HighLevelEvent& h);

}  // namespace hlem
