#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlem/aspects.hpp"

namespace hlem {

/// Per-activity overrides; unset fields fall back to the policy defaults.
struct ActivityThresholds {
    std::optional<double> q;
    std::optional<double> p;
    std::optional<double> t;
    std::optional<double> tr;
};

struct RobustnessPolicy {
    /// Default q_a: this nearest-rank percentile of the queue series at a.
    double q_percentile = 90.0;
    double p = 0.5;
    /// Default t_a is max(1, ceil(q_a / 2)) unless set here.
    std::optional<double> t;
    double tr = 0.5;
    /// Keyed by activity name.
    std::map<std::string, ActivityThresholds> overrides;

    void validate() const;
};

struct ResolvedThresholds {
    double q = 0.0;
    double p = 0.0;
    double t = 0.0;
    double tr = 0.0;
};

ResolvedThresholds resolve_thresholds(const AspectEvaluator& ev, NameIndex activity, const RobustnessPolicy& policy);

struct Disruption {
    NameIndex activity = 0;
    WindowIndex window = 0;
    std::size_t queue_value = 0;
    std::size_t enqueue_value = 0;
    double ratio = 0.0;  // enqueue / queue
};

/// All windows of W where queue >= q and enqueue / queue >= p. Windows with
/// an empty queue never qualify.
std::vector<Disruption> detect_disruptions(const AspectEvaluator& ev, NameIndex activity, double q, double p);

/// Queue events carried over from earlier windows: queue set minus enqueue set.
std::vector<EventIndex> takeover_events(const AspectEvaluator& ev, NameIndex activity, WindowIndex w);
std::size_t takeover(const AspectEvaluator& ev, NameIndex activity, WindowIndex w);
/// takeover / queue; 0 for an empty queue.
double takeover_ratio(const AspectEvaluator& ev, NameIndex activity, WindowIndex w);

struct ScopeWindow {
    WindowIndex window = 0;
    std::size_t takeover = 0;
    double takeover_ratio = 0.0;
};

struct ResolutionScope {
    Disruption disruption;
    /// Contiguous, starting at the disruption window.
    std::vector<ScopeWindow> windows;
};

/// Extends from the disruption window while takeover >= t and
/// takeover_ratio >= tr, stopping at the last window of W.
ResolutionScope resolution_scope(const AspectEvaluator& ev, const Disruption& d, double t, double tr);

struct RobustnessReport {
    NameIndex activity = 0;
    ResolvedThresholds thresholds;
    std::vector<ResolutionScope> scopes;  // one per disruption
    std::size_t affected = 0;
    std::size_t unaffected = 0;
    std::optional<double> wt_affected;
    std::optional<double> wt_unaffected;
    /// Empty when either side is empty or the unaffected mean is zero.
    std::optional<double> r_wt;

    /// "undefined", "minimal impact", "negative effect" or "shorter waits".
    std::string reading() const;
};

/// Splits the queueing events of `activity` into those inside some scope's
/// queue sets and the rest, and compares their mean waits. Throws when the
/// activity has no queueing events.
RobustnessReport waiting_time_robustness(const AspectEvaluator& ev, NameIndex activity,
                                         std::span<const ResolutionScope> scopes);

/// Disruptions, scopes and R_wt for one activity.
RobustnessReport analyze_robustness(const AspectEvaluator& ev, NameIndex activity, const RobustnessPolicy& policy);

/// analyze_robustness for every activity that has queueing events, in name
/// order.
std::vector<RobustnessReport> analyze_robustness(const AspectEvaluator& ev, const RobustnessPolicy& policy,
                                                 unsigned parallelism = 1);

}  // namespace hlem
