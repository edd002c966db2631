#include "hlem/robustness.hpp"

#include <algorithm>
#include <cmath>

#include "hlem/detection.hpp"

namespace hlem {

namespace {

void check_threshold(const char* name, std::optional<double> v, bool unit) {
    if (!v) return;
    if (!std::isfinite(*v) || *v < 0.0) throw Error(std::string("robustness.") + name + " must be non-negative");
    if (unit && *v > 1.0) throw Error(std::string("robustness.") + name + " must lie in [0, 1]");
}

}  // namespace

void RobustnessPolicy::validate() const {
    if (!(q_percentile > 0.0 && q_percentile <= 100.0)) throw Error("robustness.q_percentile must lie in (0, 100]");
    check_threshold("p", p, true);
    check_threshold("t", t, false);
    check_threshold("tr", tr, true);
    for (const auto& [_, o] : overrides) {
        check_threshold("q", o.q, false);
        check_threshold("p", o.p, true);
        check_threshold("t", o.t, false);
        check_threshold("tr", o.tr, true);
    }
}

ResolvedThresholds resolve_thresholds(const AspectEvaluator& ev, NameIndex activity, const RobustnessPolicy& policy) {
    const EventLog& log = ev.log();
    const ActivityThresholds* o = nullptr;
    if (auto it = policy.overrides.find(log.activity_name(activity)); it != policy.overrides.end()) o = &it->second;
    ResolvedThresholds r;
    if (o && o->q) {
        r.q = *o->q;
    } else {
        std::vector<double> values;
        for (const auto& e : ev.series(Aspect::Queue, ComponentId::activity(activity))) values.push_back(*e.value);
        r.q = nearest_rank(std::move(values), policy.q_percentile);
    }
    r.p = o && o->p ? *o->p : policy.p;
    r.t = o && o->t ? *o->t : policy.t ? *policy.t : std::max(1.0, std::ceil(r.q / 2.0));
    r.tr = o && o->tr ? *o->tr : policy.tr;
    return r;
}

std::vector<Disruption> detect_disruptions(const AspectEvaluator& ev, NameIndex activity, double q, double p) {
    const ComponentId c = ComponentId::activity(activity);
    const auto queue = ev.series(Aspect::Queue, c);
    const auto enqueue = ev.series(Aspect::Enqueue, c);
    std::vector<Disruption> out;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        const std::size_t qv = queue[i].events.size();
        if (qv == 0) continue;
        const std::size_t ev_count = enqueue[i].events.size();
        const double ratio = static_cast<double>(ev_count) / static_cast<double>(qv);
        if (static_cast<double>(qv) >= q && ratio >= p) out.push_back({activity, queue[i].window, qv, ev_count, ratio});
    }
    return out;
}

std::vector<EventIndex> takeover_events(const AspectEvaluator& ev, NameIndex activity, WindowIndex w) {
    const ComponentId c = ComponentId::activity(activity);
    const auto queue = ev.evaluate(Aspect::Queue, c, w);
    const auto enqueue = ev.evaluate(Aspect::Enqueue, c, w);
    std::vector<EventIndex> out;
    std::set_difference(queue.events.begin(), queue.events.end(), enqueue.events.begin(), enqueue.events.end(),
                        std::back_inserter(out));
    return out;
}

std::size_t takeover(const AspectEvaluator& ev, NameIndex activity, WindowIndex w) {
    return takeover_events(ev, activity, w).size();
}

double takeover_ratio(const AspectEvaluator& ev, NameIndex activity, WindowIndex w) {
    const auto queue = ev.evaluate(Aspect::Queue, ComponentId::activity(activity), w);
    if (queue.events.empty()) return 0.0;
    return static_cast<double>(takeover(ev, activity, w)) / static_cast<double>(queue.events.size());
}

ResolutionScope resolution_scope(const AspectEvaluator& ev, const Disruption& d, double t, double tr) {
    ResolutionScope scope{d, {}};
    scope.windows.push_back({d.window, takeover(ev, d.activity, d.window), takeover_ratio(ev, d.activity, d.window)});
    const WindowIndex last = ev.framing().last();
    for (WindowIndex w = d.window + 1; w <= last; ++w) {
        const std::size_t to = takeover(ev, d.activity, w);
        const double ratio = takeover_ratio(ev, d.activity, w);
        if (static_cast<double>(to) < t || ratio < tr) break;
        scope.windows.push_back({w, to, ratio});
    }
    return scope;
}

std::string RobustnessReport::reading() const {
    if (!r_wt) return "undefined";
    if (std::fabs(*r_wt - 1.0) <= 0.1) return "minimal impact";
    return *r_wt > 1.0 ? "negative effect" : "shorter waits";
}

RobustnessReport waiting_time_robustness(const AspectEvaluator& ev, NameIndex activity,
                                         std::span<const ResolutionScope> scopes) {
    const EventLog& log = ev.log();
    const ComponentId c = ComponentId::activity(activity);
    const auto all = ev.candidates(Aspect::Queue, c);
    if (all.empty())
        throw Error("activity '" + log.activity_name(activity) + "' has no queueing events");

    std::vector<EventIndex> affected;
    for (const auto& s : scopes) {
        if (s.disruption.activity != activity) throw Error("resolution scope belongs to another activity");
        for (const auto& w : s.windows) {
            const auto q = ev.evaluate(Aspect::Queue, c, w.window);
            affected.insert(affected.end(), q.events.begin(), q.events.end());
        }
    }
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());

    RobustnessReport r;
    r.activity = activity;
    r.scopes.assign(scopes.begin(), scopes.end());
    double sum_in = 0.0, sum_out = 0.0;
    for (EventIndex e : all) {
        const double wait = log.time(log.next(e)) - log.time(e);
        if (std::binary_search(affected.begin(), affected.end(), e)) {
            sum_in += wait;
            ++r.affected;
        } else {
            sum_out += wait;
            ++r.unaffected;
        }
    }
    if (r.affected) r.wt_affected = sum_in / static_cast<double>(r.affected);
    if (r.unaffected) r.wt_unaffected = sum_out / static_cast<double>(r.unaffected);
    if (r.wt_affected && r.wt_unaffected && *r.wt_unaffected > 0.0) r.r_wt = *r.wt_affected / *r.wt_unaffected;
    return r;
}

RobustnessReport analyze_robustness(const AspectEvaluator& ev, NameIndex activity, const RobustnessPolicy& policy) {
    policy.validate();
    if (ev.candidates(Aspect::Queue, ComponentId::activity(activity)).empty())
        throw Error("activity '" + ev.log().activity_name(activity) + "' has no queueing events");
    const auto th = resolve_thresholds(ev, activity, policy);
    std::vector<ResolutionScope> scopes;
    for (const auto& d : detect_disruptions(ev, activity, th.q, th.p))
        scopes.push_back(resolution_scope(ev, d, th.t, th.tr));
    auto report = waiting_time_robustness(ev, activity, scopes);
    report.thresholds = th;
    return report;
}

std::vector<RobustnessReport> analyze_robustness(const AspectEvaluator& ev, const RobustnessPolicy& policy,
                                                 unsigned parallelism) {
    policy.validate();
    const EventLog& log = ev.log();
    for (const auto& [name, _] : policy.overrides)
        if (!log.find_activity(name)) throw Error("robustness override names unknown activity '" + name + "'");
    std::vector<NameIndex> acts;
    for (NameIndex a = 0; a < log.activity_count(); ++a)
        if (!ev.candidates(Aspect::Queue, ComponentId::activity(a)).empty()) acts.push_back(a);
    std::vector<RobustnessReport> out(acts.size());
    parallel_for(acts.size(), parallelism, [&](std::size_t i) { out[i] = analyze_robustness(ev, acts[i], policy); });
    return out;
}

}  // namespace hlem
