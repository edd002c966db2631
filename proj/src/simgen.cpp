#include "hlem/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <queue>
#include <random>
#include <set>

#include <json.hpp>

#include "hlem/csv.hpp"
#include "hlem/framing.hpp"

namespace hlem::sim {

using nlohmann::json;

void ScenarioConfig::validate() const {
    if (!(width > 0.0)) throw Error("simulation width must be positive");
    if (horizon <= 0) throw Error("simulation horizon must be positive");
    if (!(arrival_rate > 0.0)) throw Error("simulation arrival_rate must be positive");
    // Bursts add an extra arrival stream, so they cannot thin the base rate.
    if (!(bursts.multiplier >= 1.0)) throw Error("burst multiplier must be at least 1");
    if (!(truth_min_share > 0.0)) throw Error("truth_min_share must be positive");
    if (activities.empty()) throw Error("simulation needs at least one activity");
    std::set<std::string> names;
    for (const auto& a : activities)
        if (!names.insert(a.name).second) throw Error("activity '" + a.name + "' is defined twice");
    if (!names.count(start_activity)) throw Error("start activity '" + start_activity + "' is not defined");
    for (const auto& a : activities) {
        if (a.resources.empty()) throw Error("activity '" + a.name + "' has an empty resource pool");
        if (!(a.service_mean > 0.0)) throw Error("activity '" + a.name + "' needs a positive service mean");
        if (a.routing.empty()) continue;
        double sum = 0.0;
        for (const auto& r : a.routing) {
            if (r.probability < 0.0) throw Error("negative routing probability at '" + a.name + "'");
            if (!r.to.empty() && !names.count(r.to))
                throw Error("activity '" + a.name + "' routes to unknown activity '" + r.to + "'");
            sum += r.probability;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw Error("routing probabilities of '" + a.name + "' sum to " + csv::format_number(sum) + ", not 1");
    }
    for (const auto& s : slowdowns) {
        if (!names.count(s.activity)) throw Error("slowdown names unknown activity '" + s.activity + "'");
        if (!(s.multiplier > 0.0)) throw Error("slowdown multiplier must be positive");
    }
    for (auto w : bursts.windows)
        if (w < 0 || w >= horizon) throw Error("burst window " + std::to_string(w) + " lies outside the horizon");
    for (const auto& [attr, dist] : case_attributes) {
        double sum = 0.0;
        for (const auto& [_, p] : dist) {
            if (p < 0.0) throw Error("negative probability in case attribute '" + attr + "'");
            sum += p;
        }
        if (dist.empty() || std::fabs(sum - 1.0) > 1e-9)
            throw Error("probabilities of case attribute '" + attr + "' must sum to 1");
    }
}

ScenarioConfig citizenship_preset() {
    ScenarioConfig c;
    c.start = parse_timestamp("2024-01-01T00:00:00Z", "iso8601");
    c.width = 3600.0;
    c.horizon = 100;
    c.arrival_rate = 10.0;
    c.start_activity = "submit";
    c.activities = {
        {"submit", {"Jane"}, 90.0, {{"review", 1.0}}},
        {"review", {"Mike", "Sarah"}, 200.0, {{"update", 0.1}, {"approve", 0.6}, {"deny", 0.3}}},
        {"update", {"Jane"}, 60.0, {{"review", 1.0}}},
        {"approve", {"Mike", "Sarah"}, 150.0, {}},
        {"deny", {"Mike", "Sarah"}, 150.0, {}},
    };
    c.bursts.multiplier = 5.0;
    c.bursts.count = 3;
    c.case_attributes["submitter"] = {{"applicant", 0.7}, {"lawyer", 0.3}};
    return c;
}

namespace {

double duration_of(const json& j) {
    if (j.is_number()) return j.get<double>();
    return parse_duration(j.get<std::string>());
}

json duration_json(double seconds) { return seconds; }

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error("scenario must be a JSON object");
    ScenarioConfig c = citizenship_preset();
    try {
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("start")) {
            const auto& s = j["start"];
            c.start = s.is_number() ? s.get<double>() : parse_timestamp(s.get<std::string>(), "iso8601");
        }
        if (j.contains("width")) c.width = duration_of(j["width"]);
        if (j.contains("horizon")) c.horizon = j["horizon"].get<std::int64_t>();
        if (j.contains("arrival_rate")) c.arrival_rate = j["arrival_rate"].get<double>();
        if (j.contains("start_activity")) c.start_activity = j["start_activity"].get<std::string>();
        if (j.contains("activities")) {
            c.activities.clear();
            for (const auto& a : j["activities"]) {
                ActivityConfig ac;
                ac.name = a.at("name").get<std::string>();
                ac.resources = a.at("resources").get<std::vector<std::string>>();
                ac.service_mean = duration_of(a.at("service_mean"));
                if (a.contains("routing"))
                    for (const auto& [to, p] : a["routing"].items())
                        ac.routing.push_back({to == "end" ? std::string() : to, p.get<double>()});
                c.activities.push_back(std::move(ac));
            }
        }
        if (j.contains("bursts")) {
            const auto& b = j["bursts"];
            c.bursts = BurstConfig{};
            if (b.contains("multiplier")) c.bursts.multiplier = b["multiplier"].get<double>();
            if (b.contains("windows")) c.bursts.windows = b["windows"].get<std::vector<std::int64_t>>();
            if (b.contains("count")) c.bursts.count = b["count"].get<std::size_t>();
            if (b.contains("min_gap")) c.bursts.min_gap = b["min_gap"].get<std::size_t>();
        }
        if (j.contains("slowdowns")) {
            c.slowdowns.clear();
            for (const auto& s : j["slowdowns"])
                c.slowdowns.push_back({s.at("activity").get<std::string>(), s.at("queue_cutoff").get<std::size_t>(),
                                       s.at("multiplier").get<double>()});
        }
        if (j.contains("case_attributes"))
            c.case_attributes = j["case_attributes"].get<std::map<std::string, std::map<std::string, double>>>();
        if (j.contains("truth_min_share")) c.truth_min_share = j["truth_min_share"].get<double>();
        if (j.contains("timestamp_format")) c.timestamp_format = j["timestamp_format"].get<std::string>();
    } catch (const json::exception& e) {
        throw Error(std::string("invalid scenario: ") + e.what());
    }
    c.validate();
    return c;
}

std::string scenario_to_json(const ScenarioConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["start"] = format_timestamp(c.start, "iso8601");
    j["width"] = duration_json(c.width);
    j["horizon"] = c.horizon;
    j["arrival_rate"] = c.arrival_rate;
    j["start_activity"] = c.start_activity;
    j["activities"] = json::array();
    for (const auto& a : c.activities) {
        json r = json::object();
        for (const auto& route : a.routing) r[route.to.empty() ? "end" : route.to] = route.probability;
        j["activities"].push_back(
            {{"name", a.name}, {"resources", a.resources}, {"service_mean", a.service_mean}, {"routing", r}});
    }
    j["bursts"] = {{"multiplier", c.bursts.multiplier},
                   {"windows", c.bursts.windows},
                   {"count", c.bursts.count},
                   {"min_gap", c.bursts.min_gap}};
    j["slowdowns"] = json::array();
    for (const auto& s : c.slowdowns)
        j["slowdowns"].push_back(
            {{"activity", s.activity}, {"queue_cutoff", s.queue_cutoff}, {"multiplier", s.multiplier}});
    j["case_attributes"] = c.case_attributes;
    j["truth_min_share"] = c.truth_min_share;
    j["timestamp_format"] = c.timestamp_format;
    return j.dump(2) + "\n";
}

std::string truth_to_json(const GroundTruth& t) {
    json j;
    j["origin"] = t.origin;
    j["origin_iso"] = format_timestamp(t.origin, "iso8601");
    j["width"] = t.width;
    j["horizon"] = t.horizon;
    j["burst_multiplier"] = t.burst_multiplier;
    j["burst_windows"] = t.burst_windows;
    j["activity_burst_windows"] = t.activity_burst_windows;
    j["slowdown_windows"] = t.slowdown_windows;
    j["injected_cases"] = t.injected_cases;
    return j.dump(2) + "\n";
}

GroundTruth parse_truth(const std::string& json_text) {
    try {
        const json j = json::parse(json_text);
        GroundTruth t;
        t.origin = j.at("origin").get<double>();
        t.width = j.at("width").get<double>();
        t.horizon = j.at("horizon").get<std::int64_t>();
        t.burst_multiplier = j.at("burst_multiplier").get<double>();
        t.burst_windows = j.at("burst_windows").get<std::vector<std::int64_t>>();
        t.activity_burst_windows = j.at("activity_burst_windows").get<decltype(t.activity_burst_windows)>();
        t.slowdown_windows = j.at("slowdown_windows").get<decltype(t.slowdown_windows)>();
        t.injected_cases = j.at("injected_cases").get<std::size_t>();
        return t;
    } catch (const json::exception& e) {
        throw Error(std::string("invalid ground-truth file: ") + e.what());
    }
}

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double exponential(double mean) { return -mean * std::log1p(-uniform()); }
    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_); }

private:
    std::mt19937_64 gen_;
};

using Millis = std::int64_t;

Millis to_millis(double seconds) { return std::max<Millis>(1, std::llround(seconds * 1000.0)); }

std::vector<std::int64_t> pick_burst_windows(const ScenarioConfig& c, Rng& rng) {
    if (c.bursts.multiplier == 1.0) return {};
    std::vector<std::int64_t> out = c.bursts.windows;
    if (out.empty() && c.bursts.count > 0) {
        const auto gap = static_cast<std::int64_t>(c.bursts.min_gap);
        const std::int64_t lo = gap, hi = c.horizon - gap;  // [lo, hi)
        if (hi <= lo) throw Error("horizon too short for bursts with min_gap " + std::to_string(gap));
        for (int attempt = 0; attempt < 10000 && out.size() < c.bursts.count; ++attempt) {
            const auto w = lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(hi - lo)));
            bool ok = true;
            for (auto o : out) ok = ok && std::llabs(o - w) >= gap;
            if (ok) out.push_back(w);
        }
        if (out.size() < c.bursts.count) throw Error("cannot place the requested bursts inside the horizon");
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct Arrival {
    Millis time;
    bool injected;
};

struct Task {
    std::size_t case_index;
    std::size_t activity;
    Millis arrival;
    std::uint64_t seq;
};

struct Resource {
    std::string name;
    std::vector<std::size_t> activities;
    bool busy = false;
    Millis free_since = 0;
    Task task{};
    bool slowed = false;
};

struct Completion {
    Millis time;
    std::uint64_t seq;
    std::size_t resource;
    bool operator>(const Completion& o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
};

}  // namespace

Simulation generate(const ScenarioConfig& c) {
    c.validate();
    Rng rng(c.seed);

    std::map<std::string, std::size_t> act_index;
    for (std::size_t i = 0; i < c.activities.size(); ++i) act_index[c.activities[i].name] = i;
    std::vector<Resource> resources;
    std::map<std::string, std::size_t> res_index;
    for (std::size_t a = 0; a < c.activities.size(); ++a) {
        for (const auto& r : c.activities[a].resources) {
            auto [it, inserted] = res_index.try_emplace(r, resources.size());
            if (inserted) resources.push_back({r, {}});
            resources[it->second].activities.push_back(a);
        }
    }
    std::vector<std::vector<std::size_t>> eligible(c.activities.size());
    for (std::size_t r = 0; r < resources.size(); ++r)
        for (auto a : resources[r].activities) eligible[a].push_back(r);
    std::vector<const SlowdownRule*> slowdown(c.activities.size(), nullptr);
    for (const auto& s : c.slowdowns) slowdown[act_index.at(s.activity)] = &s;

    Simulation sim;
    auto& truth = sim.truth;
    truth.origin = c.start;
    truth.width = c.width;
    truth.horizon = c.horizon;
    truth.burst_multiplier = c.bursts.multiplier;
    truth.burst_windows = pick_burst_windows(c, rng);

    // Piecewise-constant Poisson arrivals; the extra burst load is drawn as a
    // separate injected stream so ground truth can follow it.
    const double width_ms = c.width * 1000.0;
    std::vector<Arrival> arrivals;
    for (std::int64_t w = 0; w < c.horizon; ++w) {
        const double lo = static_cast<double>(w) * width_ms, hi = lo + width_ms;
        auto stream = [&](double per_window, bool injected) {
            const double mean_gap = width_ms / per_window;
            for (double t = lo + rng.exponential(mean_gap); t < hi; t += rng.exponential(mean_gap))
                arrivals.push_back({static_cast<Millis>(std::floor(t)), injected});
        };
        stream(c.arrival_rate, false);
        if (std::binary_search(truth.burst_windows.begin(), truth.burst_windows.end(), w))
            stream(c.arrival_rate * (c.bursts.multiplier - 1.0), true);
    }
    std::stable_sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) {
        return std::tie(a.time, a.injected) < std::tie(b.time, b.injected);
    });

    for (const auto& [name, _] : c.case_attributes) sim.attribute_names.push_back(name);
    std::vector<std::vector<std::string>> case_attrs(arrivals.size());
    for (auto& attrs : case_attrs) {
        for (const auto& [_, dist] : c.case_attributes) {
            double u = rng.uniform(), acc = 0.0;
            std::string pick = dist.rbegin()->first;
            for (const auto& [value, p] : dist) {
                acc += p;
                if (u < acc) {
                    pick = value;
                    break;
                }
            }
            attrs.push_back(pick);
        }
    }

    std::vector<std::optional<std::size_t>> last_activity(arrivals.size());
    std::vector<std::deque<Task>> queues(c.activities.size());
    std::priority_queue<Completion, std::vector<Completion>, std::greater<>> pending;
    std::uint64_t seq = 0;
    std::map<std::pair<std::size_t, std::int64_t>, std::size_t> injected_arrivals;  // (activity, window)
    std::map<std::string, std::set<std::int64_t>> slowed;
    struct Emitted {
        Millis time;
        std::uint64_t order;
        std::size_t case_index;
        std::size_t activity;
        std::size_t resource;
    };
    std::vector<Emitted> emitted;

    auto window_of = [&](Millis t) { return static_cast<std::int64_t>(std::floor(static_cast<double>(t) / width_ms)); };

    auto start = [&](std::size_t r, const Task& task, Millis now) {
        auto& res = resources[r];
        const auto& act = c.activities[task.activity];
        double mean = act.service_mean;
        res.slowed = false;
        if (const auto* rule = slowdown[task.activity]; rule && queues[task.activity].size() > rule->queue_cutoff) {
            mean *= rule->multiplier;
            res.slowed = true;
        }
        res.busy = true;
        res.task = task;
        pending.push({now + to_millis(rng.exponential(mean)), seq++, r});
    };

    auto arrive = [&](Task task, Millis now) {
        if (arrivals[task.case_index].injected)
            ++injected_arrivals[{task.activity, window_of(task.arrival)}];
        std::optional<std::size_t> pick;
        for (auto r : eligible[task.activity]) {
            if (resources[r].busy) continue;
            if (!pick || resources[r].free_since < resources[*pick].free_since) pick = r;
        }
        if (pick) start(*pick, task, now);
        else queues[task.activity].push_back(task);
    };

    auto pull = [&](std::size_t r, Millis now) {
        std::optional<std::size_t> best;
        for (auto a : resources[r].activities) {
            if (queues[a].empty()) continue;
            const auto& head = queues[a].front();
            if (!best || std::tie(head.arrival, head.seq) <
                             std::tie(queues[*best].front().arrival, queues[*best].front().seq))
                best = a;
        }
        if (!best) return;
        Task task = queues[*best].front();
        queues[*best].pop_front();
        start(r, task, now);
    };

    const std::size_t start_act = act_index.at(c.start_activity);
    std::size_t next_arrival = 0;
    while (next_arrival < arrivals.size() || !pending.empty()) {
        const bool take_completion =
            !pending.empty() && (next_arrival >= arrivals.size() || pending.top().time <= arrivals[next_arrival].time);
        if (!take_completion) {
            const std::size_t k = next_arrival++;
            arrive({k, start_act, arrivals[k].time, seq++}, arrivals[k].time);
            continue;
        }
        const Completion done = pending.top();
        pending.pop();
        auto& res = resources[done.resource];
        const Task task = res.task;
        emitted.push_back({done.time, emitted.size(), task.case_index, task.activity, done.resource});
        if (res.slowed && last_activity[task.case_index]) {
            const auto label = c.activities[*last_activity[task.case_index]].name + "->" + c.activities[task.activity].name;
            slowed[label].insert(window_of(done.time));
        }
        last_activity[task.case_index] = task.activity;
        res.busy = false;
        res.free_since = done.time;

        std::optional<std::size_t> next;
        const auto& routes = c.activities[task.activity].routing;
        if (!routes.empty()) {
            double u = rng.uniform(), acc = 0.0;
            const Route* chosen = &routes.back();
            for (const auto& route : routes) {
                acc += route.probability;
                if (u < acc) {
                    chosen = &route;
                    break;
                }
            }
            if (!chosen->to.empty()) next = act_index.at(chosen->to);
        }
        pull(done.resource, done.time);
        if (next) arrive({task.case_index, *next, done.time, seq++}, done.time);
    }

    std::sort(emitted.begin(), emitted.end(),
              [](const Emitted& a, const Emitted& b) { return std::tie(a.time, a.order) < std::tie(b.time, b.order); });
    sim.records.reserve(emitted.size());
    for (std::size_t i = 0; i < emitted.size(); ++i) {
        const auto& e = emitted[i];
        EventRecord rec;
        rec.id = "e" + std::to_string(i + 1);
        rec.case_id = "c" + std::to_string(e.case_index + 1);
        rec.activity = c.activities[e.activity].name;
        rec.time = c.start + static_cast<double>(e.time) / 1000.0;
        rec.resource = resources[e.resource].name;
        for (std::size_t a = 0; a < sim.attribute_names.size(); ++a)
            rec.extra.emplace_back(sim.attribute_names[a], case_attrs[e.case_index][a]);
        sim.records.push_back(std::move(rec));
    }

    for (const auto& a : arrivals) truth.injected_cases += a.injected ? 1 : 0;
    const double min_count = c.truth_min_share * c.arrival_rate;
    for (const auto& [key, count] : injected_arrivals)
        if (static_cast<double>(count) >= min_count)
            truth.activity_burst_windows[c.activities[key.first].name].push_back(key.second);
    for (const auto& [label, windows] : slowed) truth.slowdown_windows[label].assign(windows.begin(), windows.end());
    return sim;
}

EventLog Simulation::log() const { return EventLog::from_records(records, true, "iso8601"); }

void write_csv(std::ostream& out, const Simulation& sim, const std::string& timestamp_format) {
    std::vector<std::string> header{"case", "activity", "timestamp", "resource"};
    header.insert(header.end(), sim.attribute_names.begin(), sim.attribute_names.end());
    csv::write_row(out, header);
    for (const auto& r : sim.records) {
        std::vector<std::string> row{r.case_id, r.activity, format_timestamp(r.time, timestamp_format),
                                     r.resource.value_or("")};
        for (const auto& [_, v] : r.extra) row.push_back(v);
        csv::write_row(out, row);
    }
}

}  // namespace hlem::sim
