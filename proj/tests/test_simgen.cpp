#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "hlem/simgen.hpp"

using namespace hlem;
using namespace hlem::sim;

namespace {

ScenarioConfig small_preset(std::uint64_t seed) {
    auto c = citizenship_preset();
    c.seed = seed;
    c.horizon = 40;
    return c;
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
    const auto a = generate(small_preset(3));
    const auto b = generate(small_preset(3));
    const auto c = generate(small_preset(4));
    std::ostringstream sa, sb, sc;
    write_csv(sa, a, "iso8601");
    write_csv(sb, b, "iso8601");
    write_csv(sc, c, "iso8601");
    CHECK(sa.str() == sb.str());
    CHECK(sa.str() != sc.str());
    CHECK(truth_to_json(a.truth) == truth_to_json(b.truth));
    CHECK(sa.str().rfind("case,activity,timestamp,resource,submitter\n", 0) == 0);
}

TEST_CASE("bursts in the ground truth") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto c = citizenship_preset();
        c.seed = seed;
        const auto sim = generate(c);
        const auto& w = sim.truth.burst_windows;
        REQUIRE(w.size() == 3);
        for (std::size_t i = 0; i < w.size(); ++i) {
            REQUIRE(w[i] >= 5);
            REQUIRE(w[i] < c.horizon - 5);
            if (i) REQUIRE(w[i] - w[i - 1] >= 5);
        }
        REQUIRE(sim.truth.injected_cases > 0);
        const auto& review = sim.truth.activity_burst_windows.at("review");
        REQUIRE_FALSE(review.empty());
    }
    auto calm = citizenship_preset();
    calm.bursts.multiplier = 1.0;
    const auto sim = generate(calm);
    CHECK(sim.truth.burst_windows.empty());
    CHECK(sim.truth.injected_cases == 0);
    for (const auto& [_, ws] : sim.truth.activity_burst_windows) CHECK(ws.empty());

    auto fixed = citizenship_preset();
    fixed.bursts.windows = {7, 30};
    CHECK(generate(fixed).truth.burst_windows == std::vector<std::int64_t>{7, 30});
}

TEST_CASE("traces follow the process") {
    const auto c = small_preset(7);
    const auto sim = generate(c);
    std::map<std::string, std::set<std::string>> allowed;
    std::set<std::string> finals;
    for (const auto& a : c.activities) {
        if (a.routing.empty()) finals.insert(a.name);
        for (const auto& r : a.routing) (r.to.empty() ? finals.insert(a.name), void() : void(allowed[a.name].insert(r.to)));
    }
    std::map<std::string, std::vector<const EventRecord*>> traces;
    double last = -1;
    for (const auto& r : sim.records) {
        REQUIRE(r.time >= last);
        last = r.time;
        traces[r.case_id].push_back(&r);
    }
    for (const auto& [id, t] : traces) {
        REQUIRE(t.front()->activity == c.start_activity);
        REQUIRE(finals.count(t.back()->activity) == 1);
        const std::string submitter = t.front()->extra.at(0).second;
        REQUIRE((submitter == "applicant" || submitter == "lawyer"));
        for (std::size_t i = 1; i < t.size(); ++i) {
            REQUIRE(t[i]->time > t[i - 1]->time);
            REQUIRE(allowed[t[i - 1]->activity].count(t[i]->activity) == 1);
            REQUIRE(t[i]->extra.at(0).second == submitter);
        }
    }
    const auto log = sim.log();
    CHECK(log.size() == sim.records.size());
    CHECK(log.is_case_attribute("submitter"));
}

TEST_CASE("burst windows carry about multiplier times the base arrivals") {
    // A fast, well-staffed start activity makes each case's first event
    // coincide with its arrival.
    std::vector<double> ratios;
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        auto c = citizenship_preset();
        c.seed = seed;
        c.activities[0].resources = {"s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8"};
        c.activities[0].service_mean = 0.01;
        const auto sim = generate(c);
        std::map<std::string, double> first;
        for (const auto& r : sim.records)
            if (!first.count(r.case_id)) first[r.case_id] = r.time;
        std::map<std::int64_t, double> per_window;
        for (const auto& [_, t] : first) per_window[static_cast<std::int64_t>(std::floor((t - c.start) / c.width))] += 1;
        double burst = 0, base = 0;
        std::size_t n_base = 0;
        for (std::int64_t w = 0; w < c.horizon; ++w) {
            if (std::binary_search(sim.truth.burst_windows.begin(), sim.truth.burst_windows.end(), w))
                burst += per_window[w];
            else {
                base += per_window[w];
                ++n_base;
            }
        }
        ratios.push_back((burst / sim.truth.burst_windows.size()) / (base / n_base));
    }
    double mean = 0, var = 0;
    for (double r : ratios) mean += r;
    mean /= ratios.size();
    for (double r : ratios) var += (r - mean) * (r - mean);
    var /= ratios.size() - 1;
    const double se = std::sqrt(var / ratios.size());
    CHECK(std::abs(mean - 5.0) <= 3 * se);
}

TEST_CASE("scenario JSON round trip and validation") {
    auto c = parse_scenario(R"({"seed": 9, "bursts": {"multiplier": 5, "count": 2},
                               "slowdowns": [{"activity": "approve", "queue_cutoff": 3, "multiplier": 3}]})");
    CHECK(c.seed == 9);
    CHECK(c.bursts.count == 2);
    CHECK(c.slowdowns.size() == 1);
    CHECK(c.activities.size() == citizenship_preset().activities.size());
    const auto again = parse_scenario(scenario_to_json(c));
    CHECK(scenario_to_json(again) == scenario_to_json(c));

    const auto sim = generate(c);
    const auto t = parse_truth(truth_to_json(sim.truth));
    CHECK(truth_to_json(t) == truth_to_json(sim.truth));
    CHECK_FALSE(sim.truth.slowdown_windows.empty());

    auto bad = citizenship_preset();
    bad.activities[1].routing[0].probability = 0.5;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("sum to"), Error);
    bad = citizenship_preset();
    bad.start_activity = "nope";
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = citizenship_preset();
    bad.activities[0].resources.clear();
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = citizenship_preset();
    bad.bursts.multiplier = 0.5;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = citizenship_preset();
    bad.arrival_rate = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = citizenship_preset();
    bad.bursts.windows = {500};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = citizenship_preset();
    bad.slowdowns.push_back({"ghost", 1, 2});
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_THROWS_AS(parse_scenario("{not json"), Error);
}
