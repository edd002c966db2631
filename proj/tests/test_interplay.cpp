#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <random>

#include "fixtures.hpp"
#include "hlem/interplay.hpp"
#include "hlem/stats.hpp"
#include "oracle.hpp"

using namespace hlem;

namespace {

struct CaseSpec {
    std::string name;
    std::vector<std::string> trace;
    std::string kind;
    std::string amount;
};

EventLog make_log(const std::vector<CaseSpec>& specs) {
    std::vector<EventRecord> r;
    double t = 0;
    for (const auto& c : specs)
        for (const auto& a : c.trace) {
            std::vector<std::pair<std::string, std::string>> extra{{"kind", c.kind}, {"amount", c.amount}};
            r.push_back({"", c.name, a, t++, "R", extra});
        }
    return EventLog::from_records(r, true);
}

ComponentId seg(const EventLog& log, const std::string& a, const std::string& b) {
    return ComponentId::segment(*log.find_activity(a), *log.find_activity(b));
}

std::vector<CaseIndex> case_ids(const EventLog& log, std::initializer_list<const char*> names) {
    std::vector<CaseIndex> out;
    for (const char* n : names)
        for (CaseIndex c = 0; c < log.case_count(); ++c)
            if (log.case_name(c) == n) out.push_back(c);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CaseSpec> sample_cases() {
    return {
        {"c1", {"submit", "review", "approve"}, "lawyer", "10"},
        {"c2", {"submit", "review", "deny"}, "lawyer", "20"},
        {"c3", {"submit", "review", "approve"}, "applicant", "30"},
        {"c4", {"submit", "update", "review", "approve"}, "applicant", "40"},
        {"c5", {"submit", "review", "approve"}, "applicant", ""},
        {"c6", {"update", "submit", "review", "deny"}, "lawyer", "60"},
    };
}

}  // namespace

TEST_CASE("chi-square statistic and p-values") {
    auto t = stats::chi_square_test({{10, 20}, {20, 10}});
    CHECK(t.statistic == doctest::Approx(20.0 / 3.0));
    CHECK(t.dof == 1);
    CHECK(t.p_value == doctest::Approx(0.0098).epsilon(0.01));
    CHECK(t.p_value < 0.01);
    t = stats::chi_square_test({{15, 15}, {15, 15}});
    CHECK(t.statistic == 0.0);
    CHECK(t.p_value == doctest::Approx(1.0));
    CHECK(stats::chi_square_test({{30, 0}, {0, 30}}).statistic == doctest::Approx(60.0));
    CHECK_THROWS_AS(stats::chi_square_test({{0, 0}, {3, 4}}), Error);
    CHECK_THROWS_AS(stats::chi_square_test({{1, 2}}), Error);
    CHECK_THROWS_AS(stats::chi_square_test({{1, 2}, {3}}), Error);
    CHECK_THROWS_AS(stats::chi_square_test({{1, -2}, {3, 4}}), Error);

    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> cell(1, 60);
    for (int i = 0; i < 300; ++i) {
        const double a = cell(rng), b = cell(rng), c = cell(rng), d = cell(rng);
        const double n = a + b + c + d;
        const double closed = n * (a * d - b * c) * (a * d - b * c) / ((a + b) * (c + d) * (a + c) * (b + d));
        const auto x = stats::chi_square_test({{a, b}, {c, d}});
        REQUIRE(x.statistic == doctest::Approx(closed).epsilon(1e-12));
        REQUIRE(stats::chi_square_test({{c, d}, {a, b}}).statistic == doctest::Approx(x.statistic).epsilon(1e-12));
        REQUIRE(stats::chi_square_test({{b, a}, {d, c}}).p_value == doctest::Approx(x.p_value).epsilon(1e-12));
        REQUIRE(x.p_value >= 0.0);
        REQUIRE(x.p_value <= 1.0);
    }
}

TEST_CASE("gamma_q against a series oracle and Boost") {
    for (double a : {0.5, 1.0, 1.5, 2.0, 3.5, 7.0, 12.0})
        for (double x : {0.01, 0.3, 1.0, 2.5, 5.0, 9.0, 20.0, 40.0}) {
            const double ours = stats::gamma_q(a, x);
            REQUIRE(std::abs(ours - oracle::gamma_q_series(a, x)) < 1e-6);
            REQUIRE(std::abs(ours - boost::math::gamma_q(a, x)) < 1e-10);
        }
    CHECK(stats::gamma_q(1.0, 0.0) == 1.0);
    CHECK(stats::chi_square_survival(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK_THROWS_AS(stats::gamma_q(0.0, 1.0), Error);
}

TEST_CASE("participation") {
    Thread t{{0, 1, 2}, 0, true, 1.0};
    std::vector<std::vector<CaseIndex>> node_cases{{0, 1, 2, 5}, {1, 2, 5}, {2, 5, 7}};
    CHECK(participating_cases(t, node_cases) == std::vector<CaseIndex>{2, 5});
}

TEST_CASE("segment chains and control groups") {
    const auto log = make_log(sample_cases());
    const HighLevelActivity sr{Aspect::Exit, seg(log, "submit", "review")};
    const HighLevelActivity ra{Aspect::DelayEnd, seg(log, "review", "approve")};
    const HighLevelActivity exec{Aspect::Exec, ComponentId::activity(*log.find_activity("submit"))};

    CHECK(is_segment_chain({sr, ra}));
    CHECK_FALSE(is_segment_chain({ra, sr}));
    CHECK_FALSE(is_segment_chain({exec, sr}));
    const auto seq = underlying_activity_sequence(log, {sr, ra});
    CHECK(seq.size() == 3);
    CHECK(log.activity_name(seq.back()) == "approve");
    CHECK_THROWS_WITH_AS(underlying_activity_sequence(log, {ra, sr}), doctest::Contains("chain"), Error);
    CHECK_THROWS_AS(underlying_activity_sequence(log, {exec}), Error);

    CHECK(control_flow_cases(log, seq) == case_ids(log, {"c1", "c3", "c5"}));

    VariantSummary v{{sr, ra}, "<exit@submit->review, delayEnd@review->approve>", {0}, case_ids(log, {"c1"})};
    CHECK(control_group(log, v) == case_ids(log, {"c3", "c5"}));
    CHECK(*reach(log, v) == doctest::Approx(1.0 / 3.0));
    VariantSummary ex{{exec}, "<exec@submit>", {0}, case_ids(log, {"c1"})};
    CHECK_FALSE(reach(log, ex).has_value());
}

TEST_CASE("control-flow cases match a substring search") {
    std::mt19937_64 rng(9);
    for (int round = 0; round < 30; ++round) {
        const auto records = oracle::random_log(rng, {.max_events = 80, .max_activities = 4});
        const auto log = EventLog::from_records(records, true);
        const auto raw = oracle::index(records);
        const std::size_t len = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
        std::vector<NameIndex> seq(len);
        for (auto& a : seq) a = std::uniform_int_distribution<NameIndex>(0, log.activity_count() - 1)(rng);
        std::vector<CaseIndex> want;
        for (CaseIndex c = 0; c < log.case_count(); ++c) {
            // Walk each trace from its first event using the oracle's next relation.
            std::vector<std::string> trace;
            for (int e = 0; e < static_cast<int>(records.size()); ++e)
                if (records[e].case_id == log.case_name(c) && raw.prev[e] < 0)
                    for (int x = e; x >= 0; x = raw.next[x]) trace.push_back(records[x].activity);
            for (std::size_t i = 0; i + len <= trace.size(); ++i) {
                bool match = true;
                for (std::size_t k = 0; k < len; ++k) match = match && trace[i + k] == log.activity_name(seq[k]);
                if (match) {
                    want.push_back(c);
                    break;
                }
            }
        }
        REQUIRE(control_flow_cases(log, seq) == want);
    }
}

TEST_CASE("categorize") {
    const auto log = make_log(sample_cases());
    const auto all = case_ids(log, {"c1", "c2", "c3", "c4", "c5", "c6"});
    const auto kinds = categorize(log, "kind", all);
    CHECK(std::count(kinds.begin(), kinds.end(), "lawyer") == 3);
    const auto bins = categorize(log, "amount", all, 2);
    CHECK(bins[0] == "[10, 30]");
    CHECK(bins[2] == "[10, 30]");
    CHECK(bins[3] == "(30, 60]");
    CHECK(bins[4] == kMissingCategory);
    CHECK(categorize(log, "amount", all, 10).size() == all.size());
    CHECK_THROWS_AS(categorize(log, "colour", all), Error);
    CHECK_THROWS_AS(categorize(log, "kind", all, 0), Error);
}

TEST_CASE("contingency table against the control group") {
    std::vector<CaseSpec> specs;
    for (int i = 0; i < 40; ++i)
        specs.push_back({"c" + std::to_string(i), {"submit", "review"}, i < 20 ? "lawyer" : "applicant",
                         std::to_string(i)});
    const auto log = make_log(specs);
    const HighLevelActivity sr{Aspect::Exit, seg(log, "submit", "review")};
    VariantSummary v{{sr}, "<exit@submit->review>", {0}, {}};
    // Participants: ten lawyers and ten applicants.
    for (CaseIndex c = 0; c < log.case_count(); ++c) {
        const int i = std::stoi(log.case_name(c).substr(1));
        if (i < 10 || (i >= 20 && i < 30)) v.cases.push_back(c);
    }
    const auto r = chi_square(log, v, "kind");
    REQUIRE(r.categories == std::vector<std::string>{"applicant", "lawyer"});
    CHECK(r.counts[0] == std::array<std::size_t, 2>{10, 10});
    CHECK(r.chi2 == 0.0);
    CHECK_FALSE(r.significant);
    CHECK_FALSE(r.low_expected);

    v.cases.clear();
    for (CaseIndex c = 0; c < log.case_count(); ++c)
        if (std::stoi(log.case_name(c).substr(1)) < 15) v.cases.push_back(c);
    const auto skew = chi_square(log, v, "kind");
    CHECK(skew.counts[1] == std::array<std::size_t, 2>{15, 5});
    CHECK(skew.chi2 == doctest::Approx(24.0));
    CHECK(skew.significant);

    v.cases.clear();
    for (CaseIndex c = 0; c < log.case_count(); ++c) v.cases.push_back(c);
    CHECK_THROWS_WITH_AS(chi_square(log, v, "kind"), doctest::Contains("empty control group"), Error);
}

TEST_CASE("variant ranking") {
    std::vector<VariantRank> vs{
        {"<a>", 1, 10, 0.5, 0},
        {"<b, c>", 2, 5, std::nullopt, 0},
        {"<d, e, f>", 3, 1, 1.0, 0},
    };
    const auto ranked = rank_variants(vs, RankWeights{});
    CHECK(ranked[0].label == "<d, e, f>");
    CHECK(ranked[0].score == doctest::Approx(2.0 / 3.0));
    CHECK(ranked[1].score == doctest::Approx((0 + 1 + 0.5) / 3.0));
    CHECK(ranked[2].score == doctest::Approx((0.5 + 4.0 / 9.0) / 3.0));
    const auto only_freq = rank_variants(vs, RankWeights{0, 1, 0});
    CHECK(only_freq.front().label == "<a>");
    CHECK(only_freq.back().score == 0.0);
    // Equal factors tie at zero and fall back to label order.
    const auto tie = rank_variants({{"<z>", 1, 1, 0.2, 0}, {"<y>", 1, 1, 0.2, 0}}, RankWeights{});
    CHECK(tie[0].label == "<y>");
    CHECK(tie[0].score == 0.0);
    CHECK_THROWS_AS(rank_variants(vs, RankWeights{0, 0, 0}), Error);
    CHECK_THROWS_AS(rank_variants(vs, RankWeights{-1, 1, 1}), Error);
    CHECK_THROWS_AS(rank_variants({}, RankWeights{}), Error);

    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        std::vector<VariantRank> random(std::uniform_int_distribution<int>(1, 8)(rng));
        for (std::size_t k = 0; k < random.size(); ++k)
            random[k] = {"v" + std::to_string(k), std::uniform_int_distribution<std::size_t>(1, 5)(rng),
                         std::uniform_int_distribution<std::size_t>(1, 9)(rng),
                         std::uniform_real_distribution<double>(0, 1)(rng), 0};
        const auto out = rank_variants(random, RankWeights{});
        for (std::size_t k = 0; k < out.size(); ++k) {
            REQUIRE(out[k].score >= 0.0);
            REQUIRE(out[k].score <= 1.0);
            if (k) REQUIRE(out[k - 1].score >= out[k].score);
        }
    }
}
