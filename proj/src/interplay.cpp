#include "hlem/interplay.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "hlem/csv.hpp"
#include "hlem/stats.hpp"

namespace hlem {

std::vector<CaseIndex> participating_cases(const EventLog& log, const HighLevelEvent& h) { return cases_of(log, h); }

std::vector<CaseIndex> participating_cases(const Thread& thread, std::span<const std::vector<CaseIndex>> node_cases) {
    if (thread.nodes.empty()) return {};
    std::vector<CaseIndex> acc = node_cases[thread.nodes.front()];
    for (std::size_t i = 1; i < thread.nodes.size() && !acc.empty(); ++i) {
        const auto& other = node_cases[thread.nodes[i]];
        std::vector<CaseIndex> next;
        std::set_intersection(acc.begin(), acc.end(), other.begin(), other.end(), std::back_inserter(next));
        acc = std::move(next);
    }
    return acc;
}

std::vector<VariantSummary> summarize_variants(const EventLog& log, std::span<const Thread> threads,
                                               std::span<const HighLevelEvent> hles,
                                               std::span<const std::vector<CaseIndex>> node_cases) {
    std::map<std::string, VariantSummary> by_label;
    for (std::size_t t = 0; t < threads.size(); ++t) {
        ThreadVariant v = variant_of(threads[t], hles);
        std::string lbl = variant_label(log, v);
        auto [it, inserted] = by_label.try_emplace(lbl);
        auto& s = it->second;
        if (inserted) {
            s.variant = std::move(v);
            s.label = lbl;
        }
        s.threads.push_back(t);
        auto cases = participating_cases(threads[t], node_cases);
        s.cases.insert(s.cases.end(), cases.begin(), cases.end());
    }
    std::vector<VariantSummary> out;
    out.reserve(by_label.size());
    for (auto& [_, s] : by_label) {
        std::sort(s.cases.begin(), s.cases.end());
        s.cases.erase(std::unique(s.cases.begin(), s.cases.end()), s.cases.end());
        out.push_back(std::move(s));
    }
    return out;
}

bool is_segment_chain(const ThreadVariant& variant) {
    if (variant.empty()) return false;
    for (std::size_t i = 0; i < variant.size(); ++i) {
        if (variant[i].component.kind != ComponentKind::Segment) return false;
        if (i > 0 && variant[i - 1].component.second != variant[i].component.first) return false;
    }
    return true;
}

std::vector<NameIndex> underlying_activity_sequence(const EventLog& log, const ThreadVariant& variant) {
    if (variant.empty()) throw Error("empty variant has no activity sequence");
    for (std::size_t i = 0; i < variant.size(); ++i) {
        if (variant[i].component.kind != ComponentKind::Segment)
            throw Error("variant member '" + label(log, variant[i]) +
                        "' is not segment-based; control groups need a chain of segment aspects");
        if (i > 0 && variant[i - 1].component.second != variant[i].component.first)
            throw Error("variant members '" + label(log, variant[i - 1]) + "' and '" + label(log, variant[i]) +
                        "' do not chain: the first segment must end where the second begins");
    }
    std::vector<NameIndex> seq{variant.front().component.first};
    for (const auto& a : variant) seq.push_back(a.component.second);
    return seq;
}

std::vector<CaseIndex> control_flow_cases(const EventLog& log, std::span<const NameIndex> sequence) {
    std::vector<CaseIndex> out;
    if (sequence.empty()) return out;
    for (CaseIndex c = 0; c < log.case_count(); ++c) {
        auto trace = log.trace(c);
        if (trace.size() < sequence.size()) continue;
        for (std::size_t i = 0; i + sequence.size() <= trace.size(); ++i) {
            bool match = true;
            for (std::size_t k = 0; k < sequence.size() && match; ++k)
                match = log.activity(trace[i + k]) == sequence[k];
            if (match) {
                out.push_back(c);
                break;
            }
        }
    }
    return out;
}

std::vector<CaseIndex> control_group(const EventLog& log, const VariantSummary& variant) {
    const auto seq = underlying_activity_sequence(log, variant.variant);
    const auto eligible = control_flow_cases(log, seq);
    std::vector<CaseIndex> out;
    std::set_difference(eligible.begin(), eligible.end(), variant.cases.begin(), variant.cases.end(),
                        std::back_inserter(out));
    return out;
}

namespace {

std::optional<double> to_number(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

std::vector<std::string> categorize(const EventLog& log, const std::string& attribute,
                                    std::span<const CaseIndex> cases, std::size_t bins) {
    if (bins == 0) throw Error("interplay.bins must be positive");
    if (!log.is_case_attribute(attribute))
        throw Error("attribute '" + attribute + "' is not a case attribute (it is unknown or varies within a case)");
    const auto values = log.case_attribute(attribute);

    std::vector<std::optional<double>> numbers(cases.size());
    bool numeric = true;
    std::vector<double> present;
    for (std::size_t i = 0; i < cases.size() && numeric; ++i) {
        const auto& v = values[cases[i]];
        if (!v) continue;
        numbers[i] = to_number(*v);
        if (!numbers[i]) numeric = false;
        else present.push_back(*numbers[i]);
    }

    std::vector<std::string> out(cases.size());
    if (!numeric || present.empty()) {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const auto& v = values[cases[i]];
            out[i] = v ? *v : std::string(kMissingCategory);
        }
        return out;
    }

    // Equal-frequency cut points at the nearest-rank k/bins quantiles.
    std::sort(present.begin(), present.end());
    std::vector<double> uppers;
    for (std::size_t k = 1; k <= bins; ++k) {
        const auto rank = static_cast<std::size_t>(std::ceil(static_cast<double>(k * present.size()) / bins - 1e-9));
        const double cut = present[std::max<std::size_t>(rank, 1) - 1];
        if (uppers.empty() || cut > uppers.back()) uppers.push_back(cut);
    }
    std::vector<std::string> names;
    for (std::size_t b = 0; b < uppers.size(); ++b) {
        const double lo = b == 0 ? present.front() : uppers[b - 1];
        names.push_back((b == 0 ? "[" : "(") + csv::format_number(lo) + ", " + csv::format_number(uppers[b]) + "]");
    }
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (!numbers[i]) {
            out[i] = std::string(kMissingCategory);
            continue;
        }
        auto it = std::lower_bound(uppers.begin(), uppers.end(), *numbers[i]);
        out[i] = names[static_cast<std::size_t>(it - uppers.begin())];
    }
    return out;
}

ContingencyResult chi_square(const EventLog& log, const VariantSummary& variant, const std::string& attribute,
                             std::size_t bins) {
    const auto control = control_group(log, variant);
    if (variant.cases.empty()) throw Error("variant " + variant.label + " has no participating cases");
    if (control.empty()) throw Error("variant " + variant.label + " has an empty control group");

    std::vector<CaseIndex> all = variant.cases;
    all.insert(all.end(), control.begin(), control.end());
    const auto cats = categorize(log, attribute, all, bins);

    std::map<std::string, std::array<std::size_t, 2>> table;
    for (std::size_t i = 0; i < all.size(); ++i) ++table[cats[i]][i < variant.cases.size() ? 0 : 1];

    ContingencyResult out;
    out.variant = variant.label;
    out.attribute = attribute;
    std::vector<std::vector<double>> counts;
    for (const auto& [cat, row] : table) {
        out.categories.push_back(cat);
        out.counts.push_back(row);
        counts.push_back({static_cast<double>(row[0]), static_cast<double>(row[1])});
    }
    if (counts.size() < 2)
        throw Error("attribute '" + attribute + "' takes a single category over the cases of " + variant.label);
    const auto test = stats::chi_square_test(counts);
    out.chi2 = test.statistic;
    out.dof = test.dof;
    out.p_value = test.p_value;
    out.significant = test.p_value < 0.05;
    out.low_expected = test.min_expected < 5.0;
    return out;
}

void RankWeights::validate() const {
    if (size < 0.0 || frequency < 0.0 || reach < 0.0) throw Error("interplay.weights must be non-negative");
    if (size + frequency + reach <= 0.0) throw Error("interplay.weights must not all be zero");
}

std::optional<double> reach(const EventLog& log, const VariantSummary& variant) {
    if (!is_segment_chain(variant.variant)) return std::nullopt;
    const auto control = control_group(log, variant);
    const double total = static_cast<double>(variant.cases.size() + control.size());
    if (total == 0.0) return std::nullopt;
    return static_cast<double>(variant.cases.size()) / total;
}

std::vector<VariantRank> rank_variants(std::vector<VariantRank> variants, const RankWeights& weights) {
    weights.validate();
    if (variants.empty()) throw Error("no variants to rank");
    const std::size_t n = variants.size();
    auto normalise = [n](auto&& get) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = get(i);
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const double a = *lo, b = *hi;
        for (double& x : v) x = b > a ? (x - a) / (b - a) : 0.0;
        return v;
    };
    const auto s = normalise([&](std::size_t i) { return static_cast<double>(variants[i].size); });
    const auto f = normalise([&](std::size_t i) { return static_cast<double>(variants[i].frequency); });
    const auto r = normalise([&](std::size_t i) { return variants[i].reach.value_or(0.0); });
    const double total = weights.size + weights.frequency + weights.reach;
    for (std::size_t i = 0; i < n; ++i)
        variants[i].score = (weights.size * s[i] + weights.frequency * f[i] + weights.reach * r[i]) / total;
    std::sort(variants.begin(), variants.end(), [](const VariantRank& a, const VariantRank& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.label < b.label;
    });
    return variants;
}

}  // namespace hlem
