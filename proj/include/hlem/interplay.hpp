#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlem/propagation.hpp"

namespace hlem {

/// Cases behind a high-level event.
std::vector<CaseIndex> participating_cases(const EventLog& log, const HighLevelEvent& h);
/// Cases shared by every member of the thread.
std::vector<CaseIndex> participating_cases(const Thread& thread, std::span<const std::vector<CaseIndex>> node_cases);

/// One thread variant together with the threads that realise it.
struct VariantSummary {
    ThreadVariant variant;
    std::string label;
    std::vector<std::size_t> threads;  // indexes into the thread list
    std::vector<CaseIndex> cases;      // union of the threads' participating cases

    std::size_t size() const { return variant.size(); }
    std::size_t frequency() const { return threads.size(); }
};

/// Groups threads by variant; the result is sorted by label.
std::vector<VariantSummary> summarize_variants(const EventLog& log, std::span<const Thread> threads,
                                               std::span<const HighLevelEvent> hles,
                                               std::span<const std::vector<CaseIndex>> node_cases);

/// True when every activity of the variant is segment-based and consecutive
/// segments chain (b_i == a_{i+1}).
bool is_segment_chain(const ThreadVariant& variant);

/// <a1, b1, b2, ..., bn> for a segment chain; throws with the reason otherwise.
std::vector<NameIndex> underlying_activity_sequence(const EventLog& log, const ThreadVariant& variant);

/// Cases whose trace contains `sequence` as a contiguous directly-follows run.
std::vector<CaseIndex> control_flow_cases(const EventLog& log, std::span<const NameIndex> sequence);

/// Control-flow eligible cases that do not participate in the variant.
std::vector<CaseIndex> control_group(const EventLog& log, const VariantSummary& variant);

inline constexpr std::string_view kMissingCategory = "(missing)";

/// Category of each listed case under a case-level attribute. Missing values
/// map to "(missing)". When every present value is numeric the values are
/// split into `bins` equal-frequency bins over the listed cases.
std::vector<std::string> categorize(const EventLog& log, const std::string& attribute,
                                    std::span<const CaseIndex> cases, std::size_t bins = 4);

struct ContingencyResult {
    std::string variant;
    std::string attribute;
    std::vector<std::string> categories;
    /// counts[i] = {participating, non-participating} for categories[i].
    std::vector<std::array<std::size_t, 2>> counts;
    double chi2 = 0.0;
    unsigned dof = 0;
    double p_value = 1.0;
    bool significant = false;
    /// Some expected cell count is below 5.
    bool low_expected = false;
};

/// χ² test of independence between variant participation and a case
/// attribute, against the variant's control group. Categories absent from
/// both groups are left out of the table.
ContingencyResult chi_square(const EventLog& log, const VariantSummary& variant, const std::string& attribute,
                             std::size_t bins = 4);

struct RankWeights {
    double size = 1.0;
    double frequency = 1.0;
    double reach = 1.0;

    void validate() const;
};

struct VariantRank {
    std::string label;
    std::size_t size = 0;
    std::size_t frequency = 0;
    /// |participating| / (|participating| + |control|); empty when the
    /// variant has no control group (not a segment chain).
    std::optional<double> reach;
    double score = 0.0;
};

/// reach for one variant, empty when no control group can be formed.
std::optional<double> reach(const EventLog& log, const VariantSummary& variant);

/// Scores by the weighted mean of min-max normalised factors (undefined reach
/// counts as 0) and sorts by descending score, then label.
std::vector<VariantRank> rank_variants(std::vector<VariantRank> variants, const RankWeights& weights);

}  // namespace hlem
