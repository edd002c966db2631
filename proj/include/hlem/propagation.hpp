#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "hlem/proximity.hpp"

namespace hlem {

using NodeIndex = std::uint32_t;

struct PropagationEdge {
    NodeIndex from = 0;
    NodeIndex to = 0;
    double proximity = 0.0;
    auto operator<=>(const PropagationEdge&) const = default;
};

/// Directed propagation relation over high-level events (node i is the i-th
/// detected event). Self-loops are never stored.
class PropagationGraph {
public:
    PropagationGraph() = default;
    /// Edges are sorted and de-duplicated.
    PropagationGraph(std::size_t node_count, std::vector<PropagationEdge> edges, double lambda);

    std::size_t node_count() const { return out_.size(); }
    double lambda() const { return lambda_; }
    const std::vector<PropagationEdge>& edges() const { return edges_; }
    const std::vector<NodeIndex>& successors(NodeIndex n) const { return out_[n]; }
    const std::vector<NodeIndex>& predecessors(NodeIndex n) const { return in_[n]; }
    bool has_edge(NodeIndex from, NodeIndex to) const;

private:
    std::vector<PropagationEdge> edges_;
    std::vector<std::vector<NodeIndex>> out_;
    std::vector<std::vector<NodeIndex>> in_;
    double lambda_ = 0.0;
};

/// Edge (h1, h2) iff h1 != h2, proximity(h1, h2) >= lambda and the proximity is
/// positive. Only pairs that can score above zero are evaluated.
PropagationGraph build_graph(std::span<const HighLevelEvent> hles, const Proximity& proximity, double lambda,
                             unsigned parallelism = 1);

struct Cascade {
    std::uint32_t id = 0;
    std::vector<WindowIndex> windows;          // strictly increasing
    std::vector<std::vector<NodeIndex>> groups;  // groups[i] occurred in windows[i]

    std::vector<NodeIndex> members() const;
};

/// Cascade id per node: weakly connected components, numbered in order of
/// their smallest node.
std::vector<std::uint32_t> cascade_ids(const PropagationGraph& graph);

/// Window-ordered cascades; `node_windows[i]` is the window of node i.
std::vector<Cascade> cascades(const PropagationGraph& graph, std::span<const WindowIndex> node_windows);
std::vector<Cascade> cascades(const PropagationGraph& graph, std::span<const HighLevelEvent> hles);

struct ThreadPruning {
    /// Jaccard overlap of the first and last member's cases; 0 disables.
    double min_first_last_case_share = 0.5;
    std::size_t max_length = 10;
    std::size_t max_count = 100000;

    void validate() const;
};

struct Thread {
    std::vector<NodeIndex> nodes;
    std::uint32_t cascade = 0;
    bool maximal = false;
    double case_share = 1.0;
};

struct ThreadSet {
    std::vector<Thread> threads;
    /// Set when max_count stopped the enumeration early.
    bool truncated = false;
};

/// Enumerates threads (simple edge paths, single nodes included) by length,
/// so max_count cuts off the longest ones first. Sorted by cascade, length and
/// node sequence. `node_cases[i]` are the sorted case ids behind node i.
ThreadSet threads(const PropagationGraph& graph, std::span<const std::vector<CaseIndex>> node_cases,
                  const ThreadPruning& pruning, unsigned parallelism = 1);

/// A thread's projection onto high-level activities.
using ThreadVariant = std::vector<HighLevelActivity>;
/// A cascade's projection: one activity set per occupied window.
using CascadeVariant = std::vector<std::set<HighLevelActivity>>;

ThreadVariant variant_of(const Thread& thread, std::span<const HighLevelEvent> hles);
CascadeVariant variant_of(const Cascade& cascade, std::span<const HighLevelEvent> hles);

/// "<exec@submit, delayEnd@submit->review>"
std::string variant_label(const EventLog& log, const ThreadVariant& variant);
/// "<{exec@submit}, {delayEnd@submit->review, exit@review->approve}>"
std::string variant_label(const EventLog& log, const CascadeVariant& variant);

}  // namespace hlem
