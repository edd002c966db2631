#include "hlem/propagation.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

namespace hlem {

PropagationGraph::PropagationGraph(std::size_t node_count, std::vector<PropagationEdge> edges, double lambda)
    : lambda_(lambda) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const auto& a, const auto& b) { return a.from == b.from && a.to == b.to; }),
                edges.end());
    out_.assign(node_count, {});
    in_.assign(node_count, {});
    for (const auto& e : edges) {
        if (e.from >= node_count || e.to >= node_count) throw Error("propagation edge refers to an unknown node");
        if (e.from == e.to) continue;
        out_[e.from].push_back(e.to);
        in_[e.to].push_back(e.from);
        edges_.push_back(e);
    }
    for (auto& v : in_) std::sort(v.begin(), v.end());
}

bool PropagationGraph::has_edge(NodeIndex from, NodeIndex to) const {
    const auto& s = out_[from];
    return std::binary_search(s.begin(), s.end(), to);
}

namespace {

using Pair = std::pair<NodeIndex, NodeIndex>;

// Ordered pairs (i, j), i != j, that can have positive proximity.
std::vector<Pair> candidate_pairs(std::span<const HighLevelEvent> hles, const Proximity& proximity) {
    const EventLog& log = proximity.log();
    std::vector<Pair> out;
    const auto n = static_cast<NodeIndex>(hles.size());
    switch (proximity.method()) {
        case ProximityMethod::Link:
        case ProximityMethod::StrictLink: {
            std::map<WindowIndex, std::vector<NodeIndex>> by_window;
            for (NodeIndex i = 0; i < n; ++i) by_window[hles[i].window].push_back(i);
            for (const auto& [w, nodes] : by_window) {
                auto next = by_window.find(w + 1);
                for (NodeIndex i : nodes) {
                    for (NodeIndex j : nodes)
                        if (i != j) out.emplace_back(i, j);
                    if (next != by_window.end())
                        for (NodeIndex j : next->second) out.emplace_back(i, j);
                }
            }
            break;
        }
        case ProximityMethod::SegmentOverlap: {
            std::map<NameIndex, std::vector<NodeIndex>> by_first;
            for (NodeIndex i = 0; i < n; ++i) {
                if (info(hles[i].aspect).level != ComponentKind::Segment)
                    throw Error("segment_overlap proximity requires segment-based aspects only");
                by_first[hles[i].component.first].push_back(i);
            }
            for (NodeIndex i = 0; i < n; ++i) {
                auto it = by_first.find(hles[i].component.second);
                if (it == by_first.end()) continue;
                for (NodeIndex j : it->second)
                    if (i != j && hles[j].window >= hles[i].window) out.emplace_back(i, j);
            }
            break;
        }
        case ProximityMethod::InstanceOverlap: {
            std::vector<std::vector<NodeIndex>> containing(log.size());
            for (NodeIndex j = 0; j < n; ++j)
                for (EventIndex e : hles[j].events) containing[e].push_back(j);
            for (NodeIndex i = 0; i < n; ++i) {
                std::vector<NodeIndex> targets;
                for (EventIndex e : hles[i].events) {
                    EventIndex nx = log.next(e);
                    if (nx == kNoEvent) continue;
                    targets.insert(targets.end(), containing[nx].begin(), containing[nx].end());
                }
                std::sort(targets.begin(), targets.end());
                targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
                for (NodeIndex j : targets)
                    if (j != i) out.emplace_back(i, j);
            }
            break;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct UnionFind {
    std::vector<NodeIndex> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), NodeIndex{0}); }
    NodeIndex find(NodeIndex x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(NodeIndex a, NodeIndex b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent[b] = a;
    }
};

}  // namespace

PropagationGraph build_graph(std::span<const HighLevelEvent> hles, const Proximity& proximity, double lambda,
                             unsigned parallelism) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("proximity threshold lambda must lie in [0, 1]");
    const auto pairs = candidate_pairs(hles, proximity);
    std::vector<double> scores(pairs.size(), 0.0);
    parallel_for(pairs.size(), parallelism,
                 [&](std::size_t k) { scores[k] = proximity(hles[pairs[k].first], hles[pairs[k].second]); });
    std::vector<PropagationEdge> edges;
    for (std::size_t k = 0; k < pairs.size(); ++k)
        if (scores[k] > 0.0 && scores[k] >= lambda) edges.push_back({pairs[k].first, pairs[k].second, scores[k]});
    return PropagationGraph(hles.size(), std::move(edges), lambda);
}

std::vector<NodeIndex> Cascade::members() const {
    std::vector<NodeIndex> out;
    for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint32_t> cascade_ids(const PropagationGraph& graph) {
    const std::size_t n = graph.node_count();
    UnionFind uf(n);
    for (const auto& e : graph.edges()) uf.unite(e.from, e.to);
    std::vector<std::uint32_t> ids(n);
    std::map<NodeIndex, std::uint32_t> root_id;
    for (NodeIndex i = 0; i < n; ++i) {
        auto [it, inserted] = root_id.emplace(uf.find(i), static_cast<std::uint32_t>(root_id.size()));
        ids[i] = it->second;
    }
    return ids;
}

std::vector<Cascade> cascades(const PropagationGraph& graph, std::span<const WindowIndex> node_windows) {
    if (node_windows.size() != graph.node_count()) throw Error("one window per node expected");
    const auto ids = cascade_ids(graph);
    const std::uint32_t count = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
    std::vector<std::vector<NodeIndex>> members(count);
    for (NodeIndex i = 0; i < ids.size(); ++i) members[ids[i]].push_back(i);
    std::vector<Cascade> out(count);
    for (std::uint32_t c = 0; c < count; ++c) {
        out[c].id = c;
        auto& nodes = members[c];
        std::stable_sort(nodes.begin(), nodes.end(),
                         [&](NodeIndex a, NodeIndex b) { return node_windows[a] < node_windows[b]; });
        for (NodeIndex v : nodes) {
            if (out[c].windows.empty() || out[c].windows.back() != node_windows[v]) {
                out[c].windows.push_back(node_windows[v]);
                out[c].groups.emplace_back();
            }
            out[c].groups.back().push_back(v);
        }
    }
    return out;
}

std::vector<Cascade> cascades(const PropagationGraph& graph, std::span<const HighLevelEvent> hles) {
    std::vector<WindowIndex> windows;
    windows.reserve(hles.size());
    for (const auto& h : hles) windows.push_back(h.window);
    return cascades(graph, windows);
}

void ThreadPruning::validate() const {
    if (min_first_last_case_share < 0.0 || min_first_last_case_share > 1.0)
        throw Error("threads.min_first_last_case_share must lie in [0, 1]");
    if (max_length == 0) throw Error("threads.max_length must be positive");
    if (max_count == 0) throw Error("threads.max_count must be positive");
}

namespace {

using Path = std::vector<NodeIndex>;

bool is_maximal(const PropagationGraph& graph, const Path& path) {
    auto on_path = [&](NodeIndex v) { return std::find(path.begin(), path.end(), v) != path.end(); };
    for (NodeIndex p : graph.predecessors(path.front()))
        if (!on_path(p)) return false;
    for (NodeIndex s : graph.successors(path.back()))
        if (!on_path(s)) return false;
    return true;
}

// Paths one node longer, in (prefix, successor) order, at most `cap` of them.
// `more` is set when further extensions were left out.
std::vector<Path> extend(const PropagationGraph& graph, const std::vector<Path>& frontier, std::size_t cap,
                         bool& more) {
    std::vector<Path> out;
    for (const auto& p : frontier)
        for (NodeIndex s : graph.successors(p.back())) {
            if (std::find(p.begin(), p.end(), s) != p.end()) continue;
            if (out.size() == cap) {
                more = true;
                return out;
            }
            out.push_back(p);
            out.back().push_back(s);
        }
    return out;
}

}  // namespace

ThreadSet threads(const PropagationGraph& graph, std::span<const std::vector<CaseIndex>> node_cases,
                  const ThreadPruning& pruning, unsigned parallelism) {
    pruning.validate();
    if (node_cases.size() != graph.node_count()) throw Error("one case set per node expected");
    const auto ids = cascade_ids(graph);
    const std::uint32_t count = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;

    // Level order: every path of length k in every cascade is visited before
    // any of length k + 1, so a truncated run keeps the shortest threads.
    ThreadSet out;
    std::size_t remaining = pruning.max_count;
    auto visit = [&](const Path& p, std::uint32_t cascade) {
        const double share = p.size() == 1 ? 1.0 : jaccard(node_cases[p.front()], node_cases[p.back()]);
        if (share >= pruning.min_first_last_case_share) out.threads.push_back({p, cascade, is_maximal(graph, p), share});
    };

    std::vector<std::vector<Path>> frontier(count);
    for (NodeIndex v = 0; v < ids.size(); ++v) {
        if (remaining == 0) {
            out.truncated = true;
            break;
        }
        --remaining;
        frontier[ids[v]].push_back({v});
    }
    for (std::uint32_t c = 0; c < count; ++c)
        for (const auto& p : frontier[c]) visit(p, c);

    for (std::size_t length = 2; length <= pruning.max_length && !out.truncated; ++length) {
        const std::size_t cap = remaining;
        std::vector<std::vector<Path>> next(count);
        std::vector<char> more(count, 0);
        parallel_for(count, parallelism, [&](std::size_t c) {
            bool m = false;
            next[c] = extend(graph, frontier[c], cap, m);
            more[c] = m;
        });
        bool any = false;
        for (std::uint32_t c = 0; c < count; ++c) {
            if (next[c].size() > remaining) {
                next[c].resize(remaining);
                out.truncated = true;
            }
            if (more[c] || (remaining == 0 && !next[c].empty())) out.truncated = true;
            remaining -= next[c].size();
            for (const auto& p : next[c]) visit(p, c);
            any = any || !next[c].empty();
        }
        if (!any) break;
        frontier = std::move(next);
    }

    std::stable_sort(out.threads.begin(), out.threads.end(), [](const Thread& a, const Thread& b) {
        if (a.cascade != b.cascade) return a.cascade < b.cascade;
        if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
        return a.nodes < b.nodes;
    });
    return out;
}

ThreadVariant variant_of(const Thread& thread, std::span<const HighLevelEvent> hles) {
    ThreadVariant v;
    v.reserve(thread.nodes.size());
    for (NodeIndex n : thread.nodes) v.push_back(hles[n].activity());
    return v;
}

CascadeVariant variant_of(const Cascade& cascade, std::span<const HighLevelEvent> hles) {
    CascadeVariant v;
    for (const auto& group : cascade.groups) {
        std::set<HighLevelActivity> acts;
        for (NodeIndex n : group) acts.insert(hles[n].activity());
        v.push_back(std::move(acts));
    }
    return v;
}

std::string variant_label(const EventLog& log, const ThreadVariant& variant) {
    std::string out = "<";
    for (std::size_t i = 0; i < variant.size(); ++i) {
        if (i) out += ", ";
        out += label(log, variant[i]);
    }
    return out + ">";
}

std::string variant_label(const EventLog& log, const CascadeVariant& variant) {
    std::string out = "<";
    for (std::size_t i = 0; i < variant.size(); ++i) {
        if (i) out += ", ";
        out += "{";
        bool first = true;
        for (const auto& a : variant[i]) {
            if (!first) out += ", ";
            out += label(log, a);
            first = false;
        }
        out += "}";
    }
    return out + ">";
}

}  // namespace hlem
