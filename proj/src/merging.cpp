#include "ssrc/merging.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ssrc::merging {
namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Keeps the smaller index as the root.
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

bool ReachabilityGraph::has_edge(int a, int b) const {
    if (a == b) return false;
    return witness.count({std::min(a, b), std::max(a, b)}) > 0;
}

ReachabilityGraph build_graph(std::span<const int> assignment, std::span<const SubTracklet> subs, int num_clusters) {
    if (assignment.size() != subs.size()) throw std::invalid_argument("build_graph: assignment/sub-tracklet size mismatch");
    ReachabilityGraph g;
    g.num_nodes = num_clusters;
    g.adjacency.resize(static_cast<std::size_t>(num_clusters));

    std::map<std::string, std::set<int>> labels_of;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        const int a = assignment[i];
        if (a == kOutlier) continue;
        if (a < 1 || a > num_clusters) throw std::out_of_range("build_graph: label out of range");
        labels_of[subs[i].parent_id].insert(a);
    }
    for (const auto& [tracklet, labels] : labels_of) {
        for (auto it = labels.begin(); it != labels.end(); ++it) {
            for (auto jt = std::next(it); jt != labels.end(); ++jt) {
                g.witness[{*it, *jt}].insert(tracklet);
                g.adjacency[static_cast<std::size_t>(*it - 1)].insert(*jt);
                g.adjacency[static_cast<std::size_t>(*jt - 1)].insert(*it);
            }
        }
    }
    return g;
}

std::vector<std::vector<int>> direct_positive_sets(const ReachabilityGraph& g) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(g.num_nodes));
    for (int c = 1; c <= g.num_nodes; ++c) {
        auto& p = out[static_cast<std::size_t>(c - 1)];
        const auto& nb = g.adjacency[static_cast<std::size_t>(c - 1)];
        p.assign(nb.begin(), nb.end());
        p.insert(std::lower_bound(p.begin(), p.end(), c), c);
    }
    return out;
}

ReachableSets reachable_positive_sets(const ReachabilityGraph& g) {
    const auto n = static_cast<std::size_t>(g.num_nodes);
    DisjointSets ds(n);
    for (const auto& [edge, _] : g.witness) ds.unite(static_cast<std::size_t>(edge.first - 1), static_cast<std::size_t>(edge.second - 1));

    ReachableSets out;
    out.refined.assign(n, 0);
    std::vector<int> component_of_root(n, 0);
    std::vector<std::vector<int>> members;
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t r = ds.find(c);
        if (component_of_root[r] == 0) {
            members.emplace_back();
            component_of_root[r] = static_cast<int>(members.size());
        }
        out.refined[c] = component_of_root[r];
        members[static_cast<std::size_t>(component_of_root[r] - 1)].push_back(static_cast<int>(c + 1));
    }
    out.positive_sets.resize(n);
    for (std::size_t c = 0; c < n; ++c) out.positive_sets[c] = members[static_cast<std::size_t>(out.refined[c] - 1)];
    return out;
}

const char* to_string(MergeStrategy s) {
    switch (s) {
        case MergeStrategy::None: return "none";
        case MergeStrategy::DirectAlways: return "direct";
        case MergeStrategy::ReachableAlways: return "reachable";
        case MergeStrategy::Progressive: return "progressive";
    }
    return "?";
}

namespace {

void set_direct(LabelState& s, const ReachabilityGraph& g) {
    s.mode = MergeMode::Direct;
    s.positive_sets = direct_positive_sets(g);
    s.refined.clear();
}

void set_reachable(LabelState& s, const ReachabilityGraph& g) {
    auto r = reachable_positive_sets(g);
    s.mode = MergeMode::Reachable;
    s.positive_sets = std::move(r.positive_sets);
    s.refined = std::move(r.refined);
}

}  // namespace

void progressive_positive_sets(LabelState& state, const ReachabilityGraph& g, std::size_t epoch, const TrainConfig& cfg) {
    if (epoch < 1) throw std::invalid_argument("progressive_positive_sets: epochs are 1-based");
    if (g.num_nodes != state.num_clusters) throw std::invalid_argument("progressive_positive_sets: graph/label mismatch");
    if (epoch < cfg.merge_switch_epoch)
        set_direct(state, g);
    else
        set_reachable(state, g);
}

void apply_strategy(LabelState& state, const ReachabilityGraph& g, MergeStrategy strategy, std::size_t epoch,
                    const TrainConfig& cfg) {
    if (g.num_nodes != state.num_clusters) throw std::invalid_argument("apply_strategy: graph/label mismatch");
    switch (strategy) {
        case MergeStrategy::None:
            state.mode = MergeMode::Direct;
            state.refined.clear();
            state.positive_sets.assign(static_cast<std::size_t>(state.num_clusters), {});
            for (int c = 1; c <= state.num_clusters; ++c) state.positive_sets[static_cast<std::size_t>(c - 1)] = {c};
            break;
        case MergeStrategy::DirectAlways: set_direct(state, g); break;
        case MergeStrategy::ReachableAlways: set_reachable(state, g); break;
        case MergeStrategy::Progressive: progressive_positive_sets(state, g, epoch, cfg); break;
    }
}

}  // namespace ssrc::merging
