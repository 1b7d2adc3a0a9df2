#pragma once
// Tracklet-consistency graph over sub-clusters and the positive sets derived
// from it.
//
// Two sub-clusters are joined by an edge when one tracklet has sub-tracklets
// in both. DIRECT mode takes each label's closed neighbourhood as its
// positive set (one hop, no chaining); REACHABLE mode takes its connected
// component and assigns a refined label per component.

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssrc/core.hpp"

namespace ssrc::merging {

struct ReachabilityGraph {
    int num_nodes = 0;                                   // labels 1..n
    std::vector<std::set<int>> adjacency;                // [label-1] -> neighbour labels
    std::map<std::pair<int, int>, std::set<std::string>> witness;  // (a<b) -> tracklet ids

    std::size_t num_edges() const { return witness.size(); }
    bool has_edge(int a, int b) const;
};

/// `assignment[i]` labels `subs[i]`; outliers contribute nothing.
ReachabilityGraph build_graph(std::span<const int> assignment, std::span<const SubTracklet> subs, int num_clusters);

std::vector<std::vector<int>> direct_positive_sets(const ReachabilityGraph& g);

struct ReachableSets {
    std::vector<std::vector<int>> positive_sets;
    std::vector<int> refined;  // [label-1] -> component id, 1-based by smallest member
};

ReachableSets reachable_positive_sets(const ReachabilityGraph& g);

enum class MergeStrategy { None, DirectAlways, ReachableAlways, Progressive };

const char* to_string(MergeStrategy s);

/// Fills positive sets and mode of `state` for `epoch` (1-based): DIRECT
/// before cfg.merge_switch_epoch, REACHABLE from it on.
void progressive_positive_sets(LabelState& state, const ReachabilityGraph& g, std::size_t epoch, const TrainConfig& cfg);

/// Applies `strategy`; None leaves singleton positive sets in DIRECT mode.
void apply_strategy(LabelState& state, const ReachabilityGraph& g, MergeStrategy strategy, std::size_t epoch,
                    const TrainConfig& cfg);

}  // namespace ssrc::merging
