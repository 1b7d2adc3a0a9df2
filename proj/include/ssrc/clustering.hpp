#pragma once
// Pairwise distances over sub-tracklet features and strict DBSCAN.

#include <cstddef>
#include <vector>

#include "ssrc/core.hpp"

namespace ssrc::clustering {

enum class DistanceKind { Cosine, Jaccard };

struct DistanceMatrix {
    Matrix values;  // symmetric, zero diagonal
    DistanceKind kind = DistanceKind::Cosine;
    bool fallback = false;  // Jaccard was requested but N <= k1, so this is cosine

    std::size_t size() const { return values.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

/// 1 - v_i . v_j over L2-normalized rows. Throws if a row's norm is off by more than 1e-4.
DistanceMatrix cosine_distance_matrix(const Matrix& features);

/// k-reciprocal encoding Jaccard distance (re-ranking style): k1-reciprocal
/// neighbour sets, expanded with the k1/2-reciprocal sets of members that
/// overlap by more than 2/3, weighted by exp(-squared euclidean distance),
/// averaged over the k2 nearest neighbours, then 1 - sum(min)/sum(max).
/// With N <= k1 the cosine matrix is returned and `fallback` is set.
DistanceMatrix k_reciprocal_jaccard(const Matrix& features, std::size_t k1, std::size_t k2);

/// Density clustering over a precomputed matrix. A point is core when at
/// least `min_samples` points (itself included) lie within `eps` (<=).
/// Clusters grow one at a time from the lowest-index unvisited core point, so
/// a border point reachable from several clusters joins the lowest label.
/// Returns labels 1..n in order of first core index, kOutlier elsewhere.
std::vector<int> dbscan(const DistanceMatrix& dist, double eps, std::size_t min_samples);

/// Jaccard distance then DBSCAN with cfg.eps / cfg.min_samples. The result
/// holds the assignment with singleton positive sets (DIRECT mode skeleton).
LabelState sub_cluster_generate(const Matrix& features, const TrainConfig& cfg);

// Label state over an existing assignment with singleton positive sets.
LabelState singleton_state(std::vector<int> assignment);

}  // namespace ssrc::clustering
