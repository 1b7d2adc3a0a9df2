#pragma once
// Retrieval metrics (mAP, CMC) and pseudo-label quality measures.

#include <cstddef>
#include <span>
#include <vector>

#include "ssrc/core.hpp"

namespace ssrc::eval {

struct SampleMeta {
    int identity = 0;
    int camera = 0;
};

struct RetrievalResult {
    double mAP = 0.0;
    std::vector<double> cmc;           // cmc[k-1] = rank-k accuracy
    std::size_t valid_queries = 0;
    std::size_t skipped_queries = 0;   // no valid gallery match

    double rank1() const { return cmc.empty() ? 0.0 : cmc.front(); }
};

/// Ranks the gallery by cosine distance (ties by gallery index) for every
/// query, ignoring gallery entries that share both identity and camera with
/// the query. Queries with no remaining match are skipped and counted.
RetrievalResult map_cmc(const Matrix& query, std::span<const SampleMeta> query_meta, const Matrix& gallery,
                        std::span<const SampleMeta> gallery_meta, std::size_t k_max);

// Average precision of one ranked relevance list (true = match).
double average_precision(const std::vector<bool>& ranked_hits);

struct PairwiseScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Pair counting over the non-outlier samples: a pair is a true positive
/// when it shares both pseudo label and ground truth. Precision (recall) is
/// 0 when there are no predicted (ground-truth) pairs. Throws with fewer than
/// two labelled samples.
PairwiseScores pairwise_prf(std::span<const int> pseudo, std::span<const int> gt);

struct ClusterStats {
    std::size_t correct = 0;       // every member shares one identity
    std::size_t cross_camera = 0;  // correct and spans >= 2 cameras
    std::size_t incorrect = 0;
    std::size_t total_identities = 0;

    std::size_t total() const { return correct + incorrect; }
};

ClusterStats cluster_stats(std::span<const int> pseudo, std::span<const int> gt, std::span<const int> cameras);

}  // namespace ssrc::eval
