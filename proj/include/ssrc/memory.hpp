#pragma once
// Centroid and hard-sample memory banks and the contrastive losses computed
// against them. Every loss returns its value together with the analytic
// gradient with respect to the query embedding.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ssrc/core.hpp"

namespace ssrc::memory {

struct MemoryBanks {
    Matrix centroid;  // V, one unit row per sub-cluster
    Matrix hard;      // V^h
    double tau = 0.05;
    double alpha = 0.1;

    std::size_t num_classes() const { return centroid.rows(); }
};

enum class Bank { Centroid, Hard };

struct LossOutput {
    double value = 0.0;
    Vec grad;  // d value / d v
};

/// Rows are the L2-normalized member means of each label 1..n; both banks
/// start identical. `labels[i]` labels `features` row i (kOutlier rows skipped).
MemoryBanks init_memory(const Matrix& features, std::span<const int> labels, int num_clusters, double tau, double alpha);

/// -log softmax(v.V / tau)[label], max-subtracted.
LossOutput infonce_loss(std::span<const double> v, int label, const MemoryBanks& banks, Bank which);

/// Class-smoothing loss: sum over j in `positives` of
/// s_j * -log( e^{z_j} / (e^{z_j} + sum_{k not in P} e^{z_k}) ),
/// with s_label = 1 - lambda + lambda/K and s_j = lambda/K otherwise.
/// `positives` must be sorted and contain `label`.
LossOutput csc_loss(std::span<const double> v, int label, std::span<const int> positives, const MemoryBanks& banks,
                    Bank which, double lambda);

/// InfoNCE where every class in `positives` counts as the target:
/// -log( sum_{j in P} e^{z_j} / sum_k e^{z_k} ). Used by the ablations that
/// merge sub-clusters but keep an InfoNCE objective.
LossOutput merged_infonce_loss(std::span<const double> v, std::span<const int> positives, const MemoryBanks& banks,
                               Bank which);

enum class LossKind { InfoNCE, CSC, MergedInfoNCE };

const char* to_string(LossKind k);

/// gamma1 * loss(hard bank) + gamma2 * loss(centroid bank).
LossOutput combined_loss(std::span<const double> v, int label, std::span<const int> positives,
                         const MemoryBanks& banks, const TrainConfig& cfg, LossKind kind = LossKind::CSC);

struct Sample {
    Vec feature;  // unit-norm embedding
    int label = kOutlier;
};

/// V[j] <- alpha V[j] + (1 - alpha) mean_j, then renormalized, for each label in the batch.
void update_memory(MemoryBanks& banks, std::span<const Sample> batch);

/// Same momentum rule on V^h, using the batch sample least similar to V^h[j]
/// (lowest batch index on ties).
void update_hard_memory(MemoryBanks& banks, std::span<const Sample> batch);

}  // namespace ssrc::memory
