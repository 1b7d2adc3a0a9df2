#pragma once
// Shared data model: tracklets, sub-tracklets, pseudo-label state and the
// training configuration.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssrc/linalg.hpp"

namespace ssrc {

// Pseudo labels are 1..n; this marks a sample DBSCAN left unclustered.
inline constexpr int kOutlier = 0;

/// The training-path view of a tracklet: an id and its temporally ordered
/// frames (one row per frame). Carries no identity or camera, so nothing
/// that consumes it can peek at ground truth.
struct FrameSequence {
    std::string id;
    Matrix frames;

    std::size_t length() const { return frames.rows(); }
};

/// A tracklet as stored on disk or produced by the generator. Identity and
/// camera are evaluation-only metadata.
struct Tracklet {
    FrameSequence seq;
    std::optional<int> identity;
    std::optional<int> camera;

    const std::string& id() const { return seq.id; }
};

std::vector<FrameSequence> unlabeled_view(const std::vector<Tracklet>& tracklets);

/// Contiguous slice of a noise-filtered tracklet. `first`/`last` index the
/// parent's surviving-frame list (inclusive).
struct SubTracklet {
    std::size_t parent = 0;  // position of the parent in the sequence list
    std::string parent_id;
    int segment_index = 1;   // 1-based
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t length() const { return last - first + 1; }
    friend bool operator==(const SubTracklet&, const SubTracklet&) = default;
};

enum class MergeMode { Direct, Reachable };

const char* to_string(MergeMode m);

struct LabelState {
    std::vector<int> assignment;                // per sub-tracklet: 1..n or kOutlier
    int num_clusters = 0;                       // n
    std::vector<std::vector<int>> positive_sets; // [label-1] -> sorted labels (P)
    std::vector<int> refined;                   // [label-1] -> merged label; Reachable only
    MergeMode mode = MergeMode::Direct;

    const std::vector<int>& positives(int label) const { return positive_sets.at(static_cast<std::size_t>(label - 1)); }
    std::size_t num_outliers() const;
    std::size_t num_labeled() const { return assignment.size() - num_outliers(); }
};

/// Returns a description of every broken LabelState invariant (self-membership,
/// partition in Reachable mode, symmetry in Direct mode). Empty means valid.
std::vector<std::string> check_label_state(const LabelState& s);

struct TrainConfig {
    std::size_t d = 64;              // embedding dimension
    std::size_t l = 32;              // partition stride
    std::size_t M = 8;               // frames sampled per sub-tracklet
    std::size_t sample_stride = 4;
    double delta = 0.7;              // noise-filter factor
    double eps = 0.25;
    std::size_t min_samples = 2;
    std::size_t k1 = 30;
    std::size_t k2 = 6;
    double lambda = 0.1;             // CSC smoothing
    double tau = 0.05;
    double alpha = 0.1;              // memory momentum
    double gamma1 = 0.5;             // hard-memory loss weight
    double gamma2 = 0.25;            // centroid-memory loss weight
    std::size_t batch_size = 32;
    std::size_t epochs = 150;
    std::size_t iters_per_epoch = 0; // 0: ceil(N^s / B), recomputed each epoch
    double lr = 3.5e-4;
    double lr_decay_factor = 0.1;
    std::size_t lr_decay_period = 50;
    double weight_decay = 5e-4;
    std::size_t merge_switch_epoch = 51;
    std::uint64_t rng_seed = 1;

    double lr_at_epoch(std::size_t epoch) const;
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

TrainConfig default_config();

struct ConfigViolation {
    std::string field;
    std::string rule;
};

std::vector<ConfigViolation> validate_config(const TrainConfig& cfg);

// Throws std::invalid_argument listing every violation.
void require_valid(const TrainConfig& cfg);

}  // namespace ssrc
