#pragma once
// The epoch loop: freeze, filter and partition, embed, cluster, merge,
// initialise memories, then train on the labelled sub-tracklets.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ssrc/core.hpp"
#include "ssrc/encoder.hpp"
#include "ssrc/memory.hpp"
#include "ssrc/merging.hpp"
#include "ssrc/nftp.hpp"

namespace ssrc::trainer {

/// Which pipeline stages are active. The full method is every stage on with
/// progressive merging and the class-smoothing loss; the baseline clusters and
/// trains whole, unfiltered tracklets with plain InfoNCE.
struct PipelineToggles {
    bool noise_filter = true;
    bool partition = true;
    merging::MergeStrategy merge = merging::MergeStrategy::Progressive;
    memory::LossKind loss = memory::LossKind::CSC;  // InfoNCE, or CSC
    // When > 0, positive sets are each sub-cluster plus its fixed_k - 1
    // nearest sub-cluster centroids (symmetrized) instead of the merge result.
    std::size_t fixed_k = 0;

    friend bool operator==(const PipelineToggles&, const PipelineToggles&) = default;
};

PipelineToggles ssrc_toggles();
PipelineToggles baseline_toggles();

// Throws std::invalid_argument for CSC without any merging.
void validate_toggles(const PipelineToggles& t);

// Loss actually optimised: InfoNCE with merging becomes the merged-class InfoNCE.
memory::LossKind effective_loss(const PipelineToggles& t);

std::string describe(const PipelineToggles& t);

struct EpochReport {
    std::size_t epoch = 0;
    std::size_t num_units = 0;     // N^s
    std::size_t num_clusters = 0;  // n
    std::size_t num_outliers = 0;
    std::size_t num_merged = 0;    // distinct refined labels (REACHABLE) or n
    MergeMode mode = MergeMode::Direct;
    double mean_loss = 0.0;
    std::size_t filtered_frames = 0;
    std::size_t iterations = 0;
    double lr = 0.0;
    bool skipped = false;          // every unit was an outlier
    double seconds = 0.0;          // wall clock; not part of the serialized report
};

/// Output of one clustering phase.
struct PseudoLabels {
    std::vector<nftp::PartitionedTracklet> parts;
    std::vector<SubTracklet> units;
    Matrix features;  // one unit-norm row per unit, mean over all its frames
    LabelState labels;
    std::size_t filtered_frames = 0;
};

/// Runs filter, partition, embedding, clustering and merging with a fixed
/// encoder (one clustering phase of epoch `epoch`).
PseudoLabels cluster_phase(std::span<const FrameSequence> seqs, const Encoder& enc, const TrainConfig& cfg,
                           const PipelineToggles& toggles, std::size_t epoch);

// Parent-frame rows of M strided frames drawn from a sub-tracklet.
std::vector<std::size_t> sample_rows(const nftp::PartitionedTracklet& part, const SubTracklet& st, const TrainConfig& cfg,
                                     Rng& rng);

/// Sub-tracklet embedding for training: M strided frames, encoded, averaged, normalized.
Vec embed_subtracklet(const Encoder& enc, const FrameSequence& seq, const nftp::PartitionedTracklet& part,
                      const SubTracklet& st, const TrainConfig& cfg, Rng& rng);

enum class Phase { BeforeClustering, AfterClustering, AfterTraining };

struct TrainResult {
    Encoder encoder;
    std::vector<EpochReport> reports;
    PseudoLabels final_labels;  // from the last epoch's clustering phase
};

using PhaseHook = std::function<void(std::size_t epoch, Phase, const Encoder&)>;

/// Runs cfg.epochs epochs. Raw dimension is taken from the sequences.
TrainResult run(std::span<const FrameSequence> seqs, const TrainConfig& cfg, const PipelineToggles& toggles,
                const PhaseHook& hook = {});

TrainResult train(std::span<const FrameSequence> seqs, const TrainConfig& cfg, const PhaseHook& hook = {});
TrainResult train_baseline(std::span<const FrameSequence> seqs, const TrainConfig& cfg, const PhaseHook& hook = {});

// Initial encoder used by every run for a given config and raw dimension.
Encoder initial_encoder(std::size_t raw_dim, const TrainConfig& cfg);

}  // namespace ssrc::trainer
