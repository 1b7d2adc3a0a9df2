#pragma once
// Ground-truth scoring of training runs on synthetic data, and the ablation
// and hyper-parameter sweep drivers built on it.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ssrc/eval.hpp"
#include "ssrc/synth.hpp"
#include "ssrc/trainer.hpp"

namespace ssrc::experiment {

struct Split {
    std::vector<std::string> query;
    std::vector<std::string> gallery;
};

/// Query = the first tracklet of each identity; gallery = every tracklet.
/// Same-identity same-camera gallery entries are ignored by map_cmc.
Split default_split(const std::vector<Tracklet>& tracklets);

/// Unit-norm mean over ALL frames of each tracklet (no filtering or partition).
Matrix tracklet_features(const Encoder& enc, const std::vector<Tracklet>& tracklets);

eval::RetrievalResult evaluate_retrieval(const Encoder& enc, const std::vector<Tracklet>& tracklets, const Split& split,
                                         std::size_t k_max = 10);

/// Final label of a unit: the refined label in REACHABLE mode, else the
/// sub-cluster label (kOutlier for outliers).
int final_label(const LabelState& s, std::size_t unit);

/// Spreads unit labels to frames: frames of a labelled unit inherit its
/// final label; filtered frames and frames of outlier units get kOutlier.
/// Returned per tracklet, indexed by parent frame.
std::vector<std::vector<int>> frame_labels(const trainer::PseudoLabels& pl, const std::vector<std::size_t>& lengths);

struct LabelQuality {
    eval::PairwiseScores pairwise;
    eval::ClusterStats stats;
    std::size_t labelled_frames = 0;
};

/// Frame-level pseudo-label quality against the generator's per-frame
/// identities (splice sources included).
LabelQuality label_quality(const synth::SyntheticDataset& ds, const trainer::PseudoLabels& pl);

struct RunMetrics {
    std::string name;
    eval::RetrievalResult retrieval;
    LabelQuality quality;
    std::vector<trainer::EpochReport> reports;
};

RunMetrics score_run(const std::string& name, const synth::SyntheticDataset& ds, const trainer::TrainResult& run);

RunMetrics run_and_score(const std::string& name, const synth::SyntheticDataset& ds, const TrainConfig& cfg,
                         const trainer::PipelineToggles& toggles);

struct AblationRow {
    std::string name;
    trainer::PipelineToggles toggles;
};

/// The seven method rows of the module ablation (baseline; +NFTP; R./D.R.
/// merging with InfoNCE; R./D.R. merging with CSC; progressive + CSC).
std::vector<AblationRow> module_ablation_rows();

/// Noise-filter / partition ablation rows (baseline, +NF, +TP, +NFTP, full
/// method without NF, full method).
std::vector<AblationRow> nftp_ablation_rows();

std::vector<RunMetrics> ablation_matrix(const synth::SyntheticDataset& ds, const TrainConfig& cfg,
                                        const std::vector<AblationRow>& rows);

enum class SweepParam { Delta, Lambda, Stride, FixedK };

SweepParam parse_sweep_param(const std::string& s);
const char* to_string(SweepParam p);

/// Copy of `cfg` with the swept parameter set. FixedK is handled by the
/// sweep driver, not the config.
TrainConfig with_param(TrainConfig cfg, SweepParam p, double value);

struct SweepRow {
    double value = 0.0;
    RunMetrics metrics;
};

/// One full run per value. For FixedK, positive sets are replaced with the
/// K nearest sub-clusters by centroid similarity instead of the
/// tracklet-consistency sets.
std::vector<SweepRow> sweep(const synth::SyntheticDataset& ds, const TrainConfig& cfg, SweepParam p,
                            const std::vector<double>& values);

struct PilotSeed {
    std::uint64_t seed = 0;
    RunMetrics full;
    RunMetrics baseline;

    /// Full method strictly better on pairwise F1 and mAP, strictly fewer
    /// incorrect clusters.
    bool full_wins() const;
};

/// Default synthetic spec (40 identities, 4 cameras, splice rate 0.3) with
/// `seed`, trained with both pipelines at scaled_config(epochs) and the same
/// seed.
PilotSeed run_pilot_seed(std::uint64_t seed, std::size_t epochs);

struct CleanPilot {
    std::uint64_t seed = 0;
    double epoch1_f1 = 0.0;  // labels of the first clustering phase
    double final_f1 = 0.0;
};

/// Full method on splice-free data: label quality at epoch 1 and at the end.
CleanPilot run_clean_pilot(std::uint64_t seed, std::size_t epochs);

/// Scales the epoch-dependent schedule (decay period, merge switch) of the
/// default 150-epoch config to `epochs`.
TrainConfig scaled_config(std::size_t epochs);

}  // namespace ssrc::experiment
