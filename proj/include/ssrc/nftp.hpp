#pragma once
// Noise-filtered tracklet partition: drop frames far from the tracklet
// centre, cut the survivors into fixed-stride sub-tracklets, and sample
// strided frame windows from them for training.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ssrc/core.hpp"
#include "ssrc/rng.hpp"

namespace ssrc::nftp {

struct FilteredTracklet {
    std::size_t parent = 0;
    std::string parent_id;
    std::vector<std::size_t> surviving;  // indices into the parent's frames, ascending
    std::vector<std::size_t> filtered;
    double threshold = 0.0;              // q
};

/// Arithmetic mean of the frame rows. Not renormalized.
Vec center_feature(const Matrix& frames);

/// (1 - cos(f, c))^2. Throws std::domain_error on a zero vector.
double frame_distance(std::span<const double> f, std::span<const double> c);

/// Removes frame j iff frame_distance(f_j, C) > q, where
/// q = sum_j frame_distance(f_j, C) / (L * delta). If rounding ever removes
/// every frame, the frame closest to C is kept.
FilteredTracklet noise_filter(const Matrix& frames, double delta);

/// Keeps every frame (the "no noise filter" ablation).
FilteredTracklet keep_all(std::size_t num_frames);

/// Sequential partition of the surviving frames into segments of `stride`
/// frames; a trailing remainder shorter than `stride` joins the last full
/// segment, and a tracklet shorter than `stride` stays whole.
std::vector<SubTracklet> partition(const FilteredTracklet& ft, std::size_t stride);

/// Returns M positions within [0, length) spaced by `stride` from a random
/// start. Positions wrap modulo `length` when the span does not fit.
std::vector<std::size_t> sample_frames(std::size_t length, std::size_t M, std::size_t stride, Rng& rng);

// Deterministic core of sample_frames for a given start offset.
std::vector<std::size_t> strided_window(std::size_t length, std::size_t M, std::size_t stride, std::size_t start);

// Largest legal start offset when the window fits, else length - 1.
std::size_t max_start(std::size_t length, std::size_t M, std::size_t stride);

struct PartitionedTracklet {
    FilteredTracklet filtered;
    std::vector<SubTracklet> subs;
};

struct NftpOptions {
    bool filter = true;
    bool partition = true;
};

/// Applies the filter and partition to every sequence. `features[i]` holds the
/// encoded frames of sequence i.
std::vector<PartitionedTracklet> nftp_all(std::span<const FrameSequence> seqs, std::span<const Matrix> features,
                                          const TrainConfig& cfg, NftpOptions opts = {});

// Flattens the sub-tracklets of every tracklet in order (N^s entries).
std::vector<SubTracklet> flatten(const std::vector<PartitionedTracklet>& parts);

// Parent-frame indices covered by a sub-tracklet.
std::vector<std::size_t> frames_of(const PartitionedTracklet& part, const SubTracklet& st);

}  // namespace ssrc::nftp
