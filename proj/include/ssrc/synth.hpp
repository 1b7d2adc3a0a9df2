#pragma once
// Synthetic tracklet datasets with known ground truth.
//
// Frame model: raw = prototype(identity) + bias(camera) + jitter * N(0, I).
// A spliced segment swaps in another identity's prototype for a contiguous
// run of frames, mimicking a tracker that jumped between two pedestrians.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ssrc/core.hpp"

namespace ssrc::synth {

struct SyntheticSpec {
    std::size_t num_identities = 40;
    std::size_t num_cameras = 4;
    std::size_t tracklets_per_identity = 3;
    std::size_t min_length = 96;
    std::size_t max_length = 192;
    std::size_t raw_dim = 32;
    double identity_separation = 1.2;  // radians; prototypes pairwise at least this far apart
    double camera_shift_scale = 0.7;
    double splice_rate = 0.3;
    std::size_t min_splice = 16;
    std::size_t max_splice = 32;
    double jitter_scale = 0.1;
    std::uint64_t seed = 7;

    friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

// Empty when the spec is usable.
std::vector<std::string> validate_spec(const SyntheticSpec& spec);

struct SpliceRecord {
    std::size_t first = 0;  // inclusive frame indices
    std::size_t last = 0;
    int source_identity = 0;

    friend bool operator==(const SpliceRecord&, const SpliceRecord&) = default;
};

struct SyntheticDataset {
    std::vector<Tracklet> tracklets;
    std::map<std::string, std::vector<SpliceRecord>> splice_log;

    const Tracklet& find(const std::string& id) const;
};

SyntheticDataset generate(const SyntheticSpec& spec);

std::set<std::size_t> oracle_noise_indices(const SyntheticDataset& ds, const std::string& tracklet_id);

// Ground-truth identity of every frame, splice sources included.
std::vector<int> frame_identities(const SyntheticDataset& ds, const std::string& tracklet_id);

// The identity prototypes drawn for `spec` (exposed for property checks).
Matrix identity_prototypes(const SyntheticSpec& spec);

}  // namespace ssrc::synth
