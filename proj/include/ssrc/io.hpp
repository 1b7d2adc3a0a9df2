#pragma once
// On-disk formats: dataset directories (manifest.json + raw f32 feature
// files), JSON configs and results, JSON-lines epoch reports and CSV tables.
// Every JSON document is written with a fixed key order and doubles printed
// with 17 significant digits, so reruns produce identical bytes.

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ssrc/core.hpp"
#include "ssrc/encoder.hpp"
#include "ssrc/eval.hpp"
#include "ssrc/experiment.hpp"
#include "ssrc/synth.hpp"
#include "ssrc/trainer.hpp"

namespace ssrc::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr int kFormatVersion = 1;

/// Failure while reading or writing an artifact. `kind` is a stable,
/// machine-readable class: missing_file, size_mismatch, malformed_json,
/// invalid_field, io_error.
class IoError : public std::runtime_error {
public:
    IoError(std::string kind, const std::string& message) : std::runtime_error(message), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

/// Serializes with insertion-ordered keys, no whitespace, %.17g doubles.
/// Throws IoError(invalid_field) on NaN or infinity.
std::string dump(const Json& j);

// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const fs::path& path, const std::string& bytes);
void write_json(const fs::path& path, const Json& j);
std::string read_text(const fs::path& path);
Json read_json(const fs::path& path);

// Datasets. Splice records travel in an optional per-tracklet "splices"
// array so frame-level scoring survives a round trip.
void write_dataset(const synth::SyntheticDataset& ds, const fs::path& dir);
synth::SyntheticDataset read_dataset(const fs::path& dir);

// Little-endian binary32, row-major.
std::string encode_f32(const Matrix& m);
Matrix decode_f32(const std::string& bytes, std::size_t rows, std::size_t cols);

// Configs: missing keys keep their defaults, unknown keys are rejected.
Json to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const Json& j);
Json to_json(const synth::SyntheticSpec& spec);
synth::SyntheticSpec spec_from_json(const Json& j);

Json to_json(const Encoder& enc);
Encoder encoder_from_json(const Json& j);

Json to_json(const experiment::Split& split);
experiment::Split split_from_json(const Json& j);

/// Wall-clock time is left out so reports are reproducible.
Json to_json(const trainer::EpochReport& r);
std::string reports_jsonl(const std::vector<trainer::EpochReport>& reports);

/// Units with their parent frames, sub-cluster labels, final labels and
/// positive sets.
Json labels_to_json(const trainer::PseudoLabels& pl);

struct FrameLabels {
    std::string tracklet_id;
    std::vector<std::size_t> frames;
    int label = kOutlier;  // final label
};
std::vector<FrameLabels> frame_labels_from_json(const Json& j);

Json to_json(const eval::RetrievalResult& r);
Json to_json(const eval::ClusterStats& s);
Json to_json(const eval::PairwiseScores& s);

/// Final retrieval and label-quality numbers of one run.
Json summary_json(const experiment::RunMetrics& m);

/// One RFC-4180 record (CRLF-terminated); fields are quoted when needed.
std::string csv_row(const std::vector<std::string>& fields);
std::string format_double(double x);

}  // namespace ssrc::io
