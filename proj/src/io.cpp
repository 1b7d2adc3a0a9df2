#include "ssrc/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace ssrc::io {
namespace {

[[noreturn]] void fail(const std::string& kind, const std::string& msg) { throw IoError(kind, msg); }

const Json& require(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) fail("invalid_field", where + ": expected a JSON object");
    auto it = j.find(key);
    if (it == j.end()) fail("invalid_field", where + ": missing field '" + key + "'");
    return *it;
}

std::uint64_t as_uint(const Json& v, const std::string& what) {
    if (!v.is_number_unsigned()) fail("invalid_field", what + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

int as_int(const Json& v, const std::string& what) {
    if (!v.is_number_integer()) fail("invalid_field", what + ": expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < INT32_MIN || x > INT32_MAX) fail("invalid_field", what + ": out of range");
    return static_cast<int>(x);
}

double as_double(const Json& v, const std::string& what) {
    if (!v.is_number()) fail("invalid_field", what + ": expected a number");
    return v.get<double>();
}

std::string as_string(const Json& v, const std::string& what) {
    if (!v.is_string()) fail("invalid_field", what + ": expected a string");
    return v.get<std::string>();
}

const Json& as_array(const Json& v, const std::string& what) {
    if (!v.is_array()) fail("invalid_field", what + ": expected an array");
    return v;
}

void read_field(const Json& v, std::size_t& out, const std::string& what) { out = as_uint(v, what); }
void read_field(const Json& v, double& out, const std::string& what) { out = as_double(v, what); }

template <class S, class F>
void config_fields(S& c, F&& f) {
    f("d", c.d);
    f("l", c.l);
    f("M", c.M);
    f("sample_stride", c.sample_stride);
    f("delta", c.delta);
    f("eps", c.eps);
    f("min_samples", c.min_samples);
    f("k1", c.k1);
    f("k2", c.k2);
    f("lambda", c.lambda);
    f("tau", c.tau);
    f("alpha", c.alpha);
    f("gamma1", c.gamma1);
    f("gamma2", c.gamma2);
    f("batch_size", c.batch_size);
    f("epochs", c.epochs);
    f("iters_per_epoch", c.iters_per_epoch);
    f("lr", c.lr);
    f("lr_decay_factor", c.lr_decay_factor);
    f("lr_decay_period", c.lr_decay_period);
    f("weight_decay", c.weight_decay);
    f("merge_switch_epoch", c.merge_switch_epoch);
    f("rng_seed", c.rng_seed);
}

template <class S, class F>
void spec_fields(S& s, F&& f) {
    f("num_identities", s.num_identities);
    f("num_cameras", s.num_cameras);
    f("tracklets_per_identity", s.tracklets_per_identity);
    f("min_length", s.min_length);
    f("max_length", s.max_length);
    f("raw_dim", s.raw_dim);
    f("identity_separation", s.identity_separation);
    f("camera_shift_scale", s.camera_shift_scale);
    f("splice_rate", s.splice_rate);
    f("min_splice", s.min_splice);
    f("max_splice", s.max_splice);
    f("jitter_scale", s.jitter_scale);
    f("seed", s.seed);
}

template <class S, class Fields>
Json fields_to_json(const S& s, Fields fields) {
    Json j = Json::object();
    fields(s, [&](const char* key, const auto& v) { j[key] = v; });
    return j;
}

template <class S, class Fields>
S fields_from_json(const Json& j, S s, Fields fields, const std::string& what) {
    if (!j.is_object()) fail("invalid_field", what + ": expected a JSON object");
    std::set<std::string> known;
    fields(s, [&](const char* key, auto&) { known.insert(key); });
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) fail("invalid_field", what + ": unknown field '" + key + "'");
    fields(s, [&](const char* key, auto& v) {
        if (auto it = j.find(key); it != j.end()) read_field(*it, v, what + "." + key);
    });
    return s;
}

void dump_to(const Json& j, std::string& out) {
    switch (j.type()) {
        case Json::value_t::null: out += "null"; break;
        case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
        case Json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
        case Json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
        case Json::value_t::number_float: out += format_double(j.get<double>()); break;
        case Json::value_t::string: out += j.dump(); break;
        case Json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                dump_to(v, out);
            }
            out += ']';
            break;
        }
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) out += ',';
                first = false;
                out += Json(k).dump();
                out += ':';
                dump_to(v, out);
            }
            out += '}';
            break;
        }
        default: fail("invalid_field", "cannot serialize JSON value of this type");
    }
}

bool safe_id(const std::string& id) {
    if (id.empty() || id == "." || id == ".." || id.front() == '.') return false;
    return id.find_first_of("/\\") == std::string::npos && id.find('\0') == std::string::npos;
}

}  // namespace

std::string format_double(double x) {
    if (!std::isfinite(x)) fail("invalid_field", "non-finite number cannot be serialized");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string dump(const Json& j) {
    std::string out;
    dump_to(j, out);
    return out;
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) fail("io_error", "cannot open " + tmp.string() + " for writing");
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        f.close();
        if (!f) fail("io_error", "write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail("io_error", "cannot rename into " + path.string());
    }
}

void write_json(const fs::path& path, const Json& j) { write_file_atomic(path, dump(j) + "\n"); }

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("missing_file", "cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Json read_json(const fs::path& path) {
    const std::string text = read_text(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        fail("malformed_json", path.string() + ": " + e.what());
    }
}

std::string encode_f32(const Matrix& m) {
    std::string out(m.rows() * m.cols() * 4, '\0');
    std::size_t pos = 0;
    for (double x : m.data()) {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
        for (int b = 0; b < 4; ++b) out[pos++] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
    }
    return out;
}

Matrix decode_f32(const std::string& bytes, std::size_t rows, std::size_t cols) {
    if (bytes.size() != rows * cols * 4) fail("size_mismatch", "feature blob has the wrong size");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
        m.data()[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    return m;
}

void write_dataset(const synth::SyntheticDataset& ds, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail("io_error", "cannot create " + dir.string());

    const std::size_t d_raw = ds.tracklets.empty() ? 0 : ds.tracklets.front().seq.frames.cols();
    std::set<std::string> ids;
    Json entries = Json::array();
    for (const auto& t : ds.tracklets) {
        if (!safe_id(t.id())) fail("invalid_field", "tracklet id '" + t.id() + "' is not usable as a file name");
        if (!ids.insert(t.id()).second) fail("invalid_field", "duplicate tracklet id " + t.id());
        if (t.seq.frames.cols() != d_raw) fail("invalid_field", "tracklet " + t.id() + " has a different raw dimension");
        const std::string file = t.id() + ".f32";
        write_file_atomic(dir / file, encode_f32(t.seq.frames));

        Json e = Json::object();
        e["tracklet_id"] = t.id();
        e["frame_count"] = t.seq.length();
        e["feature_file"] = file;
        if (t.identity) e["identity"] = *t.identity;
        if (t.camera) e["camera"] = *t.camera;
        if (auto it = ds.splice_log.find(t.id()); it != ds.splice_log.end() && !it->second.empty()) {
            Json sp = Json::array();
            for (const auto& r : it->second) {
                Json s = Json::object();
                s["first"] = r.first;
                s["last"] = r.last;
                s["source_identity"] = r.source_identity;
                sp.push_back(std::move(s));
            }
            e["splices"] = std::move(sp);
        }
        entries.push_back(std::move(e));
    }
    Json manifest = Json::object();
    manifest["format_version"] = kFormatVersion;
    manifest["d_raw"] = d_raw;
    manifest["tracklets"] = std::move(entries);
    write_json(dir / "manifest.json", manifest);
}

synth::SyntheticDataset read_dataset(const fs::path& dir) {
    const Json m = read_json(dir / "manifest.json");
    const std::string where = "manifest.json";
    if (as_uint(require(m, "format_version", where), "format_version") != kFormatVersion)
        fail("invalid_field", "manifest.json: unsupported format_version");
    const std::size_t d_raw = as_uint(require(m, "d_raw", where), "d_raw");
    const Json& list = as_array(require(m, "tracklets", where), "tracklets");
    if (d_raw == 0 && !list.empty()) fail("invalid_field", "manifest.json: d_raw must be positive");

    synth::SyntheticDataset ds;
    std::set<std::string> ids;
    for (const Json& e : list) {
        const std::string id = as_string(require(e, "tracklet_id", where), "tracklet_id");
        const std::string ctx = "tracklet " + id;
        if (!ids.insert(id).second) fail("invalid_field", "duplicate tracklet id " + id);
        const std::size_t frames = as_uint(require(e, "frame_count", ctx), ctx + ".frame_count");
        const fs::path file = as_string(require(e, "feature_file", ctx), ctx + ".feature_file");
        if (file.is_absolute()) fail("invalid_field", ctx + ": feature_file must be a relative path");
        for (const auto& part : file)
            if (part == "..") fail("invalid_field", ctx + ": feature_file must stay inside the dataset directory");

        const fs::path full = dir / file;
        if (!fs::is_regular_file(full)) fail("missing_file", ctx + ": feature file " + full.string() + " not found");
        const std::uintmax_t expected = static_cast<std::uintmax_t>(frames) * d_raw * 4;
        const std::uintmax_t actual = fs::file_size(full);
        if (actual != expected)
            fail("size_mismatch", ctx + ": " + file.string() + " holds " + std::to_string(actual) + " bytes, manifest implies " +
                                      std::to_string(expected));

        Tracklet t;
        t.seq.id = id;
        t.seq.frames = decode_f32(read_text(full), frames, d_raw);
        if (auto it = e.find("identity"); it != e.end() && !it->is_null()) t.identity = as_int(*it, ctx + ".identity");
        if (auto it = e.find("camera"); it != e.end() && !it->is_null()) t.camera = as_int(*it, ctx + ".camera");
        if (auto it = e.find("splices"); it != e.end()) {
            auto& log = ds.splice_log[id];
            for (const Json& s : as_array(*it, ctx + ".splices")) {
                synth::SpliceRecord r;
                r.first = as_uint(require(s, "first", ctx), ctx + ".splices.first");
                r.last = as_uint(require(s, "last", ctx), ctx + ".splices.last");
                r.source_identity = as_int(require(s, "source_identity", ctx), ctx + ".splices.source_identity");
                if (r.first > r.last || r.last >= frames) fail("invalid_field", ctx + ": splice range outside the tracklet");
                log.push_back(r);
            }
        }
        ds.tracklets.push_back(std::move(t));
    }
    return ds;
}

Json to_json(const TrainConfig& cfg) {
    return fields_to_json(cfg, [](auto& c, auto&& f) { config_fields(c, f); });
}

TrainConfig config_from_json(const Json& j) {
    TrainConfig cfg = fields_from_json(j, default_config(), [](auto& c, auto&& f) { config_fields(c, f); }, "config");
    if (auto v = validate_config(cfg); !v.empty())
        fail("invalid_field", "config: " + v.front().field + " violates " + v.front().rule);
    return cfg;
}

Json to_json(const synth::SyntheticSpec& spec) {
    return fields_to_json(spec, [](auto& s, auto&& f) { spec_fields(s, f); });
}

synth::SyntheticSpec spec_from_json(const Json& j) {
    auto spec = fields_from_json(j, synth::SyntheticSpec{}, [](auto& s, auto&& f) { spec_fields(s, f); }, "spec");
    if (auto v = synth::validate_spec(spec); !v.empty()) fail("invalid_field", "spec: " + v.front());
    return spec;
}

Json to_json(const Encoder& enc) {
    Json j = Json::object();
    j["format_version"] = kFormatVersion;
    j["raw_dim"] = enc.raw_dim();
    j["d"] = enc.dim();
    Json w = Json::array();
    for (double x : enc.weights().data()) w.push_back(x);
    j["weights"] = std::move(w);
    return j;
}

Encoder encoder_from_json(const Json& j) {
    const std::string where = "weights";
    const std::size_t raw = as_uint(require(j, "raw_dim", where), "weights.raw_dim");
    const std::size_t d = as_uint(require(j, "d", where), "weights.d");
    const Json& w = as_array(require(j, "weights", where), "weights.weights");
    if (raw == 0 || d == 0) fail("invalid_field", "weights: dimensions must be positive");
    if (w.size() != raw * d) fail("size_mismatch", "weights: expected " + std::to_string(raw * d) + " values");
    Matrix m(raw, d);
    for (std::size_t i = 0; i < w.size(); ++i) m.data()[i] = as_double(w[i], "weights.weights");
    return Encoder(std::move(m));
}

Json to_json(const experiment::Split& split) {
    Json j = Json::object();
    j["query"] = split.query;
    j["gallery"] = split.gallery;
    return j;
}

experiment::Split split_from_json(const Json& j) {
    experiment::Split s;
    for (const Json& v : as_array(require(j, "query", "split"), "split.query")) s.query.push_back(as_string(v, "split.query"));
    for (const Json& v : as_array(require(j, "gallery", "split"), "split.gallery"))
        s.gallery.push_back(as_string(v, "split.gallery"));
    return s;
}

Json to_json(const trainer::EpochReport& r) {
    Json j = Json::object();
    j["epoch"] = r.epoch;
    j["num_units"] = r.num_units;
    j["num_clusters"] = r.num_clusters;
    j["num_outliers"] = r.num_outliers;
    j["num_merged"] = r.num_merged;
    j["mode"] = to_string(r.mode);
    j["mean_loss"] = r.mean_loss;
    j["filtered_frames"] = r.filtered_frames;
    j["iterations"] = r.iterations;
    j["lr"] = r.lr;
    j["skipped"] = r.skipped;
    return j;
}

std::string reports_jsonl(const std::vector<trainer::EpochReport>& reports) {
    std::string out;
    for (const auto& r : reports) out += dump(to_json(r)) + "\n";
    return out;
}

Json labels_to_json(const trainer::PseudoLabels& pl) {
    Json j = Json::object();
    j["format_version"] = kFormatVersion;
    j["mode"] = to_string(pl.labels.mode);
    j["num_clusters"] = pl.labels.num_clusters;
    j["num_units"] = pl.units.size();
    j["num_outliers"] = pl.labels.num_outliers();
    Json units = Json::array();
    for (std::size_t u = 0; u < pl.units.size(); ++u) {
        const auto& st = pl.units[u];
        Json e = Json::object();
        e["tracklet_id"] = st.parent_id;
        e["segment_index"] = st.segment_index;
        e["frames"] = nftp::frames_of(pl.parts[st.parent], st);
        e["label"] = pl.labels.assignment[u];
        e["final_label"] = experiment::final_label(pl.labels, u);
        units.push_back(std::move(e));
    }
    j["units"] = std::move(units);
    j["positive_sets"] = pl.labels.positive_sets;
    j["refined"] = pl.labels.refined;
    return j;
}

std::vector<FrameLabels> frame_labels_from_json(const Json& j) {
    std::vector<FrameLabels> out;
    for (const Json& e : as_array(require(j, "units", "labels"), "labels.units")) {
        FrameLabels f;
        f.tracklet_id = as_string(require(e, "tracklet_id", "labels unit"), "labels.units.tracklet_id");
        for (const Json& v : as_array(require(e, "frames", "labels unit"), "labels.units.frames"))
            f.frames.push_back(as_uint(v, "labels.units.frames"));
        f.label = as_int(require(e, "final_label", "labels unit"), "labels.units.final_label");
        if (f.label < 0) fail("invalid_field", "labels: negative label");
        out.push_back(std::move(f));
    }
    return out;
}

Json to_json(const eval::RetrievalResult& r) {
    Json j = Json::object();
    j["mAP"] = r.mAP;
    j["rank1"] = r.rank1();
    j["cmc"] = r.cmc;
    j["valid_queries"] = r.valid_queries;
    j["skipped_queries"] = r.skipped_queries;
    return j;
}

Json to_json(const eval::ClusterStats& s) {
    Json j = Json::object();
    j["correct"] = s.correct;
    j["cross_camera"] = s.cross_camera;
    j["incorrect"] = s.incorrect;
    j["total_clusters"] = s.total();
    j["total_identities"] = s.total_identities;
    return j;
}

Json to_json(const eval::PairwiseScores& s) {
    Json j = Json::object();
    j["precision"] = s.precision;
    j["recall"] = s.recall;
    j["f1"] = s.f1;
    return j;
}

Json summary_json(const experiment::RunMetrics& m) {
    Json j = Json::object();
    j["mAP"] = m.retrieval.mAP;
    j["rank1"] = m.retrieval.rank1();
    j["f1"] = m.quality.pairwise.f1;
    j["precision"] = m.quality.pairwise.precision;
    j["recall"] = m.quality.pairwise.recall;
    j["correct"] = m.quality.stats.correct;
    j["cross_camera"] = m.quality.stats.cross_camera;
    j["incorrect"] = m.quality.stats.incorrect;
    return j;
}

std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        const auto& f = fields[i];
        if (f.find_first_of(",\"\r\n") == std::string::npos) {
            out += f;
            continue;
        }
        out += '"';
        for (char c : f) {
            if (c == '"') out += '"';
            out += c;
        }
        out += '"';
    }
    out += "\r\n";
    return out;
}

}  // namespace ssrc::io
