#include "ssrc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "ssrc/rng.hpp"

namespace ssrc::synth {
namespace {

enum Stream : std::uint64_t { kPrototypes = 1, kCameras = 2, kIdentityCameras = 3, kTracklet = 4 };

Vec random_unit(Rng& rng, std::size_t dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec v(dim);
    for (;;) {
        for (double& x : v) x = g(rng);
        if (norm(v) > 1e-12) break;
    }
    normalize_in_place(v);
    return v;
}

std::string tracklet_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%05zu", index);
    return buf;
}

}  // namespace

std::vector<std::string> validate_spec(const SyntheticSpec& s) {
    std::vector<std::string> v;
    if (s.num_identities < 1) v.emplace_back("num_identities >= 1");
    if (s.num_cameras < 1) v.emplace_back("num_cameras >= 1");
    if (s.tracklets_per_identity < 1) v.emplace_back("tracklets_per_identity >= 1");
    if (s.raw_dim < 1) v.emplace_back("raw_dim >= 1");
    if (s.min_length < 1 || s.min_length > s.max_length) v.emplace_back("1 <= min_length <= max_length");
    if (s.min_splice < 1 || s.min_splice > s.max_splice) v.emplace_back("1 <= min_splice <= max_splice");
    if (!(s.splice_rate >= 0.0 && s.splice_rate <= 1.0)) v.emplace_back("splice_rate in [0,1]");
    if (s.max_splice >= s.min_length) v.emplace_back("max_splice < min_length");
    if (s.splice_rate > 0.0 && s.num_identities < 2) v.emplace_back("splicing needs >= 2 identities");
    if (!(s.identity_separation >= 0.0 && s.identity_separation < M_PI)) v.emplace_back("identity_separation in [0, pi)");
    if (!(s.camera_shift_scale >= 0.0)) v.emplace_back("camera_shift_scale >= 0");
    if (!(s.jitter_scale >= 0.0)) v.emplace_back("jitter_scale >= 0");
    return v;
}

const Tracklet& SyntheticDataset::find(const std::string& id) const {
    for (const auto& t : tracklets)
        if (t.id() == id) return t;
    throw std::out_of_range("unknown tracklet id: " + id);
}

Matrix identity_prototypes(const SyntheticSpec& spec) {
    Rng rng = derive_rng(spec.seed, kPrototypes);
    const double max_cos = std::cos(spec.identity_separation);
    Matrix protos(0, spec.raw_dim);
    constexpr int kMaxAttempts = 100000;
    for (std::size_t i = 0; i < spec.num_identities; ++i) {
        int attempt = 0;
        for (;; ++attempt) {
            if (attempt == kMaxAttempts)
                throw std::invalid_argument("identity_separation too large for raw_dim / num_identities");
            Vec cand = random_unit(rng, spec.raw_dim);
            bool ok = true;
            for (std::size_t j = 0; j < protos.rows() && ok; ++j) ok = dot(cand, protos.row(j)) <= max_cos;
            if (ok) {
                protos.append_row(cand);
                break;
            }
        }
    }
    return protos;
}

SyntheticDataset generate(const SyntheticSpec& spec) {
    if (auto v = validate_spec(spec); !v.empty()) {
        std::string msg = "invalid synthetic spec:";
        for (const auto& s : v) msg += " [" + s + "]";
        throw std::invalid_argument(msg);
    }
    const Matrix protos = identity_prototypes(spec);

    Matrix biases(spec.num_cameras, spec.raw_dim);
    {
        Rng rng = derive_rng(spec.seed, kCameras);
        for (std::size_t c = 0; c < spec.num_cameras; ++c) {
            Vec b = random_unit(rng, spec.raw_dim);
            for (double& x : b) x *= spec.camera_shift_scale;
            biases.set_row(c, b);
        }
    }

    SyntheticDataset ds;
    ds.tracklets.reserve(spec.num_identities * spec.tracklets_per_identity);
    for (std::size_t id = 0; id < spec.num_identities; ++id) {
        // Each identity visits cameras in a random order, so its tracklets
        // land in distinct cameras whenever there are enough of them.
        std::vector<int> cams(spec.num_cameras);
        std::iota(cams.begin(), cams.end(), 0);
        Rng cam_rng = derive_rng(spec.seed, kIdentityCameras, id);
        std::shuffle(cams.begin(), cams.end(), cam_rng);

        for (std::size_t k = 0; k < spec.tracklets_per_identity; ++k) {
            const std::size_t index = id * spec.tracklets_per_identity + k;
            Rng rng = derive_rng(spec.seed, kTracklet, index);
            std::normal_distribution<double> g(0.0, 1.0);
            std::uniform_real_distribution<double> u01(0.0, 1.0);

            const int camera = cams[k % cams.size()];
            const std::size_t len = uniform_index(rng, spec.min_length, spec.max_length);

            std::vector<int> frame_id(len, static_cast<int>(id));
            Tracklet t;
            t.seq.id = tracklet_name(index);
            t.identity = static_cast<int>(id);
            t.camera = camera;

            if (u01(rng) < spec.splice_rate) {
                const std::size_t slen = uniform_index(rng, spec.min_splice, spec.max_splice);
                const std::size_t start = uniform_index(rng, 0, len - slen);
                std::size_t src = uniform_index(rng, 0, spec.num_identities - 2);
                if (src >= id) ++src;
                std::fill(frame_id.begin() + static_cast<std::ptrdiff_t>(start),
                          frame_id.begin() + static_cast<std::ptrdiff_t>(start + slen), static_cast<int>(src));
                ds.splice_log[t.seq.id].push_back({start, start + slen - 1, static_cast<int>(src)});
            }

            t.seq.frames = Matrix(len, spec.raw_dim);
            for (std::size_t f = 0; f < len; ++f) {
                auto p = protos.row(static_cast<std::size_t>(frame_id[f]));
                auto b = biases.row(static_cast<std::size_t>(camera));
                auto dst = t.seq.frames.row(f);
                for (std::size_t c = 0; c < spec.raw_dim; ++c) {
                    const double noise = spec.jitter_scale > 0.0 ? spec.jitter_scale * g(rng) : 0.0;
                    dst[c] = p[c] + b[c] + noise;
                }
            }
            ds.tracklets.push_back(std::move(t));
        }
    }
    return ds;
}

std::set<std::size_t> oracle_noise_indices(const SyntheticDataset& ds, const std::string& tracklet_id) {
    (void)ds.find(tracklet_id);
    std::set<std::size_t> out;
    if (auto it = ds.splice_log.find(tracklet_id); it != ds.splice_log.end()) {
        for (const auto& r : it->second)
            for (std::size_t f = r.first; f <= r.last; ++f) out.insert(f);
    }
    return out;
}

std::vector<int> frame_identities(const SyntheticDataset& ds, const std::string& tracklet_id) {
    const Tracklet& t = ds.find(tracklet_id);
    std::vector<int> ids(t.seq.length(), t.identity.value_or(-1));
    if (auto it = ds.splice_log.find(tracklet_id); it != ds.splice_log.end()) {
        for (const auto& r : it->second)
            for (std::size_t f = r.first; f <= r.last; ++f) ids[f] = r.source_identity;
    }
    return ids;
}

}  // namespace ssrc::synth
