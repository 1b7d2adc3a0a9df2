#include "ssrc/nftp.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ssrc::nftp {

Vec center_feature(const Matrix& frames) {
    if (frames.empty()) throw std::invalid_argument("center_feature: empty tracklet");
    std::vector<std::size_t> all(frames.rows());
    std::iota(all.begin(), all.end(), 0);
    return mean_of_rows(frames, all);
}

double frame_distance(std::span<const double> f, std::span<const double> c) {
    const double d = 1.0 - cosine(f, c);
    return d * d;
}

FilteredTracklet noise_filter(const Matrix& frames, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("noise_filter: delta must be > 0");
    const Vec center = center_feature(frames);
    const std::size_t L = frames.rows();

    std::vector<double> dist(L);
    double sum = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
        dist[j] = frame_distance(frames.row(j), center);
        sum += dist[j];
    }

    FilteredTracklet out;
    out.threshold = sum / (static_cast<double>(L) * delta);
    for (std::size_t j = 0; j < L; ++j) (dist[j] > out.threshold ? out.filtered : out.surviving).push_back(j);

    if (out.surviving.empty()) {
        const auto best = static_cast<std::size_t>(std::min_element(dist.begin(), dist.end()) - dist.begin());
        out.surviving.push_back(best);
        out.filtered.erase(std::find(out.filtered.begin(), out.filtered.end(), best));
    }
    return out;
}

FilteredTracklet keep_all(std::size_t num_frames) {
    FilteredTracklet out;
    out.surviving.resize(num_frames);
    std::iota(out.surviving.begin(), out.surviving.end(), 0);
    return out;
}

std::vector<SubTracklet> partition(const FilteredTracklet& ft, std::size_t stride) {
    if (stride < 1) throw std::invalid_argument("partition: stride must be >= 1");
    const std::size_t n = ft.surviving.size();
    std::vector<SubTracklet> out;
    if (n == 0) return out;
    const std::size_t segments = std::max<std::size_t>(1, n / stride);
    for (std::size_t t = 0; t < segments; ++t) {
        SubTracklet st;
        st.parent = ft.parent;
        st.parent_id = ft.parent_id;
        st.segment_index = static_cast<int>(t + 1);
        st.first = t * stride;
        st.last = (t + 1 == segments) ? n - 1 : (t + 1) * stride - 1;
        out.push_back(std::move(st));
    }
    return out;
}

std::size_t max_start(std::size_t length, std::size_t M, std::size_t stride) {
    const std::size_t span = (M - 1) * stride;
    return span < length ? length - 1 - span : length - 1;
}

std::vector<std::size_t> strided_window(std::size_t length, std::size_t M, std::size_t stride, std::size_t start) {
    std::vector<std::size_t> idx(M);
    for (std::size_t k = 0; k < M; ++k) idx[k] = (start + k * stride) % length;
    return idx;
}

std::vector<std::size_t> sample_frames(std::size_t length, std::size_t M, std::size_t stride, Rng& rng) {
    if (length == 0) throw std::invalid_argument("sample_frames: empty sub-tracklet");
    if (M < 1 || stride < 1) throw std::invalid_argument("sample_frames: M and stride must be >= 1");
    const std::size_t start = uniform_index(rng, 0, max_start(length, M, stride));
    return strided_window(length, M, stride, start);
}

std::vector<PartitionedTracklet> nftp_all(std::span<const FrameSequence> seqs, std::span<const Matrix> features,
                                          const TrainConfig& cfg, NftpOptions opts) {
    if (seqs.size() != features.size()) throw std::invalid_argument("nftp_all: sequence/feature count mismatch");
    std::vector<PartitionedTracklet> out(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        auto& p = out[i];
        p.filtered = opts.filter ? noise_filter(features[i], cfg.delta) : keep_all(features[i].rows());
        p.filtered.parent = i;
        p.filtered.parent_id = seqs[i].id;
        p.subs = opts.partition ? partition(p.filtered, cfg.l)
                                : partition(p.filtered, std::numeric_limits<std::size_t>::max());
    }
    return out;
}

std::vector<SubTracklet> flatten(const std::vector<PartitionedTracklet>& parts) {
    std::vector<SubTracklet> out;
    for (const auto& p : parts) out.insert(out.end(), p.subs.begin(), p.subs.end());
    return out;
}

std::vector<std::size_t> frames_of(const PartitionedTracklet& part, const SubTracklet& st) {
    const auto& s = part.filtered.surviving;
    return {s.begin() + static_cast<std::ptrdiff_t>(st.first), s.begin() + static_cast<std::ptrdiff_t>(st.last) + 1};
}

}  // namespace ssrc::nftp
