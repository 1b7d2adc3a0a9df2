#include "ssrc/eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace ssrc::eval {
namespace {

double pairs(std::size_t n) { return n < 2 ? 0.0 : static_cast<double>(n) * static_cast<double>(n - 1) / 2.0; }

}  // namespace

double average_precision(const std::vector<bool>& ranked_hits) {
    // Extended precision so that short textbook cases round to the exact ratio.
    std::size_t hits = 0;
    long double sum = 0.0L;
    for (std::size_t r = 0; r < ranked_hits.size(); ++r) {
        if (!ranked_hits[r]) continue;
        ++hits;
        sum += static_cast<long double>(hits) / static_cast<long double>(r + 1);
    }
    return hits ? static_cast<double>(sum / static_cast<long double>(hits)) : 0.0;
}

RetrievalResult map_cmc(const Matrix& query, std::span<const SampleMeta> query_meta, const Matrix& gallery,
                        std::span<const SampleMeta> gallery_meta, std::size_t k_max) {
    if (query.rows() != query_meta.size() || gallery.rows() != gallery_meta.size())
        throw std::invalid_argument("map_cmc: feature/meta count mismatch");
    if (k_max < 1) throw std::invalid_argument("map_cmc: k_max must be >= 1");

    RetrievalResult out;
    out.cmc.assign(k_max, 0.0);
    double ap_sum = 0.0;
    std::vector<std::size_t> order(gallery.rows());
    std::vector<double> dist(gallery.rows());

    for (std::size_t q = 0; q < query.rows(); ++q) {
        for (std::size_t g = 0; g < gallery.rows(); ++g) dist[g] = 1.0 - dot(query.row(q), gallery.row(g));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

        std::vector<bool> hits;
        hits.reserve(order.size());
        for (std::size_t g : order) {
            const auto& qm = query_meta[q];
            const auto& gm = gallery_meta[g];
            if (gm.identity == qm.identity && gm.camera == qm.camera) continue;
            hits.push_back(gm.identity == qm.identity);
        }
        const auto first = std::find(hits.begin(), hits.end(), true);
        if (first == hits.end()) {
            ++out.skipped_queries;
            continue;
        }
        ++out.valid_queries;
        ap_sum += average_precision(hits);
        const auto rank = static_cast<std::size_t>(first - hits.begin());
        for (std::size_t k = rank; k < k_max; ++k) out.cmc[k] += 1.0;
    }
    if (out.valid_queries > 0) {
        out.mAP = ap_sum / static_cast<double>(out.valid_queries);
        for (double& c : out.cmc) c /= static_cast<double>(out.valid_queries);
    }
    return out;
}

PairwiseScores pairwise_prf(std::span<const int> pseudo, std::span<const int> gt) {
    if (pseudo.size() != gt.size()) throw std::invalid_argument("pairwise_prf: size mismatch");
    std::map<int, std::size_t> by_pseudo, by_gt;
    std::map<std::pair<int, int>, std::size_t> joint;
    std::size_t labeled = 0;
    for (std::size_t i = 0; i < pseudo.size(); ++i) {
        if (pseudo[i] == kOutlier) continue;
        ++labeled;
        ++by_pseudo[pseudo[i]];
        ++by_gt[gt[i]];
        ++joint[{pseudo[i], gt[i]}];
    }
    if (labeled < 2) throw std::invalid_argument("pairwise_prf: fewer than 2 labelled samples");

    double tp = 0.0, predicted = 0.0, actual = 0.0;
    for (const auto& [_, n] : joint) tp += pairs(n);
    for (const auto& [_, n] : by_pseudo) predicted += pairs(n);
    for (const auto& [_, n] : by_gt) actual += pairs(n);

    PairwiseScores s;
    s.precision = predicted > 0.0 ? tp / predicted : 0.0;
    s.recall = actual > 0.0 ? tp / actual : 0.0;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

ClusterStats cluster_stats(std::span<const int> pseudo, std::span<const int> gt, std::span<const int> cameras) {
    if (pseudo.size() != gt.size() || pseudo.size() != cameras.size())
        throw std::invalid_argument("cluster_stats: size mismatch");
    std::map<int, std::set<int>> ids, cams;
    std::set<int> all_ids(gt.begin(), gt.end());
    for (std::size_t i = 0; i < pseudo.size(); ++i) {
        if (pseudo[i] == kOutlier) continue;
        ids[pseudo[i]].insert(gt[i]);
        cams[pseudo[i]].insert(cameras[i]);
    }
    ClusterStats s;
    s.total_identities = all_ids.size();
    for (const auto& [label, members] : ids) {
        if (members.size() == 1) {
            ++s.correct;
            if (cams[label].size() >= 2) ++s.cross_camera;
        } else {
            ++s.incorrect;
        }
    }
    return s;
}

}  // namespace ssrc::eval
