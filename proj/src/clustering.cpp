#include "ssrc/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

namespace ssrc::clustering {
namespace {

void require_unit_rows(const Matrix& f, const char* who) {
    for (std::size_t i = 0; i < f.rows(); ++i) {
        if (std::abs(norm(f.row(i)) - 1.0) > 1e-4)
            throw std::invalid_argument(std::string(who) + ": row " + std::to_string(i) + " is not L2-normalized");
    }
}

// rank[i] lists all samples by ascending distance from i, self first, ties by index.
std::vector<std::vector<std::size_t>> rank_lists(const Matrix& dist) {
    const std::size_t n = dist.rows();
    std::vector<std::vector<std::size_t>> rank(n, std::vector<std::size_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = rank[i];
        std::iota(r.begin(), r.end(), 0);
        std::sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) {
            if (a == i || b == i) return a == i && b != i;
            const double da = dist(i, a), db = dist(i, b);
            return da != db ? da < db : a < b;
        });
    }
    return rank;
}

}  // namespace

DistanceMatrix cosine_distance_matrix(const Matrix& features) {
    require_unit_rows(features, "cosine_distance_matrix");
    const std::size_t n = features.rows();
    DistanceMatrix out{Matrix(n, n), DistanceKind::Cosine, false};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::clamp(1.0 - dot(features.row(i), features.row(j)), 0.0, 2.0);
            out.values(i, j) = d;
            out.values(j, i) = d;
        }
    }
    return out;
}

DistanceMatrix k_reciprocal_jaccard(const Matrix& features, std::size_t k1, std::size_t k2) {
    if (k2 < 1 || k1 <= k2) throw std::invalid_argument("k_reciprocal_jaccard: need k1 > k2 >= 1");
    require_unit_rows(features, "k_reciprocal_jaccard");
    const std::size_t n = features.rows();
    if (n <= k1) {
        DistanceMatrix d = cosine_distance_matrix(features);
        d.fallback = true;
        return d;
    }

    // Squared euclidean distance between unit vectors.
    Matrix sq(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::max(0.0, 2.0 - 2.0 * dot(features.row(i), features.row(j)));
            sq(i, j) = d;
            sq(j, i) = d;
        }

    const auto rank = rank_lists(sq);
    std::vector<std::vector<std::size_t>> pos(n, std::vector<std::size_t>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < n; ++r) pos[i][rank[i][r]] = r;

    auto reciprocal = [&](std::size_t i, std::size_t k) {
        std::vector<std::size_t> out;
        const std::size_t top = std::min(k + 1, n);
        for (std::size_t r = 0; r < top; ++r) {
            const std::size_t c = rank[i][r];
            if (pos[c][i] < top) out.push_back(c);
        }
        return out;
    };

    const auto half = static_cast<std::size_t>(std::nearbyint(static_cast<double>(k1) / 2.0));
    Matrix weights(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto base = reciprocal(i, k1);
        std::vector<char> in_base(n, 0);
        for (std::size_t c : base) in_base[c] = 1;

        std::vector<char> in_expanded = in_base;
        for (std::size_t cand : base) {
            const auto cand_set = reciprocal(cand, half);
            std::size_t overlap = 0;
            for (std::size_t c : cand_set) overlap += in_base[c];
            if (3 * overlap > 2 * cand_set.size())
                for (std::size_t c : cand_set) in_expanded[c] = 1;
        }

        double total = 0.0;
        for (std::size_t c = 0; c < n; ++c)
            if (in_expanded[c]) total += (weights(i, c) = std::exp(-sq(i, c)));
        for (std::size_t c = 0; c < n; ++c) weights(i, c) /= total;
    }

    if (k2 > 1) {
        Matrix expanded(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = expanded.row(i);
            for (std::size_t r = 0; r < k2; ++r) {
                auto src = weights.row(rank[i][r]);
                for (std::size_t c = 0; c < n; ++c) dst[c] += src[c];
            }
            for (double& x : dst) x /= static_cast<double>(k2);
        }
        weights = std::move(expanded);
    }

    // Inverted index over non-zero columns.
    std::vector<std::vector<std::size_t>> holders(n);
    std::vector<double> row_sum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < n; ++c)
            if (weights(i, c) != 0.0) {
                holders[c].push_back(i);
                row_sum[i] += weights(i, c);
            }

    DistanceMatrix out{Matrix(n, n), DistanceKind::Jaccard, false};
    std::vector<double> shared(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(shared.begin(), shared.end(), 0.0);
        for (std::size_t c = 0; c < n; ++c) {
            const double w = weights(i, c);
            if (w == 0.0) continue;
            for (std::size_t k : holders[c])
                if (k > i) shared[k] += std::min(w, weights(k, c));
        }
        for (std::size_t k = i + 1; k < n; ++k) {
            const double union_mass = row_sum[i] + row_sum[k] - shared[k];
            const double d = union_mass > 0.0 ? std::clamp(1.0 - shared[k] / union_mass, 0.0, 1.0) : 1.0;
            out.values(i, k) = d;
            out.values(k, i) = d;
        }
    }
    return out;
}

std::vector<int> dbscan(const DistanceMatrix& dist, double eps, std::size_t min_samples) {
    if (!(eps > 0.0)) throw std::invalid_argument("dbscan: eps must be > 0");
    if (min_samples < 2) throw std::invalid_argument("dbscan: min_samples must be >= 2");
    const std::size_t n = dist.size();

    std::vector<std::vector<std::size_t>> nbrs(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (dist(i, j) <= eps) nbrs[i].push_back(j);

    std::vector<int> label(n, kOutlier);
    int next = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (label[seed] != kOutlier || nbrs[seed].size() < min_samples) continue;
        const int cur = ++next;
        label[seed] = cur;
        std::deque<std::size_t> frontier{seed};
        while (!frontier.empty()) {
            const std::size_t p = frontier.front();
            frontier.pop_front();
            if (nbrs[p].size() < min_samples) continue;  // border: claimed, not expanded
            for (std::size_t q : nbrs[p]) {
                if (label[q] != kOutlier) continue;
                label[q] = cur;
                frontier.push_back(q);
            }
        }
    }
    return label;
}

LabelState singleton_state(std::vector<int> assignment) {
    LabelState s;
    s.num_clusters = assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end());
    s.assignment = std::move(assignment);
    s.positive_sets.resize(static_cast<std::size_t>(s.num_clusters));
    for (int c = 1; c <= s.num_clusters; ++c) s.positive_sets[static_cast<std::size_t>(c - 1)] = {c};
    s.mode = MergeMode::Direct;
    return s;
}

LabelState sub_cluster_generate(const Matrix& features, const TrainConfig& cfg) {
    if (features.rows() == 0) return LabelState{};
    const DistanceMatrix d = k_reciprocal_jaccard(features, cfg.k1, cfg.k2);
    return singleton_state(dbscan(d, cfg.eps, cfg.min_samples));
}

}  // namespace ssrc::clustering
