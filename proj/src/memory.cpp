#include "ssrc/memory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace ssrc::memory {
namespace {

const Matrix& bank_of(const MemoryBanks& b, Bank which) { return which == Bank::Centroid ? b.centroid : b.hard; }

Vec logits(std::span<const double> v, const Matrix& bank, double tau) {
    if (v.size() != bank.cols()) throw std::invalid_argument("loss: embedding dimension does not match memory");
    Vec z(bank.rows());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = dot(v, bank.row(k)) / tau;
    return z;
}

void require_label(int label, std::size_t n) {
    if (label < 1 || static_cast<std::size_t>(label) > n) throw std::out_of_range("loss: label outside 1..n");
}

// Adds weight * (-log softmax_target over the classes where include[k]) to
// `value` and its logit gradient to `dz`.
void add_softmax_term(const Vec& z, std::size_t target, const std::vector<char>& include, double weight, double& value,
                      Vec& dz) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < z.size(); ++k)
        if (include[k]) m = std::max(m, z[k]);
    double s = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k)
        if (include[k]) s += std::exp(z[k] - m);
    value += weight * (std::log(s) + m - z[target]);
    for (std::size_t k = 0; k < z.size(); ++k)
        if (include[k]) dz[k] += weight * std::exp(z[k] - m) / s;
    dz[target] -= weight;
}

Vec grad_from_logits(const Vec& dz, const Matrix& bank, double tau) {
    Vec g(bank.cols(), 0.0);
    for (std::size_t k = 0; k < dz.size(); ++k) {
        if (dz[k] == 0.0) continue;
        auto row = bank.row(k);
        for (std::size_t c = 0; c < g.size(); ++c) g[c] += dz[k] * row[c];
    }
    for (double& x : g) x /= tau;
    return g;
}

}  // namespace

MemoryBanks init_memory(const Matrix& features, std::span<const int> labels, int num_clusters, double tau, double alpha) {
    if (labels.size() != features.rows()) throw std::invalid_argument("init_memory: label/feature count mismatch");
    const auto n = static_cast<std::size_t>(num_clusters);
    Matrix sums(n, features.cols());
    std::vector<std::size_t> count(n, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kOutlier) continue;
        require_label(labels[i], n);
        const auto j = static_cast<std::size_t>(labels[i] - 1);
        auto dst = sums.row(j);
        auto src = features.row(i);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
        ++count[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (count[j] == 0) throw std::invalid_argument("init_memory: cluster " + std::to_string(j + 1) + " has no members");
        normalize_in_place(sums.row(j));
    }
    return MemoryBanks{sums, sums, tau, alpha};
}

LossOutput infonce_loss(std::span<const double> v, int label, const MemoryBanks& banks, Bank which) {
    const Matrix& bank = bank_of(banks, which);
    require_label(label, bank.rows());
    const Vec z = logits(v, bank, banks.tau);
    const std::vector<char> all(z.size(), 1);
    LossOutput out;
    Vec dz(z.size(), 0.0);
    add_softmax_term(z, static_cast<std::size_t>(label - 1), all, 1.0, out.value, dz);
    out.grad = grad_from_logits(dz, bank, banks.tau);
    return out;
}

LossOutput csc_loss(std::span<const double> v, int label, std::span<const int> positives, const MemoryBanks& banks,
                    Bank which, double lambda) {
    const Matrix& bank = bank_of(banks, which);
    const std::size_t n = bank.rows();
    require_label(label, n);
    if (!std::binary_search(positives.begin(), positives.end(), label))
        throw std::invalid_argument("csc_loss: label is not in its positive set");

    const Vec z = logits(v, bank, banks.tau);
    std::vector<char> negative(n, 1);
    for (int p : positives) {
        require_label(p, n);
        negative[static_cast<std::size_t>(p - 1)] = 0;
    }
    const double K = static_cast<double>(positives.size());

    LossOutput out;
    Vec dz(n, 0.0);
    for (int p : positives) {
        const double s = p == label ? 1.0 - lambda + lambda / K : lambda / K;
        if (s == 0.0) continue;
        std::vector<char> include = negative;
        include[static_cast<std::size_t>(p - 1)] = 1;
        add_softmax_term(z, static_cast<std::size_t>(p - 1), include, s, out.value, dz);
    }
    out.grad = grad_from_logits(dz, bank, banks.tau);
    return out;
}

LossOutput merged_infonce_loss(std::span<const double> v, std::span<const int> positives, const MemoryBanks& banks,
                               Bank which) {
    const Matrix& bank = bank_of(banks, which);
    const std::size_t n = bank.rows();
    if (positives.empty()) throw std::invalid_argument("merged_infonce_loss: empty positive set");
    const Vec z = logits(v, bank, banks.tau);

    std::vector<char> pos(n, 0);
    for (int p : positives) {
        require_label(p, n);
        pos[static_cast<std::size_t>(p - 1)] = 1;
    }
    const double m = *std::max_element(z.begin(), z.end());
    double s_all = 0.0, s_pos = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = std::exp(z[k] - m);
        s_all += e;
        if (pos[k]) s_pos += e;
    }
    LossOutput out;
    out.value = std::log(s_all) - std::log(s_pos);
    Vec dz(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double e = std::exp(z[k] - m);
        dz[k] = e / s_all - (pos[k] ? e / s_pos : 0.0);
    }
    out.grad = grad_from_logits(dz, bank, banks.tau);
    return out;
}

const char* to_string(LossKind k) {
    switch (k) {
        case LossKind::InfoNCE: return "infonce";
        case LossKind::CSC: return "csc";
        case LossKind::MergedInfoNCE: return "merged-infonce";
    }
    return "?";
}

LossOutput combined_loss(std::span<const double> v, int label, std::span<const int> positives,
                         const MemoryBanks& banks, const TrainConfig& cfg, LossKind kind) {
    auto one = [&](Bank b) {
        switch (kind) {
            case LossKind::InfoNCE: return infonce_loss(v, label, banks, b);
            case LossKind::CSC: return csc_loss(v, label, positives, banks, b, cfg.lambda);
            case LossKind::MergedInfoNCE: return merged_infonce_loss(v, positives, banks, b);
        }
        throw std::logic_error("combined_loss: unknown loss kind");
    };
    LossOutput out{0.0, Vec(v.size(), 0.0)};
    if (cfg.gamma1 != 0.0) {
        const LossOutput h = one(Bank::Hard);
        out.value += cfg.gamma1 * h.value;
        for (std::size_t c = 0; c < v.size(); ++c) out.grad[c] += cfg.gamma1 * h.grad[c];
    }
    if (cfg.gamma2 != 0.0) {
        const LossOutput c = one(Bank::Centroid);
        out.value += cfg.gamma2 * c.value;
        for (std::size_t k = 0; k < v.size(); ++k) out.grad[k] += cfg.gamma2 * c.grad[k];
    }
    return out;
}

void update_memory(MemoryBanks& banks, std::span<const Sample> batch) {
    if (batch.empty()) throw std::invalid_argument("update_memory: empty batch");
    if (banks.alpha == 1.0) return;
    std::map<int, std::pair<Vec, std::size_t>> acc;
    for (const auto& s : batch) {
        require_label(s.label, banks.centroid.rows());
        auto& [sum, count] = acc[s.label];
        if (sum.empty()) sum.assign(s.feature.size(), 0.0);
        for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += s.feature[c];
        ++count;
    }
    for (auto& [label, entry] : acc) {
        auto row = banks.centroid.row(static_cast<std::size_t>(label - 1));
        const double inv = 1.0 / static_cast<double>(entry.second);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] = banks.alpha * row[c] + (1.0 - banks.alpha) * entry.first[c] * inv;
        normalize_in_place(row);
    }
}

void update_hard_memory(MemoryBanks& banks, std::span<const Sample> batch) {
    if (batch.empty()) throw std::invalid_argument("update_hard_memory: empty batch");
    if (banks.alpha == 1.0) return;
    std::map<int, std::pair<std::size_t, double>> hardest;  // label -> (batch index, similarity)
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const int label = batch[i].label;
        require_label(label, banks.hard.rows());
        const double sim = cosine(batch[i].feature, banks.hard.row(static_cast<std::size_t>(label - 1)));
        auto it = hardest.find(label);
        if (it == hardest.end() || sim < it->second.second) hardest[label] = {i, sim};
    }
    for (const auto& [label, pick] : hardest) {
        auto row = banks.hard.row(static_cast<std::size_t>(label - 1));
        const Vec& f = batch[pick.first].feature;
        for (std::size_t c = 0; c < row.size(); ++c) row[c] = banks.alpha * row[c] + (1.0 - banks.alpha) * f[c];
        normalize_in_place(row);
    }
}

}  // namespace ssrc::memory
