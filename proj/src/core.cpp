#include "ssrc/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssrc {

std::vector<FrameSequence> unlabeled_view(const std::vector<Tracklet>& tracklets) {
    std::vector<FrameSequence> out;
    out.reserve(tracklets.size());
    for (const auto& t : tracklets) out.push_back(t.seq);
    return out;
}

const char* to_string(MergeMode m) {
    return m == MergeMode::Direct ? "DIRECT" : "REACHABLE";
}

std::size_t LabelState::num_outliers() const {
    return static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), kOutlier));
}

std::vector<std::string> check_label_state(const LabelState& s) {
    std::vector<std::string> problems;
    const int n = s.num_clusters;
    if (s.positive_sets.size() != static_cast<std::size_t>(n)) {
        problems.push_back("positive_sets size != num_clusters");
        return problems;
    }
    for (int a : s.assignment) {
        if (a != kOutlier && (a < 1 || a > n)) problems.push_back("assignment label out of range: " + std::to_string(a));
    }
    auto contains = [&](int a, int b) {
        const auto& p = s.positive_sets[static_cast<std::size_t>(a - 1)];
        return std::binary_search(p.begin(), p.end(), b);
    };
    for (int a = 1; a <= n; ++a) {
        const auto& p = s.positive_sets[static_cast<std::size_t>(a - 1)];
        if (!std::is_sorted(p.begin(), p.end())) problems.push_back("P(" + std::to_string(a) + ") not sorted");
        if (!contains(a, a)) problems.push_back("self-membership violated for " + std::to_string(a));
        for (int b : p) {
            if (b < 1 || b > n) problems.push_back("P(" + std::to_string(a) + ") holds out-of-range label");
        }
    }
    if (s.mode == MergeMode::Direct) {
        for (int a = 1; a <= n; ++a)
            for (int b : s.positive_sets[static_cast<std::size_t>(a - 1)])
                if (b >= 1 && b <= n && !contains(b, a))
                    problems.push_back("asymmetric P: " + std::to_string(b) + " in P(" + std::to_string(a) + ")");
    } else {
        if (s.refined.size() != static_cast<std::size_t>(n)) {
            problems.push_back("refined labels missing in REACHABLE mode");
            return problems;
        }
        for (int a = 1; a <= n; ++a) {
            for (int b = 1; b <= n; ++b) {
                const bool same_p = s.positive_sets[static_cast<std::size_t>(a - 1)] == s.positive_sets[static_cast<std::size_t>(b - 1)];
                const bool same_r = s.refined[static_cast<std::size_t>(a - 1)] == s.refined[static_cast<std::size_t>(b - 1)];
                if (same_p != same_r) {
                    problems.push_back("P does not partition labels consistently with refined labels at (" +
                                       std::to_string(a) + "," + std::to_string(b) + ")");
                }
                if (same_r && !contains(a, b))
                    problems.push_back("refined class of " + std::to_string(a) + " not contained in its P");
            }
        }
    }
    return problems;
}

double TrainConfig::lr_at_epoch(std::size_t epoch) const {
    if (epoch < 1) throw std::invalid_argument("lr_at_epoch: epochs are 1-based");
    const std::size_t decays = lr_decay_period == 0 ? 0 : (epoch - 1) / lr_decay_period;
    return lr * std::pow(lr_decay_factor, static_cast<double>(decays));
}

TrainConfig default_config() { return TrainConfig{}; }

std::vector<ConfigViolation> validate_config(const TrainConfig& c) {
    std::vector<ConfigViolation> v;
    auto need = [&](bool ok, const char* field, const char* rule) {
        if (!ok) v.push_back({field, rule});
    };
    need(c.d >= 1, "d", "d >= 1");
    need(c.l >= 1, "l", "l >= 1");
    need(c.M >= 1, "M", "M >= 1");
    need(c.sample_stride >= 1, "sample_stride", "sample_stride >= 1");
    need(c.delta > 0.0 && std::isfinite(c.delta), "delta", "0 < delta");
    need(c.eps > 0.0 && std::isfinite(c.eps), "eps", "0 < eps");
    need(c.min_samples >= 2, "min_samples", "min_samples >= 2");
    need(c.k2 >= 1 && c.k1 > c.k2, "k1", "k1 > k2 >= 1");
    need(c.lambda >= 0.0 && c.lambda <= 1.0, "lambda", "0 <= lambda <= 1");
    need(c.tau > 0.0 && std::isfinite(c.tau), "tau", "0 < tau");
    need(c.alpha >= 0.0 && c.alpha <= 1.0, "alpha", "0 <= alpha <= 1");
    need(c.gamma1 >= 0.0 && c.gamma2 >= 0.0, "gamma", "gamma1, gamma2 >= 0");
    need(c.batch_size >= 1, "batch_size", "batch_size >= 1");
    need(c.lr > 0.0, "lr", "lr > 0");
    need(c.lr_decay_factor > 0.0, "lr_decay_factor", "lr_decay_factor > 0");
    need(c.lr_decay_period >= 1, "lr_decay_period", "lr_decay_period >= 1");
    need(c.weight_decay >= 0.0, "weight_decay", "weight_decay >= 0");
    need(c.merge_switch_epoch >= 1, "merge_switch_epoch", "merge_switch_epoch >= 1");
    return v;
}

void require_valid(const TrainConfig& cfg) {
    const auto v = validate_config(cfg);
    if (v.empty()) return;
    std::string msg = "invalid config:";
    for (const auto& x : v) msg += " [" + x.field + ": " + x.rule + "]";
    throw std::invalid_argument(msg);
}

}  // namespace ssrc
