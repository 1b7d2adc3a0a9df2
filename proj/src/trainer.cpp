#include "ssrc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ssrc/clustering.hpp"
#include "ssrc/rng.hpp"

namespace ssrc::trainer {
namespace {

enum Stream : std::uint64_t { kBatchOrder = 11, kFrameSampling = 12 };

// P(c) = c and its k - 1 most similar centroids, then symmetrized.
void nearest_positive_sets(LabelState& s, const Matrix& features, std::size_t k) {
    const auto n = static_cast<std::size_t>(s.num_clusters);
    if (n == 0) return;
    const Matrix centroids = memory::init_memory(features, s.assignment, s.num_clusters, 1.0, 0.0).centroid;
    std::vector<std::set<int>> sets(n);
    for (std::size_t a = 0; a < n; ++a) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> sim(n);
        for (std::size_t b = 0; b < n; ++b) sim[b] = dot(centroids.row(a), centroids.row(b));
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            if (x == a || y == a) return x == a && y != a;
            return sim[x] > sim[y];
        });
        for (std::size_t r = 0; r < std::min(k, n); ++r) {
            sets[a].insert(static_cast<int>(order[r] + 1));
            sets[order[r]].insert(static_cast<int>(a + 1));
        }
    }
    s.mode = MergeMode::Direct;
    s.refined.clear();
    for (std::size_t a = 0; a < n; ++a) s.positive_sets[a].assign(sets[a].begin(), sets[a].end());
}

}  // namespace

PipelineToggles ssrc_toggles() { return PipelineToggles{}; }

PipelineToggles baseline_toggles() {
    return PipelineToggles{false, false, merging::MergeStrategy::None, memory::LossKind::InfoNCE};
}

void validate_toggles(const PipelineToggles& t) {
    if (t.loss == memory::LossKind::MergedInfoNCE)
        throw std::invalid_argument("toggles: choose InfoNCE or CSC; merged InfoNCE follows from the merge strategy");
    if (t.loss == memory::LossKind::CSC && t.merge == merging::MergeStrategy::None)
        throw std::invalid_argument("toggles: CSC loss needs a merge strategy");
}

memory::LossKind effective_loss(const PipelineToggles& t) {
    if (t.loss == memory::LossKind::InfoNCE && t.merge != merging::MergeStrategy::None)
        return memory::LossKind::MergedInfoNCE;
    return t.loss;
}

std::string describe(const PipelineToggles& t) {
    std::string s;
    s += t.noise_filter ? "nf" : "-";
    s += t.partition ? "+tp" : "+-";
    s += std::string("+") + merging::to_string(t.merge);
    s += std::string("+") + memory::to_string(t.loss);
    if (t.fixed_k > 0) s += "+k" + std::to_string(t.fixed_k);
    return s;
}

Encoder initial_encoder(std::size_t raw_dim, const TrainConfig& cfg) { return Encoder::random(raw_dim, cfg.d, cfg.rng_seed); }

PseudoLabels cluster_phase(std::span<const FrameSequence> seqs, const Encoder& enc, const TrainConfig& cfg,
                           const PipelineToggles& toggles, std::size_t epoch) {
    std::vector<Matrix> feats;
    feats.reserve(seqs.size());
    for (const auto& s : seqs) feats.push_back(enc.encode_frames(s.frames));

    PseudoLabels out;
    out.parts = nftp::nftp_all(seqs, feats, cfg, {toggles.noise_filter, toggles.partition});
    out.units = nftp::flatten(out.parts);
    for (const auto& p : out.parts) out.filtered_frames += p.filtered.filtered.size();

    out.features = Matrix(out.units.size(), enc.dim());
    for (std::size_t u = 0; u < out.units.size(); ++u) {
        const auto& st = out.units[u];
        const auto rows = nftp::frames_of(out.parts[st.parent], st);
        out.features.set_row(u, normalized(mean_of_rows(feats[st.parent], rows)));
    }

    out.labels = clustering::sub_cluster_generate(out.features, cfg);
    const auto graph = merging::build_graph(out.labels.assignment, out.units, out.labels.num_clusters);
    merging::apply_strategy(out.labels, graph, toggles.merge, epoch, cfg);
    if (toggles.fixed_k > 0) nearest_positive_sets(out.labels, out.features, toggles.fixed_k);
    return out;
}

std::vector<std::size_t> sample_rows(const nftp::PartitionedTracklet& part, const SubTracklet& st, const TrainConfig& cfg,
                                     Rng& rng) {
    const auto frames = nftp::frames_of(part, st);
    const auto picks = nftp::sample_frames(frames.size(), cfg.M, cfg.sample_stride, rng);
    std::vector<std::size_t> rows(picks.size());
    for (std::size_t k = 0; k < picks.size(); ++k) rows[k] = frames[picks[k]];
    return rows;
}

Vec embed_subtracklet(const Encoder& enc, const FrameSequence& seq, const nftp::PartitionedTracklet& part,
                      const SubTracklet& st, const TrainConfig& cfg, Rng& rng) {
    return enc.embed(seq.frames, sample_rows(part, st, cfg, rng));
}

TrainResult run(std::span<const FrameSequence> seqs, const TrainConfig& cfg, const PipelineToggles& toggles,
                const PhaseHook& hook) {
    require_valid(cfg);
    validate_toggles(toggles);
    if (seqs.empty()) throw std::invalid_argument("train: empty dataset");
    const std::size_t raw_dim = seqs.front().frames.cols();
    for (const auto& s : seqs) {
        if (s.length() == 0) throw std::invalid_argument("train: tracklet " + s.id + " has no frames");
        if (s.frames.cols() != raw_dim) throw std::invalid_argument("train: inconsistent raw dimension");
    }

    const memory::LossKind loss_kind = effective_loss(toggles);
    TrainResult result;
    result.encoder = initial_encoder(raw_dim, cfg);
    AdamW opt;
    opt.weight_decay = cfg.weight_decay;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Encoder& enc = result.encoder;
        if (hook) hook(epoch, Phase::BeforeClustering, enc);
        PseudoLabels pl = cluster_phase(seqs, enc, cfg, toggles, epoch);
        if (hook) hook(epoch, Phase::AfterClustering, enc);

        EpochReport rep;
        rep.epoch = epoch;
        rep.num_units = pl.units.size();
        rep.num_clusters = static_cast<std::size_t>(pl.labels.num_clusters);
        rep.num_outliers = pl.labels.num_outliers();
        rep.mode = pl.labels.mode;
        rep.num_merged = pl.labels.mode == MergeMode::Reachable
                             ? static_cast<std::size_t>(pl.labels.refined.empty()
                                                            ? 0
                                                            : *std::max_element(pl.labels.refined.begin(), pl.labels.refined.end()))
                             : rep.num_clusters;
        rep.filtered_frames = pl.filtered_frames;
        rep.lr = cfg.lr_at_epoch(epoch);

        std::vector<std::size_t> labeled;
        for (std::size_t u = 0; u < pl.units.size(); ++u)
            if (pl.labels.assignment[u] != kOutlier) labeled.push_back(u);

        if (labeled.empty()) {
            rep.skipped = true;
        } else {
            memory::MemoryBanks banks = memory::init_memory(pl.features, pl.labels.assignment, pl.labels.num_clusters,
                                                            cfg.tau, cfg.alpha);
            const std::size_t iters =
                cfg.iters_per_epoch > 0 ? cfg.iters_per_epoch : (pl.units.size() + cfg.batch_size - 1) / cfg.batch_size;
            const std::size_t batch = std::min(cfg.batch_size, labeled.size());

            Rng order_rng = derive_rng(cfg.rng_seed, kBatchOrder, epoch);
            Rng frame_rng = derive_rng(cfg.rng_seed, kFrameSampling, epoch);
            std::shuffle(labeled.begin(), labeled.end(), order_rng);
            std::size_t cursor = 0;

            double loss_sum = 0.0;
            std::size_t loss_count = 0;
            for (std::size_t it = 0; it < iters; ++it) {
                Matrix grad_w(enc.raw_dim(), enc.dim());
                std::vector<memory::Sample> samples;
                samples.reserve(batch);
                for (std::size_t b = 0; b < batch; ++b) {
                    if (cursor == labeled.size()) {
                        std::shuffle(labeled.begin(), labeled.end(), order_rng);
                        cursor = 0;
                    }
                    const std::size_t u = labeled[cursor++];
                    const SubTracklet& st = pl.units[u];
                    const auto& part = pl.parts[st.parent];
                    const FrameSequence& seq = seqs[st.parent];

                    const auto rows = sample_rows(part, st, cfg, frame_rng);

                    const int label = pl.labels.assignment[u];
                    Vec v = enc.embed(seq.frames, rows);
                    const auto loss = memory::combined_loss(v, label, pl.labels.positives(label), banks, cfg, loss_kind);
                    loss_sum += loss.value;
                    ++loss_count;

                    Vec g = loss.grad;
                    for (double& x : g) x /= static_cast<double>(batch);
                    enc.embed_backward(seq.frames, rows, g, grad_w);
                    samples.push_back({std::move(v), label});
                }
                opt.step(enc.weights(), grad_w, rep.lr);
                memory::update_memory(banks, samples);
                memory::update_hard_memory(banks, samples);
            }
            rep.iterations = iters;
            rep.mean_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
        }
        if (hook) hook(epoch, Phase::AfterTraining, enc);
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.reports.push_back(rep);
        if (epoch == cfg.epochs) result.final_labels = std::move(pl);
    }
    return result;
}

TrainResult train(std::span<const FrameSequence> seqs, const TrainConfig& cfg, const PhaseHook& hook) {
    return run(seqs, cfg, ssrc_toggles(), hook);
}

TrainResult train_baseline(std::span<const FrameSequence> seqs, const TrainConfig& cfg, const PhaseHook& hook) {
    return run(seqs, cfg, baseline_toggles(), hook);
}

}  // namespace ssrc::trainer
