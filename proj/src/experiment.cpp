#include "ssrc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace ssrc::experiment {

Split default_split(const std::vector<Tracklet>& tracklets) {
    Split s;
    std::set<int> seen;
    for (const auto& t : tracklets) {
        if (!t.identity || !t.camera) throw std::invalid_argument("default_split: tracklet " + t.id() + " lacks identity/camera");
        if (seen.insert(*t.identity).second) s.query.push_back(t.id());
        s.gallery.push_back(t.id());
    }
    return s;
}

Matrix tracklet_features(const Encoder& enc, const std::vector<Tracklet>& tracklets) {
    Matrix out(tracklets.size(), enc.dim());
    for (std::size_t i = 0; i < tracklets.size(); ++i) {
        const auto& frames = tracklets[i].seq.frames;
        std::vector<std::size_t> all(frames.rows());
        for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
        out.set_row(i, enc.embed(frames, all));
    }
    return out;
}

eval::RetrievalResult evaluate_retrieval(const Encoder& enc, const std::vector<Tracklet>& tracklets, const Split& split,
                                         std::size_t k_max) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < tracklets.size(); ++i) index[tracklets[i].id()] = i;

    auto gather = [&](const std::vector<std::string>& ids, Matrix& feats, std::vector<eval::SampleMeta>& meta) {
        std::vector<Tracklet> picked;
        for (const auto& id : ids) {
            auto it = index.find(id);
            if (it == index.end()) throw std::invalid_argument("split names unknown tracklet " + id);
            const Tracklet& t = tracklets[it->second];
            if (!t.identity || !t.camera) throw std::invalid_argument("tracklet " + id + " lacks identity/camera");
            picked.push_back(t);
            meta.push_back({*t.identity, *t.camera});
        }
        feats = tracklet_features(enc, picked);
    };
    Matrix q, g;
    std::vector<eval::SampleMeta> qm, gm;
    gather(split.query, q, qm);
    gather(split.gallery, g, gm);
    return eval::map_cmc(q, qm, g, gm, k_max);
}

int final_label(const LabelState& s, std::size_t unit) {
    const int a = s.assignment.at(unit);
    if (a == kOutlier) return kOutlier;
    if (s.mode == MergeMode::Reachable) return s.refined.at(static_cast<std::size_t>(a - 1));
    return a;
}

std::vector<std::vector<int>> frame_labels(const trainer::PseudoLabels& pl, const std::vector<std::size_t>& lengths) {
    std::vector<std::vector<int>> out(lengths.size());
    for (std::size_t i = 0; i < lengths.size(); ++i) out[i].assign(lengths[i], kOutlier);
    for (std::size_t u = 0; u < pl.units.size(); ++u) {
        const int label = final_label(pl.labels, u);
        if (label == kOutlier) continue;
        const auto& st = pl.units[u];
        for (std::size_t f : nftp::frames_of(pl.parts[st.parent], st)) out[st.parent][f] = label;
    }
    return out;
}

LabelQuality label_quality(const synth::SyntheticDataset& ds, const trainer::PseudoLabels& pl) {
    std::vector<std::size_t> lengths;
    for (const auto& t : ds.tracklets) lengths.push_back(t.seq.length());
    const auto labels = frame_labels(pl, lengths);

    std::vector<int> pseudo, gt, cams;
    for (std::size_t i = 0; i < ds.tracklets.size(); ++i) {
        const auto ids = synth::frame_identities(ds, ds.tracklets[i].id());
        const int cam = ds.tracklets[i].camera.value_or(-1);
        pseudo.insert(pseudo.end(), labels[i].begin(), labels[i].end());
        gt.insert(gt.end(), ids.begin(), ids.end());
        cams.insert(cams.end(), ids.size(), cam);
    }
    LabelQuality q;
    q.labelled_frames = static_cast<std::size_t>(std::count_if(pseudo.begin(), pseudo.end(), [](int p) { return p != kOutlier; }));
    if (q.labelled_frames >= 2) q.pairwise = eval::pairwise_prf(pseudo, gt);
    q.stats = eval::cluster_stats(pseudo, gt, cams);
    return q;
}

RunMetrics score_run(const std::string& name, const synth::SyntheticDataset& ds, const trainer::TrainResult& run) {
    RunMetrics m;
    m.name = name;
    m.retrieval = evaluate_retrieval(run.encoder, ds.tracklets, default_split(ds.tracklets));
    m.quality = label_quality(ds, run.final_labels);
    m.reports = run.reports;
    return m;
}

RunMetrics run_and_score(const std::string& name, const synth::SyntheticDataset& ds, const TrainConfig& cfg,
                         const trainer::PipelineToggles& toggles) {
    const auto seqs = unlabeled_view(ds.tracklets);
    return score_run(name, ds, trainer::run(seqs, cfg, toggles));
}

std::vector<AblationRow> module_ablation_rows() {
    using merging::MergeStrategy;
    using memory::LossKind;
    return {
        {"1-baseline", {false, false, MergeStrategy::None, LossKind::InfoNCE}},
        {"2-nftp", {true, true, MergeStrategy::None, LossKind::InfoNCE}},
        {"3-nftp+R+infonce", {true, true, MergeStrategy::ReachableAlways, LossKind::InfoNCE}},
        {"4-nftp+DR+infonce", {true, true, MergeStrategy::DirectAlways, LossKind::InfoNCE}},
        {"5-nftp+R+csc", {true, true, MergeStrategy::ReachableAlways, LossKind::CSC}},
        {"6-nftp+DR+csc", {true, true, MergeStrategy::DirectAlways, LossKind::CSC}},
        {"7-nftp+PM+csc", {true, true, MergeStrategy::Progressive, LossKind::CSC}},
    };
}

std::vector<AblationRow> nftp_ablation_rows() {
    using merging::MergeStrategy;
    using memory::LossKind;
    return {
        {"baseline", {false, false, MergeStrategy::None, LossKind::InfoNCE}},
        {"baseline+nf", {true, false, MergeStrategy::None, LossKind::InfoNCE}},
        {"baseline+tp", {false, true, MergeStrategy::None, LossKind::InfoNCE}},
        {"baseline+nftp", {true, true, MergeStrategy::None, LossKind::InfoNCE}},
        {"full-nf", {false, true, MergeStrategy::Progressive, LossKind::CSC}},
        {"full", {true, true, MergeStrategy::Progressive, LossKind::CSC}},
    };
}

std::vector<RunMetrics> ablation_matrix(const synth::SyntheticDataset& ds, const TrainConfig& cfg,
                                        const std::vector<AblationRow>& rows) {
    for (const auto& r : rows) trainer::validate_toggles(r.toggles);
    std::vector<RunMetrics> out;
    for (const auto& r : rows) out.push_back(run_and_score(r.name, ds, cfg, r.toggles));
    return out;
}

SweepParam parse_sweep_param(const std::string& s) {
    if (s == "delta") return SweepParam::Delta;
    if (s == "lambda") return SweepParam::Lambda;
    if (s == "l") return SweepParam::Stride;
    if (s == "K") return SweepParam::FixedK;
    throw std::invalid_argument("unknown sweep parameter '" + s + "' (expected delta, lambda, l or K)");
}

const char* to_string(SweepParam p) {
    switch (p) {
        case SweepParam::Delta: return "delta";
        case SweepParam::Lambda: return "lambda";
        case SweepParam::Stride: return "l";
        case SweepParam::FixedK: return "K";
    }
    return "?";
}

TrainConfig with_param(TrainConfig cfg, SweepParam p, double value) {
    switch (p) {
        case SweepParam::Delta: cfg.delta = value; break;
        case SweepParam::Lambda: cfg.lambda = value; break;
        case SweepParam::Stride:
            if (!(value >= 1.0) || value != std::floor(value)) throw std::invalid_argument("l must be a positive integer");
            cfg.l = static_cast<std::size_t>(value);
            break;
        case SweepParam::FixedK: break;
    }
    return cfg;
}

std::vector<SweepRow> sweep(const synth::SyntheticDataset& ds, const TrainConfig& cfg, SweepParam p,
                            const std::vector<double>& values) {
    std::vector<SweepRow> out;
    for (double v : values) {
        const TrainConfig c = with_param(cfg, p, v);
        require_valid(c);
        trainer::PipelineToggles t = trainer::ssrc_toggles();
        if (p == SweepParam::FixedK) {
            if (!(v >= 1.0) || v != std::floor(v)) throw std::invalid_argument("K must be a positive integer");
            t.fixed_k = static_cast<std::size_t>(v);
        }
        out.push_back({v, run_and_score(std::string(to_string(p)) + "=" + std::to_string(v), ds, c, t)});
    }
    return out;
}

TrainConfig scaled_config(std::size_t epochs) {
    TrainConfig cfg = default_config();
    const double scale = static_cast<double>(epochs) / static_cast<double>(cfg.epochs);
    cfg.epochs = epochs;
    cfg.lr_decay_period = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(cfg.lr_decay_period) * scale)));
    cfg.merge_switch_epoch = cfg.lr_decay_period + 1;
    return cfg;
}

bool PilotSeed::full_wins() const {
    return full.quality.pairwise.f1 > baseline.quality.pairwise.f1 && full.retrieval.mAP > baseline.retrieval.mAP &&
           full.quality.stats.incorrect < baseline.quality.stats.incorrect;
}

PilotSeed run_pilot_seed(std::uint64_t seed, std::size_t epochs) {
    synth::SyntheticSpec spec;
    spec.seed = seed;
    const auto ds = synth::generate(spec);
    TrainConfig cfg = scaled_config(epochs);
    cfg.rng_seed = seed;
    PilotSeed p;
    p.seed = seed;
    p.full = run_and_score("full", ds, cfg, trainer::ssrc_toggles());
    p.baseline = run_and_score("baseline", ds, cfg, trainer::baseline_toggles());
    return p;
}

CleanPilot run_clean_pilot(std::uint64_t seed, std::size_t epochs) {
    synth::SyntheticSpec spec;
    spec.seed = seed;
    spec.splice_rate = 0.0;
    const auto ds = synth::generate(spec);
    TrainConfig cfg = scaled_config(epochs);
    cfg.rng_seed = seed;
    const auto seqs = unlabeled_view(ds.tracklets);
    const auto toggles = trainer::ssrc_toggles();

    CleanPilot c;
    c.seed = seed;
    trainer::PseudoLabels first;
    auto hook = [&](std::size_t epoch, trainer::Phase phase, const Encoder& enc) {
        if (epoch == 1 && phase == trainer::Phase::BeforeClustering) first = trainer::cluster_phase(seqs, enc, cfg, toggles, 1);
    };
    const auto run = trainer::run(seqs, cfg, toggles, hook);
    c.epoch1_f1 = label_quality(ds, first).pairwise.f1;
    c.final_f1 = label_quality(ds, run.final_labels).pairwise.f1;
    return c;
}

}  // namespace ssrc::experiment
