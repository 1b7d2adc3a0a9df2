// Command-line front end. Every failure exits nonzero and prints
// {"error": <kind>, "message": <text>} on stderr.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ssrc/experiment.hpp"
#include "ssrc/io.hpp"
#include "ssrc/synth.hpp"
#include "ssrc/trainer.hpp"

using namespace ssrc;
namespace fs = std::filesystem;

namespace {

int report_error(const std::string& kind, const std::string& message) {
    io::Json j = io::Json::object();
    j["error"] = kind;
    j["message"] = message;
    std::cerr << io::dump(j) << "\n";
    return kind == "usage" ? 2 : 1;
}

TrainConfig load_config(const std::string& path) {
    return path.empty() ? default_config() : io::config_from_json(io::read_json(path));
}

trainer::PipelineToggles pick_toggles(bool baseline) {
    return baseline ? trainer::baseline_toggles() : trainer::ssrc_toggles();
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        io::write_file_atomic(out, text);
}

std::vector<std::string> metric_header() {
    return {"mAP", "rank1", "f1", "precision", "recall", "correct_clusters", "cross_camera_clusters", "incorrect_clusters",
            "filtered_frames_per_epoch"};
}

std::vector<std::string> metric_fields(const experiment::RunMetrics& m) {
    std::string filtered;
    for (const auto& r : m.reports) {
        if (!filtered.empty()) filtered += ';';
        filtered += std::to_string(r.filtered_frames);
    }
    const auto& q = m.quality;
    return {io::format_double(m.retrieval.mAP),
            io::format_double(m.retrieval.rank1()),
            io::format_double(q.pairwise.f1),
            io::format_double(q.pairwise.precision),
            io::format_double(q.pairwise.recall),
            std::to_string(q.stats.correct),
            std::to_string(q.stats.cross_camera),
            std::to_string(q.stats.incorrect),
            filtered};
}

std::vector<double> parse_values(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw std::invalid_argument("--values: cannot parse '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("--values: no values given");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-supervised tracklet re-identification toolkit"};
    app.require_subcommand(1);

    std::string spec_path, out, data, config_path, weights, split_path, labels_path, table = "modules", param, values;
    std::size_t epoch = 0;
    bool baseline = false;

    auto* gen = app.add_subcommand("generate", "Write a synthetic dataset (manifest, features, default split)");
    gen->add_option("--spec", spec_path, "Synthetic spec JSON (defaults when omitted)");
    gen->add_option("--out", out, "Output dataset directory")->required();

    auto* train = app.add_subcommand("train", "Train an encoder; writes weights.json, reports.jsonl, labels.json");
    train->add_option("--data", data, "Dataset directory")->required();
    train->add_option("--config", config_path, "Training config JSON (defaults when omitted)");
    train->add_option("--out", out, "Run directory")->required();
    train->add_flag("--baseline", baseline, "Train the baseline (no NFTP, no merging, InfoNCE)");

    auto* cluster = app.add_subcommand("cluster", "One clustering phase with fixed weights; writes labels JSON");
    cluster->add_option("--data", data, "Dataset directory")->required();
    cluster->add_option("--weights", weights, "Encoder weights JSON")->required();
    cluster->add_option("--config", config_path, "Training config JSON (defaults when omitted)");
    cluster->add_option("--out", out, "Labels JSON path")->required();
    cluster->add_option("--epoch", epoch, "Epoch that selects the merge mode (default: last epoch)");
    cluster->add_flag("--baseline", baseline, "Use the baseline pipeline");

    auto* evalc = app.add_subcommand("eval", "Retrieval mAP / CMC on a query-gallery split");
    evalc->add_option("--data", data, "Dataset directory")->required();
    evalc->add_option("--weights", weights, "Encoder weights JSON")->required();
    evalc->add_option("--split", split_path, "Split JSON with query and gallery ids")->required();
    evalc->add_option("--out", out, "Metrics JSON path")->required();

    auto* stats = app.add_subcommand("stats", "Frame-level pseudo-label quality against ground truth");
    stats->add_option("--labels", labels_path, "Labels JSON from train or cluster")->required();
    stats->add_option("--data", data, "Dataset directory")->required();
    stats->add_option("--out", out, "Stats JSON path")->required();

    auto* ablate = app.add_subcommand("ablate", "Run an ablation table and print CSV");
    ablate->add_option("--data", data, "Dataset directory")->required();
    ablate->add_option("--config", config_path, "Training config JSON (defaults when omitted)");
    ablate->add_option("--table", table, "modules or nftp")->check(CLI::IsMember({"modules", "nftp"}));
    ablate->add_option("--out", out, "CSV path (stdout when omitted)");

    auto* sweep = app.add_subcommand("sweep", "Sweep one hyper-parameter and print CSV");
    sweep->add_option("--data", data, "Dataset directory")->required();
    sweep->add_option("--config", config_path, "Training config JSON (defaults when omitted)");
    sweep->add_option("--param", param, "delta, lambda, l or K")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();
    sweep->add_option("--out", out, "CSV path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what());
    }

    try {
        if (*gen) {
            const synth::SyntheticSpec spec =
                spec_path.empty() ? synth::SyntheticSpec{} : io::spec_from_json(io::read_json(spec_path));
            const auto ds = synth::generate(spec);
            io::write_dataset(ds, out);
            io::write_json(fs::path(out) / "split.json", io::to_json(experiment::default_split(ds.tracklets)));
            io::write_json(fs::path(out) / "spec.json", io::to_json(spec));
        } else if (*train) {
            const TrainConfig cfg = load_config(config_path);
            const auto ds = io::read_dataset(data);
            const auto result = trainer::run(unlabeled_view(ds.tracklets), cfg, pick_toggles(baseline));
            const fs::path dir = out;
            io::write_json(dir / "weights.json", io::to_json(result.encoder));
            io::write_file_atomic(dir / "reports.jsonl", io::reports_jsonl(result.reports));
            io::write_json(dir / "labels.json", io::labels_to_json(result.final_labels));
            io::write_json(dir / "cfg.json", io::to_json(cfg));
        } else if (*cluster) {
            const TrainConfig cfg = load_config(config_path);
            const auto ds = io::read_dataset(data);
            const Encoder enc = io::encoder_from_json(io::read_json(weights));
            const auto toggles = pick_toggles(baseline);
            const auto seqs = unlabeled_view(ds.tracklets);
            if (!seqs.empty() && seqs.front().frames.cols() != enc.raw_dim())
                throw std::invalid_argument("weights raw_dim does not match the dataset");
            const auto pl = trainer::cluster_phase(seqs, enc, cfg, toggles, epoch > 0 ? epoch : cfg.epochs);
            io::write_json(out, io::labels_to_json(pl));
        } else if (*evalc) {
            const auto ds = io::read_dataset(data);
            const Encoder enc = io::encoder_from_json(io::read_json(weights));
            const auto split = io::split_from_json(io::read_json(split_path));
            io::write_json(out, io::to_json(experiment::evaluate_retrieval(enc, ds.tracklets, split)));
        } else if (*stats) {
            const auto ds = io::read_dataset(data);
            const auto units = io::frame_labels_from_json(io::read_json(labels_path));
            std::map<std::string, std::size_t> index;
            std::vector<std::vector<int>> labels(ds.tracklets.size());
            for (std::size_t i = 0; i < ds.tracklets.size(); ++i) {
                index[ds.tracklets[i].id()] = i;
                labels[i].assign(ds.tracklets[i].seq.length(), kOutlier);
            }
            for (const auto& u : units) {
                auto it = index.find(u.tracklet_id);
                if (it == index.end()) throw std::invalid_argument("labels name unknown tracklet " + u.tracklet_id);
                for (std::size_t f : u.frames) {
                    if (f >= labels[it->second].size())
                        throw std::invalid_argument("labels: frame index out of range for " + u.tracklet_id);
                    labels[it->second][f] = u.label;
                }
            }
            std::vector<int> pseudo, gt, cams;
            for (std::size_t i = 0; i < ds.tracklets.size(); ++i) {
                const auto& t = ds.tracklets[i];
                if (!t.identity || !t.camera) throw std::invalid_argument("tracklet " + t.id() + " lacks identity/camera");
                const auto ids = synth::frame_identities(ds, t.id());
                pseudo.insert(pseudo.end(), labels[i].begin(), labels[i].end());
                gt.insert(gt.end(), ids.begin(), ids.end());
                cams.insert(cams.end(), ids.size(), *t.camera);
            }
            io::Json j = io::Json::object();
            const auto labelled = static_cast<std::size_t>(std::count_if(pseudo.begin(), pseudo.end(), [](int p) { return p != kOutlier; }));
            j["frames"] = pseudo.size();
            j["labelled_frames"] = labelled;
            j["clusters"] = io::to_json(eval::cluster_stats(pseudo, gt, cams));
            j["pairwise"] = labelled >= 2 ? io::to_json(eval::pairwise_prf(pseudo, gt)) : io::Json(nullptr);
            io::write_json(out, j);
        } else if (*ablate) {
            const TrainConfig cfg = load_config(config_path);
            const auto ds = io::read_dataset(data);
            const auto rows = table == "nftp" ? experiment::nftp_ablation_rows() : experiment::module_ablation_rows();
            const auto results = experiment::ablation_matrix(ds, cfg, rows);
            std::vector<std::string> header{"row", "pipeline"};
            for (auto& h : metric_header()) header.push_back(h);
            std::string csv = io::csv_row(header);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                std::vector<std::string> f{rows[i].name, trainer::describe(rows[i].toggles)};
                for (auto& x : metric_fields(results[i])) f.push_back(x);
                csv += io::csv_row(f);
            }
            emit(out, csv);
        } else if (*sweep) {
            const auto p = experiment::parse_sweep_param(param);
            const TrainConfig cfg = load_config(config_path);
            const auto ds = io::read_dataset(data);
            const auto rows = experiment::sweep(ds, cfg, p, parse_values(values));
            std::vector<std::string> header{experiment::to_string(p)};
            for (auto& h : metric_header()) header.push_back(h);
            std::string csv = io::csv_row(header);
            for (const auto& r : rows) {
                std::vector<std::string> f{io::format_double(r.value)};
                for (auto& x : metric_fields(r.metrics)) f.push_back(x);
                csv += io::csv_row(f);
            }
            emit(out, csv);
        }
    } catch (const io::IoError& e) {
        return report_error(e.kind(), e.what());
    } catch (const std::invalid_argument& e) {
        return report_error("invalid_argument", e.what());
    } catch (const std::out_of_range& e) {
        return report_error("out_of_range", e.what());
    } catch (const std::domain_error& e) {
        return report_error("domain_error", e.what());
    } catch (const std::exception& e) {
        return report_error("internal", e.what());
    }
    return 0;
}
