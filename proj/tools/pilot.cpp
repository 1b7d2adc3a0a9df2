// Runs the directional synthetic comparison (full method vs baseline) and the
// clean-data convergence check, and writes the measured numbers as JSON. The
// output is committed under tests/fixtures and read back by the tests.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ssrc/experiment.hpp"
#include "ssrc/io.hpp"

using namespace ssrc;

int main(int argc, char** argv) {
    CLI::App app{"Record pilot margins"};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::size_t epochs = 30;
    std::string out;
    app.add_option("--seeds", seeds, "Dataset and training seeds")->delimiter(',');
    app.add_option("--epochs", epochs, "Epochs per run");
    app.add_option("--out", out, "Output JSON path")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        io::Json runs = io::Json::array();
        std::size_t wins = 0;
        for (auto seed : seeds) {
            const auto p = experiment::run_pilot_seed(seed, epochs);
            io::Json j = io::Json::object();
            j["seed"] = seed;
            j["full"] = io::summary_json(p.full);
            j["baseline"] = io::summary_json(p.baseline);
            io::Json margin = io::Json::object();
            margin["f1"] = p.full.quality.pairwise.f1 - p.baseline.quality.pairwise.f1;
            margin["mAP"] = p.full.retrieval.mAP - p.baseline.retrieval.mAP;
            margin["incorrect"] = static_cast<long long>(p.baseline.quality.stats.incorrect) -
                                  static_cast<long long>(p.full.quality.stats.incorrect);
            j["margin"] = margin;
            j["full_wins"] = p.full_wins();
            wins += p.full_wins();
            runs.push_back(j);
            std::cerr << "seed " << seed << (p.full_wins() ? " win\n" : " loss\n");
        }
        io::Json clean = io::Json::array();
        for (auto seed : seeds) {
            const auto c = experiment::run_clean_pilot(seed, epochs);
            io::Json j = io::Json::object();
            j["seed"] = seed;
            j["epoch1_f1"] = c.epoch1_f1;
            j["final_f1"] = c.final_f1;
            clean.push_back(j);
        }
        io::Json doc = io::Json::object();
        doc["epochs"] = epochs;
        doc["dataset"] = io::to_json(synth::SyntheticSpec{});
        doc["runs"] = runs;
        doc["wins"] = wins;
        doc["clean"] = clean;
        io::write_json(out, doc);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
