// Builds the bundled gpt-4o replay recording: classification, single, batch
// and dropped-sensor cells whose replayed scores equal the published gpt-4o
// rows. Batch cells are best effort: their published accuracies use 95-96
// scored requirements, so only the nearest value reachable over 97 is hit.
//
//   make_fixture --config data/config.json --out data/fixtures/gpt-4o.jsonl

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "fitgen/fixture_build.hpp"

using fitgen::TrialKind;
using fitgen::synth::CellTarget;

int main(int argc, char** argv) {
    CLI::App app{"build a synthetic replay recording matching the published gpt-4o rows"};
    std::string config = "data/config.json";
    std::string out;
    app.add_option("--config", config, "run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out, "recording to write (default: the config's fixture path)");
    CLI11_PARSE(app, argc, argv);

    return fitgen::run_guarded(std::cerr, [&] {
        const auto cfg = fitgen::load_config(config);
        const std::vector<CellTarget> cells{
            {TrialKind::Classify, 1, 1, {90.3, 88.0}},
            {TrialKind::Classify, 3, 1, {86.6, 84.0}},
            {TrialKind::Classify, 5, 1, {85.1, 82.7}},
            {TrialKind::SingleTC, 1, 1, {94.8, 97.0}},
            {TrialKind::SingleTC, 3, 1, {94.8, 95.8}},
            {TrialKind::SingleTC, 5, 1, {95.9, 96.7}},
            {TrialKind::SingleTC, 8, 1, {95.9, 97.5}},
            {TrialKind::DroppedSensor, 1, 1, {93.8, 93.9}},
            {TrialKind::DroppedSensor, 3, 1, {91.8, 92.5}},
            {TrialKind::DroppedSensor, 5, 1, {94.8, 96.1}},
            {TrialKind::DroppedSensor, 8, 1, {92.8, 94.7}},
            {TrialKind::BatchTC, 1, 2, {92.7, 95.4}},
            {TrialKind::BatchTC, 3, 2, {93.8, 95.6}},
            {TrialKind::BatchTC, 5, 2, {95.8, 97.2}},
            {TrialKind::BatchTC, 8, 2, {93.8, 95.2}},
            {TrialKind::BatchTC, 1, 3, {95.8, 97.5}},
            {TrialKind::BatchTC, 3, 3, {95.8, 97.0}},
            {TrialKind::BatchTC, 5, 3, {95.8, 97.2}},
            {TrialKind::BatchTC, 8, 3, {94.8, 96.4}},
            {TrialKind::BatchTC, 1, 5, {92.6, 95.4}},
            {TrialKind::BatchTC, 3, 5, {93.7, 96.5}},
            {TrialKind::BatchTC, 5, 5, {94.7, 96.6}},
            {TrialKind::BatchTC, 8, 5, {95.8, 97.5}},
        };
        const auto built = fitgen::synth::build_fixture(cfg, cells);
        const std::string path = out.empty() ? cfg.paths.fixture : out;
        fitgen::write_text_file(path, fitgen::synth::recording_text(built.entries));
        for (const auto& c : built.cells) {
            std::printf("%-9s N=%d BS=%d  target %5.1f/%5.1f  got %5.1f/%5.1f %s\n",
                        std::string(fitgen::to_string(c.cell.trial)).c_str(), c.cell.n, c.cell.bs,
                        c.cell.target.acc_pct, c.cell.target.f1_pct, fitgen::percent_1dp(c.accuracy),
                        fitgen::percent_1dp(c.f1), c.exact ? "" : "(nearest)");
        }
        std::printf("%zu entries -> %s\n", built.entries.size(), path.c_str());
    });
}
