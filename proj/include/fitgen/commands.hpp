#pragma once

// Command implementations behind the fitgen executable. Each cmd_* throws the
// typed errors of the library; run_guarded() maps them onto exit codes:
//   0 success, 2 configuration, 3 transport, 4 data mismatch, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "fitgen/compare.hpp"
#include "fitgen/config.hpp"
#include "fitgen/errors.hpp"
#include "fitgen/fsr_model.hpp"
#include "fitgen/http_provider.hpp"
#include "fitgen/metrics.hpp"
#include "fitgen/pipeline.hpp"
#include "fitgen/plant.hpp"
#include "fitgen/provider.hpp"
#include "fitgen/report.hpp"
#include "fitgen/simulator.hpp"
#include "fitgen/trace_io.hpp"

namespace fitgen {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitTransport = 3, kExitMismatch = 4 };

struct CommandContext {
    RunConfig cfg;
    std::ostream* out = nullptr;  // results
    std::ostream* log = nullptr;  // progress and warnings
    // Used instead of the configured provider when set (tests, record).
    Provider* provider = nullptr;
    ReportFormat format = ReportFormat::Text;

    std::ostream& o() const { return *out; }
    std::ostream& l() const { return *log; }
};

// Refuses a second concurrent invocation against the same output directory.
class OutputLock {
public:
    explicit OutputLock(const std::string& out_dir) {
        fs::create_directories(out_dir);
        path_ = (fs::path(out_dir) / ".fitgen.lock").string();
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f) throw ConfigError("output directory " + out_dir + " is locked by another run (" + path_ + ")");
        std::fclose(f);
    }
    ~OutputLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    std::string path_;
};

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

inline std::unique_ptr<Provider> make_provider(const RunConfig& cfg) {
    if (cfg.provider_kind == ProviderKind::Fixture)
        return std::make_unique<FixtureProvider>(FixtureProvider::from_file(cfg.provider.model, cfg.paths.fixture));
    ProviderConfig pc = cfg.provider;
    pc.api_key = api_key_from_env();
    if (pc.api_key.empty())
        throw ConfigError(std::string("the live provider needs an API key in the ") + kApiKeyEnv +
                          " environment variable");
    return std::make_unique<HttpProvider>(pc);
}

struct Inputs {
    std::vector<Fsr> dataset;
    std::vector<Fsr> eval;
    ComponentCatalog sensors;
    ComponentCatalog actuators;
    PromptTemplate classification_template = default_classification_template();
    PromptTemplate generation_template = default_generation_template();
};

inline Inputs load_inputs(const RunConfig& cfg) {
    Inputs in;
    in.dataset = load_fsr_dataset(cfg.paths.dataset);
    in.eval = eval_split(in.dataset);
    in.sensors = load_catalog(cfg.paths.catalog);
    in.actuators = load_catalog(cfg.paths.actuator_catalog);
    if (!cfg.paths.templates.empty()) {
        const fs::path dir(cfg.paths.templates);
        if (fs::exists(dir / "classification.txt"))
            in.classification_template = PromptTemplate::parse(read_text_file((dir / "classification.txt").string()));
        if (fs::exists(dir / "generation.txt"))
            in.generation_template = PromptTemplate::parse(read_text_file((dir / "generation.txt").string()));
    }
    return in;
}

inline ComponentCatalog classification_catalog(const Inputs& in) {
    auto entries = in.sensors.entries();
    for (const auto& a : in.actuators.entries()) entries.push_back(a);
    return ComponentCatalog(std::move(entries));
}

// Sensor-related requirements of the eval split: the generation workload.
inline std::vector<Fsr> generation_eval(const Inputs& in) {
    std::vector<Fsr> out;
    for (const auto& f : in.eval)
        if (f.gold_class == ComponentClass::Sensor) out.push_back(f);
    return out;
}

inline PlantConfig load_plant(const RunConfig& cfg) {
    if (cfg.paths.plant_config.empty()) return PlantConfig{};
    try {
        return plant_config_from_json(read_json_file(cfg.paths.plant_config));
    } catch (const FormatError& e) {
        throw ConfigError(cfg.paths.plant_config + ": " + e.what());
    }
}

inline DrivingCycle load_cycle(const RunConfig& cfg) {
    if (cfg.paths.cycle.empty()) return default_driving_cycle();
    try {
        return cycle_from_csv(read_text_file(cfg.paths.cycle));
    } catch (const FormatError& e) {
        throw ConfigError(cfg.paths.cycle + ": " + e.what());
    }
}

inline SweepOptions sweep_options(const RunConfig& cfg) {
    return SweepOptions{cfg.provider.max_retries, cfg.provider.parallelism, GridPolicy{!cfg.allow_off_grid}};
}

inline void write_metrics(const std::string& dir, const std::vector<MetricsReport>& reports) {
    fs::create_directories(dir);
    write_text_file(dir + "/metrics.json", render_report(reports, ReportFormat::Json));
    write_text_file(dir + "/metrics.csv", render_report(reports, ReportFormat::Csv));
    write_text_file(dir + "/metrics.txt", render_report(reports, ReportFormat::Text));
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

inline std::vector<MetricsReport> classify_with(const CommandContext& ctx, Provider& provider) {
    const auto& cfg = ctx.cfg;
    const Inputs in = load_inputs(cfg);
    const ComponentCatalog catalog = classification_catalog(in);
    const std::string dir = cfg.paths.out + "/classify";
    fs::create_directories(dir);
    std::vector<MetricsReport> reports;
    for (int n : cfg.classify_n) {
        const auto examples = select_classification_examples(in.dataset, n);
        const auto outcomes =
            run_classification(provider, in.eval, examples, catalog, sweep_options(cfg), in.classification_template);
        std::string lines;
        for (std::size_t i = 0; i < in.eval.size(); ++i) {
            ordered_json j;
            j["id"] = in.eval[i].id;
            const auto label = outcomes[i].label();
            j["predicted"] = label ? ordered_json(std::string(to_string(*label))) : ordered_json(nullptr);
            j["gold"] = in.eval[i].gold_class ? ordered_json(std::string(to_string(*in.eval[i].gold_class)))
                                              : ordered_json(nullptr);
            j["attempts"] = outcomes[i].attempts;
            lines += j.dump() + "\n";
        }
        write_text_file(dir + "/predictions_N" + std::to_string(n) + ".jsonl", lines);
        reports.push_back(score_trial(outcomes, in.eval, n, provider.model(), example_pool_size(in.dataset)));
        ctx.l() << "classify N=" << n << ": " << reports.back().failures << " failures\n";
    }
    write_metrics(dir, reports);
    return reports;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOutput {
    std::vector<MetricsReport> reports;
    std::vector<std::string> tc_files;  // one per grid cell, same order as reports
};

inline std::string cell_name(int n, int bs) { return "N" + std::to_string(n) + "_BS" + std::to_string(bs); }

// Turns one generated location map into a test case with the configured
// fault at every selected location.
inline FaultTestCase make_test_case(const RunConfig& cfg, const Fsr& fsr, const LocationMap& map,
                                    const std::string& suffix) {
    FaultTestCase tc;
    tc.id = "TC-" + fsr.id + (suffix.empty() ? "" : "-" + suffix);
    tc.source_fsr = fsr.id;
    tc.locations = map;
    tc.window = cfg.window;
    for (const auto& id : map.selected()) tc.faults.emplace(id, FaultSpec{cfg.fault_for_component(id), std::nullopt});
    return tc;
}

inline GenerateOutput generate_with(const CommandContext& ctx, Provider& provider, TrialKind trial) {
    if (trial == TrialKind::Classify) throw ConfigError("generate needs a generation trial: single, batch or dropped");
    const auto& cfg = ctx.cfg;
    const Inputs in = load_inputs(cfg);
    const auto eval = generation_eval(in);
    const ComponentCatalog catalog = trial == TrialKind::DroppedSensor ? in.sensors.without(cfg.dropped) : in.sensors;
    const std::vector<int> batch_sizes = trial == TrialKind::BatchTC ? cfg.batch_sizes : std::vector<int>{1};
    const std::string dir = cfg.paths.out + "/generate/" + std::string(to_string(trial));
    fs::create_directories(dir);

    GenerateOutput out;
    for (int bs : batch_sizes) {
        for (int n : cfg.generate_n) {
            const auto examples = select_generation_examples(in.dataset, catalog, n);
            const auto run =
                run_generation(provider, eval, catalog, examples, bs, sweep_options(cfg), in.generation_template);
            out.reports.push_back(score_trial(run, eval, catalog, trial, n, bs, provider.model(),
                                              example_pool_size(in.dataset)));

            std::vector<FaultTestCase> tcs;
            std::size_t empty = 0, failed = 0, invalid = 0;
            for (std::size_t i = 0; i < eval.size(); ++i) {
                const auto* map = std::get_if<LocationMap>(&run.results[i]);
                if (!map) {
                    (std::holds_alternative<EmptySelection>(run.results[i]) ? empty : failed)++;
                    continue;
                }
                auto tc = make_test_case(cfg, eval[i], *map, "");
                if (auto v = validate_test_case(tc, catalog); !v.valid()) {
                    ++invalid;
                    ctx.l() << "skipping " << tc.id << ": " << v.summary() << "\n";
                    continue;
                }
                tcs.push_back(std::move(tc));
            }
            const std::string file = dir + "/tcs_" + cell_name(n, bs) + ".json";
            write_text_file(file, test_cases_to_text(tcs));
            out.tc_files.push_back(file);
            ctx.l() << "generate " << to_string(trial) << " " << cell_name(n, bs) << ": " << tcs.size()
                    << " test cases, " << empty << " empty selections excluded, " << failed << " failures";
            if (invalid) ctx.l() << ", " << invalid << " invalid";
            ctx.l() << "\n";
        }
    }
    write_metrics(dir, out.reports);
    return out;
}

// ---------------------------------------------------------------------------
// golden / inject
// ---------------------------------------------------------------------------

inline std::string golden_stem(const RunConfig& cfg) { return cfg.paths.out + "/golden/golden"; }

inline Trace cmd_golden(const CommandContext& ctx) {
    const auto& cfg = ctx.cfg;
    const Trace t = run_golden(load_cycle(cfg), load_plant(cfg), cfg.pacing);
    fs::create_directories(cfg.paths.out + "/golden");
    write_trace(t, golden_stem(cfg));
    ctx.l() << "golden run: " << t.samples() << " samples at dt=" << t.dt << " s\n";
    return quantized(t);
}

struct InjectResult {
    std::string tc_id;
    ViolationReport report;
};

inline std::vector<InjectResult> cmd_inject(const CommandContext& ctx, const std::string& tc_file) {
    const auto& cfg = ctx.cfg;
    const DrivingCycle cycle = load_cycle(cfg);
    const PlantConfig plant = load_plant(cfg);
    const std::string stem = golden_stem(cfg);
    if (!fs::exists(stem + ".csv")) throw ConfigError("no golden trace at " + stem + ".csv; run 'golden' first");
    const Trace golden = read_trace(stem);
    if (golden.meta.cycle_digest != cycle_digest(cycle))
        throw DigestMismatch("golden trace was recorded for a different driving cycle");
    if (golden.meta.plant_digest != plant_digest(plant))
        throw DigestMismatch("golden trace was recorded for a different plant configuration");

    std::string tc_text;
    try {
        tc_text = read_text_file(tc_file);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    auto tcs = test_cases_from_text(tc_text);
    if (cfg.inject_limit && tcs.size() > cfg.inject_limit) tcs.resize(cfg.inject_limit);

    const std::string dir = cfg.paths.out + "/inject";
    fs::create_directories(dir);
    std::vector<InjectResult> results;
    ordered_json summary = ordered_json::array();
    for (const auto& tc : tcs) {
        const Trace faulty = quantized(run_with_faults(cycle, plant, {tc}, cfg.pacing));
        ViolationReport r = compare_traces(golden, faulty, cfg.thresholds);
        r.injections = injection_spans({tc});
        write_trace(faulty, dir + "/" + tc.id);
        write_text_file(dir + "/" + tc.id + ".report.json", to_json(r).dump(2) + "\n");
        write_text_file(dir + "/" + tc.id + ".report.md", render_report(r, ReportFormat::Markdown));
        summary.push_back({{"tc_id", tc.id}, {"violated", r.violated()}, {"narrative", r.narrative}});
        ctx.l() << tc.id << ": " << (r.violated() ? "violated" : "mitigated") << "\n";
        results.push_back({tc.id, std::move(r)});
    }
    write_text_file(dir + "/summary.json", summary.dump(2) + "\n");
    return results;
}

// ---------------------------------------------------------------------------
// record
// ---------------------------------------------------------------------------

inline std::string recording_path(const RunConfig& cfg) {
    return cfg.paths.out + "/recording/" + cfg.provider.model + ".jsonl";
}

// Drives the configured grid through a live provider, appending every answer
// to the recording. On a transport error the partial file stays and a
// `.partial` marker says it can be resumed by running record again.
inline std::size_t cmd_record(const CommandContext& ctx) {
    RunConfig cfg = ctx.cfg;
    cfg.provider_kind = ProviderKind::Live;
    std::unique_ptr<Provider> owned;
    Provider* live = ctx.provider;
    if (!live) {
        owned = make_provider(cfg);
        live = owned.get();
    }
    const std::string path = recording_path(cfg);
    fs::create_directories(fs::path(path).parent_path());
    const std::string marker = path + ".partial";
    RecordingProvider rec(*live, path);
    CommandContext sub = ctx;
    sub.cfg = cfg;
    try {
        classify_with(sub, rec);
        for (auto t : {TrialKind::SingleTC, TrialKind::BatchTC, TrialKind::DroppedSensor}) generate_with(sub, rec, t);
    } catch (const TransportError& e) {
        write_text_file(marker, std::string("recording interrupted: ") + e.what() +
                                    "\nrun 'fitgen record' again with the same configuration to resume\n");
        ctx.l() << "recording is partial (" << rec.recorded() << " new entries kept); see " << marker << "\n";
        throw;
    }
    std::error_code ec;
    fs::remove(marker, ec);
    ctx.l() << "recorded " << rec.recorded() << " new entries to " << path << "\n";
    return rec.recorded();
}

// ---------------------------------------------------------------------------
// Top-level commands
// ---------------------------------------------------------------------------

inline std::vector<MetricsReport> cmd_classify(const CommandContext& ctx) {
    std::unique_ptr<Provider> owned;
    Provider* p = ctx.provider;
    if (!p) {
        owned = make_provider(ctx.cfg);
        p = owned.get();
    }
    auto reports = classify_with(ctx, *p);
    ctx.o() << render_report(reports, ctx.format);
    return reports;
}

inline GenerateOutput cmd_generate(const CommandContext& ctx, TrialKind trial) {
    std::unique_ptr<Provider> owned;
    Provider* p = ctx.provider;
    if (!p) {
        owned = make_provider(ctx.cfg);
        p = owned.get();
    }
    auto out = generate_with(ctx, *p, trial);
    ctx.o() << render_report(out.reports, ctx.format);
    return out;
}

// Renders a metrics file or a violation report file in another format. For
// an SVG plot of a violation report, pass the faulty trace stem; the golden
// trace comes from the output directory.
inline void cmd_report(const CommandContext& ctx, const std::string& input, const std::string& faulty_stem = {}) {
    json j;
    try {
        j = read_json_file(input);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (j.is_object() && j.contains("reports")) {
        ctx.o() << render_report(metrics_table_from_json(j), ctx.format);
        return;
    }
    const ViolationReport r = violation_report_from_json(j);
    if (ctx.format != ReportFormat::Svg) {
        ctx.o() << render_report(r, ctx.format);
        return;
    }
    std::string stem = faulty_stem;
    if (stem.empty() && input.size() > 12 && input.substr(input.size() - 12) == ".report.json")
        stem = input.substr(0, input.size() - 12);
    if (stem.empty()) throw UnsupportedFormat("svg needs the faulty trace stem");
    const Trace golden = read_trace(golden_stem(ctx.cfg));
    const Trace faulty = read_trace(stem);
    const PlotTraces traces{golden, faulty};
    ctx.o() << render_report(r, ReportFormat::Svg, &traces);
}

// classify -> generate (all trials) -> golden -> inject -> summary, offline
// against the configured fixture.
inline void cmd_demo(const CommandContext& ctx) {
    std::unique_ptr<Provider> owned;
    Provider* p = ctx.provider;
    if (!p) {
        owned = make_provider(ctx.cfg);
        p = owned.get();
    }
    CommandContext quiet = ctx;
    auto cls = classify_with(quiet, *p);
    std::vector<MetricsReport> gen;
    std::string tc_file;
    for (auto t : {TrialKind::SingleTC, TrialKind::BatchTC, TrialKind::DroppedSensor}) {
        auto g = generate_with(quiet, *p, t);
        if (t == TrialKind::SingleTC && !g.tc_files.empty()) tc_file = g.tc_files.back();
        gen.insert(gen.end(), g.reports.begin(), g.reports.end());
    }
    cmd_golden(quiet);
    const auto injected = tc_file.empty() ? std::vector<InjectResult>{} : cmd_inject(quiet, tc_file);

    ctx.o() << "Classification (sensor vs actuator)\n" << render_report(cls, ctx.format) << "\n";
    ctx.o() << "Location-map generation\n" << render_report(gen, ctx.format) << "\n";
    std::size_t violated = 0;
    for (const auto& r : injected) violated += r.report.violated() ? 1 : 0;
    ctx.o() << "Injection: " << injected.size() << " test cases from " << tc_file << ", " << violated
            << " with threshold violations\n";
    for (const auto& r : injected) ctx.o() << "  " << r.tc_id << ": " << r.report.narrative << "\n";
}

// Maps library errors onto the exit-code contract and prints the message.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const TransportError*>(&e)) return kExitTransport;
    if (dynamic_cast<const DigestMismatch*>(&e) || dynamic_cast<const UnknownChannel*>(&e) ||
        dynamic_cast<const FixtureMiss*>(&e) || dynamic_cast<const InvalidTestCase*>(&e) ||
        dynamic_cast<const ConcurrencyBoundExceeded*>(&e) || dynamic_cast<const TimeBaseMismatch*>(&e))
        return kExitMismatch;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
        dynamic_cast<const UnsupportedFormat*>(&e))
        return kExitConfig;
    return kExitFailure;
}

inline int run_guarded(std::ostream& err, const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const std::exception& e) {
        err << "fitgen: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace fitgen
