// Acceptance checks 1-11. Prints one PASS / FAIL / SKIP line per check and
// exits non-zero when any check fails. Check 11 needs FITGEN_API_KEY and a
// reachable endpoint; without a key it is skipped.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "fitgen/commands.hpp"
#include "fitgen/fixture_build.hpp"
#include "test_support.hpp"

using namespace fitgen;
using testing_support::TempDir;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status = Status::Fail;
    std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

RunConfig bundled_config(const std::string& out) {
    RunConfig c = load_config(testing_support::data_path("config.json"));
    c.paths.out = out;
    return c;
}

CommandContext quiet_context(const RunConfig& cfg, std::ostringstream& sink) {
    CommandContext ctx;
    ctx.cfg = cfg;
    ctx.out = &sink;
    ctx.log = &sink;
    return ctx;
}

// ---------------------------------------------------------------------------
// 1. Fault-model equivalence
// ---------------------------------------------------------------------------

Outcome fault_model_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr double dt = 0.01;
    constexpr std::size_t n = 1000;
    constexpr std::size_t k_start = 200, k_end = 800;  // window [2, 8) s
    const Window w{k_start * dt, k_end * dt};
    auto h = [](double t) { return 3.0 * std::sin(2.0 * std::numbers::pi * 0.7 * t) + 1.0; };

    const double g = 2.5, b = -1.25, stuck = 4.0, tau = 0.05, slope = 0.3;
    const std::size_t tau_steps = 5;
    struct Case {
        const char* name;
        FaultParams params;
        std::function<double(std::size_t)> closed;  // f at step k inside the window
    };
    const std::vector<Case> cases{
        {"gain", GainParams{g}, [&](std::size_t k) { return g * h(k * dt); }},
        {"offset", OffsetParams{b}, [&](std::size_t k) { return h(k * dt) + b; }},
        {"stuck_at", StuckAtParams{stuck}, [&](std::size_t) { return stuck; }},
        {"delay", DelayParams{tau},
         [&](std::size_t k) { return k < k_start + tau_steps ? h(w.t_start_s) : h(k * dt - tau); }},
        {"drift", DriftParams{slope}, [&](std::size_t k) { return h(k * dt) + slope * (k * dt - w.t_start_s); }},
    };
    double worst = 0;
    std::string worst_name;
    for (const auto& c : cases) {
        FaultTransform f(c.params, w, dt);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) * dt;
            const double got = f.apply({t, h(t)}).value;
            const double want = k >= k_start && k < k_end ? c.closed(k) : h(t);
            const double err = std::abs(got - want);
            if (err > worst || std::isnan(err)) worst = std::isnan(err) ? INFINITY : err, worst_name = c.name;
        }
    }
    const double secs = seconds_since(t0);
    return pass_if(worst <= 1e-12 && secs < 1.0,
                   "max |streamed - closed form| = " + fmt("%.3g", worst) + (worst_name.empty() ? "" : " (" + worst_name + ")") +
                       " over 5 models x 1000 samples, " + fmt("%.3f", secs) + " s");
}

// ---------------------------------------------------------------------------
// 2. Stochastic fault statistics
// ---------------------------------------------------------------------------

Outcome stochastic_statistics() {
    constexpr double dt = 0.01;
    const Window all{0, 1e9};
    auto run = [&](const FaultParams& p, double h, std::size_t count) {
        FaultTransform f(p, all, dt);
        std::vector<double> out(count);
        for (std::size_t k = 0; k < count; ++k) out[k] = f.apply({static_cast<double>(k) * dt, h}).value;
        return out;
    };

    const auto loss = run(PacketLossParams{0.5, 42, DropPolicy::ZeroFill}, 1.0, 10000);
    const double delivered = static_cast<double>(std::count(loss.begin(), loss.end(), 1.0)) / 1e4;

    const auto noise = run(NoiseParams{1.0, 42}, 0.0, 100000);
    double mean = 0;
    for (double v : noise) mean += v;
    mean /= 1e5;
    const double bound = 4.0 / std::sqrt(1e5);

    const auto spikes = run(SpikeParams{1.0, 0.01, 42}, 0.0, 100000);
    const auto count = std::count(spikes.begin(), spikes.end(), 1.0);

    const bool deterministic = loss == run(PacketLossParams{0.5, 42, DropPolicy::ZeroFill}, 1.0, 10000) &&
                               noise == run(NoiseParams{1.0, 42}, 0.0, 100000) &&
                               spikes == run(SpikeParams{1.0, 0.01, 42}, 0.0, 100000);
    const bool ok = std::abs(delivered - 0.5) <= 0.02 && std::abs(mean) <= bound && std::abs(count - 1000) <= 150 &&
                    deterministic;
    return pass_if(ok, "delivered " + fmt("%.4f", delivered) + ", noise mean " + fmt("%.5f", mean) + " (|bound| " +
                           fmt("%.5f", bound) + "), spikes " + std::to_string(count) +
                           (deterministic ? ", repeat runs identical" : ", repeat runs DIFFER"));
}

// ---------------------------------------------------------------------------
// 3. Test-case contract property suite
// ---------------------------------------------------------------------------

Outcome tc_contract_property() {
    const ComponentCatalog cat = load_catalog(testing_support::data_path("catalog_sensors.json"));
    const auto ids = cat.ids();
    std::mt19937_64 rng(2024);
    int disagreements = 0;
    int valid_seen = 0;
    for (int i = 0; i < 10000; ++i) {
        std::vector<std::string> keys = ids;
        switch (rng() % 5) {
            case 0: keys.erase(keys.begin() + static_cast<long>(rng() % keys.size())); break;
            case 1: keys.push_back("X" + std::to_string(rng() % 3)); break;
            case 2: std::swap(keys[rng() % keys.size()], keys[rng() % keys.size()]); break;
            default: break;
        }
        std::vector<LocationMap::Entry> entries;
        for (const auto& k : keys) {
            const auto r = rng() % 20;
            entries.emplace_back(k, r < 14 ? 0 : r < 19 ? 1 : static_cast<int>(rng() % 5) - 2);
        }
        FaultTestCase tc;
        tc.id = "P" + std::to_string(i);
        tc.locations = LocationMap(entries);
        tc.window = {175, 375};
        for (const auto& [k, v] : entries)
            if (v == 1) tc.faults.emplace(k, FaultSpec{DelayParams{0.5}, std::nullopt});

        long sum = 0;
        bool domain = true;
        for (const auto& [k, v] : entries) {
            sum += v;
            domain = domain && (v == 0 || v == 1);
        }
        const bool predicate = (sum == 1 || sum == 2) && keys == ids && domain;
        const bool verdict = validate_test_case(tc, cat).valid();
        disagreements += verdict != predicate;
        valid_seen += predicate;
    }
    return pass_if(disagreements == 0, std::to_string(disagreements) + " disagreements over 10000 random maps (" +
                                           std::to_string(valid_seen) + " valid)");
}

// ---------------------------------------------------------------------------
// 4. Metric oracle equivalence
// ---------------------------------------------------------------------------

Outcome metric_oracle() {
    const std::vector<std::string> classes{"APP", "WSA", "WS", "YR", "ST", kNoneClass};
    std::mt19937_64 rng(99);
    auto random_set = [&] {
        LabelSet s;
        for (int i = 0, n = static_cast<int>(rng() % 3); i < n; ++i) s.insert(classes[rng() % classes.size()]);
        return s;
    };
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 150;
        std::vector<Prediction> p;
        std::vector<LabelSet> g;
        for (std::size_t i = 0; i < n; ++i) {
            g.push_back(random_set());
            const auto r = rng() % 10;
            p.push_back(r == 0 ? Prediction{} : r < 6 ? Prediction{g.back()} : Prediction{random_set()});
        }
        // oracle: explicit per-sample tallies
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += p[i] && *p[i] == g[i];
        const double acc = static_cast<double>(hits) / static_cast<double>(n);
        double f1_sum = 0;
        for (const auto& c : classes) {
            double tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const bool pr = p[i] && p[i]->count(c);
                const bool gd = g[i].count(c) != 0;
                tp += pr && gd, fp += pr && !gd, fn += !pr && gd;
            }
            const double prec = tp + fp > 0 ? tp / (tp + fp) : 0, rec = tp + fn > 0 ? tp / (tp + fn) : 0;
            f1_sum += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0;
        }
        const double f1 = f1_sum / static_cast<double>(classes.size());
        worst = std::max({worst, std::abs(accuracy(p, g) - acc), std::abs(f1_macro(p, g, classes) - f1)});
    }
    const double printed = percent_1dp(121.0 / 134.0);
    return pass_if(worst <= 1e-12 && printed == 90.3,
                   "max |library - oracle| = " + fmt("%.3g", worst) + " over 200 sets; 121/134 prints " +
                       fmt("%.1f", printed));
}

// ---------------------------------------------------------------------------
// 5. Fixture-anchored table reproduction
// ---------------------------------------------------------------------------

Outcome fixture_table_reproduction() {
    const auto t0 = std::chrono::steady_clock::now();
    TempDir dir("accept5");
    RunConfig cfg = bundled_config(dir / "out");
    const auto built = synth::build_fixture(cfg, {{TrialKind::Classify, 1, 1, {90.3, 88.0}},
                                                  {TrialKind::SingleTC, 8, 1, {95.9, 97.5}}});
    cfg.paths.fixture = dir / "gpt-4o.jsonl";
    write_text_file(cfg.paths.fixture, synth::recording_text(built.entries));
    cfg.classify_n = {1};
    cfg.generate_n = {8};

    std::string first_cls, first_gen, detail;
    bool ok = true;
    for (int run = 0; run < 3; ++run) {
        std::ostringstream sink;
        const auto ctx = quiet_context(cfg, sink);
        const auto cls = cmd_classify(ctx).at(0);
        const auto gen = cmd_generate(ctx, TrialKind::SingleTC).reports.at(0);
        const std::string cls_text = read_text_file(cfg.paths.out + "/classify/metrics.json");
        const std::string gen_text = read_text_file(cfg.paths.out + "/generate/single/metrics.json");
        if (run == 0) {
            first_cls = cls_text, first_gen = gen_text;
            detail = "classify N=1 " + fmt("%.1f", percent_1dp(cls.accuracy)) + "/" +
                     fmt("%.1f", percent_1dp(cls.f1_macro)) + ", single N=8 " + fmt("%.1f", percent_1dp(gen.accuracy)) +
                     "/" + fmt("%.1f", percent_1dp(gen.f1_macro));
        }
        ok = ok && percent_1dp(cls.accuracy) == 90.3 && percent_1dp(cls.f1_macro) == 88.0 &&
             percent_1dp(gen.accuracy) == 95.9 && percent_1dp(gen.f1_macro) == 97.5;
        ok = ok && cls_text == first_cls && gen_text == first_gen;
    }
    const double secs = seconds_since(t0);
    return pass_if(ok && secs < 30.0, detail + ", 3 runs byte-identical, " + fmt("%.1f", secs) + " s");
}

// ---------------------------------------------------------------------------
// 6. Dropped-sensor behaviour
// ---------------------------------------------------------------------------

Outcome dropped_sensor() {
    TempDir dir("accept6");
    RunConfig cfg = bundled_config(dir / "out");
    const Inputs in = load_inputs(cfg);
    const auto eval = generation_eval(in);
    const ComponentCatalog catalog = in.sensors.without(cfg.dropped);

    // every answer correct: held-out requirements answer with an empty list
    std::vector<synth::Labels> answers;
    std::vector<std::size_t> held_out;
    for (std::size_t i = 0; i < eval.size(); ++i) {
        const auto gold = generation_gold(eval[i], catalog, true);
        answers.push_back(gold);
        if (gold == LabelSet{kNoneClass}) held_out.push_back(i);
    }
    const auto examples = select_generation_examples(in.dataset, catalog, 1);
    cfg.paths.fixture = dir / "dropped.jsonl";
    write_text_file(cfg.paths.fixture,
                    synth::recording_text(synth::generation_recording(cfg.provider.model, eval, answers, catalog, examples, 1)));
    cfg.generate_n = {1};

    FixtureProvider provider = FixtureProvider::from_file(cfg.provider.model, cfg.paths.fixture);
    const auto run = run_generation(provider, eval, catalog, examples, 1, sweep_options(cfg));
    bool held_out_correct = !held_out.empty();
    for (auto i : held_out)
        held_out_correct = held_out_correct && std::holds_alternative<EmptySelection>(run.results[i]) &&
                           prediction_of(run.results[i], true) == generation_gold(eval[i], catalog, true);

    std::ostringstream sink;
    const auto out = cmd_generate(quiet_context(cfg, sink), TrialKind::DroppedSensor);
    const auto tcs = test_cases_from_text(read_text_file(out.tc_files.at(0)));
    std::size_t references = 0;
    for (const auto& tc : tcs) {
        for (const auto& [k, v] : tc.locations.entries())
            references += (k == "WSA" || k == "ST") ? 1 : 0;
        for (const auto& [k, f] : tc.faults) references += (k == "WSA" || k == "ST") ? 1 : 0;
    }
    const auto& r = out.reports.at(0);
    return pass_if(held_out.size() == 2 && held_out_correct && references == 0 && r.accuracy == 1.0,
                   std::to_string(held_out.size()) + " held-out requirements answered [] and scored correct: " +
                       (held_out_correct ? "yes" : "no") + "; " + std::to_string(tcs.size()) +
                       " test cases, references to WSA/ST: " + std::to_string(references));
}

// ---------------------------------------------------------------------------
// 7. Failure-mode scoring
// ---------------------------------------------------------------------------

Outcome failure_mode_scoring() {
    TempDir dir("accept7");
    RunConfig cfg = bundled_config(dir / "out");
    const Inputs in = load_inputs(cfg);
    const auto eval = generation_eval(in);
    const auto examples = select_generation_examples(in.dataset, in.sensors, 1);
    cfg.paths.fixture = dir / "prose.jsonl";
    write_text_file(cfg.paths.fixture, synth::recording_text(synth::unstructured_recording(
                                           cfg.provider.model, eval, in.sensors, examples, 2)));
    cfg.generate_n = {1};
    cfg.batch_sizes = {2};
    std::ostringstream sink;
    const auto out = cmd_generate(quiet_context(cfg, sink), TrialKind::BatchTC);
    const auto& r = out.reports.at(0);
    return pass_if(r.f1_macro == 0.0 && r.failures == eval.size(),
                   "batch BS=2 N=1 F1 = " + fmt("%.1f", percent_1dp(r.f1_macro)) + ", " + std::to_string(r.failures) +
                       "/" + std::to_string(eval.size()) + " requirements failed, no crash");
}

// ---------------------------------------------------------------------------
// 8. End-to-end injection effect
// ---------------------------------------------------------------------------

Outcome injection_effect() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = bundled_config("unused");
    const DrivingCycle cycle = default_driving_cycle();
    const PlantConfig plant = load_plant(cfg);
    FaultTestCase tc;
    tc.id = "TC-APP-delay";
    tc.locations = LocationMap::select(bus_catalog(), {"APP"});
    tc.faults.emplace("APP", FaultSpec{DelayParams{0.5}, std::nullopt});
    tc.window = {175, 375};
    const Trace golden = run_golden(cycle, plant, Pacing::fast());
    const Trace faulty = run_with_faults(cycle, plant, {tc}, Pacing::fast());
    const auto report = compare_traces(golden, faulty, cfg.thresholds);
    const double secs = seconds_since(t0);

    bool prefix = true;
    for (std::size_t c = 0; c < golden.channels.size(); ++c)
        for (std::size_t k = 0; k < golden.samples() && golden.time(k) < 175.0 - 1e-9; ++k)
            prefix = prefix && golden.values[c][k] == faulty.values[c][k];
    std::size_t exceeded_in_window = 0;
    bool none_early = true;
    std::string channels;
    for (const auto& f : report.findings) {
        if (!f.first_exceed_s) continue;
        none_early = none_early && *f.first_exceed_s >= 175.0 - 1e-9;
        if (*f.first_exceed_s <= 375.0) {
            ++exceeded_in_window;
            channels += (channels.empty() ? "" : ",") + f.channel + "@" + fmt("%.2f", *f.first_exceed_s);
        }
    }
    return pass_if(prefix && exceeded_in_window >= 1 && none_early && secs < 10.0,
                   std::string("prefix t<175 s bit-identical: ") + (prefix ? "yes" : "no") + "; exceeded in window: " +
                       (channels.empty() ? "none" : channels) + "; " + fmt("%.2f", secs) + " s");
}

// ---------------------------------------------------------------------------
// 9. Concurrent-fault execution
// ---------------------------------------------------------------------------

Outcome concurrent_faults() {
    const RunConfig cfg = bundled_config("unused");
    const DrivingCycle cycle = default_driving_cycle();
    const PlantConfig plant = load_plant(cfg);
    FaultTestCase tc;
    tc.id = "TC-APP-RPM";
    tc.locations = LocationMap::select(bus_catalog(), {"APP", "RPM"});
    tc.faults.emplace("APP", FaultSpec{StuckAtParams{20.0}, std::nullopt});
    tc.faults.emplace("RPM", FaultSpec{DelayParams{0.5}, std::nullopt});
    tc.window = {175, 375};
    const Trace golden = run_golden(cycle, plant);
    const Trace faulty = run_with_faults(cycle, plant, {tc});
    const auto report = compare_traces(golden, faulty, cfg.thresholds);

    auto diverges_in_window = [&](const std::string& ch) {
        const auto* f = report.finding(ch);
        return f && f->first_exceed_s && *f->first_exceed_s >= 175.0 - 1e-9 && *f->first_exceed_s < 375.0;
    };
    const bool both = diverges_in_window("APP") && diverges_in_window("RPM");

    FaultTestCase third;
    third.id = "TC-WS";
    third.locations = LocationMap::select(bus_catalog(), {"WS"});
    third.faults.emplace("WS", FaultSpec{GainParams{1.2}, std::nullopt});
    third.window = {300, 350};
    bool rejected = false;
    try {
        run_with_faults(cycle, plant, {tc, third});
    } catch (const ConcurrencyBoundExceeded&) {
        rejected = true;
    }
    return pass_if(both && rejected, std::string("APP and RPM exceed thresholds inside the window: ") +
                                         (both ? "yes" : "no") + "; third overlapping location rejected: " +
                                         (rejected ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 10. Pacing contract
// ---------------------------------------------------------------------------

Outcome pacing_contract() {
    const DrivingCycle cycle = default_driving_cycle(0.01, 10.0);
    const PlantConfig plant;
    const auto t0 = std::chrono::steady_clock::now();
    const Trace paced = run_golden(cycle, plant, Pacing::wall_clock(10.0));
    const double secs = seconds_since(t0);
    const Trace fast = run_golden(cycle, plant, Pacing::fast());
    const bool same = paced == fast;
    return pass_if(std::abs(secs - 1.0) <= 0.05 && same,
                   "10 s cycle at rate 10 took " + fmt("%.3f", secs) + " s; trace identical to fast mode: " +
                       (same ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 11. Live-provider run (informational)
// ---------------------------------------------------------------------------

Outcome live_provider() {
    if (api_key_from_env().empty()) return {Status::Skip, std::string(kApiKeyEnv) + " not set"};
    TempDir dir("accept11");
    RunConfig cfg = bundled_config(dir / "out");
    cfg.provider_kind = ProviderKind::Live;
    std::ostringstream sink;
    auto ctx = quiet_context(cfg, sink);
    ctx.out = &std::cout;
    const auto cls = cmd_classify(ctx);
    std::size_t rows = cls.size();
    for (auto t : {TrialKind::SingleTC, TrialKind::BatchTC, TrialKind::DroppedSensor})
        rows += cmd_generate(ctx, t).reports.size();
    return pass_if(rows == 3 + 4 + 12 + 4, std::to_string(rows) + " grid cells completed against " + cfg.provider.endpoint);
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> checks{
        {"Fault-model equivalence", fault_model_equivalence},
        {"Stochastic fault statistics", stochastic_statistics},
        {"TC contract property suite", tc_contract_property},
        {"Metric oracle equivalence", metric_oracle},
        {"Fixture-anchored table reproduction", fixture_table_reproduction},
        {"Dropped-sensor behavior", dropped_sensor},
        {"Failure-mode scoring", failure_mode_scoring},
        {"End-to-end injection effect", injection_effect},
        {"Concurrent-fault execution", concurrent_faults},
        {"Pacing contract", pacing_contract},
        {"Live-provider run", live_provider},
    };
    int failed = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        Outcome o;
        try {
            o = checks[i].second();
        } catch (const std::exception& e) {
            o = {Status::Fail, std::string("threw: ") + e.what()};
        }
        const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Skip ? "SKIP" : "FAIL";
        failed += o.status == Status::Fail;
        std::printf("%s %2zu %s: %s\n", tag, i + 1, checks[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d failed\n", failed);
    return failed == 0 ? 0 : 1;
}
