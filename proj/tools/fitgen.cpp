// fitgen: requirement-driven fault test generation, injection and analysis.
//
//   fitgen classify | generate | golden | inject | record | report | demo
//
// Settings come from built-in defaults, then --config, then flags.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fitgen/commands.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> provider, model, catalog, out, pace, fixture, trial;
    std::vector<int> n, bs;
    std::optional<std::size_t> limit;
    bool allow_off_grid = false;
    std::string format = "text";
    std::string tc_file;
    std::string input;
    std::string faulty;
};

fitgen::RunConfig resolve_config(const Flags& f) {
    fitgen::RunConfig cfg = f.config.empty() ? fitgen::RunConfig{} : fitgen::load_config(f.config);
    if (f.provider) cfg.provider_kind = fitgen::parse_provider_kind(*f.provider);
    if (f.model) cfg.provider.model = *f.model;
    if (f.catalog) cfg.paths.catalog = *f.catalog;
    if (f.out) cfg.paths.out = *f.out;
    if (f.fixture) cfg.paths.fixture = *f.fixture;
    if (f.pace) cfg.pacing = fitgen::parse_pacing(*f.pace);
    if (!f.n.empty()) cfg.classify_n = cfg.generate_n = f.n;
    if (!f.bs.empty()) cfg.batch_sizes = f.bs;
    if (f.allow_off_grid) cfg.allow_off_grid = true;
    if (f.limit) cfg.inject_limit = *f.limit;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fitgen: fault test cases from functional safety requirements, injected into a vehicle simulation"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config, "JSON run configuration (schema_version 1)");
    app.add_option("--provider", f.provider, "live or fixture")->check(CLI::IsMember({"live", "fixture"}));
    app.add_option("--model", f.model, "model name sent to the provider and used in prompt digests");
    app.add_option("--n", f.n, "few-shot example counts (grid)")->delimiter(',');
    app.add_option("--bs", f.bs, "batch sizes for the batch trial")->delimiter(',');
    app.add_option("--catalog", f.catalog, "sensor catalog JSON");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--pace", f.pace, "fast | wall | wall:<rate>");
    app.add_option("--fixture", f.fixture, "recording replayed by the fixture provider");
    app.add_option("--format", f.format, "text | json | csv | md | svg")
        ->check(CLI::IsMember({"text", "json", "csv", "md", "markdown", "svg"}));
    app.add_flag("--allow-off-grid", f.allow_off_grid, "accept N and BS values outside the published grid");

    auto* classify = app.add_subcommand("classify", "classify requirements as sensor- or actuator-related");
    auto* generate = app.add_subcommand("generate", "generate fault locations and test cases");
    generate->add_option("--trial", f.trial, "single | batch | dropped")
        ->check(CLI::IsMember({"single", "batch", "dropped"}));
    auto* golden = app.add_subcommand("golden", "run the fault-free reference simulation");
    auto* inject = app.add_subcommand("inject", "run test cases against the simulation and compare to golden");
    inject->add_option("--tc", f.tc_file, "test case file")->required();
    inject->add_option("--limit", f.limit, "run only the first N test cases (0 = all)");
    auto* record = app.add_subcommand("record", "record live provider answers for the configured grid");
    auto* report = app.add_subcommand("report", "render a metrics or violation report file");
    report->add_option("--input", f.input, "metrics.json or <tc>.report.json")->required();
    report->add_option("--faulty", f.faulty, "faulty trace stem for svg plots");
    auto* demo = app.add_subcommand("demo", "classify, generate, golden, inject over the bundled fixture");
    demo->add_option("--limit", f.limit, "inject only the first N generated test cases (0 = all)");

    CLI11_PARSE(app, argc, argv);

    return fitgen::run_guarded(std::cerr, [&] {
        fitgen::CommandContext ctx;
        ctx.cfg = resolve_config(f);
        ctx.out = &std::cout;
        ctx.log = &std::cerr;
        ctx.format = fitgen::parse_report_format(f.format);
        const bool needs_llm = classify->parsed() || generate->parsed() || demo->parsed();
        ctx.cfg.check(/*require_files=*/needs_llm || record->parsed());

        fitgen::OutputLock lock(ctx.cfg.paths.out);
        if (classify->parsed()) fitgen::cmd_classify(ctx);
        else if (generate->parsed())
            fitgen::cmd_generate(ctx, fitgen::parse_trial_kind(f.trial.value_or("single")));
        else if (golden->parsed()) fitgen::cmd_golden(ctx);
        else if (inject->parsed()) {
            const auto results = fitgen::cmd_inject(ctx, f.tc_file);
            for (const auto& r : results) std::cout << fitgen::render_report(r.report, ctx.format) << "\n";
        } else if (record->parsed()) fitgen::cmd_record(ctx);
        else if (report->parsed()) fitgen::cmd_report(ctx, f.input, f.faulty);
        else if (demo->parsed()) fitgen::cmd_demo(ctx);
    });
}
