#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

#include "fitgen/commands.hpp"
#include "test_support.hpp"

using namespace fitgen;
using testing_support::TempDir;

namespace {

RunConfig bundled(const std::string& out) {
    RunConfig c = load_config(testing_support::data_path("config.json"));
    c.paths.out = out;
    return c;
}

std::string write_config(const TempDir& dir, const RunConfig& c, const std::string& name = "config.json") {
    const std::string path = dir / name;
    write_text_file(path, config_to_json(c).dump(2));
    return path;
}

int run_cli(const std::string& args) {
    const std::string cmd = "env -u FITGEN_API_KEY " + std::string(FITGEN_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing: relative paths, strict keys, pacing") {
    const auto c = load_config(testing_support::data_path("config.json"));
    CHECK(std::filesystem::path(c.paths.dataset).is_absolute());
    CHECK(std::filesystem::exists(c.paths.fixture));
    CHECK(c.provider.model == "gpt-4o");
    CHECK(c.window == Window{175, 375});
    CHECK_NOTHROW(c.check());

    CHECK_THROWS_AS(config_from_json(json{{"schema_version", 1}, {"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"schema_version", 2}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"schema_version", 1}, {"faults", {{"default", {{"type", "gain"}}}}}}),
                    ConfigError);
    CHECK(parse_pacing("wall:10").rate == 10);
    CHECK(parse_pacing("fast").mode == Pacing::Mode::AsFastAsPossible);
    CHECK_THROWS_AS(parse_pacing("wall:x"), ConfigError);
    CHECK_THROWS_AS(parse_pacing("wall:0"), ConfigError);
}

TEST_CASE("config json round trip") {
    TempDir dir("cfg");
    auto c = bundled(dir.str());
    c.fault_for.emplace("APP", StuckAtParams{10});
    c.pacing = Pacing::wall_clock(5);
    const auto back = config_from_json(json::parse(config_to_json(c).dump()));
    CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("grid is enforced unless explicitly overridden") {
    RunConfig c;
    c.generate_n = {2};
    CHECK_THROWS_AS(c.check(false), ConfigError);
    c.allow_off_grid = true;
    CHECK_NOTHROW(c.check(false));
    c.batch_sizes = {0};
    CHECK_THROWS_AS(c.check(false), ConfigError);
}

TEST_CASE("output lock refuses a second run") {
    TempDir dir("lock");
    OutputLock first(dir.str());
    CHECK_THROWS_AS(OutputLock(dir.str()), ConfigError);
}

TEST_CASE("live provider without a key is a config error") {
    RunConfig c;
    c.provider_kind = ProviderKind::Live;
    ::unsetenv(kApiKeyEnv);
    CHECK_THROWS_AS(make_provider(c), ConfigError);
}

TEST_CASE("exit code mapping") {
    CHECK(exit_code_for(ConfigError("x")) == kExitConfig);
    CHECK(exit_code_for(FormatError("x")) == kExitConfig);
    CHECK(exit_code_for(UnsupportedFormat("x")) == kExitConfig);
    CHECK(exit_code_for(TransportError("x")) == kExitTransport);
    CHECK(exit_code_for(DigestMismatch("x")) == kExitMismatch);
    CHECK(exit_code_for(UnknownChannel("x")) == kExitMismatch);
    CHECK(exit_code_for(FixtureMiss("x")) == kExitMismatch);
    CHECK(exit_code_for(ConcurrencyBoundExceeded("x")) == kExitMismatch);
    CHECK(exit_code_for(std::runtime_error("x")) == kExitFailure);
    std::ostringstream err;
    CHECK(run_guarded(err, [] { throw DigestMismatch("cycle"); }) == kExitMismatch);
    CHECK(err.str().rfind("fitgen: digest mismatch", 0) == 0);
}

TEST_CASE("classify outputs are byte-stable across runs") {
    TempDir a("stable-a"), b("stable-b");
    std::ostringstream sink;
    for (const auto* d : {&a, &b}) {
        CommandContext ctx;
        ctx.cfg = bundled(d->str());
        ctx.cfg.classify_n = {1};
        ctx.out = &sink;
        ctx.log = &sink;
        cmd_classify(ctx);
    }
    for (const char* f : {"classify/metrics.json", "classify/metrics.csv", "classify/predictions_N1.jsonl"})
        CHECK(read_text_file(a / f) == read_text_file(b / f));
}

TEST_CASE("fixture misses surface as FixtureMiss") {
    TempDir dir("miss");
    std::ostringstream sink;
    CommandContext ctx;
    ctx.cfg = bundled(dir.str());
    ctx.cfg.provider.model = "some-other-model";
    ctx.cfg.classify_n = {1};
    ctx.out = &sink;
    ctx.log = &sink;
    CHECK_THROWS_AS(cmd_classify(ctx), FixtureMiss);
}

TEST_CASE("cli: exit codes") {
    TempDir dir("cli");
    auto c = bundled(dir / "out");
    const std::string cfg = write_config(dir, c);

    CHECK(run_cli("--config " + cfg + " --provider live classify") == kExitConfig);
    write_text_file(dir / "bad.json", R"({"schema_version": 1, "nonsense": true})");
    CHECK(run_cli("--config " + dir / "bad.json" + " golden") == kExitConfig);
    CHECK(run_cli("--config " + cfg + " --model unknown-model --n 1 classify") == kExitMismatch);

    REQUIRE(run_cli("--config " + cfg + " golden") == kExitOk);

    FaultTestCase tc;
    tc.id = "TC-unknown";
    tc.locations = LocationMap({{"NOPE", 1}});
    tc.faults.emplace("NOPE", FaultSpec{DelayParams{0.5}, std::nullopt});
    tc.window = {175, 375};
    write_text_file(dir / "tcs.json", test_cases_to_text({tc}));
    CHECK(run_cli("--config " + cfg + " inject --tc " + dir / "tcs.json") == kExitMismatch);

    // golden trace recorded for another plant
    PlantConfig heavy;
    heavy.mass_kg = 2000;
    write_text_file(dir / "plant.json", plant_config_to_json(heavy).dump(2));
    auto c2 = c;
    c2.paths.plant_config = dir / "plant.json";
    const std::string cfg2 = write_config(dir, c2, "config2.json");
    tc = FaultTestCase{};
    tc.id = "TC-app";
    tc.locations = LocationMap::select(load_catalog(c.paths.catalog), {"APP"});
    tc.faults.emplace("APP", FaultSpec{DelayParams{0.5}, std::nullopt});
    tc.window = {175, 375};
    write_text_file(dir / "tcs2.json", test_cases_to_text({tc}));
    CHECK(run_cli("--config " + cfg2 + " inject --tc " + dir / "tcs2.json") == kExitMismatch);

    // a second invocation while the output directory is locked
    write_text_file(dir / "out/.fitgen.lock", "");
    CHECK(run_cli("--config " + cfg + " golden") == kExitConfig);
}
