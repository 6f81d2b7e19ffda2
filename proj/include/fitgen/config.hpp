#pragma once

// Run configuration for the command-line driver.
//
// Precedence: built-in defaults < config file < command-line flags. Relative
// paths in a config file resolve against the file's directory.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fitgen/compare.hpp"
#include "fitgen/errors.hpp"
#include "fitgen/fsr_model.hpp"
#include "fitgen/prompt.hpp"
#include "fitgen/provider.hpp"
#include "fitgen/simulator.hpp"

namespace fitgen {

inline constexpr int kConfigSchemaVersion = 1;

enum class ProviderKind { Live, Fixture };

struct RunConfig {
    struct Paths {
        std::string dataset = "data/fsr_dataset.jsonl";
        std::string catalog = "data/catalog_sensors.json";
        std::string actuator_catalog = "data/catalog_actuators.json";
        std::string templates;     // directory with classification.txt / generation.txt; empty = built-in
        std::string plant_config;  // empty = built-in plant
        std::string cycle;         // CSV; empty = built-in 400 s cycle
        std::string fixture = "data/fixtures/gpt-4o.jsonl";
        std::string out = "out";
    } paths;

    ProviderKind provider_kind = ProviderKind::Fixture;
    ProviderConfig provider;

    std::vector<int> classify_n{1, 3, 5};
    std::vector<int> generate_n{1, 3, 5, 8};
    std::vector<int> batch_sizes{2, 3, 5};
    bool allow_off_grid = false;

    std::vector<std::string> dropped{"WSA", "ST"};

    // Fault attached to every selected location when turning generated
    // location maps into test cases.
    std::map<std::string, FaultParams> fault_for;  // per component id
    FaultParams default_fault = DelayParams{0.5};
    Window window{175.0, 375.0};

    Thresholds thresholds;
    Pacing pacing;
    // Cap on test cases executed per inject call; 0 = all.
    std::size_t inject_limit = 0;

    FaultParams fault_for_component(const std::string& id) const {
        auto it = fault_for.find(id);
        return it == fault_for.end() ? default_fault : it->second;
    }

    // Paper ranges unless explicitly overridden; referenced files must exist.
    void check(bool require_files = true) const {
        if (!allow_off_grid) {
            for (int n : classify_n)
                if (!on_grid(n, kClassificationGrid)) throw ConfigError("classification N must be in {1,3,5}");
            for (int n : generate_n)
                if (!on_grid(n, kGenerationGrid)) throw ConfigError("generation N must be in {1,3,5,8}");
            for (int b : batch_sizes)
                if (!on_grid(b, kBatchGrid)) throw ConfigError("batch size must be in {1,2,3,5}");
        }
        for (int n : classify_n)
            if (n < 0) throw ConfigError("N must be non-negative");
        for (int n : generate_n)
            if (n < 0) throw ConfigError("N must be non-negative");
        for (int b : batch_sizes)
            if (b < 1) throw ConfigError("batch size must be positive");
        if (!window.well_formed()) throw ConfigError("injection window must satisfy 0 <= start < end");
        if (!params_problem(default_fault).empty()) throw ConfigError("default fault: " + params_problem(default_fault));
        if (thresholds.default_fraction < 0) throw ConfigError("threshold fraction must be non-negative");
        provider.check();
        if (!require_files) return;
        auto must_exist = [](const std::string& p, const char* what) {
            if (!p.empty() && !std::filesystem::exists(p))
                throw ConfigError(std::string(what) + " not found: " + p);
        };
        must_exist(paths.dataset, "dataset");
        must_exist(paths.catalog, "catalog");
        must_exist(paths.actuator_catalog, "actuator catalog");
        must_exist(paths.templates, "templates directory");
        must_exist(paths.plant_config, "plant config");
        must_exist(paths.cycle, "cycle");
        if (provider_kind == ProviderKind::Fixture) must_exist(paths.fixture, "fixture recording");
    }
};

namespace detail {

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
}

inline std::vector<int> int_list(const json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be a list of integers");
    std::vector<int> out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw ConfigError(std::string(what) + " must be a list of integers");
        out.push_back(v.get<int>());
    }
    return out;
}

inline void only_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ConfigError(std::string("unknown key '") + k + "' in " + where);
    }
}

}  // namespace detail

inline ProviderKind parse_provider_kind(std::string_view s) {
    if (s == "live") return ProviderKind::Live;
    if (s == "fixture") return ProviderKind::Fixture;
    throw ConfigError("provider must be 'live' or 'fixture'");
}

inline Pacing parse_pacing(std::string_view s) {
    if (s == "fast" || s == "afap") return Pacing::fast();
    constexpr std::string_view prefix = "wall:";
    if (s == "wall") return Pacing::wall_clock(1.0);
    if (s.substr(0, prefix.size()) == prefix) {
        const std::string rate(s.substr(prefix.size()));
        char* end = nullptr;
        const double r = std::strtod(rate.c_str(), &end);
        if (end == rate.c_str() || *end) throw ConfigError("bad pacing rate '" + rate + "'");
        return Pacing::wall_clock(r);
    }
    throw ConfigError("pacing must be 'fast', 'wall' or 'wall:<rate>'");
}

inline RunConfig config_from_json(const json& j, const std::filesystem::path& base = {}) {
    using detail::only_keys;
    RunConfig c;
    try {
        only_keys(j, {"schema_version", "paths", "provider", "grid", "dropped", "faults", "window", "thresholds",
                      "pacing", "inject_limit"},
                  "config");
        if (j.value("schema_version", 0) != kConfigSchemaVersion)
            throw ConfigError("config schema_version must be " + std::to_string(kConfigSchemaVersion));

        if (auto p = j.find("paths"); p != j.end()) {
            only_keys(*p, {"dataset", "catalog", "actuator_catalog", "templates", "plant_config", "cycle", "fixture", "out"},
                      "paths");
            auto set = [&](const char* key, std::string& dst) {
                if (auto it = p->find(key); it != p->end()) dst = it->get<std::string>();
            };
            set("dataset", c.paths.dataset);
            set("catalog", c.paths.catalog);
            set("actuator_catalog", c.paths.actuator_catalog);
            set("templates", c.paths.templates);
            set("plant_config", c.paths.plant_config);
            set("cycle", c.paths.cycle);
            set("fixture", c.paths.fixture);
            set("out", c.paths.out);
        }
        for (std::string* p : {&c.paths.dataset, &c.paths.catalog, &c.paths.actuator_catalog, &c.paths.templates,
                               &c.paths.plant_config, &c.paths.cycle, &c.paths.fixture, &c.paths.out})
            *p = detail::resolve(base, *p);

        if (auto p = j.find("provider"); p != j.end()) {
            only_keys(*p, {"kind", "endpoint", "model", "temperature", "seed", "timeout_s", "max_retries", "parallelism"},
                      "provider");
            if (p->contains("kind")) c.provider_kind = parse_provider_kind(p->at("kind").get<std::string>());
            c.provider.endpoint = p->value("endpoint", c.provider.endpoint);
            c.provider.model = p->value("model", c.provider.model);
            c.provider.temperature = p->value("temperature", c.provider.temperature);
            c.provider.seed = p->value("seed", c.provider.seed);
            c.provider.timeout_s = p->value("timeout_s", c.provider.timeout_s);
            c.provider.max_retries = p->value("max_retries", c.provider.max_retries);
            c.provider.parallelism = p->value("parallelism", c.provider.parallelism);
        }
        if (auto g = j.find("grid"); g != j.end()) {
            only_keys(*g, {"classify_n", "generate_n", "batch_sizes", "allow_off_grid"}, "grid");
            if (g->contains("classify_n")) c.classify_n = detail::int_list(g->at("classify_n"), "grid.classify_n");
            if (g->contains("generate_n")) c.generate_n = detail::int_list(g->at("generate_n"), "grid.generate_n");
            if (g->contains("batch_sizes")) c.batch_sizes = detail::int_list(g->at("batch_sizes"), "grid.batch_sizes");
            c.allow_off_grid = g->value("allow_off_grid", false);
        }
        if (auto d = j.find("dropped"); d != j.end()) c.dropped = d->get<std::vector<std::string>>();
        if (auto f = j.find("faults"); f != j.end()) {
            only_keys(*f, {"default", "per_component"}, "faults");
            if (f->contains("default")) c.default_fault = fault_params_from_json(f->at("default"));
            if (auto pc = f->find("per_component"); pc != f->end())
                for (const auto& [id, spec] : pc->items()) c.fault_for.insert_or_assign(id, fault_params_from_json(spec));
        }
        if (auto w = j.find("window"); w != j.end()) c.window = window_from_json(*w);
        if (auto t = j.find("thresholds"); t != j.end()) {
            only_keys(*t, {"default_fraction", "floor", "per_channel"}, "thresholds");
            c.thresholds.default_fraction = t->value("default_fraction", c.thresholds.default_fraction);
            c.thresholds.floor = t->value("floor", c.thresholds.floor);
            if (t->contains("per_channel"))
                c.thresholds.per_channel = t->at("per_channel").get<std::map<std::string, double>>();
        }
        if (auto p = j.find("pacing"); p != j.end()) c.pacing = parse_pacing(p->get<std::string>());
        c.inject_limit = j.value("inject_limit", std::size_t{0});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const FormatError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    json j;
    try {
        j = read_json_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return config_from_json(j, std::filesystem::path(path).parent_path());
}

inline ordered_json config_to_json(const RunConfig& c) {
    ordered_json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["paths"] = {{"dataset", c.paths.dataset},       {"catalog", c.paths.catalog},
                  {"actuator_catalog", c.paths.actuator_catalog}, {"templates", c.paths.templates},
                  {"plant_config", c.paths.plant_config}, {"cycle", c.paths.cycle},
                  {"fixture", c.paths.fixture},       {"out", c.paths.out}};
    j["provider"] = {{"kind", c.provider_kind == ProviderKind::Live ? "live" : "fixture"},
                     {"endpoint", c.provider.endpoint},
                     {"model", c.provider.model},
                     {"temperature", c.provider.temperature},
                     {"seed", c.provider.seed},
                     {"timeout_s", c.provider.timeout_s},
                     {"max_retries", c.provider.max_retries},
                     {"parallelism", c.provider.parallelism}};
    j["grid"] = {{"classify_n", c.classify_n},
                 {"generate_n", c.generate_n},
                 {"batch_sizes", c.batch_sizes},
                 {"allow_off_grid", c.allow_off_grid}};
    j["dropped"] = c.dropped;
    ordered_json per = ordered_json::object();
    for (const auto& [id, p] : c.fault_for) per[id] = fault_params_to_json(p);
    j["faults"] = {{"default", fault_params_to_json(c.default_fault)}, {"per_component", per}};
    j["window"] = window_to_json(c.window);
    j["thresholds"] = {{"default_fraction", c.thresholds.default_fraction},
                       {"floor", c.thresholds.floor},
                       {"per_channel", c.thresholds.per_channel}};
    j["pacing"] = c.pacing.mode == Pacing::Mode::AsFastAsPossible
                      ? std::string("fast")
                      : "wall:" + std::to_string(c.pacing.rate);
    j["inject_limit"] = c.inject_limit;
    return j;
}

}  // namespace fitgen
