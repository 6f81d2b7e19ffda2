#pragma once

// Trace files: CSV `t_s,<channel>...` at 9 significant digits, with
// pre-interposition shadow columns named `pre:<channel>`, plus a JSON sidecar
// carrying the run identity and digests.

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "fitgen/errors.hpp"
#include "fitgen/fsr_model.hpp"
#include "fitgen/simulator.hpp"

namespace fitgen {

inline constexpr int kTraceSchemaVersion = 1;

inline std::string format_9g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline double round_9g(double v) { return std::strtod(format_9g(v).c_str(), nullptr); }

inline std::string trace_to_csv(const Trace& t) {
    std::string out = "t_s";
    for (const auto& c : t.channels) out += "," + c;
    for (const auto& c : t.shadow_channels) out += ",pre:" + c;
    out += '\n';
    for (std::size_t k = 0; k < t.samples(); ++k) {
        out += format_9g(t.time(k));
        for (const auto& col : t.values) out += "," + format_9g(col[k]);
        for (const auto& col : t.shadow_values) out += "," + format_9g(col[k]);
        out += '\n';
    }
    return out;
}

inline ordered_json trace_metadata_to_json(const Trace& t) {
    ordered_json j;
    j["schema_version"] = kTraceSchemaVersion;
    j["run_id"] = t.run_id;
    j["kind"] = t.kind == RunKind::Golden ? "golden" : "faulty";
    j["tc_ids"] = t.tc_ids;
    j["dt_s"] = t.dt;
    j["samples"] = t.samples();
    j["channels"] = t.channels;
    j["shadow_channels"] = t.shadow_channels;
    j["cycle_digest"] = t.meta.cycle_digest;
    j["plant_digest"] = t.meta.plant_digest;
    j["fault_digest"] = t.meta.fault_digest;
    return j;
}

inline Trace trace_from_files_text(std::string_view csv, const json& meta) {
    Trace t;
    try {
        if (meta.at("schema_version").get<int>() != kTraceSchemaVersion) throw FormatError("unsupported trace schema");
        t.run_id = meta.at("run_id").get<std::string>();
        t.kind = meta.at("kind").get<std::string>() == "golden" ? RunKind::Golden : RunKind::Faulty;
        t.tc_ids = meta.at("tc_ids").get<std::vector<std::string>>();
        t.dt = meta.at("dt_s").get<double>();
        t.channels = meta.at("channels").get<std::vector<std::string>>();
        t.shadow_channels = meta.at("shadow_channels").get<std::vector<std::string>>();
        t.meta.cycle_digest = meta.at("cycle_digest").get<std::string>();
        t.meta.plant_digest = meta.at("plant_digest").get<std::string>();
        t.meta.fault_digest = meta.at("fault_digest").get<std::string>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("trace metadata: ") + e.what());
    }
    const std::size_t ncols = 1 + t.channels.size() + t.shadow_channels.size();
    t.values.assign(t.channels.size(), {});
    t.shadow_values.assign(t.shadow_channels.size(), {});

    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line)) throw FormatError("trace CSV is empty");
    std::string expected = "t_s";
    for (const auto& c : t.channels) expected += "," + c;
    for (const auto& c : t.shadow_channels) expected += ",pre:" + c;
    if (line != expected) throw FormatError("trace CSV header does not match its metadata");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(ncols);
        const char* p = line.c_str();
        while (*p) {
            char* end = nullptr;
            row.push_back(std::strtod(p, &end));
            if (end == p) throw FormatError("bad number in trace row");
            p = *end == ',' ? end + 1 : end;
        }
        if (row.size() != ncols) throw FormatError("trace row has " + std::to_string(row.size()) + " columns");
        for (std::size_t i = 0; i < t.channels.size(); ++i) t.values[i].push_back(row[1 + i]);
        for (std::size_t i = 0; i < t.shadow_channels.size(); ++i)
            t.shadow_values[i].push_back(row[1 + t.channels.size() + i]);
    }
    if (meta.value("samples", t.samples()) != t.samples()) throw FormatError("trace sample count differs from metadata");
    return t;
}

// Writes <stem>.csv and <stem>.meta.json.
inline void write_trace(const Trace& t, const std::string& stem) {
    write_text_file(stem + ".csv", trace_to_csv(t));
    write_text_file(stem + ".meta.json", trace_metadata_to_json(t).dump(2) + "\n");
}

inline Trace read_trace(const std::string& stem) {
    return trace_from_files_text(read_text_file(stem + ".csv"), read_json_file(stem + ".meta.json"));
}

// The values a trace has after a CSV round trip.
inline Trace quantized(Trace t) {
    for (auto& col : t.values)
        for (auto& v : col) v = round_9g(v);
    for (auto& col : t.shadow_values)
        for (auto& v : col) v = round_9g(v);
    return t;
}

}  // namespace fitgen
