#pragma once

// Golden-run differencing: per channel, the largest deviation of a faulty
// run from the golden run and the first time it crosses a threshold.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fitgen/errors.hpp"
#include "fitgen/fsr_model.hpp"
#include "fitgen/simulator.hpp"

namespace fitgen {

// Per-channel absolute thresholds; channels without one get
// max(default_fraction * golden dynamic range, floor).
struct Thresholds {
    std::map<std::string, double> per_channel;
    double default_fraction = 0.05;
    double floor = 1e-9;

    double for_channel(const std::string& id, const std::vector<double>& golden) const {
        if (auto it = per_channel.find(id); it != per_channel.end()) return it->second;
        if (golden.empty()) return floor;
        const auto [lo, hi] = std::minmax_element(golden.begin(), golden.end());
        return std::max(default_fraction * (*hi - *lo), floor);
    }
};

enum class Verdict { Mitigated, Violated };

inline std::string_view to_string(Verdict v) { return v == Verdict::Violated ? "violated" : "mitigated"; }

struct ChannelFinding {
    std::string channel;
    std::optional<double> first_exceed_s;
    double max_abs_deviation = 0.0;
    double max_deviation_at_s = 0.0;
    double threshold = 0.0;
    Verdict verdict = Verdict::Mitigated;
};

struct InjectionSpan {
    std::string channel;
    std::string fault;
    Window window;
};

struct ViolationReport {
    std::string tc_id;
    std::vector<ChannelFinding> findings;
    std::vector<InjectionSpan> injections;
    std::string narrative;

    bool violated() const {
        return std::any_of(findings.begin(), findings.end(), [](const auto& f) { return f.verdict == Verdict::Violated; });
    }
    const ChannelFinding* finding(const std::string& channel) const {
        for (const auto& f : findings)
            if (f.channel == channel) return &f;
        return nullptr;
    }
};

inline std::string violation_narrative(const ViolationReport& r) {
    std::vector<std::string> hit;
    for (const auto& f : r.findings)
        if (f.verdict == Verdict::Violated) hit.push_back(f.channel);
    if (r.findings.empty()) return "No channels analysed; zero findings.";
    if (hit.empty())
        return "All " + std::to_string(r.findings.size()) + " channels stayed within their thresholds; the fault was mitigated.";
    std::string s = std::to_string(hit.size()) + " of " + std::to_string(r.findings.size()) +
                    " channels exceeded their thresholds:";
    for (const auto& h : hit) {
        const auto* f = r.finding(h);
        char buf[128];
        std::snprintf(buf, sizeof buf, " %s (first at %.2f s, max |dev| %.4g)", h.c_str(), *f->first_exceed_s,
                      f->max_abs_deviation);
        s += buf;
    }
    return s + ".";
}

// Both traces must share the step, the sample count and the channel list.
// Deviation is evaluated at every step; horizon_end_s limits the analysis.
inline ViolationReport compare_traces(const Trace& golden, const Trace& faulty, const Thresholds& thresholds,
                                      std::optional<double> horizon_end_s = std::nullopt) {
    if (std::abs(golden.dt - faulty.dt) > 1e-12) throw TimeBaseMismatch("step sizes differ");
    if (golden.samples() != faulty.samples())
        throw TimeBaseMismatch(std::to_string(golden.samples()) + " vs " + std::to_string(faulty.samples()) + " samples");
    if (golden.channels != faulty.channels) throw TimeBaseMismatch("channel sets differ");

    ViolationReport r;
    r.tc_id = faulty.tc_ids.empty() ? std::string{} : faulty.tc_ids.front();
    for (std::size_t i = 1; i < faulty.tc_ids.size(); ++i) r.tc_id += "+" + faulty.tc_ids[i];
    for (std::size_t c = 0; c < golden.channels.size(); ++c) {
        const auto& g = golden.values[c];
        const auto& f = faulty.values[c];
        ChannelFinding fd;
        fd.channel = golden.channels[c];
        fd.threshold = thresholds.for_channel(fd.channel, g);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double t = golden.time(k);
            if (horizon_end_s && t > *horizon_end_s) break;
            const double dev = std::abs(f[k] - g[k]);
            if (dev > fd.max_abs_deviation || std::isnan(dev)) {
                fd.max_abs_deviation = std::isnan(dev) ? std::numeric_limits<double>::infinity() : dev;
                fd.max_deviation_at_s = t;
            }
            if (!fd.first_exceed_s && !(dev <= fd.threshold)) fd.first_exceed_s = t;
        }
        fd.verdict = fd.max_abs_deviation > fd.threshold ? Verdict::Violated : Verdict::Mitigated;
        r.findings.push_back(fd);
    }
    r.narrative = violation_narrative(r);
    return r;
}

inline std::vector<InjectionSpan> injection_spans(const std::vector<FaultTestCase>& tcs) {
    std::vector<InjectionSpan> out;
    for (const auto& tc : tcs)
        for (const auto& id : tc.locations.selected()) {
            auto it = tc.faults.find(id);
            out.push_back({id, it == tc.faults.end() ? "" : std::string(to_string(fault_type_of(it->second.params))),
                           tc.window_for(id)});
        }
    return out;
}

inline ordered_json to_json(const ViolationReport& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["tc_id"] = r.tc_id;
    ordered_json inj = ordered_json::array();
    for (const auto& s : r.injections)
        inj.push_back({{"channel", s.channel}, {"fault", s.fault}, {"window", window_to_json(s.window)}});
    j["injections"] = inj;
    ordered_json fs = ordered_json::array();
    for (const auto& f : r.findings) {
        ordered_json e;
        e["channel"] = f.channel;
        e["first_exceed_s"] = f.first_exceed_s ? ordered_json(*f.first_exceed_s) : ordered_json(nullptr);
        e["max_abs_deviation"] = f.max_abs_deviation;
        e["max_deviation_at_s"] = f.max_deviation_at_s;
        e["threshold"] = f.threshold;
        e["verdict"] = std::string(to_string(f.verdict));
        fs.push_back(e);
    }
    j["findings"] = fs;
    j["violated"] = r.violated();
    j["narrative"] = r.narrative;
    return j;
}

inline ViolationReport violation_report_from_json(const json& j) {
    ViolationReport r;
    try {
        r.tc_id = j.at("tc_id").get<std::string>();
        for (const auto& s : j.at("injections"))
            r.injections.push_back({s.at("channel"), s.at("fault"), window_from_json(s.at("window"))});
        for (const auto& e : j.at("findings")) {
            ChannelFinding f;
            f.channel = e.at("channel").get<std::string>();
            if (!e.at("first_exceed_s").is_null()) f.first_exceed_s = e.at("first_exceed_s").get<double>();
            f.max_abs_deviation = e.at("max_abs_deviation").get<double>();
            f.max_deviation_at_s = e.at("max_deviation_at_s").get<double>();
            f.threshold = e.at("threshold").get<double>();
            f.verdict = e.at("verdict").get<std::string>() == "violated" ? Verdict::Violated : Verdict::Mitigated;
            r.findings.push_back(f);
        }
        r.narrative = j.at("narrative").get<std::string>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("violation report: ") + e.what());
    }
    return r;
}

}  // namespace fitgen
