#pragma once

// Renders metrics grids and violation reports as text tables, JSON, CSV,
// markdown, or (violations only) an SVG overlay of golden vs faulty traces.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fitgen/compare.hpp"
#include "fitgen/errors.hpp"
#include "fitgen/metrics.hpp"
#include "fitgen/simulator.hpp"

namespace fitgen {

enum class ReportFormat { Text, Json, Csv, Markdown, Svg };

inline ReportFormat parse_report_format(std::string_view s) {
    if (s == "text" || s == "table-text") return ReportFormat::Text;
    if (s == "json") return ReportFormat::Json;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "md" || s == "markdown") return ReportFormat::Markdown;
    if (s == "svg" || s == "svg-plot") return ReportFormat::Svg;
    throw UnsupportedFormat(std::string(s));
}

namespace detail {

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline std::string pad(std::string s, std::size_t w, bool right = false) {
    if (s.size() >= w) return s;
    return right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

struct GridLayout {
    std::vector<int> ns;
    // (trial, batch size, model) in first-seen order
    std::vector<std::tuple<std::string, int, std::string>> rows;
    std::map<std::tuple<std::string, int, std::string, int>, const MetricsReport*> cells;
};

inline GridLayout layout(const std::vector<MetricsReport>& reports) {
    GridLayout g;
    std::set<int> ns;
    for (const auto& r : reports) {
        ns.insert(r.n_examples);
        auto key = std::make_tuple(r.trial, r.batch_size, r.model);
        if (std::find(g.rows.begin(), g.rows.end(), key) == g.rows.end()) g.rows.push_back(key);
        g.cells[std::make_tuple(r.trial, r.batch_size, r.model, r.n_examples)] = &r;
    }
    g.ns.assign(ns.begin(), ns.end());
    return g;
}

}  // namespace detail

// Rows are (trial, BS, model); columns are N with a paired Acc/F1 per column,
// values in percent rounded half-up to one decimal.
inline std::string render_metrics_text(const std::vector<MetricsReport>& reports) {
    using namespace detail;
    const auto g = layout(reports);
    std::string out;
    std::string header1 = pad("Trial", 9) + pad("BS", 4) + pad("Model", 14);
    std::string header2 = pad("", 27);
    for (int n : g.ns) {
        header1 += "| " + pad("N=" + std::to_string(n), 13);
        header2 += "| " + pad("Acc", 6, true) + " " + pad("F1", 6, true);
    }
    out += header1 + "\n" + header2 + "\n" + std::string(header2.size(), '-') + "\n";
    for (const auto& [trial, bs, model] : g.rows) {
        std::string line = pad(trial, 9) + pad(std::to_string(bs), 4) + pad(model, 14);
        for (int n : g.ns) {
            auto it = g.cells.find(std::make_tuple(trial, bs, model, n));
            if (it == g.cells.end()) {
                line += "| " + pad("-", 6, true) + " " + pad("-", 6, true);
                continue;
            }
            line += "| " + pad(fmt("%.1f", percent_1dp(it->second->accuracy)), 6, true) + " " +
                    pad(fmt("%.1f", percent_1dp(it->second->f1_macro)), 6, true);
        }
        out += line + "\n";
    }
    return out;
}

inline std::string render_metrics_markdown(const std::vector<MetricsReport>& reports) {
    using namespace detail;
    const auto g = layout(reports);
    std::string out = "| Trial | BS | Model |";
    std::string sep = "|---|---|---|";
    for (int n : g.ns) {
        out += " N=" + std::to_string(n) + " Acc | N=" + std::to_string(n) + " F1 |";
        sep += "---:|---:|";
    }
    out += "\n" + sep + "\n";
    for (const auto& [trial, bs, model] : g.rows) {
        out += "| " + trial + " | " + std::to_string(bs) + " | " + model + " |";
        for (int n : g.ns) {
            auto it = g.cells.find(std::make_tuple(trial, bs, model, n));
            if (it == g.cells.end()) out += " - | - |";
            else
                out += " " + fmt("%.1f", percent_1dp(it->second->accuracy)) + " | " +
                       fmt("%.1f", percent_1dp(it->second->f1_macro)) + " |";
        }
        out += "\n";
    }
    return out;
}

inline std::string render_metrics_csv(const std::vector<MetricsReport>& reports) {
    std::string out =
        "trial,model,n_examples,batch_size,accuracy_pct,f1_macro_pct,accuracy,f1_macro,failures,eval_count,"
        "example_pool_count,requests,prompt_tokens,completion_tokens\n";
    for (const auto& r : reports) {
        out += detail::csv_field(r.trial) + "," + detail::csv_field(r.model) + "," + std::to_string(r.n_examples) +
               "," + std::to_string(r.batch_size) + "," + detail::fmt("%.1f", percent_1dp(r.accuracy)) + "," +
               detail::fmt("%.1f", percent_1dp(r.f1_macro)) + "," + detail::fmt("%.17g", r.accuracy) + "," +
               detail::fmt("%.17g", r.f1_macro) + "," + std::to_string(r.failures) + "," +
               std::to_string(r.eval_count) + "," + std::to_string(r.example_pool_count) + "," +
               std::to_string(r.requests) + "," + std::to_string(r.tokens.prompt_tokens) + "," +
               std::to_string(r.tokens.completion_tokens) + "\n";
    }
    return out;
}

inline std::string render_report(const std::vector<MetricsReport>& reports, ReportFormat format) {
    switch (format) {
        case ReportFormat::Text: return render_metrics_text(reports);
        case ReportFormat::Json: return metrics_table_to_json(reports).dump(2) + "\n";
        case ReportFormat::Csv: return render_metrics_csv(reports);
        case ReportFormat::Markdown: return render_metrics_markdown(reports);
        case ReportFormat::Svg: break;
    }
    throw UnsupportedFormat("metrics reports have no svg rendering");
}

// ---------------------------------------------------------------------------
// Violation reports
// ---------------------------------------------------------------------------

struct PlotTraces {
    const Trace& golden;
    const Trace& faulty;
};

inline std::string render_violation_text(const ViolationReport& r) {
    using namespace detail;
    std::string out = "Test case: " + (r.tc_id.empty() ? std::string("(none)") : r.tc_id) + "\n";
    for (const auto& s : r.injections)
        out += "  injected " + s.fault + " on " + s.channel + " in [" + fmt("%g", s.window.t_start_s) + ", " +
               fmt("%g", s.window.t_end_s) + ") s\n";
    if (r.findings.empty()) return out + "Zero findings.\n";
    out += pad("Channel", 9) + pad("Verdict", 11) + pad("First exceed [s]", 18, true) + pad("Max |dev|", 14, true) +
           pad("Threshold", 14, true) + "\n";
    for (const auto& f : r.findings) {
        out += pad(f.channel, 9) + pad(std::string(to_string(f.verdict)), 11) +
               pad(f.first_exceed_s ? fmt("%.2f", *f.first_exceed_s) : std::string("-"), 18, true) +
               pad(fmt("%.6g", f.max_abs_deviation), 14, true) + pad(fmt("%.6g", f.threshold), 14, true) + "\n";
    }
    return out + r.narrative + "\n";
}

inline std::string render_violation_markdown(const ViolationReport& r) {
    using namespace detail;
    std::string out = "# Fault effect report: " + (r.tc_id.empty() ? std::string("(none)") : r.tc_id) + "\n\n";
    out += r.narrative + "\n\n";
    if (!r.injections.empty()) {
        out += "## Injected faults\n\n";
        for (const auto& s : r.injections)
            out += "- `" + s.fault + "` on `" + s.channel + "` during [" + fmt("%g", s.window.t_start_s) + ", " +
                   fmt("%g", s.window.t_end_s) + ") s\n";
        out += "\n";
    }
    if (r.findings.empty()) return out + "Zero findings.\n";
    out += "## Findings\n\n| Channel | Verdict | First exceed [s] | Max abs deviation | Threshold |\n|---|---|---:|---:|---:|\n";
    for (const auto& f : r.findings)
        out += "| " + f.channel + " | " + std::string(to_string(f.verdict)) + " | " +
               (f.first_exceed_s ? fmt("%.2f", *f.first_exceed_s) : std::string("-")) + " | " +
               fmt("%.6g", f.max_abs_deviation) + " | " + fmt("%.6g", f.threshold) + " |\n";
    return out;
}

inline std::string render_violation_csv(const ViolationReport& r) {
    std::string out = "tc_id,channel,verdict,first_exceed_s,max_abs_deviation,max_deviation_at_s,threshold\n";
    for (const auto& f : r.findings)
        out += detail::csv_field(r.tc_id) + "," + f.channel + "," + std::string(to_string(f.verdict)) + "," +
               (f.first_exceed_s ? detail::fmt("%.9g", *f.first_exceed_s) : std::string{}) + "," +
               detail::fmt("%.9g", f.max_abs_deviation) + "," + detail::fmt("%.9g", f.max_deviation_at_s) + "," +
               detail::fmt("%.9g", f.threshold) + "\n";
    return out;
}

// One panel per channel: golden (grey) and faulty (red) polylines, injection
// windows shaded. Series are decimated to at most ~2000 points per panel.
inline std::string render_violation_svg(const ViolationReport& r, const PlotTraces& traces) {
    using namespace detail;
    const Trace& g = traces.golden;
    const Trace& f = traces.faulty;
    const double width = 900, panel_h = 140, margin_l = 70, margin_r = 20, gap = 30;
    const std::size_t nch = g.channels.size();
    const double height = gap + static_cast<double>(nch) * (panel_h + gap);
    const double duration = std::max(g.time(g.samples()), g.dt);
    const std::size_t stride = std::max<std::size_t>(1, g.samples() / 2000);
    const double plot_w = width - margin_l - margin_r;

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%g", width) + "\" height=\"" +
                      fmt("%g", height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out += "<title>" + (r.tc_id.empty() ? std::string("golden vs faulty") : r.tc_id) + "</title>\n";
    for (std::size_t c = 0; c < nch; ++c) {
        const double top = gap + static_cast<double>(c) * (panel_h + gap);
        const auto& gv = g.values[c];
        const auto& fv = f.values[c];
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t k = 0; k < gv.size(); ++k) {
            for (double v : {gv[k], fv[k]})
                if (std::isfinite(v)) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
        }
        if (!std::isfinite(lo)) lo = hi = 0;
        if (hi - lo < 1e-12) {
            lo -= 1;
            hi += 1;
        }
        auto x = [&](double t) { return margin_l + plot_w * t / duration; };
        auto y = [&](double v) { return top + panel_h - panel_h * (std::clamp(v, lo, hi) - lo) / (hi - lo); };

        for (const auto& s : r.injections) {
            const double x0 = x(std::min(s.window.t_start_s, duration));
            const double x1 = x(std::min(s.window.t_end_s, duration));
            out += "<rect x=\"" + fmt("%.1f", x0) + "\" y=\"" + fmt("%.1f", top) + "\" width=\"" +
                   fmt("%.1f", std::max(0.0, x1 - x0)) + "\" height=\"" + fmt("%g", panel_h) +
                   "\" fill=\"#f4c542\" fill-opacity=\"0.25\"/>\n";
        }
        out += "<rect x=\"" + fmt("%g", margin_l) + "\" y=\"" + fmt("%.1f", top) + "\" width=\"" + fmt("%g", plot_w) +
               "\" height=\"" + fmt("%g", panel_h) + "\" fill=\"none\" stroke=\"#888\"/>\n";
        out += "<text x=\"4\" y=\"" + fmt("%.1f", top + 12) + "\">" + g.channels[c] + "</text>\n";
        out += "<text x=\"4\" y=\"" + fmt("%.1f", top + panel_h) + "\">" + fmt("%.4g", lo) + "</text>\n";
        out += "<text x=\"4\" y=\"" + fmt("%.1f", top + 26) + "\">" + fmt("%.4g", hi) + "</text>\n";
        for (int series = 0; series < 2; ++series) {
            const auto& v = series == 0 ? gv : fv;
            std::string pts;
            for (std::size_t k = 0; k < v.size(); k += stride)
                pts += fmt("%.1f", x(g.time(k))) + "," + fmt("%.1f", y(std::isfinite(v[k]) ? v[k] : lo)) + " ";
            out += std::string("<polyline fill=\"none\" stroke=\"") + (series == 0 ? "#777" : "#d62728") +
                   "\" stroke-width=\"1\" points=\"" + pts + "\"/>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

inline std::string render_report(const ViolationReport& r, ReportFormat format,
                                 const PlotTraces* traces = nullptr) {
    switch (format) {
        case ReportFormat::Text: return render_violation_text(r);
        case ReportFormat::Json: return to_json(r).dump(2) + "\n";
        case ReportFormat::Csv: return render_violation_csv(r);
        case ReportFormat::Markdown: return render_violation_markdown(r);
        case ReportFormat::Svg:
            if (!traces) throw UnsupportedFormat("svg plot needs the golden and faulty traces");
            return render_violation_svg(r, *traces);
    }
    throw UnsupportedFormat("unknown format");
}

}  // namespace fitgen
