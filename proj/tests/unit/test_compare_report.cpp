#include <catch2/catch_amalgamated.hpp>

#include "fitgen/compare.hpp"
#include "fitgen/report.hpp"

using namespace fitgen;

namespace {

// Two channels over 400 s at 0.1 s: "A" ramps, "B" is flat.
Trace synthetic(double step_at_s, double factor) {
    Trace t;
    t.dt = 0.1;
    t.channels = {"A", "B"};
    t.values.assign(2, {});
    for (int k = 0; k < 4000; ++k) {
        const double time = k * 0.1;
        const double a = 1.0 + time / 400.0;
        t.values[0].push_back(time >= step_at_s - 1e-9 ? a * factor : a);
        t.values[1].push_back(3.0);
    }
    return t;
}

MetricsReport row(std::string trial, int n, int bs, double acc, double f1) {
    MetricsReport r;
    r.trial = std::move(trial);
    r.model = "gpt-4o";
    r.n_examples = n;
    r.batch_size = bs;
    r.accuracy = acc;
    r.f1_macro = f1;
    return r;
}

}  // namespace

TEST_CASE("a 2x step at 200 s is found at 200 s on that channel only") {
    const auto golden = synthetic(1e9, 1.0);
    auto faulty = synthetic(200.0, 2.0);
    faulty.tc_ids = {"TC-step"};
    Thresholds th;
    th.per_channel["A"] = 0.5;
    const auto r = compare_traces(golden, faulty, th);
    CHECK(r.tc_id == "TC-step");
    const auto* a = r.finding("A");
    REQUIRE(a != nullptr);
    REQUIRE(a->first_exceed_s.has_value());
    CHECK(*a->first_exceed_s == Catch::Approx(200.0));
    CHECK(a->verdict == Verdict::Violated);
    CHECK(a->max_abs_deviation == Catch::Approx(2.0 - 1.0 / 4000.0).epsilon(1e-3));
    CHECK(r.finding("B")->verdict == Verdict::Mitigated);
    CHECK_FALSE(r.finding("B")->first_exceed_s.has_value());
    CHECK(r.violated());
    CHECK(r.narrative.find("1 of 2 channels") != std::string::npos);
}

TEST_CASE("raising a threshold never makes the first exceed earlier") {
    const auto golden = synthetic(1e9, 1.0);
    const auto faulty = synthetic(100.0, 1.5);
    std::optional<double> prev = 0.0;
    for (double th : {0.1, 0.4, 0.6, 0.7, 0.74, 0.76, 2.0}) {
        Thresholds t;
        t.per_channel["A"] = th;
        const auto f = compare_traces(golden, faulty, t).finding("A")->first_exceed_s;
        if (!prev) {
            CHECK_FALSE(f.has_value());
        } else if (f) {
            CHECK(*f >= *prev);
        }
        prev = f;
    }
    CHECK_FALSE(prev.has_value());
}

TEST_CASE("horizon limits the analysis and time bases must match") {
    const auto golden = synthetic(1e9, 1.0);
    const auto faulty = synthetic(300.0, 2.0);
    Thresholds th;
    th.per_channel["A"] = 0.5;
    CHECK_FALSE(compare_traces(golden, faulty, th, 250.0).violated());
    auto shorter = faulty;
    for (auto& v : shorter.values) v.pop_back();
    CHECK_THROWS_AS(compare_traces(golden, shorter, th), TimeBaseMismatch);
    auto other_dt = faulty;
    other_dt.dt = 0.2;
    CHECK_THROWS_AS(compare_traces(golden, other_dt, th), TimeBaseMismatch);
}

TEST_CASE("default threshold is a fraction of the golden range") {
    Thresholds th;
    CHECK(th.for_channel("A", {0, 10}) == Catch::Approx(0.5));
    CHECK(th.for_channel("A", {3, 3}) == th.floor);
}

TEST_CASE("violation reports render in every format and round trip through json") {
    const auto golden = synthetic(1e9, 1.0);
    auto faulty = synthetic(200.0, 2.0);
    faulty.tc_ids = {"TC-1"};
    auto r = compare_traces(golden, faulty, Thresholds{});
    r.injections = {{"A", "gain", Window{200, 400}}};

    const auto text = render_report(r, ReportFormat::Text);
    CHECK(text.find("Test case: TC-1") != std::string::npos);
    CHECK(text.find("violated") != std::string::npos);
    CHECK(render_report(r, ReportFormat::Markdown).find("| A | violated |") != std::string::npos);
    CHECK(render_report(r, ReportFormat::Csv).rfind("tc_id,channel,verdict", 0) == 0);
    const PlotTraces traces{golden, faulty};
    const auto svg = render_report(r, ReportFormat::Svg, &traces);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("#d62728") != std::string::npos);
    CHECK_THROWS_AS(render_report(r, ReportFormat::Svg), UnsupportedFormat);

    const auto back = violation_report_from_json(json::parse(render_report(r, ReportFormat::Json)));
    CHECK(to_json(back) == to_json(r));
}

TEST_CASE("an empty report prints zero findings") {
    const ViolationReport empty;
    CHECK(render_report(empty, ReportFormat::Text).find("Zero findings.") != std::string::npos);
    CHECK(render_report(empty, ReportFormat::Markdown).find("Zero findings.") != std::string::npos);
}

TEST_CASE("metrics table layout: one row per trial and batch size, Acc/F1 per N") {
    const std::vector<MetricsReport> rows{row("classify", 1, 1, 121.0 / 134.0, 0.88), row("classify", 3, 1, 0.866, 0.84),
                                          row("batch", 1, 2, 0.9, 0.95)};
    const auto text = render_report(rows, ReportFormat::Text);
    CHECK(text.find("N=1") != std::string::npos);
    CHECK(text.find("N=3") != std::string::npos);
    CHECK(text.find("90.3") != std::string::npos);
    CHECK(text.find("88.0") != std::string::npos);
    const auto md = render_report(rows, ReportFormat::Markdown);
    CHECK(md.find("| Trial | BS | Model |") == 0);
    CHECK(render_report(rows, ReportFormat::Csv).find("classify") != std::string::npos);
    CHECK(metrics_table_from_json(json::parse(render_report(rows, ReportFormat::Json))).size() == 3);
    CHECK_THROWS_AS(render_report(rows, ReportFormat::Svg), UnsupportedFormat);
}

TEST_CASE("format names") {
    CHECK(parse_report_format("md") == ReportFormat::Markdown);
    CHECK(parse_report_format("table-text") == ReportFormat::Text);
    CHECK(parse_report_format("svg-plot") == ReportFormat::Svg);
    CHECK_THROWS_AS(parse_report_format("pdf"), UnsupportedFormat);
}
