#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fitgen/metrics.hpp"
#include "test_support.hpp"

using namespace fitgen;

namespace {

// Counts by scanning sample by sample; F1 as 2TP / (2TP + FP + FN).
struct Oracle {
    static double acc(const std::vector<Prediction>& p, const std::vector<LabelSet>& g) {
        int hit = 0;
        for (std::size_t i = 0; i < p.size(); ++i) hit += p[i].has_value() && *p[i] == g[i];
        return static_cast<double>(hit) / static_cast<double>(p.size());
    }
    static double f1(const std::vector<Prediction>& p, const std::vector<LabelSet>& g,
                     const std::vector<std::string>& classes) {
        double sum = 0;
        for (const auto& c : classes) {
            int tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const bool pr = p[i] && std::find(p[i]->begin(), p[i]->end(), c) != p[i]->end();
                const bool gd = std::find(g[i].begin(), g[i].end(), c) != g[i].end();
                tp += pr && gd;
                fp += pr && !gd;
                fn += !pr && gd;
            }
            sum += tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
        }
        return sum / static_cast<double>(classes.size());
    }
};

LabelSet random_set(std::mt19937& rng, const std::vector<std::string>& classes) {
    LabelSet s;
    const int k = static_cast<int>(rng() % 3);
    for (int i = 0; i < k; ++i) s.insert(classes[rng() % classes.size()]);
    return s;
}

}  // namespace

TEST_CASE("accuracy and f1 macro agree with a brute-force oracle") {
    const std::vector<std::string> classes{"APP", "WSA", "WS", "YR", "ST"};
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 60;
        std::vector<Prediction> p;
        std::vector<LabelSet> g;
        for (std::size_t i = 0; i < n; ++i) {
            g.push_back(random_set(rng, classes));
            if (rng() % 10 == 0) p.push_back(std::nullopt);
            else if (rng() % 2 == 0) p.push_back(g.back());
            else p.push_back(random_set(rng, classes));
        }
        REQUIRE(std::abs(accuracy(p, g) - Oracle::acc(p, g)) <= 1e-12);
        REQUIRE(std::abs(f1_macro(p, g, classes) - Oracle::f1(p, g, classes)) <= 1e-12);
    }
}

TEST_CASE("metrics are invariant under permutation and duplication") {
    const std::vector<std::string> classes{"sensor", "actuator"};
    std::vector<Prediction> p{LabelSet{"sensor"}, LabelSet{"actuator"}, std::nullopt, LabelSet{"sensor"}};
    std::vector<LabelSet> g{{"sensor"}, {"sensor"}, {"actuator"}, {"sensor"}};
    const double a = accuracy(p, g), f = f1_macro(p, g, classes);
    std::vector<std::size_t> idx{3, 0, 2, 1};
    std::vector<Prediction> p2;
    std::vector<LabelSet> g2;
    for (auto i : idx) p2.push_back(p[i]), g2.push_back(g[i]);
    CHECK(accuracy(p2, g2) == Catch::Approx(a).margin(1e-15));
    CHECK(f1_macro(p2, g2, classes) == Catch::Approx(f).margin(1e-15));
    auto p3 = p;
    auto g3 = g;
    p3.insert(p3.end(), p.begin(), p.end());
    g3.insert(g3.end(), g.begin(), g.end());
    CHECK(accuracy(p3, g3) == Catch::Approx(a).margin(1e-15));
    CHECK(f1_macro(p3, g3, classes) == Catch::Approx(f).margin(1e-15));
}

TEST_CASE("metric edge cases") {
    CHECK_THROWS_AS(accuracy({}, {}), EmptyInput);
    std::vector<Prediction> one{LabelSet{"a"}};
    std::vector<LabelSet> two{{"a"}, {"b"}};
    CHECK_THROWS_AS(accuracy(one, two), LengthMismatch);
    std::vector<LabelSet> g{{"a"}};
    CHECK_THROWS_AS(f1_macro(one, g, {}), EmptyClassSet);
    // a class with no positives anywhere contributes 0
    CHECK(f1_macro(one, g, {"a", "b"}) == 0.5);
}

TEST_CASE("printed percentages round half up to one decimal") {
    CHECK(percent_1dp(121.0 / 134.0) == 90.3);
    CHECK(percent_1dp(93.0 / 97.0) == 95.9);
    CHECK(percent_1dp(0.9125) == 91.3);
    CHECK(percent_1dp(0.0) == 0.0);
    CHECK(percent_1dp(1.0) == 100.0);
}

TEST_CASE("generation scoring: empty selections and the none class") {
    const ComponentCatalog cat({{"APP", ComponentClass::Sensor, ""}, {"WS", ComponentClass::Sensor, ""}});
    Fsr a, b, c;
    a.id = "a", a.text = "x", a.gold_locations = std::vector<std::string>{"APP"};
    b.id = "b", b.text = "y", b.gold_locations = std::vector<std::string>{"ST"};  // not in catalog
    c.id = "c", c.text = "z", c.gold_locations = std::vector<std::string>{"WS"};
    GenerationRun run;
    run.results = {LocationMap::select(cat, {"APP"}), EmptySelection{}, GenerationFailure{"bad"}};
    run.requests = 2;

    const auto dropped = score_trial(run, {a, b, c}, cat, TrialKind::DroppedSensor, 1, 1, "m");
    CHECK(dropped.accuracy == Catch::Approx(2.0 / 3.0));
    CHECK(dropped.failures == 1);
    CHECK(dropped.requests == 2);
    REQUIRE(dropped.per_class_f1.size() == 3);
    CHECK(dropped.per_class_f1.back().first == kNoneClass);
    CHECK(dropped.per_class_f1.back().second == 1.0);

    // without the none class the empty answer matches an empty gold set
    const auto single = score_trial(run, {a, b, c}, cat, TrialKind::SingleTC, 1, 1, "m");
    CHECK(single.accuracy == Catch::Approx(2.0 / 3.0));
    CHECK(single.per_class_f1.size() == 2);
}

TEST_CASE("metrics json round trip") {
    MetricsReport r;
    r.trial = "batch";
    r.model = "m";
    r.n_examples = 3;
    r.batch_size = 2;
    r.accuracy = 0.9;
    r.f1_macro = 0.8;
    r.per_class_f1 = {{"APP", 0.7}, {"WS", 0.9}};
    r.requests = 49;
    const auto table = metrics_table_from_json(json::parse(metrics_table_to_json({r}).dump()));
    REQUIRE(table.size() == 1);
    CHECK(to_json(table[0]) == to_json(r));
    CHECK_THROWS_AS(metrics_table_from_json(json{{"schema_version", 9}, {"reports", json::array()}}), FormatError);
}
