#pragma once

// Accuracy and F1-macro over label sets, and per-trial scoring.
//
// Every prediction and gold answer is reduced to a set of class labels:
//   classification  -> {"sensor"} or {"actuator"}
//   generation      -> the selected component ids
// A failed prediction has no label set at all. Accuracy is exact set match
// (failures never match). F1 for class c treats "c in labels" as positive;
// F1-macro is the unweighted mean over a class set fixed up front, with a
// class's F1 taken as 0 when it has no true positives.

#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fitgen/errors.hpp"
#include "fitgen/fsr_model.hpp"
#include "fitgen/pipeline.hpp"

namespace fitgen {

using LabelSet = std::set<std::string>;
using Prediction = std::optional<LabelSet>;  // nullopt = failed output

// Synthetic class that is positive when a requirement has nothing to select.
inline const std::string kNoneClass = "<none>";

struct ClassCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;

    double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
    double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
    double f1() const {
        const double p = precision();
        const double r = recall();
        return p + r == 0 ? 0.0 : 2.0 * p * r / (p + r);
    }
};

struct ConfusionCounts {
    std::vector<std::pair<std::string, ClassCounts>> per_class;  // class-set order
    long samples = 0;
};

namespace detail {

inline void check_aligned(std::size_t predictions, std::size_t golds) {
    if (predictions != golds)
        throw LengthMismatch(std::to_string(predictions) + " predictions vs " + std::to_string(golds) + " golds");
}

}  // namespace detail

inline double accuracy(std::span<const Prediction> predictions, std::span<const LabelSet> golds) {
    detail::check_aligned(predictions.size(), golds.size());
    if (predictions.empty()) throw EmptyInput("accuracy of zero samples");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] && *predictions[i] == golds[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

inline ConfusionCounts confusion(std::span<const Prediction> predictions, std::span<const LabelSet> golds,
                                 const std::vector<std::string>& classes) {
    detail::check_aligned(predictions.size(), golds.size());
    if (classes.empty()) throw EmptyClassSet();
    ConfusionCounts out;
    out.samples = static_cast<long>(predictions.size());
    static const LabelSet kNothing;
    for (const auto& c : classes) {
        ClassCounts k;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const LabelSet& p = predictions[i] ? *predictions[i] : kNothing;
            const bool pred = p.count(c) > 0;
            const bool gold = golds[i].count(c) > 0;
            if (pred && gold) ++k.tp;
            else if (pred) ++k.fp;
            else if (gold) ++k.fn;
            else ++k.tn;
        }
        out.per_class.emplace_back(c, k);
    }
    return out;
}

inline std::vector<std::pair<std::string, double>> per_class_f1(std::span<const Prediction> predictions,
                                                                std::span<const LabelSet> golds,
                                                                const std::vector<std::string>& classes) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [c, k] : confusion(predictions, golds, classes).per_class) out.emplace_back(c, k.f1());
    return out;
}

inline double f1_macro(std::span<const Prediction> predictions, std::span<const LabelSet> golds,
                       const std::vector<std::string>& classes) {
    const auto f1s = per_class_f1(predictions, golds, classes);
    double sum = 0.0;
    for (const auto& [c, f] : f1s) sum += f;
    return sum / static_cast<double>(f1s.size());
}

// Percentage rounded half-up to one decimal, as printed in result tables.
inline double percent_1dp(double fraction) { return std::floor(fraction * 1000.0 + 0.5 + 1e-9) / 10.0; }

// ---------------------------------------------------------------------------
// Trial scoring
// ---------------------------------------------------------------------------

enum class TrialKind { Classify, SingleTC, BatchTC, DroppedSensor };

inline std::string_view to_string(TrialKind k) {
    switch (k) {
        case TrialKind::Classify: return "classify";
        case TrialKind::SingleTC: return "single";
        case TrialKind::BatchTC: return "batch";
        case TrialKind::DroppedSensor: return "dropped";
    }
    return "?";
}

inline TrialKind parse_trial_kind(std::string_view s) {
    for (auto k : {TrialKind::Classify, TrialKind::SingleTC, TrialKind::BatchTC, TrialKind::DroppedSensor})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown trial '" + std::string(s) + "'");
}

struct MetricsReport {
    std::string trial;
    std::string model;
    int n_examples = 0;
    int batch_size = 1;
    double accuracy = 0.0;
    double f1_macro = 0.0;
    std::vector<std::pair<std::string, double>> per_class_f1;
    std::size_t failures = 0;
    std::size_t eval_count = 0;
    std::size_t example_pool_count = 0;
    std::size_t requests = 0;
    TokenUsage tokens;
};

inline Prediction prediction_of(const ClassifyOutcome& o) {
    if (auto l = o.label()) return LabelSet{std::string(to_string(*l))};
    return std::nullopt;
}

inline Prediction prediction_of(const GenerationResult& r, bool none_class) {
    if (const auto* m = std::get_if<LocationMap>(&r)) {
        auto sel = m->selected();
        return LabelSet(sel.begin(), sel.end());
    }
    if (std::holds_alternative<EmptySelection>(r)) return none_class ? LabelSet{kNoneClass} : LabelSet{};
    return std::nullopt;
}

// Gold selection restricted to the catalog the prompt advertised.
inline LabelSet generation_gold(const Fsr& fsr, const ComponentCatalog& catalog, bool none_class) {
    LabelSet gold;
    if (fsr.gold_locations)
        for (const auto& g : *fsr.gold_locations)
            if (catalog.contains(g)) gold.insert(g);
    if (gold.empty() && none_class) gold.insert(kNoneClass);
    return gold;
}

inline std::size_t example_pool_size(const std::vector<Fsr>& dataset) {
    std::size_t n = 0;
    for (const auto& f : dataset) n += f.split == Split::Example ? 1 : 0;
    return n;
}

inline MetricsReport score_trial(const std::vector<ClassifyOutcome>& outcomes, const std::vector<Fsr>& eval,
                                 int n_examples, const std::string& model, std::size_t pool_count = 0) {
    detail::check_aligned(outcomes.size(), eval.size());
    std::vector<Prediction> preds;
    std::vector<LabelSet> golds;
    MetricsReport r;
    r.trial = std::string(to_string(TrialKind::Classify));
    r.model = model;
    r.n_examples = n_examples;
    for (std::size_t i = 0; i < eval.size(); ++i) {
        if (!eval[i].gold_class) throw ConfigError("requirement '" + eval[i].id + "' has no gold class");
        preds.push_back(prediction_of(outcomes[i]));
        golds.push_back(LabelSet{std::string(to_string(*eval[i].gold_class))});
        r.failures += outcomes[i].failed() ? 1 : 0;
        r.tokens += outcomes[i].usage;
    }
    const std::vector<std::string> classes{"sensor", "actuator"};
    r.accuracy = accuracy(preds, golds);
    r.per_class_f1 = per_class_f1(preds, golds, classes);
    r.f1_macro = f1_macro(preds, golds, classes);
    r.eval_count = eval.size();
    r.example_pool_count = pool_count;
    r.requests = eval.size();
    return r;
}

// Generation trials. Class set: the catalog ids, plus kNoneClass for the
// dropped-sensor trial where an empty answer is the correct positive outcome.
inline MetricsReport score_trial(const GenerationRun& run, const std::vector<Fsr>& eval,
                                 const ComponentCatalog& catalog, TrialKind kind, int n_examples, int batch_size,
                                 const std::string& model, std::size_t pool_count = 0) {
    detail::check_aligned(run.results.size(), eval.size());
    const bool none_class = kind == TrialKind::DroppedSensor;
    std::vector<Prediction> preds;
    std::vector<LabelSet> golds;
    MetricsReport r;
    r.trial = std::string(to_string(kind));
    r.model = model;
    r.n_examples = n_examples;
    r.batch_size = batch_size;
    for (std::size_t i = 0; i < eval.size(); ++i) {
        preds.push_back(prediction_of(run.results[i], none_class));
        golds.push_back(generation_gold(eval[i], catalog, none_class));
        r.failures += is_failure(run.results[i]) ? 1 : 0;
    }
    std::vector<std::string> classes = catalog.ids();
    if (none_class) classes.push_back(kNoneClass);
    r.accuracy = accuracy(preds, golds);
    r.per_class_f1 = per_class_f1(preds, golds, classes);
    r.f1_macro = f1_macro(preds, golds, classes);
    r.eval_count = eval.size();
    r.example_pool_count = pool_count;
    r.requests = run.requests;
    r.tokens = run.usage;
    return r;
}

// ---------------------------------------------------------------------------
// JSON / CSV
// ---------------------------------------------------------------------------

inline constexpr int kMetricsSchemaVersion = 1;

inline ordered_json to_json(const MetricsReport& r) {
    ordered_json j;
    j["trial"] = r.trial;
    j["model"] = r.model;
    j["n_examples"] = r.n_examples;
    j["batch_size"] = r.batch_size;
    j["accuracy"] = r.accuracy;
    j["f1_macro"] = r.f1_macro;
    ordered_json pc = ordered_json::array();
    for (const auto& [c, f] : r.per_class_f1) pc.push_back({{"class", c}, {"f1", f}});
    j["per_class_f1"] = pc;
    j["failures"] = r.failures;
    j["eval_count"] = r.eval_count;
    j["example_pool_count"] = r.example_pool_count;
    j["requests"] = r.requests;
    j["prompt_tokens"] = r.tokens.prompt_tokens;
    j["completion_tokens"] = r.tokens.completion_tokens;
    return j;
}

inline MetricsReport metrics_from_json(const json& j) {
    MetricsReport r;
    try {
        r.trial = j.at("trial").get<std::string>();
        r.model = j.at("model").get<std::string>();
        r.n_examples = j.at("n_examples").get<int>();
        r.batch_size = j.at("batch_size").get<int>();
        r.accuracy = j.at("accuracy").get<double>();
        r.f1_macro = j.at("f1_macro").get<double>();
        for (const auto& e : j.at("per_class_f1")) r.per_class_f1.emplace_back(e.at("class"), e.at("f1").get<double>());
        r.failures = j.at("failures").get<std::size_t>();
        r.eval_count = j.at("eval_count").get<std::size_t>();
        r.example_pool_count = j.at("example_pool_count").get<std::size_t>();
        r.requests = j.at("requests").get<std::size_t>();
        r.tokens.prompt_tokens = j.at("prompt_tokens").get<long>();
        r.tokens.completion_tokens = j.at("completion_tokens").get<long>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("metrics report: ") + e.what());
    }
    return r;
}

inline ordered_json metrics_table_to_json(const std::vector<MetricsReport>& rows) {
    ordered_json j;
    j["schema_version"] = kMetricsSchemaVersion;
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    j["reports"] = arr;
    return j;
}

inline std::vector<MetricsReport> metrics_table_from_json(const json& j) {
    if (!j.is_object() || j.value("schema_version", 0) != kMetricsSchemaVersion)
        throw FormatError("metrics file has an unsupported schema version");
    std::vector<MetricsReport> out;
    for (const auto& r : j.at("reports")) out.push_back(metrics_from_json(r));
    return out;
}

}  // namespace fitgen
