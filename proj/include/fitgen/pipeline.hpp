#pragma once

// Request/parse/retry loop on top of a Provider: FSR classification and
// location-map generation, single or batched, plus concurrent sweeps over a
// dataset split.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "fitgen/fsr_model.hpp"
#include "fitgen/json_payload.hpp"
#include "fitgen/prompt.hpp"
#include "fitgen/provider.hpp"

namespace fitgen {

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

struct ClassificationFailure {
    std::string last_response;
};

struct ClassifyOutcome {
    std::variant<ComponentClass, ClassificationFailure> result;
    int attempts = 0;
    TokenUsage usage;

    bool failed() const { return std::holds_alternative<ClassificationFailure>(result); }
    std::optional<ComponentClass> label() const {
        if (const auto* c = std::get_if<ComponentClass>(&result)) return *c;
        return std::nullopt;
    }
};

// Exactly one of the two labels must appear as a word ("sensor-related" counts).
inline std::optional<ComponentClass> parse_class_label(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    auto has_word = [&lower](std::string_view w) {
        for (std::size_t pos = lower.find(w); pos != std::string::npos; pos = lower.find(w, pos + 1)) {
            const bool left = pos == 0 || !std::isalpha(static_cast<unsigned char>(lower[pos - 1]));
            const std::size_t end = pos + w.size();
            const bool right = end == lower.size() || !std::isalpha(static_cast<unsigned char>(lower[end])) ||
                               lower.compare(end, 1, "s") == 0;
            if (left && right) return true;
        }
        return false;
    };
    const bool sensor = has_word("sensor");
    const bool actuator = has_word("actuator");
    if (sensor == actuator) return std::nullopt;
    return sensor ? ComponentClass::Sensor : ComponentClass::Actuator;
}

// The provider is called at most 1 + max_retries times. Transport errors
// propagate immediately.
inline ClassifyOutcome classify_fsr(Provider& provider, const Fsr& fsr, const std::vector<FewShotExample>& examples,
                                    const ComponentCatalog& catalog, int max_retries,
                                    const PromptTemplate& tmpl = default_classification_template()) {
    const Prompt prompt = build_classification_prompt(fsr, examples, catalog).render(tmpl);
    ClassifyOutcome out{ClassificationFailure{}, 0, {}};
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        const ProviderResponse r = provider.complete(prompt);
        ++out.attempts;
        out.usage += r.usage;
        if (auto label = parse_class_label(r.text)) {
            out.result = *label;
            return out;
        }
        out.result = ClassificationFailure{r.text};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Location-map generation
// ---------------------------------------------------------------------------

struct EmptySelection {
    friend bool operator==(const EmptySelection&, const EmptySelection&) = default;
};

struct GenerationFailure {
    std::string reason;
};

using GenerationResult = std::variant<LocationMap, EmptySelection, GenerationFailure>;

inline bool is_failure(const GenerationResult& r) { return std::holds_alternative<GenerationFailure>(r); }

struct BatchOutcome {
    std::vector<GenerationResult> results;  // aligned with the batch's requirements
    int attempts = 0;
    TokenUsage usage;
};

namespace detail {

inline GenerationResult parse_generation_entry(const json& entry, const ComponentCatalog& catalog) {
    if (entry.is_array()) {
        if (entry.empty()) return EmptySelection{};
        return GenerationFailure{"non-empty list where an object or [] was expected"};
    }
    try {
        LocationMap map = parse_location_map(entry, catalog);
        if (map.sum() == 0) return EmptySelection{};
        return map;
    } catch (const FormatError& e) {
        return GenerationFailure{e.what()};
    }
}

}  // namespace detail

// Splits a raw response into one result per requested requirement. A payload
// with the wrong overall shape throws FormatError; malformed entries become
// GenerationFailure in place.
inline std::vector<GenerationResult> parse_generation_response(std::string_view raw, std::size_t count,
                                                               const ComponentCatalog& catalog) {
    const json payload = extract_json_payload(raw);
    std::vector<GenerationResult> out;
    if (count == 1) {
        if (payload.is_array() && payload.size() == 1) out.push_back(detail::parse_generation_entry(payload[0], catalog));
        else out.push_back(detail::parse_generation_entry(payload, catalog));
        return out;
    }
    if (!payload.is_array()) throw FormatError("batch answer must be a JSON array");
    if (payload.size() != count)
        throw FormatError("batch answer has " + std::to_string(payload.size()) + " entries, expected " +
                          std::to_string(count));
    for (const auto& e : payload) out.push_back(detail::parse_generation_entry(e, catalog));
    return out;
}

inline BatchOutcome generate_location_maps(Provider& provider, const std::vector<Fsr>& fsrs,
                                           const ComponentCatalog& catalog,
                                           const std::vector<FewShotExample>& examples, int max_retries,
                                           GridPolicy grid = {},
                                           const PromptTemplate& tmpl = default_generation_template()) {
    const Prompt prompt = build_generation_prompt(fsrs, catalog, examples, grid).render(tmpl);
    BatchOutcome out;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        const ProviderResponse r = provider.complete(prompt);
        ++out.attempts;
        out.usage += r.usage;
        try {
            out.results = parse_generation_response(r.text, fsrs.size(), catalog);
        } catch (const FormatError& e) {
            out.results.assign(fsrs.size(), GenerationFailure{e.what()});
        }
        if (std::none_of(out.results.begin(), out.results.end(), is_failure)) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

// Runs fn(0..count-1) on up to `parallelism` threads. Results are written by
// index so completion order never matters; the lowest-index exception wins.
template <typename Fn>
void parallel_for(std::size_t count, int parallelism, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(parallelism, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct SweepOptions {
    int max_retries = 2;
    int parallelism = 1;
    GridPolicy grid;
};

inline std::vector<ClassifyOutcome> run_classification(Provider& provider, const std::vector<Fsr>& fsrs,
                                                       const std::vector<FewShotExample>& examples,
                                                       const ComponentCatalog& catalog, const SweepOptions& opt,
                                                       const PromptTemplate& tmpl = default_classification_template()) {
    if (opt.grid.enforce && !on_grid(static_cast<int>(examples.size()), kClassificationGrid))
        throw ConfigError("classification examples must number 1, 3 or 5");
    std::vector<ClassifyOutcome> out(fsrs.size());
    parallel_for(fsrs.size(), opt.parallelism,
                 [&](std::size_t i) { out[i] = classify_fsr(provider, fsrs[i], examples, catalog, opt.max_retries, tmpl); });
    return out;
}

struct GenerationRun {
    std::vector<GenerationResult> results;  // one per requirement, input order
    std::size_t requests = 0;
    std::size_t attempts = 0;
    TokenUsage usage;
};

// Splits fsrs into consecutive batches of batch_size (the last may be short).
inline GenerationRun run_generation(Provider& provider, const std::vector<Fsr>& fsrs, const ComponentCatalog& catalog,
                                    const std::vector<FewShotExample>& examples, int batch_size,
                                    const SweepOptions& opt,
                                    const PromptTemplate& tmpl = default_generation_template()) {
    if (opt.grid.enforce && !on_grid(static_cast<int>(examples.size()), kGenerationGrid))
        throw ConfigError("generation examples must number 1, 3, 5 or 8");
    if (opt.grid.enforce && !on_grid(batch_size, kBatchGrid)) throw ConfigError("batch size must be 1, 2, 3 or 5");
    if (batch_size < 1) throw ConfigError("batch size must be positive");

    const std::size_t bs = static_cast<std::size_t>(batch_size);
    const std::size_t batches = (fsrs.size() + bs - 1) / bs;
    std::vector<BatchOutcome> outcomes(batches);
    parallel_for(batches, opt.parallelism, [&](std::size_t b) {
        const auto first = fsrs.begin() + static_cast<std::ptrdiff_t>(b * bs);
        const auto last = fsrs.begin() + static_cast<std::ptrdiff_t>(std::min(fsrs.size(), (b + 1) * bs));
        outcomes[b] = generate_location_maps(provider, std::vector<Fsr>(first, last), catalog, examples,
                                             opt.max_retries, GridPolicy{false}, tmpl);
    });

    GenerationRun run;
    run.requests = batches;
    for (auto& o : outcomes) {
        run.attempts += static_cast<std::size_t>(o.attempts);
        run.usage += o.usage;
        for (auto& r : o.results) run.results.push_back(std::move(r));
    }
    return run;
}

}  // namespace fitgen
