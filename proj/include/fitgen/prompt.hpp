#pragma once

// Few-shot prompt construction for the classification and generation tasks.
// Rendering is a pure function of its inputs: the same arguments always give
// the same bytes, which is what fixture digests rely on.

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fitgen/errors.hpp"
#include "fitgen/fsr_model.hpp"

namespace fitgen {

struct FewShotExample {
    std::string fsr_text;
    std::string expected_output;
};

// The exact text sent to a provider. Digests are taken over text().
struct Prompt {
    std::string system;
    std::string user;

    std::string text() const { return system + "\n\n" + user; }
    friend bool operator==(const Prompt&, const Prompt&) = default;
};

// Template text in two sections introduced by "[system]" and "[user]" lines.
// Placeholders use {name}; recognised names are catalog, examples, task and
// format. Any other {identifier} is a configuration error.
struct PromptTemplate {
    std::string system;
    std::string user;

    static PromptTemplate parse(std::string_view text) {
        PromptTemplate t;
        std::string* target = nullptr;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t eol = text.find('\n', pos);
            if (eol == std::string_view::npos) eol = text.size();
            std::string_view line = text.substr(pos, eol - pos);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (line == "[system]") target = &t.system;
            else if (line == "[user]") target = &t.user;
            else if (target) {
                *target += line;
                *target += '\n';
            } else if (!line.empty()) {
                throw ConfigError("prompt template must start with a [system] or [user] section");
            }
            pos = eol + 1;
        }
        auto trim = [](std::string& s) {
            while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
        };
        trim(t.system);
        trim(t.user);
        if (t.user.empty()) throw ConfigError("prompt template has no [user] section");
        return t;
    }
};

inline std::string fill_placeholders(std::string_view text, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{') {
            std::size_t j = i + 1;
            while (j < text.size() && (std::islower(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
            if (j > i + 1 && j < text.size() && text[j] == '}') {
                const std::string name(text.substr(i + 1, j - i - 1));
                auto it = values.find(name);
                if (it == values.end()) throw ConfigError("unknown template placeholder {" + name + "}");
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out.push_back(text[i++]);
    }
    return out;
}

inline const PromptTemplate& default_classification_template() {
    static const PromptTemplate t = PromptTemplate::parse(
        "[system]\n"
        "You are a functional safety engineer for automotive software systems. "
        "You read functional safety requirements and decide which kind of component they concern.\n"
        "[user]\n"
        "Known components:\n{catalog}\n\n"
        "Examples:\n{examples}\n\n"
        "{task}\n\n"
        "{format}\n");
    return t;
}

inline const PromptTemplate& default_generation_template() {
    static const PromptTemplate t = PromptTemplate::parse(
        "[system]\n"
        "You are a fault injection test engineer for automotive software systems. "
        "From functional safety requirements you select the sensors in which faults must be injected.\n"
        "[user]\n"
        "Supported sensors:\n{catalog}\n\n"
        "Examples:\n{examples}\n\n"
        "{task}\n\n"
        "{format}\n");
    return t;
}

struct PromptBundle {
    std::string system;
    std::string catalog;
    std::vector<FewShotExample> examples;
    std::vector<std::string> task_items;  // requirement texts, in order
    std::string task;
    std::string output_directive;

    Prompt render(const PromptTemplate& tmpl) const {
        std::string rendered_examples;
        for (std::size_t i = 0; i < examples.size(); ++i) {
            if (i) rendered_examples += "\n\n";
            rendered_examples += "Requirement: " + examples[i].fsr_text + "\nAnswer: " + examples[i].expected_output;
        }
        const std::map<std::string, std::string> values{
            {"catalog", catalog}, {"examples", rendered_examples}, {"task", task}, {"format", output_directive}};
        return Prompt{fill_placeholders(tmpl.system, values), fill_placeholders(tmpl.user, values)};
    }
};

// Grid membership for few-shot count N and batch size BS.
inline constexpr int kClassificationGrid[] = {1, 3, 5};
inline constexpr int kGenerationGrid[] = {1, 3, 5, 8};
inline constexpr int kBatchGrid[] = {1, 2, 3, 5};

template <std::size_t K>
bool on_grid(int v, const int (&grid)[K]) {
    return std::find(std::begin(grid), std::end(grid), v) != std::end(grid);
}

struct GridPolicy {
    bool enforce = true;
};

namespace detail {

inline std::string render_catalog(const ComponentCatalog& catalog, bool with_kind) {
    std::string out;
    for (const auto& c : catalog.entries()) {
        if (!out.empty()) out += '\n';
        out += "- " + c.id;
        if (with_kind) out += " (" + std::string(to_string(c.kind)) + ")";
        out += ": " + c.description;
    }
    return out;
}

}  // namespace detail

inline PromptBundle build_classification_prompt(const Fsr& fsr, const std::vector<FewShotExample>& examples,
                                                const ComponentCatalog& catalog, GridPolicy grid = {}) {
    const int n = static_cast<int>(examples.size());
    if (grid.enforce && !on_grid(n, kClassificationGrid))
        throw ConfigError("classification examples must number 1, 3 or 5, got " + std::to_string(n));
    PromptBundle b;
    b.catalog = detail::render_catalog(catalog, true);
    b.examples = examples;
    b.task_items = {fsr.text};
    b.task = "Requirement: " + fsr.text;
    b.output_directive =
        "Classify the requirement as sensor-related or actuator-related. "
        "Answer with exactly one word: sensor or actuator.";
    return b;
}

inline PromptBundle build_generation_prompt(const std::vector<Fsr>& fsrs, const ComponentCatalog& catalog,
                                            const std::vector<FewShotExample>& examples, GridPolicy grid = {}) {
    const int n = static_cast<int>(examples.size());
    const int bs = static_cast<int>(fsrs.size());
    if (grid.enforce && !on_grid(n, kGenerationGrid))
        throw ConfigError("generation examples must number 1, 3, 5 or 8, got " + std::to_string(n));
    if (grid.enforce && !on_grid(bs, kBatchGrid))
        throw ConfigError("batch size must be 1, 2, 3 or 5, got " + std::to_string(bs));
    if (bs < 1) throw ConfigError("generation prompt needs at least one requirement");

    PromptBundle b;
    b.catalog = detail::render_catalog(catalog, false);
    b.examples = examples;
    std::string ids;
    for (const auto& id : catalog.ids()) ids += (ids.empty() ? "" : ", ") + id;
    const std::string object_rule =
        "a JSON object whose keys are exactly the supported sensor ids (" + ids +
        "), with value 1 for each sensor where a fault must be injected (at most two) and 0 for all others";
    if (bs == 1) {
        b.task_items = {fsrs.front().text};
        b.task = "Requirement: " + fsrs.front().text;
        b.output_directive = "Answer with " + object_rule +
                             ". If no supported sensor applies, answer with an empty list []. "
                             "Do not add any explanation.";
    } else {
        b.task = "Requirements:";
        for (int i = 0; i < bs; ++i) {
            b.task_items.push_back(fsrs[i].text);
            b.task += "\n" + std::to_string(i + 1) + ". " + fsrs[i].text;
        }
        b.output_directive = "Answer with a JSON array of " + std::to_string(bs) +
                             " entries, one per requirement in the order given. Each entry is " + object_rule +
                             ", or an empty list [] when no supported sensor applies. Do not add any explanation.";
    }
    return b;
}

// ---------------------------------------------------------------------------
// Few-shot example selection: first N suitable example-pool entries in file
// order.
// ---------------------------------------------------------------------------

inline std::vector<FewShotExample> select_classification_examples(const std::vector<Fsr>& dataset, int n) {
    std::vector<FewShotExample> out;
    for (const auto& f : dataset) {
        if (static_cast<int>(out.size()) == n) break;
        if (f.split == Split::Example && f.gold_class) out.push_back({f.text, std::string(to_string(*f.gold_class))});
    }
    if (static_cast<int>(out.size()) < n)
        throw ConfigError("example pool holds fewer than " + std::to_string(n) + " labelled requirements");
    return out;
}

// Gold locations restricted to the catalog; an empty restriction renders as [].
inline std::string render_expected_selection(const std::vector<std::string>& gold, const ComponentCatalog& catalog) {
    std::vector<std::string> kept;
    for (const auto& g : gold)
        if (catalog.contains(g)) kept.push_back(g);
    if (kept.empty()) return "[]";
    return to_json_text(LocationMap::select(catalog, kept));
}

inline std::vector<FewShotExample> select_generation_examples(const std::vector<Fsr>& dataset,
                                                              const ComponentCatalog& catalog, int n) {
    std::vector<FewShotExample> out;
    for (const auto& f : dataset) {
        if (static_cast<int>(out.size()) == n) break;
        if (f.split == Split::Example && f.gold_class == ComponentClass::Sensor && f.gold_locations)
            out.push_back({f.text, render_expected_selection(*f.gold_locations, catalog)});
    }
    if (static_cast<int>(out.size()) < n)
        throw ConfigError("example pool holds fewer than " + std::to_string(n) + " sensor requirements");
    return out;
}

}  // namespace fitgen
