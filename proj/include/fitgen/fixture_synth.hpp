#pragma once

// Builds replay recordings whose scored outcome hits a chosen (Acc, F1) pair.
//
// The search works on raw counts and its own F1 arithmetic, deliberately not
// the scorer in metrics.hpp, so a fixture built here is an independent check
// of the scoring path when it is replayed through the pipeline.

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fitgen/errors.hpp"
#include "fitgen/fsr_model.hpp"
#include "fitgen/prompt.hpp"
#include "fitgen/provider.hpp"

namespace fitgen::synth {

inline constexpr const char* kNone = "<none>";

// Table value as printed: percent, half-up to one decimal.
inline long tenths(double fraction) { return static_cast<long>(std::floor(fraction * 1000.0 + 0.5 + 1e-9)); }

struct Target {
    double acc_pct = 0.0;
    double f1_pct = 0.0;
    long acc_tenths() const { return std::lround(acc_pct * 10.0); }
    long f1_tenths() const { return std::lround(f1_pct * 10.0); }
};

// ---------------------------------------------------------------------------
// Classification: two classes, so the confusion is (sensor hits, actuator hits).
// ---------------------------------------------------------------------------

struct ClassConfusion {
    int sensor_correct = 0;
    int actuator_correct = 0;
};

inline double two_class_f1(int ns, int na, int sc, int ac) {
    auto f1 = [](double tp, double fp, double fn) { return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn); };
    // sensor: fp = actuators called sensor, fn = sensors called actuator
    const double fs = f1(sc, na - ac, ns - sc);
    const double fa = f1(ac, ns - sc, na - ac);
    return (fs + fa) / 2;
}

// Every (sensor hits, actuator hits) pair whose printed Acc/F1 equals the target,
// in ascending order of total hits then sensor hits.
inline std::vector<ClassConfusion> search_classification(int ns, int na, Target t) {
    std::vector<ClassConfusion> out;
    for (int sc = 0; sc <= ns; ++sc)
        for (int ac = 0; ac <= na; ++ac) {
            const double acc = static_cast<double>(sc + ac) / (ns + na);
            if (tenths(acc) == t.acc_tenths() && tenths(two_class_f1(ns, na, sc, ac)) == t.f1_tenths())
                out.push_back({sc, ac});
        }
    return out;
}

// ---------------------------------------------------------------------------
// Generation: one class per component (+ kNone), exact-match accuracy.
// ---------------------------------------------------------------------------

using Labels = std::set<std::string>;

inline double macro_f1(const std::vector<Labels>& pred, const std::vector<Labels>& gold,
                       const std::vector<std::string>& classes) {
    double sum = 0;
    for (const auto& c : classes) {
        long tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            const bool p = pred[i].count(c) != 0;
            const bool g = gold[i].count(c) != 0;
            tp += p && g;
            fp += p && !g;
            fn += !p && g;
        }
        sum += tp == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    }
    return sum / static_cast<double>(classes.size());
}

namespace detail {

// Exact search over confusion deltas: which (gold answer, wrong answer) pairs,
// `wrong` of them, give the target F1. Only requirements with free[i] may be
// changed; `start` holds the fixed answers. Gives up past max_states.
inline std::optional<std::vector<Labels>> exhaustive_wrong_answers(
    const std::vector<Labels>& gold, const std::vector<Labels>& start, const std::vector<bool>& free,
    const std::vector<std::string>& classes, const std::vector<Labels>& alphabet, std::size_t wrong, long f1_tenths,
    std::size_t max_states = 3000000, bool* capped = nullptr) {
    if (capped) *capped = false;
    std::vector<Labels> types;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (!free[i]) continue;
        auto it = std::find(types.begin(), types.end(), gold[i]);
        if (it == types.end()) {
            types.push_back(gold[i]);
            members.emplace_back();
            it = types.end() - 1;
        }
        members[static_cast<std::size_t>(it - types.begin())].push_back(i);
    }
    const std::size_t k = classes.size();
    std::vector<long> tp(k), fp(k), fn(k);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < gold.size(); ++i) {
            const bool p = start[i].count(classes[c]) != 0;
            const bool g = gold[i].count(classes[c]) != 0;
            tp[c] += p && g;
            fp[c] += p && !g;
            fn[c] += !p && g;
        }

    struct Move {
        std::size_t type;
        std::size_t answer;
        std::vector<int> delta;  // (dtp, dfp) per class; dfn = -dtp
    };
    std::vector<std::size_t> limited(types.size(), SIZE_MAX);  // usage slot for scarce gold answers
    std::size_t slots = 0;
    for (std::size_t t = 0; t < types.size(); ++t)
        if (members[t].size() < wrong) limited[t] = slots++;
    std::vector<Move> moves;
    for (std::size_t t = 0; t < types.size(); ++t)
        for (std::size_t a = 0; a < alphabet.size(); ++a) {
            if (alphabet[a] == types[t]) continue;
            Move m{t, a, std::vector<int>(2 * k, 0)};
            for (std::size_t c = 0; c < k; ++c) {
                const bool g = types[t].count(classes[c]) != 0;
                const bool p = alphabet[a].count(classes[c]) != 0;
                if (g && !p) m.delta[2 * c] = -1;
                if (p && !g) m.delta[2 * c + 1] = 1;
            }
            moves.push_back(std::move(m));
        }

    std::map<std::vector<int>, std::vector<std::uint16_t>> layer{{std::vector<int>(2 * k + slots, 0), {}}};
    for (std::size_t step = 0; step < wrong; ++step) {
        std::map<std::vector<int>, std::vector<std::uint16_t>> next;
        for (const auto& [key, path] : layer) {
            for (std::size_t mi = 0; mi < moves.size(); ++mi) {
                const Move& m = moves[mi];
                auto nk = key;
                if (limited[m.type] != SIZE_MAX) {
                    int& used = nk[2 * k + limited[m.type]];
                    if (static_cast<std::size_t>(used) + 1 > members[m.type].size()) continue;
                    ++used;
                }
                for (std::size_t d = 0; d < 2 * k; ++d) nk[d] += m.delta[d];
                if (next.count(nk)) continue;
                auto np = path;
                np.push_back(static_cast<std::uint16_t>(mi));
                next.emplace(std::move(nk), std::move(np));
                if (next.size() > max_states) {
                    if (capped) *capped = true;
                    return std::nullopt;
                }
            }
        }
        layer = std::move(next);
    }
    for (const auto& [key, path] : layer) {
        double f = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const long t = tp[c] + key[2 * c];
            const long p = fp[c] + key[2 * c + 1];
            const long n = fn[c] - key[2 * c];
            f += t == 0 ? 0.0 : 2.0 * static_cast<double>(t) / static_cast<double>(2 * t + p + n);
        }
        if (tenths(f / static_cast<double>(k)) != f1_tenths) continue;
        auto pred = start;
        std::vector<std::size_t> used(types.size(), 0);
        for (auto mi : path) pred[members[moves[mi].type][used[moves[mi].type]++]] = alphabet[moves[mi].answer];
        return pred;
    }
    return std::nullopt;
}

}  // namespace detail

struct GenerationSearch {
    std::vector<Labels> predictions;
    double accuracy = 0;
    double f1 = 0;
    bool exact = false;  // both printed values hit
    bool f1_hit = false;
    bool unreachable = false;  // exhaustive search proved no F1 hit at this accuracy
};

// Starts from the gold answers, picks the correct-count nearest to the target
// accuracy, then runs a seeded local search over which requirements are wrong
// and what they answer. Wrong answers are subsets of one or two classes (or
// kNone when allowed) that differ from the gold answer.
// `pinned[i]`, when set, fixes requirement i's answer (prompts shared with
// another cell must replay the same response).
inline GenerationSearch search_generation(const std::vector<Labels>& gold, const std::vector<std::string>& components,
                                          bool none_class, Target t,
                                          const std::vector<std::optional<Labels>>& pinned = {},
                                          std::uint64_t seed = 42, int iterations = 200000) {
    const std::size_t n = gold.size();
    if (n == 0) throw EmptyInput("no requirements to synthesise answers for");
    if (!pinned.empty() && pinned.size() != n) throw LengthMismatch("pinned answers vs requirements");
    auto is_pinned = [&pinned](std::size_t i) { return !pinned.empty() && pinned[i].has_value(); };
    std::vector<std::string> classes = components;
    if (none_class) classes.push_back(kNone);

    std::vector<Labels> alphabet;
    for (std::size_t i = 0; i < components.size(); ++i) {
        alphabet.push_back({components[i]});
        for (std::size_t j = i + 1; j < components.size(); ++j) alphabet.push_back({components[i], components[j]});
    }
    if (none_class) alphabet.push_back({kNone});

    // nearest achievable correct count
    std::size_t correct = 0;
    double best_gap = 1e9;
    for (std::size_t k = 0; k <= n; ++k) {
        const double gap = std::abs(static_cast<double>(tenths(static_cast<double>(k) / n)) - t.acc_tenths());
        if (gap < best_gap) best_gap = gap, correct = k;
    }
    std::size_t pinned_wrong = 0, free_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_pinned(i)) pinned_wrong += *pinned[i] != gold[i];
        else ++free_count;
    }
    const std::size_t wrong =
        std::min(free_count, n - correct > pinned_wrong ? n - correct - pinned_wrong : std::size_t{0});

    std::mt19937_64 rng(seed);
    auto pick = [&rng](std::size_t bound) { return std::uniform_int_distribution<std::size_t>(0, bound - 1)(rng); };
    auto wrong_answer = [&](std::size_t i) {
        for (;;) {
            const Labels& a = alphabet[pick(alphabet.size())];
            if (a != gold[i]) return a;
        }
    };

    GenerationSearch s;
    s.predictions = gold;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_pinned(i)) s.predictions[i] = *pinned[i];
        else order.push_back(i);
    }
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> wrong_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(wrong));
    for (auto i : wrong_idx) s.predictions[i] = wrong_answer(i);

    const double f1_goal = static_cast<double>(t.f1_tenths()) / 1000.0;
    auto cost = [&](const std::vector<Labels>& p) {
        const double f = macro_f1(p, gold, classes);
        return tenths(f) == t.f1_tenths() ? 0.0 : std::abs(f - f1_goal);
    };
    double c = cost(s.predictions);
    double best_cost = c;
    std::vector<Labels> best = s.predictions;
    for (int it = 0; it < iterations && best_cost > 0 && wrong > 0; ++it) {
        const std::size_t slot = pick(wrong);
        const std::size_t i = wrong_idx[slot];
        const Labels before_i = s.predictions[i];
        std::size_t j = i;
        Labels before_j;
        if (rng() & 1) {
            s.predictions[i] = wrong_answer(i);
        } else {
            // move the error to a requirement that is currently right
            j = pick(n);
            if (is_pinned(j) || std::find(wrong_idx.begin(), wrong_idx.end(), j) != wrong_idx.end()) continue;
            before_j = s.predictions[j];
            s.predictions[i] = gold[i];
            s.predictions[j] = wrong_answer(j);
            wrong_idx[slot] = j;
        }
        const double cc = cost(s.predictions);
        // mostly downhill, with rare uphill steps to leave narrow basins
        if (cc <= c || std::uniform_real_distribution<double>(0, 1)(rng) < 0.01) {
            c = cc;
            if (c < best_cost) {
                best_cost = c;
                best = s.predictions;
            }
            continue;
        }
        s.predictions[i] = before_i;
        if (j != i) {
            s.predictions[j] = before_j;
            wrong_idx[slot] = i;
        }
    }
    s.predictions = std::move(best);
    if (best_cost > 0 && wrong > 0) {
        std::vector<Labels> start = gold;
        std::vector<bool> free(n, true);
        for (std::size_t i = 0; i < n; ++i)
            if (is_pinned(i)) start[i] = *pinned[i], free[i] = false;
        bool capped = false;
        if (auto exact = detail::exhaustive_wrong_answers(gold, start, free, classes, alphabet, wrong, t.f1_tenths(),
                                                          3000000, &capped))
            s.predictions = std::move(*exact);
        else
            s.unreachable = !capped;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += s.predictions[i] == gold[i];
    s.accuracy = static_cast<double>(hits) / static_cast<double>(n);
    s.f1 = macro_f1(s.predictions, gold, classes);
    s.f1_hit = tenths(s.f1) == t.f1_tenths();
    s.exact = tenths(s.accuracy) == t.acc_tenths() && s.f1_hit;
    return s;
}

// ---------------------------------------------------------------------------
// Recording builders
// ---------------------------------------------------------------------------

inline RecordEntry entry_for(const std::string& model, const Prompt& prompt, std::string response) {
    RecordEntry e;
    e.digest = prompt_digest(model, prompt);
    e.prompt_tokens = static_cast<long>(prompt.text().size() / 4);
    e.completion_tokens = static_cast<long>(response.size() / 4) + 1;
    e.response_text = std::move(response);
    return e;
}

// The first `sensor_correct` sensor requirements (dataset order) and the first
// `actuator_correct` actuator requirements are answered correctly.
inline std::vector<RecordEntry> classification_recording(const std::string& model, const std::vector<Fsr>& eval,
                                                         const std::vector<FewShotExample>& examples,
                                                         const ComponentCatalog& catalog, ClassConfusion c,
                                                         const PromptTemplate& tmpl = default_classification_template()) {
    std::vector<RecordEntry> out;
    int seen_s = 0, seen_a = 0;
    for (const auto& f : eval) {
        if (!f.gold_class) throw ConfigError("requirement '" + f.id + "' has no gold class");
        const bool sensor = *f.gold_class == ComponentClass::Sensor;
        const bool right = sensor ? seen_s++ < c.sensor_correct : seen_a++ < c.actuator_correct;
        const bool says_sensor = sensor == right;
        const Prompt p = build_classification_prompt(f, examples, catalog).render(tmpl);
        out.push_back(entry_for(model, p, says_sensor ? "sensor" : "actuator"));
    }
    return out;
}

inline std::string answer_json(const Labels& answer, const ComponentCatalog& catalog) {
    if (answer.count(kNone) || answer.empty()) return "[]";
    ordered_json j = ordered_json::object();
    for (const auto& id : catalog.ids()) j[id] = answer.count(id) ? 1 : 0;
    return j.dump();
}

// One entry per batch of `batch_size` consecutive requirements.
inline std::vector<RecordEntry> generation_recording(const std::string& model, const std::vector<Fsr>& eval,
                                                     const std::vector<Labels>& answers,
                                                     const ComponentCatalog& catalog,
                                                     const std::vector<FewShotExample>& examples, int batch_size,
                                                     const PromptTemplate& tmpl = default_generation_template()) {
    if (answers.size() != eval.size()) throw LengthMismatch("answers vs requirements");
    std::vector<RecordEntry> out;
    const std::size_t bs = static_cast<std::size_t>(std::max(batch_size, 1));
    for (std::size_t b = 0; b < eval.size(); b += bs) {
        const std::size_t e = std::min(eval.size(), b + bs);
        std::vector<Fsr> batch(eval.begin() + static_cast<std::ptrdiff_t>(b), eval.begin() + static_cast<std::ptrdiff_t>(e));
        std::string text;
        if (batch.size() == 1) {
            text = answer_json(answers[b], catalog);
        } else {
            text = "[";
            for (std::size_t i = b; i < e; ++i) text += (i == b ? "" : ",") + answer_json(answers[i], catalog);
            text += "]";
        }
        const Prompt p = build_generation_prompt(batch, catalog, examples, GridPolicy{false}).render(tmpl);
        out.push_back(entry_for(model, p, "```json\n" + text + "\n```"));
    }
    return out;
}

// Every request answered with prose instead of JSON.
inline std::vector<RecordEntry> unstructured_recording(const std::string& model, const std::vector<Fsr>& eval,
                                                       const ComponentCatalog& catalog,
                                                       const std::vector<FewShotExample>& examples, int batch_size,
                                                       const PromptTemplate& tmpl = default_generation_template()) {
    std::vector<RecordEntry> out;
    const std::size_t bs = static_cast<std::size_t>(std::max(batch_size, 1));
    for (std::size_t b = 0; b < eval.size(); b += bs) {
        const std::size_t e = std::min(eval.size(), b + bs);
        std::vector<Fsr> batch(eval.begin() + static_cast<std::ptrdiff_t>(b), eval.begin() + static_cast<std::ptrdiff_t>(e));
        const Prompt p = build_generation_prompt(batch, catalog, examples, GridPolicy{false}).render(tmpl);
        out.push_back(entry_for(model, p,
                                "Here is a detailed analysis of each requirement and the sensors it involves. The "
                                "first requirement concerns the pedal position, the second one the wheel speed, and"));
    }
    return out;
}

}  // namespace fitgen::synth
