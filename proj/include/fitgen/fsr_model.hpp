#pragma once

// Domain types shared across the toolkit: requirements, component catalogs,
// location maps and fault test cases, plus their JSON encodings and the
// test-case validator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fitgen/errors.hpp"

namespace fitgen {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Component classes and catalogs
// ---------------------------------------------------------------------------

enum class ComponentClass { Sensor, Actuator };

inline std::string_view to_string(ComponentClass c) {
    return c == ComponentClass::Sensor ? "sensor" : "actuator";
}

inline ComponentClass parse_component_class(std::string_view s) {
    if (s == "sensor" || s == "Sensor") return ComponentClass::Sensor;
    if (s == "actuator" || s == "Actuator") return ComponentClass::Actuator;
    throw FormatError("unknown component class '" + std::string(s) + "'");
}

struct Component {
    std::string id;
    ComponentClass kind = ComponentClass::Sensor;
    std::string description;
};

// Ordered list of injectable components. Order defines prompt listing order
// and location-map key order.
class ComponentCatalog {
public:
    ComponentCatalog() = default;

    explicit ComponentCatalog(std::vector<Component> entries) : entries_(std::move(entries)) {
        std::set<std::string> seen;
        for (const auto& e : entries_) {
            if (e.id.empty()) throw ConfigError("catalog contains an empty component id");
            if (!seen.insert(e.id).second) throw ConfigError("duplicate component id '" + e.id + "'");
        }
    }

    const std::vector<Component>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    const Component* find(std::string_view id) const {
        auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const Component& c) { return c.id == id; });
        return it == entries_.end() ? nullptr : &*it;
    }
    bool contains(std::string_view id) const { return find(id) != nullptr; }

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.push_back(e.id);
        return out;
    }

    // Catalog with the given ids removed, order otherwise preserved.
    ComponentCatalog without(const std::vector<std::string>& dropped) const {
        std::vector<Component> kept;
        for (const auto& e : entries_)
            if (std::find(dropped.begin(), dropped.end(), e.id) == dropped.end()) kept.push_back(e);
        return ComponentCatalog(std::move(kept));
    }

    ComponentCatalog only(ComponentClass kind) const {
        std::vector<Component> kept;
        for (const auto& e : entries_)
            if (e.kind == kind) kept.push_back(e);
        return ComponentCatalog(std::move(kept));
    }

    friend bool operator==(const ComponentCatalog& a, const ComponentCatalog& b) {
        if (a.entries_.size() != b.entries_.size()) return false;
        for (std::size_t i = 0; i < a.entries_.size(); ++i) {
            const auto& x = a.entries_[i];
            const auto& y = b.entries_[i];
            if (x.id != y.id || x.kind != y.kind || x.description != y.description) return false;
        }
        return true;
    }

private:
    std::vector<Component> entries_;
};

// ---------------------------------------------------------------------------
// Requirements
// ---------------------------------------------------------------------------

// Which part of a dataset a requirement belongs to. Example-pool entries feed
// few-shot prompts and are never scored.
enum class Split { Eval, Example };

struct FunctionalSafetyRequirement {
    std::string id;
    std::string text;
    std::optional<ComponentClass> gold_class;
    std::optional<std::vector<std::string>> gold_locations;
    Split split = Split::Eval;
};

using Fsr = FunctionalSafetyRequirement;

inline void check_fsr(const Fsr& fsr) {
    if (fsr.id.empty()) throw FormatError("requirement with empty id");
    if (fsr.text.empty()) throw FormatError("requirement '" + fsr.id + "' has empty text");
    if (fsr.gold_locations) {
        const auto n = fsr.gold_locations->size();
        if (n < 1 || n > 2)
            throw FormatError("requirement '" + fsr.id + "' must name 1 or 2 gold locations");
    }
}

// ---------------------------------------------------------------------------
// Location maps
// ---------------------------------------------------------------------------

// Ordered component-id -> {0,1} mapping. The container itself accepts any
// entries so that candidate maps can be validated; maps produced by
// parse_location_map or LocationMap::select always conform to their catalog.
class LocationMap {
public:
    using Entry = std::pair<std::string, int>;

    LocationMap() = default;
    explicit LocationMap(std::vector<Entry> entries) : entries_(std::move(entries)) {}

    static LocationMap select(const ComponentCatalog& catalog, const std::vector<std::string>& active) {
        std::vector<Entry> e;
        e.reserve(catalog.size());
        for (const auto& c : catalog.entries()) {
            const bool on = std::find(active.begin(), active.end(), c.id) != active.end();
            e.emplace_back(c.id, on ? 1 : 0);
        }
        return LocationMap(std::move(e));
    }

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    long sum() const {
        long s = 0;
        for (const auto& [k, v] : entries_) s += v;
        return s;
    }

    std::vector<std::string> selected() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries_)
            if (v == 1) out.push_back(k);
        return out;
    }

    std::optional<int> value(std::string_view id) const {
        for (const auto& [k, v] : entries_)
            if (k == id) return v;
        return std::nullopt;
    }

    friend bool operator==(const LocationMap&, const LocationMap&) = default;

private:
    std::vector<Entry> entries_;
};

// Compact JSON object in map order, e.g. {"APP":1,"WSA":0}.
inline std::string to_json_text(const LocationMap& map) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : map.entries()) j[k] = v;
    return j.dump();
}

inline LocationMap parse_location_map(const json& value, const ComponentCatalog& catalog) {
    if (!value.is_object()) throw FormatError("location map must be a JSON object");
    std::vector<std::string> unknown;
    for (const auto& [key, v] : value.items()) {
        if (!catalog.contains(key)) unknown.push_back(key);
        const bool binary = v.is_number() && (v.get<double>() == 0.0 || v.get<double>() == 1.0);
        if (!binary) throw FormatError("value for '" + key + "' is out of {0,1}: " + v.dump());
    }
    if (!unknown.empty()) {
        std::string msg = "unknown keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw FormatError(msg);
    }
    std::vector<std::string> missing;
    std::vector<LocationMap::Entry> entries;
    for (const auto& c : catalog.entries()) {
        auto it = value.find(c.id);
        if (it == value.end()) {
            missing.push_back(c.id);
            continue;
        }
        entries.emplace_back(c.id, it->get<double>() == 1.0 ? 1 : 0);
    }
    if (!missing.empty()) {
        std::string msg = "missing keys:";
        for (const auto& k : missing) msg += " " + k;
        throw FormatError(msg);
    }
    return LocationMap(std::move(entries));
}

inline LocationMap parse_location_map(std::string_view json_text, const ComponentCatalog& catalog) {
    json value;
    try {
        value = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("not valid JSON: ") + e.what());
    }
    return parse_location_map(value, catalog);
}
inline LocationMap parse_location_map(const char* json_text, const ComponentCatalog& catalog) {
    return parse_location_map(std::string_view(json_text), catalog);
}

// ---------------------------------------------------------------------------
// Fault types and parameters
// ---------------------------------------------------------------------------

enum class FaultType { Gain, Offset, StuckAt, Delay, Noise, PacketLoss, Drift, Spike };

inline constexpr FaultType kAllFaultTypes[] = {FaultType::Gain,  FaultType::Offset,     FaultType::StuckAt,
                                               FaultType::Delay, FaultType::Noise,      FaultType::PacketLoss,
                                               FaultType::Drift, FaultType::Spike};

inline std::string_view to_string(FaultType t) {
    switch (t) {
        case FaultType::Gain: return "gain";
        case FaultType::Offset: return "offset";
        case FaultType::StuckAt: return "stuck_at";
        case FaultType::Delay: return "delay";
        case FaultType::Noise: return "noise";
        case FaultType::PacketLoss: return "packet_loss";
        case FaultType::Drift: return "drift";
        case FaultType::Spike: return "spike";
    }
    return "?";
}

inline FaultType parse_fault_type(std::string_view s) {
    for (auto t : kAllFaultTypes)
        if (to_string(t) == s) return t;
    throw FormatError("unknown fault type '" + std::string(s) + "'");
}

// Sensors accept every fault type; actuators only stuck-at, delay and packet loss.
inline bool is_applicable(FaultType t, ComponentClass kind) {
    if (kind == ComponentClass::Sensor) return true;
    return t == FaultType::StuckAt || t == FaultType::Delay || t == FaultType::PacketLoss;
}

inline constexpr std::uint64_t kDefaultSeed = 42;

struct GainParams {
    double gain = 1.0;
};
struct OffsetParams {
    double offset = 0.0;
};
struct StuckAtParams {
    double value = 0.0;
};
struct DelayParams {
    double tau_s = 0.0;
};
struct NoiseParams {
    double sigma = 0.0;
    std::uint64_t seed = kDefaultSeed;
};

enum class DropPolicy { ZeroFill, HoldLast };

struct PacketLossParams {
    double delivery_probability = 1.0;
    std::uint64_t seed = kDefaultSeed;
    DropPolicy policy = DropPolicy::ZeroFill;
};
struct DriftParams {
    double slope_per_s = 0.0;
};
struct SpikeParams {
    double amplitude = 0.0;
    double probability = 0.0;
    std::uint64_t seed = kDefaultSeed;
};

// Variant alternative order matches FaultType.
using FaultParams = std::variant<GainParams, OffsetParams, StuckAtParams, DelayParams, NoiseParams,
                                 PacketLossParams, DriftParams, SpikeParams>;

inline FaultType fault_type_of(const FaultParams& p) { return static_cast<FaultType>(p.index()); }

// Empty string when the parameters satisfy their invariants.
inline std::string params_problem(const FaultParams& p) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GainParams>) {
                if (!std::isfinite(v.gain)) return "gain must be finite";
            } else if constexpr (std::is_same_v<T, OffsetParams>) {
                if (!std::isfinite(v.offset)) return "offset must be finite";
            } else if constexpr (std::is_same_v<T, StuckAtParams>) {
                if (!std::isfinite(v.value)) return "stuck value must be finite";
            } else if constexpr (std::is_same_v<T, DelayParams>) {
                if (!std::isfinite(v.tau_s) || v.tau_s < 0) return "tau_s must be >= 0";
            } else if constexpr (std::is_same_v<T, NoiseParams>) {
                if (!std::isfinite(v.sigma) || v.sigma < 0) return "sigma must be >= 0";
            } else if constexpr (std::is_same_v<T, PacketLossParams>) {
                if (!(v.delivery_probability >= 0 && v.delivery_probability <= 1)) return "p must be in [0,1]";
            } else if constexpr (std::is_same_v<T, DriftParams>) {
                if (!std::isfinite(v.slope_per_s)) return "slope must be finite";
            } else if constexpr (std::is_same_v<T, SpikeParams>) {
                if (!std::isfinite(v.amplitude)) return "amplitude must be finite";
                if (!(v.probability >= 0 && v.probability <= 1)) return "spike probability must be in [0,1]";
            }
            return {};
        },
        p);
}

namespace detail {

inline double require_number(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw FormatError(std::string("fault parameters missing '") + key + "'");
    if (!it->is_number()) throw FormatError(std::string("fault parameter '") + key + "' must be a number");
    return it->get<double>();
}

inline std::uint64_t optional_seed(const json& j) {
    auto it = j.find("seed");
    if (it == j.end()) return kDefaultSeed;
    if (!it->is_number_integer()) throw FormatError("fault parameter 'seed' must be an integer");
    return it->get<std::uint64_t>();
}

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed) {
    for (const auto& [key, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw FormatError("unknown fault parameter '" + key + "'");
    }
}

}  // namespace detail

// Fault parameter object: {"type": "delay", "tau_s": 0.5}. Each type has its
// own required keys; "seed" and "policy" are optional. Unknown keys are
// rejected. "window" is tolerated here and parsed by the caller.
inline FaultParams fault_params_from_json(const json& j) {
    using namespace detail;
    if (!j.is_object()) throw FormatError("fault parameters must be an object");
    auto type_it = j.find("type");
    if (type_it == j.end() || !type_it->is_string()) throw FormatError("fault parameters need a string 'type'");
    const FaultType type = parse_fault_type(type_it->get<std::string>());
    FaultParams out;
    switch (type) {
        case FaultType::Gain:
            reject_unknown_keys(j, {"type", "window", "g"});
            out = GainParams{require_number(j, "g")};
            break;
        case FaultType::Offset:
            reject_unknown_keys(j, {"type", "window", "b"});
            out = OffsetParams{require_number(j, "b")};
            break;
        case FaultType::StuckAt:
            reject_unknown_keys(j, {"type", "window", "value"});
            out = StuckAtParams{require_number(j, "value")};
            break;
        case FaultType::Delay:
            reject_unknown_keys(j, {"type", "window", "tau_s"});
            out = DelayParams{require_number(j, "tau_s")};
            break;
        case FaultType::Noise:
            reject_unknown_keys(j, {"type", "window", "sigma", "seed"});
            out = NoiseParams{require_number(j, "sigma"), optional_seed(j)};
            break;
        case FaultType::PacketLoss: {
            reject_unknown_keys(j, {"type", "window", "p", "seed", "policy"});
            DropPolicy policy = DropPolicy::ZeroFill;
            if (auto it = j.find("policy"); it != j.end()) {
                const auto s = it->is_string() ? it->get<std::string>() : std::string{};
                if (s == "zero_fill") policy = DropPolicy::ZeroFill;
                else if (s == "hold_last") policy = DropPolicy::HoldLast;
                else throw FormatError("packet loss policy must be 'zero_fill' or 'hold_last'");
            }
            out = PacketLossParams{require_number(j, "p"), optional_seed(j), policy};
            break;
        }
        case FaultType::Drift:
            reject_unknown_keys(j, {"type", "window", "slope_per_s"});
            out = DriftParams{require_number(j, "slope_per_s")};
            break;
        case FaultType::Spike:
            reject_unknown_keys(j, {"type", "window", "amplitude", "q", "seed"});
            out = SpikeParams{require_number(j, "amplitude"), require_number(j, "q"), optional_seed(j)};
            break;
    }
    if (auto problem = params_problem(out); !problem.empty()) throw FormatError(problem);
    return out;
}

inline ordered_json fault_params_to_json(const FaultParams& p) {
    ordered_json j;
    j["type"] = std::string(to_string(fault_type_of(p)));
    std::visit(
        [&j](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GainParams>) j["g"] = v.gain;
            else if constexpr (std::is_same_v<T, OffsetParams>) j["b"] = v.offset;
            else if constexpr (std::is_same_v<T, StuckAtParams>) j["value"] = v.value;
            else if constexpr (std::is_same_v<T, DelayParams>) j["tau_s"] = v.tau_s;
            else if constexpr (std::is_same_v<T, NoiseParams>) {
                j["sigma"] = v.sigma;
                j["seed"] = v.seed;
            } else if constexpr (std::is_same_v<T, PacketLossParams>) {
                j["p"] = v.delivery_probability;
                j["seed"] = v.seed;
                j["policy"] = v.policy == DropPolicy::ZeroFill ? "zero_fill" : "hold_last";
            } else if constexpr (std::is_same_v<T, DriftParams>) j["slope_per_s"] = v.slope_per_s;
            else if constexpr (std::is_same_v<T, SpikeParams>) {
                j["amplitude"] = v.amplitude;
                j["q"] = v.probability;
                j["seed"] = v.seed;
            }
        },
        p);
    return j;
}

// ---------------------------------------------------------------------------
// Fault test cases
// ---------------------------------------------------------------------------

// Half-open injection interval [t_start_s, t_end_s).
struct Window {
    double t_start_s = 0.0;
    double t_end_s = 0.0;

    bool well_formed() const {
        return std::isfinite(t_start_s) && std::isfinite(t_end_s) && t_start_s >= 0 && t_start_s < t_end_s;
    }
    friend bool operator==(const Window&, const Window&) = default;
};

struct FaultSpec {
    FaultParams params;
    std::optional<Window> window;  // overrides the test case window when set
};

struct FaultTestCase {
    std::string id;
    std::string source_fsr;
    LocationMap locations;
    std::map<std::string, FaultSpec> faults;  // keyed by active component id
    Window window;

    Window window_for(const std::string& component) const {
        auto it = faults.find(component);
        if (it != faults.end() && it->second.window) return *it->second.window;
        return window;
    }
};

enum class ViolationKind {
    KeySetMismatch,
    ValueDomain,
    EmptySelection,
    TooManyLocations,
    MissingFault,
    OrphanFault,
    InapplicableFaultType,
    BadWindow,
    BadParams,
};

inline std::string_view to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::KeySetMismatch: return "key_set_mismatch";
        case ViolationKind::ValueDomain: return "value_domain";
        case ViolationKind::EmptySelection: return "empty_selection";
        case ViolationKind::TooManyLocations: return "too_many_locations";
        case ViolationKind::MissingFault: return "missing_fault";
        case ViolationKind::OrphanFault: return "orphan_fault";
        case ViolationKind::InapplicableFaultType: return "inapplicable_fault_type";
        case ViolationKind::BadWindow: return "bad_window";
        case ViolationKind::BadParams: return "bad_params";
    }
    return "?";
}

struct Violation {
    ViolationKind kind;
    std::string detail;
};

struct ValidationResult {
    std::vector<Violation> violations;

    bool valid() const noexcept { return violations.empty(); }
    bool has(ViolationKind k) const {
        return std::any_of(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; });
    }
    std::string summary() const {
        std::string s;
        for (const auto& v : violations) {
            if (!s.empty()) s += "; ";
            s += std::string(to_string(v.kind));
            if (!v.detail.empty()) s += " (" + v.detail + ")";
        }
        return s.empty() ? "valid" : s;
    }
};

// Invalidity is reported, never thrown.
inline ValidationResult validate_test_case(const FaultTestCase& tc, const ComponentCatalog& catalog) {
    ValidationResult r;
    auto add = [&r](ViolationKind k, std::string detail) { r.violations.push_back({k, std::move(detail)}); };

    const auto& entries = tc.locations.entries();
    bool keys_ok = entries.size() == catalog.size();
    for (std::size_t i = 0; keys_ok && i < entries.size(); ++i) keys_ok = entries[i].first == catalog.entries()[i].id;
    if (!keys_ok) add(ViolationKind::KeySetMismatch, "location keys differ from catalog ids");

    for (const auto& [k, v] : entries)
        if (v != 0 && v != 1) add(ViolationKind::ValueDomain, k + "=" + std::to_string(v));

    const long sum = tc.locations.sum();
    if (sum <= 0) add(ViolationKind::EmptySelection, "sum=" + std::to_string(sum));
    if (sum > 2) add(ViolationKind::TooManyLocations, "sum=" + std::to_string(sum));

    if (!tc.window.well_formed()) add(ViolationKind::BadWindow, "test case window");

    for (const auto& [k, v] : entries) {
        if (v != 1) continue;
        auto it = tc.faults.find(k);
        if (it == tc.faults.end()) {
            add(ViolationKind::MissingFault, k);
            continue;
        }
        const FaultType type = fault_type_of(it->second.params);
        if (const Component* c = catalog.find(k); c && !is_applicable(type, c->kind))
            add(ViolationKind::InapplicableFaultType, std::string(to_string(type)) + " on " + k);
        if (auto problem = params_problem(it->second.params); !problem.empty())
            add(ViolationKind::BadParams, k + ": " + problem);
        if (it->second.window && !it->second.window->well_formed()) add(ViolationKind::BadWindow, k);
    }
    for (const auto& [k, spec] : tc.faults)
        if (tc.locations.value(k) != 1) add(ViolationKind::OrphanFault, k);
    return r;
}

inline json window_to_json(const Window& w) { return json{{"t_start_s", w.t_start_s}, {"t_end_s", w.t_end_s}}; }

inline Window window_from_json(const json& j) {
    if (!j.is_object() || !j.contains("t_start_s") || !j.contains("t_end_s"))
        throw FormatError("window must be {\"t_start_s\", \"t_end_s\"}");
    return Window{j.at("t_start_s").get<double>(), j.at("t_end_s").get<double>()};
}

inline ordered_json test_case_to_json(const FaultTestCase& tc) {
    ordered_json j;
    j["id"] = tc.id;
    j["source_fsr"] = tc.source_fsr;
    ordered_json loc = ordered_json::object();
    for (const auto& [k, v] : tc.locations.entries()) loc[k] = v;
    j["locations"] = loc;
    ordered_json faults = ordered_json::object();
    for (const auto& [k, entry] : tc.locations.entries()) {
        auto it = tc.faults.find(k);
        if (it == tc.faults.end()) continue;
        auto f = fault_params_to_json(it->second.params);
        if (it->second.window) f["window"] = window_to_json(*it->second.window);
        faults[k] = f;
    }
    j["faults"] = faults;
    j["window"] = window_to_json(tc.window);
    return j;
}

// Structural decode only; semantic checks belong to validate_test_case.
inline FaultTestCase test_case_from_json(const ordered_json& j) {
    if (!j.is_object()) throw FormatError("test case must be an object");
    FaultTestCase tc;
    try {
        tc.id = j.at("id").get<std::string>();
        tc.source_fsr = j.value("source_fsr", std::string{});
        tc.window = window_from_json(j.at("window"));
        const ordered_json& loc = j.at("locations");
        if (!loc.is_object()) throw FormatError("locations must be an object");
        std::vector<LocationMap::Entry> entries;
        for (const auto& [k, v] : loc.items()) {
            if (!v.is_number_integer()) throw FormatError("location value for '" + k + "' must be an integer");
            entries.emplace_back(k, v.get<int>());
        }
        tc.locations = LocationMap(std::move(entries));
        if (auto it = j.find("faults"); it != j.end()) {
            for (const auto& [k, f] : it->items()) {
                FaultSpec spec{fault_params_from_json(f), std::nullopt};
                if (f.contains("window")) spec.window = window_from_json(f.at("window"));
                tc.faults.emplace(k, std::move(spec));
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("test case '") + tc.id + "': " + e.what());
    }
    return tc;
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json_file(const std::string& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

// Location maps keep the key order of their input, so parse with ordered_json.
inline std::vector<FaultTestCase> test_cases_from_json(const ordered_json& j) {
    if (!j.is_array()) throw FormatError("test case file must hold a JSON array");
    std::vector<FaultTestCase> out;
    for (const auto& item : j) out.push_back(test_case_from_json(item));
    return out;
}

inline std::vector<FaultTestCase> test_cases_from_text(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw FormatError(std::string("test case file is not valid JSON: ") + e.what());
    }
    return test_cases_from_json(j);
}

inline std::string test_cases_to_text(const std::vector<FaultTestCase>& tcs) {
    ordered_json arr = ordered_json::array();
    for (const auto& tc : tcs) arr.push_back(test_case_to_json(tc));
    return arr.dump(2) + "\n";
}

inline ComponentCatalog catalog_from_json(const json& j) {
    const json& list = j.is_object() ? j.at("components") : j;
    if (!list.is_array()) throw ConfigError("catalog must list its components in an array");
    std::vector<Component> entries;
    for (const auto& c : list) {
        entries.push_back(Component{c.at("id").get<std::string>(),
                                    parse_component_class(c.at("kind").get<std::string>()),
                                    c.value("description", std::string{})});
    }
    return ComponentCatalog(std::move(entries));
}

inline ComponentCatalog load_catalog(const std::string& path) {
    try {
        return catalog_from_json(read_json_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    } catch (const FormatError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline Fsr fsr_from_json(const json& j) {
    Fsr f;
    try {
        f.id = j.at("id").get<std::string>();
        f.text = j.at("text").get<std::string>();
        if (auto it = j.find("gold_class"); it != j.end() && !it->is_null())
            f.gold_class = parse_component_class(it->get<std::string>());
        if (auto it = j.find("gold_locations"); it != j.end() && !it->is_null())
            f.gold_locations = it->get<std::vector<std::string>>();
        if (auto it = j.find("split"); it != j.end()) {
            const auto s = it->get<std::string>();
            if (s == "eval") f.split = Split::Eval;
            else if (s == "example") f.split = Split::Example;
            else throw FormatError("split must be 'eval' or 'example'");
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("requirement record: ") + e.what());
    }
    check_fsr(f);
    return f;
}

// JSON Lines, one requirement per line; blank lines are skipped.
inline std::vector<Fsr> parse_fsr_dataset(std::string_view text) {
    std::vector<Fsr> out;
    std::set<std::string> ids;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError("dataset line " + std::to_string(lineno) + ": " + e.what());
        }
        Fsr f = fsr_from_json(j);
        if (!ids.insert(f.id).second) throw FormatError("duplicate requirement id '" + f.id + "'");
        out.push_back(std::move(f));
    }
    return out;
}

inline std::vector<Fsr> load_fsr_dataset(const std::string& path) {
    try {
        return parse_fsr_dataset(read_text_file(path));
    } catch (const FormatError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline std::vector<Fsr> eval_split(const std::vector<Fsr>& all) {
    std::vector<Fsr> out;
    for (const auto& f : all)
        if (f.split == Split::Eval) out.push_back(f);
    return out;
}

}  // namespace fitgen
