#pragma once

// Closed-loop run of plant + controller over a virtual signal bus. Fault
// transforms interpose on named bus channels only: sensor channels between
// the plant and its consumers (controller, recorder), actuator channels
// between the controller and the plant. The plant never sees fault params.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fitgen/digest.hpp"
#include "fitgen/errors.hpp"
#include "fitgen/fault_models.hpp"
#include "fitgen/fsr_model.hpp"
#include "fitgen/plant.hpp"

namespace fitgen {

struct BusChannel {
    std::string id;
    std::string unit;
    ComponentClass kind;
    std::string description;
};

// Bus layout, in recording order.
inline const std::vector<BusChannel>& bus_channels() {
    static const std::vector<BusChannel> channels{
        {"APP", "%", ComponentClass::Sensor, "Accelerator pedal position sensor"},
        {"BPP", "%", ComponentClass::Sensor, "Brake pedal position sensor"},
        {"WS", "m/s", ComponentClass::Sensor, "Wheel speed sensor (vehicle speed)"},
        {"RPM", "rpm", ComponentClass::Sensor, "Engine speed sensor"},
        {"TQ", "N*m", ComponentClass::Sensor, "Engine torque estimate"},
        {"TEMP", "degC", ComponentClass::Sensor, "Engine coolant temperature sensor"},
        {"GEAR", "-", ComponentClass::Sensor, "Engaged gear"},
        {"WSA", "deg", ComponentClass::Sensor, "Wheel steering angle sensor"},
        {"YR", "deg/s", ComponentClass::Sensor, "Yaw rate sensor"},
        {"ST", "N*m", ComponentClass::Sensor, "Steering torque sensor"},
        {"THR", "%", ComponentClass::Actuator, "Throttle actuator command"},
        {"BRK", "%", ComponentClass::Actuator, "Brake actuator command"},
    };
    return channels;
}

inline ComponentCatalog bus_catalog() {
    std::vector<Component> entries;
    for (const auto& ch : bus_channels()) entries.push_back({ch.id, ch.kind, ch.description});
    return ComponentCatalog(std::move(entries));
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

enum class RunKind { Golden, Faulty };

struct TraceMetadata {
    std::string cycle_digest;
    std::string plant_digest;
    std::string fault_digest;

    friend bool operator==(const TraceMetadata&, const TraceMetadata&) = default;
};

struct Trace {
    std::string run_id;
    RunKind kind = RunKind::Golden;
    std::vector<std::string> tc_ids;  // faulty runs only
    double dt = 0.01;
    std::vector<std::string> channels;
    std::vector<std::vector<double>> values;  // [channel][step]
    std::vector<std::string> shadow_channels;  // pre-interposition copies of faulted channels
    std::vector<std::vector<double>> shadow_values;
    TraceMetadata meta;

    std::size_t samples() const { return values.empty() ? 0 : values.front().size(); }
    double time(std::size_t k) const { return static_cast<double>(k) * dt; }

    std::optional<std::size_t> index_of(const std::string& channel) const {
        auto it = std::find(channels.begin(), channels.end(), channel);
        if (it == channels.end()) return std::nullopt;
        return static_cast<std::size_t>(it - channels.begin());
    }
    const std::vector<double>& channel(const std::string& id) const {
        auto i = index_of(id);
        if (!i) throw UnknownChannel(id);
        return values[*i];
    }
    const std::vector<double>* shadow(const std::string& id) const {
        auto it = std::find(shadow_channels.begin(), shadow_channels.end(), id);
        return it == shadow_channels.end() ? nullptr : &shadow_values[static_cast<std::size_t>(it - shadow_channels.begin())];
    }

    friend bool operator==(const Trace&, const Trace&) = default;
};

// ---------------------------------------------------------------------------
// Pacing
// ---------------------------------------------------------------------------

struct Pacing {
    enum class Mode { AsFastAsPossible, WallClock } mode = Mode::AsFastAsPossible;
    double rate = 1.0;  // simulated seconds per wall-clock second

    static Pacing fast() { return {}; }
    static Pacing wall_clock(double rate) {
        if (!(rate > 0)) throw ConfigError("pacing rate must be positive");
        return {Mode::WallClock, rate};
    }
};

// Holds step k+1 back until simulated time k*dt maps onto wall time.
class Pacer {
public:
    Pacer(Pacing p, double dt) : p_(p), dt_(dt), start_(std::chrono::steady_clock::now()) {}

    void after_step(std::size_t k) const {
        if (p_.mode != Pacing::Mode::WallClock) return;
        const double wall_s = static_cast<double>(k + 1) * dt_ / p_.rate;
        std::this_thread::sleep_until(start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                   std::chrono::duration<double>(wall_s)));
    }

private:
    Pacing p_;
    double dt_;
    std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

inline constexpr int kMaxConcurrentLocations = 2;

namespace detail {

struct ActiveFault {
    std::size_t channel;
    FaultTransform transform;
};

inline std::vector<ActiveFault> plan_faults(const std::vector<FaultTestCase>& tcs, double dt) {
    const auto& chans = bus_channels();
    std::vector<ActiveFault> plan;
    std::vector<std::pair<Window, std::string>> intervals;
    for (const auto& tc : tcs) {
        const long sum = tc.locations.sum();
        if (sum < 1 || sum > kMaxConcurrentLocations)
            throw InvalidTestCase(tc.id + ": location sum must be 1 or 2, got " + std::to_string(sum));
        for (const auto& [id, v] : tc.locations.entries()) {
            if (v != 0 && v != 1) throw InvalidTestCase(tc.id + ": location value out of {0,1} for " + id);
            if (v == 0) continue;
            auto ch = std::find_if(chans.begin(), chans.end(), [&](const BusChannel& c) { return c.id == id; });
            if (ch == chans.end()) throw UnknownChannel(id);
            auto spec = tc.faults.find(id);
            if (spec == tc.faults.end()) throw InvalidTestCase(tc.id + ": no fault parameters for " + id);
            const FaultType type = fault_type_of(spec->second.params);
            if (!is_applicable(type, ch->kind))
                throw InvalidTestCase(tc.id + ": " + std::string(to_string(type)) + " does not apply to actuator " + id);
            if (auto problem = params_problem(spec->second.params); !problem.empty())
                throw InvalidTestCase(tc.id + ": " + id + ": " + problem);
            const Window w = tc.window_for(id);
            if (!w.well_formed()) throw InvalidTestCase(tc.id + ": bad injection window for " + id);
            intervals.emplace_back(w, tc.id + "/" + id);
            plan.push_back({static_cast<std::size_t>(ch - chans.begin()),
                            FaultTransform(spec->second.params, w, dt, id)});
        }
    }
    // Sweep over window edges; ends sort before starts at equal times (half-open).
    std::vector<std::pair<double, int>> edges;
    for (const auto& [w, name] : intervals) {
        edges.emplace_back(w.t_start_s, +1);
        edges.emplace_back(w.t_end_s, -1);
    }
    std::sort(edges.begin(), edges.end());
    int active = 0;
    for (const auto& [t, d] : edges) {
        active += d;
        if (active > kMaxConcurrentLocations)
            throw ConcurrencyBoundExceeded(std::to_string(active) + " fault locations active at t=" + std::to_string(t) + " s");
    }
    return plan;
}

}  // namespace detail

// Per step: plant state -> sensor publish -> sensor faults -> controller ->
// actuator faults -> record -> plant update. Step k+1 starts only after step k
// is recorded.
inline Trace run_with_faults(const DrivingCycle& cycle, const PlantConfig& cfg, const std::vector<FaultTestCase>& tcs,
                             Pacing pacing = {}) {
    cycle.check();
    cfg.check();
    auto faults = detail::plan_faults(tcs, cycle.dt);

    const auto& chans = bus_channels();
    const std::size_t nch = chans.size();
    const std::size_t steps = cycle.steps();
    enum Ch : std::size_t { APP, BPP, WS, RPM, TQ, TEMP, GEAR, WSA, YR, ST, THR, BRK };

    Trace trace;
    trace.kind = tcs.empty() ? RunKind::Golden : RunKind::Faulty;
    for (const auto& tc : tcs) trace.tc_ids.push_back(tc.id);
    trace.run_id = tcs.empty() ? "golden" : "faulty";
    for (const auto& id : trace.tc_ids) trace.run_id += "-" + id;
    trace.dt = cycle.dt;
    for (const auto& c : chans) trace.channels.push_back(c.id);
    trace.values.assign(nch, std::vector<double>(steps));

    std::vector<bool> faulted(nch, false);
    for (const auto& f : faults) faulted[f.channel] = true;
    std::vector<std::size_t> shadow_slot(nch, 0);
    for (std::size_t i = 0; i < nch; ++i) {
        if (!faulted[i]) continue;
        shadow_slot[i] = trace.shadow_channels.size();
        trace.shadow_channels.push_back(chans[i].id);
        trace.shadow_values.emplace_back(steps);
    }

    trace.meta.cycle_digest = cycle_digest(cycle);
    trace.meta.plant_digest = plant_digest(cfg);
    trace.meta.fault_digest = sha256_hex(test_cases_to_text(tcs));

    PlantState state = initial_plant_state(cfg);
    SpeedController controller(cfg);
    const Pacer pacer(pacing, cycle.dt);
    std::vector<double> bus(nch);

    auto interpose = [&](std::size_t first, std::size_t last, double t) {
        for (auto& f : faults) {
            if (f.channel < first || f.channel > last) continue;
            bus[f.channel] = f.transform.apply(Sample{t, bus[f.channel]}).value;
        }
    };
    auto shadow = [&](std::size_t first, std::size_t last, std::size_t k) {
        for (std::size_t i = first; i <= last; ++i)
            if (faulted[i]) trace.shadow_values[shadow_slot[i]][k] = bus[i];
    };

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = cycle.time(k);
        const double steer_deg = cfg.steer_amplitude_deg * std::sin(2.0 * std::numbers::pi * t / cfg.steer_period_s);
        const double steer_rad = steer_deg * std::numbers::pi / 180.0;

        bus[APP] = cycle.app[k] * 100.0;
        bus[BPP] = cycle.brake[k] * 100.0;
        bus[WS] = state.vehicle_speed_mps;
        bus[RPM] = state.engine_speed_rpm;
        bus[TQ] = state.engine_torque_nm;
        bus[TEMP] = state.engine_temp_c;
        bus[GEAR] = state.gear;
        bus[WSA] = steer_deg;
        bus[YR] = state.vehicle_speed_mps * std::tan(steer_rad) / cfg.wheelbase_m * 180.0 / std::numbers::pi;
        bus[ST] = cfg.steer_torque_per_deg * steer_deg;
        shadow(APP, ST, k);
        interpose(APP, ST, t);

        const auto cmd = controller.update({bus[APP], bus[BPP], bus[WS], bus[RPM]}, t, cycle.dt);
        bus[THR] = cmd.throttle_pct;
        bus[BRK] = cmd.brake_pct;
        shadow(THR, BRK, k);
        interpose(THR, BRK, t);

        for (std::size_t i = 0; i < nch; ++i) trace.values[i][k] = bus[i];

        state = step_plant(state, PlantInputs{bus[THR] / 100.0, bus[BRK] / 100.0, cmd.gear}, cycle.dt, cfg);
        pacer.after_step(k);
    }
    return trace;
}

inline Trace run_golden(const DrivingCycle& cycle, const PlantConfig& cfg, Pacing pacing = {}) {
    return run_with_faults(cycle, cfg, {}, pacing);
}

// Earliest injection start over all test cases, or +inf without faults.
inline double earliest_injection(const std::vector<FaultTestCase>& tcs) {
    double t = std::numeric_limits<double>::infinity();
    for (const auto& tc : tcs)
        for (const auto& id : tc.locations.selected()) t = std::min(t, tc.window_for(id).t_start_s);
    return t;
}

}  // namespace fitgen
