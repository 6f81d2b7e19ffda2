#pragma once

// Simplified longitudinal vehicle/engine plant, its engine controller and
// the driving cycles that drive it. All constants live in PlantConfig, which
// round-trips through a versioned JSON file.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fitgen/digest.hpp"
#include "fitgen/errors.hpp"
#include "fitgen/fsr_model.hpp"

namespace fitgen {

inline constexpr int kPlantSchemaVersion = 1;
inline constexpr double kGravity = 9.81;

struct PlantConfig {
    // vehicle
    double mass_kg = 1500.0;
    double wheel_radius_m = 0.31;
    double final_drive = 3.9;
    std::vector<double> gear_ratios{3.5, 2.1, 1.4, 1.0, 0.8};
    double driveline_efficiency = 0.9;
    double drag_area_m2 = 0.7;  // Cd * A
    double air_density = 1.2;
    double rolling_coeff = 0.012;
    double max_brake_force_n = 12000.0;
    // engine: full-load torque curve (rpm, N*m), linear in between
    double idle_rpm = 800.0;
    std::vector<std::pair<double, double>> torque_curve{
        {800.0, 150.0}, {2000.0, 250.0}, {4500.0, 240.0}, {6000.0, 180.0}, {6500.0, 0.0}};
    // coolant temperature: first-order lag toward base + load_gain * throttle
    double temp_initial_c = 85.0;
    double temp_base_c = 85.0;
    double temp_load_gain_c = 25.0;
    double temp_time_constant_s = 30.0;
    // engine controller
    double speed_per_pedal_mps = 40.0;  // target speed at 100 % pedal
    double speed_kp = 0.15;
    double speed_ki = 0.03;
    double auto_brake_gain = 0.05;
    double auto_brake_deadband_mps = 2.0;
    double upshift_rpm = 3000.0;
    double downshift_rpm = 1300.0;
    double shift_hold_s = 1.0;
    // steering excitation for the lateral sensor channels
    double steer_amplitude_deg = 5.0;
    double steer_period_s = 40.0;
    double wheelbase_m = 2.7;
    double steer_torque_per_deg = 0.4;

    double max_torque(double rpm) const {
        if (rpm <= torque_curve.front().first) return torque_curve.front().second;
        for (std::size_t i = 1; i < torque_curve.size(); ++i) {
            const auto [r1, t1] = torque_curve[i];
            if (rpm <= r1) {
                const auto [r0, t0] = torque_curve[i - 1];
                return t0 + (t1 - t0) * (rpm - r0) / (r1 - r0);
            }
        }
        return torque_curve.back().second;
    }

    void check() const {
        if (!(mass_kg > 0 && wheel_radius_m > 0 && final_drive > 0 && driveline_efficiency > 0))
            throw ConfigError("plant: mass, wheel radius, final drive and efficiency must be positive");
        if (gear_ratios.empty()) throw ConfigError("plant: at least one gear ratio");
        if (torque_curve.size() < 2) throw ConfigError("plant: torque curve needs two points");
        for (std::size_t i = 1; i < torque_curve.size(); ++i)
            if (!(torque_curve[i].first > torque_curve[i - 1].first))
                throw ConfigError("plant: torque curve rpm must increase");
        if (!(temp_time_constant_s > 0)) throw ConfigError("plant: temperature time constant must be positive");
        if (!(idle_rpm > 0)) throw ConfigError("plant: idle rpm must be positive");
    }
};

inline ordered_json plant_config_to_json(const PlantConfig& c) {
    ordered_json j;
    j["schema_version"] = kPlantSchemaVersion;
    j["mass_kg"] = c.mass_kg;
    j["wheel_radius_m"] = c.wheel_radius_m;
    j["final_drive"] = c.final_drive;
    j["gear_ratios"] = c.gear_ratios;
    j["driveline_efficiency"] = c.driveline_efficiency;
    j["drag_area_m2"] = c.drag_area_m2;
    j["air_density"] = c.air_density;
    j["rolling_coeff"] = c.rolling_coeff;
    j["max_brake_force_n"] = c.max_brake_force_n;
    j["idle_rpm"] = c.idle_rpm;
    ordered_json curve = ordered_json::array();
    for (const auto& [r, t] : c.torque_curve) curve.push_back({r, t});
    j["torque_curve"] = curve;
    j["temp_initial_c"] = c.temp_initial_c;
    j["temp_base_c"] = c.temp_base_c;
    j["temp_load_gain_c"] = c.temp_load_gain_c;
    j["temp_time_constant_s"] = c.temp_time_constant_s;
    j["speed_per_pedal_mps"] = c.speed_per_pedal_mps;
    j["speed_kp"] = c.speed_kp;
    j["speed_ki"] = c.speed_ki;
    j["auto_brake_gain"] = c.auto_brake_gain;
    j["auto_brake_deadband_mps"] = c.auto_brake_deadband_mps;
    j["upshift_rpm"] = c.upshift_rpm;
    j["downshift_rpm"] = c.downshift_rpm;
    j["shift_hold_s"] = c.shift_hold_s;
    j["steer_amplitude_deg"] = c.steer_amplitude_deg;
    j["steer_period_s"] = c.steer_period_s;
    j["wheelbase_m"] = c.wheelbase_m;
    j["steer_torque_per_deg"] = c.steer_torque_per_deg;
    return j;
}

// Missing keys keep their defaults; unknown keys are rejected.
inline PlantConfig plant_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("plant config must be an object");
    if (j.value("schema_version", 0) != kPlantSchemaVersion)
        throw ConfigError("plant config schema_version must be " + std::to_string(kPlantSchemaVersion));
    PlantConfig c;
    const auto known = plant_config_to_json(c);
    for (const auto& [k, v] : j.items())
        if (!known.contains(k)) throw ConfigError("unknown plant config key '" + k + "'");
    try {
        auto num = [&j](const char* key, double& field) {
            if (auto it = j.find(key); it != j.end()) field = it->get<double>();
        };
        num("mass_kg", c.mass_kg);
        num("wheel_radius_m", c.wheel_radius_m);
        num("final_drive", c.final_drive);
        if (j.contains("gear_ratios")) c.gear_ratios = j.at("gear_ratios").get<std::vector<double>>();
        num("driveline_efficiency", c.driveline_efficiency);
        num("drag_area_m2", c.drag_area_m2);
        num("air_density", c.air_density);
        num("rolling_coeff", c.rolling_coeff);
        num("max_brake_force_n", c.max_brake_force_n);
        num("idle_rpm", c.idle_rpm);
        if (j.contains("torque_curve")) {
            c.torque_curve.clear();
            for (const auto& p : j.at("torque_curve")) c.torque_curve.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        }
        num("temp_initial_c", c.temp_initial_c);
        num("temp_base_c", c.temp_base_c);
        num("temp_load_gain_c", c.temp_load_gain_c);
        num("temp_time_constant_s", c.temp_time_constant_s);
        num("speed_per_pedal_mps", c.speed_per_pedal_mps);
        num("speed_kp", c.speed_kp);
        num("speed_ki", c.speed_ki);
        num("auto_brake_gain", c.auto_brake_gain);
        num("auto_brake_deadband_mps", c.auto_brake_deadband_mps);
        num("upshift_rpm", c.upshift_rpm);
        num("downshift_rpm", c.downshift_rpm);
        num("shift_hold_s", c.shift_hold_s);
        num("steer_amplitude_deg", c.steer_amplitude_deg);
        num("steer_period_s", c.steer_period_s);
        num("wheelbase_m", c.wheelbase_m);
        num("steer_torque_per_deg", c.steer_torque_per_deg);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("plant config: ") + e.what());
    }
    c.check();
    return c;
}

inline std::string plant_digest(const PlantConfig& c) { return sha256_hex(plant_config_to_json(c).dump()); }

// ---------------------------------------------------------------------------
// Plant dynamics
// ---------------------------------------------------------------------------

struct PlantState {
    double engine_speed_rpm = 800.0;
    double vehicle_speed_mps = 0.0;
    double engine_torque_nm = 0.0;
    double engine_temp_c = 85.0;
    int gear = 1;

    friend bool operator==(const PlantState&, const PlantState&) = default;
};

inline PlantState initial_plant_state(const PlantConfig& c) {
    PlantState s;
    s.engine_speed_rpm = c.idle_rpm;
    s.engine_temp_c = std::clamp(c.temp_initial_c, -40.0, 200.0);
    return s;
}

struct PlantInputs {
    double throttle = 0.0;  // [0, 1]
    double brake = 0.0;     // [0, 1]
    int gear_request = 0;   // 0 keeps the current gear
};

inline double rpm_from_speed(const PlantConfig& c, double v_mps, int gear) {
    const double wheel_rad_s = v_mps / c.wheel_radius_m;
    return wheel_rad_s * c.gear_ratios[static_cast<std::size_t>(gear - 1)] * c.final_drive * 60.0 / (2.0 * std::numbers::pi);
}

// One explicit-Euler step. Inputs are clamped to their ranges.
inline PlantState step_plant(const PlantState& s, const PlantInputs& in, double dt, const PlantConfig& c) {
    if (!(dt > 0)) throw ConfigError("plant step needs dt > 0");
    const int max_gear = static_cast<int>(c.gear_ratios.size());
    PlantState n = s;
    if (in.gear_request >= 1 && in.gear_request <= max_gear) n.gear = in.gear_request;
    const double throttle = std::clamp(std::isfinite(in.throttle) ? in.throttle : 0.0, 0.0, 1.0);
    const double brake = std::clamp(std::isfinite(in.brake) ? in.brake : 0.0, 0.0, 1.0);

    n.engine_torque_nm = throttle * c.max_torque(s.engine_speed_rpm);
    const double ratio = c.gear_ratios[static_cast<std::size_t>(n.gear - 1)] * c.final_drive;
    const double traction = n.engine_torque_nm * ratio * c.driveline_efficiency / c.wheel_radius_m;
    const double v = s.vehicle_speed_mps;
    const double drag = 0.5 * c.air_density * c.drag_area_m2 * v * v;
    const double resist = c.rolling_coeff * c.mass_kg * kGravity + brake * c.max_brake_force_n;

    double net = 0.0;
    if (v > 0) net = traction - drag - resist;
    else net = std::max(0.0, traction - resist);  // static: resistance holds up to traction
    n.vehicle_speed_mps = std::max(0.0, v + net / c.mass_kg * dt);

    n.engine_speed_rpm = std::max(c.idle_rpm, rpm_from_speed(c, n.vehicle_speed_mps, n.gear));

    const double setpoint = c.temp_base_c + c.temp_load_gain_c * throttle;
    n.engine_temp_c = std::clamp(s.engine_temp_c + dt / c.temp_time_constant_s * (setpoint - s.engine_temp_c), -40.0, 200.0);
    return n;
}

// ---------------------------------------------------------------------------
// Engine controller: PI speed tracking against the pedal-implied target,
// brake pass-through with overspeed assist, and rpm-scheduled shifting. It
// sees sensor values after fault interposition.
// ---------------------------------------------------------------------------

struct ControllerInputs {
    double app_pct = 0.0;
    double bpp_pct = 0.0;
    double speed_mps = 0.0;
    double engine_rpm = 0.0;
};

struct ControllerCommands {
    double throttle_pct = 0.0;
    double brake_pct = 0.0;
    int gear = 1;
};

class SpeedController {
public:
    explicit SpeedController(const PlantConfig& c) : c_(c) {}

    ControllerCommands update(const ControllerInputs& in, double t, double dt) {
        const double target = std::max(0.0, in.app_pct / 100.0) * c_.speed_per_pedal_mps;
        const double err = target - in.speed_mps;
        double u = c_.speed_kp * err + c_.speed_ki * integral_;
        // Conditional integration: stop winding up once saturated in the same direction.
        if ((u < 1.0 || err < 0) && (u > 0.0 || err > 0)) integral_ += err * dt;
        u = std::clamp(c_.speed_kp * err + c_.speed_ki * integral_, 0.0, 1.0);

        const double pedal_brake = std::clamp(in.bpp_pct / 100.0, 0.0, 1.0);
        const double assist = std::clamp(c_.auto_brake_gain * (-err - c_.auto_brake_deadband_mps), 0.0, 1.0);

        const int max_gear = static_cast<int>(c_.gear_ratios.size());
        if (t - last_shift_s_ >= c_.shift_hold_s) {
            if (in.engine_rpm > c_.upshift_rpm && gear_ < max_gear) {
                ++gear_;
                last_shift_s_ = t;
            } else if (in.engine_rpm < c_.downshift_rpm && gear_ > 1) {
                --gear_;
                last_shift_s_ = t;
            }
        }
        return ControllerCommands{u * 100.0, std::max(pedal_brake, assist) * 100.0, gear_};
    }

private:
    const PlantConfig& c_;
    double integral_ = 0.0;
    double last_shift_s_ = -1e9;
    int gear_ = 1;
};

// ---------------------------------------------------------------------------
// Driving cycles
// ---------------------------------------------------------------------------

struct DrivingCycle {
    double dt = 0.01;
    std::vector<double> app;    // [0, 1] per step
    std::vector<double> brake;  // [0, 1] per step

    std::size_t steps() const { return app.size(); }
    double duration() const { return static_cast<double>(steps()) * dt; }
    double time(std::size_t k) const { return static_cast<double>(k) * dt; }

    void check() const {
        if (!(dt > 0)) throw ConfigError("driving cycle step must be positive");
        if (app.size() != brake.size()) throw ConfigError("driving cycle pedal series differ in length");
        for (std::size_t k = 0; k < app.size(); ++k)
            if (!(app[k] >= 0 && app[k] <= 1 && brake[k] >= 0 && brake[k] <= 1))
                throw ConfigError("driving cycle pedal out of [0,1] at step " + std::to_string(k));
    }
};

struct CycleBreakpoint {
    double t_s;
    double app;
    double brake;
};

// Samples a piecewise-linear pedal profile at k*dt for k < round(duration/dt).
inline DrivingCycle cycle_from_breakpoints(const std::vector<CycleBreakpoint>& bp, double duration_s, double dt) {
    if (!(dt > 0)) throw ConfigError("cycle step must be positive");
    const double steps_f = duration_s / dt;
    const auto steps = static_cast<std::size_t>(std::llround(steps_f));
    if (std::abs(steps_f - static_cast<double>(steps)) > 1e-6) throw ConfigError("cycle duration is not a whole number of steps");
    DrivingCycle c;
    c.dt = dt;
    c.app.resize(steps);
    c.brake.resize(steps);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = c.time(k);
        while (seg + 1 < bp.size() && bp[seg + 1].t_s <= t) ++seg;
        if (seg + 1 >= bp.size()) {
            c.app[k] = bp.back().app;
            c.brake[k] = bp.back().brake;
            continue;
        }
        const auto& a = bp[seg];
        const auto& b = bp[seg + 1];
        const double w = t <= a.t_s ? 0.0 : (t - a.t_s) / (b.t_s - a.t_s);
        c.app[k] = a.app + (b.app - a.app) * w;
        c.brake[k] = a.brake + (b.brake - a.brake) * w;
    }
    c.check();
    return c;
}

// 400 s reference cycle: smooth cruising up to ~175 s, then an urban
// stop-and-go section with quick pedal tip-ins, then a final stop.
inline DrivingCycle default_driving_cycle(double dt = 0.01, double duration_s = 400.0) {
    static const std::vector<CycleBreakpoint> bp{
        {0, 0, 0},        {5, 0, 0},        {15, 0.45, 0},   {60, 0.55, 0},    {80, 0.70, 0},
        {120, 0.70, 0},   {135, 0.50, 0},   {170, 0.50, 0},  {175, 0.50, 0},   {176, 0.20, 0},
        {185, 0.20, 0},   {186, 0, 0.30},   {192, 0, 0.30},  {193, 0.60, 0},   {205, 0.60, 0},
        {206, 0.30, 0},   {220, 0.30, 0},   {221, 0.75, 0},  {240, 0.75, 0},   {241, 0, 0.40},
        {250, 0, 0.40},   {251, 0.40, 0},   {265, 0.40, 0},  {266, 0.65, 0},   {285, 0.65, 0},
        {286, 0.15, 0},   {300, 0.15, 0},   {301, 0.55, 0},  {320, 0.55, 0},   {321, 0, 0.25},
        {330, 0, 0.25},   {331, 0.45, 0},   {350, 0.45, 0},  {351, 0.70, 0},   {370, 0.70, 0},
        {371, 0.30, 0},   {380, 0.30, 0},   {381, 0, 0.50},  {400, 0, 0.50}};
    return cycle_from_breakpoints(bp, duration_s, dt);
}

inline std::string cycle_to_csv(const DrivingCycle& c) {
    std::string out = "t_s,app,brake\n";
    char buf[96];
    for (std::size_t k = 0; k < c.steps(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", c.time(k), c.app[k], c.brake[k]);
        out += buf;
    }
    return out;
}

// CSV `t_s,app,brake`. The step is taken from the first two rows (or
// fallback_dt for fewer than two rows) and must be uniform.
inline DrivingCycle cycle_from_csv(std::string_view text, double fallback_dt = 0.01) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("driving cycle CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t_s,app,brake") throw ConfigError("driving cycle CSV header must be t_s,app,brake");
    std::vector<double> ts;
    DrivingCycle c;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        double t = 0, a = 0, b = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &a, &b) != 3) throw ConfigError("bad driving cycle row: " + line);
        ts.push_back(t);
        c.app.push_back(a);
        c.brake.push_back(b);
    }
    c.dt = ts.size() >= 2 ? ts[1] - ts[0] : fallback_dt;
    for (std::size_t k = 0; k < ts.size(); ++k)
        if (std::abs(ts[k] - c.time(k)) > 1e-6 * std::max(1.0, ts[k]))
            throw ConfigError("driving cycle rows are not evenly spaced at row " + std::to_string(k + 2));
    c.check();
    return c;
}

inline std::string cycle_digest(const DrivingCycle& c) {
    std::string canon;
    char buf[128];
    std::snprintf(buf, sizeof buf, "dt=%.17g\n", c.dt);
    canon += buf;
    for (std::size_t k = 0; k < c.steps(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", c.app[k], c.brake[k]);
        canon += buf;
    }
    return sha256_hex(canon);
}

}  // namespace fitgen
