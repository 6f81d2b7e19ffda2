#pragma once

// Streaming realizations of the eight signal-level fault models. A transform
// owns its state (delay line, random stream, last delivered value) and is fed
// one sample at a time at a fixed step. Outside its window it is the identity.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "fitgen/fsr_model.hpp"
#include "fitgen/rng.hpp"

namespace fitgen {

struct Sample {
    double t = 0.0;
    double value = 0.0;
    friend bool operator==(const Sample&, const Sample&) = default;
};

// Slack applied to window edges so that k*dt lands on the intended side.
inline constexpr double kWindowEdgeEps = 1e-9;

inline bool in_window(const Window& w, double t) {
    return t >= w.t_start_s - kWindowEdgeEps && t < w.t_end_s - kWindowEdgeEps;
}

// Number of whole steps a delay of tau_s spans at step dt.
inline std::size_t delay_steps(double tau_s, double dt) {
    if (tau_s <= 0) return 0;
    return static_cast<std::size_t>(std::ceil(tau_s / dt - 1e-9));
}

class FaultTransform {
public:
    // With a non-empty channel the random stream is seeded from
    // derive_seed(params seed, channel); otherwise from the params seed as is.
    FaultTransform(FaultParams params, Window window, double dt, std::string_view channel = {})
        : params_(std::move(params)), window_(window), dt_(dt), rng_(stream_seed(params_, channel)) {
        if (const auto* d = std::get_if<DelayParams>(&params_)) {
            delay_steps_ = delay_steps(d->tau_s, dt_);
            delay_line_.assign(delay_steps_ + 1, 0.0);
        }
    }

    FaultType type() const { return fault_type_of(params_); }
    const Window& window() const { return window_; }
    const FaultParams& params() const { return params_; }

    Sample apply(Sample s) {
        if (!in_window(window_, s.t)) {
            last_delivered_ = s.value;
            return s;
        }
        const double h = s.value;
        s.value = std::visit([&](const auto& p) { return transform(p, h, s.t); }, params_);
        ++in_window_count_;
        return s;
    }

private:
    static std::uint64_t stream_seed(const FaultParams& p, std::string_view channel) {
        std::uint64_t seed = kDefaultSeed;
        if (const auto* n = std::get_if<NoiseParams>(&p)) seed = n->seed;
        else if (const auto* l = std::get_if<PacketLossParams>(&p)) seed = l->seed;
        else if (const auto* k = std::get_if<SpikeParams>(&p)) seed = k->seed;
        return channel.empty() ? seed : derive_seed(seed, channel);
    }

    double transform(const GainParams& p, double h, double) { return p.gain * h; }
    double transform(const OffsetParams& p, double h, double) { return h + p.offset; }
    double transform(const StuckAtParams& p, double, double) { return p.value; }

    // Before tau has elapsed inside the window the first in-window sample is held.
    double transform(const DelayParams&, double h, double) {
        if (delay_steps_ == 0) return h;
        const std::size_t n = delay_line_.size();
        const std::size_t i = in_window_count_;
        delay_line_[i % n] = h;
        if (i == 0) held_ = h;
        if (i < delay_steps_) return held_;
        return delay_line_[(i - delay_steps_) % n];
    }

    double transform(const NoiseParams& p, double h, double) { return h + p.sigma * rng_.gaussian(); }

    double transform(const PacketLossParams& p, double h, double) {
        if (rng_.uniform() < p.delivery_probability) {
            last_delivered_ = h;
            return h;
        }
        return p.policy == DropPolicy::ZeroFill ? 0.0 : last_delivered_;
    }

    double transform(const DriftParams& p, double h, double t) { return h + p.slope_per_s * (t - window_.t_start_s); }

    double transform(const SpikeParams& p, double h, double) {
        return rng_.uniform() < p.probability ? h + p.amplitude : h;
    }

    FaultParams params_;
    Window window_;
    double dt_;
    Xoshiro256 rng_;
    std::size_t in_window_count_ = 0;
    std::size_t delay_steps_ = 0;
    std::vector<double> delay_line_;
    double held_ = 0.0;
    double last_delivered_ = 0.0;
};

// Applies a transform to a whole stream; convenience for offline use and tests.
inline std::vector<Sample> apply_stream(FaultTransform& f, const std::vector<Sample>& in) {
    std::vector<Sample> out;
    out.reserve(in.size());
    for (const auto& s : in) out.push_back(f.apply(s));
    return out;
}

}  // namespace fitgen
