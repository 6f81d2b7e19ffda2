#pragma once

// Portable, fully specified random streams for the stochastic fault models.
//
//   seeding   : xoshiro256** state words are four successive SplitMix64
//               outputs starting from the 64-bit seed.
//   uniform   : (next() >> 11) * 2^-53, a double in [0, 1).
//   gaussian  : Box-Muller, cosine branch only, one standard normal per two
//               uniforms: sqrt(-2 ln(1 - u1)) * cos(2 pi u2).
//   per-channel seeds: splitmix64(master ^ fnv1a64(channel id)).
//
// Every step is integer arithmetic or a single libm call, so streams agree
// across platforms that share IEEE-754 doubles and a correctly rounded libm.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace fitgen {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view channel) {
    std::uint64_t s = master ^ fnv1a64(channel);
    return splitmix64(s);
}

class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double gaussian() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace fitgen
