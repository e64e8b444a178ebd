#pragma once

#include <cmath>
#include <cstdint>

namespace memstdp::rng {

// Every random draw in the simulator descends from one root seed through
// derive() calls, so a (seed, experiment layout) pair fixes the full draw
// sequence regardless of execution order or thread schedule.
//
// Key derivation scheme ("seed discipline"):
//   scope keys  : derive(parent, kScope, iteration_index)   one per sweep/repeat
//                 iteration or per (dt, trial) cell
//   device keys : derive(scope, kDevice, device_index)      one per device instance
//   stream keys : derive(device, kStream, 0/1/2)            switch / resistance / noise
// The three per-device streams are separate so e.g. extra reads never shift
// the switching draws.

inline constexpr std::uint64_t kScope = 1;
inline constexpr std::uint64_t kDevice = 2;
inline constexpr std::uint64_t kStream = 3;

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer (Vigna); good 64-bit mixing in three multiplies.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t tag, std::uint64_t index) noexcept {
    std::uint64_t h = mix64(key ^ (tag + kGolden));
    return mix64(h ^ (index + kGolden));
}

// splitmix64 generator: a counter walked through the finalizer. Tiny state,
// no warm-up, and streams with distinct keys are effectively independent.
class Stream {
  public:
    explicit constexpr Stream(std::uint64_t key) noexcept : state_(key) {}

    constexpr std::uint64_t next_u64() noexcept {
        state_ += kGolden;
        return mix64(state_);
    }

    // uniform on [0, 1), 53-bit mantissa
    double next_unit() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * next_unit(); }

    double log_uniform(double lo, double hi) noexcept {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    // Standard normal via Box-Muller. Always consumes exactly two uniforms and
    // never caches the sine half, so the draw count per call is fixed.
    double gaussian() noexcept {
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

  private:
    std::uint64_t state_;
};

} // namespace memstdp::rng
