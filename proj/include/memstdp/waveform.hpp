#pragma once

#include "memstdp/errors.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace memstdp::waveform {

// Time is integer nanoseconds end to end so interval arithmetic is exact.
// All quantities of interest (30 us pulses, 0.75 ms separation, 0.1 ms sweep
// steps) are whole nanoseconds; with doubles a 0.1 ms step famously turns
// into 100.00000000000001 us and an off-by-one grid.
using ns_t = std::int64_t;

constexpr ns_t us(std::int64_t x) noexcept { return x * 1000; }
inline ns_t from_us(double x) { return std::llround(x * 1000.0); }
inline ns_t from_ms(double x) { return std::llround(x * 1.0e6); }
constexpr double to_us(ns_t t) noexcept { return static_cast<double>(t) / 1000.0; }
constexpr double to_ms(ns_t t) noexcept { return static_cast<double>(t) / 1.0e6; }

// One constant-voltage interval; the atomic stimulus unit.
struct Segment {
    ns_t start = 0; // ns
    ns_t end = 0;   // ns, start < end
    double volts = 0.0;

    constexpr ns_t width() const noexcept { return end - start; }
    constexpr double width_us() const noexcept { return to_us(end - start); }
    bool operator==(const Segment&) const = default;
};

// Piecewise-constant voltage waveform; 0 V outside the listed segments.
// Canonical form: segments sorted by start, pairwise non-overlapping,
// zero-voltage stretches omitted, equal-voltage neighbors merged.
class Signal {
  public:
    Signal() = default;
    // Canonicalizes any list of non-overlapping pieces (zero-width and
    // zero-voltage pieces are dropped). Throws ValidationError on negative
    // times, start > end, or overlap.
    explicit Signal(std::vector<Segment> pieces);

    const std::vector<Segment>& segments() const noexcept { return segs_; }
    bool empty() const noexcept { return segs_.empty(); }
    std::size_t size() const noexcept { return segs_.size(); }
    bool operator==(const Signal&) const = default;

  private:
    std::vector<Segment> segs_;
};

// The pulse shapes: a wide positive pre pulse and a delayed train of narrow
// negative post pulses; separation is start-to-start.
struct PulseShapeParams {
    double pre_amplitude = 0.5; // V
    ns_t pre_width = us(1500);
    double post_amplitude = -0.5; // V
    ns_t post_pulse_width = us(30);
    int post_pulse_count = 3;
    ns_t post_separation = us(750); // start-to-start
    ns_t post_delay = us(1500);     // first post pulse onset relative to post onset

    void validate() const; // throws ValidationError
};

// Pre-synaptic pulse: one segment [onset, onset + pre_width] at pre_amplitude.
Signal make_pre(ns_t onset, const PulseShapeParams& p = {});

// Post-synaptic train: pulse k occupies
// [onset + post_delay + k*post_separation, ... + post_pulse_width] at post_amplitude.
Signal make_post(ns_t onset, const PulseShapeParams& p = {});

// Pointwise a(t) - b(t), canonical.
Signal subtract(const Signal& a, const Signal& b);

// Maximal disjoint regions where s(t) >= threshold (threshold > 0), sorted by
// start. A region spanning several voltage levels reports its minimum level.
std::vector<Segment> segments_at_least(const Signal& s, double threshold);

// Number of post pulses fully contained in the pre pulse when the pre onset
// leads the post onset by dt (pre onset = dt, post onset = 0).
int coincidence_count(ns_t dt, const PulseShapeParams& p = {});

// Voltage at time t; segment membership is half-open [start, end).
double sample(const Signal& s, ns_t t);

} // namespace memstdp::waveform
