#pragma once

#include "memstdp/errors.hpp"
#include "memstdp/rng.hpp"
#include "memstdp/waveform.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace memstdp::device {

enum class Level { HRS, LRS };

constexpr const char* to_string(Level l) noexcept { return l == Level::LRS ? "LRS" : "HRS"; }

// Phenomenological stochastic two-state model. Switching is memoryless with a
// voltage-dependent timescale tau(v) = tau0 * exp(-v / v0), one law per
// direction; exposure w at voltage v switches with p = 1 - exp(-w / tau(v)).
struct DeviceParams {
    double tau0_set_us = 0.0; // filled by calibrate()
    double v0_set_v = 0.0;
    double tau0_reset_us = 0.0;
    double v0_reset_v = 0.0;

    double r_lrs_min_ohm = 3.0e3;
    double r_lrs_max_ohm = 7.0e3;
    double r_hrs_min_ohm = 100.0e3;
    double r_hrs_max_ohm = 2.0e6;
    double r_initial_ohm = 50.0e6; // pre-programmed virgin state, treated as HRS

    double series_resistance_ohm = 1000.0; // protection resistor
    bool divider_enabled = true;

    double read_voltage_v = 0.05;
    double read_noise_rel = 0.02;
    double classify_threshold_ohm = 50.0e3;

    // Instrument compliance windows; recorded for safety warnings only, the
    // current limit itself is not modeled.
    double compliance_write_min_a = 100.0e-9;
    double compliance_write_max_a = 30.0e-6;
    double compliance_erase_min_a = 100.0e-6;
    double compliance_erase_max_a = 10.0e-3;

    void validate() const; // throws ValidationError
};

// Measured anchors the switching laws are fitted to.
struct CalibrationTargets {
    double p_two_pulse_peak = 0.90;     // two full coincidences
    double p_baseline = 0.015;          // stray half-amplitude exposure
    double baseline_exposure_us = 1590; // total half-amplitude exposure per trial
    double write_voltage_v = 1.0;       // full write amplitude
    double write_width_us = 30.0;
    double erase_success = 0.99; // per erase pulse at (-write_voltage, write_width)
};

class CalibrationError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// Solves both switching laws from the targets (two anchors each; the reset law
// additionally pins p_reset at half amplitude over the baseline exposure to
// 0.02 so stray negative exposure rarely erases). Resistance and read fields
// keep their defaults. Throws CalibrationError on infeasible targets.
DeviceParams calibrate(const CalibrationTargets& targets = {});

// calibrate({}) computed once.
const DeviceParams& default_params();

double tau_set_us(double v, const DeviceParams& p);       // v > 0
double tau_reset_us(double v_abs, const DeviceParams& p); // v_abs > 0

// Switching probability for one constant segment; pure, 0 on wrong polarity.
double p_set(double v, double width_us, const DeviceParams& p);
double p_reset(double v, double width_us, const DeviceParams& p);

// LRS iff r < classify_threshold (strict).
Level classify_state(double r_ohm, const DeviceParams& p);

struct Warning {
    enum class Kind { Overvoltage, Compliance };
    Kind kind;
    double volts = 0.0;     // segment voltage that triggered the record
    double current_a = 0.0; // estimated current (Compliance only)
    double limit_a = 0.0;   // exceeded ceiling (Compliance only)
    std::string message() const;
};

// Single-owner mutable state; not for concurrent mutation. Three derived
// random streams (switching, resistance sampling, read noise) keep draw
// accounting independent: exactly one switching draw per nonzero-voltage
// nonzero-width segment regardless of state, one resistance draw per
// transition, two noise draws per read. Identical (params, key, stimulus)
// replays bit-identically.
class Device {
  public:
    Device(const DeviceParams& params, std::uint64_t key);

    Level level() const noexcept { return level_; }
    double resistance() const noexcept { return resistance_; }
    const DeviceParams& params() const noexcept { return params_; }

    void apply_segment(const waveform::Segment& seg);
    void apply_signal(const waveform::Signal& s);

    // Noisy resistance readout; does not change level or stored resistance.
    double read();

    // Erase-verify loop (verify first; then up to 10 pulse+verify attempts at
    // -1 V / 30 us); if the device still reads LRS it is deterministically
    // forced to HRS (simulation privilege). Returns true when forced.
    bool force_reset();
    // Symmetric write-verify loop towards LRS at +1 V / 30 us.
    bool force_set();

    const std::vector<Warning>& warnings() const noexcept { return warnings_; }
    void clear_warnings() { warnings_.clear(); }

    // draw accounting, useful for reproducibility tests
    std::uint64_t switch_draws() const noexcept { return switch_draws_; }
    std::uint64_t transitions() const noexcept { return transitions_; }

  private:
    double effective_voltage(double volts) const noexcept;
    double sample_lrs();
    double sample_hrs();

    DeviceParams params_;
    Level level_ = Level::HRS;
    double resistance_ = 0.0;
    rng::Stream switch_stream_;
    rng::Stream resist_stream_;
    rng::Stream noise_stream_;
    std::vector<Warning> warnings_;
    std::uint64_t switch_draws_ = 0;
    std::uint64_t transitions_ = 0;
};

// Fresh device in the pre-programmed virgin state (HRS at r_initial).
inline Device new_device(const DeviceParams& params, std::uint64_t key) {
    return Device(params, key);
}

} // namespace memstdp::device
