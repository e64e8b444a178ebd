#pragma once

#include "memstdp/device.hpp"
#include "memstdp/waveform.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace memstdp::protocol {

// Aggregated, schedule-independent run statistics (warnings only for now).
struct RunStats {
    std::uint64_t warning_count = 0;
    double max_estimated_current_a = 0.0;
};

struct StdpSweepConfig {
    waveform::ns_t dt_start = 0;
    waveform::ns_t dt_stop = waveform::us(8000);
    waveform::ns_t dt_step = waveform::us(100); // grid inclusive of both endpoints
    int trials = 100;
    waveform::PulseShapeParams pulse;
    std::uint64_t seed = 0;
    int jobs = 1; // execution width only; results are schedule-independent

    void validate() const;
    int grid_size() const; // floor((stop - start) / step) + 1
};

struct CurvePoint {
    waveform::ns_t dt = 0;
    int trials = 0;
    int writes = 0;
    double p_hat = 0.0;
    double p_analytic = 0.0;
    bool operator==(const CurvePoint&) const = default;
};

struct ProbabilityCurve {
    std::vector<CurvePoint> points;
    RunStats stats;
};

// Closed-form success probability of one trial starting from the virgin HRS
// state: P = 1 - exp(-sum_i w_i / tau_set(v_i * D)) over the positive segments
// of the composed waveform, with the divider factor D taken at r_initial.
double analytic_probability(waveform::ns_t dt, const waveform::PulseShapeParams& pulse,
                            const device::DeviceParams& params);

// For each dt on the inclusive grid and each trial: fresh device, force_reset,
// apply subtract(make_pre(dt), make_post(0)), read, classify. Cell (i, j) uses
// the device key derive(derive(derive(seed, kScope, i), kScope, j), kDevice, 0),
// so the output is independent of the execution schedule.
ProbabilityCurve run_stdp_sweep(const StdpSweepConfig& cfg, const device::DeviceParams& params);

enum class SweepKind { Write, Erase };
enum class SweepAxis { Amplitude, Width };

struct CharacterizationConfig {
    SweepKind kind = SweepKind::Write;
    SweepAxis axis = SweepAxis::Amplitude;
    // axis == Amplitude: sweep_values are volts, fixed_value is the width in us;
    // axis == Width: sweep_values are widths in us, fixed_value is volts.
    double fixed_value = 30.0;
    std::vector<double> sweep_values = {0.6, 0.8, 1.0, 1.2};
    int pulses_per_point = 50;
    std::uint64_t seed = 0;

    void validate() const;
    static CharacterizationConfig default_panel(SweepKind kind, SweepAxis axis,
                                                std::uint64_t seed);
};

struct CharacterizationRow {
    double sweep_value = 0.0;
    int pulse_index = 0;
    double resistance_ohm = 0.0; // settled resistance after the pulse
    device::Level state = device::Level::HRS;
};

// Each sweep value starts from the opposite state (sampled HRS before write
// pulses via force_set + force_reset, sampled LRS before erase pulses via
// force_set), then applies pulses_per_point pulses recording after each.
std::vector<CharacterizationRow> run_characterization(const CharacterizationConfig& cfg,
                                                      const device::DeviceParams& params,
                                                      RunStats* stats = nullptr);

struct IvSweepConfig {
    double v_max = 1.0;  // > 0
    double v_min = -1.0; // < 0
    double step = 0.05;  // > 0
    waveform::ns_t dwell = waveform::us(1000);
    std::uint64_t seed = 0;

    void validate() const;
};

struct IvRow {
    double v_volts = 0.0;
    double i_amps = 0.0;
    device::Level state = device::Level::HRS;
};

// Quasi-static staircase 0 -> v_max -> 0 -> v_min -> 0; each step is one
// segment of the dwell duration; i = v_eff / R after the step. Hysteresis
// emerges from the switching law; the loop is pinched (i = 0 at v = 0).
std::vector<IvRow> run_iv_sweep(const IvSweepConfig& cfg, const device::DeviceParams& params,
                                RunStats* stats = nullptr);

struct Summary {
    double peak_p = 0.0;
    waveform::ns_t peak_dt = 0;
    double baseline_p = 0.0; // mean p_hat over dt > 3.2 ms
    std::optional<waveform::ns_t> window_lo; // first grid dt with p_analytic > 0.5
    std::optional<waveform::ns_t> window_hi; // last grid dt with p_analytic > 0.5
};

Summary summarize(const ProbabilityCurve& curve);

} // namespace memstdp::protocol
