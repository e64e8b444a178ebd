#include "memstdp/device.hpp"

#include <cmath>
#include <cstdio>

namespace memstdp::device {

void DeviceParams::validate() const {
    const struct {
        const char* name;
        double value;
    } positives[] = {
        {"tau0_set_us", tau0_set_us},
        {"v0_set_v", v0_set_v},
        {"tau0_reset_us", tau0_reset_us},
        {"v0_reset_v", v0_reset_v},
        {"r_lrs_min_ohm", r_lrs_min_ohm},
        {"r_lrs_max_ohm", r_lrs_max_ohm},
        {"r_hrs_min_ohm", r_hrs_min_ohm},
        {"r_hrs_max_ohm", r_hrs_max_ohm},
        {"r_initial_ohm", r_initial_ohm},
        {"classify_threshold_ohm", classify_threshold_ohm},
        {"read_voltage_v", read_voltage_v},
    };
    for (const auto& f : positives)
        if (!(f.value > 0.0) || !std::isfinite(f.value))
            throw ValidationError(std::string(f.name) + " must be > 0");
    if (series_resistance_ohm < 0.0 || !std::isfinite(series_resistance_ohm))
        throw ValidationError("series_resistance_ohm must be >= 0");
    if (read_noise_rel < 0.0 || !std::isfinite(read_noise_rel))
        throw ValidationError("read_noise_rel must be >= 0");
    if (r_lrs_min_ohm > r_lrs_max_ohm)
        throw ValidationError("r_lrs_min_ohm must be <= r_lrs_max_ohm");
    if (r_hrs_min_ohm > r_hrs_max_ohm)
        throw ValidationError("r_hrs_min_ohm must be <= r_hrs_max_ohm");
    if (!(r_lrs_max_ohm < classify_threshold_ohm))
        throw ValidationError("classify_threshold_ohm must be above r_lrs_max_ohm");
    if (!(classify_threshold_ohm < r_hrs_min_ohm))
        throw ValidationError("classify_threshold_ohm must be below r_hrs_min_ohm");
}

namespace {

void check_probability(const char* name, double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw CalibrationError(std::string(name) + " must be in (0, 1)");
}

// Fit tau(v) = tau0 * exp(-v / v0) through (v_hi, tau_hi) and (v_lo, tau_lo).
void fit_law(const char* which, double v_hi, double tau_hi, double v_lo, double tau_lo,
             double& tau0_out, double& v0_out) {
    if (!(tau_lo > tau_hi))
        throw CalibrationError(std::string(which) +
                               " targets infeasible: the law needs the low-voltage "
                               "timescale to exceed the high-voltage one");
    const double v0 = (v_hi - v_lo) / std::log(tau_lo / tau_hi);
    const double tau0 = tau_hi * std::exp(v_hi / v0);
    if (!std::isfinite(v0) || !std::isfinite(tau0) || !(v0 > 0.0) || !(tau0 > 0.0))
        throw CalibrationError(std::string(which) + " calibration did not converge");
    tau0_out = tau0;
    v0_out = v0;
}

} // namespace

DeviceParams calibrate(const CalibrationTargets& t) {
    check_probability("p_two_pulse_peak", t.p_two_pulse_peak);
    check_probability("p_baseline", t.p_baseline);
    check_probability("erase_success", t.erase_success);
    if (!(t.baseline_exposure_us > 0.0))
        throw CalibrationError("baseline_exposure_us must be > 0");
    if (!(t.write_voltage_v > 0.0))
        throw CalibrationError("write_voltage_v must be > 0");
    if (!(t.write_width_us > 0.0))
        throw CalibrationError("write_width_us must be > 0");

    DeviceParams p;
    const double v_hi = t.write_voltage_v;
    const double v_lo = 0.5 * t.write_voltage_v; // stray exposure is at half amplitude

    // Set law: the observed two-coincidence peak splits into two independent
    // full-amplitude pulses, p1 = 1 - sqrt(1 - peak); the baseline pins the
    // half-amplitude timescale.
    const double p1 = 1.0 - std::sqrt(1.0 - t.p_two_pulse_peak);
    const double tau_set_hi = -t.write_width_us / std::log1p(-p1);
    const double tau_set_lo = -t.baseline_exposure_us / std::log1p(-t.p_baseline);
    fit_law("set", v_hi, tau_set_hi, v_lo, tau_set_lo, p.tau0_set_us, p.v0_set_v);

    // Reset law: erase_success at full amplitude; the second anchor pins
    // p_reset(-v_lo, baseline_exposure) = 0.02 so stray negative exposure
    // rarely erases.
    const double stray_erase = 0.02;
    const double tau_rst_hi = -t.write_width_us / std::log1p(-t.erase_success);
    const double tau_rst_lo = -t.baseline_exposure_us / std::log1p(-stray_erase);
    fit_law("reset", v_hi, tau_rst_hi, v_lo, tau_rst_lo, p.tau0_reset_us, p.v0_reset_v);

    // Round-trip guard: the law must reproduce its own anchors.
    const double rt_peak = 1.0 - std::pow(1.0 - p_set(v_hi, t.write_width_us, p), 2.0);
    if (std::abs(rt_peak - t.p_two_pulse_peak) > 1e-9 ||
        std::abs(p_set(v_lo, t.baseline_exposure_us, p) - t.p_baseline) > 1e-9 ||
        std::abs(p_reset(-v_hi, t.write_width_us, p) - t.erase_success) > 1e-9)
        throw CalibrationError("calibration round-trip check failed");
    return p;
}

const DeviceParams& default_params() {
    static const DeviceParams p = calibrate();
    return p;
}

double tau_set_us(double v, const DeviceParams& p) {
    return p.tau0_set_us * std::exp(-v / p.v0_set_v);
}

double tau_reset_us(double v_abs, const DeviceParams& p) {
    return p.tau0_reset_us * std::exp(-v_abs / p.v0_reset_v);
}

double p_set(double v, double width_us, const DeviceParams& p) {
    if (v <= 0.0 || width_us <= 0.0)
        return 0.0;
    return -std::expm1(-width_us / tau_set_us(v, p));
}

double p_reset(double v, double width_us, const DeviceParams& p) {
    if (v >= 0.0 || width_us <= 0.0)
        return 0.0;
    return -std::expm1(-width_us / tau_reset_us(-v, p));
}

Level classify_state(double r_ohm, const DeviceParams& p) {
    if (!(r_ohm > 0.0))
        throw ValidationError("classify_state resistance must be > 0");
    return r_ohm < p.classify_threshold_ohm ? Level::LRS : Level::HRS;
}

std::string Warning::message() const {
    char buf[160];
    if (kind == Kind::Overvoltage)
        std::snprintf(buf, sizeof buf, "segment voltage %.3f V beyond the +-1.5 V safe range",
                      volts);
    else
        std::snprintf(buf, sizeof buf,
                      "estimated current %.3g A exceeds the %.3g A compliance ceiling "
                      "(%.3f V segment; the limit is not modeled)",
                      current_a, limit_a, volts);
    return buf;
}

Device::Device(const DeviceParams& params, std::uint64_t key)
    : params_(params), level_(Level::HRS), resistance_(params.r_initial_ohm),
      switch_stream_(rng::derive(key, rng::kStream, 0)),
      resist_stream_(rng::derive(key, rng::kStream, 1)),
      noise_stream_(rng::derive(key, rng::kStream, 2)) {
    params_.validate();
}

double Device::effective_voltage(double volts) const noexcept {
    if (!params_.divider_enabled)
        return volts;
    return volts * resistance_ / (resistance_ + params_.series_resistance_ohm);
}

double Device::sample_lrs() {
    return resist_stream_.uniform(params_.r_lrs_min_ohm, params_.r_lrs_max_ohm);
}

double Device::sample_hrs() {
    // log-uniform: the measured high state spans more than a decade
    return resist_stream_.log_uniform(params_.r_hrs_min_ohm, params_.r_hrs_max_ohm);
}

void Device::apply_segment(const waveform::Segment& seg) {
    if (seg.end < seg.start)
        throw ValidationError("segment ends before it starts");
    if (seg.width() == 0 || seg.volts == 0.0)
        return; // legal no-ops; no draw consumed

    if (std::abs(seg.volts) > 1.5)
        warnings_.push_back({Warning::Kind::Overvoltage, seg.volts, 0.0, 0.0});

    const double v_eff = effective_voltage(seg.volts);
    const double i_est = std::abs(v_eff) / resistance_; // at the pre-segment state
    const double ceiling =
        seg.volts > 0.0 ? params_.compliance_write_max_a : params_.compliance_erase_max_a;
    if (i_est > ceiling)
        warnings_.push_back({Warning::Kind::Compliance, seg.volts, i_est, ceiling});

    // Fixed draw discipline: one switching draw per nonzero-voltage segment,
    // consumed even when the polarity cannot change the current state.
    const double u = switch_stream_.next_unit();
    ++switch_draws_;
    if (level_ == Level::HRS && v_eff > 0.0) {
        if (u < p_set(v_eff, seg.width_us(), params_)) {
            level_ = Level::LRS;
            resistance_ = sample_lrs();
            ++transitions_;
        }
    } else if (level_ == Level::LRS && v_eff < 0.0) {
        if (u < p_reset(v_eff, seg.width_us(), params_)) {
            level_ = Level::HRS;
            resistance_ = sample_hrs();
            ++transitions_;
        }
    }
}

void Device::apply_signal(const waveform::Signal& s) {
    for (const waveform::Segment& seg : s.segments())
        apply_segment(seg);
}

double Device::read() {
    return resistance_ * (1.0 + params_.read_noise_rel * noise_stream_.gaussian());
}

bool Device::force_reset() {
    if (classify_state(read(), params_) == Level::HRS)
        return false;
    for (int attempt = 0; attempt < 10; ++attempt) {
        apply_segment({0, waveform::us(30), -1.0});
        if (classify_state(read(), params_) == Level::HRS)
            return false;
    }
    // Simulation privilege: a real bench would keep pulsing; we stop, force the
    // state and let the caller record the fact.
    level_ = Level::HRS;
    resistance_ = sample_hrs();
    return true;
}

bool Device::force_set() {
    if (classify_state(read(), params_) == Level::LRS)
        return false;
    for (int attempt = 0; attempt < 10; ++attempt) {
        apply_segment({0, waveform::us(30), 1.0});
        if (classify_state(read(), params_) == Level::LRS)
            return false;
    }
    level_ = Level::LRS;
    resistance_ = sample_lrs();
    return true;
}

} // namespace memstdp::device
