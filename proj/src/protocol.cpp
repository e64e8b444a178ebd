#include "memstdp/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace memstdp::protocol {

using waveform::ns_t;

void StdpSweepConfig::validate() const {
    if (!(dt_step > 0))
        throw ValidationError("dt_step must be > 0");
    if (dt_stop < dt_start)
        throw ValidationError("dt_stop must be >= dt_start");
    if (dt_start < 0)
        throw ValidationError("dt_start must be >= 0");
    if (trials < 1)
        throw ValidationError("trials must be >= 1");
    if (jobs < 0)
        throw ValidationError("jobs must be >= 0 (0 = all cores)");
    pulse.validate();
}

int StdpSweepConfig::grid_size() const {
    return static_cast<int>((dt_stop - dt_start) / dt_step) + 1;
}

double analytic_probability(ns_t dt, const waveform::PulseShapeParams& pulse,
                            const device::DeviceParams& params) {
    const waveform::Signal composed =
        waveform::subtract(waveform::make_pre(dt, pulse), waveform::make_post(0, pulse));
    // Trials start from the virgin HRS state, so the divider factor is pinned
    // at r_initial. The composed waveform never goes negative, hence a trial
    // succeeds iff any positive segment fires: hazards add.
    const double d = params.divider_enabled
                         ? params.r_initial_ohm /
                               (params.r_initial_ohm + params.series_resistance_ohm)
                         : 1.0;
    double hazard = 0.0;
    for (const waveform::Segment& seg : composed.segments())
        if (seg.volts > 0.0)
            hazard += seg.width_us() / device::tau_set_us(seg.volts * d, params);
    return -std::expm1(-hazard);
}

namespace {

void fold_device_stats(RunStats& stats, const device::Device& dev) {
    stats.warning_count += dev.warnings().size();
    for (const device::Warning& w : dev.warnings())
        stats.max_estimated_current_a = std::max(stats.max_estimated_current_a, w.current_a);
}

int normalize_jobs(int jobs) {
    if (jobs > 0)
        return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

} // namespace

ProbabilityCurve run_stdp_sweep(const StdpSweepConfig& cfg, const device::DeviceParams& params) {
    cfg.validate();
    params.validate();

    const int n = cfg.grid_size();
    ProbabilityCurve curve;
    curve.points.resize(static_cast<std::size_t>(n));
    std::vector<RunStats> per_point(static_cast<std::size_t>(n));

    // Each (dt index, trial index) cell owns a fresh device keyed by the seed
    // discipline, so any assignment of cells to threads gives identical output.
    auto run_point = [&](int i) {
        const ns_t dt = cfg.dt_start + static_cast<ns_t>(i) * cfg.dt_step;
        const waveform::Signal composed =
            waveform::subtract(waveform::make_pre(dt, cfg.pulse), waveform::make_post(0, cfg.pulse));
        const std::uint64_t scope_i = rng::derive(cfg.seed, rng::kScope, static_cast<std::uint64_t>(i));
        int writes = 0;
        for (int j = 0; j < cfg.trials; ++j) {
            const std::uint64_t scope_ij = rng::derive(scope_i, rng::kScope, static_cast<std::uint64_t>(j));
            device::Device dev(params, rng::derive(scope_ij, rng::kDevice, 0));
            dev.force_reset();
            dev.apply_signal(composed);
            if (device::classify_state(dev.read(), params) == device::Level::LRS)
                ++writes;
            fold_device_stats(per_point[static_cast<std::size_t>(i)], dev);
        }
        curve.points[static_cast<std::size_t>(i)] = {
            dt, cfg.trials, writes, static_cast<double>(writes) / cfg.trials,
            analytic_probability(dt, cfg.pulse, params)};
    };

    const int jobs = std::min(normalize_jobs(cfg.jobs), n);
    if (jobs <= 1) {
        for (int i = 0; i < n; ++i)
            run_point(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    run_point(i);
            });
        for (std::thread& th : pool)
            th.join();
    }

    for (const RunStats& s : per_point) {
        curve.stats.warning_count += s.warning_count;
        curve.stats.max_estimated_current_a =
            std::max(curve.stats.max_estimated_current_a, s.max_estimated_current_a);
    }
    return curve;
}

void CharacterizationConfig::validate() const {
    if (pulses_per_point < 1)
        throw ValidationError("pulses_per_point must be >= 1");
    if (sweep_values.empty())
        throw ValidationError("sweep_values must not be empty");
    const bool write = kind == SweepKind::Write;
    auto check_amplitude = [&](double v) {
        if (write && !(v > 0.0))
            throw ValidationError("write sweeps need positive amplitudes");
        if (!write && !(v < 0.0))
            throw ValidationError("erase sweeps need negative amplitudes");
    };
    auto check_width = [](double w) {
        if (!(w > 0.0))
            throw ValidationError("pulse widths must be > 0");
    };
    if (axis == SweepAxis::Amplitude) {
        for (double v : sweep_values)
            check_amplitude(v);
        check_width(fixed_value);
    } else {
        for (double w : sweep_values)
            check_width(w);
        check_amplitude(fixed_value);
    }
}

CharacterizationConfig CharacterizationConfig::default_panel(SweepKind kind, SweepAxis axis,
                                                             std::uint64_t seed) {
    CharacterizationConfig cfg;
    cfg.kind = kind;
    cfg.axis = axis;
    cfg.seed = seed;
    const double sign = kind == SweepKind::Write ? 1.0 : -1.0;
    if (axis == SweepAxis::Amplitude) {
        cfg.sweep_values = {0.6 * sign, 0.8 * sign, 1.0 * sign, 1.2 * sign};
        cfg.fixed_value = 30.0; // us
    } else {
        cfg.sweep_values = {10.0, 30.0, 100.0, 300.0}; // us
        cfg.fixed_value = 1.0 * sign;                  // V
    }
    return cfg;
}

std::vector<CharacterizationRow> run_characterization(const CharacterizationConfig& cfg,
                                                      const device::DeviceParams& params,
                                                      RunStats* stats) {
    cfg.validate();
    params.validate();
    std::vector<CharacterizationRow> rows;
    rows.reserve(cfg.sweep_values.size() * static_cast<std::size_t>(cfg.pulses_per_point));
    RunStats local;
    for (std::size_t m = 0; m < cfg.sweep_values.size(); ++m) {
        const double sv = cfg.sweep_values[m];
        const double volts = cfg.axis == SweepAxis::Amplitude ? sv : cfg.fixed_value;
        const double width_us = cfg.axis == SweepAxis::Amplitude ? cfg.fixed_value : sv;
        const waveform::Segment pulse{0, waveform::from_us(width_us), volts};

        const std::uint64_t scope = rng::derive(cfg.seed, rng::kScope, m);
        device::Device dev(params, rng::derive(scope, rng::kDevice, 0));
        // Start from the opposite state, with a sampled (not virgin) resistance:
        // write sweeps from a sampled HRS, erase sweeps from a sampled LRS.
        dev.force_set();
        if (cfg.kind == SweepKind::Write)
            dev.force_reset();

        for (int k = 0; k < cfg.pulses_per_point; ++k) {
            dev.apply_segment(pulse);
            // Recorded value is the settled (instrument-averaged) resistance.
            rows.push_back({sv, k, dev.resistance(),
                            device::classify_state(dev.resistance(), params)});
        }
        fold_device_stats(local, dev);
    }
    if (stats)
        *stats = local;
    return rows;
}

void IvSweepConfig::validate() const {
    if (!(v_max > 0.0))
        throw ValidationError("v_max must be > 0");
    if (!(v_min < 0.0))
        throw ValidationError("v_min must be < 0");
    if (!(step > 0.0))
        throw ValidationError("step must be > 0");
    if (!(dwell > 0))
        throw ValidationError("dwell must be > 0");
}

std::vector<IvRow> run_iv_sweep(const IvSweepConfig& cfg, const device::DeviceParams& params,
                                RunStats* stats) {
    cfg.validate();
    params.validate();

    // Staircase 0 -> v_max -> 0 -> v_min -> 0, computed from integer step
    // counts so the voltages land exactly on multiples of the step.
    const auto steps_to = [&](double v) {
        return std::max(1, static_cast<int>(std::floor(std::abs(v) / cfg.step + 1e-9)));
    };
    const int n_up = steps_to(cfg.v_max);
    const int n_dn = steps_to(cfg.v_min);
    std::vector<double> staircase;
    staircase.reserve(static_cast<std::size_t>(2 * n_up + 2 * n_dn + 1));
    for (int k = 0; k <= n_up; ++k)
        staircase.push_back(k * cfg.step);
    for (int k = n_up - 1; k >= 0; --k)
        staircase.push_back(k * cfg.step);
    for (int k = 1; k <= n_dn; ++k)
        staircase.push_back(-k * cfg.step);
    for (int k = n_dn - 1; k >= 0; --k)
        staircase.push_back(-k * cfg.step);

    device::Device dev(params, rng::derive(cfg.seed, rng::kDevice, 0));
    std::vector<IvRow> rows;
    rows.reserve(staircase.size());
    for (double v : staircase) {
        dev.apply_segment({0, cfg.dwell, v});
        const double r = dev.resistance();
        const double i = v == 0.0 ? 0.0
                         : params.divider_enabled
                             ? v / (r + params.series_resistance_ohm)
                             : v / r;
        rows.push_back({v, i, dev.level()});
    }
    if (stats) {
        *stats = {};
        fold_device_stats(*stats, dev);
    }
    return rows;
}

Summary summarize(const ProbabilityCurve& curve) {
    if (curve.points.empty())
        throw ValidationError("summarize needs a non-empty curve");
    Summary s;
    s.peak_p = -1.0;
    double baseline_sum = 0.0;
    int baseline_n = 0;
    for (const CurvePoint& pt : curve.points) {
        if (pt.p_hat > s.peak_p) {
            s.peak_p = pt.p_hat;
            s.peak_dt = pt.dt;
        }
        if (pt.dt > waveform::us(3200)) {
            baseline_sum += pt.p_hat;
            ++baseline_n;
        }
        if (pt.p_analytic > 0.5) {
            if (!s.window_lo)
                s.window_lo = pt.dt;
            s.window_hi = pt.dt;
        }
    }
    s.baseline_p = baseline_n > 0 ? baseline_sum / baseline_n : 0.0;
    return s;
}

} // namespace memstdp::protocol
