#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "memstdp/device.hpp"
#include "memstdp/errors.hpp"
#include "memstdp/protocol.hpp"
#include "memstdp/waveform.hpp"

#include <cmath>

using namespace memstdp;
using protocol::StdpSweepConfig;
using waveform::us;

// Closed-form curve values computed independently from the hazard sum
//   P(dt) = 1 - exp(-sum_i w_i / tau_set(v_i * D)),  D = R0 / (R0 + Rs)
// over the positive segments of subtract(pre(dt), post(0)).
namespace oracle {
constexpr double p_at_0 = 0.0149975280277358;    // no coincidence, stray only
constexpr double p_one = 0.6882180244860058;     // one coincidence (dt = 0.1-0.5, 2.6-3.0 ms)
constexpr double p_two = 0.9013119225368339;     // two coincidences (dt = 1.0-2.0 ms)
constexpr double p_base = 0.0149975280277358;    // dt >= 3.1 ms
// with the divider disabled
constexpr double p_one_raw = 0.6883379521961202;
constexpr double p_two_raw = 0.9013875816839514;
constexpr double p_base_raw = 0.0150000000000000;
} // namespace oracle

TEST_CASE("analytic probability matches the frozen oracle values") {
    const device::DeviceParams& p = device::default_params();
    const auto P = [&](double dt_us_v) {
        return protocol::analytic_probability(waveform::from_us(dt_us_v), {}, p);
    };
    CHECK(P(0) == doctest::Approx(oracle::p_at_0).epsilon(1e-12));
    CHECK(P(100) == doctest::Approx(oracle::p_one).epsilon(1e-12));
    CHECK(P(500) == doctest::Approx(oracle::p_one).epsilon(1e-12));
    CHECK(P(1000) == doctest::Approx(oracle::p_two).epsilon(1e-12));
    CHECK(P(1500) == doctest::Approx(oracle::p_two).epsilon(1e-12));
    CHECK(P(2000) == doctest::Approx(oracle::p_two).epsilon(1e-12));
    CHECK(P(2600) == doctest::Approx(oracle::p_one).epsilon(1e-12));
    CHECK(P(3000) == doctest::Approx(oracle::p_one).epsilon(1e-12));
    CHECK(P(3100) == doctest::Approx(oracle::p_base).epsilon(1e-12));
    CHECK(P(5000) == doctest::Approx(oracle::p_base).epsilon(1e-12));
    CHECK(P(8000) == doctest::Approx(oracle::p_base).epsilon(1e-12));
}

TEST_CASE("analytic probability without the divider") {
    device::DeviceParams p = device::default_params();
    p.divider_enabled = false;
    const auto P = [&](double dt_us_v) {
        return protocol::analytic_probability(waveform::from_us(dt_us_v), {}, p);
    };
    CHECK(P(500) == doctest::Approx(oracle::p_one_raw).epsilon(1e-12));
    CHECK(P(1500) == doctest::Approx(oracle::p_two_raw).epsilon(1e-12));
    CHECK(P(5000) == doctest::Approx(oracle::p_base_raw).epsilon(1e-12));
}

TEST_CASE("plateaus are flat: equal coincidence count, equal probability") {
    const device::DeviceParams& p = device::default_params();
    const auto P = [&](double dt_us_v) {
        return protocol::analytic_probability(waveform::from_us(dt_us_v), {}, p);
    };
    CHECK(P(100) == P(2600));
    CHECK(P(500) == P(3000));
    CHECK(P(1000) == P(2000));
    CHECK(P(3100) == P(8000));
}

TEST_CASE("sweep config validation") {
    StdpSweepConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.grid_size() == 81);
    cfg.dt_step = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.trials = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.dt_stop = -1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.jobs = -2;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("sweep results are independent of the job count") {
    StdpSweepConfig cfg;
    cfg.dt_stop = us(1000);
    cfg.trials = 40;
    cfg.seed = 9;
    cfg.jobs = 1;
    const protocol::ProbabilityCurve serial = protocol::run_stdp_sweep(cfg, device::default_params());
    cfg.jobs = 7;
    const protocol::ProbabilityCurve wide = protocol::run_stdp_sweep(cfg, device::default_params());
    cfg.jobs = 0; // all cores
    const protocol::ProbabilityCurve all = protocol::run_stdp_sweep(cfg, device::default_params());
    CHECK(serial.points == wide.points);
    CHECK(serial.points == all.points);
    CHECK(serial.stats.warning_count == wide.stats.warning_count);
}

TEST_CASE("monte carlo agrees with the closed form at a plateau point") {
    StdpSweepConfig cfg;
    cfg.dt_start = us(1500);
    cfg.dt_stop = us(1500);
    cfg.trials = 2000;
    cfg.seed = 4;
    const protocol::ProbabilityCurve curve = protocol::run_stdp_sweep(cfg, device::default_params());
    REQUIRE(curve.points.size() == 1);
    const double p = curve.points[0].p_analytic;
    CHECK(p == doctest::Approx(oracle::p_two).epsilon(1e-12));
    const double sigma = std::sqrt(p * (1.0 - p) / cfg.trials);
    CHECK(std::abs(curve.points[0].p_hat - p) < 3.5 * sigma);
    CHECK(curve.points[0].writes ==
          static_cast<int>(std::lround(curve.points[0].p_hat * cfg.trials)));
}

TEST_CASE("summary finds peak, baseline and the analytic window") {
    StdpSweepConfig cfg;
    cfg.trials = 30;
    cfg.seed = 11;
    const protocol::ProbabilityCurve curve = protocol::run_stdp_sweep(cfg, device::default_params());
    const protocol::Summary s = protocol::summarize(curve);
    CHECK(s.peak_p > 0.5);
    CHECK(s.peak_dt >= us(100));
    CHECK(s.peak_dt <= us(3000));
    CHECK(s.baseline_p < 0.1);
    REQUIRE(s.window_lo.has_value());
    REQUIRE(s.window_hi.has_value());
    CHECK(*s.window_lo == us(100));
    CHECK(*s.window_hi == us(3000));
}

TEST_CASE("summary on an empty-tail grid leaves no window") {
    StdpSweepConfig cfg;
    cfg.dt_start = us(4000);
    cfg.dt_stop = us(4400);
    cfg.trials = 10;
    const protocol::ProbabilityCurve curve = protocol::run_stdp_sweep(cfg, device::default_params());
    const protocol::Summary s = protocol::summarize(curve);
    CHECK_FALSE(s.window_lo.has_value());
    CHECK(s.baseline_p >= 0.0); // all points lie beyond 3.2 ms
}

TEST_CASE("characterization rows stay inside the advertised ranges") {
    const device::DeviceParams& params = device::default_params();
    for (const auto kind : {protocol::SweepKind::Write, protocol::SweepKind::Erase}) {
        for (const auto axis : {protocol::SweepAxis::Amplitude, protocol::SweepAxis::Width}) {
            protocol::CharacterizationConfig cfg =
                protocol::CharacterizationConfig::default_panel(kind, axis, 33);
            cfg.pulses_per_point = 20;
            protocol::RunStats stats;
            const auto rows = protocol::run_characterization(cfg, params, &stats);
            CHECK(rows.size() == cfg.sweep_values.size() *
                                     static_cast<std::size_t>(cfg.pulses_per_point));
            for (const auto& r : rows) {
                if (r.state == device::Level::LRS) {
                    CHECK(r.resistance_ohm >= params.r_lrs_min_ohm);
                    CHECK(r.resistance_ohm <= params.r_lrs_max_ohm);
                } else {
                    CHECK(r.resistance_ohm >= params.r_hrs_min_ohm);
                    CHECK(r.resistance_ohm <= params.r_hrs_max_ohm);
                }
            }
        }
    }
}

TEST_CASE("write panel eventually switches at strong amplitudes") {
    protocol::CharacterizationConfig cfg = protocol::CharacterizationConfig::default_panel(
        protocol::SweepKind::Write, protocol::SweepAxis::Amplitude, 7);
    const auto rows = protocol::run_characterization(cfg, device::default_params());
    // at 1.2 V (tau ~ 1 us) the very first pulse switches essentially always
    bool strong_switched = false;
    for (const auto& r : rows)
        if (r.sweep_value == 1.2 && r.pulse_index == 0)
            strong_switched = r.state == device::Level::LRS;
    CHECK(strong_switched);
}

TEST_CASE("characterization config validation") {
    protocol::CharacterizationConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.sweep_values.clear();
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.pulses_per_point = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.kind = protocol::SweepKind::Write;
    cfg.axis = protocol::SweepAxis::Amplitude;
    cfg.sweep_values = {-0.5}; // wrong polarity for a write panel
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.axis = protocol::SweepAxis::Width;
    cfg.sweep_values = {0.0}; // width must be positive
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("iv staircase is pinched and hits both rails") {
    protocol::IvSweepConfig cfg;
    cfg.seed = 2;
    const auto rows = protocol::run_iv_sweep(cfg, device::default_params());
    REQUIRE(rows.size() == 81); // 4 * 20 branches + closing zero
    CHECK(rows.front().v_volts == 0.0);
    CHECK(rows.front().i_amps == 0.0);
    CHECK(rows.back().v_volts == 0.0);
    CHECK(rows.back().i_amps == 0.0);
    double vmax = 0.0, vmin = 0.0;
    for (const auto& r : rows) {
        vmax = std::max(vmax, r.v_volts);
        vmin = std::min(vmin, r.v_volts);
        if (r.v_volts == 0.0)
            CHECK(r.i_amps == 0.0); // pinched loop
        else
            CHECK(r.i_amps * r.v_volts > 0.0); // passive device
    }
    CHECK(vmax == doctest::Approx(1.0));
    CHECK(vmin == doctest::Approx(-1.0));
}

TEST_CASE("iv current follows v over R with the divider") {
    protocol::IvSweepConfig cfg;
    cfg.seed = 2;
    const auto rows = protocol::run_iv_sweep(cfg, device::default_params());
    // the very first nonzero step happens before any switching: virgin 50 MOhm
    CHECK(rows[1].v_volts == doctest::Approx(0.05));
    CHECK(rows[1].i_amps == doctest::Approx(0.05 / (50e6 + 1000.0)).epsilon(1e-12));
}

TEST_CASE("iv config validation") {
    protocol::IvSweepConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.v_max = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.v_min = 0.1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.step = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.dwell = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("probability laws are monotone in exposure and amplitude") {
    const device::DeviceParams& p = device::default_params();
    double last = 0.0;
    for (int i = 1; i <= 50; ++i) {
        const double cur = device::p_set(1.0, i * 2.0, p);
        CHECK(cur >= last);
        last = cur;
    }
    last = 0.0;
    for (int i = 1; i <= 50; ++i) {
        const double cur = device::p_set(0.02 * i, 30.0, p);
        CHECK(cur >= last);
        last = cur;
    }
    // the erase law mirrors the write law but takes the signed amplitude
    last = 0.0;
    for (int i = 1; i <= 50; ++i) {
        const double cur = device::p_reset(-0.02 * i, 30.0, p);
        CHECK(cur > last);
        last = cur;
    }
    CHECK(device::p_reset(0.5, 30.0, p) == 0.0); // wrong polarity never erases
}

TEST_CASE("hazard additivity holds exactly in the closed form") {
    const device::DeviceParams& p = device::default_params();
    for (double v : {0.4, 0.7, 1.0}) {
        for (double w : {10.0, 30.0, 250.0}) {
            const double whole = device::p_set(v, 2.0 * w, p);
            const double half = device::p_set(v, w, p);
            const double composed = 1.0 - (1.0 - half) * (1.0 - half);
            CHECK(whole == doctest::Approx(composed).epsilon(1e-12));

            const double rwhole = device::p_reset(-v, 2.0 * w, p);
            const double rhalf = device::p_reset(-v, w, p);
            CHECK(rhalf > 0.0);
            CHECK(rwhole == doctest::Approx(1.0 - (1.0 - rhalf) * (1.0 - rhalf)).epsilon(1e-12));
        }
    }
}
