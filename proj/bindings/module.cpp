// Python bindings for the memstdp core. Time-valued arguments are plain
// microsecond floats on the Python side; they are converted to the integer
// nanosecond grid used internally.

#include "memstdp/device.hpp"
#include "memstdp/errors.hpp"
#include "memstdp/io.hpp"
#include "memstdp/protocol.hpp"
#include "memstdp/script.hpp"
#include "memstdp/waveform.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

namespace py = pybind11;
using namespace memstdp;

#ifndef MEMSTDP_VERSION
#define MEMSTDP_VERSION "0.0.0"
#endif

namespace {

waveform::ns_t ns(double us_value) { return waveform::from_us(us_value); }

protocol::SweepKind kind_of(const std::string& s) {
    if (s == "write")
        return protocol::SweepKind::Write;
    if (s == "erase")
        return protocol::SweepKind::Erase;
    throw ValidationError("kind must be 'write' or 'erase'");
}

protocol::SweepAxis axis_of(const std::string& s) {
    if (s == "amplitude")
        return protocol::SweepAxis::Amplitude;
    if (s == "width")
        return protocol::SweepAxis::Width;
    throw ValidationError("axis must be 'amplitude' or 'width'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "stochastic binary memristor lab (C++ core)";
    m.attr("__version__") = MEMSTDP_VERSION;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<script::ScriptError>(m, "ScriptError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::enum_<device::Level>(m, "Level")
        .value("HRS", device::Level::HRS)
        .value("LRS", device::Level::LRS);

    py::class_<device::DeviceParams>(m, "DeviceParams")
        .def(py::init<>())
        .def_readwrite("tau0_set_us", &device::DeviceParams::tau0_set_us)
        .def_readwrite("v0_set_v", &device::DeviceParams::v0_set_v)
        .def_readwrite("tau0_reset_us", &device::DeviceParams::tau0_reset_us)
        .def_readwrite("v0_reset_v", &device::DeviceParams::v0_reset_v)
        .def_readwrite("r_lrs_min_ohm", &device::DeviceParams::r_lrs_min_ohm)
        .def_readwrite("r_lrs_max_ohm", &device::DeviceParams::r_lrs_max_ohm)
        .def_readwrite("r_hrs_min_ohm", &device::DeviceParams::r_hrs_min_ohm)
        .def_readwrite("r_hrs_max_ohm", &device::DeviceParams::r_hrs_max_ohm)
        .def_readwrite("r_initial_ohm", &device::DeviceParams::r_initial_ohm)
        .def_readwrite("series_resistance_ohm", &device::DeviceParams::series_resistance_ohm)
        .def_readwrite("divider_enabled", &device::DeviceParams::divider_enabled)
        .def_readwrite("read_voltage_v", &device::DeviceParams::read_voltage_v)
        .def_readwrite("read_noise_rel", &device::DeviceParams::read_noise_rel)
        .def_readwrite("classify_threshold_ohm", &device::DeviceParams::classify_threshold_ohm)
        .def("validate", &device::DeviceParams::validate)
        .def("__repr__", [](const device::DeviceParams& p) {
            return "<DeviceParams " + io::params_to_text(p).substr(0) + ">";
        });

    m.def("default_params", &device::default_params,
          "Calibrated default device parameters");
    m.def(
        "tau_set_us",
        [](double volts, const device::DeviceParams& p) { return device::tau_set_us(volts, p); },
        py::arg("volts"), py::arg("params") = device::default_params());
    m.def(
        "p_set",
        [](double volts, double width_us, const device::DeviceParams& p) {
            return device::p_set(volts, width_us, p);
        },
        py::arg("volts"), py::arg("width_us"), py::arg("params") = device::default_params());
    m.def(
        "p_reset",
        [](double volts, double width_us, const device::DeviceParams& p) {
            return device::p_reset(volts, width_us, p);
        },
        py::arg("volts"), py::arg("width_us"), py::arg("params") = device::default_params());

    py::class_<waveform::Signal>(m, "Signal")
        .def("__len__", [](const waveform::Signal& s) { return s.segments().size(); })
        .def("segments",
             [](const waveform::Signal& s) {
                 std::vector<std::tuple<double, double, double>> out;
                 for (const waveform::Segment& seg : s.segments())
                     out.emplace_back(static_cast<double>(seg.start) / 1e3,
                                      static_cast<double>(seg.end) / 1e3, seg.volts);
                 return out;
             })
        .def("__repr__",
             [](const waveform::Signal& s) { return io::signal_json(s); });

    m.def(
        "make_pre", [](double onset_us) { return waveform::make_pre(ns(onset_us), {}); },
        py::arg("onset_us"), "Pre-synaptic pulse: +0.5 V for 1500 us at the given onset");
    m.def(
        "make_post", [](double onset_us) { return waveform::make_post(ns(onset_us), {}); },
        py::arg("onset_us"),
        "Post-synaptic train: three -0.5 V / 30 us pulses, 750 us apart, after a 1500 us delay");
    m.def("subtract", &waveform::subtract, py::arg("a"), py::arg("b"),
          "Pointwise difference a - b as a canonical signal");
    m.def(
        "coincidence_count",
        [](double dt_us) { return waveform::coincidence_count(ns(dt_us), {}); },
        py::arg("dt_us"),
        "Number of post pulses fully inside the pre window at offset dt");

    py::class_<device::Device>(m, "Device")
        .def(py::init([](std::uint64_t key, const device::DeviceParams& p) {
                 return device::Device(p, key);
             }),
             py::arg("key") = 0, py::arg("params") = device::default_params())
        .def_property_readonly("level", &device::Device::level)
        .def_property_readonly("resistance", &device::Device::resistance)
        .def("read", &device::Device::read)
        .def(
            "apply_pulse",
            [](device::Device& d, double volts, double width_us) {
                d.apply_segment({0, ns(width_us), volts});
            },
            py::arg("volts"), py::arg("width_us"))
        .def("apply", &device::Device::apply_signal, py::arg("signal"))
        .def("force_reset", &device::Device::force_reset)
        .def("force_set", &device::Device::force_set)
        .def_property_readonly("switch_draws", &device::Device::switch_draws)
        .def_property_readonly("transitions", &device::Device::transitions);

    py::class_<protocol::CurvePoint>(m, "CurvePoint")
        .def_property_readonly(
            "dt_ms", [](const protocol::CurvePoint& p) { return static_cast<double>(p.dt) / 1e6; })
        .def_readonly("trials", &protocol::CurvePoint::trials)
        .def_readonly("writes", &protocol::CurvePoint::writes)
        .def_readonly("p_hat", &protocol::CurvePoint::p_hat)
        .def_readonly("p_analytic", &protocol::CurvePoint::p_analytic);

    py::class_<protocol::ProbabilityCurve>(m, "ProbabilityCurve")
        .def_readonly("points", &protocol::ProbabilityCurve::points)
        .def_property_readonly("warning_count", [](const protocol::ProbabilityCurve& c) {
            return c.stats.warning_count;
        });

    py::class_<protocol::Summary>(m, "Summary")
        .def_readonly("peak_p", &protocol::Summary::peak_p)
        .def_property_readonly(
            "peak_dt_ms",
            [](const protocol::Summary& s) { return static_cast<double>(s.peak_dt) / 1e6; })
        .def_readonly("baseline_p", &protocol::Summary::baseline_p)
        .def_property_readonly("window_ms", [](const protocol::Summary& s) {
            return s.window_lo ? py::object(py::make_tuple(
                                     static_cast<double>(*s.window_lo) / 1e6,
                                     static_cast<double>(*s.window_hi) / 1e6))
                               : py::object(py::none());
        });

    m.def(
        "analytic_probability",
        [](double dt_us, const device::DeviceParams& p) {
            return protocol::analytic_probability(ns(dt_us), {}, p);
        },
        py::arg("dt_us"), py::arg("params") = device::default_params(),
        "Closed-form single-trial write probability at pulse offset dt");

    m.def(
        "run_stdp_sweep",
        [](std::uint64_t seed, int trials, double dt_start_us, double dt_stop_us,
           double dt_step_us, int jobs, const device::DeviceParams& p) {
            protocol::StdpSweepConfig cfg;
            cfg.seed = seed;
            cfg.trials = trials;
            cfg.dt_start = ns(dt_start_us);
            cfg.dt_stop = ns(dt_stop_us);
            cfg.dt_step = ns(dt_step_us);
            cfg.jobs = jobs;
            return protocol::run_stdp_sweep(cfg, p);
        },
        py::arg("seed") = 0, py::arg("trials") = 100, py::arg("dt_start_us") = 0.0,
        py::arg("dt_stop_us") = 8000.0, py::arg("dt_step_us") = 100.0, py::arg("jobs") = 1,
        py::arg("params") = device::default_params(),
        py::call_guard<py::gil_scoped_release>());

    m.def("summarize", &protocol::summarize, py::arg("curve"));

    py::class_<protocol::CharacterizationRow>(m, "CharacterizationRow")
        .def_readonly("sweep_value", &protocol::CharacterizationRow::sweep_value)
        .def_readonly("pulse_index", &protocol::CharacterizationRow::pulse_index)
        .def_readonly("resistance_ohm", &protocol::CharacterizationRow::resistance_ohm)
        .def_readonly("state", &protocol::CharacterizationRow::state);

    m.def(
        "run_characterization",
        [](const std::string& kind, const std::string& axis, std::uint64_t seed,
           const device::DeviceParams& p) {
            const protocol::CharacterizationConfig cfg =
                protocol::CharacterizationConfig::default_panel(kind_of(kind), axis_of(axis),
                                                                seed);
            return protocol::run_characterization(cfg, p);
        },
        py::arg("kind"), py::arg("axis"), py::arg("seed") = 0,
        py::arg("params") = device::default_params(),
        py::call_guard<py::gil_scoped_release>());

    py::class_<protocol::IvRow>(m, "IvRow")
        .def_readonly("v_volts", &protocol::IvRow::v_volts)
        .def_readonly("i_amps", &protocol::IvRow::i_amps)
        .def_readonly("state", &protocol::IvRow::state);

    m.def(
        "run_iv_sweep",
        [](double v_max, double v_min, double step, double dwell_us, std::uint64_t seed,
           const device::DeviceParams& p) {
            protocol::IvSweepConfig cfg;
            cfg.v_max = v_max;
            cfg.v_min = v_min;
            cfg.step = step;
            cfg.dwell = ns(dwell_us);
            cfg.seed = seed;
            return protocol::run_iv_sweep(cfg, p);
        },
        py::arg("v_max") = 1.0, py::arg("v_min") = -1.0, py::arg("step") = 0.05,
        py::arg("dwell_us") = 1000.0, py::arg("seed") = 0,
        py::arg("params") = device::default_params(),
        py::call_guard<py::gil_scoped_release>());

    py::class_<script::Program>(m, "Program")
        .def("__str__", &script::print_program)
        .def("__len__", [](const script::Program& p) { return p.statements.size(); });

    py::class_<script::RunRow>(m, "RunRow")
        .def_readonly("row", &script::RunRow::row)
        .def_readonly("label", &script::RunRow::label)
        .def_readonly("resistance_ohm", &script::RunRow::resistance_ohm)
        .def_readonly("state", &script::RunRow::state);

    py::class_<script::RunLog>(m, "RunLog")
        .def_readonly("rows", &script::RunLog::rows)
        .def_readonly("warning_count", &script::RunLog::warning_count);

    m.def(
        "parse", [](const std::string& text) { return script::parse(text); }, py::arg("text"),
        "Parse a protocol script; raises ScriptError with line:col on bad input");
    m.def("print_program", &script::print_program, py::arg("program"),
          "Canonical text form; parse(print_program(p)) is structurally equal to p");
    m.def("structurally_equal", &script::structurally_equal, py::arg("a"), py::arg("b"));
    m.def(
        "execute",
        [](const script::Program& prog, std::uint64_t seed, const device::DeviceParams& p) {
            return script::execute(prog, p, seed);
        },
        py::arg("program"), py::arg("seed") = 0, py::arg("params") = device::default_params(),
        py::call_guard<py::gil_scoped_release>());
}
