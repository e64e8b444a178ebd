// memstdp — command line front end for the stochastic binary memristor lab.
//
// Subcommands:
//   stdp          timing sweep: write probability vs pre/post pulse offset
//   characterize  pulse-train panels: resistance vs amplitude or width
//   iv            quasi-static staircase I-V loop
//   run           execute a protocol script (.scr)
//
// Exit codes: 0 ok, 1 validation/config/script error, 2 I/O error.

#include "memstdp/device.hpp"
#include "memstdp/errors.hpp"
#include "memstdp/io.hpp"
#include "memstdp/plot.hpp"
#include "memstdp/protocol.hpp"
#include "memstdp/rng.hpp"
#include "memstdp/script.hpp"
#include "memstdp/waveform.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace memstdp;

namespace {

#ifndef MEMSTDP_VERSION
#define MEMSTDP_VERSION "0.0.0"
#endif

struct CommonOpts {
    std::uint64_t seed = 0;
    std::string config;
    std::string out = "runs";
    std::string format = "csv";
    bool plot = false;
    int jobs = 1;
    bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "Root RNG seed; equal seeds reproduce runs bit for bit")
        ->capture_default_str();
    cmd->add_option("--config", o.config, "Device parameter file (key = value lines)");
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--format", o.format, "Tabular output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_flag("--plot", o.plot, "Also write an SVG chart next to the data");
    cmd->add_option("--jobs", o.jobs,
                    "Worker threads, 0 = all cores; outputs are identical for any value")
        ->capture_default_str();
    cmd->add_flag("--dry-run", o.dry_run, "Validate inputs and list planned outputs, run nothing");
}

device::DeviceParams effective_params(const CommonOpts& o) {
    device::DeviceParams p = device::default_params();
    if (!o.config.empty())
        p = io::load_params(o.config, p);
    return p;
}

std::string data_name(const CommonOpts& o, const std::string& base) {
    return base + (o.format == "json" ? ".json" : ".csv");
}

void emit_warning_note(const protocol::RunStats& stats) {
    if (stats.warning_count == 0)
        return;
    std::fprintf(stderr,
                 "note: %llu segment(s) exceeded instrument warning limits "
                 "(max estimated current %.3g A); recorded, not enforced\n",
                 static_cast<unsigned long long>(stats.warning_count),
                 stats.max_estimated_current_a);
}

void write_manifest(const CommonOpts& o, const std::string& command,
                    const std::vector<std::string>& argv, std::vector<std::string> outputs,
                    const device::DeviceParams& params) {
    io::RunManifest m;
    m.command = command;
    m.argv = argv;
    m.config_path = o.config;
    m.seed = o.seed;
    m.timestamp = io::iso8601_utc_now();
    m.version = MEMSTDP_VERSION;
    m.outputs = std::move(outputs);
    m.params = params;
    io::write_file_atomic(fs::path(o.out) / (command + "_manifest.json"), io::manifest_json(m));
}

void announce_dry_run(const std::string& command, const std::vector<std::string>& outputs) {
    std::printf("dry-run: %s is valid; would write:", command.c_str());
    for (const std::string& f : outputs)
        std::printf(" %s", f.c_str());
    std::printf("\n");
}

// ---- stdp -----------------------------------------------------------------

struct StdpOpts {
    CommonOpts common;
    int trials = 100;
    double dt_start_us = 0.0;
    double dt_stop_us = 8000.0;
    double dt_step_us = 100.0;
};

int cmd_stdp(const StdpOpts& o, const std::vector<std::string>& argv) {
    const device::DeviceParams params = effective_params(o.common);
    protocol::StdpSweepConfig cfg;
    cfg.dt_start = waveform::from_us(o.dt_start_us);
    cfg.dt_stop = waveform::from_us(o.dt_stop_us);
    cfg.dt_step = waveform::from_us(o.dt_step_us);
    cfg.trials = o.trials;
    cfg.seed = o.common.seed;
    cfg.jobs = o.common.jobs;
    cfg.validate();

    std::vector<std::string> outputs = {data_name(o.common, "stdp"), "stdp_summary.json"};
    if (o.common.plot)
        outputs.push_back("stdp.svg");
    if (o.common.dry_run) {
        announce_dry_run("stdp", outputs);
        return 0;
    }

    const protocol::ProbabilityCurve curve = protocol::run_stdp_sweep(cfg, params);
    const protocol::Summary summary = protocol::summarize(curve);

    fs::create_directories(o.common.out);
    const fs::path dir(o.common.out);
    io::write_file_atomic(dir / outputs[0],
                          o.common.format == "json" ? io::stdp_json(curve) : io::stdp_csv(curve));
    io::write_file_atomic(dir / "stdp_summary.json", io::summary_json(summary));
    if (o.common.plot) {
        plot::Series hat{"p_hat", {}, "#1f77b4", true};
        plot::Series ana{"p_analytic", {}, "#d62728", false};
        for (const protocol::CurvePoint& pt : curve.points) {
            const double ms = static_cast<double>(pt.dt) / 1e6;
            hat.points.emplace_back(ms, pt.p_hat);
            ana.points.emplace_back(ms, pt.p_analytic);
        }
        io::write_file_atomic(dir / "stdp.svg",
                              plot::svg_line_chart("write probability vs pulse offset",
                                                   "dt (ms)", "probability", {hat, ana}));
    }
    write_manifest(o.common, "stdp", argv, outputs, params);
    emit_warning_note(curve.stats);

    std::string window = "none";
    if (summary.window_lo)
        window = "[" + io::fmt_ms(*summary.window_lo) + ", " + io::fmt_ms(*summary.window_hi) +
                 "] ms";
    std::printf("peak_p=%.3f at dt=%s ms, baseline_p=%.3f, analytic window %s -> %s\n",
                summary.peak_p, io::fmt_ms(summary.peak_dt).c_str(), summary.baseline_p,
                window.c_str(), (dir / outputs[0]).string().c_str());
    return 0;
}

// ---- characterize -----------------------------------------------------------

struct CharOpts {
    CommonOpts common;
    std::string kind;  // write|erase; empty = all panels
    std::string axis;  // amplitude|width; empty = all panels
    double fixed = std::nan("");
    std::vector<double> values;
    int pulses = 0; // 0 = panel default
};

std::string panel_base(protocol::SweepKind kind, protocol::SweepAxis axis) {
    return std::string("characterize_") +
           (kind == protocol::SweepKind::Write ? "write" : "erase") + "_" +
           (axis == protocol::SweepAxis::Amplitude ? "amplitude" : "width");
}

void plot_panel(const fs::path& file, const std::string& title,
                const protocol::CharacterizationConfig& cfg,
                const std::vector<protocol::CharacterizationRow>& rows) {
    const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                             "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    std::vector<plot::Series> series;
    std::size_t idx = 0;
    for (double v : cfg.sweep_values) {
        plot::Series s;
        s.label = io::fmt_double(v) +
                  (cfg.axis == protocol::SweepAxis::Amplitude ? " V" : " us");
        s.color = palette[idx++ % 8];
        s.markers = true;
        for (const protocol::CharacterizationRow& r : rows)
            if (r.sweep_value == v)
                s.points.emplace_back(r.pulse_index, std::log10(r.resistance_ohm));
        series.push_back(std::move(s));
    }
    io::write_file_atomic(file,
                          plot::svg_line_chart(title, "pulse index", "log10 R (ohm)", series));
}

int cmd_characterize(const CharOpts& o, const std::vector<std::string>& argv) {
    if (o.kind.empty() != o.axis.empty())
        throw ValidationError("--kind and --axis must be given together (or both omitted "
                              "to run the four default panels)");
    const device::DeviceParams params = effective_params(o.common);

    std::vector<protocol::CharacterizationConfig> panels;
    if (!o.kind.empty()) {
        const auto kind =
            o.kind == "write" ? protocol::SweepKind::Write : protocol::SweepKind::Erase;
        const auto axis = o.axis == "amplitude" ? protocol::SweepAxis::Amplitude
                                                : protocol::SweepAxis::Width;
        protocol::CharacterizationConfig cfg =
            protocol::CharacterizationConfig::default_panel(kind, axis, o.common.seed);
        if (!std::isnan(o.fixed))
            cfg.fixed_value = o.fixed;
        if (!o.values.empty())
            cfg.sweep_values = o.values;
        if (o.pulses > 0)
            cfg.pulses_per_point = o.pulses;
        panels.push_back(std::move(cfg));
    } else {
        if (!std::isnan(o.fixed) || !o.values.empty())
            throw ValidationError("--fixed/--values need an explicit --kind and --axis");
        // Fixed panel order defines the per-panel seeds.
        const std::pair<protocol::SweepKind, protocol::SweepAxis> order[] = {
            {protocol::SweepKind::Write, protocol::SweepAxis::Amplitude},
            {protocol::SweepKind::Write, protocol::SweepAxis::Width},
            {protocol::SweepKind::Erase, protocol::SweepAxis::Amplitude},
            {protocol::SweepKind::Erase, protocol::SweepAxis::Width},
        };
        std::uint64_t idx = 0;
        for (const auto& [kind, axis] : order) {
            protocol::CharacterizationConfig cfg = protocol::CharacterizationConfig::default_panel(
                kind, axis, rng::derive(o.common.seed, rng::kScope, idx++));
            if (o.pulses > 0)
                cfg.pulses_per_point = o.pulses;
            panels.push_back(std::move(cfg));
        }
    }
    for (const protocol::CharacterizationConfig& cfg : panels)
        cfg.validate();

    std::vector<std::string> outputs;
    for (const protocol::CharacterizationConfig& cfg : panels) {
        outputs.push_back(data_name(o.common, panel_base(cfg.kind, cfg.axis)));
        if (o.common.plot)
            outputs.push_back(panel_base(cfg.kind, cfg.axis) + ".svg");
    }
    if (o.common.dry_run) {
        announce_dry_run("characterize", outputs);
        return 0;
    }

    fs::create_directories(o.common.out);
    const fs::path dir(o.common.out);
    protocol::RunStats total;
    std::size_t total_rows = 0;
    for (const protocol::CharacterizationConfig& cfg : panels) {
        protocol::RunStats stats;
        const std::vector<protocol::CharacterizationRow> rows =
            protocol::run_characterization(cfg, params, &stats);
        total.warning_count += stats.warning_count;
        total.max_estimated_current_a =
            std::max(total.max_estimated_current_a, stats.max_estimated_current_a);
        total_rows += rows.size();
        const std::string base = panel_base(cfg.kind, cfg.axis);
        io::write_file_atomic(dir / data_name(o.common, base),
                              o.common.format == "json" ? io::characterization_json(rows)
                                                        : io::characterization_csv(rows));
        if (o.common.plot)
            plot_panel(dir / (base + ".svg"), base, cfg, rows);
    }
    write_manifest(o.common, "characterize", argv, outputs, params);
    emit_warning_note(total);
    std::printf("%zu panel(s), %zu rows -> %s\n", panels.size(), total_rows,
                dir.string().c_str());
    return 0;
}

// ---- iv ---------------------------------------------------------------------

struct IvOpts {
    CommonOpts common;
    double vmax = 1.0;
    double vmin = -1.0;
    double step = 0.05;
    double dwell_us = 1000.0;
};

int cmd_iv(const IvOpts& o, const std::vector<std::string>& argv) {
    const device::DeviceParams params = effective_params(o.common);
    protocol::IvSweepConfig cfg;
    cfg.v_max = o.vmax;
    cfg.v_min = o.vmin;
    cfg.step = o.step;
    cfg.dwell = waveform::from_us(o.dwell_us);
    cfg.seed = o.common.seed;
    cfg.validate();

    std::vector<std::string> outputs = {data_name(o.common, "iv")};
    if (o.common.plot)
        outputs.push_back("iv.svg");
    if (o.common.dry_run) {
        announce_dry_run("iv", outputs);
        return 0;
    }

    protocol::RunStats stats;
    const std::vector<protocol::IvRow> rows = protocol::run_iv_sweep(cfg, params, &stats);

    fs::create_directories(o.common.out);
    const fs::path dir(o.common.out);
    io::write_file_atomic(dir / outputs[0],
                          o.common.format == "json" ? io::iv_json(rows) : io::iv_csv(rows));
    if (o.common.plot) {
        plot::Series s{"sweep", {}, "#1f77b4", true};
        for (const protocol::IvRow& r : rows)
            s.points.emplace_back(r.v_volts, r.i_amps * 1e6);
        io::write_file_atomic(dir / "iv.svg", plot::svg_line_chart("quasi-static I-V loop",
                                                                   "V (V)", "I (uA)", {s}));
    }
    write_manifest(o.common, "iv", argv, outputs, params);
    emit_warning_note(stats);
    std::printf("%zu points -> %s\n", rows.size(), (dir / outputs[0]).string().c_str());
    return 0;
}

// ---- run ----------------------------------------------------------------------

struct RunOpts {
    CommonOpts common;
    std::string script_path;
};

int cmd_run(const RunOpts& o, const std::vector<std::string>& argv) {
    const device::DeviceParams params = effective_params(o.common);
    const std::string text = io::read_file(o.script_path);
    script::Program program;
    try {
        program = script::parse(text);
    } catch (const script::ScriptError& e) {
        std::fprintf(stderr, "%s:%s\n", o.script_path.c_str(), e.what());
        return 1;
    }

    std::vector<std::string> outputs = {data_name(o.common, "runlog")};
    if (o.common.plot)
        outputs.push_back("runlog.svg");
    if (o.common.dry_run) {
        std::printf("dry-run: %s parses (%zu top-level statement(s)); would write:",
                    o.script_path.c_str(), program.statements.size());
        for (const std::string& f : outputs)
            std::printf(" %s", f.c_str());
        std::printf("\n");
        return 0;
    }

    script::RunLog log;
    try {
        log = script::execute(program, params, o.common.seed);
    } catch (const script::ScriptError& e) {
        std::fprintf(stderr, "%s:%s\n", o.script_path.c_str(), e.what());
        return 1;
    }

    fs::create_directories(o.common.out);
    const fs::path dir(o.common.out);
    io::write_file_atomic(dir / outputs[0],
                          o.common.format == "json" ? io::runlog_json(log) : io::runlog_csv(log));
    if (o.common.plot) {
        plot::Series s{"read", {}, "#1f77b4", true};
        for (const script::RunRow& r : log.rows)
            if (r.resistance_ohm)
                s.points.emplace_back(r.row, std::log10(*r.resistance_ohm));
        io::write_file_atomic(dir / "runlog.svg",
                              plot::svg_line_chart("recorded resistance", "log row",
                                                   "log10 R (ohm)", {s}));
    }
    write_manifest(o.common, "run", argv, outputs, params);
    protocol::RunStats stats{log.warning_count, log.max_estimated_current_a};
    emit_warning_note(stats);
    std::printf("%zu log rows -> %s\n", log.rows.size(), (dir / outputs[0]).string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"memstdp: a virtual lab for a stochastic binary memristive synapse"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(MEMSTDP_VERSION));

    StdpOpts stdp_opts;
    CLI::App* stdp = app.add_subcommand(
        "stdp", "Sweep the pre/post pulse offset and estimate the write probability");
    add_common(stdp, stdp_opts.common);
    stdp->add_option("--trials", stdp_opts.trials, "Trials per grid point")
        ->capture_default_str();
    stdp->add_option("--dt-start", stdp_opts.dt_start_us, "First offset in us")
        ->capture_default_str();
    stdp->add_option("--dt-stop", stdp_opts.dt_stop_us, "Last offset in us (inclusive)")
        ->capture_default_str();
    stdp->add_option("--dt-step", stdp_opts.dt_step_us, "Offset grid step in us")
        ->capture_default_str();

    CharOpts char_opts;
    CLI::App* chr = app.add_subcommand(
        "characterize", "Pulse-train panels: resistance vs pulse amplitude or width");
    add_common(chr, char_opts.common);
    chr->add_option("--kind", char_opts.kind, "write or erase; omit to run all four panels")
        ->check(CLI::IsMember({"write", "erase"}));
    chr->add_option("--axis", char_opts.axis, "amplitude or width; omit to run all four panels")
        ->check(CLI::IsMember({"amplitude", "width"}));
    chr->add_option("--fixed", char_opts.fixed,
                    "Held value: width in us (amplitude axis) or volts (width axis)");
    chr->add_option("--values", char_opts.values, "Sweep values (V or us, per --axis)")
        ->delimiter(',');
    chr->add_option("--pulses", char_opts.pulses, "Pulses per sweep value (default 50)");

    IvOpts iv_opts;
    CLI::App* iv = app.add_subcommand("iv", "Quasi-static staircase I-V loop");
    add_common(iv, iv_opts.common);
    iv->add_option("--vmax", iv_opts.vmax, "Positive sweep limit in V")->capture_default_str();
    iv->add_option("--vmin", iv_opts.vmin, "Negative sweep limit in V")->capture_default_str();
    iv->add_option("--step", iv_opts.step, "Staircase step in V")->capture_default_str();
    iv->add_option("--dwell", iv_opts.dwell_us, "Dwell per step in us")->capture_default_str();

    RunOpts run_opts;
    CLI::App* run = app.add_subcommand("run", "Execute a protocol script");
    add_common(run, run_opts.common);
    run->add_option("script", run_opts.script_path, "Protocol script file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    const std::vector<std::string> args(argv, argv + argc);
    try {
        if (app.got_subcommand(stdp))
            return cmd_stdp(stdp_opts, args);
        if (app.got_subcommand(chr))
            return cmd_characterize(char_opts, args);
        if (app.got_subcommand(iv))
            return cmd_iv(iv_opts, args);
        if (app.got_subcommand(run))
            return cmd_run(run_opts, args);
        std::fprintf(stderr, "error: no subcommand\n");
        return 1;
    } catch (const script::ScriptError& e) {
        std::fprintf(stderr, "script error: %s\n", e.what());
        return 1;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 2;
    }
}
