#include "memstdp/io.hpp"

#include "memstdp/errors.hpp"

#include "json.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace memstdp::io {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// number formatting
// ---------------------------------------------------------------------------

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string fmt_sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

std::string fmt_ms(waveform::ns_t t) {
    return fmt_double(static_cast<double>(t) / 1e6);
}

// ---------------------------------------------------------------------------
// DeviceParams <-> flat config text
// ---------------------------------------------------------------------------

namespace {

struct KeyDef {
    const char* name;
    double device::DeviceParams::* num = nullptr;
    bool device::DeviceParams::* flag = nullptr;
};

// Field order defines both the file layout and the manifest layout.
const KeyDef kKeys[] = {
    {"tau0_set_us", &device::DeviceParams::tau0_set_us},
    {"v0_set_v", &device::DeviceParams::v0_set_v},
    {"tau0_reset_us", &device::DeviceParams::tau0_reset_us},
    {"v0_reset_v", &device::DeviceParams::v0_reset_v},
    {"r_lrs_min_ohm", &device::DeviceParams::r_lrs_min_ohm},
    {"r_lrs_max_ohm", &device::DeviceParams::r_lrs_max_ohm},
    {"r_hrs_min_ohm", &device::DeviceParams::r_hrs_min_ohm},
    {"r_hrs_max_ohm", &device::DeviceParams::r_hrs_max_ohm},
    {"r_initial_ohm", &device::DeviceParams::r_initial_ohm},
    {"series_resistance_ohm", &device::DeviceParams::series_resistance_ohm},
    {"divider_enabled", nullptr, &device::DeviceParams::divider_enabled},
    {"read_voltage_v", &device::DeviceParams::read_voltage_v},
    {"read_noise_rel", &device::DeviceParams::read_noise_rel},
    {"classify_threshold_ohm", &device::DeviceParams::classify_threshold_ohm},
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

std::string params_to_text(const device::DeviceParams& p) {
    std::string out = "# memstdp device parameters\n";
    for (const KeyDef& k : kKeys) {
        out += k.name;
        out += " = ";
        out += k.num ? fmt_double(p.*(k.num)) : (p.*(k.flag) ? "true" : "false");
        out += "\n";
    }
    return out;
}

device::DeviceParams parse_params_text(std::string_view text,
                                       const device::DeviceParams& base) {
    device::DeviceParams p = base;
    int line_no = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const std::size_t end = std::min(text.find('\n', begin), text.size());
        std::string_view line = text.substr(begin, end - begin);
        begin = end + 1;
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        const KeyDef* def = nullptr;
        for (const KeyDef& k : kKeys)
            if (key == k.name) {
                def = &k;
                break;
            }
        if (!def)
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
        if (def->flag) {
            if (value == "true" || value == "1")
                p.*(def->flag) = true;
            else if (value == "false" || value == "0")
                p.*(def->flag) = false;
            else
                throw ValidationError("config line " + std::to_string(line_no) + ": '" + key +
                                      "' expects true or false");
            continue;
        }
        double num = 0.0;
        const char* first = value.data();
        const char* last = value.data() + value.size();
        const auto res = std::from_chars(first, last, num);
        if (res.ec != std::errc() || res.ptr != last || !std::isfinite(num))
            throw ValidationError("config line " + std::to_string(line_no) + ": '" + key +
                                  "' expects a number, got '" + value + "'");
        p.*(def->num) = num;
    }
    p.validate();
    return p;
}

device::DeviceParams load_params(const std::filesystem::path& path,
                                 const device::DeviceParams& base) {
    return parse_params_text(read_file(path), base);
}

void save_params(const device::DeviceParams& p, const std::filesystem::path& path) {
    write_file_atomic(path, params_to_text(p));
}

// ---------------------------------------------------------------------------
// tabular outputs
// ---------------------------------------------------------------------------

namespace {

// Minimal CSV quoting: only labels can carry arbitrary text.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

ordered_json params_json(const device::DeviceParams& p) {
    ordered_json j;
    for (const KeyDef& k : kKeys) {
        if (k.num)
            j[k.name] = p.*(k.num);
        else
            j[k.name] = p.*(k.flag);
    }
    return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

} // namespace

std::string stdp_csv(const protocol::ProbabilityCurve& curve) {
    std::string out = "dt_ms,trials,writes,p_hat,p_analytic\n";
    for (const protocol::CurvePoint& pt : curve.points) {
        out += fmt_ms(pt.dt);
        out += ',';
        out += std::to_string(pt.trials);
        out += ',';
        out += std::to_string(pt.writes);
        out += ',';
        out += fmt_fixed(pt.p_hat, 6);
        out += ',';
        out += fmt_fixed(pt.p_analytic, 6);
        out += '\n';
    }
    return out;
}

std::string stdp_json(const protocol::ProbabilityCurve& curve) {
    ordered_json arr = ordered_json::array();
    for (const protocol::CurvePoint& pt : curve.points) {
        ordered_json row;
        row["dt_ms"] = static_cast<double>(pt.dt) / 1e6;
        row["trials"] = pt.trials;
        row["writes"] = pt.writes;
        row["p_hat"] = pt.p_hat;
        row["p_analytic"] = pt.p_analytic;
        arr.push_back(std::move(row));
    }
    return dump(arr);
}

std::string characterization_csv(const std::vector<protocol::CharacterizationRow>& rows) {
    std::string out = "sweep_value,pulse_index,resistance_ohm,state\n";
    for (const protocol::CharacterizationRow& r : rows) {
        out += fmt_double(r.sweep_value);
        out += ',';
        out += std::to_string(r.pulse_index);
        out += ',';
        out += fmt_fixed(r.resistance_ohm, 3);
        out += ',';
        out += device::to_string(r.state);
        out += '\n';
    }
    return out;
}

std::string characterization_json(const std::vector<protocol::CharacterizationRow>& rows) {
    ordered_json arr = ordered_json::array();
    for (const protocol::CharacterizationRow& r : rows) {
        ordered_json row;
        row["sweep_value"] = r.sweep_value;
        row["pulse_index"] = r.pulse_index;
        row["resistance_ohm"] = r.resistance_ohm;
        row["state"] = device::to_string(r.state);
        arr.push_back(std::move(row));
    }
    return dump(arr);
}

std::string iv_csv(const std::vector<protocol::IvRow>& rows) {
    std::string out = "v_volts,i_amps,state\n";
    for (const protocol::IvRow& r : rows) {
        out += fmt_double(r.v_volts);
        out += ',';
        out += fmt_sci(r.i_amps);
        out += ',';
        out += device::to_string(r.state);
        out += '\n';
    }
    return out;
}

std::string iv_json(const std::vector<protocol::IvRow>& rows) {
    ordered_json arr = ordered_json::array();
    for (const protocol::IvRow& r : rows) {
        ordered_json row;
        row["v_volts"] = r.v_volts;
        row["i_amps"] = r.i_amps;
        row["state"] = device::to_string(r.state);
        arr.push_back(std::move(row));
    }
    return dump(arr);
}

std::string runlog_csv(const script::RunLog& log) {
    std::string out = "row,label,resistance_ohm,state\n";
    for (const script::RunRow& r : log.rows) {
        out += std::to_string(r.row);
        out += ',';
        out += csv_field(r.label);
        out += ',';
        if (r.resistance_ohm)
            out += fmt_fixed(*r.resistance_ohm, 3);
        out += ',';
        if (r.state)
            out += device::to_string(*r.state);
        out += '\n';
    }
    return out;
}

std::string runlog_json(const script::RunLog& log) {
    ordered_json arr = ordered_json::array();
    for (const script::RunRow& r : log.rows) {
        ordered_json row;
        row["row"] = r.row;
        row["label"] = r.label;
        row["resistance_ohm"] =
            r.resistance_ohm ? ordered_json(*r.resistance_ohm) : ordered_json(nullptr);
        row["state"] = r.state ? ordered_json(device::to_string(*r.state)) : ordered_json(nullptr);
        arr.push_back(std::move(row));
    }
    return dump(arr);
}

std::string summary_json(const protocol::Summary& s) {
    ordered_json j;
    j["peak_p"] = s.peak_p;
    j["peak_dt_ms"] = static_cast<double>(s.peak_dt) / 1e6;
    j["baseline_p"] = s.baseline_p;
    j["window_lo_ms"] =
        s.window_lo ? ordered_json(static_cast<double>(*s.window_lo) / 1e6) : ordered_json(nullptr);
    j["window_hi_ms"] =
        s.window_hi ? ordered_json(static_cast<double>(*s.window_hi) / 1e6) : ordered_json(nullptr);
    return dump(j);
}

std::string signal_json(const waveform::Signal& s) {
    ordered_json arr = ordered_json::array();
    for (const waveform::Segment& seg : s.segments()) {
        ordered_json row;
        row["start_us"] = static_cast<double>(seg.start) / 1e3;
        row["end_us"] = static_cast<double>(seg.end) / 1e3;
        row["volts"] = seg.volts;
        arr.push_back(std::move(row));
    }
    return dump(arr);
}

// ---------------------------------------------------------------------------
// run manifest
// ---------------------------------------------------------------------------

std::string manifest_json(const RunManifest& m) {
    ordered_json j;
    j["command"] = m.command;
    j["argv"] = m.argv;
    j["config"] = m.config_path.empty() ? ordered_json(nullptr) : ordered_json(m.config_path);
    j["seed"] = m.seed;
    j["timestamp"] = m.timestamp;
    j["version"] = m.version;
    j["outputs"] = m.outputs;
    j["params"] = params_json(m.params);
    return dump(j);
}

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw IoError("cannot open '" + tmp.string() + "' for writing: " +
                          std::strerror(errno));
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f)
            throw IoError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() +
                      "': " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
    std::ostringstream ss;
    ss << f.rdbuf();
    if (f.bad())
        throw IoError("read error on '" + path.string() + "'");
    return ss.str();
}

} // namespace memstdp::io
