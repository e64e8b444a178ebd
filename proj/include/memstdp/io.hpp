#pragma once

#include "memstdp/device.hpp"
#include "memstdp/protocol.hpp"
#include "memstdp/script.hpp"
#include "memstdp/waveform.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace memstdp::io {

// ---- number formatting -------------------------------------------------

// Shortest representation that round-trips (std::to_chars).
std::string fmt_double(double v);
// Fixed decimals, e.g. fmt_fixed(0.68377, 6) -> "0.683770".
std::string fmt_fixed(double v, int precision);
// Scientific with 6 significant decimals, for currents.
std::string fmt_sci(double v);
// ns -> ms, shortest ("1.5", "0.1", "8").
std::string fmt_ms(waveform::ns_t t);

// ---- DeviceParams flat key = value config --------------------------------

// Exactly these keys, in this order:
//   tau0_set_us, v0_set_v, tau0_reset_us, v0_reset_v, r_lrs_min_ohm,
//   r_lrs_max_ohm, r_hrs_min_ohm, r_hrs_max_ohm, r_initial_ohm,
//   series_resistance_ohm, divider_enabled, read_voltage_v, read_noise_rel,
//   classify_threshold_ohm
std::string params_to_text(const device::DeviceParams& p);
// Applies "key = value" lines on top of `base` ('#' comments and blank lines
// allowed; unknown keys or bad values are ValidationErrors with line numbers).
device::DeviceParams parse_params_text(std::string_view text, const device::DeviceParams& base);

device::DeviceParams load_params(const std::filesystem::path& path,
                                 const device::DeviceParams& base);
void save_params(const device::DeviceParams& p, const std::filesystem::path& path);

// ---- tabular outputs -----------------------------------------------------

std::string stdp_csv(const protocol::ProbabilityCurve& curve);
std::string stdp_json(const protocol::ProbabilityCurve& curve);
std::string characterization_csv(const std::vector<protocol::CharacterizationRow>& rows);
std::string characterization_json(const std::vector<protocol::CharacterizationRow>& rows);
std::string iv_csv(const std::vector<protocol::IvRow>& rows);
std::string iv_json(const std::vector<protocol::IvRow>& rows);
std::string runlog_csv(const script::RunLog& log);
std::string runlog_json(const script::RunLog& log);
std::string summary_json(const protocol::Summary& s);

// Debugging dump: [{"start_us": ..., "end_us": ..., "volts": ...}, ...]
std::string signal_json(const waveform::Signal& s);

// ---- run manifest ----------------------------------------------------------

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::string config_path; // empty when none given
    std::uint64_t seed = 0;
    std::string timestamp; // ISO 8601 UTC
    std::string version;
    std::vector<std::string> outputs; // file names relative to the out dir
    device::DeviceParams params;
};

std::string manifest_json(const RunManifest& m);
std::string iso8601_utc_now();

// ---- files ----------------------------------------------------------------

// Write to <path>.tmp then rename; throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path); // throws IoError

} // namespace memstdp::io
