#pragma once

#include "memstdp/device.hpp"
#include "memstdp/errors.hpp"
#include "memstdp/waveform.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memstdp::script {

// Experiment-script DSL: form/write/erase/read/reset/record/apply plus
// sweep/repeat/let. Grammar (whitespace-insensitive, '#' comments to eol):
//
//   program   := { statement }
//   statement := action ";" | sweep | repeat | let
//   let       := "let" IDENT "=" quantity ";"
//   action    := "reset" | "read" | "record" STRING
//              | "write" "(" quantity "," quantity ")"
//              | "erase" "(" quantity "," quantity ")"
//              | "form"  "(" quantity "," quantity ")"
//              | "apply" waveexpr
//   sweep     := "sweep" IDENT "from" quantity "to" quantity "step" quantity block
//   repeat    := "repeat" INT block
//   block     := "{" { statement } "}"
//   waveexpr  := term { "-" term }
//   term      := "pre" "(" qexpr ")" | "post" "(" qexpr ")"
//              | "pulse" "(" qexpr "," quantity "," quantity ")"
//   qexpr     := quantity | IDENT
//   quantity  := NUMBER unit        (a '-' sign is accepted in front)
//   unit      := "s" | "ms" | "us" | "V" | "mV"
//
// Quantities require explicit units; unitless numbers are an error.

struct Pos {
    int line = 1;
    int col = 1;
};

enum class ErrKind { Lexical, Syntax, Semantic, Runtime };

constexpr const char* to_string(ErrKind k) noexcept {
    switch (k) {
    case ErrKind::Lexical: return "lexical error";
    case ErrKind::Syntax: return "syntax error";
    case ErrKind::Semantic: return "semantic error";
    default: return "runtime error";
    }
}

class ScriptError : public std::runtime_error {
  public:
    ScriptError(ErrKind kind, Pos pos, const std::string& detail);
    ErrKind kind;
    Pos pos;
    std::string detail;
};

enum class UnitKind { Time, Voltage };

// Canonical internal units: integer nanoseconds and volts. Conversions from
// s/ms/us and V/mV are exact for the magnitudes used here.
struct Quantity {
    UnitKind kind = UnitKind::Time;
    waveform::ns_t time = 0; // kind == Time
    double volts = 0.0;      // kind == Voltage
    bool operator==(const Quantity&) const = default;
};

// quantity literal or bound identifier
struct QExpr {
    std::optional<Quantity> lit; // set for literals
    std::string ident;           // set for identifier references
    Pos pos;
};

struct WaveExpr {
    enum class Kind { Pre, Post, Pulse, Diff };
    Kind kind = Kind::Pre;
    QExpr onset;                 // Pre / Post / Pulse
    Quantity width;              // Pulse
    Quantity amplitude;          // Pulse
    std::vector<WaveExpr> terms; // Diff: left-associative chain, size >= 2
    Pos pos;
};

struct Statement {
    enum class Kind { Reset, Read, Record, Write, Erase, Form, Apply, Sweep, Repeat, Let };
    Kind kind = Kind::Reset;
    Pos pos;

    std::string label;                 // Record
    Quantity volts_q, width_q;         // Write / Erase / Form
    std::optional<WaveExpr> wave;      // Apply
    std::string var;                   // Sweep variable / Let name
    Quantity from_q, to_q, step_q;     // Sweep
    long long count = 0;               // Repeat
    Quantity value;                    // Let
    std::vector<Statement> body;       // Sweep / Repeat
};

struct Program {
    std::vector<Statement> statements;
};

// Throws ScriptError (lexical/syntax/semantic, with position) on bad input.
Program parse(std::string_view text);

// Canonical text form (times in us, voltages in V); parse(print_program(p))
// is structurally identical to p.
std::string print_program(const Program& p);

bool structurally_equal(const Program& a, const Program& b);

struct RunRow {
    int row = 0;
    std::string label;
    std::optional<double> resistance_ohm; // set for read / force rows
    std::optional<device::Level> state;
};

struct RunLog {
    std::vector<RunRow> rows;
    std::uint64_t warning_count = 0; // device warnings folded over all devices used
    double max_estimated_current_a = 0.0;
};

RunLog execute(const Program& p, const device::DeviceParams& params, std::uint64_t seed);

} // namespace memstdp::script
