#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "memstdp/device.hpp"
#include "memstdp/protocol.hpp"
#include "memstdp/script.hpp"
#include "memstdp/waveform.hpp"

#include "support/gen_programs.hpp"

#include <string>

using namespace memstdp;
using script::ErrKind;
using script::parse;
using script::Program;
using script::ScriptError;

namespace {

ScriptError capture(const std::string& text) {
    try {
        parse(text);
    } catch (const ScriptError& e) {
        return e;
    }
    FAIL("expected a script error for: ", text);
    return ScriptError(ErrKind::Syntax, {}, "unreachable");
}

} // namespace

TEST_CASE("minimal program parses and prints canonically") {
    const Program p = parse("reset; read;");
    CHECK(p.statements.size() == 2);
    CHECK(script::print_program(p) == "reset;\nread;\n");
}

TEST_CASE("unit spellings normalize to microseconds and volts") {
    const Program p = parse("let a = 1ms; let b = 0.5s; let c = 250mV; let d = -0.5V;");
    CHECK(script::print_program(p) ==
          "let a = 1000us;\nlet b = 500000us;\nlet c = 0.25V;\nlet d = -0.5V;\n");
}

TEST_CASE("attached and spaced units both parse") {
    const Program a = parse("write(1V, 30us);");
    const Program b = parse("write(1 V, 30 us);");
    CHECK(script::structurally_equal(a, b));
}

TEST_CASE("the full protocol script parses") {
    const char* text = "sweep dt from 0ms to 8ms step 0.1ms {\n"
                       "  repeat 100 {\n"
                       "    reset;\n"
                       "    apply pre(dt) - post(0ms);\n"
                       "    read;\n"
                       "  }\n"
                       "}\n";
    const Program p = parse(text);
    CHECK(script::print_program(p) == "sweep dt from 0us to 8000us step 100us {\n"
                                      "  repeat 100 {\n"
                                      "    reset;\n"
                                      "    apply pre(dt) - post(0us);\n"
                                      "    read;\n"
                                      "  }\n"
                                      "}\n");
}

TEST_CASE("lexical errors carry the exact position") {
    SUBCASE("unknown attached unit") {
        const ScriptError e = capture("write(1V, 30xs);");
        CHECK(e.kind == ErrKind::Lexical);
        CHECK(e.pos.line == 1);
        CHECK(e.pos.col == 13);
        CHECK(e.detail.find("xs") != std::string::npos);
    }
    SUBCASE("unterminated string") {
        const ScriptError e = capture("record \"oops;\n");
        CHECK(e.kind == ErrKind::Lexical);
        CHECK(e.pos.col == 8);
    }
    SUBCASE("stray character") {
        const ScriptError e = capture("read;\n@");
        CHECK(e.kind == ErrKind::Lexical);
        CHECK(e.pos.line == 2);
        CHECK(e.pos.col == 1);
    }
}

TEST_CASE("syntax errors") {
    CHECK(capture("read").kind == ErrKind::Syntax);              // missing semicolon
    CHECK(capture("write(1V 30us);").kind == ErrKind::Syntax);   // missing comma
    CHECK(capture("write(1V, 30);").kind == ErrKind::Syntax);    // missing unit
    CHECK(capture("frobnicate;").kind == ErrKind::Syntax);       // unknown statement
    CHECK(capture("repeat 2 { read;").kind == ErrKind::Syntax);  // unterminated block
    CHECK(capture("let read = 1V;").kind == ErrKind::Syntax);    // reserved word
    CHECK(capture("apply 1V;").kind == ErrKind::Syntax);         // not a wave term
    CHECK(capture("repeat 1.5 { read; }").kind == ErrKind::Syntax); // non-integer count
}

TEST_CASE("semantic errors") {
    CHECK(capture("apply pre(dt);").kind == ErrKind::Semantic);      // unbound variable
    CHECK(capture("let v = 1V; apply pre(v);").kind == ErrKind::Semantic); // wrong kind
    CHECK(capture("erase(1V, 30us);").kind == ErrKind::Semantic);    // wrong polarity
    CHECK(capture("write(-1V, 30us);").kind == ErrKind::Semantic);
    CHECK(capture("write(1V, 0us);").kind == ErrKind::Semantic);     // zero width
    CHECK(capture("write(30us, 1V);").kind == ErrKind::Semantic);    // swapped kinds
    CHECK(capture("repeat 0 { read; }").kind == ErrKind::Semantic);
    CHECK(capture("sweep t from 5us to 1us step 1us { read; }").kind == ErrKind::Semantic);
    CHECK(capture("sweep t from 1us to 5us step 0us { read; }").kind == ErrKind::Semantic);
    CHECK(capture("sweep t from 1us to 5V step 1us { read; }").kind == ErrKind::Semantic);
    CHECK(capture("").kind == ErrKind::Semantic);                    // empty program
    CHECK(capture("# only a comment\n").kind == ErrKind::Semantic);
}

TEST_CASE("variables obey lexical scope") {
    // defined inside a block, invisible after it
    CHECK(capture("repeat 1 { let t = 1us; read; } apply pre(t);").kind == ErrKind::Semantic);
    // the sweep variable is invisible after the sweep
    CHECK(capture("sweep t from 0us to 1us step 1us { read; } apply pre(t);").kind ==
          ErrKind::Semantic);
    // shadowing is allowed
    CHECK_NOTHROW(parse("let t = 1us; sweep t from 0us to 1us step 1us { apply pre(t); }"));
}

TEST_CASE("deeply nested blocks are rejected, moderately nested accepted") {
    std::string deep, close;
    for (int i = 0; i < 300; ++i) {
        deep += "repeat 1 {\n";
        close += "}\n";
    }
    CHECK(capture(deep + "read;\n" + close).kind == ErrKind::Syntax);
    std::string ok, ok_close;
    for (int i = 0; i < 20; ++i) {
        ok += "repeat 1 {\n";
        ok_close += "}\n";
    }
    CHECK_NOTHROW(parse(ok + "read;\n" + ok_close));
}

TEST_CASE("printing is idempotent") {
    const char* text = "let t = 1.5ms;\n"
                       "form(1.2V, 100us);\n"
                       "sweep dt from 0us to 500us step 100us {\n"
                       "  apply pre(dt) - post(t) - pulse(t, 30us, -0.5V);\n"
                       "  record \"point\";\n"
                       "}\n";
    const Program p = parse(text);
    const std::string once = script::print_program(p);
    const std::string twice = script::print_program(parse(once));
    CHECK(once == twice);
    CHECK(script::structurally_equal(p, parse(once)));
}

TEST_CASE("round-trip law on generated programs") {
    testsupport::ProgramGen gen(2718);
    for (int i = 0; i < 300; ++i) {
        const std::string text = gen.generate();
        CAPTURE(text);
        const Program p = parse(text);
        const std::string printed = script::print_program(p);
        const Program q = parse(printed);
        REQUIRE(script::structurally_equal(p, q));
        REQUIRE(script::print_program(q) == printed);
    }
}

TEST_CASE("structural equality ignores positions but not values") {
    const Program a = parse("write(1V, 30us);");
    const Program b = parse("\n\n   write(1V,\n 30us);");
    const Program c = parse("write(1V, 31us);");
    CHECK(script::structurally_equal(a, b));
    CHECK_FALSE(script::structurally_equal(a, c));
}

TEST_CASE("execution logs reads with classified states") {
    const Program p = parse("reset; read; record \"mark\"; write(1V, 500us); read;");
    const script::RunLog log = script::execute(p, device::default_params(), 123);
    // reset on a virgin device already reads high, so it logs nothing
    REQUIRE(log.rows.size() == 3);
    CHECK(log.rows[0].label == "read");
    CHECK(log.rows[0].resistance_ohm.has_value());
    CHECK(*log.rows[0].state == device::Level::HRS);
    CHECK(log.rows[1].label == "mark");
    CHECK_FALSE(log.rows[1].resistance_ohm.has_value());
    // p_set(1 V, 500 us) ~ 1: the final read lands low
    CHECK(*log.rows.back().state == device::Level::LRS);
    for (std::size_t i = 0; i < log.rows.size(); ++i)
        CHECK(log.rows[i].row == static_cast<int>(i));
}

TEST_CASE("form acts as a write and leaves a marker row") {
    const Program p = parse("form(1V, 500us); read;");
    const script::RunLog log = script::execute(p, device::default_params(), 5);
    REQUIRE(log.rows.size() == 2);
    CHECK(log.rows[0].label == "form");
    CHECK_FALSE(log.rows[0].resistance_ohm.has_value());
    CHECK(*log.rows[1].state == device::Level::LRS);
}

TEST_CASE("runtime errors carry statement positions") {
    const Program p = parse("let t = 1us;\napply pulse(-5us, 30us, 1V);");
    try {
        script::execute(p, device::default_params(), 1);
        FAIL("expected a runtime error");
    } catch (const ScriptError& e) {
        CHECK(e.kind == ErrKind::Runtime);
        CHECK(e.pos.line == 2);
    }
}

TEST_CASE("execution is deterministic in the seed") {
    testsupport::ProgramGen gen(31415);
    for (int i = 0; i < 10; ++i) {
        const Program p = parse(gen.generate());
        const script::RunLog a = script::execute(p, device::default_params(), 99);
        const script::RunLog b = script::execute(p, device::default_params(), 99);
        REQUIRE(a.rows.size() == b.rows.size());
        for (std::size_t k = 0; k < a.rows.size(); ++k) {
            CHECK(a.rows[k].label == b.rows[k].label);
            CHECK(a.rows[k].resistance_ohm == b.rows[k].resistance_ohm);
            CHECK(a.rows[k].state == b.rows[k].state);
        }
        CHECK(a.warning_count == b.warning_count);
    }
}

TEST_CASE("script sweep matches the built-in runner under one seed") {
    // miniature version of the bundled script: 3 grid points x 40 trials
    const Program p = parse("sweep dt from 0ms to 0.2ms step 0.1ms {\n"
                            "  repeat 40 {\n"
                            "    reset;\n"
                            "    apply pre(dt) - post(0ms);\n"
                            "    read;\n"
                            "  }\n"
                            "}\n");
    const std::uint64_t seed = 77;
    const script::RunLog log = script::execute(p, device::default_params(), seed);

    protocol::StdpSweepConfig cfg;
    cfg.dt_stop = waveform::us(200);
    cfg.trials = 40;
    cfg.seed = seed;
    const protocol::ProbabilityCurve curve =
        protocol::run_stdp_sweep(cfg, device::default_params());

    std::vector<int> writes_from_script;
    int count = 0, in_point = 0;
    for (const script::RunRow& r : log.rows) {
        if (r.label != "read")
            continue;
        count += *r.state == device::Level::LRS;
        if (++in_point == 40) {
            writes_from_script.push_back(count);
            count = 0;
            in_point = 0;
        }
    }
    REQUIRE(writes_from_script.size() == curve.points.size());
    for (std::size_t i = 0; i < curve.points.size(); ++i)
        CHECK(writes_from_script[i] == curve.points[i].writes);
}

TEST_CASE("fuzzing produces only positioned script errors") {
    rng::Stream rnd(424242);
    int caught = 0;
    for (int i = 0; i < 2000; ++i) {
        std::string bytes;
        const std::size_t len = rnd.next_u64() % 120;
        for (std::size_t k = 0; k < len; ++k)
            bytes.push_back(static_cast<char>(rnd.next_u64() & 0xFF));
        try {
            parse(bytes);
        } catch (const ScriptError& e) {
            ++caught;
            CHECK(e.pos.line >= 1);
            CHECK(e.pos.col >= 1);
        }
        // anything else escaping is a crash-equivalent and fails the test
    }
    CHECK(caught > 1500); // almost all random byte strings are invalid
}
