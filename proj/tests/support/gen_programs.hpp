#pragma once

// Random well-formed protocol programs for round-trip testing. The generator
// tracks bound variables per lexical scope so every emitted program passes
// the parser's static checks by construction.

#include "memstdp/rng.hpp"
#include "memstdp/waveform.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace testsupport {

class ProgramGen {
  public:
    explicit ProgramGen(std::uint64_t seed) : rnd_(seed) {}

    std::string generate() {
        out_.clear();
        scopes_.assign(1, {});
        let_counter_ = 0;
        block_body(0, 1 + pick(5));
        return out_;
    }

  private:
    struct Var {
        std::string name;
        bool is_time;
    };

    std::uint64_t pick(std::uint64_t n) { return rnd_.next_u64() % n; }

    double uniform(double lo, double hi) { return rnd_.uniform(lo, hi); }

    std::string time_literal() {
        // mixes unit spellings and fractional values; every form must
        // round-trip through the canonical printer
        switch (pick(4)) {
        case 0: return std::to_string(pick(5000)) + "us";
        case 1: return std::to_string(pick(8)) + "ms";
        case 2: {
            char buf[48];
            std::snprintf(buf, sizeof buf, "%.3fms", uniform(0.0, 5.0));
            return buf;
        }
        default: {
            char buf[48];
            std::snprintf(buf, sizeof buf, "%.6fs", uniform(0.0, 0.01));
            return buf;
        }
        }
    }

    std::string volt_literal(bool positive) {
        char buf[48];
        const double magnitude = uniform(0.05, 1.4);
        const double v = positive ? magnitude : -magnitude;
        if (pick(2) == 0)
            std::snprintf(buf, sizeof buf, "%.4fV", v);
        else
            std::snprintf(buf, sizeof buf, "%.1fmV", v * 1000.0);
        return buf;
    }

    const Var* bound_time_var() {
        std::vector<const Var*> candidates;
        for (const auto& scope : scopes_)
            for (const Var& v : scope)
                if (v.is_time)
                    candidates.push_back(&v);
        if (candidates.empty())
            return nullptr;
        return candidates[pick(candidates.size())];
    }

    std::string qexpr() {
        if (const Var* v = bound_time_var(); v && pick(3) == 0)
            return v->name;
        return time_literal();
    }

    std::string wave_term() {
        switch (pick(3)) {
        case 0: return "pre(" + qexpr() + ")";
        case 1: return "post(" + qexpr() + ")";
        default:
            return "pulse(" + qexpr() + ", " + std::to_string(1 + pick(400)) + "us, " +
                   volt_literal(pick(2) == 0) + ")";
        }
    }

    void indent(int depth) { out_.append(static_cast<std::size_t>(depth) * 2, ' '); }

    void statement(int depth) {
        indent(depth);
        switch (pick(depth >= 3 ? 8 : 10)) { // no new blocks below depth 3
        case 0: out_ += "reset;\n"; return;
        case 1: out_ += "read;\n"; return;
        case 2: out_ += "record \"step " + std::to_string(pick(100)) + "\";\n"; return;
        case 3:
            out_ += "write(" + volt_literal(true) + ", " + std::to_string(1 + pick(500)) +
                    "us);\n";
            return;
        case 4:
            out_ += "erase(" + volt_literal(false) + ", " + std::to_string(1 + pick(500)) +
                    "us);\n";
            return;
        case 5:
            out_ += "form(" + volt_literal(true) + ", " + std::to_string(1 + pick(500)) +
                    "us);\n";
            return;
        case 6: {
            std::string wave = wave_term();
            const std::uint64_t extra = pick(3);
            for (std::uint64_t i = 0; i < extra; ++i)
                wave += " - " + wave_term();
            out_ += "apply " + wave + ";\n";
            return;
        }
        case 7: {
            const bool is_time = pick(2) == 0;
            const std::string name = "v" + std::to_string(let_counter_++);
            out_ += "let " + name + " = " + (is_time ? time_literal() : volt_literal(true)) +
                    ";\n";
            scopes_.back().push_back({name, is_time});
            return;
        }
        case 8: {
            out_ += "repeat " + std::to_string(1 + pick(4)) + " {\n";
            block(depth);
            return;
        }
        default: {
            const std::string name = "dt" + std::to_string(let_counter_++);
            const long long from = static_cast<long long>(pick(2000));
            const long long span = static_cast<long long>(pick(2000));
            const long long step = 1 + static_cast<long long>(pick(500));
            out_ += "sweep " + name + " from " + std::to_string(from) + "us to " +
                    std::to_string(from + span) + "us step " + std::to_string(step) + "us {\n";
            scopes_.push_back({{name, true}});
            block_no_scope(depth);
            scopes_.pop_back();
            return;
        }
        }
    }

    void block(int depth) {
        scopes_.emplace_back();
        block_no_scope(depth);
        scopes_.pop_back();
    }

    void block_no_scope(int depth) {
        block_body(depth + 1, 1 + pick(4));
        indent(depth);
        out_ += "}\n";
    }

    void block_body(int depth, std::uint64_t n) {
        for (std::uint64_t i = 0; i < n; ++i)
            statement(depth);
    }

    memstdp::rng::Stream rnd_;
    std::string out_;
    std::vector<std::vector<Var>> scopes_;
    std::uint64_t let_counter_ = 0;
};

} // namespace testsupport
