#include "memstdp/script.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>

namespace memstdp::script {

namespace {

std::string pos_text(Pos p) {
    return std::to_string(p.line) + ":" + std::to_string(p.col);
}

} // namespace

ScriptError::ScriptError(ErrKind k, Pos p, const std::string& d)
    : std::runtime_error(pos_text(p) + ": " + std::string(to_string(k)) + ": " + d), kind(k),
      pos(p), detail(d) {}

// ---------------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------------

namespace {

struct Token {
    enum class Kind {
        Ident,
        Number,
        String,
        LParen,
        RParen,
        LBrace,
        RBrace,
        Comma,
        Semi,
        Minus,
        Eq,
        End
    };
    Kind kind = Kind::End;
    Pos pos;
    std::string text; // identifier / string body / unit names
    double num = 0.0;
    bool is_int = false;
    std::string unit; // unit suffix attached to a number ("" when absent)
};

constexpr const char* kUnits[] = {"s", "ms", "us", "V", "mV"};

bool is_unit_name(const std::string& s) {
    for (const char* u : kUnits)
        if (s == u)
            return true;
    return false;
}

bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
  public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_blank();
            Token t = next();
            const bool end = t.kind == Token::Kind::End;
            out.push_back(std::move(t));
            if (end)
                return out;
        }
    }

  private:
    [[noreturn]] void fail(Pos pos, const std::string& msg) const {
        throw ScriptError(ErrKind::Lexical, pos, msg);
    }

    bool eof() const { return i_ >= text_.size(); }
    char peek() const { return text_[i_]; }

    char advance() {
        const char c = text_[i_++];
        if (c == '\n') {
            ++pos_.line;
            pos_.col = 1;
        } else {
            ++pos_.col;
        }
        return c;
    }

    void skip_blank() {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (!eof() && peek() != '\n')
                    advance();
            } else {
                return;
            }
        }
    }

    Token next() {
        Token t;
        t.pos = pos_;
        if (eof()) {
            t.kind = Token::Kind::End;
            return t;
        }
        const char c = peek();
        switch (c) {
        case '(': advance(); t.kind = Token::Kind::LParen; return t;
        case ')': advance(); t.kind = Token::Kind::RParen; return t;
        case '{': advance(); t.kind = Token::Kind::LBrace; return t;
        case '}': advance(); t.kind = Token::Kind::RBrace; return t;
        case ',': advance(); t.kind = Token::Kind::Comma; return t;
        case ';': advance(); t.kind = Token::Kind::Semi; return t;
        case '-': advance(); t.kind = Token::Kind::Minus; return t;
        case '=': advance(); t.kind = Token::Kind::Eq; return t;
        case '"': return lex_string();
        default: break;
        }
        if (is_digit(c))
            return lex_number();
        if (is_ident_start(c))
            return lex_ident();
        fail(pos_, std::string("unexpected character '") +
                       (std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c)
                                                                    : std::string("\\x??")) +
                       "'");
    }

    Token lex_string() {
        Token t;
        t.pos = pos_;
        t.kind = Token::Kind::String;
        advance(); // opening quote
        while (!eof() && peek() != '"' && peek() != '\n')
            t.text.push_back(advance());
        if (eof() || peek() == '\n')
            fail(t.pos, "unterminated string");
        advance(); // closing quote
        return t;
    }

    Token lex_number() {
        Token t;
        t.pos = pos_;
        t.kind = Token::Kind::Number;
        const std::size_t begin = i_;
        bool integral = true;
        while (!eof() && is_digit(peek()))
            advance();
        if (!eof() && peek() == '.') {
            integral = false;
            advance();
            if (eof() || !is_digit(peek()))
                fail(pos_, "digits expected after the decimal point");
            while (!eof() && is_digit(peek()))
                advance();
        }
        if (!eof() && (peek() == 'e' || peek() == 'E')) {
            // exponent only when followed by a digit (with optional sign);
            // otherwise the 'e...' is a unit suffix and will be rejected below
            std::size_t k = i_ + 1;
            if (k < text_.size() && (text_[k] == '+' || text_[k] == '-'))
                ++k;
            if (k < text_.size() && is_digit(text_[k])) {
                integral = false;
                advance();
                if (peek() == '+' || peek() == '-')
                    advance();
                while (!eof() && is_digit(peek()))
                    advance();
            }
        }
        const std::string body(text_.substr(begin, i_ - begin));
        const char* first = body.data();
        const char* last = body.data() + body.size();
        double value = 0.0;
        const auto res = std::from_chars(first, last, value);
        if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value))
            fail(t.pos, "number out of range: '" + body + "'");
        t.num = value;
        t.is_int = integral;
        // An immediately attached alphabetic suffix must be a unit.
        if (!eof() && is_ident_start(peek())) {
            Pos suffix_pos = pos_;
            std::string suffix;
            while (!eof() && is_ident_char(peek()))
                suffix.push_back(advance());
            if (!is_unit_name(suffix))
                fail(suffix_pos, "unknown unit '" + suffix + "'");
            t.unit = suffix;
        }
        return t;
    }

    Token lex_ident() {
        Token t;
        t.pos = pos_;
        t.kind = Token::Kind::Ident;
        while (!eof() && is_ident_char(peek()))
            t.text.push_back(advance());
        return t;
    }

    std::string_view text_;
    std::size_t i_ = 0;
    Pos pos_{1, 1};
};

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

const std::set<std::string> kKeywords = {"reset", "read",  "record", "write", "erase", "form",
                                         "apply", "sweep", "repeat", "let",   "from",  "to",
                                         "step",  "pre",   "post",   "pulse"};

constexpr long long kMaxIterations = 10'000'000;    // per sweep/repeat statement
constexpr waveform::ns_t kMaxTime = 2'000'000'000'000'000; // 2e6 s; keeps us<->ns exact
constexpr int kMaxDepth = 200;

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Program run() {
        scopes_.emplace_back();
        Program p;
        while (!at(Token::Kind::End))
            p.statements.push_back(statement());
        if (p.statements.empty())
            throw ScriptError(ErrKind::Semantic, peek().pos, "empty program");
        return p;
    }

  private:
    [[noreturn]] void fail(ErrKind kind, Pos pos, const std::string& msg) const {
        throw ScriptError(kind, pos, msg);
    }

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t k = std::min(i_ + ahead, toks_.size() - 1);
        return toks_[k];
    }
    bool at(Token::Kind k) const { return peek().kind == k; }
    bool at_ident(const char* word) const {
        return at(Token::Kind::Ident) && peek().text == word;
    }
    const Token& take() { return toks_[std::min(i_++, toks_.size() - 1)]; }

    const Token& expect(Token::Kind k, const char* what) {
        if (!at(k))
            fail(ErrKind::Syntax, peek().pos, std::string("expected ") + what + got());
        return take();
    }

    std::string got() const {
        const Token& t = peek();
        switch (t.kind) {
        case Token::Kind::End: return ", got end of input";
        case Token::Kind::Ident: return ", got '" + t.text + "'";
        case Token::Kind::Number: return ", got a number";
        case Token::Kind::String: return ", got a string";
        default: break;
        }
        const char* names[] = {"", "", "", "'('", "')'", "'{'", "'}'", "','", "';'", "'-'", "'='"};
        return std::string(", got ") + names[static_cast<int>(t.kind)];
    }

    // ---- scopes for static name/kind checking ----
    std::optional<Quantity> lookup(const std::string& name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto f = it->find(name);
            if (f != it->end())
                return f->second;
        }
        return std::nullopt;
    }

    std::string ident(const char* what) {
        const Token& t = expect(Token::Kind::Ident, what);
        if (kKeywords.count(t.text) || is_unit_name(t.text))
            fail(ErrKind::Syntax, t.pos, "'" + t.text + "' is a reserved word");
        return t.text;
    }

    // ---- quantities ----
    Quantity make_quantity(const Token& num, const std::string& unit, Pos pos) {
        Quantity q;
        double mag = num.num;
        if (unit == "V" || unit == "mV") {
            q.kind = UnitKind::Voltage;
            q.volts = unit == "V" ? mag : mag / 1000.0;
            return q;
        }
        q.kind = UnitKind::Time;
        const double factor = unit == "s" ? 1e9 : unit == "ms" ? 1e6 : 1e3;
        const double ns = mag * factor;
        if (std::abs(ns) > static_cast<double>(kMaxTime))
            fail(ErrKind::Semantic, pos, "time quantity out of range");
        q.time = std::llround(ns);
        return q;
    }

    Quantity quantity(const char* what) {
        Pos pos = peek().pos;
        double sign = 1.0;
        if (at(Token::Kind::Minus)) {
            take();
            sign = -1.0;
        }
        if (!at(Token::Kind::Number))
            fail(ErrKind::Syntax, peek().pos, std::string("expected ") + what + got());
        Token num = take();
        num.num *= sign;
        std::string unit = num.unit;
        if (unit.empty()) {
            // tolerate a space before the unit; the unit itself stays mandatory
            if (at(Token::Kind::Ident) && is_unit_name(peek().text)) {
                unit = take().text;
            } else if (at(Token::Kind::Ident)) {
                fail(ErrKind::Syntax, peek().pos, "unknown unit '" + peek().text + "'");
            } else {
                fail(ErrKind::Syntax, num.pos,
                     "quantity needs an explicit unit (s, ms, us, V, mV)");
            }
        }
        return make_quantity(num, unit, pos);
    }

    Quantity quantity_of(UnitKind kind, const char* what) {
        const Pos pos = peek().pos;
        Quantity q = quantity(what);
        if (q.kind != kind)
            fail(ErrKind::Semantic, pos,
                 std::string(what) + (kind == UnitKind::Time ? " must be a time quantity"
                                                             : " must be a voltage quantity"));
        return q;
    }

    QExpr qexpr(const char* what) {
        QExpr e;
        e.pos = peek().pos;
        if (at(Token::Kind::Ident) && !kKeywords.count(peek().text) &&
            !is_unit_name(peek().text)) {
            e.ident = take().text;
            const auto bound = lookup(e.ident);
            if (!bound)
                fail(ErrKind::Semantic, e.pos, "unbound variable '" + e.ident + "'");
            if (bound->kind != UnitKind::Time)
                fail(ErrKind::Semantic, e.pos,
                     std::string(what) + " needs a time quantity, but '" + e.ident +
                         "' holds a voltage");
            return e;
        }
        e.lit = quantity_of(UnitKind::Time, what);
        return e;
    }

    // ---- wave expressions ----
    WaveExpr wave_term() {
        WaveExpr e;
        e.pos = peek().pos;
        if (at_ident("pre") || at_ident("post")) {
            e.kind = peek().text == "pre" ? WaveExpr::Kind::Pre : WaveExpr::Kind::Post;
            take();
            expect(Token::Kind::LParen, "'('");
            e.onset = qexpr("pulse onset");
            expect(Token::Kind::RParen, "')'");
            return e;
        }
        if (at_ident("pulse")) {
            e.kind = WaveExpr::Kind::Pulse;
            take();
            expect(Token::Kind::LParen, "'('");
            e.onset = qexpr("pulse onset");
            expect(Token::Kind::Comma, "','");
            const Pos wpos = peek().pos;
            e.width = quantity_of(UnitKind::Time, "pulse width");
            if (e.width.time <= 0)
                fail(ErrKind::Semantic, wpos, "pulse width must be > 0");
            expect(Token::Kind::Comma, "','");
            e.amplitude = quantity_of(UnitKind::Voltage, "pulse amplitude");
            expect(Token::Kind::RParen, "')'");
            return e;
        }
        fail(ErrKind::Syntax, peek().pos,
             std::string("expected pre(...), post(...) or pulse(...)") + got());
    }

    WaveExpr waveexpr() {
        WaveExpr first = wave_term();
        if (!at(Token::Kind::Minus))
            return first;
        WaveExpr diff;
        diff.kind = WaveExpr::Kind::Diff;
        diff.pos = first.pos;
        diff.terms.push_back(std::move(first));
        while (at(Token::Kind::Minus)) {
            take();
            diff.terms.push_back(wave_term());
        }
        return diff;
    }

    // ---- statements ----
    std::vector<Statement> block() {
        if (++depth_ > kMaxDepth)
            fail(ErrKind::Syntax, peek().pos, "blocks nested too deeply");
        expect(Token::Kind::LBrace, "'{'");
        scopes_.emplace_back();
        std::vector<Statement> body;
        while (!at(Token::Kind::RBrace)) {
            if (at(Token::Kind::End))
                fail(ErrKind::Syntax, peek().pos, "expected '}' before end of input");
            body.push_back(statement());
        }
        take(); // '}'
        scopes_.pop_back();
        --depth_;
        return body;
    }

    Statement statement() {
        const Token& t = peek();
        if (t.kind != Token::Kind::Ident)
            fail(ErrKind::Syntax, t.pos, std::string("expected a statement") + got());
        if (t.text == "sweep")
            return sweep();
        if (t.text == "repeat")
            return repeat();
        if (t.text == "let")
            return let();
        return action();
    }

    Statement action() {
        Statement st;
        st.pos = peek().pos;
        const std::string word = take().text;
        if (word == "reset") {
            st.kind = Statement::Kind::Reset;
        } else if (word == "read") {
            st.kind = Statement::Kind::Read;
        } else if (word == "record") {
            st.kind = Statement::Kind::Record;
            st.label = expect(Token::Kind::String, "a quoted label").text;
        } else if (word == "write" || word == "erase" || word == "form") {
            st.kind = word == "write"  ? Statement::Kind::Write
                      : word == "erase" ? Statement::Kind::Erase
                                        : Statement::Kind::Form;
            expect(Token::Kind::LParen, "'('");
            const Pos vpos = peek().pos;
            st.volts_q = quantity_of(UnitKind::Voltage, "pulse amplitude");
            expect(Token::Kind::Comma, "','");
            const Pos wpos = peek().pos;
            st.width_q = quantity_of(UnitKind::Time, "pulse width");
            expect(Token::Kind::RParen, "')'");
            if (st.kind == Statement::Kind::Erase) {
                if (!(st.volts_q.volts < 0.0))
                    fail(ErrKind::Semantic, vpos, "erase amplitude must be negative");
            } else if (!(st.volts_q.volts > 0.0)) {
                fail(ErrKind::Semantic, vpos,
                     std::string(word) + " amplitude must be positive");
            }
            if (st.width_q.time <= 0)
                fail(ErrKind::Semantic, wpos, "pulse width must be > 0");
        } else if (word == "apply") {
            st.kind = Statement::Kind::Apply;
            st.wave = waveexpr();
        } else {
            fail(ErrKind::Syntax, st.pos, "unknown statement '" + word + "'");
        }
        expect(Token::Kind::Semi, "';'");
        return st;
    }

    Statement let() {
        Statement st;
        st.pos = peek().pos;
        st.kind = Statement::Kind::Let;
        take(); // let
        st.var = ident("a variable name");
        expect(Token::Kind::Eq, "'='");
        st.value = quantity("a quantity");
        expect(Token::Kind::Semi, "';'");
        scopes_.back()[st.var] = st.value;
        return st;
    }

    Statement repeat() {
        Statement st;
        st.pos = peek().pos;
        st.kind = Statement::Kind::Repeat;
        take(); // repeat
        const Token& n = peek();
        if (n.kind != Token::Kind::Number || !n.is_int || !n.unit.empty())
            fail(ErrKind::Syntax, n.pos, std::string("expected an integer repeat count") + got());
        take();
        st.count = static_cast<long long>(n.num);
        if (st.count < 1)
            fail(ErrKind::Semantic, n.pos, "repeat count must be >= 1");
        if (st.count > kMaxIterations)
            fail(ErrKind::Semantic, n.pos, "repeat count too large");
        st.body = block();
        return st;
    }

    Statement sweep() {
        Statement st;
        st.pos = peek().pos;
        st.kind = Statement::Kind::Sweep;
        take(); // sweep
        st.var = ident("a sweep variable name");
        if (!at_ident("from"))
            fail(ErrKind::Syntax, peek().pos, std::string("expected 'from'") + got());
        take();
        const Pos from_pos = peek().pos;
        st.from_q = quantity("a start quantity");
        if (!at_ident("to"))
            fail(ErrKind::Syntax, peek().pos, std::string("expected 'to'") + got());
        take();
        const Pos to_pos = peek().pos;
        st.to_q = quantity("an end quantity");
        if (!at_ident("step"))
            fail(ErrKind::Syntax, peek().pos, std::string("expected 'step'") + got());
        take();
        const Pos step_pos = peek().pos;
        st.step_q = quantity("a step quantity");

        if (st.to_q.kind != st.from_q.kind || st.step_q.kind != st.from_q.kind)
            fail(ErrKind::Semantic, to_pos, "sweep bounds and step must share one unit kind");
        long long n = 0;
        if (st.from_q.kind == UnitKind::Time) {
            if (st.step_q.time <= 0)
                fail(ErrKind::Semantic, step_pos, "sweep step must be > 0");
            if (st.to_q.time < st.from_q.time)
                fail(ErrKind::Semantic, from_pos, "sweep needs from <= to");
            n = (st.to_q.time - st.from_q.time) / st.step_q.time + 1;
        } else {
            if (!(st.step_q.volts > 0.0))
                fail(ErrKind::Semantic, step_pos, "sweep step must be > 0");
            if (st.to_q.volts < st.from_q.volts)
                fail(ErrKind::Semantic, from_pos, "sweep needs from <= to");
            n = static_cast<long long>(
                    std::floor((st.to_q.volts - st.from_q.volts) / st.step_q.volts + 1e-9)) +
                1;
        }
        if (n > kMaxIterations)
            fail(ErrKind::Semantic, step_pos, "sweep expands to too many iterations");

        // the loop variable is visible inside the body only
        scopes_.emplace_back();
        scopes_.back()[st.var] = st.from_q;
        st.body = block();
        scopes_.pop_back();
        return st;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    int depth_ = 0;
    std::vector<std::map<std::string, Quantity>> scopes_;
};

} // namespace

Program parse(std::string_view text) {
    return Parser(Lexer(text).run()).run();
}

// ---------------------------------------------------------------------------
// printer
// ---------------------------------------------------------------------------

namespace {

std::string fmt_number(double v) {
    // shortest fixed-notation form that round-trips; scientific notation would
    // survive re-parsing too, but canonical text should read like the input
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

std::string quantity_text(const Quantity& q) {
    if (q.kind == UnitKind::Voltage)
        return fmt_number(q.volts) + "V";
    return fmt_number(static_cast<double>(q.time) / 1000.0) + "us";
}

std::string qexpr_text(const QExpr& e) {
    return e.lit ? quantity_text(*e.lit) : e.ident;
}

std::string wave_text(const WaveExpr& e) {
    switch (e.kind) {
    case WaveExpr::Kind::Pre: return "pre(" + qexpr_text(e.onset) + ")";
    case WaveExpr::Kind::Post: return "post(" + qexpr_text(e.onset) + ")";
    case WaveExpr::Kind::Pulse:
        return "pulse(" + qexpr_text(e.onset) + ", " + quantity_text(e.width) + ", " +
               quantity_text(e.amplitude) + ")";
    case WaveExpr::Kind::Diff: {
        std::string out = wave_text(e.terms.front());
        for (std::size_t i = 1; i < e.terms.size(); ++i)
            out += " - " + wave_text(e.terms[i]);
        return out;
    }
    }
    return {};
}

void print_statement(const Statement& st, int indent, std::string& out) {
    out.append(static_cast<std::size_t>(indent) * 2, ' ');
    switch (st.kind) {
    case Statement::Kind::Reset: out += "reset;\n"; return;
    case Statement::Kind::Read: out += "read;\n"; return;
    case Statement::Kind::Record: out += "record \"" + st.label + "\";\n"; return;
    case Statement::Kind::Write:
    case Statement::Kind::Erase:
    case Statement::Kind::Form: {
        const char* name = st.kind == Statement::Kind::Write   ? "write"
                           : st.kind == Statement::Kind::Erase ? "erase"
                                                               : "form";
        out += std::string(name) + "(" + quantity_text(st.volts_q) + ", " +
               quantity_text(st.width_q) + ");\n";
        return;
    }
    case Statement::Kind::Apply: out += "apply " + wave_text(*st.wave) + ";\n"; return;
    case Statement::Kind::Let:
        out += "let " + st.var + " = " + quantity_text(st.value) + ";\n";
        return;
    case Statement::Kind::Repeat:
    case Statement::Kind::Sweep: {
        if (st.kind == Statement::Kind::Repeat)
            out += "repeat " + std::to_string(st.count) + " {\n";
        else
            out += "sweep " + st.var + " from " + quantity_text(st.from_q) + " to " +
                   quantity_text(st.to_q) + " step " + quantity_text(st.step_q) + " {\n";
        for (const Statement& child : st.body)
            print_statement(child, indent + 1, out);
        out.append(static_cast<std::size_t>(indent) * 2, ' ');
        out += "}\n";
        return;
    }
    }
}

} // namespace

std::string print_program(const Program& p) {
    std::string out;
    for (const Statement& st : p.statements)
        print_statement(st, 0, out);
    return out;
}

// ---------------------------------------------------------------------------
// structural equality (positions ignored)
// ---------------------------------------------------------------------------

namespace {

bool qexpr_equal(const QExpr& a, const QExpr& b) {
    if (a.lit.has_value() != b.lit.has_value())
        return false;
    return a.lit ? *a.lit == *b.lit : a.ident == b.ident;
}

bool wave_equal(const WaveExpr& a, const WaveExpr& b) {
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case WaveExpr::Kind::Pre:
    case WaveExpr::Kind::Post: return qexpr_equal(a.onset, b.onset);
    case WaveExpr::Kind::Pulse:
        return qexpr_equal(a.onset, b.onset) && a.width == b.width &&
               a.amplitude == b.amplitude;
    case WaveExpr::Kind::Diff:
        if (a.terms.size() != b.terms.size())
            return false;
        for (std::size_t i = 0; i < a.terms.size(); ++i)
            if (!wave_equal(a.terms[i], b.terms[i]))
                return false;
        return true;
    }
    return false;
}

bool stmt_equal(const Statement& a, const Statement& b) {
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case Statement::Kind::Reset:
    case Statement::Kind::Read: return true;
    case Statement::Kind::Record: return a.label == b.label;
    case Statement::Kind::Write:
    case Statement::Kind::Erase:
    case Statement::Kind::Form: return a.volts_q == b.volts_q && a.width_q == b.width_q;
    case Statement::Kind::Apply: return wave_equal(*a.wave, *b.wave);
    case Statement::Kind::Let: return a.var == b.var && a.value == b.value;
    case Statement::Kind::Repeat:
        if (a.count != b.count)
            return false;
        break;
    case Statement::Kind::Sweep:
        if (a.var != b.var || !(a.from_q == b.from_q) || !(a.to_q == b.to_q) ||
            !(a.step_q == b.step_q))
            return false;
        break;
    }
    if (a.body.size() != b.body.size())
        return false;
    for (std::size_t i = 0; i < a.body.size(); ++i)
        if (!stmt_equal(a.body[i], b.body[i]))
            return false;
    return true;
}

} // namespace

bool structurally_equal(const Program& a, const Program& b) {
    if (a.statements.size() != b.statements.size())
        return false;
    for (std::size_t i = 0; i < a.statements.size(); ++i)
        if (!stmt_equal(a.statements[i], b.statements[i]))
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// interpreter
// ---------------------------------------------------------------------------

namespace {

// Per-scope RNG bookkeeping mirrors the protocol runner: every sweep/repeat
// iteration derives a child scope key, every reset derives a fresh device key,
// so a script laid out like the built-in sweep consumes identical streams.
struct ScopeCtx {
    std::uint64_t key;
    std::uint64_t child_count = 0;
    std::uint64_t device_count = 0;
};

class Interp {
  public:
    Interp(const device::DeviceParams& params, std::uint64_t seed) : params_(params) {
        params_.validate();
        scopes_.push_back({seed});
        fresh_device();
    }

    RunLog finish() && {
        fold_warnings();
        return std::move(log_);
    }

    void run(const std::vector<Statement>& stmts) {
        for (const Statement& st : stmts)
            exec(st);
    }

  private:
    void fold_warnings() {
        if (!dev_)
            return;
        log_.warning_count += dev_->warnings().size();
        for (const device::Warning& w : dev_->warnings())
            log_.max_estimated_current_a = std::max(log_.max_estimated_current_a, w.current_a);
    }

    void fresh_device() {
        fold_warnings();
        ScopeCtx& sc = scopes_.back();
        dev_.emplace(params_, rng::derive(sc.key, rng::kDevice, sc.device_count++));
    }

    Quantity resolve(const QExpr& e) const {
        if (e.lit)
            return *e.lit;
        const auto it = env_.find(e.ident);
        if (it == env_.end()) // unreachable after static checks; kept defensive
            throw ScriptError(ErrKind::Runtime, e.pos, "unbound variable '" + e.ident + "'");
        return it->second;
    }

    waveform::Signal eval_wave(const WaveExpr& e) const {
        try {
            switch (e.kind) {
            case WaveExpr::Kind::Pre:
                return waveform::make_pre(resolve(e.onset).time, {});
            case WaveExpr::Kind::Post:
                return waveform::make_post(resolve(e.onset).time, {});
            case WaveExpr::Kind::Pulse: {
                const waveform::ns_t onset = resolve(e.onset).time;
                if (onset < 0)
                    throw ValidationError("pulse onset must be >= 0");
                return waveform::Signal(
                    {{onset, onset + e.width.time, e.amplitude.volts}});
            }
            case WaveExpr::Kind::Diff: {
                waveform::Signal acc = eval_wave(e.terms.front());
                for (std::size_t i = 1; i < e.terms.size(); ++i)
                    acc = waveform::subtract(acc, eval_wave(e.terms[i]));
                return acc;
            }
            }
            throw ValidationError("corrupt wave expression");
        } catch (const ValidationError& err) {
            throw ScriptError(ErrKind::Runtime, e.pos, err.what());
        }
    }

    void log_marker(const std::string& label) {
        log_.rows.push_back(
            {static_cast<int>(log_.rows.size()), label, std::nullopt, std::nullopt});
    }

    void exec(const Statement& st) {
        switch (st.kind) {
        case Statement::Kind::Reset: {
            fresh_device();
            if (dev_->force_reset())
                log_.rows.push_back({static_cast<int>(log_.rows.size()), "force_hrs",
                                     dev_->resistance(), dev_->level()});
            return;
        }
        case Statement::Kind::Read: {
            const double r = dev_->read();
            log_.rows.push_back({static_cast<int>(log_.rows.size()), "read", r,
                                 device::classify_state(r, params_)});
            return;
        }
        case Statement::Kind::Record:
            log_marker(st.label);
            return;
        case Statement::Kind::Write:
        case Statement::Kind::Erase:
        case Statement::Kind::Form: {
            const double volts = st.volts_q.volts;
            if (st.kind == Statement::Kind::Erase ? volts >= 0.0 : volts <= 0.0)
                throw ScriptError(ErrKind::Runtime, st.pos, "pulse polarity violates the action");
            // `form` behaves exactly like `write`; it only marks the log.
            if (st.kind == Statement::Kind::Form)
                log_marker("form");
            dev_->apply_segment({0, st.width_q.time, volts});
            return;
        }
        case Statement::Kind::Apply:
            dev_->apply_signal(eval_wave(*st.wave));
            return;
        case Statement::Kind::Let:
            env_[st.var] = st.value;
            return;
        case Statement::Kind::Repeat:
        case Statement::Kind::Sweep: {
            long long n = st.count;
            if (st.kind == Statement::Kind::Sweep) {
                n = st.from_q.kind == UnitKind::Time
                        ? (st.to_q.time - st.from_q.time) / st.step_q.time + 1
                        : static_cast<long long>(
                              std::floor((st.to_q.volts - st.from_q.volts) / st.step_q.volts +
                                         1e-9)) +
                              1;
            }
            const auto saved_env = env_;
            for (long long i = 0; i < n; ++i) {
                if (st.kind == Statement::Kind::Sweep) {
                    Quantity v = st.from_q;
                    if (v.kind == UnitKind::Time)
                        v.time = st.from_q.time + i * st.step_q.time;
                    else
                        v.volts = st.from_q.volts + static_cast<double>(i) * st.step_q.volts;
                    env_[st.var] = v;
                }
                ScopeCtx& parent = scopes_.back();
                scopes_.push_back({rng::derive(parent.key, rng::kScope, parent.child_count++)});
                run(st.body);
                scopes_.pop_back();
            }
            env_ = saved_env;
            return;
        }
        }
    }

    device::DeviceParams params_;
    std::optional<device::Device> dev_;
    std::vector<ScopeCtx> scopes_;
    std::map<std::string, Quantity> env_;
    RunLog log_;
};

} // namespace

RunLog execute(const Program& p, const device::DeviceParams& params, std::uint64_t seed) {
    Interp interp(params, seed);
    interp.run(p.statements);
    return std::move(interp).finish();
}

} // namespace memstdp::script
