#pragma once

// Small vector-expression language for defining immersions in text form
// (.imm files and command-line expressions).
//
//   dim 2 -> 3
//   vars s,u2            # optional chart-variable aliases (defaults: s, u2, ...)
//   chart arclength      # optional: first variable is an arclength parameter
//   const a = 2*pi
//   x = [s*cos(u2), s*sin(u2), a*s]
//   s  in [0.2, 2.2]
//   u2 in [-pi, pi]
//
// Statements are separated by newlines or ';'.  '#' starts a comment.
// Expressions: + - * / ^, unary minus, parentheses, calls of
// sin cos tan atan sqrt exp log pow, numeric literals, named constants, pi.
// '^' binds tighter than unary minus; exponents are numeric literals
// (right-associative literal chains fold to a single number), so jets never
// face non-integer powers of negative bases.

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rsm/errors.hpp"
#include "rsm/jet.hpp"

namespace rsm::dsl {

struct SourceSpan {
    int line = 1;
    int col = 1;
    int len = 1;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, SourceSpan span)
        : std::runtime_error(std::to_string(span.line) + ":" + std::to_string(span.col) + ": " + msg),
          span_(span),
          message_(msg) {}
    const SourceSpan& span() const { return span_; }
    const std::string& message() const { return message_; }

private:
    SourceSpan span_;
    std::string message_;
};

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    if (v == 0.0) return "0";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

enum class NodeKind { Number, Variable, Constant, Negate, Binary, Power, Call };
enum class BinaryOp { Add, Sub, Mul, Div };
enum class Func { Sin, Cos, Tan, Atan, Sqrt, Exp, Log };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    NodeKind kind;
    SourceSpan span;
    double number = 0.0;          // Number value; Power exponent
    int var_index = -1;           // Variable
    std::string name;             // Variable / Constant / Call display name
    double const_value = 0.0;     // Constant (resolved at parse time)
    BinaryOp op = BinaryOp::Add;  // Binary
    Func func = Func::Sin;        // Call
    std::vector<ExprPtr> args;
};

struct ImmersionSpec {
    int chart_dim = 0;
    int ambient_dim = 0;
    std::vector<std::string> var_names;
    bool arclength_chart = false;  // first chart variable is an arclength parameter
    std::vector<std::pair<std::string, double>> constants;  // declaration order
    std::vector<ExprPtr> components;
    std::vector<std::array<double, 2>> domain;
};

inline std::string default_var_name(int i) {
    return i == 0 ? std::string("s") : "u" + std::to_string(i + 1);
}

// --- evaluation ---------------------------------------------------------------

// Evaluates an expression over pre-seeded chart-variable jets (all sharing one
// shape).  `shape` supplies num_vars/order for leaf constants; pass a constant
// jet when evaluating variable-free expressions.
inline Jet eval_expr(const Expr& e, std::span<const Jet> vars, const Jet& shape) {
    switch (e.kind) {
        case NodeKind::Number: return Jet::constant(e.number, shape.num_vars(), shape.order());
        case NodeKind::Constant:
            return Jet::constant(e.const_value, shape.num_vars(), shape.order());
        case NodeKind::Variable: return vars[static_cast<std::size_t>(e.var_index)];
        case NodeKind::Negate: return -eval_expr(*e.args[0], vars, shape);
        case NodeKind::Binary: {
            const Jet a = eval_expr(*e.args[0], vars, shape);
            const Jet b = eval_expr(*e.args[1], vars, shape);
            switch (e.op) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div: return a / b;
            }
            break;
        }
        case NodeKind::Power: return pow(eval_expr(*e.args[0], vars, shape), e.number);
        case NodeKind::Call: {
            const Jet a = eval_expr(*e.args[0], vars, shape);
            switch (e.func) {
                case Func::Sin: return sin(a);
                case Func::Cos: return cos(a);
                case Func::Tan: return tan(a);
                case Func::Atan: return atan(a);
                case Func::Sqrt: return sqrt(a);
                case Func::Exp: return exp(a);
                case Func::Log: return log(a);
            }
            break;
        }
    }
    throw InvalidArgument("eval_expr: malformed expression node");
}

inline std::vector<Jet> eval_spec(const ImmersionSpec& spec, std::span<const double> point,
                                  int order) {
    if (static_cast<int>(point.size()) != spec.chart_dim)
        throw InvalidArgument("eval_spec: point has " + std::to_string(point.size()) +
                              " coordinates, chart dimension is " +
                              std::to_string(spec.chart_dim));
    for (int i = 0; i < spec.chart_dim; ++i) {
        const auto [lo, hi] = spec.domain[static_cast<std::size_t>(i)];
        const double slack = 1e-9 * (1.0 + hi - lo);
        if (point[static_cast<std::size_t>(i)] < lo - slack ||
            point[static_cast<std::size_t>(i)] > hi + slack)
            throw DomainError("eval_spec: " + spec.var_names[static_cast<std::size_t>(i)] + " = " +
                              format_double(point[static_cast<std::size_t>(i)]) +
                              " outside declared domain [" + format_double(lo) + ", " +
                              format_double(hi) + "]");
    }
    const auto vars = jet_point(point, order);
    const Jet shape = Jet::constant(0.0, spec.chart_dim, order);
    std::vector<Jet> out;
    out.reserve(spec.components.size());
    for (std::size_t c = 0; c < spec.components.size(); ++c) {
        try {
            out.push_back(eval_expr(*spec.components[c], vars, shape));
        } catch (const DomainError& err) {
            throw DomainError("component " + std::to_string(c + 1) + ": " + err.what());
        }
    }
    return out;
}

// --- printing -----------------------------------------------------------------

namespace detail {

inline int precedence(const Expr& e) {
    switch (e.kind) {
        case NodeKind::Binary: return (e.op == BinaryOp::Add || e.op == BinaryOp::Sub) ? 1 : 2;
        case NodeKind::Negate: return 3;
        case NodeKind::Power: return 4;
        default: return 5;
    }
}

inline void print_expr(const Expr& e, std::string& out) {
    const auto wrapped = [&out](const Expr& child, bool parens) {
        if (parens) out += '(';
        print_expr(child, out);
        if (parens) out += ')';
    };
    switch (e.kind) {
        case NodeKind::Number: out += format_double(e.number); return;
        case NodeKind::Variable:
        case NodeKind::Constant: out += e.name; return;
        case NodeKind::Negate:
            out += '-';
            wrapped(*e.args[0], precedence(*e.args[0]) < 4);
            return;
        case NodeKind::Binary: {
            const int p = precedence(e);
            wrapped(*e.args[0], precedence(*e.args[0]) < p);
            switch (e.op) {
                case BinaryOp::Add: out += " + "; break;
                case BinaryOp::Sub: out += " - "; break;
                case BinaryOp::Mul: out += '*'; break;
                case BinaryOp::Div: out += '/'; break;
            }
            // Parenthesize equal precedence on the right so the reparse
            // rebuilds the identical (left-leaning) tree.
            wrapped(*e.args[1], precedence(*e.args[1]) <= p);
            return;
        }
        case NodeKind::Power:
            wrapped(*e.args[0], precedence(*e.args[0]) < 5);
            out += '^';
            out += format_double(e.number);
            return;
        case NodeKind::Call:
            out += e.name;
            out += '(';
            print_expr(*e.args[0], out);
            out += ')';
            return;
    }
}

} // namespace detail

inline std::string pretty_print(const Expr& e) {
    std::string out;
    detail::print_expr(e, out);
    return out;
}

inline std::string print_spec(const ImmersionSpec& spec) {
    std::string out = "dim " + std::to_string(spec.chart_dim) + " -> " +
                      std::to_string(spec.ambient_dim) + "\n";
    bool default_names = true;
    for (int i = 0; i < spec.chart_dim; ++i)
        default_names &= spec.var_names[static_cast<std::size_t>(i)] == default_var_name(i);
    if (!default_names) {
        out += "vars ";
        for (int i = 0; i < spec.chart_dim; ++i) {
            if (i) out += ',';
            out += spec.var_names[static_cast<std::size_t>(i)];
        }
        out += '\n';
    }
    if (spec.arclength_chart) out += "chart arclength\n";
    for (const auto& [name, value] : spec.constants)
        out += "const " + name + " = " + format_double(value) + "\n";
    out += "x = [";
    for (std::size_t c = 0; c < spec.components.size(); ++c) {
        if (c) out += ", ";
        out += pretty_print(*spec.components[c]);
    }
    out += "]\n";
    for (int i = 0; i < spec.chart_dim; ++i) {
        const auto [lo, hi] = spec.domain[static_cast<std::size_t>(i)];
        out += spec.var_names[static_cast<std::size_t>(i)] + " in [" + format_double(lo) + ", " +
               format_double(hi) + "]\n";
    }
    return out;
}

inline bool structural_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Number: return a.number == b.number;
        case NodeKind::Variable: return a.var_index == b.var_index && a.name == b.name;
        case NodeKind::Constant: return a.name == b.name && a.const_value == b.const_value;
        case NodeKind::Negate: break;
        case NodeKind::Binary:
            if (a.op != b.op) return false;
            break;
        case NodeKind::Power:
            if (a.number != b.number) return false;
            break;
        case NodeKind::Call:
            if (a.func != b.func) return false;
            break;
    }
    if (a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!structural_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

// --- lexing and parsing ---------------------------------------------------------

namespace detail {

enum class Tok {
    Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen,
    LBracket, RBracket, Comma, Equals, Semicolon, Arrow, Newline, End
};

struct Token {
    Tok kind;
    std::string text;
    double num = 0.0;
    SourceSpan span;
};

inline std::vector<Token> lex(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    int bracket_depth = 0;  // newlines inside (...) or [...] are not separators
    const auto push = [&](Tok kind, std::string tok_text, double num, int tok_col) {
        const int len = std::max<int>(1, static_cast<int>(tok_text.size()));
        out.push_back({kind, std::move(tok_text), num, {line, tok_col, len}});
    };
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            if (bracket_depth == 0) push(Tok::Newline, "\n", 0.0, col);
            ++i;
            ++line;
            col = 1;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') { ++i; ++col; continue; }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') { ++i; ++col; }
            continue;
        }
        const int tok_col = col;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j < text.size() && text[j] == '.') {
                ++j;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            }
            if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
                if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
                    ++k;
                    while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
                    j = k;
                }
            }
            const std::string digits = text.substr(i, j - i);
            push(Tok::Number, digits, std::strtod(digits.c_str(), nullptr), tok_col);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            push(Tok::Ident, text.substr(i, j - i), 0.0, tok_col);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        const auto single = [&](Tok kind) {
            push(kind, std::string(1, c), 0.0, tok_col);
            ++i;
            ++col;
        };
        switch (c) {
            case '+': single(Tok::Plus); break;
            case '-':
                if (i + 1 < text.size() && text[i + 1] == '>') {
                    push(Tok::Arrow, "->", 0.0, tok_col);
                    i += 2;
                    col += 2;
                } else {
                    single(Tok::Minus);
                }
                break;
            case '*': single(Tok::Star); break;
            case '/': single(Tok::Slash); break;
            case '^': single(Tok::Caret); break;
            case '(': ++bracket_depth; single(Tok::LParen); break;
            case ')': bracket_depth = std::max(0, bracket_depth - 1); single(Tok::RParen); break;
            case '[': ++bracket_depth; single(Tok::LBracket); break;
            case ']': bracket_depth = std::max(0, bracket_depth - 1); single(Tok::RBracket); break;
            case ',': single(Tok::Comma); break;
            case '=': single(Tok::Equals); break;
            case ';': single(Tok::Semicolon); break;
            default:
                throw ParseError("unexpected character '" + std::string(1, c) + "'",
                                 {line, tok_col, 1});
        }
    }
    out.push_back({Tok::End, "", 0.0, {line, col, 1}});
    return out;
}

// Recursive-descent parser over the token stream.  Chart variables and
// constants are resolved against symbol tables while parsing, so every name
// error carries the span of the offending token.
class Parser {
public:
    Parser(std::vector<Token> tokens, const std::vector<std::string>* var_names,
           const std::map<std::string, double>* consts, bool allow_vars)
        : tokens_(std::move(tokens)), var_names_(var_names), consts_(consts),
          allow_vars_(allow_vars) {}

    const Token& peek() const { return tokens_[pos_]; }
    const Token& get() { return tokens_[pos_++]; }
    bool at(Tok k) const { return peek().kind == k; }

    Token expect(Tok k, const std::string& what) {
        if (!at(k))
            throw ParseError("expected " + what + ", got '" + describe(peek()) + "'", peek().span);
        return get();
    }

    ExprPtr parse_expr() {
        ExprPtr left = parse_term();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            const Token op = get();
            ExprPtr right = parse_term();
            left = binary(op.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub, left, right,
                          op.span);
        }
        return left;
    }

private:
    ExprPtr parse_term() {
        ExprPtr left = parse_factor();
        while (at(Tok::Star) || at(Tok::Slash)) {
            const Token op = get();
            ExprPtr right = parse_factor();
            left = binary(op.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div, left, right,
                          op.span);
        }
        return left;
    }

    ExprPtr parse_factor() {
        if (at(Tok::Minus)) {
            const Token minus = get();
            auto node = std::make_shared<Expr>();
            node->kind = NodeKind::Negate;
            node->span = minus.span;
            node->args.push_back(parse_factor());
            return node;
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (at(Tok::Caret)) {
            const Token caret = get();
            const double e = parse_exponent();
            auto node = std::make_shared<Expr>();
            node->kind = NodeKind::Power;
            node->span = caret.span;
            node->number = e;
            node->args.push_back(base);
            return node;
        }
        return base;
    }

    // exponent := ['-'] NUMBER ['^' exponent]; the right-associative literal
    // chain folds to a single constant.
    double parse_exponent() {
        double sign = 1.0;
        if (at(Tok::Minus)) {
            get();
            sign = -1.0;
        }
        const Token num = expect(Tok::Number, "numeric exponent");
        double value = sign * num.num;
        if (at(Tok::Caret)) {
            get();
            value = std::pow(value, parse_exponent());
        }
        return value;
    }

    ExprPtr parse_atom() {
        if (at(Tok::Number)) {
            const Token t = get();
            auto node = std::make_shared<Expr>();
            node->kind = NodeKind::Number;
            node->span = t.span;
            node->number = t.num;
            return node;
        }
        if (at(Tok::LParen)) {
            get();
            ExprPtr inner = parse_expr();
            expect(Tok::RParen, "')'");
            return inner;
        }
        if (!at(Tok::Ident))
            throw ParseError("expected an expression, got '" + describe(peek()) + "'",
                             peek().span);
        const Token id = get();
        if (at(Tok::LParen)) return parse_call(id);
        return resolve_name(id);
    }

    ExprPtr parse_call(const Token& id) {
        get();  // '('
        std::vector<ExprPtr> args;
        if (!at(Tok::RParen)) {
            args.push_back(parse_expr());
            while (at(Tok::Comma)) {
                get();
                args.push_back(parse_expr());
            }
        }
        expect(Tok::RParen, "')'");

        if (id.text == "pow") {
            if (args.size() != 2)
                throw ParseError("pow expects 2 arguments, got " + std::to_string(args.size()),
                                 id.span);
            if (args[1]->kind != NodeKind::Number &&
                !(args[1]->kind == NodeKind::Negate && args[1]->args[0]->kind == NodeKind::Number))
                throw ParseError("pow exponent must be a numeric literal", args[1]->span);
            const double e = args[1]->kind == NodeKind::Number
                                 ? args[1]->number
                                 : -args[1]->args[0]->number;
            auto node = std::make_shared<Expr>();
            node->kind = NodeKind::Power;
            node->span = id.span;
            node->number = e;
            node->args.push_back(args[0]);
            return node;
        }
        static const std::map<std::string, Func> funcs = {
            {"sin", Func::Sin}, {"cos", Func::Cos}, {"tan", Func::Tan},  {"atan", Func::Atan},
            {"sqrt", Func::Sqrt}, {"exp", Func::Exp}, {"log", Func::Log}};
        const auto it = funcs.find(id.text);
        if (it == funcs.end())
            throw ParseError("unknown function '" + id.text + "'", id.span);
        if (args.size() != 1)
            throw ParseError(id.text + " expects 1 argument, got " + std::to_string(args.size()),
                             id.span);
        auto node = std::make_shared<Expr>();
        node->kind = NodeKind::Call;
        node->span = id.span;
        node->name = id.text;
        node->func = it->second;
        node->args.push_back(args[0]);
        return node;
    }

    ExprPtr resolve_name(const Token& id) {
        if (var_names_) {
            for (std::size_t v = 0; v < var_names_->size(); ++v) {
                if ((*var_names_)[v] == id.text) {
                    if (!allow_vars_)
                        throw ParseError("chart variable '" + id.text +
                                         "' not allowed in a constant expression", id.span);
                    auto node = std::make_shared<Expr>();
                    node->kind = NodeKind::Variable;
                    node->span = id.span;
                    node->var_index = static_cast<int>(v);
                    node->name = id.text;
                    return node;
                }
            }
        }
        double value = 0.0;
        bool found = false;
        if (id.text == "pi") {
            value = M_PI;
            found = true;
        } else if (consts_) {
            if (const auto it = consts_->find(id.text); it != consts_->end()) {
                value = it->second;
                found = true;
            }
        }
        if (!found) throw ParseError("unknown identifier '" + id.text + "'", id.span);
        auto node = std::make_shared<Expr>();
        node->kind = NodeKind::Constant;
        node->span = id.span;
        node->name = id.text;
        node->const_value = value;
        return node;
    }

    static ExprPtr binary(BinaryOp op, ExprPtr l, ExprPtr r, SourceSpan span) {
        auto node = std::make_shared<Expr>();
        node->kind = NodeKind::Binary;
        node->span = span;
        node->op = op;
        node->args = {std::move(l), std::move(r)};
        return node;
    }

    static std::string describe(const Token& t) {
        if (t.kind == Tok::End) return "end of input";
        if (t.kind == Tok::Newline) return "end of line";
        return t.text;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    const std::vector<std::string>* var_names_;
    const std::map<std::string, double>* consts_;
    bool allow_vars_;

    friend ImmersionSpec parse_tokens(std::vector<Token> tokens);
};

inline double fold_constant(const SourceSpan& where, const ExprPtr& e) {
    const Jet shape = Jet::constant(0.0, 0, 0);
    try {
        return eval_expr(*e, {}, shape).value();
    } catch (const DomainError& err) {
        throw ParseError(std::string("constant expression failed to evaluate: ") + err.what(),
                         where);
    }
}

inline ImmersionSpec parse_tokens(std::vector<Token> tokens) {
    ImmersionSpec spec;
    std::map<std::string, double> consts;
    std::vector<bool> have_domain;
    bool seen_dim = false, seen_x = false, seen_vars = false;

    Parser p(std::move(tokens), &spec.var_names, &consts, true);
    const auto skip_separators = [&p] {
        while (p.at(Tok::Newline) || p.at(Tok::Semicolon)) p.get();
    };
    const auto end_statement = [&p] {
        if (p.at(Tok::End)) return;
        if (!p.at(Tok::Newline) && !p.at(Tok::Semicolon))
            throw ParseError("expected end of statement, got '" + Parser::describe(p.peek()) + "'",
                             p.peek().span);
    };
    const auto reserved = [](const std::string& name) {
        static const char* words[] = {"dim",  "vars", "chart", "const", "in",  "x",   "pi",
                                      "sin",  "cos",  "tan",   "atan",  "sqrt", "exp", "log",
                                      "pow"};
        for (const char* w : words)
            if (name == w) return true;
        return false;
    };

    skip_separators();
    while (!p.at(Tok::End)) {
        const Token head = p.expect(Tok::Ident, "a statement");
        if (head.text == "dim") {
            if (seen_dim) throw ParseError("duplicate dim statement", head.span);
            const Token n = p.expect(Tok::Number, "chart dimension");
            p.expect(Tok::Arrow, "'->'");
            const Token m = p.expect(Tok::Number, "ambient dimension");
            spec.chart_dim = static_cast<int>(n.num);
            spec.ambient_dim = static_cast<int>(m.num);
            if (spec.chart_dim < 1 || spec.chart_dim != n.num)
                throw ParseError("chart dimension must be a positive integer", n.span);
            if (spec.ambient_dim < spec.chart_dim || spec.ambient_dim != m.num)
                throw ParseError("ambient dimension must be an integer >= chart dimension",
                                 m.span);
            for (int i = 0; i < spec.chart_dim; ++i) spec.var_names.push_back(default_var_name(i));
            have_domain.assign(static_cast<std::size_t>(spec.chart_dim), false);
            spec.domain.assign(static_cast<std::size_t>(spec.chart_dim), {0.0, 0.0});
            seen_dim = true;
            end_statement();
            skip_separators();
            continue;
        }
        if (!seen_dim)
            throw ParseError("the first statement must declare dimensions: dim n -> m", head.span);

        if (head.text == "vars") {
            if (seen_vars) throw ParseError("duplicate vars statement", head.span);
            if (seen_x) throw ParseError("vars must precede the component list", head.span);
            std::vector<std::string> names;
            for (;;) {
                const Token id = p.expect(Tok::Ident, "variable name");
                if (reserved(id.text))
                    throw ParseError("'" + id.text + "' is reserved and cannot name a variable",
                                     id.span);
                for (const auto& seen : names)
                    if (seen == id.text)
                        throw ParseError("duplicate variable name '" + id.text + "'", id.span);
                names.push_back(id.text);
                if (!p.at(Tok::Comma)) break;
                p.get();
            }
            if (static_cast<int>(names.size()) != spec.chart_dim)
                throw ParseError("vars declares " + std::to_string(names.size()) +
                                     " names for chart dimension " +
                                     std::to_string(spec.chart_dim),
                                 head.span);
            spec.var_names = std::move(names);
            seen_vars = true;
            end_statement();
            skip_separators();
            continue;
        }
        if (head.text == "chart") {
            const Token kind = p.expect(Tok::Ident, "chart kind");
            if (kind.text != "arclength")
                throw ParseError("unknown chart kind '" + kind.text + "' (expected arclength)",
                                 kind.span);
            spec.arclength_chart = true;
            end_statement();
            skip_separators();
            continue;
        }
        if (head.text == "const") {
            const Token id = p.expect(Tok::Ident, "constant name");
            if (reserved(id.text))
                throw ParseError("'" + id.text + "' is reserved and cannot name a constant",
                                 id.span);
            for (const auto& name : spec.var_names)
                if (name == id.text)
                    throw ParseError("'" + id.text + "' already names a chart variable", id.span);
            if (consts.count(id.text))
                throw ParseError("duplicate constant '" + id.text + "'", id.span);
            p.expect(Tok::Equals, "'='");
            p.allow_vars_ = false;
            const ExprPtr e = p.parse_expr();
            p.allow_vars_ = true;
            const double value = fold_constant(id.span, e);
            consts.emplace(id.text, value);
            spec.constants.emplace_back(id.text, value);
            end_statement();
            skip_separators();
            continue;
        }
        if (head.text == "x") {
            if (seen_x) throw ParseError("duplicate component list", head.span);
            p.expect(Tok::Equals, "'='");
            p.expect(Tok::LBracket, "'['");
            for (;;) {
                spec.components.push_back(p.parse_expr());
                if (p.at(Tok::Comma)) {
                    p.get();
                    continue;
                }
                break;
            }
            p.expect(Tok::RBracket, "']'");
            if (static_cast<int>(spec.components.size()) != spec.ambient_dim)
                throw ParseError("component list has " + std::to_string(spec.components.size()) +
                                     " entries for ambient dimension " +
                                     std::to_string(spec.ambient_dim),
                                 head.span);
            seen_x = true;
            end_statement();
            skip_separators();
            continue;
        }

        // Otherwise it must be a domain statement: <var> in [a, b].
        int var_index = -1;
        for (std::size_t v = 0; v < spec.var_names.size(); ++v)
            if (spec.var_names[v] == head.text) var_index = static_cast<int>(v);
        if (var_index < 0)
            throw ParseError("unknown statement or variable '" + head.text + "'", head.span);
        const Token kw = p.expect(Tok::Ident, "'in'");
        if (kw.text != "in") throw ParseError("expected 'in'", kw.span);
        p.expect(Tok::LBracket, "'['");
        p.allow_vars_ = false;
        const ExprPtr lo_expr = p.parse_expr();
        p.expect(Tok::Comma, "','");
        const ExprPtr hi_expr = p.parse_expr();
        p.allow_vars_ = true;
        p.expect(Tok::RBracket, "']'");
        const double lo = fold_constant(head.span, lo_expr);
        const double hi = fold_constant(head.span, hi_expr);
        if (!(hi > lo))
            throw ParseError("domain interval for '" + head.text + "' must have positive length",
                             head.span);
        if (have_domain[static_cast<std::size_t>(var_index)])
            throw ParseError("duplicate domain for variable '" + head.text + "'", head.span);
        spec.domain[static_cast<std::size_t>(var_index)] = {lo, hi};
        have_domain[static_cast<std::size_t>(var_index)] = true;
        end_statement();
        skip_separators();
    }

    const SourceSpan eof = p.peek().span;
    if (!seen_dim) throw ParseError("missing dim statement", eof);
    if (!seen_x) throw ParseError("missing component list x = [...]", eof);
    for (int i = 0; i < spec.chart_dim; ++i)
        if (!have_domain[static_cast<std::size_t>(i)])
            throw ParseError("missing domain for variable '" +
                                 spec.var_names[static_cast<std::size_t>(i)] + "'",
                             eof);
    return spec;
}

} // namespace detail

inline ImmersionSpec parse_immersion(const std::string& text) {
    return detail::parse_tokens(detail::lex(text));
}

// Parses a single expression over the given chart variables (used for
// command-line function arguments).
inline ExprPtr parse_expression(const std::string& text,
                                const std::vector<std::string>& var_names,
                                const std::map<std::string, double>& consts = {}) {
    auto tokens = detail::lex(text);
    // Bare expressions must not contain statement separators.
    for (const auto& t : tokens)
        if (t.kind == detail::Tok::Newline || t.kind == detail::Tok::Semicolon)
            throw ParseError("unexpected statement separator in expression", t.span);
    detail::Parser p(std::move(tokens), &var_names, &consts, true);
    ExprPtr e = p.parse_expr();
    if (!p.at(detail::Tok::End))
        throw ParseError("unexpected trailing input '" + p.peek().text + "'", p.peek().span);
    return e;
}

} // namespace rsm::dsl
