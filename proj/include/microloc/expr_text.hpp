#pragma once

// DSL printer and recursive-descent parser for Expr. parse(to_dsl(e)) yields an
// expression with identical values for every construct except net(...) atoms,
// which need a net registry in the ParseContext to resolve.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>

#include "microloc/expr.hpp"

namespace microloc {

namespace expr_text_detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    return s;
}

inline std::string fmt_complex(Complex v) {
    if (v.imag() == 0.0) return fmt_double(v.real());
    if (v.real() == 0.0) {
        if (v.imag() == 1.0) return "i";
        if (v.imag() == -1.0) return "(0-i)";
        return "(" + fmt_double(v.imag()) + "*i)";
    }
    if (v.imag() > 0)
        return "(" + fmt_double(v.real()) + "+" + fmt_double(v.imag()) + "*i)";
    return "(" + fmt_double(v.real()) + "-" + fmt_double(-v.imag()) + "*i)";
}

// print levels: 0 sum, 1 product, 2 power, 3 atom
inline int level_of(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Sum: return 0;
        case ExprKind::Prod: return 1;
        case ExprKind::IPow: return 2;
        default: return 3;
    }
}

inline void print(const Expr& e, int need, std::string& out);

inline void print_call(const char* name, std::initializer_list<std::string> args,
                       std::string& out) {
    out += name;
    out += '(';
    bool first = true;
    for (const auto& a : args) {
        if (!first) out += "; ";
        out += a;
        first = false;
    }
    out += ')';
}

inline std::string printed(const Expr& e, int need) {
    std::string s;
    print(e, need, s);
    return s;
}

inline void print(const Expr& e, int need, std::string& out) {
    const bool paren = level_of(e) < need;
    if (paren) out += '(';
    const ExprNode& n = e.node();
    switch (n.kind) {
        case ExprKind::Const: out += fmt_complex(n.cval); break;
        case ExprKind::Var: out += "x" + std::to_string(n.var + 1); break;
        case ExprKind::EpsPow:
            out += "eps^" + std::to_string(n.eps_exp.num);
            if (n.eps_exp.den != 1) out += "/" + std::to_string(n.eps_exp.den);
            break;
        case ExprKind::LogInv: out += "loginv"; break;
        case ExprKind::NamedNet: print_call("net", {n.net_name}, out); break;
        case ExprKind::Sum:
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                if (i) out += " + ";
                print(n.kids[i], 1, out);
            }
            break;
        case ExprKind::Prod:
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                if (i) out += "*";
                print(n.kids[i], 2, out);
            }
            break;
        case ExprKind::IPow:
            print(n.kids[0], 3, out);
            out += "^" + std::to_string(n.ipow);
            break;
        case ExprKind::Recip:
            out += "(1/";
            print(n.kids[0], 3, out);
            out += ")";
            break;
        case ExprKind::Sin: out += "sin(" + printed(n.kids[0], 0) + ")"; break;
        case ExprKind::Cos: out += "cos(" + printed(n.kids[0], 0) + ")"; break;
        case ExprKind::Exp: out += "exp(" + printed(n.kids[0], 0) + ")"; break;
        case ExprKind::Affine:
            print_call("subst",
                       {"x" + std::to_string(n.var + 1), printed(n.kids[1], 0),
                        printed(n.kids[2], 0), printed(n.kids[0], 0)},
                       out);
            break;
        case ExprKind::Bump:
            if (n.deriv == 0)
                print_call("bump",
                           {"x" + std::to_string(n.var + 1), fmt_double(n.center),
                            fmt_double(n.radius)},
                           out);
            else
                print_call("dbump",
                           {"x" + std::to_string(n.var + 1), fmt_double(n.center),
                            fmt_double(n.radius), std::to_string(n.deriv)},
                           out);
            break;
        case ExprKind::HStep:
            print_call("hstep", {"x" + std::to_string(n.var + 1), printed(n.kids[0], 0)},
                       out);
            break;
        case ExprKind::Mollifier:
            print_call("moll",
                       {"x" + std::to_string(n.var + 1), printed(n.kids[0], 0),
                        std::to_string(n.deriv)},
                       out);
            break;
    }
    if (paren) out += ')';
}

} // namespace expr_text_detail

/// Canonical DSL text for e; parse(to_dsl(e)) evaluates identically.
inline std::string to_dsl(const Expr& e) {
    return expr_text_detail::printed(e, 0);
}

struct ParseContext {
    int dimension = 1;
    const std::map<std::string, std::shared_ptr<const EpsNet>>* nets = nullptr;
};

namespace expr_text_detail {

class Parser {
public:
    Parser(std::string_view src, ParseContext ctx) : src_(src), ctx_(ctx) {}

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        int line = 1, col = 1;
        for (std::size_t i = 0; i < pos_ && i < src_.size(); ++i) {
            if (src_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(msg, line, col);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    Expr parse_expr() {
        bool neg = eat('-');
        Expr e = parse_term();
        if (neg) e = make_prod({make_const(-1.0), e});
        while (true) {
            skip_ws();
            if (eat('+')) {
                e = make_sum({e, parse_term()});
            } else if (eat('-')) {
                e = make_sum({e, make_prod({make_const(-1.0), parse_term()})});
            } else {
                return e;
            }
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        while (true) {
            skip_ws();
            if (eat('*')) {
                e = make_prod({e, parse_factor()});
            } else if (eat('/')) {
                e = make_prod({e, make_recip(parse_factor())});
            } else {
                return e;
            }
        }
    }

    Expr parse_factor() {
        bool neg = eat('-');
        Expr e = parse_base();
        if (eat('^')) e = make_ipow(e, parse_int());
        if (neg) e = make_prod({make_const(-1.0), e});
        return e;
    }

    long long parse_int() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        if (pos_ == start) fail("expected integer");
        return std::strtoll(std::string(src_.substr(start, pos_ - start)).c_str(), nullptr,
                            10);
    }

    double parse_number() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) ++pos_;
        bool digits = false;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
            digits |= std::isdigit(static_cast<unsigned char>(src_[pos_])) != 0;
            ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) ++pos_;
            bool ed = false;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ed = true;
            }
            if (!ed) pos_ = save;
        }
        if (!digits) fail("expected number");
        return std::strtod(std::string(src_.substr(start, pos_ - start)).c_str(), nullptr);
    }

    int parse_var_index() {
        skip_ws();
        if (peek() != 'x') fail("expected spatial variable");
        ++pos_;
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        if (pos_ == start) fail("expected variable index");
        const long long idx =
            std::strtoll(std::string(src_.substr(start, pos_ - start)).c_str(), nullptr, 10);
        if (idx < 1 || idx > ctx_.dimension)
            fail("variable index " + std::to_string(idx) + " out of range for dimension " +
                 std::to_string(ctx_.dimension));
        return int(idx - 1);
    }

    std::string parse_name() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("expected name");
        return std::string(src_.substr(start, pos_ - start));
    }

    Rational parse_rational() {
        const long long num = parse_int();
        if (pos_ < src_.size() && src_[pos_] == '/') {
            // fraction binds tighter than DSL division right after eps^
            ++pos_;
            skip_ws();
            const long long den = parse_int();
            return Rational(num, den);
        }
        return Rational(num);
    }

    std::string peek_ident() {
        skip_ws();
        std::size_t p = pos_;
        std::string id;
        while (p < src_.size() && std::isalpha(static_cast<unsigned char>(src_[p])))
            id += src_[p++];
        return id;
    }

    Expr parse_base() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return make_const(parse_number());
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            expect(')');
            return e;
        }
        const std::string id = peek_ident();
        if (id.empty()) fail("unexpected character");
        if (id == "i") {
            pos_ += 1;
            return make_const(Complex(0.0, 1.0));
        }
        if (id == "eps") {
            pos_ += 3;
            expect('^');
            return make_eps_pow(parse_rational());
        }
        if (id == "loginv") {
            pos_ += 6;
            return make_loginv();
        }
        if (id == "sin" || id == "cos" || id == "exp") {
            pos_ += 3;
            expect('(');
            Expr a = parse_expr();
            expect(')');
            if (id == "sin") return make_sin(a);
            if (id == "cos") return make_cos(a);
            return make_exp(a);
        }
        if (id == "bump" || id == "dbump") {
            pos_ += id.size();
            expect('(');
            const int v = parse_var_index();
            expect(';');
            const double center = parse_number();
            expect(';');
            const double radius = parse_number();
            int k = 0;
            if (id == "dbump") {
                expect(';');
                k = int(parse_int());
            }
            expect(')');
            return make_bump(v, center, radius, k);
        }
        if (id == "hstep" || id == "moll") {
            pos_ += id.size();
            expect('(');
            const int v = parse_var_index();
            expect(';');
            Expr w = parse_expr();
            int k = 0;
            const bool want_k = (id == "moll");
            if (want_k) {
                expect(';');
                k = int(parse_int());
            }
            expect(')');
            return want_k ? make_mollifier(v, w, k) : make_hstep(v, w);
        }
        if (id == "subst") {
            pos_ += id.size();
            expect('(');
            const int v = parse_var_index();
            expect(';');
            Expr s = parse_expr();
            expect(';');
            Expr t = parse_expr();
            expect(';');
            Expr body = parse_expr();
            expect(')');
            return make_affine(body, v, s, t);
        }
        if (id == "net") {
            pos_ += id.size();
            expect('(');
            const std::string name = parse_name();
            expect(')');
            if (!ctx_.nets || !ctx_.nets->count(name))
                fail("unknown net '" + name + "'");
            return make_named_net(name, ctx_.nets->at(name));
        }
        // a lone 'x' starts a variable
        if (id[0] == 'x') return make_var(parse_var_index());
        fail("unknown identifier '" + id + "'");
    }

    std::string_view src_;
    ParseContext ctx_;
    std::size_t pos_ = 0;
};

} // namespace expr_text_detail

inline Expr parse(std::string_view src, const ParseContext& ctx) {
    expr_text_detail::Parser p(src, ctx);
    return p.run();
}

inline Expr parse(std::string_view src, int dimension) {
    ParseContext ctx;
    ctx.dimension = dimension;
    return parse(src, ctx);
}

} // namespace microloc
