#pragma once

// Expression DSL for coefficient functions a(x;eps) and test functions phi(x):
// immutable expression trees over spatial variables and eps-dependent atoms,
// closed under exact symbolic differentiation in x.
//
// Grammar (whitespace insensitive):
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ['-'] base ('^' integer)?
//   base   := number | 'i' | 'x'index | 'eps^'rational | 'loginv'
//           | 'sin(' expr ')' | 'cos(' expr ')' | 'exp(' expr ')'
//           | 'bump(' 'x'index ';' number ';' number ')'
//           | 'hstep(' 'x'index ';' expr ')'
//           | '(' expr ')'
// plus printer/parser extensions closing the derivative atoms under round-trip:
//   'dbump(' 'x'index ';' number ';' number ';' k ')'   k-th bump derivative
//   'moll('  'x'index ';' expr ';' k ')'                k-th mollifier derivative
//   'subst(' 'x'index ';' expr ';' expr ';' expr ')'    x_i -> s*x_i + t in body
//   'net(' name ')'                                     named eps-net atom
// Division introduces a reciprocal node whose nonvanishing guard is attached
// at the use site (with_guards).

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "microloc/bump.hpp"
#include "microloc/epsnet.hpp"
#include "microloc/errors.hpp"

namespace microloc {

using Complex = std::complex<double>;

/// Exact rational exponent for eps powers.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d = 1) : num(n), den(d) {
        if (den == 0) throw Error("rational with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }
    double value() const { return double(num) / double(den); }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

enum class ExprKind {
    Const,
    Var,
    EpsPow,
    LogInv,
    NamedNet,
    Sum,
    Prod,
    IPow,
    Recip,
    Sin,
    Cos,
    Exp,
    Affine,
    Bump,
    HStep,
    Mollifier
};

struct GuardBox {
    std::vector<std::array<double, 2>> bounds; // per-dimension [lo, hi]
    bool contains(std::span<const double> x) const {
        for (std::size_t i = 0; i < bounds.size() && i < x.size(); ++i)
            if (x[i] < bounds[i][0] || x[i] > bounds[i][1]) return false;
        return true;
    }
};

class Expr;
struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind;
    Complex cval{};                  // Const
    int var = -1;                    // Var index; axis for Bump/HStep/Mollifier
    Rational eps_exp;                // EpsPow
    int ipow = 0;                    // IPow exponent (>= 2)
    int deriv = 0;                   // Bump/Mollifier derivative order
    double center = 0.0;             // Bump
    double radius = 1.0;             // Bump
    std::vector<Expr> kids;          // children (see factories)
    std::shared_ptr<const EpsNet> net;
    std::string net_name;
    std::optional<GuardBox> guard;   // Recip
};

class Expr {
public:
    Expr() = default;
    explicit Expr(ExprPtr p) : p_(std::move(p)) {}
    const ExprNode& node() const { return *p_; }
    const ExprNode* get() const { return p_.get(); }
    ExprPtr ptr() const { return p_; }
    bool valid() const { return p_ != nullptr; }
    ExprKind kind() const { return p_->kind; }

private:
    ExprPtr p_;
};

// ---------- factories with structural simplification ----------

inline Expr make_const(Complex v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Const;
    n->cval = v;
    return Expr(std::move(n));
}

inline bool is_const(const Expr& e) { return e.valid() && e.kind() == ExprKind::Const; }
inline bool is_zero(const Expr& e) { return is_const(e) && e.node().cval == Complex(0.0, 0.0); }
inline bool is_one(const Expr& e) { return is_const(e) && e.node().cval == Complex(1.0, 0.0); }

inline Expr make_var(int i) {
    if (i < 0) throw Error("variable index must be nonnegative");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Var;
    n->var = i;
    return Expr(std::move(n));
}

inline Expr make_eps_pow(Rational p) {
    if (p.num == 0) return make_const(1.0);
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::EpsPow;
    n->eps_exp = p;
    return Expr(std::move(n));
}

inline Expr make_loginv() {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::LogInv;
    return Expr(std::move(n));
}

inline Expr make_named_net(std::string name, std::shared_ptr<const EpsNet> net) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::NamedNet;
    n->net = std::move(net);
    n->net_name = std::move(name);
    return Expr(std::move(n));
}

namespace expr_detail {

/// Is e exactly Prod[Const(-1), f]? Returns f if so.
inline const ExprNode* negation_of(const Expr& e) {
    if (e.kind() != ExprKind::Prod) return nullptr;
    const auto& k = e.node().kids;
    if (k.size() != 2 || !is_const(k[0])) return nullptr;
    if (k[0].node().cval != Complex(-1.0, 0.0)) return nullptr;
    return k[1].get();
}

} // namespace expr_detail

inline Expr make_sum(std::vector<Expr> terms);
inline Expr make_prod(std::vector<Expr> factors);

inline Expr make_sum(std::vector<Expr> terms) {
    std::vector<Expr> flat;
    Complex c{};
    for (auto& t : terms) {
        if (!t.valid()) throw Error("invalid expression in sum");
        if (t.kind() == ExprKind::Sum) {
            for (const auto& k : t.node().kids) {
                if (is_const(k))
                    c += k.node().cval;
                else
                    flat.push_back(k);
            }
        } else if (is_const(t)) {
            c += t.node().cval;
        } else {
            flat.push_back(t);
        }
    }
    // cancel e against Prod[-1, e] pairs (pointer identity)
    for (std::size_t i = 0; i < flat.size(); ++i) {
        if (!flat[i].valid()) continue;
        const ExprNode* neg = expr_detail::negation_of(flat[i]);
        for (std::size_t j = 0; j < flat.size(); ++j) {
            if (i == j || !flat[j].valid()) continue;
            if ((neg && flat[j].get() == neg) ||
                (expr_detail::negation_of(flat[j]) == flat[i].get() &&
                 expr_detail::negation_of(flat[j]) != nullptr)) {
                flat[i] = Expr();
                flat[j] = Expr();
                break;
            }
        }
    }
    std::vector<Expr> kept;
    for (auto& t : flat)
        if (t.valid()) kept.push_back(std::move(t));
    if (c != Complex(0.0, 0.0)) kept.push_back(make_const(c));
    if (kept.empty()) return make_const(0.0);
    if (kept.size() == 1) return kept[0];
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Sum;
    n->kids = std::move(kept);
    return Expr(std::move(n));
}

inline Expr make_prod(std::vector<Expr> factors) {
    std::vector<Expr> flat;
    Complex c{1.0, 0.0};
    for (auto& f : factors) {
        if (!f.valid()) throw Error("invalid expression in product");
        if (f.kind() == ExprKind::Prod) {
            for (const auto& k : f.node().kids) {
                if (is_const(k))
                    c *= k.node().cval;
                else
                    flat.push_back(k);
            }
        } else if (is_const(f)) {
            c *= f.node().cval;
        } else {
            flat.push_back(f);
        }
    }
    if (c == Complex(0.0, 0.0)) return make_const(0.0);
    if (flat.empty()) return make_const(c);
    std::vector<Expr> kept;
    if (c != Complex(1.0, 0.0)) kept.push_back(make_const(c));
    for (auto& f : flat) kept.push_back(std::move(f));
    if (kept.size() == 1) return kept[0];
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Prod;
    n->kids = std::move(kept);
    return Expr(std::move(n));
}

inline Expr make_recip(Expr e, std::optional<GuardBox> guard = std::nullopt);

inline Expr make_ipow(Expr e, int k) {
    if (k == 0) return make_const(1.0);
    if (k == 1) return e;
    if (k < 0) return make_recip(make_ipow(std::move(e), -k));
    if (is_const(e)) {
        Complex v{1.0, 0.0};
        for (int i = 0; i < k; ++i) v *= e.node().cval;
        return make_const(v);
    }
    if (e.kind() == ExprKind::IPow) {
        const int kk = e.node().ipow * k;
        auto base = e.node().kids[0];
        return make_ipow(base, kk);
    }
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::IPow;
    n->ipow = k;
    n->kids = {std::move(e)};
    return Expr(std::move(n));
}

inline Expr make_recip(Expr e, std::optional<GuardBox> guard) {
    if (is_const(e)) {
        const Complex v = e.node().cval;
        if (std::abs(v) < kMachineZero) throw Error("reciprocal of zero constant");
        return make_const(Complex(1.0, 0.0) / v);
    }
    if (e.kind() == ExprKind::Recip) return e.node().kids[0];
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Recip;
    n->kids = {std::move(e)};
    n->guard = std::move(guard);
    return Expr(std::move(n));
}

inline Expr make_unary(ExprKind k, Expr e) {
    if (is_const(e)) {
        const Complex v = e.node().cval;
        switch (k) {
            case ExprKind::Sin: return make_const(std::sin(v));
            case ExprKind::Cos: return make_const(std::cos(v));
            case ExprKind::Exp: return make_const(std::exp(v));
            default: break;
        }
    }
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->kids = {std::move(e)};
    return Expr(std::move(n));
}

inline Expr make_sin(Expr e) { return make_unary(ExprKind::Sin, std::move(e)); }
inline Expr make_cos(Expr e) { return make_unary(ExprKind::Cos, std::move(e)); }
inline Expr make_exp(Expr e) { return make_unary(ExprKind::Exp, std::move(e)); }

inline bool has_var(const Expr& e) {
    if (e.kind() == ExprKind::Var) return true;
    for (const auto& k : e.node().kids)
        if (has_var(k)) return true;
    return false;
}

/// Substitution x_i -> scale*x_i + offset inside body; scale/offset must be
/// spatial-variable free (eps dependence is fine).
inline Expr make_affine(Expr body, int i, Expr scale, Expr offset) {
    if (has_var(scale) || has_var(offset))
        throw Error("affine scale/offset must not depend on spatial variables");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Affine;
    n->var = i;
    n->kids = {std::move(body), std::move(scale), std::move(offset)};
    return Expr(std::move(n));
}

/// Peak-normalized bump in variable x_i: value 1 at the center, support
/// [center-radius, center+radius]; deriv_order counts d/dx_i applications.
inline Expr make_bump(int i, double center, double radius, int deriv_order = 0) {
    if (!(radius > 0)) throw Error("bump radius must be positive");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Bump;
    n->var = i;
    n->center = center;
    n->radius = radius;
    n->deriv = deriv_order;
    return Expr(std::move(n));
}

/// Regularized step (H * phi_w)(x_i) with the integral-one mollifier of width w.
inline Expr make_hstep(int i, Expr width) {
    if (has_var(width)) throw Error("hstep width must not depend on spatial variables");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::HStep;
    n->var = i;
    n->kids = {std::move(width)};
    return Expr(std::move(n));
}

/// k-th derivative of the width-w mollifier: w^{-(k+1)} psi^{(k)}(x_i/w)/I.
inline Expr make_mollifier(int i, Expr width, int deriv_order = 0) {
    if (has_var(width)) throw Error("mollifier width must not depend on spatial variables");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Mollifier;
    n->var = i;
    n->deriv = deriv_order;
    n->kids = {std::move(width)};
    return Expr(std::move(n));
}

// convenience arithmetic
inline Expr operator+(const Expr& a, const Expr& b) { return make_sum({a, b}); }
inline Expr operator*(const Expr& a, const Expr& b) { return make_prod({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) {
    return make_sum({a, make_prod({make_const(-1.0), b})});
}
inline Expr operator-(const Expr& a) { return make_prod({make_const(-1.0), a}); }

// ---------- evaluation ----------

class EvalContext {
public:
    EvalContext(std::span<const double> x, double eps) : x_(x), eps_(eps) {
        if (!(eps > 0.0) || eps > 1.0) throw EvalError("eps must lie in (0,1]");
    }

    Complex eval(const Expr& e) {
        auto it = memo_.find(e.get());
        if (it != memo_.end()) return it->second;
        const Complex v = compute(e);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw EvalError("non-finite value in evaluation");
        memo_.emplace(e.get(), v);
        return v;
    }

    std::span<const double> point() const { return x_; }
    double eps() const { return eps_; }

private:
    double real_scalar(const Expr& e, const char* what) {
        const Complex v = eval(e);
        if (std::abs(v.imag()) > 1e-9 * (1.0 + std::abs(v)))
            throw EvalError(std::string(what) + " must evaluate to a real number");
        return v.real();
    }

    Complex compute(const Expr& e) {
        const ExprNode& n = e.node();
        switch (n.kind) {
            case ExprKind::Const: return n.cval;
            case ExprKind::Var:
                if (n.var >= int(x_.size())) throw EvalError("variable index out of range");
                return Complex(x_[n.var], 0.0);
            case ExprKind::EpsPow: return Complex(std::pow(eps_, n.eps_exp.value()), 0.0);
            case ExprKind::LogInv: return Complex(-std::log(eps_), 0.0);
            case ExprKind::NamedNet: return n.net->at_eps(eps_);
            case ExprKind::Sum: {
                Complex s{};
                for (const auto& k : n.kids) s += eval(k);
                return s;
            }
            case ExprKind::Prod: {
                Complex p{1.0, 0.0};
                for (const auto& k : n.kids) p *= eval(k);
                return p;
            }
            case ExprKind::IPow: {
                const Complex b = eval(n.kids[0]);
                Complex v{1.0, 0.0};
                for (int i = 0; i < n.ipow; ++i) v *= b;
                return v;
            }
            case ExprKind::Recip: {
                if (n.guard && !n.guard->contains(x_))
                    throw GuardViolation("reciprocal evaluated outside declared region");
                const Complex b = eval(n.kids[0]);
                if (std::abs(b) < kMachineZero)
                    throw EvalError("division by (machine) zero in reciprocal node");
                return Complex(1.0, 0.0) / b;
            }
            case ExprKind::Sin: return std::sin(eval(n.kids[0]));
            case ExprKind::Cos: return std::cos(eval(n.kids[0]));
            case ExprKind::Exp: return std::exp(eval(n.kids[0]));
            case ExprKind::Affine: {
                const double s = real_scalar(n.kids[1], "affine scale");
                const double t = real_scalar(n.kids[2], "affine offset");
                std::vector<double> xp(x_.begin(), x_.end());
                if (n.var >= int(xp.size())) throw EvalError("affine variable out of range");
                xp[n.var] = s * xp[n.var] + t;
                EvalContext sub(xp, eps_);
                return sub.eval(n.kids[0]);
            }
            case ExprKind::Bump: {
                if (n.var >= int(x_.size())) throw EvalError("bump variable out of range");
                const double t = (x_[n.var] - n.center) / n.radius;
                const double v = bump_template_deriv(n.deriv, t) /
                                 (bump_template_peak() * std::pow(n.radius, n.deriv));
                return Complex(v, 0.0);
            }
            case ExprKind::HStep: {
                if (n.var >= int(x_.size())) throw EvalError("hstep variable out of range");
                const double w = real_scalar(n.kids[0], "hstep width");
                if (!(w > 0)) throw EvalError("hstep width must be positive");
                return Complex(mollifier_primitive(x_[n.var] / w), 0.0);
            }
            case ExprKind::Mollifier: {
                if (n.var >= int(x_.size())) throw EvalError("mollifier variable out of range");
                const double w = real_scalar(n.kids[0], "mollifier width");
                if (!(w > 0)) throw EvalError("mollifier width must be positive");
                const double v = bump_template_deriv(n.deriv, x_[n.var] / w) /
                                 (bump_template_integral() * std::pow(w, n.deriv + 1));
                return Complex(v, 0.0);
            }
        }
        throw EvalError("unknown expression node");
    }

    std::span<const double> x_;
    double eps_;
    std::unordered_map<const ExprNode*, Complex> memo_;
};

inline Complex eval(const Expr& e, std::span<const double> x, double eps) {
    EvalContext ctx(x, eps);
    return ctx.eval(e);
}

inline Complex eval(const Expr& e, std::initializer_list<double> x, double eps) {
    std::vector<double> xv(x);
    return eval(e, std::span<const double>(xv), eps);
}

// ---------- differentiation ----------

class Differentiator {
public:
    explicit Differentiator(int var) : var_(var) {}

    Expr diff(const Expr& e) {
        auto it = memo_.find(e.get());
        if (it != memo_.end()) return it->second;
        Expr d = compute(e);
        memo_.emplace(e.get(), d);
        return d;
    }

private:
    Expr compute(const Expr& e) {
        const ExprNode& n = e.node();
        switch (n.kind) {
            case ExprKind::Const:
            case ExprKind::EpsPow:
            case ExprKind::LogInv:
            case ExprKind::NamedNet: return make_const(0.0);
            case ExprKind::Var: return make_const(n.var == var_ ? 1.0 : 0.0);
            case ExprKind::Sum: {
                std::vector<Expr> terms;
                for (const auto& k : n.kids) terms.push_back(diff(k));
                return make_sum(std::move(terms));
            }
            case ExprKind::Prod: {
                std::vector<Expr> terms;
                for (std::size_t i = 0; i < n.kids.size(); ++i) {
                    Expr di = diff(n.kids[i]);
                    if (is_zero(di)) continue;
                    std::vector<Expr> fs;
                    for (std::size_t j = 0; j < n.kids.size(); ++j)
                        fs.push_back(i == j ? di : n.kids[j]);
                    terms.push_back(make_prod(std::move(fs)));
                }
                return make_sum(std::move(terms));
            }
            case ExprKind::IPow: {
                Expr d = diff(n.kids[0]);
                if (is_zero(d)) return d;
                return make_prod({make_const(double(n.ipow)),
                                  make_ipow(n.kids[0], n.ipow - 1), d});
            }
            case ExprKind::Recip: {
                Expr d = diff(n.kids[0]);
                if (is_zero(d)) return d;
                return make_prod({make_const(-1.0), d, make_ipow(e, 2)});
            }
            case ExprKind::Sin: {
                Expr d = diff(n.kids[0]);
                if (is_zero(d)) return d;
                return make_prod({make_cos(n.kids[0]), d});
            }
            case ExprKind::Cos: {
                Expr d = diff(n.kids[0]);
                if (is_zero(d)) return d;
                return make_prod({make_const(-1.0), make_sin(n.kids[0]), d});
            }
            case ExprKind::Exp: {
                Expr d = diff(n.kids[0]);
                if (is_zero(d)) return d;
                return make_prod({e, d});
            }
            case ExprKind::Affine: {
                if (n.var == var_) {
                    Differentiator inner(n.var);
                    Expr db = inner.diff(n.kids[0]);
                    if (is_zero(db)) return db;
                    return make_prod(
                        {n.kids[1], make_affine(db, n.var, n.kids[1], n.kids[2])});
                }
                Expr db = diff(n.kids[0]);
                if (is_zero(db)) return db;
                return make_affine(db, n.var, n.kids[1], n.kids[2]);
            }
            case ExprKind::Bump:
                if (n.var != var_) return make_const(0.0);
                return Expr([&] {
                    auto m = std::make_shared<ExprNode>(n);
                    m->deriv = n.deriv + 1;
                    return m;
                }());
            case ExprKind::HStep:
                if (n.var != var_) return make_const(0.0);
                return make_mollifier(n.var, n.kids[0], 0);
            case ExprKind::Mollifier:
                if (n.var != var_) return make_const(0.0);
                return make_mollifier(n.var, n.kids[0], n.deriv + 1);
        }
        throw Error("unknown expression node in diff");
    }

    int var_;
    std::unordered_map<const ExprNode*, Expr> memo_;
};

inline Expr diff(const Expr& e, int var) {
    Differentiator d(var);
    return d.diff(e);
}

/// alpha-fold partial derivative, alpha given per dimension.
inline Expr diff_multi(Expr e, std::span<const int> alpha) {
    for (std::size_t i = 0; i < alpha.size(); ++i)
        for (int k = 0; k < alpha[i]; ++k) e = diff(e, int(i));
    return e;
}

// ---------- structural rewrites ----------

namespace expr_detail {

template <class F>
Expr rewrite(const Expr& e, std::unordered_map<const ExprNode*, Expr>& memo, F&& leaf) {
    auto it = memo.find(e.get());
    if (it != memo.end()) return it->second;
    Expr out = leaf(e);
    if (!out.valid()) {
        const ExprNode& n = e.node();
        std::vector<Expr> kids;
        bool changed = false;
        for (const auto& k : n.kids) {
            Expr r = rewrite(k, memo, leaf);
            changed |= (r.get() != k.get());
            kids.push_back(std::move(r));
        }
        if (!changed) {
            out = e;
        } else {
            switch (n.kind) {
                case ExprKind::Sum: out = make_sum(std::move(kids)); break;
                case ExprKind::Prod: out = make_prod(std::move(kids)); break;
                case ExprKind::IPow: out = make_ipow(kids[0], n.ipow); break;
                case ExprKind::Recip: out = make_recip(kids[0], n.guard); break;
                case ExprKind::Sin: out = make_sin(kids[0]); break;
                case ExprKind::Cos: out = make_cos(kids[0]); break;
                case ExprKind::Exp: out = make_exp(kids[0]); break;
                case ExprKind::Affine:
                    out = make_affine(kids[0], n.var, kids[1], kids[2]);
                    break;
                case ExprKind::HStep: out = make_hstep(n.var, kids[0]); break;
                case ExprKind::Mollifier:
                    out = make_mollifier(n.var, kids[0], n.deriv);
                    break;
                default: out = e; break;
            }
        }
    }
    memo.emplace(e.get(), out);
    return out;
}

} // namespace expr_detail

/// Replace eps-dependent atoms by constants at a fixed eps. Widths of
/// hstep/mollifier atoms and affine scale/offset are folded too, so the result
/// depends on x only.
inline Expr fold_eps(const Expr& e, double eps) {
    std::unordered_map<const ExprNode*, Expr> memo;
    std::vector<double> dummy; // eps atoms are x-independent
    return expr_detail::rewrite(e, memo, [&](const Expr& q) -> Expr {
        switch (q.kind()) {
            case ExprKind::EpsPow:
            case ExprKind::LogInv:
            case ExprKind::NamedNet:
                return make_const(eval(q, std::span<const double>(dummy), eps));
            case ExprKind::HStep: {
                const Complex w = eval(q.node().kids[0], std::span<const double>(dummy), eps);
                return make_hstep(q.node().var, make_const(w));
            }
            case ExprKind::Mollifier: {
                const Complex w = eval(q.node().kids[0], std::span<const double>(dummy), eps);
                return make_mollifier(q.node().var, make_const(w), q.node().deriv);
            }
            default: return Expr();
        }
    });
}

/// Attach a nonvanishing guard region to every guard-less reciprocal node.
inline Expr with_guards(const Expr& e, const GuardBox& box) {
    std::unordered_map<const ExprNode*, Expr> memo;
    return expr_detail::rewrite(e, memo, [&](const Expr& q) -> Expr {
        if (q.kind() == ExprKind::Recip && !q.node().guard) {
            Expr inner = with_guards(q.node().kids[0], box);
            return make_recip(inner, box);
        }
        return Expr();
    });
}

/// Number of distinct nodes reachable from e (DAG size).
inline std::size_t node_count(const Expr& e) {
    std::unordered_map<const ExprNode*, bool> seen;
    std::size_t count = 0;
    std::vector<const ExprNode*> stack{e.get()};
    while (!stack.empty()) {
        const ExprNode* n = stack.back();
        stack.pop_back();
        if (seen.count(n)) continue;
        seen.emplace(n, true);
        ++count;
        for (const auto& k : n->kids) stack.push_back(k.get());
    }
    return count;
}

} // namespace microloc

#include "microloc/expr_text.hpp"
