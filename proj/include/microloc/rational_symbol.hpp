#pragma once

// Rational-symbol trees: sums/products/integer powers over three leaf kinds,
//   - polynomial symbols (derivatives of the base symbol),
//   - the reciprocal 1/P of the base symbol (valid where |P| > 0),
//   - plain Expr atoms (cutoffs, scalars).
// Closed under d_x and d_xi; the reciprocal differentiates structurally via
// d(1/P) = -(dP)/P^2.

#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "microloc/symbol.hpp"

namespace microloc {

enum class RsKind { Sum, Prod, IPow, SymbolLeaf, RecipLeaf, ExprLeaf };

class RationalSymbol;
struct RsNode;
using RsPtr = std::shared_ptr<const RsNode>;

struct RsNode {
    RsKind kind;
    std::vector<RationalSymbol> kids;
    int ipow = 0;
    SymbolFamily sym;                         // SymbolLeaf
    std::shared_ptr<const SymbolFamily> base; // RecipLeaf: 1/(*base)
    Expr ex;                                  // ExprLeaf
};

class RationalSymbol {
public:
    RationalSymbol() = default;
    explicit RationalSymbol(RsPtr p) : p_(std::move(p)) {}
    const RsNode& node() const { return *p_; }
    const RsNode* get() const { return p_.get(); }
    bool valid() const { return p_ != nullptr; }
    RsKind kind() const { return p_->kind; }

private:
    RsPtr p_;
};

inline RationalSymbol rs_expr(Expr e) {
    auto n = std::make_shared<RsNode>();
    n->kind = RsKind::ExprLeaf;
    n->ex = std::move(e);
    return RationalSymbol(std::move(n));
}

inline RationalSymbol rs_const(Complex v) { return rs_expr(make_const(v)); }
inline RationalSymbol rs_zero() { return rs_const(0.0); }

inline bool is_rs_zero(const RationalSymbol& r) {
    return r.kind() == RsKind::ExprLeaf && is_zero(r.node().ex);
}

inline RationalSymbol rs_symbol(SymbolFamily s) {
    if (s.empty()) return rs_zero();
    auto n = std::make_shared<RsNode>();
    n->kind = RsKind::SymbolLeaf;
    n->sym = std::move(s);
    return RationalSymbol(std::move(n));
}

inline RationalSymbol rs_recip(std::shared_ptr<const SymbolFamily> base) {
    auto n = std::make_shared<RsNode>();
    n->kind = RsKind::RecipLeaf;
    n->base = std::move(base);
    return RationalSymbol(std::move(n));
}

inline RationalSymbol rs_sum(std::vector<RationalSymbol> terms) {
    std::vector<RationalSymbol> kept;
    for (auto& t : terms) {
        if (!t.valid() || is_rs_zero(t)) continue;
        if (t.kind() == RsKind::Sum) {
            for (const auto& k : t.node().kids) kept.push_back(k);
        } else {
            kept.push_back(std::move(t));
        }
    }
    if (kept.empty()) return rs_zero();
    if (kept.size() == 1) return kept[0];
    auto n = std::make_shared<RsNode>();
    n->kind = RsKind::Sum;
    n->kids = std::move(kept);
    return RationalSymbol(std::move(n));
}

inline RationalSymbol rs_prod(std::vector<RationalSymbol> factors) {
    std::vector<RationalSymbol> kept;
    Complex c{1.0, 0.0};
    for (auto& f : factors) {
        if (!f.valid()) throw Error("invalid rational-symbol factor");
        if (is_rs_zero(f)) return rs_zero();
        if (f.kind() == RsKind::Prod) {
            for (const auto& k : f.node().kids) {
                if (k.kind() == RsKind::ExprLeaf && is_const(k.node().ex))
                    c *= k.node().ex.node().cval;
                else
                    kept.push_back(k);
            }
        } else if (f.kind() == RsKind::ExprLeaf && is_const(f.node().ex)) {
            c *= f.node().ex.node().cval;
        } else {
            kept.push_back(std::move(f));
        }
    }
    if (c == Complex(0.0, 0.0)) return rs_zero();
    if (kept.empty()) return rs_const(c);
    if (c != Complex(1.0, 0.0)) kept.insert(kept.begin(), rs_const(c));
    if (kept.size() == 1) return kept[0];
    auto n = std::make_shared<RsNode>();
    n->kind = RsKind::Prod;
    n->kids = std::move(kept);
    return RationalSymbol(std::move(n));
}

inline RationalSymbol rs_ipow(RationalSymbol b, int k) {
    if (k == 0) return rs_const(1.0);
    if (k == 1) return b;
    if (k < 0) throw Error("negative rational-symbol power");
    if (b.kind() == RsKind::IPow) {
        const int kk = b.node().ipow * k;
        auto inner = b.node().kids[0];
        return rs_ipow(inner, kk);
    }
    auto n = std::make_shared<RsNode>();
    n->kind = RsKind::IPow;
    n->ipow = k;
    n->kids = {std::move(b)};
    return RationalSymbol(std::move(n));
}

/// Distinct RsNode count (DAG size); the budget guard for iterated operators.
inline std::size_t rs_node_count(const RationalSymbol& r) {
    std::unordered_set<const RsNode*> seen;
    std::vector<const RsNode*> stack{r.get()};
    while (!stack.empty()) {
        const RsNode* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        for (const auto& k : n->kids) stack.push_back(k.get());
    }
    return seen.size();
}

// ---------- differentiation ----------

class RsDifferentiator {
public:
    RsDifferentiator(int var, bool in_xi) : var_(var), in_xi_(in_xi) {}

    RationalSymbol diff(const RationalSymbol& r) {
        auto it = memo_.find(r.get());
        if (it != memo_.end()) return it->second;
        RationalSymbol d = compute(r);
        memo_.emplace(r.get(), d);
        return d;
    }

private:
    RationalSymbol compute(const RationalSymbol& r) {
        const RsNode& n = r.node();
        switch (n.kind) {
            case RsKind::Sum: {
                std::vector<RationalSymbol> t;
                for (const auto& k : n.kids) t.push_back(diff(k));
                return rs_sum(std::move(t));
            }
            case RsKind::Prod: {
                std::vector<RationalSymbol> t;
                for (std::size_t i = 0; i < n.kids.size(); ++i) {
                    RationalSymbol di = diff(n.kids[i]);
                    if (is_rs_zero(di)) continue;
                    std::vector<RationalSymbol> fs;
                    for (std::size_t j = 0; j < n.kids.size(); ++j)
                        fs.push_back(i == j ? di : n.kids[j]);
                    t.push_back(rs_prod(std::move(fs)));
                }
                return rs_sum(std::move(t));
            }
            case RsKind::IPow: {
                RationalSymbol d = diff(n.kids[0]);
                if (is_rs_zero(d)) return d;
                return rs_prod({rs_const(double(n.ipow)),
                                rs_ipow(n.kids[0], n.ipow - 1), d});
            }
            case RsKind::SymbolLeaf: {
                const int nn = n.sym.dimension();
                const auto ax = in_xi_ ? MultiIndex::zero(nn) : MultiIndex::unit(nn, var_);
                const auto bx = in_xi_ ? MultiIndex::unit(nn, var_) : MultiIndex::zero(nn);
                return rs_symbol(n.sym.derivative(ax, bx));
            }
            case RsKind::RecipLeaf: {
                const int nn = n.base->dimension();
                const auto ax = in_xi_ ? MultiIndex::zero(nn) : MultiIndex::unit(nn, var_);
                const auto bx = in_xi_ ? MultiIndex::unit(nn, var_) : MultiIndex::zero(nn);
                SymbolFamily dP = n.base->derivative(ax, bx);
                if (dP.empty()) return rs_zero();
                return rs_prod({rs_const(-1.0), rs_symbol(std::move(dP)),
                                rs_ipow(r, 2)});
            }
            case RsKind::ExprLeaf:
                return in_xi_ ? rs_zero() : rs_expr(microloc::diff(n.ex, var_));
        }
        throw Error("unknown rational-symbol node");
    }

    int var_;
    bool in_xi_;
    std::unordered_map<const RsNode*, RationalSymbol> memo_;
};

inline RationalSymbol rs_diff_x(const RationalSymbol& r, int i) {
    RsDifferentiator d(i, false);
    return d.diff(r);
}

inline RationalSymbol rs_diff_xi(const RationalSymbol& r, int i) {
    RsDifferentiator d(i, true);
    return d.diff(r);
}

inline RationalSymbol rs_diff_x_multi(RationalSymbol r, const MultiIndex& a) {
    for (int i = 0; i < a.dim(); ++i)
        for (int k = 0; k < a[i]; ++k) r = rs_diff_x(r, i);
    return r;
}

/// D_x^a = (-i d_x)^a.
inline RationalSymbol rs_Dx_multi(const RationalSymbol& r, const MultiIndex& a) {
    RationalSymbol d = rs_diff_x_multi(r, a);
    Complex fac{1.0, 0.0};
    for (int k = 0; k < a.order(); ++k) fac *= Complex(0.0, -1.0);
    if (fac == Complex(1.0, 0.0)) return d;
    return rs_prod({rs_const(fac), d});
}

// ---------- evaluation ----------

class RsEvalContext {
public:
    RsEvalContext(std::span<const double> x, std::span<const double> xi, double eps)
        : expr_ctx_(x, eps), x_(x), xi_(xi), eps_(eps) {}

    Complex eval(const RationalSymbol& r) {
        auto it = memo_.find(r.get());
        if (it != memo_.end()) return it->second;
        Complex v = compute(r);
        memo_.emplace(r.get(), v);
        return v;
    }

private:
    Complex compute(const RationalSymbol& r) {
        const RsNode& n = r.node();
        switch (n.kind) {
            case RsKind::Sum: {
                Complex s{};
                for (const auto& k : n.kids) s += eval(k);
                return s;
            }
            case RsKind::Prod: {
                Complex p{1.0, 0.0};
                for (const auto& k : n.kids) p *= eval(k);
                return p;
            }
            case RsKind::IPow: {
                const Complex b = eval(n.kids[0]);
                Complex v{1.0, 0.0};
                for (int i = 0; i < n.ipow; ++i) v *= b;
                return v;
            }
            case RsKind::SymbolLeaf: return n.sym.eval(x_, xi_, eps_);
            case RsKind::RecipLeaf: {
                const Complex b = n.base->eval(x_, xi_, eps_);
                if (std::abs(b) < kMachineZero)
                    throw GuardViolation("1/P evaluated where the symbol vanishes");
                return Complex(1.0, 0.0) / b;
            }
            case RsKind::ExprLeaf: return expr_ctx_.eval(n.ex);
        }
        throw Error("unknown rational-symbol node");
    }

    EvalContext expr_ctx_;
    std::span<const double> x_;
    std::span<const double> xi_;
    double eps_;
    std::unordered_map<const RsNode*, Complex> memo_;
};

inline Complex rs_eval(const RationalSymbol& r, std::span<const double> x,
                       std::span<const double> xi, double eps) {
    RsEvalContext ctx(x, xi, eps);
    return ctx.eval(r);
}

// ---------- materialization at fixed xi ----------

namespace rs_detail {

inline Expr to_expr_at_xi(const RationalSymbol& r, std::span<const double> xi,
                          const std::optional<GuardBox>& guard,
                          std::unordered_map<const RsNode*, Expr>& memo) {
    auto it = memo.find(r.get());
    if (it != memo.end()) return it->second;
    const RsNode& n = r.node();
    Expr out;
    switch (n.kind) {
        case RsKind::Sum: {
            std::vector<Expr> t;
            for (const auto& k : n.kids) t.push_back(to_expr_at_xi(k, xi, guard, memo));
            out = make_sum(std::move(t));
            break;
        }
        case RsKind::Prod: {
            std::vector<Expr> t;
            for (const auto& k : n.kids) t.push_back(to_expr_at_xi(k, xi, guard, memo));
            out = make_prod(std::move(t));
            break;
        }
        case RsKind::IPow:
            out = make_ipow(to_expr_at_xi(n.kids[0], xi, guard, memo), n.ipow);
            break;
        case RsKind::SymbolLeaf: out = n.sym.at_xi(xi); break;
        case RsKind::RecipLeaf: out = make_recip(n.base->at_xi(xi), guard); break;
        case RsKind::ExprLeaf: out = n.ex; break;
    }
    memo.emplace(r.get(), out);
    return out;
}

} // namespace rs_detail

/// The rational symbol as an Expr in x at numeric xi (eps atoms stay symbolic).
inline Expr rs_at_xi(const RationalSymbol& r, std::span<const double> xi,
                     std::optional<GuardBox> guard = std::nullopt) {
    std::unordered_map<const RsNode*, Expr> memo;
    return rs_detail::to_expr_at_xi(r, xi, guard, memo);
}

} // namespace microloc
