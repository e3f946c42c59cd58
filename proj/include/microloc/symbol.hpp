#pragma once

// Polynomial symbols P(x,xi;eps) = sum_{|a|<=m} c_a(x;eps) xi^a with Expr
// coefficients: evaluation, x/xi derivatives, principal part, transpose, and
// application to modulated functions g*e^{-i xi x}.

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "microloc/expr.hpp"

namespace microloc {

struct MultiIndex {
    std::vector<int> idx;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> v) : idx(std::move(v)) {
        for (int k : idx)
            if (k < 0) throw Error("multi-index entries must be nonnegative");
    }
    static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }
    static MultiIndex unit(int n, int i) {
        std::vector<int> v(n, 0);
        v[i] = 1;
        return MultiIndex(std::move(v));
    }

    int order() const {
        int s = 0;
        for (int k : idx) s += k;
        return s;
    }
    int dim() const { return int(idx.size()); }
    int operator[](int i) const { return idx[i]; }

    double factorial() const {
        double f = 1;
        for (int k : idx)
            for (int j = 2; j <= k; ++j) f *= j;
        return f;
    }

    bool operator<(const MultiIndex& o) const { return idx < o.idx; }
    bool operator==(const MultiIndex& o) const { return idx == o.idx; }

    /// componentwise <=
    bool leq(const MultiIndex& o) const {
        for (std::size_t i = 0; i < idx.size(); ++i)
            if (idx[i] > o.idx[i]) return false;
        return true;
    }

    MultiIndex plus(const MultiIndex& o) const {
        std::vector<int> v(idx);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.idx[i];
        return MultiIndex(std::move(v));
    }
    MultiIndex minus(const MultiIndex& o) const {
        std::vector<int> v(idx);
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] -= o.idx[i];
            if (v[i] < 0) throw Error("multi-index subtraction went negative");
        }
        return MultiIndex(std::move(v));
    }
};

/// All multi-indices in n variables with |a| <= max_order, graded, deterministic.
inline std::vector<MultiIndex> enumerate_multi_indices(int n, int max_order) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(n, 0);
    for (int total = 0; total <= max_order; ++total) {
        // lexicographic enumeration of compositions of `total`
        std::function<void(int, int)> rec = [&](int pos, int rest) {
            if (pos == n - 1) {
                cur[pos] = rest;
                out.push_back(MultiIndex(cur));
                return;
            }
            for (int k = rest; k >= 0; --k) {
                cur[pos] = k;
                rec(pos + 1, rest - k);
            }
        };
        if (n == 0) break;
        rec(0, total);
    }
    return out;
}

class SymbolFamily {
public:
    SymbolFamily() = default;

    SymbolFamily(int n, std::map<MultiIndex, Expr> coeffs) : n_(n) {
        for (auto& [a, c] : coeffs) {
            if (a.dim() != n) throw Error("multi-index dimension mismatch");
            if (!c.valid() || is_zero(c)) continue;
            coeffs_.emplace(a, c);
        }
        m_ = 0;
        for (const auto& [a, c] : coeffs_) m_ = std::max(m_, a.order());
    }

    int dimension() const { return n_; }
    int degree() const { return m_; }
    bool empty() const { return coeffs_.empty(); }
    const std::map<MultiIndex, Expr>& coefficients() const { return coeffs_; }

    Complex eval(std::span<const double> x, std::span<const double> xi, double eps) const {
        EvalContext ctx(x, eps);
        Complex s{};
        for (const auto& [a, c] : coeffs_) {
            double mono = 1.0;
            for (int i = 0; i < n_; ++i)
                for (int k = 0; k < a[i]; ++k) mono *= xi[i];
            s += ctx.eval(c) * mono;
        }
        return s;
    }

    /// Symbol of d_x^ax d_xi^bxi P (plain derivatives, no -i factors).
    SymbolFamily derivative(const MultiIndex& ax, const MultiIndex& bxi) const {
        std::map<MultiIndex, Expr> out;
        for (const auto& [a, c] : coeffs_) {
            if (!bxi.leq(a)) continue;
            double fac = 1.0;
            std::vector<int> rest(n_);
            for (int i = 0; i < n_; ++i) {
                for (int k = 0; k < bxi[i]; ++k) fac *= double(a[i] - k);
                rest[i] = a[i] - bxi[i];
            }
            Expr cd = diff_multi(c, std::span<const int>(ax.idx));
            if (is_zero(cd)) continue;
            Expr scaled = fac == 1.0 ? cd : make_prod({make_const(fac), cd});
            MultiIndex target{std::vector<int>(rest)};
            auto it = out.find(target);
            if (it == out.end())
                out.emplace(std::move(target), std::move(scaled));
            else
                it->second = make_sum({it->second, scaled});
        }
        return SymbolFamily(n_, std::move(out));
    }

    SymbolFamily principal_part() const {
        std::map<MultiIndex, Expr> out;
        for (const auto& [a, c] : coeffs_)
            if (a.order() == m_) out.emplace(a, c);
        return SymbolFamily(n_, std::move(out));
    }

    /// xi -> -xi in the polynomial part (sign flip on odd |a| monomials).
    SymbolFamily negate_xi() const {
        std::map<MultiIndex, Expr> out;
        for (const auto& [a, c] : coeffs_) {
            if (a.order() % 2 == 0)
                out.emplace(a, c);
            else
                out.emplace(a, make_prod({make_const(-1.0), c}));
        }
        return SymbolFamily(n_, std::move(out));
    }

    SymbolFamily scaled(Complex z) const {
        if (z == Complex(1.0, 0.0)) return *this;
        std::map<MultiIndex, Expr> out;
        for (const auto& [a, c] : coeffs_)
            out.emplace(a, make_prod({make_const(z), c}));
        return SymbolFamily(n_, std::move(out));
    }

    SymbolFamily plus(const SymbolFamily& o) const {
        std::map<MultiIndex, Expr> out = coeffs_;
        for (const auto& [a, c] : o.coeffs_) {
            auto it = out.find(a);
            if (it == out.end())
                out.emplace(a, c);
            else
                it->second = make_sum({it->second, c});
        }
        return SymbolFamily(n_, std::move(out));
    }

    SymbolFamily minus(const SymbolFamily& o) const { return plus(o.scaled(-1.0)); }

    /// Formal transpose under the bilinear pairing int (Pu) v = int u (tP v):
    ///   tP(x,eta) = sum_{|s|<=m} ((-1)^{|s|}/s!) (d_xi^s D_x^s P)(x,-eta),
    /// D_x = -i d_x. The -eta substitution acts on the polynomial part.
    SymbolFamily transpose() const {
        SymbolFamily acc(n_, {});
        for (const auto& s : enumerate_multi_indices(n_, m_)) {
            SymbolFamily d = derivative(s, s);
            if (d.empty()) continue;
            // (-1)^{|s|} (-i)^{|s|} / s! = i^{|s|} / s!
            Complex fac{1.0, 0.0};
            for (int k = 0; k < s.order(); ++k) fac *= Complex(0.0, 1.0);
            acc = acc.plus(d.scaled(fac / s.factorial()));
        }
        return acc.negate_xi();
    }

    /// The coefficient polynomial as an Expr in x for numeric xi.
    Expr at_xi(std::span<const double> xi) const {
        std::vector<Expr> terms;
        for (const auto& [a, c] : coeffs_) {
            double mono = 1.0;
            for (int i = 0; i < n_; ++i)
                for (int k = 0; k < a[i]; ++k) mono *= xi[i];
            if (mono == 0.0) continue;
            terms.push_back(mono == 1.0 ? c : make_prod({make_const(mono), c}));
        }
        return make_sum(std::move(terms));
    }

    /// h with P(x,D)(g e^{-i xi x}) = e^{-i xi x} h, via
    /// h = sum_{|b|<=m} (1/b!) (d_xi^b P)(x,-xi) D_x^b g. The xi-derivative is
    /// the symbol derivative evaluated at -xi, not a composite derivative.
    Expr apply_to_modulated(const Expr& g, std::span<const double> xi) const {
        std::vector<double> neg(xi.begin(), xi.end());
        for (auto& v : neg) v = -v;
        std::vector<Expr> terms;
        for (const auto& b : enumerate_multi_indices(n_, m_)) {
            SymbolFamily db = derivative(MultiIndex::zero(n_), b);
            if (db.empty()) continue;
            Expr coeff = db.at_xi(neg);
            if (is_zero(coeff)) continue;
            Expr dg = diff_multi(g, std::span<const int>(b.idx));
            if (is_zero(dg)) continue;
            Complex fac{1.0, 0.0};
            for (int k = 0; k < b.order(); ++k) fac *= Complex(0.0, -1.0); // D_x^b
            fac /= b.factorial();
            terms.push_back(make_prod({make_const(fac), coeff, dg}));
        }
        return make_sum(std::move(terms));
    }

    /// P(x,D)u = sum a_alpha D^alpha u.
    Expr apply(const Expr& u) const {
        std::vector<Expr> terms;
        for (const auto& [a, c] : coeffs_) {
            Expr du = diff_multi(u, std::span<const int>(a.idx));
            if (is_zero(du)) continue;
            Complex fac{1.0, 0.0};
            for (int k = 0; k < a.order(); ++k) fac *= Complex(0.0, -1.0);
            terms.push_back(make_prod({make_const(fac), c, du}));
        }
        return make_sum(std::move(terms));
    }

    nlohmann::json to_json() const {
        nlohmann::json coeffs = nlohmann::json::array();
        for (const auto& [a, c] : coeffs_)
            coeffs.push_back({{"alpha", a.idx}, {"expr", to_dsl(c)}});
        return {{"n", n_}, {"m", m_}, {"coeffs", coeffs}};
    }

    static SymbolFamily from_json(const nlohmann::json& j, const ParseContext& base_ctx) {
        const int n = j.at("n").get<int>();
        ParseContext ctx = base_ctx;
        ctx.dimension = n;
        std::map<MultiIndex, Expr> coeffs;
        for (const auto& item : j.at("coeffs")) {
            MultiIndex a{item.at("alpha").get<std::vector<int>>()};
            Expr c = parse(item.at("expr").get<std::string>(), ctx);
            auto it = coeffs.find(a);
            if (it == coeffs.end())
                coeffs.emplace(std::move(a), std::move(c));
            else
                it->second = make_sum({it->second, c});
        }
        SymbolFamily s(n, std::move(coeffs));
        if (s.empty()) throw Error("symbol has no nonzero coefficients");
        return s;
    }

private:
    int n_ = 1;
    int m_ = 0;
    std::map<MultiIndex, Expr> coeffs_;
};

} // namespace microloc
