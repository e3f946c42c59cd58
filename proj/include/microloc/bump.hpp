#pragma once

// The fixed smooth compactly supported template used everywhere a cutoff or
// mollifier is needed:  psi(t) = exp(-1/(1-t^2)) on (-1,1), 0 outside.
// Derivatives have the closed form  psi^(k)(t) = psi(t) * N_k(t) / (1-t^2)^(2k)
// with polynomials N_k given by
//   N_0 = 1,  N_{k+1} = (1-t^2) * [ N_k'(t)(1-t^2) + 4k t N_k(t) ] - 2t N_k(t).

#include <algorithm>
#include <cmath>
#include <mutex>
#include <vector>

#include "microloc/quadrature.hpp"

namespace microloc {
namespace bump_detail {

using Poly = std::vector<double>; // ascending coefficients

inline Poly poly_derivative(const Poly& p) {
    Poly d;
    if (p.size() <= 1) return {0.0};
    d.resize(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * double(i);
    return d;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

inline Poly poly_add(Poly a, const Poly& b) {
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
}

inline double poly_eval(const Poly& p, double t) {
    double v = 0;
    for (std::size_t i = p.size(); i-- > 0;) v = v * t + p[i];
    return v;
}

/// N_k polynomial, cached.
inline const Poly& deriv_poly(int k) {
    static std::mutex mu;
    static std::vector<Poly> cache{{1.0}};
    std::lock_guard<std::mutex> lock(mu);
    while (int(cache.size()) <= k) {
        const int j = int(cache.size()) - 1; // have N_j, build N_{j+1}
        const Poly& nj = cache[j];
        const Poly one_minus_t2{1.0, 0.0, -1.0};
        Poly inner = poly_mul(poly_derivative(nj), one_minus_t2);          // N'(1-t^2)
        inner = poly_add(inner, poly_mul(Poly{0.0, 4.0 * j}, nj));         // + 4j t N
        Poly next = poly_mul(one_minus_t2, inner);                         // *(1-t^2)
        next = poly_add(next, poly_mul(Poly{0.0, -2.0}, nj));              // - 2t N
        cache.push_back(std::move(next));
    }
    return cache[k];
}

} // namespace bump_detail

/// k-th derivative of the template at t (0 outside (-1,1)).
inline double bump_template_deriv(int k, double t) {
    const double u = 1.0 - t * t;
    if (u <= 0.0) return 0.0;
    const double base = std::exp(-1.0 / u);
    if (base == 0.0) return 0.0;
    if (k == 0) return base;
    const double nk = bump_detail::poly_eval(bump_detail::deriv_poly(k), t);
    return base * nk / std::pow(u, 2 * k);
}

inline double bump_template(double t) { return bump_template_deriv(0, t); }

/// Value at the peak, exp(-1).
inline double bump_template_peak() {
    static const double v = std::exp(-1.0);
    return v;
}

/// Integral of the template over (-1,1).
inline double bump_template_integral();

namespace bump_detail {

struct PrimitiveTable {
    static constexpr int panels = 256;
    std::vector<double> cum; // cumulative integral at panel boundaries, cum[0]=0
    PrimitiveTable() {
        cum.resize(panels + 1, 0.0);
        const double h = 2.0 / panels;
        for (int p = 0; p < panels; ++p) {
            const double lo = -1.0 + p * h;
            cum[p + 1] =
                cum[p] + integrate_1d([](double s) { return bump_template(s); }, lo, lo + h, 1, 32);
        }
    }
};

inline const PrimitiveTable& primitive_table() {
    static const PrimitiveTable t;
    return t;
}

} // namespace bump_detail

inline double bump_template_integral() {
    return bump_detail::primitive_table().cum.back();
}

/// Primitive of the integral-one mollifier: Phi(t) = (1/I) * int_{-1}^{t} psi,
/// so Phi(-1)=0, Phi(0)=1/2, Phi(1)=1.
inline double mollifier_primitive(double t) {
    if (t <= -1.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const auto& tab = bump_detail::primitive_table();
    const double h = 2.0 / tab.panels;
    int p = static_cast<int>((t + 1.0) / h);
    p = std::clamp(p, 0, tab.panels - 1);
    const double lo = -1.0 + p * h;
    const double part =
        integrate_1d([](double s) { return bump_template(s); }, lo, t, 1, 32);
    return (tab.cum[p] + part) / bump_template_integral();
}

/// sup over t of |psi^(k)(t)|, by dense scan (test/report helper).
inline double bump_template_deriv_sup(int k, int scan_points = 20000) {
    double s = 0;
    for (int i = 0; i <= scan_points; ++i) {
        const double t = -1.0 + 2.0 * i / scan_points;
        s = std::max(s, std::abs(bump_template_deriv(k, t)));
    }
    return s;
}

} // namespace microloc
