#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "microloc/errors.hpp"

namespace microloc {

struct GaussRule {
    std::vector<double> nodes;   // on (-1,1)
    std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_n. Cached per order.
inline const GaussRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::unordered_map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

/// Composite Gauss-Legendre over [a,b] with `panels` equal panels of `order` points each.
template <class F>
auto integrate_1d(F&& f, double a, double b, int panels = 8, int order = 32)
    -> decltype(f(0.0)) {
    const GaussRule& g = gauss_legendre(order);
    using R = decltype(f(0.0));
    R total{};
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double c = lo + 0.5 * h, s = 0.5 * h;
        R acc{};
        for (int i = 0; i < order; ++i) acc += g.weights[i] * f(c + s * g.nodes[i]);
        total += s * acc;
    }
    return total;
}

/// Panel count resolving e^{-i xi x} oscillation on [a,b] at 32-point panels.
inline int oscillatory_panels(double a, double b, double max_abs_xi) {
    const double cycles = std::abs(max_abs_xi) * (b - a) / (2.0 * M_PI);
    int p = static_cast<int>(std::ceil(cycles / 3.0)) + 8;
    return p;
}

/// Integrate with one refinement step; throws QuadratureError if the two levels
/// disagree beyond `tol` relative to scale. extra_panels absorbs non-oscillatory
/// fine structure (e.g. boundary layers of high cutoff derivatives).
template <class F>
std::complex<double> integrate_checked(F&& f, double a, double b, double max_abs_xi,
                                       double tol = 1e-9, int extra_panels = 40) {
    const int p = oscillatory_panels(a, b, max_abs_xi) + extra_panels;
    const std::complex<double> v1 = integrate_1d(f, a, b, p, 32);
    const std::complex<double> v2 = integrate_1d(f, a, b, 2 * p, 32);
    const double scale = 1.0 + std::abs(v2);
    if (std::abs(v1 - v2) > tol * scale)
        throw QuadratureError("quadrature did not converge: |dv|=" +
                              std::to_string(std::abs(v1 - v2)));
    return v2;
}

} // namespace microloc
