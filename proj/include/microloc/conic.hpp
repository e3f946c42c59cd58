#pragma once

// Sampled conic regions K x Gamma: a base box, a finite set of unit
// directions, and a log-spaced radius list, plus the per-eps slow-scale
// radius cutoff |xi| >= r_eps.

#include <cmath>
#include <span>
#include <vector>

#include "microloc/errors.hpp"

namespace microloc {

struct Box {
    std::vector<std::array<double, 2>> bounds; // [lo, hi] per dimension

    int dim() const { return int(bounds.size()); }

    /// Uniform sample grid with `per_dim` points per dimension (inclusive ends).
    std::vector<std::vector<double>> sample_grid(int per_dim) const {
        std::vector<std::vector<double>> pts{{}};
        for (const auto& [lo, hi] : bounds) {
            std::vector<std::vector<double>> next;
            for (const auto& p : pts) {
                for (int i = 0; i < per_dim; ++i) {
                    const double t = per_dim == 1 ? 0.5 : double(i) / (per_dim - 1);
                    auto q = p;
                    q.push_back(lo + t * (hi - lo));
                    next.push_back(std::move(q));
                }
            }
            pts = std::move(next);
        }
        return pts;
    }
};

/// Per-eps lower radius cutoff. The default max(2, log(1/eps)) is a slow
/// scale net; a constant cutoff covers fixed-radius runs.
struct RadiusNet {
    enum class Kind { SlowScaleDefault, Constant } kind = Kind::SlowScaleDefault;
    double constant = 2.0;

    static RadiusNet slow_scale_default() { return RadiusNet{}; }
    static RadiusNet fixed(double c) { return RadiusNet{Kind::Constant, c}; }

    double operator()(double eps) const {
        if (kind == Kind::Constant) return constant;
        return std::max(2.0, std::log(1.0 / eps));
    }
};

inline std::vector<double> log_spaced(double lo, double hi, int count) {
    if (!(lo > 0) || !(hi > lo) || count < 2) throw Error("bad log-spaced radius range");
    std::vector<double> r(count);
    for (int i = 0; i < count; ++i)
        r[i] = lo * std::pow(hi / lo, double(i) / (count - 1));
    return r;
}

struct ConicRegion {
    Box base;                                   // the compact set K
    std::vector<std::vector<double>> directions; // unit vectors
    std::vector<double> radii;                  // increasing
    RadiusNet radius_net;                       // per-eps cutoff

    int dim() const { return base.dim(); }

    static std::vector<double> unit(std::vector<double> v) {
        double n2 = 0;
        for (double c : v) n2 += c * c;
        if (!(n2 > 0)) throw Error("zero direction");
        const double n = std::sqrt(n2);
        for (auto& c : v) c /= n;
        return v;
    }

    /// Both directions of the line in 1-D; uniformly spaced angles in 2-D.
    static std::vector<std::vector<double>> sphere(int n, int count) {
        std::vector<std::vector<double>> dirs;
        if (n == 1) {
            dirs = {{1.0}, {-1.0}};
        } else if (n == 2) {
            for (int i = 0; i < count; ++i) {
                const double th = 2.0 * M_PI * i / count;
                dirs.push_back({std::cos(th), std::sin(th)});
            }
        } else {
            throw Error("direction sphere sampling implemented for n <= 2");
        }
        return dirs;
    }

    /// Angular cone around a center direction (2-D) or a one/two-sided ray set (1-D).
    static std::vector<std::vector<double>> cone(std::vector<double> center,
                                                 double half_width, int count) {
        center = unit(std::move(center));
        if (center.size() == 1) return {center};
        if (center.size() != 2) throw Error("cone sampling implemented for n <= 2");
        std::vector<std::vector<double>> dirs;
        const double th0 = std::atan2(center[1], center[0]);
        for (int i = 0; i < count; ++i) {
            const double t = count == 1 ? 0.0 : -1.0 + 2.0 * double(i) / (count - 1);
            const double th = th0 + t * half_width;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
        return dirs;
    }

    static ConicRegion make(Box base, std::vector<std::vector<double>> directions,
                            double r_min, double r_max, int r_count,
                            RadiusNet rn = RadiusNet::slow_scale_default()) {
        ConicRegion c;
        c.base = std::move(base);
        for (auto& d : directions) c.directions.push_back(unit(std::move(d)));
        c.radii = log_spaced(r_min, r_max, r_count);
        c.radius_net = rn;
        return c;
    }
};

} // namespace microloc
