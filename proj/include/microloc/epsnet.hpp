#pragma once

// Arithmetic and asymptotic classification of eps-parametrized numeric nets.
// All verdicts here are numerical statements about the sampled smallest-eps
// tail of a finite grid, not proofs about the eps->0 limit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "microloc/errors.hpp"
#include "microloc/fit.hpp"

namespace microloc {

enum class GridKind { Dyadic, ReciprocalIntegers, ReciprocalWithMidpoints, Custom };

inline const char* to_string(GridKind k) {
    switch (k) {
        case GridKind::Dyadic: return "dyadic";
        case GridKind::ReciprocalIntegers: return "reciprocal-integers";
        case GridKind::ReciprocalWithMidpoints: return "reciprocal-with-midpoints";
        default: return "custom";
    }
}

/// Strictly decreasing eps values in (0,1], at least 8 of them.
class EpsGrid {
public:
    static EpsGrid dyadic(int j_min = 1, int j_max = 40) {
        std::vector<double> v;
        for (int j = j_min; j <= j_max; ++j) v.push_back(std::ldexp(1.0, -j));
        return EpsGrid(std::move(v), GridKind::Dyadic);
    }

    /// 1/k for k = k_min..k_max.
    static EpsGrid reciprocal_integers(int k_min, int k_max) {
        std::vector<double> v;
        for (int k = k_min; k <= k_max; ++k) v.push_back(1.0 / k);
        return EpsGrid(std::move(v), GridKind::ReciprocalIntegers);
    }

    /// {1/k} together with the midpoints 2/(2k+1); 2/(2k+1) sits between
    /// 1/(k+1) and 1/k, so 1/eps is an integer exactly on the 1/k points.
    static EpsGrid reciprocal_with_midpoints(int k_min, int k_max) {
        std::vector<double> v;
        for (int k = k_min; k <= k_max; ++k) {
            v.push_back(1.0 / k);
            v.push_back(2.0 / (2 * k + 1));
        }
        return EpsGrid(std::move(v), GridKind::ReciprocalWithMidpoints);
    }

    static EpsGrid custom(std::vector<double> values) {
        return EpsGrid(std::move(values), GridKind::Custom);
    }

    GridKind kind() const { return kind_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Index of a grid point equal to eps up to 1e-12 relative; throws otherwise.
    std::size_t index_of(double eps) const {
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (std::abs(values_[i] - eps) <= 1e-12 * values_[i]) return i;
        throw EvalError("eps value " + std::to_string(eps) + " is not a grid point");
    }

    /// Indices of the smallest-eps tail: the last ceil(fraction*size) entries,
    /// never fewer than 5 (or the whole grid if it is that small).
    std::vector<std::size_t> tail_indices(double tail_fraction) const {
        if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
            throw Error("tail_fraction must be in (0,1]");
        std::size_t n = static_cast<std::size_t>(std::ceil(tail_fraction * double(size())));
        n = std::max<std::size_t>(n, 5);
        n = std::min(n, size());
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = size() - n + i;
        return idx;
    }

    bool operator==(const EpsGrid& o) const { return values_ == o.values_; }

private:
    EpsGrid(std::vector<double> v, GridKind k) : values_(std::move(v)), kind_(k) {
        if (values_.size() < 8) throw Error("eps grid needs at least 8 values");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!(values_[i] > 0.0) || values_[i] > 1.0)
                throw Error("eps grid values must lie in (0,1]");
            if (i > 0 && !(values_[i] < values_[i - 1]))
                throw Error("eps grid must be strictly decreasing");
        }
    }

    std::vector<double> values_;
    GridKind kind_;
};

/// One complex sample per grid point; all samples finite.
class EpsNet {
public:
    EpsNet(EpsGrid grid, std::vector<std::complex<double>> samples)
        : grid_(std::move(grid)), samples_(std::move(samples)) {
        if (samples_.size() != grid_.size())
            throw Error("sample count does not match grid size");
        for (const auto& s : samples_)
            if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
                throw Error("net samples must be finite");
    }

    static EpsNet from_function(const EpsGrid& g,
                                const std::function<std::complex<double>(double)>& f) {
        std::vector<std::complex<double>> s;
        s.reserve(g.size());
        for (double e : g.values()) s.push_back(f(e));
        return EpsNet(g, std::move(s));
    }

    const EpsGrid& grid() const { return grid_; }
    const std::vector<std::complex<double>>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    std::complex<double> operator[](std::size_t i) const { return samples_[i]; }
    std::complex<double> at_eps(double eps) const { return samples_[grid_.index_of(eps)]; }

    EpsNet map(const std::function<std::complex<double>(std::complex<double>)>& f) const {
        std::vector<std::complex<double>> s;
        s.reserve(samples_.size());
        for (const auto& v : samples_) s.push_back(f(v));
        return EpsNet(grid_, std::move(s));
    }

private:
    EpsGrid grid_;
    std::vector<std::complex<double>> samples_;
};

struct OrderEstimate {
    double kappa_hat = 0.0;  // +inf means null-like on the tail
    double fit_quality = 1.0;
    std::size_t window_begin = 0; // grid index where the fit window starts
    std::size_t window_size = 0;
    std::size_t zero_count = 0;
};

/// Fitted asymptotic order: least-squares slope of log|r_eps| against log(eps)
/// over the smallest-eps tail. Exact-zero samples are excluded and counted;
/// a majority-zero tail yields kappa_hat = +inf.
inline OrderEstimate estimate_order(const EpsNet& net, double tail_fraction = 0.5) {
    if (net.size() < 8) throw Error("estimate_order needs at least 8 samples");
    const auto tail = net.grid().tail_indices(tail_fraction);

    OrderEstimate est;
    est.window_begin = tail.front();
    est.window_size = tail.size();

    std::vector<double> lx, ly;
    for (std::size_t i : tail) {
        const double a = std::abs(net[i]);
        if (a == 0.0) {
            ++est.zero_count;
            continue;
        }
        lx.push_back(std::log(net.grid()[i]));
        ly.push_back(std::log(a));
    }
    if (2 * est.zero_count > tail.size()) {
        est.kappa_hat = std::numeric_limits<double>::infinity();
        est.fit_quality = 1.0;
        return est;
    }
    if (lx.size() < 5)
        throw DegenerateFitError("fewer than 5 usable tail points for order fit",
                                 est.zero_count);
    const LineFit f = fit_line(lx, ly);
    est.kappa_hat = f.slope;
    est.fit_quality = f.r2;
    return est;
}

enum class NetClass { Null, SlowScale, Moderate, ImmoderateSuspect };

inline const char* to_string(NetClass c) {
    switch (c) {
        case NetClass::Null: return "null";
        case NetClass::SlowScale: return "slow-scale";
        case NetClass::Moderate: return "moderate";
        default: return "immoderate-suspect";
    }
}

namespace detail {

/// Local slopes between consecutive usable tail points, in tail order.
inline std::vector<double> local_slopes(const EpsNet& net, const std::vector<std::size_t>& tail) {
    std::vector<double> s;
    double px = 0, py = 0;
    bool have = false;
    for (std::size_t i : tail) {
        const double a = std::abs(net[i]);
        if (a == 0.0) continue;
        const double x = std::log(net.grid()[i]);
        const double y = std::log(a);
        if (have && x != px) s.push_back((y - py) / (x - px));
        px = x;
        py = y;
        have = true;
    }
    return s;
}

} // namespace detail

/// Numerical verdict on the sampled tail (not a proof of the asymptotic class):
///  - null: majority-zero tail, or order > 20 with monotone decay;
///  - slow-scale: kappa_hat >= -slow_scale_tol;
///  - immoderate-suspect: local log-log slopes keep dropping across the tail
///    (super-polynomial growth) and either no finite fit would put the order
///    above -1/slow_scale_tol or the linear fit fails outright (quality < 0.5);
///  - moderate otherwise.
inline NetClass classify_net(const EpsNet& net, double slow_scale_tol = 0.1,
                             double tail_fraction = 0.5) {
    const OrderEstimate est = estimate_order(net, tail_fraction);
    const auto tail = net.grid().tail_indices(tail_fraction);
    if (std::isinf(est.kappa_hat) && est.kappa_hat > 0) return NetClass::Null;
    if (est.kappa_hat > 20.0) {
        bool monotone = true;
        for (std::size_t k = 1; k < tail.size(); ++k)
            if (std::abs(net[tail[k]]) > std::abs(net[tail[k - 1]])) monotone = false;
        if (monotone) return NetClass::Null;
    }
    if (est.kappa_hat < -slow_scale_tol &&
        (est.kappa_hat < -1.0 / slow_scale_tol || est.fit_quality < 0.5)) {
        const auto ls = detail::local_slopes(net, tail);
        bool dropping = ls.size() >= 2;
        for (std::size_t k = 1; k < ls.size(); ++k)
            if (ls[k] > ls[k - 1] + 1e-9) dropping = false;
        if (dropping) return NetClass::ImmoderateSuspect;
    }
    if (est.kappa_hat >= -slow_scale_tol) return NetClass::SlowScale;
    return NetClass::Moderate;
}

inline constexpr double kMachineZero = 1e-300;

struct InvertibilityVerdict {
    bool invertible = false;
    int p_hat = -1;                      // smallest m with |r_eps| >= eps^m on the tail
    std::vector<double> zero_witnesses;  // every grid eps with |r_eps| < machine zero
};

/// Invertible iff no tail sample is (machine-)zero and some finite integer m
/// has |r_eps| >= eps^m across the tail. Witnesses list every zero grid point.
inline InvertibilityVerdict check_invertible(const EpsNet& net, double tail_fraction = 0.5) {
    InvertibilityVerdict v;
    for (std::size_t i = 0; i < net.size(); ++i)
        if (std::abs(net[i]) < kMachineZero) v.zero_witnesses.push_back(net.grid()[i]);

    const auto tail = net.grid().tail_indices(tail_fraction);
    for (std::size_t i : tail)
        if (std::abs(net[i]) < kMachineZero) return v; // not invertible

    constexpr int kMaxOrder = 64;
    for (int m = 0; m <= kMaxOrder; ++m) {
        bool ok = true;
        for (std::size_t i : tail) {
            const double bound = std::pow(net.grid()[i], m);
            if (std::abs(net[i]) < bound * (1.0 - 1e-9)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            v.invertible = true;
            v.p_hat = m;
            return v;
        }
    }
    return v; // no finite order up to kMaxOrder: treated as not invertible
}

// ---- CSV interchange: one row per grid point, "eps","re,im" ----

inline void write_csv(const EpsNet& net, std::ostream& os) {
    os << "eps,value\n";
    char buf[96];
    for (std::size_t i = 0; i < net.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,\"%.17g,%.17g\"", net.grid()[i],
                      net[i].real(), net[i].imag());
        os << buf << '\n';
    }
}

inline EpsNet read_csv(std::istream& is) {
    std::string line;
    std::vector<double> eps;
    std::vector<std::complex<double>> vals;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first && line.rfind("eps,", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        std::string t = line;
        t.erase(std::remove(t.begin(), t.end(), '"'), t.end());
        std::replace(t.begin(), t.end(), ',', ' ');
        std::istringstream ss(t);
        double e, re, im = 0.0;
        if (!(ss >> e >> re)) throw Error("bad CSV net row: " + line);
        ss >> im;
        eps.push_back(e);
        vals.push_back({re, im});
    }
    return EpsNet(EpsGrid::custom(std::move(eps)), std::move(vals));
}

} // namespace microloc
