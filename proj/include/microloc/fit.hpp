#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace microloc {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0; // coefficient of determination
    std::size_t count = 0;
};

/// Least-squares line through (x_i, y_i). Sums accumulate in index order so
/// repeated runs are bit-identical. With fewer than two points the slope is 0.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    LineFit f;
    f.count = x.size();
    if (x.size() < 2) return f;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / double(x.size());
    const double my = sy / double(x.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    if (ss_tot < 1e-300) {
        f.r2 = ss_res < 1e-300 ? 1.0 : 0.0;
    } else {
        f.r2 = 1.0 - ss_res / ss_tot;
        if (f.r2 < 0) f.r2 = 0;
        if (f.r2 > 1) f.r2 = 1;
    }
    return f;
}

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    return fit_line(std::span<const double>(x), std::span<const double>(y));
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace microloc
