#pragma once

// The conic scanner: partitions the direction sphere into overlapping wedges
// and classifies each one, estimating the union of conic regions where the
// hypoellipticity estimates can hold. Included via conditions.hpp.

#include "microloc/conditions_principal.hpp"

namespace microloc {

namespace cond_detail {

/// Full sup-ratio profiles sup_{x,dirs} |dP| / |P| per (eps, radius), plus the
/// median over eps of the full-band radial slopes.
struct WedgeRatioFit {
    double median_slope = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> profiles; // [eps][radius]
    bool any = false;
};

inline WedgeRatioFit wedge_ratio_fit(const CoefficientTable& tabD,
                                     const CoefficientTable& tabP,
                                     const std::vector<std::vector<double>>& dirs,
                                     const SampledRegion& sr,
                                     const std::vector<double>& radii) {
    WedgeRatioFit out;
    out.profiles.assign(sr.eps.size(), std::vector<double>(radii.size(), 0.0));
    std::vector<double> slopes;
    for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
        auto& prof = out.profiles[ei];
        for (std::size_t ri = 0; ri < radii.size(); ++ri) {
            double s = 0;
            for (const auto& om : dirs) {
                std::vector<double> xiv(om.size());
                for (std::size_t c = 0; c < om.size(); ++c) xiv[c] = radii[ri] * om[c];
                for (std::size_t x_ = 0; x_ < sr.xs.size(); ++x_) {
                    const double ap = std::abs(tabP.eval(x_, ei, xiv));
                    if (ap < kMachineZero) continue;
                    s = std::max(s, std::abs(tabD.eval(x_, ei, xiv)) / ap);
                }
            }
            prof[ri] = s;
        }
        const double sl = full_band_slope(radii, prof);
        if (!std::isnan(sl)) {
            slopes.push_back(sl);
            out.any = true;
        }
    }
    if (!slopes.empty()) out.median_slope = median(slopes);
    return out;
}

/// Compensated prefactor net sup_r prof(r) (1+r)^{comp} per eps.
inline std::vector<double> compensated_wedge_net(
    const std::vector<std::vector<double>>& profiles, const std::vector<double>& radii,
    double comp) {
    std::vector<double> net(profiles.size(), 0.0);
    for (std::size_t ei = 0; ei < profiles.size(); ++ei)
        for (std::size_t ri = 0; ri < radii.size(); ++ri)
            net[ei] = std::max(net[ei],
                               profiles[ei][ri] * std::pow(1.0 + radii[ri], comp));
    return net;
}

} // namespace cond_detail

/// Scans the direction sphere (n <= 2) in wedges with a small angular overlap
/// margin, so a reported pass-cone is open. mode "mh" applies the
/// fitted-exponent rule
///   fail iff sup b_m (1+|xi|)^m / |P| >= zero_ratio        (sampled degeneracy)
///         or delta_hat > delta_tol                         (x-ratio grows radially)
///         or rho_hat < max(rho_min, delta_hat + sep)       (no xi-decay rate)
///         or a fitted-exponent prefactor net is not slow scale;
/// mode "st" runs the principal-part conditions per wedge.
inline ConeScanResult scan_Mg(const SymbolFamily& P, const Box& base,
                              int direction_count, const EpsGrid& grid,
                              const std::string& mode = "mh",
                              const ScanParams& prm = {}) {
    using namespace cond_detail;
    const int n = P.dimension();
    if (n > 2) throw Error("scan_Mg is implemented for n <= 2");
    if (direction_count < 16 && n == 2)
        throw Error("scan_Mg needs at least 16 directions");
    if (mode != "mh" && mode != "st") throw Error("scan mode must be 'mh' or 'st'");

    ConeScanResult result;
    result.mode = mode;
    const auto radii = log_spaced(prm.r_min, prm.r_max, prm.radii_count);

    // wedge geometry
    struct Wedge {
        double angle;
        std::vector<std::vector<double>> dirs;
    };
    std::vector<Wedge> wedges;
    if (n == 1) {
        wedges.push_back({0.0, {{1.0}}});
        wedges.push_back({M_PI, {{-1.0}}});
    } else {
        const double half = M_PI / direction_count;
        for (int j = 0; j < direction_count; ++j) {
            const double th = 2.0 * M_PI * j / direction_count;
            Wedge w;
            w.angle = th;
            for (double off : {-(1.0 + prm.margin) * half, 0.0, (1.0 + prm.margin) * half})
                w.dirs.push_back({std::cos(th + off), std::sin(th + off)});
            wedges.push_back(std::move(w));
        }
    }

    CheckParams cp;
    cp.x_samples = prm.x_samples;
    cp.slow_scale_tol = prm.slow_scale_tol;
    cp.tail_fraction = prm.tail_fraction;

    if (mode == "st") {
        result.wedges.resize(wedges.size());
        parallel_for(
            wedges.size(),
            [&](std::size_t j) {
                const auto& w = wedges[j];
                ConicRegion region;
                region.base = base;
                region.directions = w.dirs;
                region.radii = radii;
                region.radius_net = RadiusNet::slow_scale_default();
                const PrincipalReport pr = check_principal(P, region, grid, 2, cp);
                WedgeVerdict v;
                v.angle = w.angle;
                v.direction = w.dirs[w.dirs.size() / 2];
                v.pass = pr.pass;
                v.worst_ratio = pr.st1.fitted.count("s_sup") ? pr.st1.fitted.at("s_sup") : 0;
                if (!pr.pass)
                    v.why = !pr.st1.pass ? "st1" : (!pr.st2.pass ? "st2" : "inv");
                result.wedges[j] = std::move(v);
            },
            prm.threads);
    } else {
        // shared (x, eps) tables
        const ConicRegion whole = ConicRegion::make(
            base, ConicRegion::sphere(n, n == 1 ? 2 : direction_count), prm.r_min,
            prm.r_max, prm.radii_count, RadiusNet::fixed(prm.r_min));
        const SampledRegion sr(whole, grid, prm.x_samples);
        const CoefficientTable tabP(P, sr.xs, sr.eps);
        const SymbolFamily Pm = P.principal_part();
        const int m = P.degree();

        // b_m(x, eps)
        std::vector<std::vector<double>> bm(sr.xs.size(),
                                            std::vector<double>(sr.eps.size(), 0.0));
        for (std::size_t x_ = 0; x_ < sr.xs.size(); ++x_)
            for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
                EvalContext ctx(sr.xs[x_], sr.eps[ei]);
                double s = 0;
                for (const auto& [a, c] : Pm.coefficients()) s += std::abs(ctx.eval(c));
                bm[x_][ei] = s;
            }

        // derivative tables, shared across wedges
        std::vector<std::pair<int, CoefficientTable>> xi_tabs; // (|beta|, table)
        for (const auto& b : enumerate_multi_indices(n, m)) {
            if (b.order() == 0) continue;
            SymbolFamily d = P.derivative(MultiIndex::zero(n), b);
            if (d.empty()) continue;
            xi_tabs.emplace_back(b.order(), CoefficientTable(d, sr.xs, sr.eps));
        }
        std::vector<CoefficientTable> x_tabs;
        for (int i = 0; i < n; ++i) {
            SymbolFamily d = P.derivative(MultiIndex::unit(n, i), MultiIndex::zero(n));
            if (d.empty()) continue;
            x_tabs.emplace_back(d, sr.xs, sr.eps);
        }

        result.wedges.resize(wedges.size());
        parallel_for(
            wedges.size(),
            [&](std::size_t j) {
                const auto& w = wedges[j];
                WedgeVerdict v;
                v.angle = w.angle;
                v.direction = w.dirs[w.dirs.size() / 2];

                // sampled-degeneracy diagnostic and |P| slope fits
                double zr = 0;
                double m0_hat = std::numeric_limits<double>::infinity();
                std::vector<double> L(sr.eps.size(),
                                      std::numeric_limits<double>::infinity());
                for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
                    for (const auto& om : w.dirs) {
                        for (std::size_t x_ = 0; x_ < sr.xs.size(); ++x_) {
                            std::vector<double> prof(radii.size());
                            for (std::size_t ri = 0; ri < radii.size(); ++ri) {
                                std::vector<double> xiv(om.size());
                                for (std::size_t c = 0; c < om.size(); ++c)
                                    xiv[c] = radii[ri] * om[c];
                                const double ap = std::abs(tabP.eval(x_, ei, xiv));
                                prof[ri] = ap;
                                if (bm[x_][ei] >= kMachineZero) {
                                    const double num =
                                        bm[x_][ei] * std::pow(1.0 + radii[ri], m);
                                    zr = std::max(
                                        zr, ap < kMachineZero
                                                ? std::numeric_limits<double>::infinity()
                                                : num / ap);
                                }
                            }
                            const double sl = upper_band_slope(radii, prof);
                            if (!std::isnan(sl)) m0_hat = std::min(m0_hat, sl);
                        }
                    }
                }
                v.m0_hat = std::isinf(m0_hat) ? 0.0 : m0_hat;
                v.worst_ratio = zr;

                // fitted exponents
                double rho_hat = std::numeric_limits<double>::infinity();
                bool any_xi = false;
                std::vector<std::pair<int, WedgeRatioFit>> xi_fits;
                for (const auto& [order, tab] : xi_tabs) {
                    WedgeRatioFit f = wedge_ratio_fit(tab, tabP, w.dirs, sr, radii);
                    if (!f.any) continue;
                    any_xi = true;
                    rho_hat = std::min(rho_hat,
                                       std::max(0.0, -f.median_slope / order));
                    xi_fits.emplace_back(order, std::move(f));
                }
                if (!any_xi) rho_hat = 1.0; // no xi-dependence sampled
                double delta_hat = 0.0;
                std::vector<WedgeRatioFit> x_fits;
                for (const auto& tab : x_tabs) {
                    WedgeRatioFit f = wedge_ratio_fit(tab, tabP, w.dirs, sr, radii);
                    if (!f.any) continue;
                    delta_hat = std::max(delta_hat, std::max(0.0, f.median_slope));
                    x_fits.push_back(std::move(f));
                }
                v.rho_hat = rho_hat;
                v.delta_hat = delta_hat;

                // L(eps) and q_hat at the fitted m0 (diagnostic)
                for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
                    for (const auto& om : w.dirs)
                        for (std::size_t ri = 0; ri < radii.size(); ++ri) {
                            std::vector<double> xiv(om.size());
                            for (std::size_t c = 0; c < om.size(); ++c)
                                xiv[c] = radii[ri] * om[c];
                            for (std::size_t x_ = 0; x_ < sr.xs.size(); ++x_)
                                L[ei] = std::min(
                                    L[ei], std::abs(tabP.eval(x_, ei, xiv)) *
                                               std::pow(1.0 + radii[ri], -v.m0_hat));
                        }
                    if (L[ei] > 0 && sr.eps[ei] < 1.0)
                        v.q_hat = std::max(v.q_hat,
                                           std::log(L[ei]) / std::log(sr.eps[ei]));
                }

                // slow-scale prefactor nets at the fitted exponents
                bool nets_ok = true;
                auto net_check = [&](const std::vector<double>& net) {
                    bool allzero = true;
                    for (double vn : net)
                        if (vn > 0) allzero = false;
                    if (allzero) return true;
                    const EpsNet en = make_net(grid, net);
                    const auto cls = classify_net(en, prm.slow_scale_tol,
                                                  prm.tail_fraction);
                    return cls == NetClass::SlowScale || cls == NetClass::Null;
                };
                for (const auto& [order, f] : xi_fits)
                    nets_ok = nets_ok && net_check(compensated_wedge_net(
                                             f.profiles, radii, rho_hat * order));
                for (const auto& f : x_fits)
                    nets_ok = nets_ok && net_check(compensated_wedge_net(
                                             f.profiles, radii, -delta_hat));

                if (zr >= prm.zero_ratio) {
                    v.pass = false;
                    v.why = "sampled degeneracy (b_m (1+|xi|)^m / |P| blew up)";
                } else if (delta_hat > prm.delta_tol) {
                    v.pass = false;
                    v.why = "x-derivative ratio grows radially (delta_hat too large)";
                } else if (rho_hat < std::max(prm.rho_min, delta_hat + prm.rho_delta_sep)) {
                    v.pass = false;
                    v.why = "no usable xi-decay rate (rho_hat too small)";
                } else if (!nets_ok) {
                    v.pass = false;
                    v.why = "ratio prefactor net not slow scale";
                } else {
                    v.pass = true;
                }
                result.wedges[j] = std::move(v);
            },
            prm.threads);
    }

    // pass intervals (2-D): union of covered angles of passing wedges
    if (n == 2) {
        const double half = M_PI / direction_count;
        std::vector<std::array<double, 2>> raw;
        for (const auto& w : result.wedges)
            if (w.pass) raw.push_back({w.angle - half, w.angle + half});
        std::sort(raw.begin(), raw.end());
        for (const auto& iv : raw) {
            if (!result.pass_intervals.empty() &&
                iv[0] <= result.pass_intervals.back()[1] + 1e-12)
                result.pass_intervals.back()[1] =
                    std::max(result.pass_intervals.back()[1], iv[1]);
            else
                result.pass_intervals.push_back(iv);
        }
    }
    return result;
}

} // namespace microloc
