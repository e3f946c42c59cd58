#pragma once

// Numerical checkers for the estimate families that govern microlocal
// regularity of eps-parametrized symbols: lower bounds |P| >= eps^q (1+|xi|)^m0,
// derivative-ratio bounds with slow-scale prefactors, the WH-elliptic and
// first-order specializations, principal-part conditions, and the conic
// scanner that maps out the passing direction set.
//
// All verdicts are numerical statements about the sampled grids; the report
// carries every tolerance in force.

#include <optional>

#include "microloc/conic.hpp"
#include "microloc/parallel.hpp"
#include "microloc/report.hpp"
#include "microloc/symbol.hpp"

namespace microloc {

struct CheckParams {
    int x_samples = 16;           // base-box samples per dimension
    double slow_scale_tol = 0.1;  // kappa tolerance for slow-scale verdicts
    double tail_fraction = 0.5;   // eps tail for net fits
    double slope_tol = 0.2;       // radial-slope tolerance
    double exclusion_limit = 0.01; // max fraction of |P|~0 exclusions in ratios
    double q_cap = 40.0;          // largest admissible fitted q
    unsigned threads = 0;
};

namespace cond_detail {

/// Coefficient values of a symbol pre-evaluated over the (x, eps) grid, so a
/// symbol sample at (x_i, xi, eps_j) is a short monomial sum.
class CoefficientTable {
public:
    CoefficientTable() = default;

    CoefficientTable(const SymbolFamily& s, const std::vector<std::vector<double>>& xs,
                     const std::vector<double>& eps)
        : n_(s.dimension()) {
        for (const auto& [a, c] : s.coefficients()) alphas_.push_back(a);
        vals_.resize(xs.size());
        for (std::size_t xi = 0; xi < xs.size(); ++xi) {
            vals_[xi].resize(eps.size());
            for (std::size_t ei = 0; ei < eps.size(); ++ei) {
                EvalContext ctx(xs[xi], eps[ei]);
                auto& slot = vals_[xi][ei];
                slot.reserve(alphas_.size());
                for (const auto& [a, c] : s.coefficients()) slot.push_back(ctx.eval(c));
            }
        }
    }

    bool empty() const { return alphas_.empty(); }

    Complex eval(std::size_t x_idx, std::size_t eps_idx,
                 std::span<const double> xi) const {
        Complex out{};
        const auto& cs = vals_[x_idx][eps_idx];
        for (std::size_t k = 0; k < alphas_.size(); ++k) {
            double mono = 1.0;
            for (int i = 0; i < n_; ++i)
                for (int p = 0; p < alphas_[k][i]; ++p) mono *= xi[i];
            out += cs[k] * mono;
        }
        return out;
    }

private:
    int n_ = 1;
    std::vector<MultiIndex> alphas_;
    std::vector<std::vector<std::vector<Complex>>> vals_; // [x][eps][coeff]
};

struct SampledRegion {
    std::vector<std::vector<double>> xs;
    std::vector<double> eps;

    SampledRegion(const ConicRegion& region, const EpsGrid& grid, int x_samples)
        : xs(region.base.sample_grid(x_samples)), eps(grid.values()) {}
};

/// Upper-half log-band radial slope of a per-(r) profile (NaN = skipped radius).
inline double upper_band_slope(const std::vector<double>& radii,
                               const std::vector<double>& values) {
    std::vector<double> ax, ay;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] <= 0) continue;
        ax.push_back(std::log1p(radii[i]));
        ay.push_back(std::log(values[i]));
    }
    if (ax.size() < 4) return std::numeric_limits<double>::quiet_NaN();
    const double cut = 0.5 * (ax.front() + ax.back());
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ax.size(); ++i)
        if (ax[i] >= cut) {
            lx.push_back(ax[i]);
            ly.push_back(ay[i]);
        }
    if (lx.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    return fit_line(lx, ly).slope;
}

/// Full-band radial slope (used by the scanner, where low-radius growth is the
/// degeneracy signal).
inline double full_band_slope(const std::vector<double>& radii,
                              const std::vector<double>& values) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] <= 0) continue;
        lx.push_back(std::log1p(radii[i]));
        ly.push_back(std::log(values[i]));
    }
    if (lx.size() < 4) return std::numeric_limits<double>::quiet_NaN();
    return fit_line(lx, ly).slope;
}

inline std::string mi_label(const MultiIndex& a) {
    std::string s = "[";
    for (int i = 0; i < a.dim(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
    return s + "]";
}

inline EpsNet make_net(const EpsGrid& grid, const std::vector<double>& v) {
    std::vector<Complex> c(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) c[i] = v[i];
    return EpsNet(grid, std::move(c));
}

} // namespace cond_detail

// ---------------------------------------------------------------- mh1

/// Lower bound |P| >= eps^q (1+|xi|)^{m0} on the sampled region. In fit mode
/// (m0 unset) m0_hat is the smallest upper-band radial slope of log|P| over
/// (x, direction, eps). Fails on (machine-)zero samples, on a compensated
/// infimum that keeps decaying radially, or when no finite q fits.
inline ConditionReport check_mh1(const SymbolFamily& P, const ConicRegion& region,
                                 const EpsGrid& grid, std::optional<double> m0 = {},
                                 const CheckParams& prm = {}) {
    using namespace cond_detail;
    ConditionReport rep;
    rep.condition = "mh1";
    rep.tolerances = {{"slope_tol", prm.slope_tol},
                      {"q_cap", prm.q_cap},
                      {"tail_fraction", prm.tail_fraction}};
    rep.notes = "numerical verdict on sampled grids";

    const SampledRegion sr(region, grid, prm.x_samples);
    const CoefficientTable tab(P, sr.xs, sr.eps);
    const auto& radii = region.radii;
    bool ok = true;

    // |P| profiles and optional m0 fit
    double m0_hat = std::numeric_limits<double>::infinity();
    // absP[x][eps][r]
    std::vector<std::vector<std::vector<double>>> absP(
        sr.xs.size(),
        std::vector<std::vector<double>>(sr.eps.size(),
                                         std::vector<double>(radii.size())));
    for (std::size_t xi_ = 0; xi_ < sr.xs.size(); ++xi_)
        for (std::size_t ei = 0; ei < sr.eps.size(); ++ei)
            for (std::size_t ri = 0; ri < radii.size(); ++ri)
                absP[xi_][ei][ri] = std::numeric_limits<double>::quiet_NaN();

    std::vector<Witness> zero_witnesses;
    for (const auto& om : region.directions) {
        for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
            const double cutoff = region.radius_net(sr.eps[ei]);
            for (std::size_t xi_ = 0; xi_ < sr.xs.size(); ++xi_) {
                std::vector<double> prof(radii.size(),
                                         std::numeric_limits<double>::quiet_NaN());
                for (std::size_t ri = 0; ri < radii.size(); ++ri) {
                    if (radii[ri] < cutoff) continue;
                    std::vector<double> xiv(om.size());
                    for (std::size_t c = 0; c < om.size(); ++c)
                        xiv[c] = radii[ri] * om[c];
                    const double a = std::abs(tab.eval(xi_, ei, xiv));
                    prof[ri] = a;
                    if (a < kMachineZero && zero_witnesses.size() < 32) {
                        std::vector<double> w(om.size());
                        for (std::size_t c = 0; c < om.size(); ++c)
                            w[c] = radii[ri] * om[c];
                        zero_witnesses.push_back(
                            {sr.xs[xi_], w, sr.eps[ei], a, "P vanishes at sample"});
                    }
                    auto& cell = absP[xi_][ei][ri];
                    cell = std::isnan(cell) ? a : std::min(cell, a);
                }
                if (!m0) {
                    const double sl = upper_band_slope(radii, prof);
                    if (!std::isnan(sl)) m0_hat = std::min(m0_hat, sl);
                }
            }
        }
    }
    if (!zero_witnesses.empty()) {
        ok = false;
        for (auto& w : zero_witnesses) rep.witnesses.push_back(std::move(w));
    }
    const double m0_used = m0 ? *m0 : (std::isinf(m0_hat) ? 0.0 : m0_hat);
    rep.fitted["m0_used"] = m0_used;
    if (!m0) rep.fitted["m0_hat"] = m0_used;

    // compensated infimum I(r,eps) = inf_x,dir |P| (1+r)^{-m0}
    std::vector<double> L(sr.eps.size(), std::numeric_limits<double>::infinity());
    for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
        std::vector<double> infprof(radii.size(),
                                    std::numeric_limits<double>::quiet_NaN());
        for (std::size_t ri = 0; ri < radii.size(); ++ri) {
            double v = std::numeric_limits<double>::infinity();
            bool any = false;
            for (std::size_t xi_ = 0; xi_ < sr.xs.size(); ++xi_) {
                const double a = absP[xi_][ei][ri];
                if (std::isnan(a)) continue;
                any = true;
                v = std::min(v, a);
            }
            if (!any) continue;
            infprof[ri] = v * std::pow(1.0 + radii[ri], -m0_used);
            L[ei] = std::min(L[ei], infprof[ri]);
        }
        const double isl = upper_band_slope(radii, infprof);
        if (!std::isnan(isl) && isl < -prm.slope_tol) {
            ok = false;
            rep.witnesses.push_back({{}, {}, sr.eps[ei], isl,
                                     "compensated infimum decays radially (m0 too "
                                     "large for this direction set)"});
        }
    }

    // q fit on the eps tail
    double q_hat = 0.0;
    const auto tail = grid.tail_indices(prm.tail_fraction);
    for (std::size_t ti : tail) {
        const double l = L[ti];
        if (!(l > 0) || std::isinf(l)) {
            ok = false;
            rep.witnesses.push_back(
                {{}, {}, sr.eps[ti], l, "no positive infimum on the tail"});
            continue;
        }
        if (sr.eps[ti] < 1.0) q_hat = std::max(q_hat, std::log(l) / std::log(sr.eps[ti]));
    }
    if (q_hat > prm.q_cap) {
        ok = false;
        rep.witnesses.push_back({{}, {}, 0.0, q_hat, "no finite polynomial lower bound"});
    }
    rep.fitted["q_hat"] = q_hat;
    rep.pass = ok;
    return rep;
}

// ---------------------------------------------------------------- mh2

/// Derivative-ratio bounds: for |a| <= alpha_max, |b| <= m the nets
///   s(a,b,eps) = sup |d_x^a d_xi^b P| / (|P| (1+|xi|)^{delta|a|-rho|b|})
/// must be slow scale. Samples with |P| below machine zero are excluded and
/// counted; more than exclusion_limit of them fails the check.
inline ConditionReport check_mh2(const SymbolFamily& P, const ConicRegion& region,
                                 const EpsGrid& grid, double rho, double delta,
                                 int alpha_max, const CheckParams& prm = {}) {
    using namespace cond_detail;
    if (!(0.0 <= delta && delta < rho && rho <= 1.0))
        throw Error("check_mh2 requires 0 <= delta < rho <= 1");
    ConditionReport rep;
    rep.condition = "mh2";
    rep.tolerances = {{"rho", rho},
                      {"delta", delta},
                      {"slow_scale_tol", prm.slow_scale_tol},
                      {"exclusion_limit", prm.exclusion_limit}};
    rep.notes = "numerical verdict on sampled grids";

    const SampledRegion sr(region, grid, prm.x_samples);
    const CoefficientTable tabP(P, sr.xs, sr.eps);
    const int n = P.dimension();
    bool ok = true;

    std::size_t excluded = 0, considered = 0;
    for (const auto& a : enumerate_multi_indices(n, alpha_max)) {
        for (const auto& b : enumerate_multi_indices(n, P.degree())) {
            if (a.order() == 0 && b.order() == 0) continue;
            const SymbolFamily dS = P.derivative(a, b);
            if (dS.empty()) continue;
            const CoefficientTable tabD(dS, sr.xs, sr.eps);
            const double comp = delta * a.order() - rho * b.order();

            std::vector<double> net(sr.eps.size(), 0.0);
            Witness worst;
            double worst_val = -1;
            for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
                const double cutoff = region.radius_net(sr.eps[ei]);
                for (const auto& om : region.directions) {
                    for (std::size_t ri = 0; ri < region.radii.size(); ++ri) {
                        const double r = region.radii[ri];
                        if (r < cutoff) continue;
                        std::vector<double> xiv(om.size());
                        for (std::size_t c = 0; c < om.size(); ++c) xiv[c] = r * om[c];
                        for (std::size_t xi_ = 0; xi_ < sr.xs.size(); ++xi_) {
                            ++considered;
                            const double ap = std::abs(tabP.eval(xi_, ei, xiv));
                            if (ap < kMachineZero) {
                                ++excluded;
                                continue;
                            }
                            const double ratio = std::abs(tabD.eval(xi_, ei, xiv)) /
                                                 (ap * std::pow(1.0 + r, comp));
                            net[ei] = std::max(net[ei], ratio);
                            if (ratio > worst_val) {
                                worst_val = ratio;
                                worst = {sr.xs[xi_], xiv, sr.eps[ei], ratio,
                                         "largest ratio"};
                            }
                        }
                    }
                }
            }
            PrefactorNet pn;
            pn.label = "s(a=" + mi_label(a) + ",b=" + mi_label(b) + ")";
            pn.eps = sr.eps;
            pn.values = net;
            pn.sup_value = *std::max_element(net.begin(), net.end());
            bool allzero = pn.sup_value == 0.0;
            if (allzero) {
                pn.cls = NetClass::Null;
                pn.kappa_hat = std::numeric_limits<double>::infinity();
            } else {
                const EpsNet en = make_net(grid, net);
                pn.kappa_hat = estimate_order(en, prm.tail_fraction).kappa_hat;
                pn.cls = classify_net(en, prm.slow_scale_tol, prm.tail_fraction);
                if (pn.cls != NetClass::SlowScale && pn.cls != NetClass::Null) {
                    ok = false;
                    worst.what = pn.label + " not slow-scale (kappa_hat=" +
                                 std::to_string(pn.kappa_hat) + ")";
                    rep.witnesses.push_back(worst);
                }
            }
            rep.nets.push_back(std::move(pn));
        }
    }
    if (considered > 0 &&
        double(excluded) > prm.exclusion_limit * double(considered)) {
        ok = false;
        rep.witnesses.push_back({{},
                                 {},
                                 0.0,
                                 double(excluded) / double(considered),
                                 "too many near-zero |P| exclusions"});
    }
    rep.fitted["excluded_fraction"] =
        considered ? double(excluded) / double(considered) : 0.0;
    rep.pass = ok;
    return rep;
}

// ---------------------------------------------------------------- wh

struct WhReport {
    ConditionReport lower; // mh1 with m0 = m, full sphere
    ConditionReport ratios; // mh2 with rho = 1, delta = 0, full sphere
    bool pass = false;

    nlohmann::json to_json() const {
        return {{"condition", "wh"},
                {"pass", pass},
                {"lower", lower.to_json()},
                {"ratios", ratios.to_json()}};
    }
};

/// WH-ellipticity with slow scales: the mh conditions with m0 = m, rho = 1,
/// delta = 0 over the full direction sphere.
inline WhReport check_wh_elliptic(const SymbolFamily& P, const Box& K,
                                  const EpsGrid& grid, int alpha_max = 2,
                                  const CheckParams& prm = {}, int sphere_count = 32) {
    const auto region =
        ConicRegion::make(K, ConicRegion::sphere(P.dimension(), sphere_count), 2.0,
                          1000.0, 24, RadiusNet::slow_scale_default());
    WhReport rep;
    rep.lower = check_mh1(P, region, grid, double(P.degree()), prm);
    rep.lower.condition = "wh1";
    rep.ratios = check_mh2(P, region, grid, 1.0, 0.0, alpha_max, prm);
    rep.ratios.condition = "wh2";
    rep.pass = rep.lower.pass && rep.ratios.pass;
    return rep;
}

// ---------------------------------------------------------------- first order

/// First-order operators with slow-scale coefficients: all coefficients (and
/// derivatives up to deriv_max) have slow-scale sup nets on K, and
/// s_eps = sup (1+|xi|)/|P_1| is slow scale. On pass the report carries the
/// derived lower-bound margin |P| >= (1+|xi|)/(2 s_eps) for |xi| >= 2 s s0.
inline ConditionReport check_first_order(const SymbolFamily& P, const ConicRegion& region,
                                         const EpsGrid& grid, int deriv_max = 2,
                                         const CheckParams& prm = {}) {
    using namespace cond_detail;
    if (P.degree() != 1) throw Error("check_first_order needs a symbol of degree 1");
    ConditionReport rep;
    rep.condition = "first_order";
    rep.tolerances = {{"slow_scale_tol", prm.slow_scale_tol},
                      {"deriv_max", double(deriv_max)}};
    rep.notes = "numerical verdict on sampled grids";

    const SampledRegion sr(region, grid, prm.x_samples);
    const int n = P.dimension();
    bool ok = true;

    // coefficient sup nets, all derivatives up to deriv_max
    for (const auto& [a, c] : P.coefficients()) {
        for (const auto& g : enumerate_multi_indices(n, deriv_max)) {
            Expr dc = diff_multi(c, std::span<const int>(g.idx));
            if (is_zero(dc)) continue;
            std::vector<double> net(sr.eps.size(), 0.0);
            for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
                EvalContext* last = nullptr;
                (void)last;
                for (const auto& x : sr.xs) {
                    const double v = std::abs(eval(dc, std::span<const double>(x),
                                                   sr.eps[ei]));
                    net[ei] = std::max(net[ei], v);
                }
            }
            PrefactorNet pn;
            pn.label = "sup|d^" + mi_label(g) + " a_" + mi_label(a) + "|";
            pn.eps = sr.eps;
            pn.values = net;
            pn.sup_value = *std::max_element(net.begin(), net.end());
            if (pn.sup_value == 0.0) {
                pn.cls = NetClass::Null;
            } else {
                const EpsNet en = make_net(grid, net);
                pn.kappa_hat = estimate_order(en, prm.tail_fraction).kappa_hat;
                pn.cls = classify_net(en, prm.slow_scale_tol, prm.tail_fraction);
                if (pn.cls != NetClass::SlowScale && pn.cls != NetClass::Null) {
                    ok = false;
                    rep.witnesses.push_back(
                        {{}, {}, 0.0, pn.kappa_hat, pn.label + " not slow-scale"});
                }
            }
            rep.nets.push_back(std::move(pn));
        }
    }

    // s_eps = sup (1+|xi|)/|P_1|
    const SymbolFamily P1 = P.principal_part();
    const CoefficientTable tab1(P1, sr.xs, sr.eps);
    std::vector<double> snet(sr.eps.size(), 0.0);
    std::size_t excluded = 0, considered = 0;
    for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
        const double cutoff = region.radius_net(sr.eps[ei]);
        for (const auto& om : region.directions) {
            for (double r : region.radii) {
                if (r < cutoff) continue;
                std::vector<double> xiv(om.size());
                for (std::size_t c = 0; c < om.size(); ++c) xiv[c] = r * om[c];
                for (std::size_t xi_ = 0; xi_ < sr.xs.size(); ++xi_) {
                    ++considered;
                    const double ap = std::abs(tab1.eval(xi_, ei, xiv));
                    if (ap < kMachineZero) {
                        ++excluded;
                        continue;
                    }
                    snet[ei] = std::max(snet[ei], (1.0 + r) / ap);
                }
            }
        }
    }
    {
        PrefactorNet pn;
        pn.label = "s_eps = sup (1+|xi|)/|P_1|";
        pn.eps = sr.eps;
        pn.values = snet;
        pn.sup_value = *std::max_element(snet.begin(), snet.end());
        const EpsNet en = make_net(grid, snet);
        pn.kappa_hat = estimate_order(en, prm.tail_fraction).kappa_hat;
        pn.cls = classify_net(en, prm.slow_scale_tol, prm.tail_fraction);
        if (pn.cls != NetClass::SlowScale && pn.cls != NetClass::Null) {
            ok = false;
            rep.witnesses.push_back(
                {{}, {}, 0.0, pn.kappa_hat, "s_eps ratio net not slow-scale"});
        }
        rep.fitted["s_sup"] = pn.sup_value;
        rep.nets.push_back(std::move(pn));
    }
    if (considered > 0 &&
        double(excluded) > prm.exclusion_limit * double(considered)) {
        ok = false;
        rep.witnesses.push_back({{}, {}, 0.0, double(excluded) / double(considered),
                                 "principal part vanished on too many samples"});
    }

    // derived margin: |P| >= (1+|xi|)/(2 s_eps) once |xi| >= 2 s_eps s0_eps
    if (ok) {
        const CoefficientTable tabF(P, sr.xs, sr.eps);
        double worst_margin = std::numeric_limits<double>::infinity();
        for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
            double s0 = 0.0;
            auto a0 = P.coefficients().find(MultiIndex::zero(n));
            if (a0 != P.coefficients().end())
                for (const auto& x : sr.xs)
                    s0 = std::max(s0, std::abs(eval(a0->second,
                                                    std::span<const double>(x),
                                                    sr.eps[ei])));
            const double rstar =
                std::max(2.0 * snet[ei] * s0, region.radius_net(sr.eps[ei]));
            for (const auto& om : region.directions) {
                for (double r : region.radii) {
                    if (r < rstar) continue;
                    std::vector<double> xiv(om.size());
                    for (std::size_t c = 0; c < om.size(); ++c) xiv[c] = r * om[c];
                    for (std::size_t xi_ = 0; xi_ < sr.xs.size(); ++xi_) {
                        const double ap = std::abs(tabF.eval(xi_, ei, xiv));
                        worst_margin = std::min(
                            worst_margin, ap * 2.0 * snet[ei] / (1.0 + r));
                    }
                }
            }
        }
        rep.fitted["derived_margin"] =
            std::isinf(worst_margin) ? 1.0 : worst_margin;
        if (worst_margin < 1.0 - 1e-9) {
            ok = false;
            rep.witnesses.push_back({{}, {}, 0.0, worst_margin,
                                     "derived bound |P| >= (1+|xi|)/(2 s) violated"});
        }
    }
    rep.pass = ok;
    return rep;
}

} // namespace microloc

#include "microloc/conditions_principal.hpp"
