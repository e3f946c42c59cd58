#pragma once

// Principal-part conditions (st1/st2/inv), the st->mh cross check, the conic
// scanner, and the acoustic-cone margin check. Included via conditions.hpp.

#include "microloc/conditions.hpp"

namespace microloc {

struct PrincipalReport {
    ConditionReport st1, st2, inv;
    bool pass = false;

    nlohmann::json to_json() const {
        return {{"condition", "principal"},
                {"pass", pass},
                {"st1", st1.to_json()},
                {"st2", st2.to_json()},
                {"inv", inv.to_json()}};
    }
};

/// b_m(x) = sum_{|a|=m} |a_a(x)|; checks
///   st1: sup b_m (1+|xi|)^m / |P_m| slow scale (trivially satisfied where b_m ~ 0),
///   st2: sup |d^g a_b| / b_m slow scale for all |g| <= gamma_max, |b| <= m,
///   inv: inf_K b_m >= eps^p for some finite p (fitted as p_hat).
inline PrincipalReport check_principal(const SymbolFamily& P, const ConicRegion& region,
                                       const EpsGrid& grid, int gamma_max = 2,
                                       const CheckParams& prm = {}) {
    using namespace cond_detail;
    PrincipalReport out;
    out.st1.condition = "st1";
    out.st2.condition = "st2";
    out.inv.condition = "inv";
    for (auto* r : {&out.st1, &out.st2, &out.inv}) {
        r->tolerances = {{"slow_scale_tol", prm.slow_scale_tol}};
        r->notes = "numerical verdict on sampled grids";
    }

    const SampledRegion sr(region, grid, prm.x_samples);
    const int n = P.dimension();
    const int m = P.degree();
    const SymbolFamily Pm = P.principal_part();
    const CoefficientTable tabm(Pm, sr.xs, sr.eps);

    // b_m on the (x, eps) grid
    std::vector<std::vector<double>> bm(sr.xs.size(),
                                        std::vector<double>(sr.eps.size(), 0.0));
    for (std::size_t xi_ = 0; xi_ < sr.xs.size(); ++xi_)
        for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
            EvalContext ctx(sr.xs[xi_], sr.eps[ei]);
            double s = 0;
            for (const auto& [a, c] : Pm.coefficients()) s += std::abs(ctx.eval(c));
            bm[xi_][ei] = s;
        }

    // ---- st1
    {
        bool ok = true;
        std::vector<double> net(sr.eps.size(), 0.0);
        for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
            const double cutoff = region.radius_net(sr.eps[ei]);
            for (const auto& om : region.directions) {
                for (double r : region.radii) {
                    if (r < cutoff) continue;
                    std::vector<double> xiv(om.size());
                    for (std::size_t c = 0; c < om.size(); ++c) xiv[c] = r * om[c];
                    for (std::size_t xi_ = 0; xi_ < sr.xs.size(); ++xi_) {
                        if (bm[xi_][ei] < kMachineZero) continue; // trivially satisfied
                        const double ap = std::abs(tabm.eval(xi_, ei, xiv));
                        const double num = bm[xi_][ei] * std::pow(1.0 + r, m);
                        if (ap < kMachineZero) {
                            ok = false;
                            if (out.st1.witnesses.size() < 16)
                                out.st1.witnesses.push_back(
                                    {sr.xs[xi_], xiv, sr.eps[ei], 0.0,
                                     "principal symbol vanishes while b_m > 0"});
                            continue;
                        }
                        net[ei] = std::max(net[ei], num / ap);
                    }
                }
            }
        }
        PrefactorNet pn;
        pn.label = "st1 ratio sup b_m (1+|xi|)^m / |P_m|";
        pn.eps = sr.eps;
        pn.values = net;
        pn.sup_value = *std::max_element(net.begin(), net.end());
        if (pn.sup_value > 0.0) {
            const EpsNet en = make_net(grid, net);
            pn.kappa_hat = estimate_order(en, prm.tail_fraction).kappa_hat;
            pn.cls = classify_net(en, prm.slow_scale_tol, prm.tail_fraction);
            if (pn.cls != NetClass::SlowScale && pn.cls != NetClass::Null) {
                ok = false;
                out.st1.witnesses.push_back(
                    {{}, {}, 0.0, pn.kappa_hat, "st1 ratio net not slow-scale"});
            }
        } else {
            pn.cls = NetClass::Null;
        }
        out.st1.fitted["s_sup"] = pn.sup_value;
        out.st1.nets.push_back(std::move(pn));
        out.st1.pass = ok;
    }

    // ---- st2
    {
        bool ok = true;
        for (const auto& [b, cb] : P.coefficients()) {
            for (const auto& g : enumerate_multi_indices(n, gamma_max)) {
                Expr dc = diff_multi(cb, std::span<const int>(g.idx));
                if (is_zero(dc)) continue;
                std::vector<double> net(sr.eps.size(), 0.0);
                bool hard_fail = false;
                for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
                    for (std::size_t xi_ = 0; xi_ < sr.xs.size(); ++xi_) {
                        const double num = std::abs(
                            eval(dc, std::span<const double>(sr.xs[xi_]), sr.eps[ei]));
                        if (bm[xi_][ei] < kMachineZero) {
                            if (num >= kMachineZero) {
                                hard_fail = true;
                                if (out.st2.witnesses.size() < 16)
                                    out.st2.witnesses.push_back(
                                        {sr.xs[xi_], {}, sr.eps[ei], num,
                                         "st2 numerator |d^" + mi_label(g) + " a_" +
                                             mi_label(b) + "| > 0 while b_m = 0"});
                            }
                            continue;
                        }
                        net[ei] = std::max(net[ei], num / bm[xi_][ei]);
                    }
                }
                PrefactorNet pn;
                pn.label = "st2 ratio |d^" + mi_label(g) + " a_" + mi_label(b) + "|/b_m";
                pn.eps = sr.eps;
                pn.values = net;
                pn.sup_value = *std::max_element(net.begin(), net.end());
                if (hard_fail) {
                    ok = false;
                    pn.cls = NetClass::ImmoderateSuspect;
                    pn.kappa_hat = -std::numeric_limits<double>::infinity();
                } else if (pn.sup_value > 0.0) {
                    const EpsNet en = make_net(grid, net);
                    pn.kappa_hat = estimate_order(en, prm.tail_fraction).kappa_hat;
                    pn.cls = classify_net(en, prm.slow_scale_tol, prm.tail_fraction);
                    if (pn.cls != NetClass::SlowScale && pn.cls != NetClass::Null) {
                        ok = false;
                        out.st2.witnesses.push_back({{},
                                                     {},
                                                     0.0,
                                                     pn.kappa_hat,
                                                     pn.label + " not slow-scale"});
                    }
                } else {
                    pn.cls = NetClass::Null;
                }
                out.st2.nets.push_back(std::move(pn));
            }
        }
        out.st2.pass = ok;
    }

    // ---- inv
    {
        std::vector<Complex> infb(sr.eps.size());
        for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
            double v = std::numeric_limits<double>::infinity();
            for (std::size_t xi_ = 0; xi_ < sr.xs.size(); ++xi_)
                v = std::min(v, bm[xi_][ei]);
            infb[ei] = v;
        }
        const EpsNet en(grid, std::move(infb));
        const auto iv = check_invertible(en, prm.tail_fraction);
        out.inv.pass = iv.invertible;
        if (iv.invertible) out.inv.fitted["p_hat"] = iv.p_hat;
        for (double w : iv.zero_witnesses)
            out.inv.witnesses.push_back({{}, {}, w, 0.0, "inf_K b_m vanishes"});
    }

    // derived lower-bound chain when everything passes
    if (out.st1.pass && out.st2.pass && out.inv.pass) {
        const double s_sup = out.st1.fitted["s_sup"];
        if (s_sup > 0) out.st1.fitted["derived_mh1_constant"] = 1.0 / (2.0 * s_sup);
    }
    out.pass = out.st1.pass && out.st2.pass && out.inv.pass;
    return out;
}

struct CrossCheckReport {
    PrincipalReport principal;
    ConditionReport mh1, mh2;
    bool consistent = false;

    nlohmann::json to_json() const {
        return {{"condition", "st_implies_mh"},
                {"consistent", consistent},
                {"principal", principal.to_json()},
                {"mh1", mh1.to_json()},
                {"mh2", mh2.to_json()}};
    }
};

/// Two independent routes to the same conclusion: when the principal-part
/// conditions all pass, the mh checks at rho = 1, delta = 0, m0 = m must pass
/// on the same region. Refuses to run when the precondition fails.
inline CrossCheckReport cross_check_st_implies_mh(const SymbolFamily& P,
                                                  const ConicRegion& region,
                                                  const EpsGrid& grid,
                                                  int gamma_max = 2,
                                                  const CheckParams& prm = {}) {
    CrossCheckReport rep;
    rep.principal = check_principal(P, region, grid, gamma_max, prm);
    if (!rep.principal.pass)
        throw PreconditionError(
            "cross_check_st_implies_mh requires st1/st2/inv to pass");
    rep.mh1 = check_mh1(P, region, grid, double(P.degree()), prm);
    rep.mh2 = check_mh2(P, region, grid, 1.0, 0.0, gamma_max, prm);
    rep.consistent = rep.mh1.pass && rep.mh2.pass;
    return rep;
}

// ---------------------------------------------------------------- scanner

struct ScanParams {
    int x_samples = 16;
    int radii_count = 24;
    double r_min = 2.0, r_max = 1000.0;
    double margin = 0.10;        // angular overlap per wedge side
    double delta_tol = 0.2;      // x-derivative ratio growth allowance
    double rho_min = 0.1;        // minimal fitted xi-decay rate
    double rho_delta_sep = 0.05; // required rho_hat - delta_hat separation
    double zero_ratio = 1e9;     // effective-degeneracy threshold
    double slow_scale_tol = 0.1;
    double tail_fraction = 0.5;
    unsigned threads = 0;
};

struct WedgeVerdict {
    double angle = 0;                 // radians (2-D); +-1 encoded as 0 / pi (1-D)
    std::vector<double> direction;
    bool pass = false;
    double rho_hat = 0, delta_hat = 0;
    double worst_ratio = 0; // effective-zero diagnostic sup b_m (1+r)^m / |P|
    double q_hat = 0, m0_hat = 0;
    std::string why;
};

struct ConeScanResult {
    std::vector<WedgeVerdict> wedges;
    std::vector<std::array<double, 2>> pass_intervals; // angle ranges (2-D)
    std::string mode;

    nlohmann::json to_json() const {
        nlohmann::json jw = nlohmann::json::array(), ji = nlohmann::json::array();
        for (const auto& w : wedges)
            jw.push_back({{"angle", w.angle},
                          {"direction", w.direction},
                          {"pass", w.pass},
                          {"rho_hat", w.rho_hat},
                          {"delta_hat", w.delta_hat},
                          {"worst_ratio", w.worst_ratio},
                          {"q_hat", w.q_hat},
                          {"m0_hat", w.m0_hat},
                          {"why", w.why}});
        for (const auto& i : pass_intervals) ji.push_back({i[0], i[1]});
        return {{"mode", mode}, {"wedges", jw}, {"pass_intervals", ji}};
    }

    void write_csv(std::ostream& os) const {
        os << "angle_deg,pass,q_hat,worst_ratio,rho_hat,delta_hat\n";
        char buf[160];
        for (const auto& w : wedges) {
            std::snprintf(buf, sizeof buf, "%.6f,%d,%.6g,%.6g,%.6g,%.6g\n",
                          w.angle * 180.0 / M_PI, w.pass ? 1 : 0, w.q_hat,
                          w.worst_ratio, w.rho_hat, w.delta_hat);
            os << buf;
        }
    }
};

// scan_Mg is defined in conditions_scan.hpp (included at the end of this header).

/// Pointwise lower bounds for a wave-type principal part on the two components
/// of the cone |tau| < (g0-theta)|xi| or |tau| > (g1+theta)|xi|:
///   |P_m| >= (g0^2-(g0-theta)^2)(xi^2 + tau^2/(g0-theta)^2)/2  (slow component)
///   |P_m| >= ((g1+theta)^2-g1^2)(xi^2 + tau^2/(g1+theta)^2)/2  (fast component)
/// asserted at every sampled (x, direction, radius, eps).
inline ConditionReport check_acoustic_cone_margin(const SymbolFamily& P, double gamma0,
                                                  double gamma1, double theta,
                                                  const Box& base, const EpsGrid& grid,
                                                  int direction_count = 64,
                                                  const CheckParams& prm = {}) {
    using namespace cond_detail;
    if (P.dimension() != 2) throw Error("acoustic cone margin needs a 2-D symbol");
    if (!(theta > 0 && theta < gamma0)) throw Error("theta must lie in (0, gamma0)");
    ConditionReport rep;
    rep.condition = "acoustic_cone_margin";
    rep.tolerances = {{"theta", theta}};
    rep.notes = "pointwise lower bound on sampled cone";

    const auto region = ConicRegion::make(
        base, ConicRegion::sphere(2, direction_count), 2.0, 1000.0, 24,
        RadiusNet::slow_scale_default());
    const SampledRegion sr(region, grid, prm.x_samples);
    const SymbolFamily Pm = P.principal_part();
    const CoefficientTable tab(Pm, sr.xs, sr.eps);
    const double a = gamma0 - theta, b = gamma1 + theta;
    const double ca = gamma0 * gamma0 - a * a;
    const double cb = b * b - gamma1 * gamma1;

    bool ok = true;
    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& om : region.directions) {
        const double axi = std::abs(om[0]), atau = std::abs(om[1]);
        const bool slow = atau < a * axi;
        const bool fast = atau > b * axi;
        if (!slow && !fast) continue;
        for (std::size_t ei = 0; ei < sr.eps.size(); ++ei) {
            const double cutoff = region.radius_net(sr.eps[ei]);
            for (double r : region.radii) {
                if (r < cutoff) continue;
                const std::vector<double> xiv{r * om[0], r * om[1]};
                const double xi2 = xiv[0] * xiv[0], tau2 = xiv[1] * xiv[1];
                const double bound = slow ? ca * (xi2 + tau2 / (a * a)) / 2.0
                                          : cb * (xi2 + tau2 / (b * b)) / 2.0;
                for (std::size_t x_ = 0; x_ < sr.xs.size(); ++x_) {
                    const double ap = std::abs(tab.eval(x_, ei, xiv));
                    const double margin = ap / bound;
                    min_margin = std::min(min_margin, margin);
                    if (ap < bound * (1.0 - 1e-9)) {
                        ok = false;
                        if (rep.witnesses.size() < 16)
                            rep.witnesses.push_back({sr.xs[x_], xiv, sr.eps[ei], margin,
                                                     "pointwise bound violated"});
                    }
                }
            }
        }
    }
    rep.fitted["min_margin"] = std::isinf(min_margin) ? 1.0 : min_margin;
    rep.pass = ok;
    return rep;
}

} // namespace microloc

#include "microloc/conditions_scan.hpp"
