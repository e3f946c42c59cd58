#pragma once

// Built-in symbol families: the reference operators every suite exercises.
// Each entry carries the symbol, a base box, the eps grid it is meant to run
// on (the counterexample nets are sampled on resonance-aware grids), and a
// short description of what it demonstrates.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "microloc/conic.hpp"
#include "microloc/symbol.hpp"

namespace microloc {

struct Builtin {
    std::string name;
    std::string description;
    SymbolFamily symbol;
    Box base;
    EpsGrid grid = EpsGrid::dyadic(1, 16);
    int scan_x_samples = 16; // x-resolution a cone scan of this symbol needs
    std::map<std::string, std::shared_ptr<const EpsNet>> nets;
};

namespace builtin_detail {

inline std::shared_ptr<const EpsNet> resonance_net(const EpsGrid& g, Complex on_res,
                                                   Complex off_res) {
    return std::make_shared<EpsNet>(EpsNet::from_function(g, [=](double e) {
        const double k = 1.0 / e;
        return std::abs(k - std::round(k)) < 1e-9 * k ? on_res : off_res;
    }));
}

} // namespace builtin_detail

inline Builtin make_builtin(const std::string& name) {
    using builtin_detail::resonance_net;
    Builtin b;
    b.name = name;
    if (name == "elliptic1d") {
        b.description =
            "constant-coefficient elliptic operator, symbol xi^2 + 1: every check "
            "passes in every direction";
        b.symbol = SymbolFamily(
            1, {{MultiIndex{{2}}, make_const(1.0)}, {MultiIndex{{0}}, make_const(1.0)}});
        b.base = Box{{{-1.0, 1.0}}};
        b.grid = EpsGrid::dyadic(1, 16);
    } else if (name == "heat2d") {
        b.description =
            "heat operator, symbol i tau + xi^2: hypoelliptic with a non-elliptic "
            "characteristic direction";
        b.symbol = SymbolFamily(2, {{MultiIndex{{2, 0}}, make_const(1.0)},
                                    {MultiIndex{{0, 1}}, make_const(Complex(0, 1))}});
        b.base = Box{{{-1.0, 1.0}, {-1.0, 1.0}}};
        b.grid = EpsGrid::dyadic(1, 16);
    } else if (name == "acoustic") {
        // -tau^2 + c(x)^2 xi^2 - i c(x)^2 (rho'/rho)(x) xi with
        // c = 1 + hstep(x; 0.8) in [1,2] and rho = exp(0.3 hstep(x; 0.8)):
        // coefficients depend on x1 only; the t-slot of the base box is
        // degenerate.
        b.description =
            "acoustic wave operator with variable sound speed c in [1,2] and smooth "
            "density: microlocal estimates fail exactly on the cone |xi| <= |tau| <= "
            "2|xi|";
        ParseContext ctx;
        ctx.dimension = 2;
        const Expr c = parse("1 + hstep(x1; 0.8)", ctx);
        const Expr c2 = make_ipow(c, 2);
        const Expr drho = make_mollifier(0, make_const(0.8), 0); // d/dx hstep(x;0.8)
        const Expr bterm = make_prod(
            {make_const(Complex(0, -1)), make_const(0.3), c2, drho});
        b.symbol = SymbolFamily(2, {{MultiIndex{{0, 2}}, make_const(-1.0)},
                                    {MultiIndex{{2, 0}}, c2},
                                    {MultiIndex{{1, 0}}, bterm}});
        b.base = Box{{{-1.0, 1.0}, {0.0, 0.0}}};
        b.grid = EpsGrid::dyadic(1, 8);
        b.scan_x_samples = 64; // resolve the sound-speed transition
    } else if (name == "remark_i") {
        b.description =
            "zero-divisor principal coefficient c_eps xi (c = 0 on resonant eps, i "
            "otherwise): principal-part shape conditions hold, invertibility and the "
            "lower bound fail";
        b.grid = EpsGrid::reciprocal_with_midpoints(2, 40);
        b.nets["c"] = resonance_net(b.grid, 0.0, Complex(0, 1));
        b.symbol = SymbolFamily(
            1, {{MultiIndex{{1}}, make_named_net("c", b.nets["c"])}});
        b.base = Box{{{-1.0, 1.0}}};
    } else if (name == "remark_ii") {
        b.description =
            "a_eps xi + b_eps with a = 0, b = 1 on resonant eps and a = 1, b = 0 "
            "otherwise: the lower/ratio bounds hold with constants (m0=0, q=0, "
            "r=2, s<=3) while the coefficient-shape condition fails";
        b.grid = EpsGrid::reciprocal_with_midpoints(2, 40);
        b.nets["a"] = resonance_net(b.grid, 0.0, 1.0);
        b.nets["b"] = resonance_net(b.grid, 1.0, 0.0);
        b.symbol = SymbolFamily(1, {{MultiIndex{{1}}, make_named_net("a", b.nets["a"])},
                                    {MultiIndex{{0}}, make_named_net("b", b.nets["b"])}});
        b.base = Box{{{-1.0, 1.0}}};
    } else if (name == "remark_iii") {
        b.description =
            "eps xi + i: lower/ratio bounds hold, the coefficient-shape condition "
            "fails with ratio |i|/eps, and the principal coefficient is invertible "
            "with order 1";
        b.symbol = SymbolFamily(1, {{MultiIndex{{1}}, make_eps_pow(Rational(1))},
                                    {MultiIndex{{0}}, make_const(Complex(0, 1))}});
        b.base = Box{{{-1.0, 1.0}}};
        b.grid = EpsGrid::dyadic(1, 16);
    } else if (name == "first_order_demo") {
        b.description =
            "(1 + hstep(x; 1/log(1/eps))) xi + 1: first-order operator with "
            "slow-scale coefficients and principal lower bound";
        b.symbol = SymbolFamily(1, {{MultiIndex{{1}}, parse("1 + hstep(x1; loginv^-1)", 1)},
                                    {MultiIndex{{0}}, make_const(1.0)}});
        b.base = Box{{{-1.0, 1.0}}};
        // widths need eps < 1; log-power coefficient nets need a deep tail
        // before their fitted order crosses the slow-scale tolerance
        b.grid = EpsGrid::dyadic(2, 40);
        b.scan_x_samples = 33; // odd count keeps the mollifier peak on the grid
    } else {
        throw Error("unknown builtin '" + name + "'");
    }
    return b;
}

inline const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{
        "elliptic1d", "heat2d",     "acoustic",        "remark_i",
        "remark_ii",  "remark_iii", "first_order_demo"};
    return names;
}

/// Reference eps-families for the wavefront estimator. The oscillatory and
/// resonance-gated families use eps grids whose intrinsic frequencies 1/eps
/// stay inside the analysis band of the default sampling (G = 4096 on [-8,8]).
struct WfBuiltin {
    std::string name;
    std::string description;
    Expr u;
    Box box = Box{{{-8.0, 8.0}}};
    int G = 4096;
    EpsGrid grid = EpsGrid::dyadic(1, 12);
    std::map<std::string, std::shared_ptr<const EpsNet>> nets;
};

inline WfBuiltin make_wf_builtin(const std::string& name) {
    using builtin_detail::resonance_net;
    WfBuiltin b;
    b.name = name;
    if (name == "smooth_bump") {
        b.description = "fixed smooth bump, eps-independent: empty wavefront estimate";
        b.u = parse("bump(x1; 0; 2)", 1);
    } else if (name == "heaviside_slow") {
        b.description =
            "regularized step of slow-scale width 1/log(1/eps): regular family";
        b.u = parse("hstep(x1; loginv^-1)", 1);
    } else if (name == "heaviside_fast") {
        b.description =
            "regularized step of width eps: singular at the jump in both directions";
        b.u = parse("hstep(x1; eps^1)", 1);
    } else if (name == "osc_pack") {
        b.description =
            "e^{i x/eps} bump: one-sided spectrum, singular in the +1 direction";
        b.u = parse("(cos(eps^-1*x1) + i*sin(eps^-1*x1))*bump(x1; 0; 2)", 1);
        std::vector<double> eps;
        for (int k = 100; k <= 200; k += 4) eps.push_back(1.0 / k);
        b.grid = EpsGrid::custom(std::move(eps));
    } else if (name == "nonregular_comb") {
        b.description =
            "resonance-gated eps cos(x/eps) bump: a non-regular family annihilated "
            "by the zero-divisor operator";
        b.grid = EpsGrid::reciprocal_with_midpoints(100, 160);
        b.nets["gate"] = resonance_net(b.grid, 1.0, 0.0);
        ParseContext ctx;
        ctx.dimension = 1;
        ctx.nets = &b.nets;
        b.u = parse("net(gate) * eps^1 * cos(eps^-1*x1) * bump(x1; 0; 2)", ctx);
    } else {
        throw Error("unknown wavefront builtin '" + name + "'");
    }
    return b;
}

inline std::vector<std::pair<std::string, std::string>> list_builtins() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& n : builtin_names()) {
        const Builtin b = make_builtin(n);
        out.emplace_back(n, b.description);
    }
    return out;
}

} // namespace microloc
