#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "microloc/expr.hpp"

using namespace microloc;
using Complex = std::complex<double>;

namespace {

Complex ev1(const Expr& e, double x, double eps) { return eval(e, {x}, eps); }

/// Central finite difference in x_i, step h.
Complex fd(const Expr& e, std::vector<double> x, int i, double eps, double h = 1e-5) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    return (eval(e, std::span<const double>(xp), eps) -
            eval(e, std::span<const double>(xm), eps)) /
           Complex(2 * h, 0.0);
}

} // namespace

TEST_CASE("parse: grammar-forced shapes") {
    const Expr e1 = parse("2 + x1^2", 1);
    REQUIRE(e1.kind() == ExprKind::Sum);
    REQUIRE(ev1(e1, 3.0, 0.5) == Complex(11.0, 0.0));

    const Expr e2 = parse("eps^-1 * x1", 1);
    REQUIRE(e2.kind() == ExprKind::Prod);
    REQUIRE(ev1(e2, 3.0, 0.25) == Complex(12.0, 0.0));

    const Expr e3 = parse("hstep(x1; loginv^-1)", 1);
    REQUIRE(e3.kind() == ExprKind::HStep);
    // width 1/log(1/eps); far to the right the step saturates at 1
    REQUIRE(std::abs(ev1(e3, 10.0, 0.25) - 1.0) < 1e-12);

    REQUIRE(std::abs(ev1(parse("eps^1/2", 1), 0.0, 0.25).real() - 0.5) < 1e-15);
    REQUIRE(ev1(parse("i^2", 1), 0.0, 0.5) == Complex(-1.0, 0.0));
    REQUIRE(std::abs(ev1(parse("sin(x1)*cos(x1)/exp(x1)", 1), 0.7, 0.5) -
                     std::sin(0.7) * std::cos(0.7) / std::exp(0.7)) < 1e-15);
}

TEST_CASE("parse errors carry positions") {
    REQUIRE_THROWS_AS(parse("2 +", 1), ParseError);
    REQUIRE_THROWS_AS(parse("x2", 1), ParseError); // index beyond dimension
    REQUIRE_THROWS_AS(parse("bogus(x1)", 1), ParseError);
    try {
        parse("1 + \n  @", 1);
        FAIL("expected ParseError");
    } catch (const ParseError& pe) {
        REQUIRE(pe.line() == 2);
        REQUIRE(pe.column() >= 2);
    }
}

TEST_CASE("eval examples") {
    REQUIRE(ev1(parse("eps^2", 1), 0.0, 0.5) == Complex(0.25, 0.0));
    REQUIRE(std::abs(ev1(parse("hstep(x1; 1)", 1), 10.0, 0.37) - 1.0) < 1e-12);
    REQUIRE(std::abs(ev1(parse("hstep(x1; 1)", 1), -10.0, 0.37)) < 1e-12);
    for (double eps : {1.0, 0.5, 0.01})
        REQUIRE(std::abs(ev1(parse("hstep(x1; 1)", 1), 0.0, eps) - 0.5) < 1e-12);

    // guard behavior of division
    const Expr q = parse("1/x1", 1);
    REQUIRE(ev1(q, 2.0, 0.5) == Complex(0.5, 0.0));
    REQUIRE_THROWS_AS(ev1(q, 0.0, 0.5), EvalError);
    GuardBox box;
    box.bounds = {{1.0, 3.0}};
    const Expr guarded = with_guards(q, box);
    REQUIRE_THROWS_AS(ev1(guarded, 0.5, 0.5), GuardViolation);
    REQUIRE(ev1(guarded, 2.0, 0.5) == Complex(0.5, 0.0));
}

TEST_CASE("diff: structural examples") {
    const Expr e = parse("x1^2", 1);
    const Expr d = diff(e, 0);
    REQUIRE(ev1(d, 5.0, 0.5) == Complex(10.0, 0.0));

    // derivative of the regularized step is the scaled mollifier
    const Expr h = parse("hstep(x1; 2)", 1);
    const Expr dh = diff(h, 0);
    REQUIRE(dh.kind() == ExprKind::Mollifier);
    // at the center: (1/w) * psi(0)/I
    const double expect = bump_template_peak() / (bump_template_integral() * 2.0);
    REQUIRE(std::abs(ev1(dh, 0.0, 0.5).real() - expect) < 1e-14);

    // idempotent simplification: 0*e and e+0 collapse
    const Expr z = make_prod({make_const(0.0), e});
    REQUIRE(is_zero(z));
    REQUIRE(make_sum({e, make_const(0.0)}).get() == e.get());
}

TEST_CASE("diff matches central finite differences") {
    const Expr e = parse("sin(x1)*exp(x1)", 1);
    const Expr d = diff(e, 0);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ux(-2.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const double x = ux(rng);
        const Complex got = ev1(d, x, 0.5);
        const Complex ref = fd(e, {x}, 0, 0.5);
        const double scale = 1.0 + std::abs(ref);
        REQUIRE(std::abs(got - ref) <= 1e-6 * scale);
    }

    // a tougher mix, including eps atoms and reciprocal
    const Expr g = parse("cos(x1^2) / (2 + x1^2) + eps^1 * x1^3", 1);
    const Expr dg = diff(g, 0);
    for (int k = 0; k < 100; ++k) {
        const double x = ux(rng);
        const Complex got = ev1(dg, x, 0.125);
        const Complex ref = fd(g, {x}, 0, 0.125);
        REQUIRE(std::abs(got - ref) <= 1e-6 * (1.0 + std::abs(ref)));
    }
}

TEST_CASE("diff is linear") {
    const Expr e = parse("sin(x1)", 1);
    const Expr f = parse("x1^3", 1);
    const Expr lhs = diff(make_sum({make_prod({make_const(2.5), e}), f}), 0);
    const Expr rhs =
        make_sum({make_prod({make_const(2.5), diff(e, 0)}), diff(f, 0)});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
        const double x = ux(rng);
        REQUIRE(std::abs(ev1(lhs, x, 0.5) - ev1(rhs, x, 0.5)) < 1e-12);
    }
}

TEST_CASE("mixed partials commute") {
    ParseContext ctx;
    ctx.dimension = 2;
    const Expr e = parse("sin(x1*x2) + x1^2*x2^3 + exp(x1)*cos(x2)", ctx);
    const Expr d12 = diff(diff(e, 0), 1);
    const Expr d21 = diff(diff(e, 1), 0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-1.5, 1.5);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> x{ux(rng), ux(rng)};
        const Complex a = eval(d12, std::span<const double>(x), 0.5);
        const Complex b = eval(d21, std::span<const double>(x), 0.5);
        REQUIRE(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
    }
}

TEST_CASE("compact-support atoms vanish outside their supports") {
    const Expr e = parse("bump(x1; 0; 1) + dbump(x1; 2; 0.5; 3) + moll(x1; 0.25; 2)", 1);
    for (double x : {-3.0, -1.5, 3.5, 10.0})
        REQUIRE(ev1(e, x, 0.5) == Complex(0.0, 0.0));
    REQUIRE(std::abs(ev1(parse("bump(x1; 0; 1)", 1), 0.0, 0.5) - 1.0) < 1e-15);
}

TEST_CASE("hstep derivative scaling identity") {
    // sup_x |d^k hstep(.; w)| = w^{-k} sup |mollifier-template^{(k-1)}|
    for (double w : {1.0, 0.5, 0.125}) {
        Expr d = parse("hstep(x1; " + std::to_string(w) + ")", 1);
        for (int k = 1; k <= 4; ++k) {
            d = diff(d, 0);
            double sup = 0;
            const int npts = 4001;
            for (int i = 0; i < npts; ++i) {
                const double t = -1.0 + 2.0 * i / (npts - 1);
                sup = std::max(sup, std::abs(ev1(d, w * t, 0.5)));
            }
            double tpl = 0;
            for (int i = 0; i < npts; ++i) {
                const double t = -1.0 + 2.0 * i / (npts - 1);
                tpl = std::max(tpl, std::abs(bump_template_deriv(k - 1, t)) /
                                        bump_template_integral());
            }
            REQUIRE(std::abs(sup - tpl / std::pow(w, k)) <= 1e-12 * tpl / std::pow(w, k));
        }
    }
}

TEST_CASE("affine substitution") {
    // u(x) = v(s*x + t) with eps-dependent scale
    const Expr body = parse("x1^2", 1);
    const Expr u = make_affine(body, 0, parse("eps^-1", 1), make_const(1.0));
    REQUIRE(ev1(u, 3.0, 0.5).real() == Catch::Approx(49.0)); // (2*3+1)^2
    const Expr du = diff(u, 0);
    // d/dx v(sx+t) = s*v'(sx+t) = (1/eps)*2*(sx+t)
    REQUIRE(ev1(du, 3.0, 0.5).real() == Catch::Approx(2.0 * 7.0 * 2.0));
    REQUIRE_THROWS_AS(make_affine(body, 0, parse("x1", 1), make_const(0.0)), Error);
}

TEST_CASE("round trip: parse(to_dsl(e)) evaluates identically") {
    ParseContext ctx;
    ctx.dimension = 2;
    const std::vector<std::string> sources{
        "2 + x1^2",
        "eps^-1 * x1",
        "hstep(x1; loginv^-1)",
        "sin(x1*x2)/(1 + x2^2) + exp(x1)*eps^3/2",
        "bump(x1; 0.5; 2) - 3*x2",
        "(x1 + x2)^3 * cos(eps^1 * x1)",
    };
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-1.0, 1.0);
    for (const auto& src : sources) {
        Expr e = parse(src, ctx);
        // also exercise derivative atoms through the printer
        e = make_sum({e, diff(e, 0)});
        const std::string text = to_dsl(e);
        const Expr back = parse(text, ctx);
        for (int k = 0; k < 25; ++k) {
            std::vector<double> x{ux(rng), ux(rng)};
            for (double eps : {0.5, 0.25, 0.03125}) { // loginv^-1 widths need eps < 1
                const Complex a = eval(e, std::span<const double>(x), eps);
                const Complex b = eval(back, std::span<const double>(x), eps);
                REQUIRE(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
            }
        }
    }
}

TEST_CASE("fold_eps freezes the eps-dependent atoms") {
    const Expr e = parse("eps^2 * x1 + hstep(x1; loginv^-1) + loginv", 1);
    const Expr f = fold_eps(e, 0.25);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
        const double x = ux(rng);
        REQUIRE(std::abs(ev1(f, x, 0.9) - ev1(e, x, 0.25)) < 1e-13);
    }
}

TEST_CASE("named nets evaluate on grid points only") {
    const auto g = EpsGrid::dyadic(1, 10);
    auto net = std::make_shared<EpsNet>(
        EpsNet::from_function(g, [](double e) { return Complex(e, 0.0); }));
    std::map<std::string, std::shared_ptr<const EpsNet>> nets{{"a", net}};
    ParseContext ctx;
    ctx.dimension = 1;
    ctx.nets = &nets;
    const Expr e = parse("net(a) * x1", ctx);
    REQUIRE(ev1(e, 2.0, 0.25) == Complex(0.5, 0.0));
    REQUIRE_THROWS_AS(ev1(e, 2.0, 0.3), EvalError); // off-grid eps
    REQUIRE_THROWS_AS(parse("net(b)", ctx), ParseError);
}
