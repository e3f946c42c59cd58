#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "microloc/quadrature.hpp"
#include "microloc/symbol.hpp"

using namespace microloc;
using Complex = std::complex<double>;

namespace {

SymbolFamily sym1(std::map<std::vector<int>, std::string> coeffs, int n = 1) {
    std::map<MultiIndex, Expr> m;
    for (auto& [a, src] : coeffs) m.emplace(MultiIndex{std::vector<int>(a)}, parse(src, n));
    return SymbolFamily(n, std::move(m));
}

const SymbolFamily kElliptic = sym1({{{2}, "1"}, {{0}, "1"}});          // xi^2 + 1
const SymbolFamily kAx = sym1({{{1}, "x1"}});                           // a(x) xi, a = x
const SymbolFamily kD2 = sym1({{{2}, "1"}});                            // D^2

SymbolFamily acoustic_smooth() {
    // -tau^2 + c(x)^2 xi^2 - i c(x)^2 (rho'/rho) xi with c = 1.5 + sin(x1)/2,
    // rho = exp(0.3 sin x1)
    return sym1({{{0, 2}, "-1"},
                 {{2, 0}, "(1.5 + 0.5*sin(x1))^2"},
                 {{1, 0}, "-i*(1.5 + 0.5*sin(x1))^2*0.3*cos(x1)"}},
                2);
}

SymbolFamily acoustic_constant() {
    return sym1({{{0, 2}, "-1"}, {{2, 0}, "1"}}, 2); // c = rho = 1
}

Complex eval_sym(const SymbolFamily& P, std::vector<double> x, std::vector<double> xi,
                 double eps) {
    return P.eval(std::span<const double>(x), std::span<const double>(xi), eps);
}

/// int over [-L,L]^1 of f, Gauss-Legendre composite.
Complex integrate_box(const std::function<Complex(double)>& f, double L) {
    return integrate_1d(f, -L, L, 24, 32);
}

} // namespace

TEST_CASE("eval_symbol") {
    REQUIRE(eval_sym(kElliptic, {0.0}, {2.0}, 0.5) == Complex(5.0, 0.0));
    REQUIRE(eval_sym(kAx, {2.0}, {3.0}, 0.5) == Complex(6.0, 0.0));
    // constant-coefficient acoustic specialization vanishes at (xi,tau)=(1,1)
    REQUIRE(eval_sym(acoustic_constant(), {0.3, 0.1}, {1.0, 1.0}, 0.5) ==
            Complex(0.0, 0.0));
}

TEST_CASE("deriv_symbol") {
    const auto d1 = kElliptic.derivative(MultiIndex::zero(1), MultiIndex::unit(1, 0));
    REQUIRE(eval_sym(d1, {0.0}, {3.0}, 0.5) == Complex(6.0, 0.0)); // 2 xi at xi=3

    const auto ax2 = sym1({{{1}, "x1^2"}});
    const auto dx = ax2.derivative(MultiIndex::unit(1, 0), MultiIndex::zero(1));
    REQUIRE(eval_sym(dx, {3.0}, {5.0}, 0.5) == Complex(30.0, 0.0)); // 2x xi

    // d_xi^2 (xi^3) = 6 xi, checked against a finite difference in xi
    const auto cubic = sym1({{{3}, "1"}});
    const auto dxi2 =
        cubic.derivative(MultiIndex::zero(1), MultiIndex{std::vector<int>{2}});
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 20; ++k) {
        const double xi = u(rng);
        const double h = 1e-4;
        const Complex fdd = (eval_sym(cubic, {0.0}, {xi + h}, 0.5) -
                             2.0 * eval_sym(cubic, {0.0}, {xi}, 0.5) +
                             eval_sym(cubic, {0.0}, {xi - h}, 0.5)) /
                            Complex(h * h, 0.0);
        const Complex got = eval_sym(dxi2, {0.0}, {xi}, 0.5);
        REQUIRE(std::abs(got - fdd) <= 1e-6 * (1.0 + std::abs(got)));
        REQUIRE(std::abs(got - Complex(6.0 * xi, 0.0)) < 1e-12);
    }
}

TEST_CASE("principal_part") {
    const auto pe = kElliptic.principal_part();
    REQUIRE(pe.coefficients().size() == 1);
    REQUIRE(eval_sym(pe, {0.0}, {2.0}, 0.5) == Complex(4.0, 0.0));

    const auto pa = acoustic_smooth().principal_part();
    REQUIRE(pa.degree() == 2);
    // lower-order -i b xi term dropped
    const double c = 1.5 + 0.5 * std::sin(0.4);
    REQUIRE(std::abs(eval_sym(pa, {0.4, 0.0}, {2.0, 1.0}, 0.5) -
                     Complex(-1.0 + c * c * 4.0, 0.0)) < 1e-14);

    const auto first = sym1({{{1}, "x1"}, {{0}, "3"}});
    const auto pf = first.principal_part();
    REQUIRE(pf.coefficients().size() == 1);
    REQUIRE(eval_sym(pf, {2.0}, {5.0}, 0.5) == Complex(10.0, 0.0));
}

TEST_CASE("transpose: constant coefficients flip odd monomial signs") {
    const auto t = kElliptic.transpose();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 50; ++k) {
        const double xi = u(rng);
        REQUIRE(std::abs(eval_sym(t, {0.0}, {xi}, 0.5) -
                         eval_sym(kElliptic, {0.0}, {-xi}, 0.5)) < 1e-13);
    }
    // structural: coefficient of eta^1 in t(a xi + b) is -a
    const auto lin = sym1({{{1}, "2"}, {{0}, "5"}});
    const auto tl = lin.transpose();
    REQUIRE(eval_sym(tl, {0.0}, {1.0}, 0.5) == Complex(3.0, 0.0)); // -2 + 5
}

TEST_CASE("transpose of a(x) xi is -a(x) eta + i a'(x)") {
    const auto t = kAx.transpose();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
        const double x = u(rng), eta = u(rng);
        const Complex expect = Complex(-x * eta, 0.0) + Complex(0.0, 1.0);
        REQUIRE(std::abs(eval_sym(t, {x}, {eta}, 0.5) - expect) < 1e-13);
    }
}

TEST_CASE("integration-by-parts oracle fixes the transpose convention") {
    // int (P u) v dx = int u (tP v) dx for compactly supported u, v
    const Expr u = parse("bump(x1; -0.2; 0.8) * (1 + x1)", 1);
    const Expr v = parse("bump(x1; 0.3; 0.6) * sin(3*x1)", 1);
    const std::vector<SymbolFamily> ops{
        kAx, kElliptic, kD2, sym1({{{1}, "sin(x1)"}, {{0}, "x1^2"}}),
        sym1({{{2}, "2 + cos(x1)"}, {{1}, "x1"}, {{0}, "1"}})};
    for (const auto& P : ops) {
        const Expr Pu = P.apply(u);
        const Expr tPv = P.transpose().apply(v);
        const auto lhs = integrate_box(
            [&](double x) { return eval(Pu, {x}, 0.5) * eval(v, {x}, 0.5); }, 1.2);
        const auto rhs = integrate_box(
            [&](double x) { return eval(u, {x}, 0.5) * eval(tPv, {x}, 0.5); }, 1.2);
        REQUIRE(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("transpose is an involution") {
    const std::vector<SymbolFamily> ops{kAx, kElliptic,
                                        sym1({{{2}, "2 + cos(x1)"}, {{1}, "x1"}}),
                                        acoustic_smooth()};
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const auto& P : ops) {
        const auto tt = P.transpose().transpose();
        const int n = P.dimension();
        for (int k = 0; k < 100; ++k) {
            std::vector<double> x(n), xi(n);
            for (auto& z : x) z = u(rng);
            for (auto& z : xi) z = u(rng);
            const Complex a = P.eval(x, xi, 0.5);
            const Complex b = tt.eval(x, xi, 0.5);
            REQUIRE(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a)));
        }
    }
}

TEST_CASE("apply_to_modulated: first-order and second-order shapes") {
    const auto D = sym1({{{1}, "1"}});
    const Expr one = make_const(1.0);
    const std::vector<double> xi{2.0};
    const Expr h = D.apply_to_modulated(one, xi);
    REQUIRE(eval(h, {0.7}, 0.5) == Complex(-2.0, 0.0)); // D e^{-i xi x} = -xi e^{-i xi x}

    // P = D^2, g arbitrary: h = xi^2 g - 2 xi D g + D^2 g
    const Expr g = parse("bump(x1; 0; 1)*x1 + sin(x1)", 1);
    const Expr h2 = kD2.apply_to_modulated(g, xi);
    const Expr Dg = make_prod({make_const(Complex(0, -1)), diff(g, 0)});
    const Expr D2g = make_prod({make_const(-1.0), diff(diff(g, 0), 0)});
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 60; ++k) {
        const double x = u(rng);
        const Complex expect = 4.0 * eval(g, {x}, 0.5) - 2.0 * 2.0 * eval(Dg, {x}, 0.5) +
                               eval(D2g, {x}, 0.5);
        REQUIRE(std::abs(eval(h2, {x}, 0.5) - expect) <= 1e-12 * (1.0 + std::abs(expect)));
    }
}

TEST_CASE("apply_to_modulated agrees with direct symbolic expansion") {
    // e^{-i xi x} h(x) = P(x,D)(g e^{-i xi x}), with the exponential built
    // symbolically and differentiated directly
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const std::vector<SymbolFamily> ops{
        kAx, kElliptic, sym1({{{2}, "2 + cos(x1)"}, {{1}, "x1"}, {{0}, "eps^1"}})};
    const Expr g = parse("bump(x1; 0; 1)*(1 + x1^2)", 1);
    for (const auto& P : ops) {
        for (double xi : {0.7, -1.3, 4.0}) {
            const Expr modulator =
                make_exp(make_prod({make_const(Complex(0.0, -xi)), make_var(0)}));
            const Expr direct = P.apply(make_prod({g, modulator}));
            const std::vector<double> xiv{xi};
            const Expr h = P.apply_to_modulated(g, xiv);
            for (int k = 0; k < 40; ++k) {
                const double x = u(rng);
                const Complex lhs = eval(direct, {x}, 0.25);
                const Complex rhs = eval(h, {x}, 0.25) * eval(modulator, {x}, 0.25);
                REQUIRE(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));
            }
        }
    }
}

TEST_CASE("apply_to_modulated with g = 1 recovers P(x,-xi)") {
    const auto P = sym1({{{2}, "2 + cos(x1)"}, {{1}, "x1"}, {{0}, "1"}});
    const std::vector<double> xi{1.7};
    const Expr h = P.apply_to_modulated(make_const(1.0), xi);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 40; ++k) {
        const double x = u(rng);
        REQUIRE(std::abs(eval(h, {x}, 0.5) - eval_sym(P, {x}, {-1.7}, 0.5)) < 1e-13);
    }
}

TEST_CASE("polynomial-exactness of eval in xi") {
    // interpolating a degree-m symbol at m+1 nodes recovers its values
    const auto P = sym1({{{2}, "2 + cos(x1)"}, {{1}, "x1"}, {{0}, "1"}});
    const double x = 0.37;
    const std::vector<double> nodes{-1.0, 0.5, 2.0};
    auto lagrange = [&](double xi) {
        Complex s{};
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            double w = 1;
            for (std::size_t j = 0; j < nodes.size(); ++j)
                if (i != j) w *= (xi - nodes[j]) / (nodes[i] - nodes[j]);
            s += w * eval_sym(P, {x}, {nodes[i]}, 0.5);
        }
        return s;
    };
    for (double xi : {-3.0, 0.1, 5.0})
        REQUIRE(std::abs(lagrange(xi) - eval_sym(P, {x}, {xi}, 0.5)) < 1e-10);
}

TEST_CASE("JSON round trip") {
    const auto P = acoustic_smooth();
    const auto j = P.to_json();
    const auto back = SymbolFamily::from_json(j, ParseContext{});
    REQUIRE(back.dimension() == 2);
    REQUIRE(back.degree() == 2);
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> x{u(rng), u(rng)}, xi{u(rng), u(rng)};
        const Complex a = P.eval(x, xi, 0.5);
        const Complex b = back.eval(x, xi, 0.5);
        REQUIRE(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
    }
}
