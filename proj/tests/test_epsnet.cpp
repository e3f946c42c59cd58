#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <sstream>

#include "microloc/epsnet.hpp"

using namespace microloc;
using Complex = std::complex<double>;

namespace {

EpsNet power_net(const EpsGrid& g, double a) {
    return EpsNet::from_function(g, [a](double e) { return Complex(std::pow(e, a), 0.0); });
}

} // namespace

TEST_CASE("grid constructors and invariants") {
    const auto g = EpsGrid::dyadic(1, 40);
    REQUIRE(g.size() == 40);
    REQUIRE(g[0] == 0.5);
    REQUIRE(g[39] == std::ldexp(1.0, -40));

    const auto rm = EpsGrid::reciprocal_with_midpoints(2, 12);
    for (int k = 2; k <= 12; ++k) {
        REQUIRE_NOTHROW(rm.index_of(1.0 / k));
        REQUIRE_NOTHROW(rm.index_of(2.0 / (2 * k + 1)));
    }
    for (std::size_t i = 1; i < rm.size(); ++i) REQUIRE(rm[i] < rm[i - 1]);

    REQUIRE_THROWS_AS(EpsGrid::custom({0.5, 0.25, 0.125}), Error); // too few
    REQUIRE_THROWS_AS(EpsGrid::custom({0.5, 0.6, 0.4, 0.3, 0.2, 0.1, 0.05, 0.01}), Error);
}

TEST_CASE("estimate_order: exact power laws") {
    const auto g = EpsGrid::dyadic(1, 40);
    // exact on eps^a for a in {-3..3}
    for (int a = -3; a <= 3; ++a) {
        const auto est = estimate_order(power_net(g, a));
        REQUIRE(std::abs(est.kappa_hat - a) < 1e-9);
        REQUIRE(est.fit_quality >= 1.0 - 1e-9);
    }
    const auto est_half = estimate_order(power_net(g, -0.5));
    REQUIRE(std::abs(est_half.kappa_hat + 0.5) < 1e-9);
}

TEST_CASE("estimate_order: log(1/eps) net against the analytic slope") {
    const auto g = EpsGrid::dyadic(1, 40);
    const auto net =
        EpsNet::from_function(g, [](double e) { return Complex(std::log(1.0 / e), 0.0); });

    // oracle: d(ln ln(1/eps))/d(ln eps) = -1/ln(1/eps) at the tail midpoint
    const auto tail = g.tail_indices(0.5);
    const double eps_mid = g[tail[tail.size() / 2]];
    const double oracle = -1.0 / std::log(1.0 / eps_mid);
    const auto est = estimate_order(net, 0.5);
    REQUIRE(std::abs(est.kappa_hat - oracle) < 0.01);

    // shorter tails track the eps_min slope -1/ln(1/eps_min) ~ -0.0361
    const auto est4 = estimate_order(net, 0.25);
    REQUIRE(std::abs(est4.kappa_hat + 1.0 / std::log(1.0 / g[39])) < 0.01);
}

TEST_CASE("estimate_order: zero handling") {
    const auto g = EpsGrid::dyadic(1, 8); // tail = last 5
    // majority-zero tail -> +inf
    auto maj = EpsNet::from_function(g, [&](double e) {
        return e < 0.05 ? Complex(0.0) : Complex(1.0);
    }); // indices 4..7 are below 0.05 -> 4 zeros of 5-point tail
    const auto est = estimate_order(maj);
    REQUIRE(std::isinf(est.kappa_hat));
    REQUIRE(est.zero_count == 4);

    // two zeros in a 5-point tail leaves 3 usable -> degenerate
    std::vector<Complex> vals(8, Complex(1.0));
    vals[4] = vals[5] = 0.0;
    const EpsNet holes(g, vals);
    REQUIRE_THROWS_AS(estimate_order(holes), DegenerateFitError);
    try {
        estimate_order(holes);
    } catch (const DegenerateFitError& err) {
        REQUIRE(err.zero_count() == 2);
    }
}

TEST_CASE("classify_net on the reference families") {
    const auto g = EpsGrid::dyadic(1, 40);
    REQUIRE(classify_net(EpsNet::from_function(g, [](double) { return Complex(3.0); })) ==
            NetClass::SlowScale);
    REQUIRE(classify_net(power_net(g, -0.5)) == NetClass::Moderate);
    REQUIRE(classify_net(EpsNet::from_function(g, [](double e) {
                return Complex(std::log(1.0 / e), 0.0);
            })) == NetClass::SlowScale);
    REQUIRE(classify_net(power_net(g, 30.0)) == NetClass::Null);

    // super-polynomial growth: exp(1/eps) on a reciprocal grid
    const auto rg = EpsGrid::reciprocal_integers(2, 500);
    const auto fast =
        EpsNet::from_function(rg, [](double e) { return Complex(std::exp(1.0 / e), 0.0); });
    REQUIRE(classify_net(fast) == NetClass::ImmoderateSuspect);
}

TEST_CASE("classification is invariant under nonzero scaling") {
    const auto g = EpsGrid::dyadic(1, 40);
    const std::vector<Complex> lambdas{{2.0, 0.0}, {-5.0, 0.0}, {0.0, 3.0}};
    const std::vector<EpsNet> nets{
        power_net(g, -0.5), power_net(g, 2.0),
        EpsNet::from_function(g, [](double e) { return Complex(std::log(1.0 / e), 0.0); })};
    for (const auto& net : nets) {
        const auto base = classify_net(net);
        for (const auto& l : lambdas) {
            const auto scaled = net.map([&](Complex v) { return l * v; });
            REQUIRE(classify_net(scaled) == base);
        }
    }
}

TEST_CASE("check_invertible") {
    const auto g = EpsGrid::dyadic(1, 40);
    const auto cube = check_invertible(power_net(g, 3.0));
    REQUIRE(cube.invertible);
    REQUIRE(cube.p_hat == 3);

    const auto two =
        check_invertible(EpsNet::from_function(g, [](double) { return Complex(2.0); }));
    REQUIRE(two.invertible);
    REQUIRE(two.p_hat == 0);

    // zero divisor: 0 exactly when 1/eps is an integer, i otherwise
    const auto rm = EpsGrid::reciprocal_with_midpoints(2, 40);
    const auto zd = EpsNet::from_function(rm, [](double e) {
        const double k = 1.0 / e;
        return std::abs(k - std::round(k)) < 1e-9 ? Complex(0.0) : Complex(0.0, 1.0);
    });
    const auto v = check_invertible(zd);
    REQUIRE_FALSE(v.invertible);
    REQUIRE(v.zero_witnesses.size() == 39); // every 1/k point, k = 2..40
    for (double w : v.zero_witnesses) {
        const double k = 1.0 / w;
        REQUIRE(std::abs(k - std::round(k)) < 1e-6);
    }
}

TEST_CASE("invertible nets have well-behaved reciprocals") {
    const auto g = EpsGrid::dyadic(1, 40);
    for (double a : {0.0, 1.0, 3.0}) {
        const auto net = power_net(g, a);
        REQUIRE(check_invertible(net).invertible);
        const auto recip = net.map([](Complex v) { return 1.0 / v; });
        REQUIRE(classify_net(recip) != NetClass::ImmoderateSuspect);
    }
}

TEST_CASE("kappa_hat unchanged under grid refinement on power nets") {
    const auto coarse = EpsGrid::dyadic(1, 20);
    std::vector<double> refined_vals;
    for (int j = 1; j <= 20; ++j) {
        refined_vals.push_back(std::ldexp(1.0, -j));
        if (j < 20) refined_vals.push_back(std::ldexp(1.0, -j) * 0.7071067811865476);
    }
    const auto fine = EpsGrid::custom(refined_vals);
    for (int a = -2; a <= 2; ++a) {
        const auto e1 = estimate_order(power_net(coarse, a));
        const auto e2 = estimate_order(power_net(fine, a));
        REQUIRE(std::abs(e1.kappa_hat - e2.kappa_hat) < 1e-9);
    }
}

TEST_CASE("CSV round trip") {
    const auto g = EpsGrid::dyadic(1, 10);
    const auto net = EpsNet::from_function(
        g, [](double e) { return Complex(std::sqrt(e), -1.5 * e); });
    std::stringstream ss;
    write_csv(net, ss);
    const auto back = read_csv(ss);
    REQUIRE(back.size() == net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        REQUIRE(back.grid()[i] == net.grid()[i]);
        REQUIRE(back[i] == net[i]);
    }
}
