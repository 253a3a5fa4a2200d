#include <doctest.h>

#include <cmath>

#include "prescurv/errors.hpp"
#include "prescurv/oracle.hpp"
#include "prescurv/problem.hpp"

using namespace prescurv;
using V = std::vector<double>;

TEST_CASE("brute_sigma literal sums") {
    CHECK(oracle::brute_sigma(V{1, 2, 3}, 3) == 6.0);
    CHECK(oracle::brute_sigma(V{1, 1, 1, 1}, 2) == 6.0);
    CHECK(oracle::brute_sigma(V{1, 2, 3}, 0) == 1.0);
    CHECK_THROWS_AS(oracle::brute_sigma(V(13, 1.0), 2), DomainError);
    CHECK_THROWS_AS(oracle::brute_sigma(V{1, 2}, 3), DomainError);
}

TEST_CASE("radial root of the hyperbolic example") {
    const auto r = oracle::radial_root({WarpingFunction::space_form(-1.0), 3, 2, {6.0, 1.0}, 1.0, 1.6});
    CHECK(r.u == doctest::Approx(std::acosh(2.0)).epsilon(1e-14));
    CHECK(std::abs(r.balance) <= 1e-12);
    CHECK(r.iterations <= 60);
    CHECK(r.u == doctest::Approx(1.316958).epsilon(1e-6));
}

TEST_CASE("radial root for the power warping") {
    const auto r = oracle::radial_root({WarpingFunction::power(2.0), 3, 2, {3.0, 1.0}, 0.5, 1.2});
    CHECK(r.u == doctest::Approx((6.0 + std::sqrt(180.0)) / 24.0).epsilon(1e-13));
    CHECK(r.u == doctest::Approx(0.80902).epsilon(1e-5));
}

TEST_CASE("euclidean radial balance has no root") {
    const oracle::RadialProblem p{WarpingFunction::space_form(0.0), 3, 2, {1.0, 0.5}, 0.5, 2.0};
    // kappa = 1/u cancels the f^{-(k-l)} scaling
    CHECK(oracle::radial_balance(p, 0.7) * 0.49 == doctest::Approx(oracle::radial_balance(p, 1.9) * 3.61));
    CHECK_THROWS_AS(oracle::radial_root(p), HypothesisError);
}

TEST_CASE("radial root solves the discrete equation") {
    const auto warp = WarpingFunction::space_form(-0.7);
    const oracle::RadialProblem rp{warp, 3, 3, {1.0, 1.5, 0.5}, 0.8, 2.5};
    const double u = oracle::radial_root(rp).u;
    std::vector<CoefficientSpec> specs(3);
    for (int l = 0; l < 3; ++l) specs[l].amplitude = rp.amplitudes[l];
    const Problem pb(BaseGrid::flat_torus({5, 5, 5}, {6.0, 6.0, 6.0}), warp, 3, specs, PhiFunction{1.5, 1.0}, 0.8, 2.5);
    CHECK(problem::residual(GridFunction(pb.grid().size(), u), 1.0, pb).max_abs() <= 1e-10);
}

TEST_CASE("directional differences") {
    std::vector<CoefficientSpec> specs(2);
    specs[0].amplitude = 6.0;
    specs[1].amplitude = 1.0;
    const Problem pb(BaseGrid::flat_torus({5, 5, 5}, {6.0, 6.0, 6.0}), WarpingFunction::space_form(-1.0), 2, specs,
                     PhiFunction{1.3, 2.0}, 1.0, 1.6);
    const double c = 1.45;
    const GridFunction u(pb.grid().size(), c);
    CHECK(oracle::fd_directional(u, GridFunction(u.size(), 0.0), 0.0, pb).max_abs() == 0.0);

    // at t = 0 on a leaf F = ratio kappa (1 - phi)
    const auto w = pb.warp().eval(c);
    const double kappa = w.df / w.f, dkappa = w.d2f / w.f - kappa * kappa;
    const double phi = pb.phi().value(c), dphi = pb.phi().derivative(c);
    const double expect = pb.leaf_ratio() * (dkappa * (1.0 - phi) - dphi * kappa);
    const auto d = oracle::fd_directional(u, GridFunction(u.size(), 1.0), 0.0, pb);
    for (double x : d.values) CHECK(x == doctest::Approx(expect).epsilon(1e-8));
}
