#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "prescurv/errors.hpp"
#include "prescurv/jacobian.hpp"
#include "prescurv/oracle.hpp"
#include "prescurv/problem.hpp"

using namespace prescurv;

namespace {

constexpr double two_pi = 2.0 * M_PI;

BaseGrid torus(int n) { return BaseGrid::flat_torus({n, n, n}, {two_pi, two_pi, two_pi}); }

CoefficientSpec coeff(double a, double eps = 0.0, std::vector<double> wave = {1, 0, 0}) {
    CoefficientSpec s;
    s.amplitude = a;
    s.epsilon = eps;
    if (eps > 0) s.profile.terms.push_back({1.0, std::move(wave), 0.0});
    return s;
}

Problem hyperbolic(int n, double eps = 0.0, double eps_max = 0.05) {
    return Problem(torus(n), WarpingFunction::space_form(-1.0), 2, {coeff(6.0, eps), coeff(1.0, eps, {0, 1, 0})},
                   PhiFunction{1.3, 1.0}, 1.0, 1.6, {}, eps_max);
}

GridFunction wavy(const BaseGrid& g, double base) {
    GridFunction u(g.size(), 0.0);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto x = g.coords(p);
        u[p] = base + 0.03 * std::sin(x[0]) + 0.02 * std::cos(x[1] - x[2]);
    }
    return u;
}

} // namespace

TEST_CASE("problem validates its order and bounds") {
    CHECK_THROWS_AS(Problem(torus(4), WarpingFunction::space_form(-1.0), 4, {coeff(1), coeff(1), coeff(1), coeff(1)},
                            PhiFunction{1.3, 1.0}, 1.0, 1.6),
                    ConfigError);
    CHECK_THROWS_AS(Problem(torus(4), WarpingFunction::space_form(-1.0), 2, {coeff(6), coeff(1)}, PhiFunction{1.3, 1.0},
                            1.6, 1.0),
                    ConfigError);
    CHECK_THROWS_AS(Problem(torus(4), WarpingFunction::space_form(1.0), 2, {coeff(6), coeff(1)}, PhiFunction{1.3, 1.0},
                            1.0, 1.6),
                    ConfigError);
    CHECK_THROWS_AS(Problem(torus(4), WarpingFunction::space_form(-1.0), 2, {coeff(6)}, PhiFunction{1.3, 1.0}, 1.0, 1.6),
                    ConfigError);
}

TEST_CASE("homotopy coefficient endpoints") {
    const auto pb = hyperbolic(4, 0.05);
    const auto w = pb.warp().eval(1.4);
    const auto a1 = pb.coefficients().eval(1, 1.4, 3, w);
    CHECK(problem::alpha_k1_homotopy(pb, 1.4, 3, 1.0).value == doctest::Approx(a1.value).epsilon(1e-15));
    CHECK(problem::alpha_k1_homotopy(pb, 1.4, 3, 1.0).du == doctest::Approx(a1.du).epsilon(1e-15));
    const auto w0 = pb.warp().eval(1.3);
    CHECK(pb.leaf_ratio() == 1.0);
    CHECK(problem::alpha_k1_homotopy(pb, 1.3, 0, 0.0).value == doctest::Approx(w0.df / w0.f).epsilon(1e-15));
}

TEST_CASE("homotopy coefficient derivative matches differences") {
    const auto pb = hyperbolic(4, 0.05);
    for (double t : {0.0, 0.4, 1.0}) {
        const double h = 1e-6;
        const double fd = (problem::alpha_k1_homotopy(pb, 1.35 + h, 5, t).value -
                           problem::alpha_k1_homotopy(pb, 1.35 - h, 5, t).value) / (2 * h);
        CHECK(problem::alpha_k1_homotopy(pb, 1.35, 5, t).du == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("hypotheses of the radial hyperbolic configuration") {
    const auto pb = hyperbolic(4);
    const auto rep = problem::check_hypotheses(pb);
    CHECK(rep.passed());
    const auto* as1 = rep.find("as-1");
    const auto* as2 = rep.find("as-2");
    const auto* as3 = rep.find("as-3");
    REQUIRE(as1);
    REQUIRE(as2);
    REQUIRE(as3);
    // balance times sinh^2 is 3 cosh^2 - 6 - 3 cosh; extreme at the bracket ends
    const double s2 = std::pow(std::sinh(1.6), 2), s1 = std::pow(std::sinh(1.0), 2);
    CHECK(as1->worst_u == doctest::Approx(1.6));
    CHECK(as1->worst_margin * s2 == doctest::Approx(6.19).epsilon(0.002));
    CHECK(as2->worst_u == doctest::Approx(1.0));
    CHECK(-as2->worst_margin * s1 == doctest::Approx(-3.49).epsilon(0.002));
    CHECK(as2->range_lo == doctest::Approx(0.25));
    CHECK(as3->worst_margin == 0.0);
    CHECK_NOTHROW(problem::enforce_hypotheses(rep));
}

TEST_CASE("constant alpha_0 violates the monotonicity hypothesis") {
    auto c0 = coeff(6.0);
    c0.f_power = 0.0;
    const Problem pb(torus(4), WarpingFunction::space_form(-1.0), 2, {c0, coeff(1.0)}, PhiFunction{1.3, 1.0}, 1.0, 1.6);
    const auto rep = problem::check_hypotheses(pb);
    CHECK_FALSE(rep.passed());
    CHECK_FALSE(rep.find("as-3")->passed);
    CHECK(rep.find("as-3")->worst_l == 0);
    try {
        problem::enforce_hypotheses(rep);
        FAIL("expected a hypothesis error");
    } catch (const HypothesisError& e) {
        // alpha_0 no longer decays, so the balance beyond r2 fails first
        CHECK(e.hypothesis() == "as-1");
        CHECK_FALSE(rep.find("as-1")->passed);
    }
}

TEST_CASE("hypothesis margins shrink as epsilon grows") {
    double prev1 = INFINITY, prev2 = INFINITY;
    for (double eps : {0.0, 0.02, 0.05}) {
        const auto rep = problem::check_hypotheses(hyperbolic(4, eps));
        CHECK(rep.find("as-1")->worst_margin <= prev1);
        CHECK(rep.find("as-2")->worst_margin <= prev2);
        prev1 = rep.find("as-1")->worst_margin;
        prev2 = rep.find("as-2")->worst_margin;
    }
    CHECK_FALSE(problem::check_hypotheses(hyperbolic(4, 0.08)).find("epsilon-range")->passed);
}

TEST_CASE("phi conditions fail for a pivot outside the annulus") {
    const Problem pb(torus(4), WarpingFunction::space_form(-1.0), 2, {coeff(6), coeff(1)}, PhiFunction{1.6, 1.0}, 1.0, 1.6);
    const auto rep = problem::check_hypotheses(pb);
    CHECK_FALSE(rep.find("phi-c")->passed);
    CHECK(rep.find("phi-b")->passed);
}

TEST_CASE("residual vanishes on the leaves it should") {
    const auto pb = hyperbolic(6);
    CHECK(problem::residual(GridFunction(pb.grid().size(), 1.3), 0.0, pb).max_abs() <= 1e-12);
    const double ustar = std::acosh(2.0);
    CHECK(problem::residual(GridFunction(pb.grid().size(), ustar), 1.0, pb).max_abs() <= 1e-12);
    const auto top = problem::residual(GridFunction(pb.grid().size(), 1.6), 1.0, pb);
    for (double v : top.values) CHECK(v >= 0.0);
}

TEST_CASE("residual is affine in t") {
    const auto pb = hyperbolic(5, 0.05);
    const auto u = wavy(pb.grid(), 1.35);
    const auto f0 = problem::residual(u, 0.0, pb), f1 = problem::residual(u, 1.0, pb);
    for (double t : {0.25, 0.6}) {
        const auto ft = problem::residual(u, t, pb), fs = problem::residual(u, 1.0 - t, pb);
        for (std::size_t p = 0; p < u.size(); ++p) {
            CHECK(std::abs(ft[p] - ((1 - t) * f0[p] + t * f1[p])) <= 1e-12);
            CHECK(std::abs(ft[p] + fs[p] - f0[p] - f1[p]) <= 1e-12);
        }
    }
}

TEST_CASE("a sharp dip leaves the cone at that node") {
    const auto pb = hyperbolic(12);
    GridFunction u(pb.grid().size(), 1.3);
    u[40] = 0.8;
    try {
        problem::residual(u, 0.5, pb);
        FAIL("expected a cone exit");
    } catch (const ConeExitError& e) {
        CHECK(e.node() == 40);
        CHECK(e.lambda().size() == 3);
        CHECK(std::string(e.what()).find("node 40") != std::string::npos);
    }
}

TEST_CASE("values outside the warping domain are domain errors") {
    const Problem pb(torus(4), WarpingFunction::power(2.0), 2, {coeff(3), coeff(1)}, PhiFunction{0.85, 1.0}, 0.5, 1.2);
    GridFunction u(pb.grid().size(), 0.85);
    u[3] = -0.1;
    CHECK_THROWS_AS(problem::residual(u, 0.5, pb), DomainError);
}

TEST_CASE("stencil coloring separates columns that share a row") {
    for (const auto& grid : {torus(6), BaseGrid::sphere2(8, 16), BaseGrid::flat_torus({5, 7}, {1.0, 2.0})}) {
        const auto c = color_stencil_graph(grid);
        std::size_t total = 0;
        for (const auto& group : c.groups) {
            total += group.size();
            std::set<std::size_t> rows;
            for (std::size_t q : group)
                for (std::size_t r : c.rows[q]) CHECK(rows.insert(r).second);
        }
        CHECK(total == grid.size());
        CHECK(c.count() < 64);
    }
}

TEST_CASE("Jacobian of the constant mode at the start of the homotopy") {
    const auto pb = hyperbolic(6);
    const GridFunction u(pb.grid().size(), 1.3);
    const auto w = pb.warp().eval(1.3);
    const double expect = -pb.phi().derivative(1.3) * pb.leaf_ratio() * w.df / w.f;
    CHECK(expect > 0.0);
    for (auto mode : {JacobianMode::ColoredFiniteDifference, JacobianMode::Analytic}) {
        const auto J = jacobian(u, 0.0, pb, mode);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(J.cols());
        const Eigen::VectorXd r = J * ones;
        for (Eigen::Index i = 0; i < r.size(); ++i) CHECK(r[i] == doctest::Approx(expect).epsilon(1e-7));
    }
}

TEST_CASE("Jacobian of a constant field is translation invariant") {
    const auto pb = hyperbolic(6);
    const GridFunction u(pb.grid().size(), 1.4);
    const Eigen::MatrixXd J = Eigen::MatrixXd(jacobian(u, 0.7, pb, JacobianMode::ColoredFiniteDifference));
    const auto& g = pb.grid();
    const int shift[3] = {2, 5, 1};
    for (std::size_t p = 0; p < g.size(); p += 7)
        for (std::size_t q = 0; q < g.size(); ++q) {
            auto mp = g.multi_index(p), mq = g.multi_index(q);
            for (int a = 0; a < 3; ++a) {
                mp[a] += shift[a];
                mq[a] += shift[a];
            }
            CHECK(J(static_cast<Eigen::Index>(g.index(mp)), static_cast<Eigen::Index>(g.index(mq))) ==
                  doctest::Approx(J(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q))).epsilon(1e-9));
        }
}

TEST_CASE("Jacobian paths agree with directional differences") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (const auto& grid : {torus(6), BaseGrid::sphere2(8, 16)}) {
        const int n = grid.dim();
        std::vector<CoefficientSpec> specs;
        for (int l = 0; l < 2; ++l) {
            auto s = coeff(l == 0 ? 6.0 : 1.0);
            s.epsilon = 0.05;
            if (n == 3) s.profile.terms.push_back({1.0, {1.0, 0.0, 1.0}, 0.2});
            else s.profile.linear = {0.3, -0.2, 0.5};
            specs.push_back(s);
        }
        const Problem pb(grid, WarpingFunction::space_form(-1.0), 2, specs, PhiFunction{1.3, 1.0}, 1.0, 1.6);
        GridFunction u(grid.size(), 0.0);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const auto e = n == 3 ? std::array<double, 3>{std::sin(grid.coords(p)[0]), std::cos(grid.coords(p)[1]), 0.0}
                                  : grid.embedding(p);
            u[p] = 1.3 + 0.03 * e[0] + 0.02 * e[1] + 0.01 * e[2];
        }
        JacobianAssembler A(pb);
        const auto Jfd = A.colored_fd(u, 0.6);
        const auto Jan = A.analytic(u, 0.6);
        for (int trial = 0; trial < 3; ++trial) {
            // white noise on the torus; on the coarse sphere the oracle's own O(h^2)
            // truncation near the poles exceeds 1e-6 for rough directions, so use
            // random low-degree harmonics there
            GridFunction dir(grid.size(), 0.0);
            if (n == 3) {
                for (auto& x : dir.values) x = d(rng);
            } else {
                const double c[5] = {d(rng), d(rng), d(rng), d(rng), d(rng)};
                for (std::size_t p = 0; p < grid.size(); ++p) {
                    const auto e = grid.embedding(p);
                    dir[p] = c[0] + c[1] * e[0] + c[2] * e[1] + c[3] * e[2] + c[4] * e[0] * e[2];
                }
            }
            const auto ref = oracle::fd_directional(u, dir, 0.6, pb);
            const Eigen::Map<const Eigen::VectorXd> dv(dir.values.data(), static_cast<Eigen::Index>(dir.size()));
            const Eigen::Map<const Eigen::VectorXd> rv(ref.values.data(), static_cast<Eigen::Index>(ref.size()));
            const double scale = rv.lpNorm<Eigen::Infinity>();
            CHECK((Jfd * dv - rv).lpNorm<Eigen::Infinity>() / scale <= 1e-6);
            CHECK((Jan * dv - rv).lpNorm<Eigen::Infinity>() / scale <= 1e-6);
        }
    }
}

TEST_CASE("Jacobian rows have the sign pattern of an elliptic operator") {
    const auto pb = hyperbolic(6, 0.05);
    const auto u = wavy(pb.grid(), 1.3);
    const auto J = jacobian(u, 0.5, pb, JacobianMode::Analytic);
    // -a^{ij} w_ij with a positive definite: positive diagonal, negative off-diagonal row sum
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(J.rows()), off = Eigen::VectorXd::Zero(J.rows());
    for (Eigen::Index col = 0; col < J.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(J, col); it; ++it) {
            if (it.row() == it.col()) diag[it.row()] += it.value();
            else off[it.row()] += it.value();
        }
    CHECK(diag.minCoeff() > 0.0);
    CHECK(off.maxCoeff() < 0.0);
}

TEST_CASE("coefficient tables from CSV") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "prescurv_test_tables";
    fs::create_directories(dir);
    const auto grid = torus(4);
    {
        std::ofstream out(dir / "good.csv");
        out << "u,node,value\n";
        for (double u : {0.9, 1.2, 1.5, 1.8})
            for (std::size_t p = 0; p < grid.size(); ++p) out << u << ',' << p << ',' << 2.0 * u << '\n';
    }
    const auto t = CoefficientTable::read_csv((dir / "good.csv").string(), grid.size());
    CHECK(t.eval(1.3, 7).value == doctest::Approx(2.6));
    CHECK(t.eval(1.3, 7).du == doctest::Approx(2.0));
    CHECK_THROWS_AS(t.eval(2.0, 0), DomainError);
    {
        std::ofstream out(dir / "bad.csv");
        out << "u,node,value\n0.9,0,1\n0.9,x,1\n";
    }
    try {
        CoefficientTable::read_csv((dir / "bad.csv").string(), grid.size());
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bad.csv:3:") != std::string::npos);
    }
    {
        std::ofstream out(dir / "short.csv");
        out << "u,node,value\n0.9,0,1\n1.2,0,1\n";
    }
    CHECK_THROWS_AS(CoefficientTable::read_csv((dir / "short.csv").string(), grid.size()), ConfigError);
    fs::remove_all(dir);
}
