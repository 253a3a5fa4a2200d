#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>

#include "prescurv/app/archive.hpp"
#include "prescurv/app/commands.hpp"
#include "prescurv/errors.hpp"
#include "prescurv/geometry.hpp"
#include "prescurv/jacobian.hpp"
#include "prescurv/oracle.hpp"
#include "prescurv/solver.hpp"
#include "prescurv/symfunc.hpp"

namespace prescurv::app {

namespace {

struct Case {
    std::string family;
    std::string name;
    double value = 0.0;     // measured quantity
    double tolerance = 0.0; // pass iff value <= tolerance (or >= for lower bounds)
    bool lower_bound = false;
    bool passed = false;
    ojson replay;
    std::string error;

    double margin() const { return lower_bound ? value - tolerance : tolerance - value; }
};

struct Context {
    std::mt19937_64 rng;
    bool negate = false;
};

Case make_case(std::string family, std::string name, double value, double tol, bool lower, ojson replay) {
    Case c{std::move(family), std::move(name), value, tol, lower, false, std::move(replay), {}};
    c.passed = std::isfinite(value) && (lower ? value >= tol : value <= tol);
    return c;
}

Case error_case(std::string family, std::string name, const std::string& what, ojson replay) {
    Case c;
    c.family = std::move(family);
    c.name = std::move(name);
    c.value = std::numeric_limits<double>::quiet_NaN();
    c.error = what;
    c.replay = std::move(replay);
    return c;
}

std::vector<double> draw(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = d(rng);
    return v;
}

// sigma_k(|lam|): the natural scale of the subset sum
double abs_scale(const std::vector<double>& lam, int k) {
    std::vector<double> a(lam.size());
    std::transform(lam.begin(), lam.end(), a.begin(), [](double x) { return std::abs(x); });
    return symfunc::elem_sym(a, k);
}

std::vector<Case> sigma_brute(Context& ctx) {
    std::uniform_int_distribution<int> nd(3, 8);
    double worst = 0.0;
    ojson worst_lam;
    int worst_k = 0;
    for (int draw_i = 0; draw_i < 1000; ++draw_i) {
        const int n = nd(ctx.rng);
        const auto lam = draw(ctx.rng, n, -2.0, 2.0);
        for (int k = 0; k <= n; ++k) {
            const double a = symfunc::elem_sym(lam, k);
            const double b = oracle::brute_sigma(lam, k);
            const double rel = std::abs(a - b) / std::max(abs_scale(lam, k), 1e-300);
            if (rel > worst) {
                worst = rel;
                worst_lam = lam;
                worst_k = k;
            }
        }
    }
    return {make_case("sigma-brute", "1000 draws, n in 3..8, all k", worst, 1e-12, false,
                      ojson{{"lambda", worst_lam}, {"k", worst_k}})};
}

std::vector<Case> newton_maclaurin(Context& ctx) {
    std::vector<Case> out;
    for (int n = 3; n <= 8; ++n) {
        double worst = std::numeric_limits<double>::infinity();
        ojson replay;
        int accepted = 0;
        std::uniform_int_distribution<int> kd(2, n);
        while (accepted < 1000) {
            const int k = kd(ctx.rng);
            const auto lam = draw(ctx.rng, n, -1.0, 2.0);
            if (!symfunc::inside_cone(lam, k)) continue;
            ++accepted;
            const auto e = symfunc::elem_sym_all(lam, k);
            for (int l = 0; l < k; ++l)
                for (int r = 1; r <= k; ++r)
                    for (int s = 0; s < r && s <= l; ++s) {
                        const auto m = symfunc::newton_maclaurin_margins(lam, k, l, r, s);
                        // product form relative to the size of its two terms
                        const double lm1 = l >= 1 ? e[l - 1] : 0.0;
                        const double scale = l * (n - k + 1) * std::abs(e[l] * e[k - 1]) +
                                             k * (n - l + 1) * std::abs(lm1 * e[k]);
                        const double v = std::min(m.product_form / std::max(scale, 1e-300), m.quotient_form);
                        if (v < worst) {
                            worst = v;
                            replay = ojson{{"lambda", lam}, {"k", k}, {"l", l}, {"r", r}, {"s", s}};
                        }
                    }
        }
        out.push_back(make_case("newton-maclaurin", fmt::format("n = {}, 1000 cone samples", n), worst, -1e-12, true,
                                replay));
    }
    return out;
}

std::vector<Case> leaf_identity(Context& ctx) {
    std::vector<Case> out;
    const std::vector<std::pair<std::string, BaseGrid>> grids = {
        {"torus 8^3", BaseGrid::flat_torus({8, 8, 8}, {2 * M_PI, 2 * M_PI, 2 * M_PI})},
        {"sphere 16x32", BaseGrid::sphere2(16, 32)}};
    geometry::FormOptions opts;
    opts.negate_second_form = ctx.negate;
    for (double K : {1.0, 0.0, -1.0}) {
        const auto warp = WarpingFunction::space_form(K);
        for (const auto& [gname, grid] : grids) {
            double worst = 0.0;
            double worst_c = 0.0;
            for (double c : {0.3, 0.6, 0.9, 1.2}) {
                const GridFunction u(grid.size(), c);
                const auto recs = geometry::fundamental_forms(u, grid, warp, opts);
                const auto w = warp.eval(c);
                for (const auto& r : recs)
                    for (int i = 0; i < r.lam.size(); ++i) {
                        const double d = std::abs(r.lam(i) - w.df / w.f);
                        if (!(d <= worst)) {
                            worst = d;
                            worst_c = c;
                        }
                    }
            }
            out.push_back(make_case("leaf-identity", fmt::format("K = {:g}, {}", K, gname), worst, 1e-12, false,
                                    ojson{{"K", K}, {"grid", gname}, {"c", worst_c}}));
        }
    }
    return out;
}

Problem jacobian_problem(int k, bool negate) {
    auto grid = BaseGrid::flat_torus({6, 6, 6}, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    std::vector<CoefficientSpec> specs;
    const std::vector<double> amps = k == 2 ? std::vector<double>{6.0, 1.0} : std::vector<double>{2.0, 1.0, 1.0};
    for (int l = 0; l < k; ++l) {
        CoefficientSpec s;
        s.amplitude = amps[static_cast<std::size_t>(l)];
        s.epsilon = 0.05;
        s.profile.terms.push_back({1.0, {1.0, 0.0, 0.0}, 0.3 * l});
        s.profile.terms.push_back({0.5, {0.0, 1.0, 1.0}, 0.0});
        specs.push_back(s);
    }
    Problem pb(std::move(grid), WarpingFunction::space_form(-1.0), k, specs, PhiFunction{1.3, 1.0}, 1.0, 1.6);
    pb.form_options.negate_second_form = negate;
    return pb;
}

std::vector<Case> jacobian_fd(Context& ctx) {
    std::vector<Case> out;
    for (int k : {2, 3}) {
        const std::string base = fmt::format("k = {}, torus 6^3", k);
        try {
            const auto pb = jacobian_problem(k, ctx.negate);
            GridFunction u(pb.grid().size(), 0.0);
            for (std::size_t p = 0; p < u.size(); ++p) {
                const auto x = pb.grid().coords(p);
                u[p] = 1.3 + 0.02 * std::sin(x[0]) + 0.01 * std::cos(x[1] + x[2]);
            }
            const double t = 0.5;
            JacobianAssembler assembler(pb);
            const auto Jfd = assembler.colored_fd(u, t);
            const auto Jan = assembler.analytic(u, t);
            double worst_fd = 0.0, worst_an = 0.0;
            for (int trial = 0; trial < 5; ++trial) {
                GridFunction d(draw(ctx.rng, static_cast<int>(u.size()), -1.0, 1.0));
                const auto ref = oracle::fd_directional(u, d, t, pb);
                const Eigen::Map<const Eigen::VectorXd> dv(d.values.data(), static_cast<Eigen::Index>(d.size()));
                const Eigen::Map<const Eigen::VectorXd> rv(ref.values.data(), static_cast<Eigen::Index>(ref.size()));
                const double scale = rv.lpNorm<Eigen::Infinity>();
                worst_fd = std::max(worst_fd, (Jfd * dv - rv).lpNorm<Eigen::Infinity>() / scale);
                worst_an = std::max(worst_an, (Jan * dv - rv).lpNorm<Eigen::Infinity>() / scale);
            }
            out.push_back(make_case("jacobian-fd", base + ", colored FD", worst_fd, 1e-6, false, ojson{{"k", k}}));
            out.push_back(make_case("jacobian-fd", base + ", analytic", worst_an, 1e-6, false, ojson{{"k", k}}));
        } catch (const Error& e) {
            out.push_back(error_case("jacobian-fd", base, e.what(), ojson{{"k", k}}));
        }
    }
    return out;
}

struct RadialCase {
    std::string name;
    WarpingFunction warp;
    std::vector<double> amps;
    double r1, r2, pivot;
};

std::vector<Case> radial_e2e(Context& ctx) {
    std::vector<Case> out;
    const std::vector<RadialCase> cases = {
        {"hyperbolic K = -1, k = 2, a = (6, 1)", WarpingFunction::space_form(-1.0), {6.0, 1.0}, 1.0, 1.6, 1.3},
        {"power p = 2, k = 2, a = (3, 1)", WarpingFunction::power(2.0), {3.0, 1.0}, 0.5, 1.2, 0.85}};
    for (const auto& rc : cases) {
        const ojson replay{{"case", rc.name}, {"r1", rc.r1}, {"r2", rc.r2}};
        try {
            const auto root = oracle::radial_root({rc.warp, 3, 2, rc.amps, rc.r1, rc.r2});
            std::vector<CoefficientSpec> specs;
            for (double a : rc.amps) specs.push_back(CoefficientSpec{a, 0.0, {}, {}, {}});
            Problem pb(BaseGrid::flat_torus({6, 6, 6}, {2 * M_PI, 2 * M_PI, 2 * M_PI}), rc.warp, 2, specs,
                       PhiFunction{rc.pivot, 1.0}, rc.r1, rc.r2);
            pb.form_options.negate_second_form = ctx.negate;
            problem::enforce_hypotheses(problem::check_hypotheses(pb));
            const auto state = continuation(pb);
            double err = 0.0;
            for (double x : state.u.values) err = std::max(err, std::abs(x - root.u));
            out.push_back(make_case("radial-e2e", rc.name, err, 1e-6, false, replay));
        } catch (const Error& e) {
            out.push_back(error_case("radial-e2e", rc.name, e.what(), replay));
        }
    }
    return out;
}

using Family = std::function<std::vector<Case>(Context&)>;

const std::vector<std::pair<std::string, Family>>& families() {
    static const std::vector<std::pair<std::string, Family>> f = {{"sigma-brute", sigma_brute},
                                                                  {"newton-maclaurin", newton_maclaurin},
                                                                  {"leaf-identity", leaf_identity},
                                                                  {"jacobian-fd", jacobian_fd},
                                                                  {"radial-e2e", radial_e2e}};
    return f;
}

} // namespace

const std::vector<std::string>& verify_families() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, fn] : families()) n.push_back(name);
        return n;
    }();
    return names;
}

int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err) {
    for (const auto& f : opts.filters)
        if (std::find(verify_families().begin(), verify_families().end(), f) == verify_families().end()) {
            err << "error: unknown verify family '" << f << "'; known:";
            for (const auto& n : verify_families()) err << ' ' << n;
            err << '\n';
            return exit_code::failure;
        }
    if (!opts.mutate.empty() && opts.mutate != "h-sign") {
        err << "error: unknown mutation '" << opts.mutate << "' (supported: h-sign)\n";
        return exit_code::failure;
    }

    Context ctx{std::mt19937_64(opts.seed), opts.mutate == "h-sign"};
    std::vector<Case> cases;
    for (const auto& [name, fn] : families()) {
        if (!opts.filters.empty() && std::find(opts.filters.begin(), opts.filters.end(), name) == opts.filters.end())
            continue;
        try {
            auto c = fn(ctx);
            cases.insert(cases.end(), c.begin(), c.end());
        } catch (const std::exception& e) {
            cases.push_back(error_case(name, "family aborted", e.what(), ojson::object()));
        }
    }

    out << fmt::format("{:<18} {:<44} {:>12} {:>12} {:>12}  {}\n", "family", "case", "value", "tolerance", "margin",
                       "status");
    bool ok = true;
    ojson failures = ojson::array();
    for (const auto& c : cases) {
        out << fmt::format("{:<18} {:<44} {:>12.3e} {:>12.1e} {:>12.3e}  {}\n", c.family, c.name, c.value,
                           c.tolerance, c.margin(), c.passed ? "PASS" : "FAIL");
        if (!c.error.empty()) out << "    " << c.error << '\n';
        if (!c.passed) {
            ok = false;
            failures.push_back(ojson{{"family", c.family},
                                     {"case", c.name},
                                     {"value", number_json(c.value)},
                                     {"tolerance", c.tolerance},
                                     {"error", c.error},
                                     {"replay", c.replay}});
        }
    }
    if (ok) {
        out << "all " << cases.size() << " checks passed\n";
        return exit_code::ok;
    }
    const ojson report{{"seed", opts.seed}, {"mutate", opts.mutate}, {"filters", opts.filters}, {"failures", failures}};
    std::ofstream f(opts.failure_out);
    if (f) f << report.dump(2) << '\n';
    err << failures.size() << " check(s) failed; replay data in " << opts.failure_out.string() << '\n';
    return exit_code::verification;
}

} // namespace prescurv::app
