#include "prescurv/problem.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "prescurv/errors.hpp"
#include "prescurv/parallel.hpp"
#include "prescurv/symfunc.hpp"

namespace prescurv {

double PhiFunction::value(double u) const {
    return std::exp(steepness * (pivot - u));
}

double PhiFunction::derivative(double u) const {
    return -steepness * value(u);
}

Problem::Problem(BaseGrid grid, WarpingFunction warp, int k, std::vector<CoefficientSpec> coeffs, PhiFunction phi,
                 double r1, double r2, SolverControls controls, double epsilon_max)
    : grid_(std::move(grid)), warp_(std::move(warp)), k_(k), phi_(phi), r1_(r1), r2_(r2),
      controls_(controls), epsilon_max_(epsilon_max) {
    const int n = grid_.dim();
    if (k_ < 2 || k_ > n)
        throw ConfigError("order k = " + std::to_string(k_) + " must satisfy 2 <= k <= n = " + std::to_string(n));
    if (n == 2) {
        static bool warned = false;
        if (!warned) {
            std::clog << "warning: base dimension n = 2; the structural hypotheses assume n >= 3, "
                         "the curvature formulas remain valid\n";
            warned = true;
        }
    }
    if (!(r1_ < r2_)) throw ConfigError("annulus bounds must satisfy r1 < r2");
    if (!(phi_.steepness > 0.0)) throw ConfigError("phi steepness must be positive");
    if (!(epsilon_max_ >= 0.0)) throw ConfigError("epsilon_max must be nonnegative");
    warp_.require_admissible(r1_ - guard(), r2_ + guard());
    coeffs_ = CoefficientFamily(std::move(coeffs), grid_, k_);
    leaf_ratio_ = symfunc::binomial(n, k_) / symfunc::binomial(n, k_ - 1);
}

namespace problem {

HomotopyCoefficient alpha_k1_homotopy(const Problem& pb, double u, std::size_t node, double t) {
    const auto w = pb.warp().eval(u);
    const auto a = pb.coefficients().eval(pb.k() - 1, u, node, w);
    const double kappa = w.df / w.f;
    const double dkappa = w.d2f / w.f - kappa * kappa;
    const double phi = pb.phi().value(u);
    const double dphi = pb.phi().derivative(u);
    const double c = pb.leaf_ratio();
    return {t * a.value + (1.0 - t) * phi * c * kappa, t * a.du + (1.0 - t) * c * (dphi * kappa + phi * dkappa)};
}

bool HypothesisReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const HypothesisCheck* HypothesisReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

struct Worst {
    double margin = std::numeric_limits<double>::infinity();
    double u = 0.0;
    std::size_t node = 0;
    int l = -1;
    void update(double m, double uu, std::size_t p, int ll) {
        if (m < margin) {
            margin = m;
            u = uu;
            node = p;
            l = ll;
        }
    }
};

std::vector<double> samples(double lo, double hi, int count) {
    std::vector<double> s;
    if (!(hi > lo)) return {lo};
    for (int i = 0; i < count; ++i) s.push_back(lo + (hi - lo) * i / (count - 1));
    return s;
}

HypothesisCheck make_check(std::string name, std::string description, const Worst& w, double lo, double hi,
                           bool strict) {
    HypothesisCheck c;
    c.name = std::move(name);
    c.description = std::move(description);
    c.worst_margin = w.margin;
    c.worst_u = w.u;
    c.worst_node = w.node;
    c.worst_l = w.l;
    c.range_lo = lo;
    c.range_hi = hi;
    c.passed = strict ? w.margin > 0.0 : w.margin >= 0.0;
    return c;
}

HypothesisCheck failed_check(std::string name, std::string description, double lo, double hi) {
    HypothesisCheck c;
    c.name = std::move(name);
    c.description = std::move(description);
    c.passed = false;
    c.worst_margin = -std::numeric_limits<double>::infinity();
    c.range_lo = lo;
    c.range_hi = hi;
    return c;
}

// sigma_k(e) kappa^k - sum_l alpha_l sigma_l(e) kappa^l at (u, node)
double leaf_balance(const Problem& pb, double u, std::size_t p) {
    const int n = pb.n(), k = pb.k();
    const auto w = pb.warp().eval(u);
    const double kappa = w.df / w.f;
    double m = symfunc::binomial(n, k) * std::pow(kappa, k);
    for (int l = 0; l < k; ++l) m -= pb.coefficients().eval(l, u, p, w).value * symfunc::binomial(n, l) * std::pow(kappa, l);
    return m;
}

} // namespace

HypothesisReport check_hypotheses(const Problem& pb) {
    HypothesisReport report;
    const auto& warp = pb.warp();
    const int count = std::max(2, pb.controls().hypothesis_samples);
    const std::size_t nodes = pb.grid().size();
    const double width = pb.r2() - pb.r1();

    // (1.4)-type range above r2, (1.5)-type range below r1, clipped to the warping domain
    double hi1 = pb.r2() + width;
    if (std::isfinite(warp.t_max())) hi1 = std::min(hi1, warp.t_max() - 1e-9 * std::max(1.0, warp.t_max()));
    if (warp.kind() == WarpingFunction::Kind::Table) hi1 = std::min(hi1, warp.t_max());
    double lo2 = pb.r1() / 4.0;
    if (warp.kind() == WarpingFunction::Kind::Table) lo2 = std::max(lo2, warp.t_min());
    else lo2 = std::max(lo2, warp.t_min() + 1e-9);
    lo2 = std::min(lo2, pb.r1());

    auto guarded = [&](const std::string& name, const std::string& desc, double lo, double hi, auto&& body) {
        try {
            report.checks.push_back(body());
        } catch (const DomainError& e) {
            report.checks.push_back(failed_check(name, desc + " (not evaluable: " + e.what() + ")", lo, hi));
        }
    };

    const std::string d1 = "sigma_k(e) kappa^k >= sum alpha_l sigma_l(e) kappa^l for u >= r2";
    guarded("as-1", d1, pb.r2(), hi1, [&] {
        Worst w;
        for (double u : samples(pb.r2(), hi1, count))
            for (std::size_t p = 0; p < nodes; ++p) w.update(leaf_balance(pb, u, p), u, p, -1);
        return make_check("as-1", d1, w, pb.r2(), hi1, false);
    });

    const std::string d2 = "sigma_k(e) kappa^k <= sum alpha_l sigma_l(e) kappa^l for u <= r1";
    guarded("as-2", d2, lo2, pb.r1(), [&] {
        Worst w;
        for (double u : samples(lo2, pb.r1(), count))
            for (std::size_t p = 0; p < nodes; ++p) w.update(-leaf_balance(pb, u, p), u, p, -1);
        return make_check("as-2", d2, w, lo2, pb.r1(), false);
    });

    const std::string d3 = "d/du [f^{k-l} alpha_l] <= 0 on (r1, r2)";
    guarded("as-3", d3, pb.r1(), pb.r2(), [&] {
        Worst w;
        const double h = 1e-4 * width / count;
        for (int i = 0; i < count; ++i) {
            const double u = pb.r1() + width * (i + 0.5) / count;
            for (int l = 0; l < pb.k(); ++l)
                for (std::size_t p = 0; p < nodes; ++p) {
                    const double plus = pb.coefficients().scaled(l, u + h, p, warp);
                    const double minus = pb.coefficients().scaled(l, u - h, p, warp);
                    w.update(-(plus - minus) / (2.0 * h), u, p, l);
                }
        }
        return make_check("as-3", d3, w, pb.r1(), pb.r2(), false);
    });

    const std::string d4 = "alpha_l(u, x) >= c_l > 0 on [r1, r2]";
    guarded("alpha-positive", d4, pb.r1(), pb.r2(), [&] {
        Worst w;
        for (double u : samples(pb.r1(), pb.r2(), count)) {
            const auto wv = warp.eval(u);
            for (int l = 0; l < pb.k(); ++l)
                for (std::size_t p = 0; p < nodes; ++p) w.update(pb.coefficients().eval(l, u, p, wv).value, u, p, l);
        }
        return make_check("alpha-positive", d4, w, pb.r1(), pb.r2(), true);
    });

    {
        Worst w;
        const auto& specs = pb.coefficients().specs();
        for (int l = 0; l < pb.k(); ++l) {
            if (specs[l].table_path) continue;
            w.update(std::min(specs[l].epsilon, pb.epsilon_max() - specs[l].epsilon), 0.0, 0, l);
        }
        if (!std::isfinite(w.margin)) w.margin = 0.0;
        report.checks.push_back(make_check("epsilon-range", "0 <= epsilon_l <= epsilon_max", w, 0.0,
                                           pb.epsilon_max(), false));
    }

    const auto& phi = pb.phi();
    {
        Worst a, b, c, d;
        for (double u : samples(lo2, hi1, 4 * count)) {
            a.update(phi.value(u), u, 0, -1);
            d.update(-phi.derivative(u), u, 0, -1);
        }
        for (double u : samples(lo2, pb.r1(), count)) b.update(phi.value(u) - 1.0, u, 0, -1);
        for (double u : samples(pb.r2(), hi1, count)) c.update(1.0 - phi.value(u), u, 0, -1);
        report.checks.push_back(make_check("phi-a", "phi(u) > 0", a, lo2, hi1, true));
        report.checks.push_back(make_check("phi-b", "phi(u) > 1 for u <= r1", b, lo2, pb.r1(), true));
        report.checks.push_back(make_check("phi-c", "phi(u) < 1 for u >= r2", c, pb.r2(), hi1, true));
        report.checks.push_back(make_check("phi-d", "phi'(u) < 0", d, lo2, hi1, true));
    }
    return report;
}

void enforce_hypotheses(const HypothesisReport& report) {
    for (const auto& c : report.checks) {
        if (c.passed) continue;
        std::ostringstream os;
        os << "hypothesis " << c.name << " violated (" << c.description << "): margin " << c.worst_margin
           << " at u = " << c.worst_u << ", node " << c.worst_node;
        if (c.worst_l >= 0) os << ", l = " << c.worst_l;
        throw HypothesisError(os.str(), c.name, c.worst_u, c.worst_node, c.worst_l);
    }
}

NodeState evaluate_node(const GridFunction& u, double t, const Problem& pb, std::size_t p) {
    const int k = pb.k();
    const double up = u[p];
    if (!pb.warp().contains(up)) {
        std::ostringstream os;
        os << "node " << p << ": u = " << up << " outside the warping domain";
        throw DomainError(os.str());
    }
    NodeState s;
    s.w = pb.warp().eval(up);
    s.d = geometry::derivatives_at(u, pb.grid(), p);
    s.rec = geometry::curvature_at(s.w, pb.grid().metric(p), pb.grid().inverse_metric(p), s.d, pb.form_options, p);

    const std::span<const double> lam(s.rec.lam.data(), static_cast<std::size_t>(s.rec.lam.size()));
    const auto e = symfunc::elem_sym_all(lam, k - 1);
    for (int j = 1; j <= k - 1; ++j)
        if (!(e[j] > 0.0)) {
            std::ostringstream os;
            os << "node " << p << ": principal curvatures (";
            for (std::size_t i = 0; i < lam.size(); ++i) os << (i ? ", " : "") << lam[i];
            os << ") left Gamma_" << (k - 1) << " (sigma_" << j << " = " << e[j] << ")";
            throw ConeExitError(os.str(), p, {lam.begin(), lam.end()});
        }

    s.alpha.resize(static_cast<std::size_t>(k - 1));
    s.alpha_du.resize(static_cast<std::size_t>(k - 1));
    for (int l = 0; l <= k - 2; ++l) {
        const auto a = pb.coefficients().eval(l, up, p, s.w);
        s.alpha[l] = a.value;
        s.alpha_du[l] = a.du;
    }
    s.alpha_k1 = alpha_k1_homotopy(pb, up, p, t);
    s.value = symfunc::g_operator(lam, s.alpha, s.alpha_k1.value, t).value;
    return s;
}

GridFunction residual(const GridFunction& u, double t, const Problem& pb) {
    GridFunction out(pb.grid().size(), 0.0);
    parallel_for(pb.grid().size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) out[p] = evaluate_node(u, t, pb, p).value;
    });
    return out;
}

} // namespace problem
} // namespace prescurv
