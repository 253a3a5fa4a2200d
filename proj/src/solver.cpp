#include "prescurv/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "prescurv/parallel.hpp"
#include "prescurv/symfunc.hpp"

namespace prescurv {

namespace {

constexpr double box_tolerance = 1e-6;
constexpr double inf = std::numeric_limits<double>::infinity();

struct NodeReport {
    bool ok = false;
    std::string error;
    bool cone_exit = false;
    double residual = 0.0;
    double tau = 0.0;
    double lam_abs = 0.0;
    double cone_margin = inf;
    bool in_gamma_k = false;
    double nm = inf;
    double grad_min = inf;
    double quotient_sum = inf;
    double operator_sum = inf;
};

NodeReport report_node(const GridFunction& u, const Problem& pb, double t, std::size_t p) {
    NodeReport r;
    const int n = pb.n(), k = pb.k();
    problem::NodeState s;
    try {
        s = problem::evaluate_node(u, t, pb, p);
    } catch (const ConeExitError& e) {
        r.cone_exit = true;
        r.error = e.what();
        return r;
    } catch (const Error& e) {
        r.error = e.what();
        return r;
    }
    r.ok = true;
    r.residual = std::abs(s.value);
    r.tau = s.rec.tau;
    const std::span<const double> lam(s.rec.lam.data(), static_cast<std::size_t>(s.rec.lam.size()));
    for (double x : lam) r.lam_abs = std::max(r.lam_abs, std::abs(x));

    const auto e = symfunc::elem_sym_all(lam, k);
    for (int j = 1; j <= k - 1; ++j) r.cone_margin = std::min(r.cone_margin, e[j] / symfunc::binomial(n, j));

    r.in_gamma_k = e[k] > 0.0;
    if (r.in_gamma_k) {
        for (int l = 0; l < k; ++l)
            for (int rr = 1; rr <= k; ++rr)
                for (int ss = 0; ss < rr && ss <= l; ++ss) {
                    const auto m = symfunc::newton_maclaurin_margins(lam, k, l, rr, ss);
                    r.nm = std::min({r.nm, m.product_form, m.quotient_form});
                }
    }

    const auto op = symfunc::g_operator(lam, s.alpha, s.alpha_k1.value, t);
    double sum = 0.0;
    for (double g : op.grad) {
        r.grad_min = std::min(r.grad_min, g);
        sum += g;
    }
    r.operator_sum = sum;
    const std::vector<double> zeros(static_cast<std::size_t>(k - 1), 0.0);
    const auto q = symfunc::g_operator(lam, zeros, 0.0, 0.0);
    r.quotient_sum = 0.0;
    for (double g : q.grad) r.quotient_sum += g;
    return r;
}

double inf_norm(const GridFunction& f) { return f.max_abs(); }

double sq_norm(const GridFunction& f) {
    double s = 0.0;
    for (double x : f.values) s += x * x;
    return s;
}

} // namespace

DiagnosticsReport diagnostics(const GridFunction& u, const Problem& pb, double t) {
    const std::size_t n = pb.grid().size();
    std::vector<NodeReport> nodes(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) nodes[p] = report_node(u, pb, t, p);
    });

    DiagnosticsReport d;
    d.t = t;
    d.u_min = u.min();
    d.u_max = u.max();
    d.tau_min = inf;
    d.cone_margin_min = inf;
    d.newton_maclaurin_min = inf;
    d.operator_grad_min = inf;
    d.quotient_grad_sum_min = inf;
    d.operator_grad_sum_min = inf;
    for (std::size_t p = 0; p < n; ++p) {
        const auto& r = nodes[p];
        if (!r.ok) {
            if (r.cone_exit) d.cone_exit = true;
            if (d.message.empty()) d.message = r.error;
            d.residual_norm = inf;
            continue;
        }
        d.residual_norm = std::max(d.residual_norm, r.residual);
        d.tau_min = std::min(d.tau_min, r.tau);
        d.lambda_abs_max = std::max(d.lambda_abs_max, r.lam_abs);
        d.cone_margin_min = std::min(d.cone_margin_min, r.cone_margin);
        if (r.in_gamma_k) {
            ++d.nodes_in_gamma_k;
            d.newton_maclaurin_min = std::min(d.newton_maclaurin_min, r.nm);
        }
        d.operator_grad_min = std::min(d.operator_grad_min, r.grad_min);
        d.quotient_grad_sum_min = std::min(d.quotient_grad_sum_min, r.quotient_sum);
        d.operator_grad_sum_min = std::min(d.operator_grad_sum_min, r.operator_sum);
    }
    d.box_violation = d.u_min < pb.r1() - box_tolerance || d.u_max > pb.r2() + box_tolerance;
    d.tau_nonpositive = !(d.tau_min > 0.0);
    return d;
}

struct LinearSolver::Impl {
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    std::vector<int> outer, inner;
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double, int>> iterative;
};

LinearSolver::LinearSolver(std::size_t direct_max_nodes) : impl_(std::make_unique<Impl>()), direct_(true), max_nodes_(direct_max_nodes) {
    impl_->iterative.preconditioner().setFillfactor(20);
    impl_->iterative.preconditioner().setDroptol(1e-5);
    impl_->iterative.setTolerance(1e-13);
    impl_->iterative.setMaxIterations(4000);
}

LinearSolver::~LinearSolver() = default;

Eigen::VectorXd LinearSolver::solve(const SparseMatrix& J, const Eigen::VectorXd& b) {
    direct_ = static_cast<std::size_t>(J.rows()) <= max_nodes_;
    auto& s = *impl_;
    if (direct_) {
        const bool same = s.analyzed && s.outer.size() == static_cast<std::size_t>(J.outerSize() + 1) &&
                          std::equal(s.outer.begin(), s.outer.end(), J.outerIndexPtr()) &&
                          s.inner.size() == static_cast<std::size_t>(J.nonZeros()) &&
                          std::equal(s.inner.begin(), s.inner.end(), J.innerIndexPtr());
        if (!same) {
            s.lu.analyzePattern(J);
            s.outer.assign(J.outerIndexPtr(), J.outerIndexPtr() + J.outerSize() + 1);
            s.inner.assign(J.innerIndexPtr(), J.innerIndexPtr() + J.nonZeros());
            s.analyzed = true;
        }
        s.lu.factorize(J);
        if (s.lu.info() != Eigen::Success) throw StepFailure("sparse LU failed: " + s.lu.lastErrorMessage());
        Eigen::VectorXd x = s.lu.solve(b);
        const Eigen::VectorXd r = b - J * x;
        x += s.lu.solve(r);
        if (!x.allFinite()) throw StepFailure("sparse LU produced a non-finite solution");
        return x;
    }
    s.iterative.compute(J);
    if (s.iterative.info() != Eigen::Success) throw StepFailure("ILUT preconditioner failed");
    Eigen::VectorXd x = s.iterative.solve(b);
    if (!x.allFinite() || s.iterative.error() > 1e-8) {
        std::ostringstream os;
        os << "BiCGSTAB stalled after " << s.iterative.iterations() << " iterations (relative residual "
           << s.iterative.error() << ")";
        throw StepFailure(os.str());
    }
    return x;
}

GridFunction initial_solution(const Problem& pb) {
    const double u0 = pb.phi().pivot;
    if (!(u0 > pb.r1() && u0 < pb.r2())) {
        std::ostringstream os;
        os << "phi(u) = 1 has its root at u = " << u0 << ", outside (r1, r2) = (" << pb.r1() << ", " << pb.r2() << ")";
        throw ConfigError(os.str());
    }
    GridFunction u(pb.grid().size(), u0);
    const double r = inf_norm(problem::residual(u, 0.0, pb));
    if (!(r <= 1e-10)) {
        std::ostringstream os;
        os << "constant leaf u = " << u0 << " does not solve the t = 0 equation (|F| = " << r << ")";
        throw Error(os.str());
    }
    return u;
}

NewtonResult newton_solve(const GridFunction& u_init, double t, const Problem& pb, double tol) {
    JacobianAssembler assembler(pb);
    LinearSolver linear(pb.controls().direct_solver_max_nodes);
    return newton_solve(u_init, t, pb, tol, assembler, linear);
}

NewtonResult newton_solve(const GridFunction& u_init, double t, const Problem& pb, double tol,
                          const JacobianAssembler& assembler, LinearSolver& linear) {
    const auto& c = pb.controls();
    const double lo = pb.r1() - pb.guard(), hi = pb.r2() + pb.guard();
    const std::size_t n = pb.grid().size();

    NewtonResult res;
    res.u = u_init;
    GridFunction F = problem::residual(res.u, t, pb);
    double norm = inf_norm(F);
    double sq = sq_norm(F);
    res.history.push_back(norm);

    while (!(norm <= tol)) {
        if (res.iterations >= c.max_newton) {
            std::ostringstream os;
            os << "Newton did not converge in " << c.max_newton << " iterations at t = " << t << " (|F| = " << norm << ")";
            throw NonConvergenceError(os.str());
        }
        const SparseMatrix J = assembler.assemble(res.u, t, c.jacobian);
        const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(F.values.data(), static_cast<Eigen::Index>(n));
        const Eigen::VectorXd d = linear.solve(J, rhs);

        double step = 1.0;
        bool accepted = false;
        std::string last_reason = "no admissible step";
        GridFunction trial(n, 0.0);
        for (int b = 0; b <= c.max_backtracks; ++b, step *= 0.5) {
            bool in_box = true;
            for (std::size_t p = 0; p < n; ++p) {
                trial[p] = res.u[p] + step * d[static_cast<Eigen::Index>(p)];
                if (!(trial[p] >= lo && trial[p] <= hi)) in_box = false;
            }
            if (!in_box) {
                last_reason = "step leaves the box [r1 - guard, r2 + guard]";
                continue;
            }
            GridFunction Ft;
            try {
                Ft = problem::residual(trial, t, pb);
            } catch (const ConeExitError& e) {
                last_reason = e.what();
                continue;
            } catch (const DomainError& e) {
                last_reason = e.what();
                continue;
            } catch (const GeometryError& e) {
                last_reason = e.what();
                continue;
            }
            const double sq_t = sq_norm(Ft);
            if (sq_t <= (1.0 - 2.0 * c.armijo * step) * sq || inf_norm(Ft) <= tol) {
                res.u = std::move(trial);
                F = std::move(Ft);
                sq = sq_t;
                norm = inf_norm(F);
                accepted = true;
                break;
            }
            last_reason = "no sufficient decrease";
        }
        ++res.iterations;
        res.history.push_back(norm);
        if (!accepted) {
            std::ostringstream os;
            os << "line search failed at t = " << t << " after " << c.max_backtracks << " backtracks: " << last_reason;
            throw StepFailure(os.str());
        }
    }
    res.residual_norm = norm;
    return res;
}

ContinuationState continuation(const Problem& pb, const StepObserver& observer) {
    const auto& c = pb.controls();
    ContinuationState state;
    state.u = initial_solution(pb);
    state.t = 0.0;
    state.dt = c.dt_initial;

    auto accept = [&](int iters, double residual_norm) {
        StepRecord rec;
        rec.t = state.t;
        rec.dt = state.dt;
        rec.newton_iters = iters;
        rec.residual_norm = residual_norm;
        rec.diag = diagnostics(state.u, pb, state.t);
        state.newton_iterations = iters;
        state.total_newton_iterations += iters;
        state.residual_history.push_back(residual_norm);
        state.diagnostics = rec.diag;
        state.steps.push_back(rec);
        if (observer) observer(rec, state.u);
    };
    accept(0, inf_norm(problem::residual(state.u, 0.0, pb)));

    const double t_end = std::clamp(c.t_end, 0.0, 1.0);
    if (t_end <= 0.0) return state;

    JacobianAssembler assembler(pb);
    LinearSolver linear(c.direct_solver_max_nodes);
    int easy = 0;
    while (state.t < t_end) {
        double t_try = state.t + state.dt;
        if (t_try > t_end || t_end - t_try < 1e-12) t_try = t_end;
        std::optional<NewtonResult> step;
        std::string reason;
        try {
            step = newton_solve(state.u, t_try, pb, c.newton_tol, assembler, linear);
        } catch (const StepFailure& e) {
            reason = e.what();
        } catch (const NonConvergenceError& e) {
            reason = e.what();
        } catch (const ConeExitError& e) {
            reason = e.what();
        } catch (const DomainError& e) {
            reason = e.what();
        } catch (const GeometryError& e) {
            reason = e.what();
        }
        if (!step) {
            ++state.rejected_steps;
            easy = 0;
            state.dt *= 0.5;
            if (state.dt < c.dt_min) {
                std::ostringstream os;
                os << "continuation step fell below dt_min = " << c.dt_min << " at t = " << state.t
                   << "; last failure: " << reason;
                throw ContinuationFailure(os.str(), state);
            }
            continue;
        }
        state.u = std::move(step->u);
        state.t = t_try;
        accept(step->iterations, step->residual_norm);
        if (step->iterations <= c.easy_newton_iterations) {
            if (++easy >= 2) {
                state.dt *= c.dt_growth;
                easy = 0;
            }
        } else {
            easy = 0;
        }
    }
    return state;
}

} // namespace prescurv
