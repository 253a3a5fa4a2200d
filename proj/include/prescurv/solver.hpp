#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "prescurv/errors.hpp"
#include "prescurv/jacobian.hpp"
#include "prescurv/problem.hpp"

namespace prescurv {

/// Pointwise health of a field, recomputed from scratch on every call.
struct DiagnosticsReport {
    double t = 1.0;
    double residual_norm = 0.0; // |F(u, ., t)|_inf
    double u_min = 0.0;
    double u_max = 0.0;
    double tau_min = 0.0;
    double lambda_abs_max = 0.0;
    /// min over nodes and 1 <= j <= k-1 of sigma_j(lam) / C(n, j)
    double cone_margin_min = 0.0;
    /// min of both Newton-Maclaurin margin forms over nodes with lam in Gamma_k
    /// and all admissible index tuples; +inf when no node lies in Gamma_k
    double newton_maclaurin_min = 0.0;
    std::size_t nodes_in_gamma_k = 0;
    /// min over nodes and i of dG/dlam_i
    double operator_grad_min = 0.0;
    /// min over nodes of sum_i d(sigma_k/sigma_{k-1})/dlam_i, against the bound (n-k+1)/k
    double quotient_grad_sum_min = 0.0;
    /// same sum for the full operator including the alpha_l terms (logged only)
    double operator_grad_sum_min = 0.0;
    bool box_violation = false;   // u outside [r1 - 1e-6, r2 + 1e-6]
    bool tau_nonpositive = false;
    bool cone_exit = false;
    std::string message;          // first evaluation failure, if any
};

/// Reports on u at homotopy time t. Never throws for an unhealthy field; failures
/// are flagged in the report.
DiagnosticsReport diagnostics(const GridFunction& u, const Problem& pb, double t = 1.0);

/// One accepted continuation state, as logged.
struct StepRecord {
    double t = 0.0;
    double dt = 0.0;
    int newton_iters = 0;
    double residual_norm = 0.0;
    DiagnosticsReport diag;
};

struct ContinuationState {
    double t = 0.0;
    GridFunction u;
    double dt = 0.0;
    int newton_iterations = 0; // last accepted step
    int total_newton_iterations = 0;
    int rejected_steps = 0;
    std::vector<double> residual_history; // accepted residual norms in order
    std::vector<StepRecord> steps;
    DiagnosticsReport diagnostics;
};

/// Continuation ran out of step size; carries the last accepted state.
class ContinuationFailure : public Error {
public:
    ContinuationFailure(std::string what, ContinuationState last)
        : Error(std::move(what)), last_(std::make_shared<ContinuationState>(std::move(last))) {}
    const ContinuationState& last_good() const noexcept { return *last_; }

private:
    std::shared_ptr<ContinuationState> last_;
};

/// Sparse LU with cached symbolic analysis and one refinement step, or
/// ILUT-preconditioned BiCGSTAB above the configured node count.
class LinearSolver {
public:
    explicit LinearSolver(std::size_t direct_max_nodes);
    ~LinearSolver();
    LinearSolver(const LinearSolver&) = delete;
    LinearSolver& operator=(const LinearSolver&) = delete;

    /// Solves J x = b; throws StepFailure if J is singular or the iteration stalls.
    Eigen::VectorXd solve(const SparseMatrix& J, const Eigen::VectorXd& b);
    bool direct() const noexcept { return direct_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    bool direct_;
    std::size_t max_nodes_;
};

/// Constant field u = u0 with phi(u0) = 1, checked against F(u0, ., 0) = 0.
/// Throws ConfigError when phi has no root inside (r1, r2).
GridFunction initial_solution(const Problem& pb);

struct NewtonResult {
    GridFunction u;
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<double> history; // |F|_inf before each iteration and at exit
};

/// Damped Newton at fixed t. Backtracking halves the step until the trial
/// stays in Gamma_{k-1}, inside [r1 - guard, r2 + guard] and satisfies Armijo
/// on |F|^2. Throws ConeExitError if u_init itself is not admissible,
/// StepFailure when backtracking is exhausted and NonConvergenceError after
/// the iteration budget.
NewtonResult newton_solve(const GridFunction& u_init, double t, const Problem& pb, double tol);

/// Same, reusing an assembler and a linear solver across calls.
NewtonResult newton_solve(const GridFunction& u_init, double t, const Problem& pb, double tol,
                          const JacobianAssembler& assembler, LinearSolver& linear);

using StepObserver = std::function<void(const StepRecord&, const GridFunction&)>;

/// Path-follows F(., ., t) = 0 from the constant solution at t = 0 up to
/// controls().t_end with adaptive steps and an order-0 predictor. The observer
/// sees every accepted state, starting with t = 0.
ContinuationState continuation(const Problem& pb, const StepObserver& observer = {});

} // namespace prescurv
