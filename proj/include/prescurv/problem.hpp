#pragma once

// The homotopy family of prescribed curvature equations
//
//   F(u, x, t) = sigma_k/sigma_{k-1}(lam) - sum_{l<=k-2} t alpha_l(u,x) sigma_l/sigma_{k-1}(lam)
//                - alpha_{k-1}(u, x, t) = 0,
//   alpha_{k-1}(u, x, t) = t alpha_{k-1}(u, x) + (1 - t) phi(u) (sigma_k(e)/sigma_{k-1}(e)) f'/f,
//
// which at t = 0 is solved only by the leaf u = u0, phi(u0) = 1, and at t = 1
// is the target equation sigma_k(lam) = sum_{l<k} alpha_l sigma_l(lam).

#include <cstddef>
#include <string>
#include <vector>

#include "prescurv/coefficients.hpp"
#include "prescurv/geometry.hpp"
#include "prescurv/grid.hpp"
#include "prescurv/warping.hpp"

namespace prescurv {

/// phi(u) = exp(steepness * (pivot - u)): positive, decreasing, equal to 1 at the pivot.
struct PhiFunction {
    double pivot = 0.0;
    double steepness = 1.0;

    double value(double u) const;
    double derivative(double u) const;
    bool operator==(const PhiFunction&) const = default;
};

enum class JacobianMode { ColoredFiniteDifference, Analytic };

struct SolverControls {
    double newton_tol = 1e-10;
    int max_newton = 50;
    int max_backtracks = 30;
    double armijo = 1e-4;
    double dt_initial = 0.1;
    double dt_min = 1e-4;
    double dt_growth = 1.5;
    int easy_newton_iterations = 4;
    double t_end = 1.0;
    JacobianMode jacobian = JacobianMode::ColoredFiniteDifference;
    /// Problems with more nodes use preconditioned BiCGSTAB instead of sparse LU.
    std::size_t direct_solver_max_nodes = 16384;
    int hypothesis_samples = 64;
    bool operator==(const SolverControls&) const = default;
};

/// Immutable description of one prescribed curvature problem.
class Problem {
public:
    Problem(BaseGrid grid, WarpingFunction warp, int k, std::vector<CoefficientSpec> coeffs, PhiFunction phi,
            double r1, double r2, SolverControls controls = {}, double epsilon_max = 0.05);

    const BaseGrid& grid() const noexcept { return grid_; }
    const WarpingFunction& warp() const noexcept { return warp_; }
    const CoefficientFamily& coefficients() const noexcept { return coeffs_; }
    const PhiFunction& phi() const noexcept { return phi_; }
    const SolverControls& controls() const noexcept { return controls_; }
    int n() const noexcept { return grid_.dim(); }
    int k() const noexcept { return k_; }
    double r1() const noexcept { return r1_; }
    double r2() const noexcept { return r2_; }
    double epsilon_max() const noexcept { return epsilon_max_; }
    /// Line-search box guard: 0.05 (r2 - r1).
    double guard() const noexcept { return 0.05 * (r2_ - r1_); }
    /// sigma_k(e) / sigma_{k-1}(e) = (n - k + 1) / k
    double leaf_ratio() const noexcept { return leaf_ratio_; }

    /// Mutation-testing hook forwarded to geometry.
    geometry::FormOptions form_options;

private:
    BaseGrid grid_;
    WarpingFunction warp_;
    int k_;
    CoefficientFamily coeffs_;
    PhiFunction phi_;
    double r1_, r2_;
    SolverControls controls_;
    double epsilon_max_;
    double leaf_ratio_;
};

namespace problem {

/// alpha_{k-1}(u, x, t) and its u-derivative.
struct HomotopyCoefficient {
    double value;
    double du;
};
HomotopyCoefficient alpha_k1_homotopy(const Problem& pb, double u, std::size_t node, double t);

struct HypothesisCheck {
    std::string name;        // as-1, as-2, as-3, alpha-positive, epsilon-range, phi-a .. phi-d
    std::string description;
    bool passed = true;
    double worst_margin = 0.0; // >= 0 means satisfied
    double worst_u = 0.0;
    std::size_t worst_node = 0;
    int worst_l = -1;
    double range_lo = 0.0;
    double range_hi = 0.0;
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;
    bool passed() const;
    const HypothesisCheck* find(const std::string& name) const;
};

/// Samples the structural hypotheses on u-grids x all nodes. Never throws for
/// a violated hypothesis; use enforce_hypotheses for that.
HypothesisReport check_hypotheses(const Problem& pb);

/// Throws HypothesisError naming the first failed check and its (u, x, l).
void enforce_hypotheses(const HypothesisReport& report);

/// Everything computed for one node while evaluating F.
struct NodeState {
    WarpingFunction::Values w;
    geometry::NodeDerivatives d;
    geometry::CurvatureRecord rec;
    std::vector<double> alpha; // alpha_0..alpha_{k-2} at (u_p, x_p)
    std::vector<double> alpha_du;
    HomotopyCoefficient alpha_k1;
    double value = 0.0; // F at this node
};

/// Evaluates F at one node; throws ConeExitError (lam outside Gamma_{k-1}),
/// DomainError (u outside the warping domain) or GeometryError.
NodeState evaluate_node(const GridFunction& u, double t, const Problem& pb, std::size_t p);

/// F(u, ., t) on every node.
GridFunction residual(const GridFunction& u, double t, const Problem& pb);

} // namespace problem
} // namespace prescurv
