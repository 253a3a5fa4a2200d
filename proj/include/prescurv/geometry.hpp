#pragma once

// Induced metric, second fundamental form and principal curvatures of the
// graph {(u(x), x)} in I x_f M, in base coordinates:
//
//   gtilde_ij = f^2 g_ij + u_i u_j
//   h_ij      = (-f u_ij + 2 f' u_i u_j + f^2 f' g_ij) / v,   v = sqrt(f^2 + |Du|^2)
//   tau       = f^2 / v
//
// with u_ij the covariant Hessian of u with respect to g and the outward
// normal pointing towards increasing t, so leaves {t = c} have curvature f'/f.

#include <Eigen/Core>
#include <cstddef>
#include <limits>
#include <vector>

#include "prescurv/grid.hpp"
#include "prescurv/warping.hpp"

namespace prescurv::geometry {

using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

inline constexpr std::size_t no_node = std::numeric_limits<std::size_t>::max();

struct NodeDerivatives {
    SmallVector du;   // u_a
    SmallMatrix hess; // covariant Hessian u_ab
};

/// Centered second-order differences at one node.
NodeDerivatives derivatives_at(const GridFunction& u, const BaseGrid& grid, std::size_t p);

/// Centered second-order differences at every node.
std::vector<NodeDerivatives> gradient_hessian(const GridFunction& u, const BaseGrid& grid);

/// Testing hook: flips the sign of the second fundamental form.
struct FormOptions {
    bool negate_second_form = false;
};

struct CurvatureRecord {
    SmallMatrix gtilde; // induced metric
    SmallMatrix h;      // second fundamental form
    SmallVector lam;    // principal curvatures, ascending
    double tau = 0.0;   // support function <V, nu>
    double v = 0.0;     // sqrt(f^2 + |Du|^2)
};

/// Eigen-decomposition of the symmetric pencil h x = lam gtilde x.
struct PencilEigen {
    SmallVector values;  // ascending
    SmallMatrix vectors; // columns, gtilde-orthonormal
};

/// Cholesky congruence gtilde = L L^T, then Jacobi on L^{-1} h L^{-T}
/// (one exact rotation for n = 2, cyclic sweeps for n = 3).
/// Throws GeometryError (carrying `node`) if gtilde is not positive definite.
PencilEigen pencil_eigen(const SmallMatrix& h, const SmallMatrix& gtilde, std::size_t node = no_node);

/// Ascending principal curvatures of a record's (h, gtilde) pencil.
SmallVector principal_curvatures(const CurvatureRecord& rec, std::size_t node = no_node);

/// Pointwise fundamental forms from warping values and base derivatives.
/// `g` and `ginv` are row-major n x n.
CurvatureRecord curvature_at(const WarpingFunction::Values& w, std::span<const double> g,
                             std::span<const double> ginv, const NodeDerivatives& d,
                             const FormOptions& opts = {}, std::size_t node = no_node);

/// Fundamental forms at every node. Values of u must lie in the warping domain.
std::vector<CurvatureRecord> fundamental_forms(const GridFunction& u, const BaseGrid& grid,
                                               const WarpingFunction& warp, const FormOptions& opts = {});

} // namespace prescurv::geometry
