#pragma once

#include <Eigen/SparseCore>
#include <cstddef>
#include <vector>

#include "prescurv/problem.hpp"

namespace prescurv {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Distance-2 coloring of the stencil graph: columns of one color never
/// influence a common residual row, so one pair of perturbed residual
/// evaluations recovers all their Jacobian columns.
struct Coloring {
    std::vector<int> color;                        // per column
    std::vector<std::vector<std::size_t>> groups;  // columns per color
    std::vector<std::vector<std::size_t>> rows;    // rows influenced by each column
    int count() const noexcept { return static_cast<int>(groups.size()); }
};

/// Greedy distance-2 coloring over the grid's stencils.
Coloring color_stencil_graph(const BaseGrid& grid);

/// Assembles dF(p)/du(q) for the residual of a fixed problem. Keeps the coloring
/// of the problem's grid so repeated assembly does not redo it.
class JacobianAssembler {
public:
    explicit JacobianAssembler(const Problem& pb);

    const Coloring& coloring() const noexcept { return coloring_; }

    /// Central differences along color groups with step 1e-6 (1 + |u|_inf).
    /// A cone exit at a perturbed point shrinks the step tenfold once, then rethrows.
    SparseMatrix colored_fd(const GridFunction& u, double t) const;

    /// Chain rule through the pencil eigenvalues: dF = sum_i G_i v_i^T (dh - lam_i dgtilde) v_i
    /// plus the explicit u-dependence of the coefficients.
    SparseMatrix analytic(const GridFunction& u, double t) const;

    SparseMatrix assemble(const GridFunction& u, double t, JacobianMode mode) const;

private:
    const Problem& pb_;
    Coloring coloring_;
};

/// One-shot assembly.
SparseMatrix jacobian(const GridFunction& u, double t, const Problem& pb, JacobianMode mode);

} // namespace prescurv
