#pragma once

// Reference computations that share nothing with the solver beyond the
// residual itself: literal subset sums, the scalar leaf equation and
// central differences of F.

#include <span>
#include <vector>

#include "prescurv/grid.hpp"
#include "prescurv/problem.hpp"
#include "prescurv/warping.hpp"

namespace prescurv::oracle {

/// sigma_k as the literal sum over all k-subsets. n <= 12.
double brute_sigma(std::span<const double> lam, int k);

/// Radially symmetric data alpha_l(u) = a_l f(u)^{-(k-l)}.
struct RadialProblem {
    WarpingFunction w;
    int n = 3;
    int k = 2;
    std::vector<double> amplitudes; // a_0 .. a_{k-1}
    double r1 = 0.0;
    double r2 = 0.0;
};

/// Phi(u) = C(n,k) kappa^k - sum_l a_l f^{-(k-l)} C(n,l) kappa^l with kappa = f'/f.
double radial_balance(const RadialProblem& p, double u);

struct RadialRoot {
    double u = 0.0;
    double balance = 0.0;
    int iterations = 0;
};

/// Bisection for the constant solution inside (r1, r2). Throws HypothesisError
/// when Phi does not change sign strictly across the bracket.
RadialRoot radial_root(const RadialProblem& p);

/// (F(u + h d) - F(u - h d)) / 2h at time t with h = 1e-5 |u|_inf / |d|_inf.
/// A cone exit at a perturbed point shrinks h tenfold once, then rethrows.
GridFunction fd_directional(const GridFunction& u, const GridFunction& dir, double t, const Problem& pb);

} // namespace prescurv::oracle
