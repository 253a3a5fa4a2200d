#pragma once

// Elementary symmetric polynomials, Garding cones and the curvature quotient
// operator G(lambda) = sigma_k/sigma_{k-1} - sum_l t alpha_l sigma_l/sigma_{k-1} - alpha_{k-1}.
//
// Conventions: sigma_0 = 1 and sigma_{-1} = 0 for every argument.

#include <span>
#include <vector>

namespace prescurv::symfunc {

/// sigma_k(lam), 0 <= k <= n, by the one-entry-at-a-time recurrence.
double elem_sym(std::span<const double> lam, int k);

/// sigma_0(lam) ... sigma_kmax(lam) in one pass.
std::vector<double> elem_sym_all(std::span<const double> lam, int kmax);

/// sigma_0 ... sigma_kmax of lam with entry `skip` removed. Recomputed, never
/// obtained by division, so entries near zero do not cancel.
std::vector<double> elem_sym_deleted(std::span<const double> lam, std::size_t skip, int kmax);

/// d sigma_k / d lam_i = sigma_{k-1}(lam | i), 1 <= k <= n.
std::vector<double> elem_sym_grad(std::span<const double> lam, int k);

/// Binomial coefficient C(n, k) as a double (sigma_k of the all-ones vector).
double binomial(int n, int k);

struct ConeMembership {
    int order = 0;
    std::vector<double> margins; // sigma_1 ... sigma_order
    bool inside = false;
};

/// Membership of lam in Gamma_k = { sigma_1, ..., sigma_k > 0 }.
ConeMembership in_cone(std::span<const double> lam, int k);

/// True iff sigma_1 .. sigma_k are all strictly positive.
bool inside_cone(std::span<const double> lam, int k);

struct NewtonMaclaurinMargins {
    /// l(n-k+1) sigma_l sigma_{k-1} - k(n-l+1) sigma_{l-1} sigma_k
    double product_form = 0.0;
    /// [q_r/q_s]^{1/(r-s)} - [q_k/q_l]^{1/(k-l)} with q_j = sigma_j / C(n,j)
    double quotient_form = 0.0;
};

/// Both Newton-Maclaurin margins at lam; nonnegative values certify the
/// inequalities. Requires 0 <= l < k <= n, r > s >= 0, k >= r, l >= s and
/// lam in Gamma_k (DomainError otherwise).
NewtonMaclaurinMargins newton_maclaurin_margins(std::span<const double> lam, int k, int l, int r, int s);

struct OperatorEval {
    double value = 0.0;
    std::vector<double> grad;           // dG/dlam_i
    std::vector<double> quotient_terms; // sigma_l / sigma_{k-1}, l = 0..k
};

/// Evaluates G at lam. The order k is alpha.size() + 1; alpha holds the lower
/// coefficients alpha_0 .. alpha_{k-2}, alpha_k1 the (already homotopied)
/// coefficient alpha_{k-1}. Throws ConeExitError if sigma_{k-1}(lam) <= 0.
OperatorEval g_operator(std::span<const double> lam, std::span<const double> alpha, double alpha_k1, double t);

} // namespace prescurv::symfunc
