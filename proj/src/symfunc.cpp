#include "prescurv/symfunc.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "prescurv/errors.hpp"

namespace prescurv::symfunc {

namespace {

void check_order(std::size_t n, int k, int lo) {
    if (k < lo || static_cast<std::size_t>(k) > n)
        throw DomainError("elementary symmetric order " + std::to_string(k) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(n) + "]");
}

// e[j] <- sigma_j over the processed prefix; descending j keeps the update in place.
void accumulate(std::span<const double> lam, std::size_t skip, std::span<double> e) {
    const int kmax = static_cast<int>(e.size()) - 1;
    e[0] = 1.0;
    for (int j = 1; j <= kmax; ++j) e[j] = 0.0;
    int processed = 0;
    for (std::size_t m = 0; m < lam.size(); ++m) {
        if (m == skip) continue;
        ++processed;
        const int top = processed < kmax ? processed : kmax;
        for (int j = top; j >= 1; --j) e[j] += lam[m] * e[j - 1];
    }
}

} // namespace

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return std::round(c);
}

std::vector<double> elem_sym_all(std::span<const double> lam, int kmax) {
    check_order(lam.size(), kmax, 0);
    std::vector<double> e(static_cast<std::size_t>(kmax) + 1);
    accumulate(lam, lam.size(), e);
    return e;
}

std::vector<double> elem_sym_deleted(std::span<const double> lam, std::size_t skip, int kmax) {
    if (skip >= lam.size()) throw DomainError("deleted index out of range");
    check_order(lam.size() - 1, kmax, 0);
    std::vector<double> e(static_cast<std::size_t>(kmax) + 1);
    accumulate(lam, skip, e);
    return e;
}

double elem_sym(std::span<const double> lam, int k) {
    return elem_sym_all(lam, k).back();
}

std::vector<double> elem_sym_grad(std::span<const double> lam, int k) {
    check_order(lam.size(), k, 1);
    std::vector<double> g(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) g[i] = elem_sym_deleted(lam, i, k - 1).back();
    return g;
}

ConeMembership in_cone(std::span<const double> lam, int k) {
    check_order(lam.size(), k, 1);
    ConeMembership c;
    c.order = k;
    auto e = elem_sym_all(lam, k);
    c.margins.assign(e.begin() + 1, e.end());
    c.inside = true;
    for (double m : c.margins) c.inside = c.inside && m > 0.0;
    return c;
}

bool inside_cone(std::span<const double> lam, int k) {
    return in_cone(lam, k).inside;
}

NewtonMaclaurinMargins newton_maclaurin_margins(std::span<const double> lam, int k, int l, int r, int s) {
    const int n = static_cast<int>(lam.size());
    if (!(0 <= l && l < k && k <= n && s >= 0 && r > s && k >= r && l >= s))
        throw DomainError("Newton-Maclaurin indices violate 0 <= l < k <= n, r > s >= 0, k >= r, l >= s");
    auto e = elem_sym_all(lam, k);
    for (int j = 1; j <= k; ++j)
        if (!(e[j] > 0.0)) throw DomainError("Newton-Maclaurin margins require lambda in Gamma_" + std::to_string(k));

    auto sig = [&](int j) { return j < 0 ? 0.0 : e[j]; };
    auto q = [&](int j) { return e[j] / binomial(n, j); };

    NewtonMaclaurinMargins m;
    m.product_form = l * (n - k + 1) * sig(l) * sig(k - 1) - k * (n - l + 1) * sig(l - 1) * sig(k);
    const double rhs = std::pow(q(r) / q(s), 1.0 / (r - s));
    const double lhs = std::pow(q(k) / q(l), 1.0 / (k - l));
    m.quotient_form = rhs - lhs;
    return m;
}

OperatorEval g_operator(std::span<const double> lam, std::span<const double> alpha, double alpha_k1, double t) {
    const int k = static_cast<int>(alpha.size()) + 1;
    const std::size_t n = lam.size();
    check_order(n, k, 2);

    auto e = elem_sym_all(lam, k);
    const double sk1 = e[k - 1];
    if (!(sk1 > 0.0))
        throw ConeExitError("sigma_" + std::to_string(k - 1) + " <= 0: operator is not elliptic",
                            std::numeric_limits<std::size_t>::max(), {lam.begin(), lam.end()});

    // numerator N = sigma_k - sum_l t alpha_l sigma_l
    double num = e[k];
    for (int l = 0; l <= k - 2; ++l) num -= t * alpha[l] * e[l];

    OperatorEval out;
    out.value = num / sk1 - alpha_k1;
    out.quotient_terms.resize(static_cast<std::size_t>(k) + 1);
    for (int l = 0; l <= k; ++l) out.quotient_terms[l] = e[l] / sk1;

    out.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        // d sigma_j / d lam_i = sigma_{j-1}(lam | i)
        auto d = elem_sym_deleted(lam, i, k - 1);
        double dnum = d[k - 1];
        for (int l = 1; l <= k - 2; ++l) dnum -= t * alpha[l] * d[l - 1];
        const double dden = d[k - 2];
        out.grad[i] = (dnum * sk1 - num * dden) / (sk1 * sk1);
    }
    return out;
}

} // namespace prescurv::symfunc
