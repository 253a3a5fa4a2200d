#include "prescurv/oracle.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "prescurv/errors.hpp"

namespace prescurv::oracle {

namespace {

double choose(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

} // namespace

double brute_sigma(std::span<const double> lam, int k) {
    const int n = static_cast<int>(lam.size());
    if (n > 12) throw DomainError("brute_sigma is limited to n <= 12, got n = " + std::to_string(n));
    if (k < 0 || k > n) throw DomainError("brute_sigma: k = " + std::to_string(k) + " outside [0, n]");
    double sum = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != k) continue;
        double prod = 1.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) prod *= lam[static_cast<std::size_t>(i)];
        sum += prod;
    }
    return sum;
}

double radial_balance(const RadialProblem& p, double u) {
    const auto v = p.w.eval(u);
    const double kappa = v.df / v.f;
    double phi = choose(p.n, p.k) * std::pow(kappa, p.k);
    for (int l = 0; l < p.k; ++l)
        phi -= p.amplitudes.at(static_cast<std::size_t>(l)) * std::pow(v.f, -(p.k - l)) * choose(p.n, l) * std::pow(kappa, l);
    return phi;
}

RadialRoot radial_root(const RadialProblem& p) {
    if (static_cast<int>(p.amplitudes.size()) != p.k) throw ConfigError("radial problem needs k amplitudes");
    double lo = p.r1, hi = p.r2;
    double flo = radial_balance(p, lo), fhi = radial_balance(p, hi);
    if (!(flo * fhi < 0.0)) {
        std::ostringstream os;
        os << "leaf balance has no sign change on [" << lo << ", " << hi << "] (" << flo << ", " << fhi << ")";
        throw HypothesisError(os.str(), "as-1/as-2", flo == 0.0 ? lo : hi, 0, -1);
    }
    RadialRoot r;
    for (r.iterations = 1; r.iterations <= 60; ++r.iterations) {
        const double mid = 0.5 * (lo + hi);
        const double fm = radial_balance(p, mid);
        r.u = mid;
        r.balance = fm;
        if (std::abs(fm) <= 1e-12 && hi - lo <= 1e-14 * std::max(1.0, std::abs(mid))) break;
        if (fm == 0.0) break;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    r.iterations = std::min(r.iterations, 60);
    return r;
}

GridFunction fd_directional(const GridFunction& u, const GridFunction& dir, double t, const Problem& pb) {
    const double dn = dir.max_abs();
    GridFunction out(u.size(), 0.0);
    if (dn == 0.0) return out;
    double h = 1e-5 * u.max_abs() / dn;
    for (int attempt = 0;; ++attempt) {
        GridFunction up = u, um = u;
        for (std::size_t i = 0; i < u.size(); ++i) {
            up[i] += h * dir[i];
            um[i] -= h * dir[i];
        }
        try {
            const auto fp = problem::residual(up, t, pb);
            const auto fm = problem::residual(um, t, pb);
            for (std::size_t i = 0; i < u.size(); ++i) out[i] = (fp[i] - fm[i]) / (2.0 * h);
            return out;
        } catch (const ConeExitError&) {
            if (attempt >= 1) throw;
            h *= 0.1;
        }
    }
}

} // namespace prescurv::oracle
