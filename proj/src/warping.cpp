#include "prescurv/warping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "prescurv/errors.hpp"

namespace prescurv {

WarpingFunction WarpingFunction::space_form(double K) {
    if (!std::isfinite(K)) throw ConfigError("space form curvature must be finite");
    WarpingFunction w;
    w.param_ = K;
    w.tmin_ = 0.0;
    if (K > 0.0) {
        w.kind_ = Kind::SphereLike;
        // f' = cos(sqrt(K) t) > 0 only below a quarter period
        w.tmax_ = std::numbers::pi / (2.0 * std::sqrt(K));
    } else if (K == 0.0) {
        w.kind_ = Kind::Euclidean;
        w.tmax_ = std::numeric_limits<double>::infinity();
    } else {
        w.kind_ = Kind::HyperbolicLike;
        w.tmax_ = std::numeric_limits<double>::infinity();
    }
    return w;
}

WarpingFunction WarpingFunction::power(double p) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("power warping needs exponent p > 0");
    WarpingFunction w;
    w.kind_ = Kind::Power;
    w.param_ = p;
    w.tmin_ = 0.0;
    w.tmax_ = std::numeric_limits<double>::infinity();
    return w;
}

WarpingFunction WarpingFunction::table(std::vector<double> t, std::vector<double> f) {
    if (t.size() != f.size() || t.size() < 4)
        throw ConfigError("warping table needs at least 4 (t, f) samples of equal length");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw ConfigError("warping table abscissae must be strictly increasing");
    for (double v : f)
        if (!(v > 0.0)) throw ConfigError("warping table values must be positive");

    WarpingFunction w;
    w.kind_ = Kind::Table;
    w.tmin_ = t.front();
    w.tmax_ = t.back();
    w.closed_ = true;
    const std::size_t n = t.size();
    // natural spline: tridiagonal system for second derivatives m_i, m_0 = m_{n-1} = 0
    std::vector<double> m(n, 0.0), c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = t[i] - t[i - 1];
        const double h1 = t[i + 1] - t[i];
        const double a = h0 / 6.0;
        const double b = (h0 + h1) / 3.0;
        const double cc = h1 / 6.0;
        const double rhs = (f[i + 1] - f[i]) / h1 - (f[i] - f[i - 1]) / h0;
        const double denom = b - a * c[i - 1];
        c[i] = cc / denom;
        d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m[i] = d[i] - c[i] * m[i + 1];
        if (i == 1) break;
    }
    w.t_ = std::move(t);
    w.f_ = std::move(f);
    w.m_ = std::move(m);
    return w;
}

bool WarpingFunction::contains(double t) const noexcept {
    if (!std::isfinite(t)) return false;
    if (closed_) return t >= tmin_ && t <= tmax_;
    return t > tmin_ && t < tmax_;
}

WarpingFunction::Values WarpingFunction::eval(double t) const {
    if (!contains(t)) {
        std::ostringstream os;
        os << "t = " << t << " outside warping domain of " << describe();
        throw DomainError(os.str());
    }
    switch (kind_) {
    case Kind::SphereLike: {
        const double r = std::sqrt(param_);
        const double s = std::sin(r * t);
        return {s / r, std::cos(r * t), -r * s};
    }
    case Kind::Euclidean:
        return {t, 1.0, 0.0};
    case Kind::HyperbolicLike: {
        const double r = std::sqrt(-param_);
        const double s = std::sinh(r * t);
        return {s / r, std::cosh(r * t), r * s};
    }
    case Kind::Power: {
        const double p = param_;
        const double f = std::pow(t, p);
        return {f, p * f / t, p * (p - 1.0) * f / (t * t)};
    }
    case Kind::Table: {
        auto it = std::upper_bound(t_.begin(), t_.end(), t);
        std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
        if (i >= t_.size() - 1) i = t_.size() - 2;
        const double h = t_[i + 1] - t_[i];
        const double a = (t_[i + 1] - t) / h;
        const double b = (t - t_[i]) / h;
        const double f = a * f_[i] + b * f_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
        const double df = (f_[i + 1] - f_[i]) / h - (3.0 * a * a - 1.0) * h * m_[i] / 6.0 + (3.0 * b * b - 1.0) * h * m_[i + 1] / 6.0;
        const double d2f = a * m_[i] + b * m_[i + 1];
        return {f, df, d2f};
    }
    }
    return {};
}

void WarpingFunction::require_admissible(double lo, double hi) const {
    if (!(lo < hi)) throw ConfigError("empty working interval for the warping function");
    if (!contains(lo) || !contains(hi)) {
        std::ostringstream os;
        os << "working interval [" << lo << ", " << hi << "] is not inside the domain of " << describe();
        throw ConfigError(os.str());
    }
    constexpr int samples = 256;
    for (int i = 0; i <= samples; ++i) {
        const double t = lo + (hi - lo) * i / samples;
        const auto v = eval(t);
        if (!(v.f > 0.0) || !(v.df > 0.0)) {
            std::ostringstream os;
            os << describe() << " violates f > 0, f' > 0 at t = " << t;
            throw ConfigError(os.str());
        }
    }
}

std::string WarpingFunction::describe() const {
    std::ostringstream os;
    switch (kind_) {
    case Kind::SphereLike: os << "sphere-like warping (K = " << param_ << ")"; break;
    case Kind::Euclidean: os << "euclidean warping"; break;
    case Kind::HyperbolicLike: os << "hyperbolic-like warping (K = " << param_ << ")"; break;
    case Kind::Power: os << "power warping (p = " << param_ << ")"; break;
    case Kind::Table: os << "tabulated warping on [" << tmin_ << ", " << tmax_ << "]"; break;
    }
    return os.str();
}

} // namespace prescurv
