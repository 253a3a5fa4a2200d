#pragma once

#include <string>
#include <vector>

namespace prescurv {

/// Warping function f of the product I x_f M with metric dt^2 + f(t)^2 g.
class WarpingFunction {
public:
    enum class Kind { SphereLike, Euclidean, HyperbolicLike, Power, Table };

    struct Values {
        double f = 0.0;
        double df = 0.0;
        double d2f = 0.0;
    };

    /// Space form of sectional curvature K: sin(sqrt(K) t)/sqrt(K), t, sinh(sqrt(-K) t)/sqrt(-K).
    static WarpingFunction space_form(double K);
    /// f(t) = t^p on t > 0, p > 0.
    static WarpingFunction power(double p);
    /// Natural cubic spline through (t_i, f_i); needs at least 4 strictly increasing samples.
    static WarpingFunction table(std::vector<double> t, std::vector<double> f);

    Kind kind() const noexcept { return kind_; }
    double parameter() const noexcept { return param_; }
    const std::vector<double>& table_t() const noexcept { return t_; }
    const std::vector<double>& table_f() const noexcept { return f_; }

    /// Open domain (t_min, t_max) on which f > 0 and f' > 0 hold by construction.
    /// Tables use their closed sample range.
    double t_min() const noexcept { return tmin_; }
    double t_max() const noexcept { return tmax_; }
    bool contains(double t) const noexcept;

    /// (f, f', f''); DomainError outside the domain.
    Values eval(double t) const;

    /// Samples [lo, hi] and throws ConfigError unless f > 0 and f' > 0 there.
    void require_admissible(double lo, double hi) const;

    std::string describe() const;

private:
    WarpingFunction() = default;

    Kind kind_ = Kind::Euclidean;
    double param_ = 0.0;
    double tmin_ = 0.0;
    double tmax_ = 0.0;
    bool closed_ = false;
    // table data and spline second derivatives
    std::vector<double> t_, f_, m_;
};

} // namespace prescurv
