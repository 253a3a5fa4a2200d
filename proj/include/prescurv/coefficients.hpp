#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "prescurv/grid.hpp"
#include "prescurv/warping.hpp"

namespace prescurv {

/// coef * cos(wave . x + phase) in base coordinates.
struct FourierTerm {
    double coef = 1.0;
    std::vector<double> wave;
    double phase = 0.0;
    bool operator==(const FourierTerm&) const = default;
};

/// Bounded smooth spatial profile psi(x). On Sphere2 a linear function
/// `linear . xhat` of the embedded unit vector may be added; it is smooth
/// through the poles, unlike longitude-dependent Fourier terms.
struct Profile {
    std::vector<FourierTerm> terms;
    std::array<double, 3> linear{0.0, 0.0, 0.0};

    double eval(const BaseGrid& grid, std::size_t node) const;
    bool empty() const noexcept;
    bool operator==(const Profile&) const = default;
};

/// alpha_l(u, x) sampled on a (u samples x nodes) table, interpolated in u by
/// piecewise cubic Hermite with centered slopes (C^1).
class CoefficientTable {
public:
    CoefficientTable() = default;
    CoefficientTable(std::vector<double> u_samples, std::size_t nodes, std::vector<double> values);

    /// CSV with header and columns u, node-index, value. Every (u, node) pair must
    /// appear once; errors name the offending row (1-based, header is row 1).
    static CoefficientTable read_csv(const std::string& path, std::size_t expected_nodes);

    double u_min() const { return u_.front(); }
    double u_max() const { return u_.back(); }
    std::size_t nodes() const noexcept { return nodes_; }

    struct Sample {
        double value;
        double du;
    };
    Sample eval(double u, std::size_t node) const;

private:
    double at(std::size_t i, std::size_t node) const { return values_[i * nodes_ + node]; }
    double slope(std::size_t i, std::size_t node) const;

    std::vector<double> u_;
    std::size_t nodes_ = 0;
    std::vector<double> values_;
};

/// Description of one coefficient alpha_l. Either built-in,
///   alpha_l(u, x) = amplitude * f(u)^power * (1 + epsilon * psi(x)),
/// with power defaulting to -(k - l), or a table loaded from `table_path`.
struct CoefficientSpec {
    double amplitude = 1.0;
    double epsilon = 0.0;
    std::optional<double> f_power;
    Profile profile;
    std::optional<std::string> table_path;
    bool operator==(const CoefficientSpec&) const = default;
};

/// The coefficient functions alpha_0 .. alpha_{k-1} bound to a grid.
class CoefficientFamily {
public:
    CoefficientFamily() = default;
    CoefficientFamily(std::vector<CoefficientSpec> specs, const BaseGrid& grid, int k);

    int k() const noexcept { return k_; }
    const std::vector<CoefficientSpec>& specs() const noexcept { return specs_; }

    struct Value {
        double value;
        double du;
    };
    /// alpha_l(u, x_node) and its u-derivative; w = warp.eval(u).
    Value eval(int l, double u, std::size_t node, const WarpingFunction::Values& w) const;

    /// f(u)^{k-l} alpha_l(u, x_node). For the built-in family with the default
    /// power this is amplitude * (1 + epsilon psi) evaluated without touching f,
    /// so its u-derivative vanishes exactly.
    double scaled(int l, double u, std::size_t node, const WarpingFunction& warp) const;

    /// psi_l sampled at node.
    double profile_at(int l, std::size_t node) const { return psi_[static_cast<std::size_t>(l) * nodes_ + node]; }

private:
    int k_ = 0;
    std::size_t nodes_ = 0;
    std::vector<CoefficientSpec> specs_;
    std::vector<double> psi_;
    std::vector<std::optional<CoefficientTable>> tables_;
};

} // namespace prescurv
