#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace prescurv {

/// Discretized compact base manifold with centered second-order stencils.
///
/// Every node carries a list of neighbors and, for each neighbor q, the weights
/// w_q such that
///   du_a    = sum_q w_q^a    (u_q - u_p)
///   D2u_ab  = sum_q w_q^{ab} (u_q - u_p)     (covariant Hessian, a <= b)
/// Differences are taken against the center value, so a constant field yields
/// exactly zero derivatives in floating point. Christoffel corrections of the
/// covariant Hessian are folded into the second-derivative weights.
class BaseGrid {
public:
    enum class Manifold { FlatTorus, Sphere2 };

    /// n-torus (n = 2 or 3) with counts[a] equispaced nodes on a period periods[a].
    static BaseGrid flat_torus(std::vector<int> counts, std::vector<double> periods);

    /// Round unit 2-sphere in colatitude/longitude (theta, phi). Nodes sit at
    /// theta_i = (i + 1/2) pi / n_theta so no node lies on a pole; n_phi must be even.
    static BaseGrid sphere2(int n_theta, int n_phi);

    Manifold manifold() const noexcept { return manifold_; }
    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return size_; }
    const std::vector<int>& counts() const noexcept { return counts_; }
    const std::vector<double>& periods() const noexcept { return periods_; }
    std::string describe() const;

    /// Coordinates of node p: (x_1..x_n) on the torus, (theta, phi) on the sphere.
    std::span<const double> coords(std::size_t p) const {
        return {coords_.data() + p * dim_, static_cast<std::size_t>(dim_)};
    }
    /// Unit vector in R^3 for Sphere2 nodes; zero for tori.
    std::array<double, 3> embedding(std::size_t p) const;

    /// Row-major n x n base metric g_ij and inverse at node p.
    std::span<const double> metric(std::size_t p) const {
        return {metric_.data() + p * dim_ * dim_, static_cast<std::size_t>(dim_ * dim_)};
    }
    std::span<const double> inverse_metric(std::size_t p) const {
        return {inverse_metric_.data() + p * dim_ * dim_, static_cast<std::size_t>(dim_ * dim_)};
    }

    /// Number of stored weights per neighbor: n first-derivative weights followed
    /// by n(n+1)/2 Hessian weights in (0,0),(0,1),..,(0,n-1),(1,1),.. order.
    int weight_stride() const noexcept { return dim_ + dim_ * (dim_ + 1) / 2; }
    /// Position of Hessian entry (a, b) inside a weight block.
    int hessian_slot(int a, int b) const noexcept;

    std::span<const std::size_t> neighbors(std::size_t p) const {
        return {neighbors_.data() + offsets_[p], offsets_[p + 1] - offsets_[p]};
    }
    std::span<const double> weights(std::size_t p) const {
        const std::size_t s = static_cast<std::size_t>(weight_stride());
        return {weights_.data() + offsets_[p] * s, (offsets_[p + 1] - offsets_[p]) * s};
    }

    /// Flat node index for a torus multi-index (periodic wrap) or sphere (i_theta, j_phi).
    std::size_t index(std::span<const int> multi) const;
    /// Inverse of index(); no wrap.
    std::vector<int> multi_index(std::size_t p) const;

private:
    BaseGrid() = default;
    void add_neighbor(std::size_t q, std::span<const double> w);

    Manifold manifold_ = Manifold::FlatTorus;
    int dim_ = 0;
    std::size_t size_ = 0;
    std::vector<int> counts_;
    std::vector<double> periods_;
    std::vector<double> coords_;
    std::vector<double> metric_;
    std::vector<double> inverse_metric_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> neighbors_;
    std::vector<double> weights_;
};

/// Values of the graph height u on the nodes of a grid.
struct GridFunction {
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(std::vector<double> v) : values(std::move(v)) {}
    GridFunction(std::size_t n, double c) : values(n, c) {}

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    double max_abs() const;
    double min() const;
    double max() const;
    bool operator==(const GridFunction&) const = default;
};

} // namespace prescurv
