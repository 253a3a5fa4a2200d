#include "prescurv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "prescurv/errors.hpp"

namespace prescurv {

int BaseGrid::hessian_slot(int a, int b) const noexcept {
    if (a > b) std::swap(a, b);
    // rows before a contribute n, n-1, ... entries
    int slot = 0;
    for (int r = 0; r < a; ++r) slot += dim_ - r;
    return dim_ + slot + (b - a);
}

void BaseGrid::add_neighbor(std::size_t q, std::span<const double> w) {
    neighbors_.push_back(q);
    weights_.insert(weights_.end(), w.begin(), w.end());
}

BaseGrid BaseGrid::flat_torus(std::vector<int> counts, std::vector<double> periods) {
    const int n = static_cast<int>(counts.size());
    if (n != 2 && n != 3) throw ConfigError("flat torus dimension must be 2 or 3");
    if (periods.size() != counts.size()) throw ConfigError("flat torus needs one period per axis");
    for (int a = 0; a < n; ++a) {
        if (counts[a] < 4) throw ConfigError("flat torus needs at least 4 nodes per axis");
        if (!(periods[a] > 0.0)) throw ConfigError("flat torus periods must be positive");
    }

    BaseGrid g;
    g.manifold_ = Manifold::FlatTorus;
    g.dim_ = n;
    g.counts_ = std::move(counts);
    g.periods_ = std::move(periods);
    g.size_ = 1;
    for (int c : g.counts_) g.size_ *= static_cast<std::size_t>(c);

    std::vector<double> h(n);
    for (int a = 0; a < n; ++a) h[a] = g.periods_[a] / g.counts_[a];

    const int stride = g.weight_stride();
    g.coords_.resize(g.size_ * n);
    g.metric_.assign(g.size_ * n * n, 0.0);
    g.inverse_metric_.assign(g.size_ * n * n, 0.0);
    g.offsets_.reserve(g.size_ + 1);
    g.offsets_.push_back(0);

    std::vector<double> w(stride);
    std::vector<int> m(n);
    for (std::size_t p = 0; p < g.size_; ++p) {
        auto mi = g.multi_index(p);
        for (int a = 0; a < n; ++a) {
            g.coords_[p * n + a] = mi[a] * h[a];
            g.metric_[p * n * n + a * n + a] = 1.0;
            g.inverse_metric_[p * n * n + a * n + a] = 1.0;
        }
        for (int a = 0; a < n; ++a) {
            for (int s : {+1, -1}) {
                std::fill(w.begin(), w.end(), 0.0);
                w[a] = s / (2.0 * h[a]);
                w[g.hessian_slot(a, a)] = 1.0 / (h[a] * h[a]);
                m = mi;
                m[a] += s;
                g.add_neighbor(g.index(m), w);
            }
        }
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int sa : {+1, -1})
                    for (int sb : {+1, -1}) {
                        std::fill(w.begin(), w.end(), 0.0);
                        w[g.hessian_slot(a, b)] = sa * sb / (4.0 * h[a] * h[b]);
                        m = mi;
                        m[a] += sa;
                        m[b] += sb;
                        g.add_neighbor(g.index(m), w);
                    }
        g.offsets_.push_back(g.neighbors_.size());
    }
    return g;
}

BaseGrid BaseGrid::sphere2(int n_theta, int n_phi) {
    if (n_theta < 4 || n_phi < 4) throw ConfigError("sphere grid needs at least 4 nodes per direction");
    if (n_phi % 2 != 0) throw ConfigError("sphere grid needs an even longitude count (antipodal pole copy)");

    BaseGrid g;
    g.manifold_ = Manifold::Sphere2;
    g.dim_ = 2;
    g.counts_ = {n_theta, n_phi};
    g.periods_ = {std::numbers::pi, 2.0 * std::numbers::pi};
    g.size_ = static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi);

    const double ht = std::numbers::pi / n_theta;
    const double hp = 2.0 * std::numbers::pi / n_phi;
    const int stride = g.weight_stride();
    const int tt = g.hessian_slot(0, 0), tp = g.hessian_slot(0, 1), pp = g.hessian_slot(1, 1);

    g.coords_.resize(g.size_ * 2);
    g.metric_.assign(g.size_ * 4, 0.0);
    g.inverse_metric_.assign(g.size_ * 4, 0.0);
    g.offsets_.reserve(g.size_ + 1);
    g.offsets_.push_back(0);

    // (i, j) with i possibly -1 or n_theta: continue across the pole onto the
    // antipodal meridian.
    auto node = [&](int i, int j) {
        if (i < 0) {
            i = -1 - i;
            j += n_phi / 2;
        } else if (i >= n_theta) {
            i = 2 * n_theta - 1 - i;
            j += n_phi / 2;
        }
        j = ((j % n_phi) + n_phi) % n_phi;
        return static_cast<std::size_t>(i) * n_phi + static_cast<std::size_t>(j);
    };

    std::vector<double> w(stride);
    for (int i = 0; i < n_theta; ++i) {
        const double theta = (i + 0.5) * ht;
        const double s = std::sin(theta), c = std::cos(theta);
        const double cot = c / s;
        for (int j = 0; j < n_phi; ++j) {
            const std::size_t p = node(i, j);
            g.coords_[2 * p] = theta;
            g.coords_[2 * p + 1] = j * hp;
            g.metric_[4 * p + 0] = 1.0;
            g.metric_[4 * p + 3] = s * s;
            g.inverse_metric_[4 * p + 0] = 1.0;
            g.inverse_metric_[4 * p + 3] = 1.0 / (s * s);

            // theta neighbors; H_phiphi picks up -Gamma^theta_phiphi u_theta = s c u_theta
            for (int st : {+1, -1}) {
                std::fill(w.begin(), w.end(), 0.0);
                w[0] = st / (2.0 * ht);
                w[tt] = 1.0 / (ht * ht);
                w[pp] = s * c * st / (2.0 * ht);
                g.add_neighbor(node(i + st, j), w);
            }
            // phi neighbors; H_thetaphi picks up -Gamma^phi_thetaphi u_phi = -cot u_phi
            for (int sp : {+1, -1}) {
                std::fill(w.begin(), w.end(), 0.0);
                w[1] = sp / (2.0 * hp);
                w[pp] = 1.0 / (hp * hp);
                w[tp] = -cot * sp / (2.0 * hp);
                g.add_neighbor(node(i, j + sp), w);
            }
            for (int st : {+1, -1})
                for (int sp : {+1, -1}) {
                    std::fill(w.begin(), w.end(), 0.0);
                    w[tp] = st * sp / (4.0 * ht * hp);
                    g.add_neighbor(node(i + st, j + sp), w);
                }
            g.offsets_.push_back(g.neighbors_.size());
        }
    }
    return g;
}

std::array<double, 3> BaseGrid::embedding(std::size_t p) const {
    if (manifold_ != Manifold::Sphere2) return {0.0, 0.0, 0.0};
    const double theta = coords_[2 * p], phi = coords_[2 * p + 1];
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

std::size_t BaseGrid::index(std::span<const int> multi) const {
    std::size_t p = 0;
    for (int a = 0; a < dim_; ++a) {
        const int c = counts_[a];
        int v = multi[a];
        if (manifold_ == Manifold::FlatTorus || a == 1) v = ((v % c) + c) % c;
        else if (v < 0 || v >= c) throw DomainError("sphere colatitude index out of range");
        p = p * static_cast<std::size_t>(c) + static_cast<std::size_t>(v);
    }
    return p;
}

std::vector<int> BaseGrid::multi_index(std::size_t p) const {
    std::vector<int> m(dim_);
    for (int a = dim_ - 1; a >= 0; --a) {
        m[a] = static_cast<int>(p % static_cast<std::size_t>(counts_[a]));
        p /= static_cast<std::size_t>(counts_[a]);
    }
    return m;
}

std::string BaseGrid::describe() const {
    std::ostringstream os;
    if (manifold_ == Manifold::FlatTorus) {
        os << "FlatTorus(" << dim_ << ") ";
        for (int a = 0; a < dim_; ++a) os << (a ? "x" : "") << counts_[a];
    } else {
        os << "Sphere2 " << counts_[0] << "x" << counts_[1];
    }
    return os.str();
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::min() const {
    return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

double GridFunction::max() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

} // namespace prescurv
