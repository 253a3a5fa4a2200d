#include "prescurv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "prescurv/errors.hpp"
#include "prescurv/parallel.hpp"

namespace prescurv::geometry {

namespace {

// Symmetric eigen-solve by cyclic Jacobi rotations; a is overwritten by its
// diagonalization and q accumulates the rotations.
void jacobi(SmallMatrix& a, SmallMatrix& q) {
    const int n = static_cast<int>(a.rows());
    q.setIdentity(n, n);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0, scale = 0.0;
        for (int i = 0; i < n; ++i) {
            scale += a(i, i) * a(i, i);
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        }
        if (off == 0.0 || off <= 1e-34 * scale) return;
        for (int p = 0; p < n; ++p)
            for (int r = p + 1; r < n; ++r) {
                const double apr = a(p, r);
                if (apr == 0.0) continue;
                const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akr = a(k, r);
                    a(k, p) = c * akp - s * akr;
                    a(k, r) = s * akp + c * akr;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), ark = a(r, k);
                    a(p, k) = c * apk - s * ark;
                    a(r, k) = s * apk + c * ark;
                }
                a(p, r) = a(r, p) = 0.0;
                for (int k = 0; k < n; ++k) {
                    const double qkp = q(k, p), qkr = q(k, r);
                    q(k, p) = c * qkp - s * qkr;
                    q(k, r) = s * qkp + c * qkr;
                }
            }
    }
}

} // namespace

NodeDerivatives derivatives_at(const GridFunction& u, const BaseGrid& grid, std::size_t p) {
    const int n = grid.dim();
    const int stride = grid.weight_stride();
    NodeDerivatives d;
    d.du.setZero(n);
    d.hess.setZero(n, n);
    std::array<double, 9> hs{};
    const auto nb = grid.neighbors(p);
    const auto w = grid.weights(p);
    const double up = u[p];
    for (std::size_t j = 0; j < nb.size(); ++j) {
        const double diff = u[nb[j]] - up;
        const double* wj = w.data() + j * stride;
        for (int a = 0; a < n; ++a) d.du(a) += wj[a] * diff;
        for (int s = n; s < stride; ++s) hs[s - n] += wj[s] * diff;
    }
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            const double v = hs[grid.hessian_slot(a, b) - n];
            d.hess(a, b) = v;
            d.hess(b, a) = v;
        }
    return d;
}

std::vector<NodeDerivatives> gradient_hessian(const GridFunction& u, const BaseGrid& grid) {
    std::vector<NodeDerivatives> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) out[p] = derivatives_at(u, grid, p);
    });
    return out;
}

PencilEigen pencil_eigen(const SmallMatrix& h, const SmallMatrix& gtilde, std::size_t node) {
    const int n = static_cast<int>(h.rows());
    // Cholesky gtilde = L L^T
    SmallMatrix L = SmallMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double d = gtilde(j, j);
        for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) {
            std::ostringstream os;
            os << "induced metric not positive definite";
            if (node != no_node) os << " at node " << node;
            throw GeometryError(os.str(), node);
        }
        L(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = gtilde(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    // C = L^{-1} h L^{-T}: forward-substitute columns of h, then rows.
    SmallMatrix X(n, n); // X = L^{-1} h
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i) {
            double s = h(i, c);
            for (int k = 0; k < i; ++k) s -= L(i, k) * X(k, c);
            X(i, c) = s / L(i, i);
        }
    SmallMatrix C(n, n); // C = X L^{-T}  <=>  C^T = L^{-1} X^T
    for (int r = 0; r < n; ++r)
        for (int i = 0; i < n; ++i) {
            double s = X(r, i);
            for (int k = 0; k < i; ++k) s -= L(i, k) * C(r, k);
            C(r, i) = s / L(i, i);
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) C(i, j) = C(j, i) = 0.5 * (C(i, j) + C(j, i));

    SmallMatrix Q;
    jacobi(C, Q);

    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.begin() + n, [&](int a, int b) { return C(a, a) < C(b, b); });

    PencilEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.values(i) = C(order[i], order[i]);
        // x = L^{-T} q  (back substitution)
        for (int r = n - 1; r >= 0; --r) {
            double s = Q(r, order[i]);
            for (int k = r + 1; k < n; ++k) s -= L(k, r) * out.vectors(k, i);
            out.vectors(r, i) = s / L(r, r);
        }
    }
    return out;
}

SmallVector principal_curvatures(const CurvatureRecord& rec, std::size_t node) {
    return pencil_eigen(rec.h, rec.gtilde, node).values;
}

CurvatureRecord curvature_at(const WarpingFunction::Values& w, std::span<const double> g,
                             std::span<const double> ginv, const NodeDerivatives& d,
                             const FormOptions& opts, std::size_t node) {
    const int n = static_cast<int>(d.du.size());
    CurvatureRecord rec;
    double grad2 = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) grad2 += ginv[a * n + b] * d.du(a) * d.du(b);
    rec.v = std::sqrt(w.f * w.f + grad2);
    rec.tau = w.f * w.f / rec.v;
    rec.gtilde.resize(n, n);
    rec.h.resize(n, n);
    const double sign = opts.negate_second_form ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double gij = g[i * n + j];
            rec.gtilde(i, j) = w.f * w.f * gij + d.du(i) * d.du(j);
            rec.h(i, j) = sign * (-w.f * d.hess(i, j) + 2.0 * w.df * d.du(i) * d.du(j) + w.f * w.f * w.df * gij) / rec.v;
        }
    rec.lam = principal_curvatures(rec, node);
    return rec;
}

std::vector<CurvatureRecord> fundamental_forms(const GridFunction& u, const BaseGrid& grid,
                                               const WarpingFunction& warp, const FormOptions& opts) {
    std::vector<CurvatureRecord> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const auto d = derivatives_at(u, grid, p);
            out[p] = curvature_at(warp.eval(u[p]), grid.metric(p), grid.inverse_metric(p), d, opts, p);
        }
    });
    return out;
}

} // namespace prescurv::geometry
