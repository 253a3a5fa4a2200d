#include "prescurv/jacobian.hpp"

#include <algorithm>
#include <cmath>

#include "prescurv/errors.hpp"
#include "prescurv/parallel.hpp"
#include "prescurv/symfunc.hpp"

namespace prescurv {

using Triplet = Eigen::Triplet<double, int>;

Coloring color_stencil_graph(const BaseGrid& grid) {
    const std::size_t n = grid.size();
    Coloring c;
    // rows(q) = {q} U {p : q in stencil(p)}
    c.rows.assign(n, {});
    for (std::size_t p = 0; p < n; ++p) {
        c.rows[p].push_back(p);
        for (std::size_t q : grid.neighbors(p)) c.rows[q].push_back(p);
    }
    for (auto& r : c.rows) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
    }

    c.color.assign(n, -1);
    std::vector<std::size_t> stamp;
    for (std::size_t q = 0; q < n; ++q) {
        // colors of every column sharing a row with q
        for (std::size_t r : c.rows[q]) {
            auto mark = [&](std::size_t col) {
                const int cc = c.color[col];
                if (cc < 0) return;
                if (static_cast<std::size_t>(cc) >= stamp.size()) stamp.resize(cc + 1, n);
                stamp[cc] = q;
            };
            mark(r);
            for (std::size_t col : grid.neighbors(r)) mark(col);
        }
        int chosen = 0;
        while (static_cast<std::size_t>(chosen) < stamp.size() && stamp[chosen] == q) ++chosen;
        c.color[q] = chosen;
        if (static_cast<std::size_t>(chosen) >= c.groups.size()) c.groups.resize(chosen + 1);
        c.groups[chosen].push_back(q);
    }
    return c;
}

JacobianAssembler::JacobianAssembler(const Problem& pb) : pb_(pb), coloring_(color_stencil_graph(pb.grid())) {}

SparseMatrix JacobianAssembler::colored_fd(const GridFunction& u, double t) const {
    const std::size_t n = pb_.grid().size();
    const double h0 = 1e-6 * (1.0 + u.max_abs());
    std::vector<Triplet> triplets;
    triplets.reserve(n * (pb_.grid().neighbors(0).size() + 1));

    GridFunction up = u, um = u;
    std::vector<double> fp(n), fm(n);
    std::vector<char> active(n);
    std::vector<std::size_t> rows;

    for (const auto& group : coloring_.groups) {
        std::fill(active.begin(), active.end(), 0);
        rows.clear();
        for (std::size_t q : group)
            for (std::size_t r : coloring_.rows[q])
                if (!active[r]) {
                    active[r] = 1;
                    rows.push_back(r);
                }

        double h = h0;
        for (int attempt = 0;; ++attempt) {
            for (std::size_t q : group) {
                up[q] = u[q] + h;
                um[q] = u[q] - h;
            }
            try {
                parallel_for(rows.size(), [&](std::size_t b, std::size_t e) {
                    for (std::size_t i = b; i < e; ++i) {
                        const std::size_t r = rows[i];
                        fp[r] = problem::evaluate_node(up, t, pb_, r).value;
                        fm[r] = problem::evaluate_node(um, t, pb_, r).value;
                    }
                });
                break;
            } catch (const ConeExitError&) {
                if (attempt >= 1) {
                    for (std::size_t q : group) up[q] = um[q] = u[q];
                    throw;
                }
                h *= 0.1;
            }
        }
        for (std::size_t q : group) {
            for (std::size_t r : coloring_.rows[q])
                triplets.emplace_back(static_cast<int>(r), static_cast<int>(q), (fp[r] - fm[r]) / (2.0 * h));
            up[q] = um[q] = u[q];
        }
    }
    SparseMatrix J(static_cast<int>(n), static_cast<int>(n));
    J.setFromTriplets(triplets.begin(), triplets.end());
    J.makeCompressed();
    return J;
}

SparseMatrix JacobianAssembler::analytic(const GridFunction& u, double t) const {
    const auto& grid = pb_.grid();
    const std::size_t n = grid.size();
    const int dim = grid.dim();
    const int stride = grid.weight_stride();
    const double sign = pb_.form_options.negate_second_form ? -1.0 : 1.0;

    std::vector<std::vector<Triplet>> rows(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const auto s = problem::evaluate_node(u, t, pb_, p);
            const std::span<const double> lam(s.rec.lam.data(), static_cast<std::size_t>(s.rec.lam.size()));
            const auto op = symfunc::g_operator(lam, s.alpha, s.alpha_k1.value, t);
            const auto eig = geometry::pencil_eigen(s.rec.h, s.rec.gtilde, p);

            geometry::SmallMatrix M = geometry::SmallMatrix::Zero(dim, dim);
            geometry::SmallMatrix Ml = geometry::SmallMatrix::Zero(dim, dim);
            for (int i = 0; i < dim; ++i) {
                const auto vi = eig.vectors.col(i);
                M.noalias() += op.grad[i] * vi * vi.transpose();
                Ml.noalias() += op.grad[i] * eig.values(i) * vi * vi.transpose();
            }

            const double f = s.w.f, df = s.w.df, d2f = s.w.d2f, v = s.rec.v;
            const auto& du = s.d.du;
            const auto& H = s.d.hess;
            const auto g = grid.metric(p);
            const auto gi = grid.inverse_metric(p);

            double mh = 0.0, mlg = 0.0, mdh = 0.0;
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) {
                    const double gij = g[i * dim + j];
                    mh += M(i, j) * s.rec.h(i, j);
                    mlg += Ml(i, j) * gij;
                    const double dN = sign * (-df * H(i, j) + 2.0 * d2f * du(i) * du(j) + (2.0 * f * df * df + f * f * d2f) * gij);
                    mdh += M(i, j) * (dN / v - s.rec.h(i, j) * f * df / (v * v));
                }
            double center = mdh - 2.0 * f * df * mlg - s.alpha_k1.du;
            for (int l = 0; l + 2 <= pb_.k(); ++l) center -= t * s.alpha_du[l] * op.quotient_terms[l];

            geometry::SmallVector ginv_u = geometry::SmallVector::Zero(dim);
            for (int a = 0; a < dim; ++a)
                for (int c = 0; c < dim; ++c) ginv_u(a) += gi[a * dim + c] * du(c);
            const geometry::SmallVector Mu = M * du;
            const geometry::SmallVector Mlu = Ml * du;

            std::array<double, 3> sa{};
            std::array<double, 9> sab{};
            for (int a = 0; a < dim; ++a) {
                sa[a] = sign * 4.0 * df / v * Mu(a) - mh * ginv_u(a) / (v * v) - 2.0 * Mlu(a);
                for (int c = a; c < dim; ++c)
                    sab[grid.hessian_slot(a, c) - dim] = sign * (-f / v) * M(a, c) * (a == c ? 1.0 : 2.0);
            }

            const auto nb = grid.neighbors(p);
            const auto w = grid.weights(p);
            auto& out = rows[p];
            out.reserve(nb.size() + 1);
            double offsum = 0.0;
            for (std::size_t j = 0; j < nb.size(); ++j) {
                const double* wj = w.data() + j * stride;
                double c = 0.0;
                for (int a = 0; a < dim; ++a) c += sa[a] * wj[a];
                for (int sl = dim; sl < stride; ++sl) c += sab[sl - dim] * wj[sl];
                offsum += c;
                out.emplace_back(static_cast<int>(p), static_cast<int>(nb[j]), c);
            }
            out.emplace_back(static_cast<int>(p), static_cast<int>(p), center - offsum);
        }
    });

    std::vector<Triplet> triplets;
    for (auto& r : rows) triplets.insert(triplets.end(), r.begin(), r.end());
    SparseMatrix J(static_cast<int>(n), static_cast<int>(n));
    J.setFromTriplets(triplets.begin(), triplets.end());
    J.makeCompressed();
    return J;
}

SparseMatrix JacobianAssembler::assemble(const GridFunction& u, double t, JacobianMode mode) const {
    return mode == JacobianMode::Analytic ? analytic(u, t) : colored_fd(u, t);
}

SparseMatrix jacobian(const GridFunction& u, double t, const Problem& pb, JacobianMode mode) {
    return JacobianAssembler(pb).assemble(u, t, mode);
}

} // namespace prescurv
