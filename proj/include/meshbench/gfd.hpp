#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "meshbench/grid.hpp"
#include "meshbench/problems.hpp"
#include "meshbench/sparse.hpp"

namespace meshbench {

/// Generalized-difference stencil over the 3x3 subgrid around an interior
/// node: sum_i gamma_i u(p_i) approximates -div(K grad u) at the center.
/// Slots run row-major over (di,dj) in {-1,0,1}^2; slot 4 is the center.
/// The coefficients always sum to zero.
struct Stencil {
    int ci = 0, cj = 0;                 // center grid indices
    std::array<Point, 9> points{};
    std::array<double, 9> gamma{};
};

/// Values of -div(K grad .) at a point applied to the centered monomials
/// {1, xi, eta, xi^2, xi*eta, eta^2}:
/// [0, -(dxK11+dyK12), -(dxK12+dyK22), -2K11, -2K12, -2K22].
inline std::array<double, 6> operator_moments(const SymTensor2& K,
                                              const TensorPartials& dK) {
    if (!K.positive_definite())
        throw InvalidInput("operator_moments: K must be symmetric positive definite");
    return {0.0,
            -(dK.dk11_dx + dK.dk12_dy),
            -(dK.dk12_dx + dK.dk22_dy),
            -2.0 * K.k11,
            -2.0 * K.k12,
            -2.0 * K.k22};
}

namespace detail {

// Dense symmetric positive definite solve via Cholesky; returns false when a
// pivot collapses (rank-deficient stencil).
template <int N>
bool cholesky_solve(std::array<std::array<double, N>, N>& a, std::array<double, N>& b) {
    double scale = 0.0;
    for (int i = 0; i < N; ++i) scale = std::max(scale, std::abs(a[i][i]));
    const double tol = 1e-12 * std::max(scale, 1e-300);
    for (int k = 0; k < N; ++k) {
        double d = a[k][k];
        for (int q = 0; q < k; ++q) d -= a[k][q] * a[k][q];
        if (!(d > tol)) return false;
        a[k][k] = std::sqrt(d);
        for (int i = k + 1; i < N; ++i) {
            double s = a[i][k];
            for (int q = 0; q < k; ++q) s -= a[i][q] * a[k][q];
            a[i][k] = s / a[k][k];
        }
    }
    for (int i = 0; i < N; ++i) {
        double s = b[i];
        for (int q = 0; q < i; ++q) s -= a[i][q] * b[q];
        b[i] = s / a[i][i];
    }
    for (int i = N - 1; i >= 0; --i) {
        double s = b[i];
        for (int q = i + 1; q < N; ++q) s -= a[q][i] * b[q];
        b[i] = s / a[i][i];
    }
    return true;
}

}  // namespace detail

/// Coefficients reproducing the operator moments exactly on all polynomials
/// of total degree <= 2: the minimum weighted-norm solution of the
/// consistency system over the 8 neighbors (weights 1/rho^2, which keeps the
/// scheme an M-matrix on regular subgrids) with the center coefficient fixed
/// by the zero-sum constraint.
/// @throws StencilError when the subgrid does not span quadratics
///         (collinear or collapsed neighbors).
inline Stencil stencil_coefficients(const std::array<Point, 9>& points,
                                    const std::array<double, 6>& moments) {
    Stencil st;
    st.points = points;
    const Point center = points[4];

    double h = 0.0;
    for (int k = 0; k < 9; ++k) h = std::max(h, dist(points[k], center));
    if (!(h > 0.0)) throw StencilError("stencil: all subgrid points coincide");

    // Scaled offsets keep the normal equations O(1)-conditioned.
    std::array<double, 8> xi{}, eta{}, w{};
    int nb = 0;
    for (int k = 0; k < 9; ++k) {
        if (k == 4) continue;
        const Point d = points[k] - center;
        xi[nb] = d.x / h;
        eta[nb] = d.y / h;
        const double rho2 = xi[nb] * xi[nb] + eta[nb] * eta[nb];
        if (!(rho2 > 0.0))
            throw StencilError("stencil: neighbor coincides with the center node");
        w[nb] = 1.0 / rho2;
        ++nb;
    }

    // Taylor rows {xi, eta, xi^2/2, xi*eta, eta^2/2}; the target vector is
    // the operator applied to that basis, rescaled to the unit subgrid.
    std::array<std::array<double, 8>, 5> t{};
    for (int a = 0; a < 8; ++a) {
        t[0][a] = xi[a];
        t[1][a] = eta[a];
        t[2][a] = 0.5 * xi[a] * xi[a];
        t[3][a] = xi[a] * eta[a];
        t[4][a] = 0.5 * eta[a] * eta[a];
    }
    // Target = h^2 * (operator applied to the scaled Taylor basis); the h^2
    // comes back out of gamma below.
    std::array<double, 5> c{moments[1] * h, moments[2] * h, moments[3] / 2.0,
                            moments[4], moments[5] / 2.0};

    std::array<std::array<double, 5>, 5> a{};
    for (int r = 0; r < 5; ++r)
        for (int s = r; s < 5; ++s) {
            double sum = 0.0;
            for (int q = 0; q < 8; ++q) sum += t[r][q] * w[q] * t[s][q];
            a[r][s] = a[s][r] = sum;
        }
    if (!detail::cholesky_solve<5>(a, c))
        throw StencilError("stencil: degenerate 3x3 subgrid (rank-deficient)");

    double total = 0.0;
    int slot = 0;
    for (int k = 0; k < 9; ++k) {
        if (k == 4) continue;
        double g = 0.0;
        for (int r = 0; r < 5; ++r) g += t[r][slot] * c[r];
        g *= w[slot] / (h * h);
        st.gamma[k] = g;
        total += g;
        ++slot;
    }
    st.gamma[4] = -total;
    return st;
}

struct FdAssembly {
    SparseSystem system;
    std::vector<Stencil> stencils;  // one per interior node, j-major
};

/// One generalized-difference row per interior node. Unknowns are the
/// interior nodes in j-major order; boundary values move to the right hand
/// side as Dirichlet data g, and the source f(node) is added there too.
inline FdAssembly assemble_fd_system(const StructuredGrid& g, const Problem& prob) {
    if (g.m < 3 || g.n < 3)
        throw InvalidInput("assemble_fd_system: grid has no interior nodes");
    if (cell_triangle_areas(g).min() <= 0.0)
        throw InvalidInput("assemble_fd_system: grid is not convex");

    const BoundingBox bb = bounding_box(g.points);
    const double diameter = std::hypot(bb.width(), bb.height());

    FdAssembly out;
    out.system.resize(g.interior_count());
    out.stencils.reserve(out.system.dimension);
    const int ni = g.n - 2;

    for (int j = 1; j + 1 < g.m; ++j) {
        for (int i = 1; i + 1 < g.n; ++i) {
            const Point pc = g.at(i, j);
            const SymTensor2 K = tensor_eval(prob, pc.x, pc.y);
            const TensorPartials dK = prob.dK
                                          ? prob.dK(pc.x, pc.y)
                                          : numeric_tensor_partials(prob, pc.x, pc.y, diameter);
            std::array<Point, 9> pts;
            int slot = 0;
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) pts[slot++] = g.at(i + di, j + dj);

            Stencil st;
            try {
                st = stencil_coefficients(pts, operator_moments(K, dK));
            } catch (const StencilError& e) {
                throw StencilError(std::string(e.what()) + " at node (" +
                                   std::to_string(i) + "," + std::to_string(j) + ") = (" +
                                   std::to_string(pc.x) + "," + std::to_string(pc.y) + ")");
            }
            st.ci = i;
            st.cj = j;

            const int row = (j - 1) * ni + (i - 1);
            slot = 0;
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di, ++slot) {
                    const int ii = i + di, jj = j + dj;
                    if (g.is_interior(ii, jj))
                        out.system.add(row, (jj - 1) * ni + (ii - 1), st.gamma[slot]);
                    else {
                        const Point pb = g.at(ii, jj);
                        out.system.rhs[row] -= st.gamma[slot] * prob.g(pb.x, pb.y);
                    }
                }
            out.system.rhs[row] += prob.f(pc.x, pc.y);
            out.stencils.push_back(st);
        }
    }
    return out;
}

struct GaussSeidelResult {
    std::vector<double> x;
    int iterations = 0;
    bool converged = false;
};

/// Classic forward Gauss-Seidel sweeps until the relative residual drops
/// under tol. Non-convergence is reported, not thrown; callers may fall
/// back to the direct sparse solver. Sweeping stops ahead of max_iters when
/// the observed contraction rate cannot reach tol within the budget.
inline GaussSeidelResult gauss_seidel_solve(const SparseSystem& s, double tol = 1e-10,
                                            long max_iters = 1000000) {
    for (int r = 0; r < s.dimension; ++r)
        if (s.diagonal(r) == 0.0)
            throw SolverError("gauss_seidel: zero diagonal entry in row " +
                              std::to_string(r));
    GaussSeidelResult res;
    res.x.assign(s.dimension, 0.0);
    constexpr long kWindow = 100;
    double window_res = -1.0;
    for (long it = 0; it < max_iters; ++it) {
        for (int r = 0; r < s.dimension; ++r) {
            double sum = s.rhs[r];
            double diag = 1.0;
            for (const auto& e : s.rows[r]) {
                if (e.col == r)
                    diag = e.value;
                else
                    sum -= e.value * res.x[e.col];
            }
            res.x[r] = sum / diag;
        }
        res.iterations = static_cast<int>(it) + 1;
        const double rr = s.relative_residual(res.x);
        if (rr < tol) {
            res.converged = true;
            break;
        }
        if (!std::isfinite(rr)) break;
        if ((it + 1) % kWindow == 0) {
            if (window_res > 0.0) {
                const double rate = std::pow(rr / window_res, 1.0 / kWindow);
                if (rate >= 1.0) break;  // diverging or stalled
                const double projected = std::log(tol / rr) / std::log(rate);
                if (projected > static_cast<double>(max_iters - it)) break;
            }
            window_res = rr;
        }
    }
    return res;
}

}  // namespace meshbench
