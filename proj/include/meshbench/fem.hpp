#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "meshbench/problems.hpp"
#include "meshbench/sparse.hpp"
#include "meshbench/triangulation.hpp"

namespace meshbench {

struct ElementMatrix {
    std::array<std::array<double, 3>, 3> k_local{};
    std::array<double, 3> f_local{};
};

/// Constant gradients of the three pyramid (P1) basis functions on a
/// positively oriented triangle; phi_i is 1 at vertex i and 0 at the others,
/// so the gradients sum to zero.
inline std::array<Point, 3> pyramid_gradient(const std::array<Point, 3>& tri) {
    const double area2 = cross(tri[1] - tri[0], tri[2] - tri[0]);
    if (!(area2 > 0.0))
        throw InvalidInput("pyramid_gradient: triangle area must be positive");
    return {Point{(tri[1].y - tri[2].y) / area2, (tri[2].x - tri[1].x) / area2},
            Point{(tri[2].y - tri[0].y) / area2, (tri[0].x - tri[2].x) / area2},
            Point{(tri[0].y - tri[1].y) / area2, (tri[1].x - tri[0].x) / area2}};
}

/// Local stiffness and load with one-point centroid quadrature:
/// k[i][j] = area * grad(phi_j)^T K(centroid) grad(phi_i),
/// f[i] = area * f(centroid) / 3.
inline ElementMatrix element_stiffness(const std::array<Point, 3>& tri,
                                       const Problem& prob) {
    const auto grads = pyramid_gradient(tri);
    const double area = triangle_signed_area(tri[0], tri[1], tri[2]);
    const Point centroid = (1.0 / 3.0) * (tri[0] + tri[1] + tri[2]);
    const SymTensor2 k = tensor_eval(prob, centroid.x, centroid.y);
    ElementMatrix e;
    for (int i = 0; i < 3; ++i) {
        const Point kg{k.k11 * grads[i].x + k.k12 * grads[i].y,
                       k.k12 * grads[i].x + k.k22 * grads[i].y};
        // fill the upper triangle and mirror so symmetry is bit-exact
        for (int j = i; j < 3; ++j) {
            const double v = area * dot(grads[j], kg);
            e.k_local[i][j] = v;
            e.k_local[j][i] = v;
        }
        e.f_local[i] = area * prob.f(centroid.x, centroid.y) / 3.0;
    }
    return e;
}

/// Galerkin assembly over the interior nodes; Dirichlet boundary values are
/// eliminated into the right hand side, so the dimension equals the number
/// of interior (unknown) nodes.
inline SparseSystem assemble_fem_system(const TriMesh& mesh, const Problem& prob) {
    std::vector<int> unknown(mesh.nodes.size(), -1);
    int count = 0;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        if (!mesh.boundary[i]) unknown[i] = count++;
    if (count == 0)
        throw InvalidInput("assemble_fem_system: mesh has no interior node");

    SparseSystem s(count);
    for (const auto& tri : mesh.triangles) {
        const std::array<Point, 3> pts{mesh.nodes[tri[0]], mesh.nodes[tri[1]],
                                       mesh.nodes[tri[2]]};
        const ElementMatrix e = element_stiffness(pts, prob);
        for (int i = 0; i < 3; ++i) {
            const int row = unknown[tri[i]];
            if (row < 0) continue;
            s.rhs[row] += e.f_local[i];
            for (int j = 0; j < 3; ++j) {
                if (unknown[tri[j]] >= 0)
                    s.add(row, unknown[tri[j]], e.k_local[i][j]);
                else
                    s.rhs[row] -= e.k_local[i][j] * prob.g(pts[j].x, pts[j].y);
            }
        }
    }
    return s;
}

/// Sparse LU factorization (deterministic COLAMD ordering). The solution is
/// verified to ||b - Ax|| / ||b|| < 1e-12.
inline std::vector<double> sparse_direct_solve(const SparseSystem& s) {
    Eigen::SparseMatrix<double> a(s.dimension, s.dimension);
    std::vector<Eigen::Triplet<double>> trip;
    for (int r = 0; r < s.dimension; ++r)
        for (const auto& e : s.rows[r]) trip.emplace_back(r, e.col, e.value);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
        throw SolverError("sparse_direct_solve: factorization failed (singular matrix?)");
    Eigen::VectorXd b(s.dimension);
    for (int r = 0; r < s.dimension; ++r) b[r] = s.rhs[r];
    const Eigen::VectorXd x = lu.solve(b);
    std::vector<double> out(x.data(), x.data() + x.size());
    if (s.relative_residual(out) >= 1e-12)
        throw SolverError("sparse_direct_solve: residual above 1e-12 (ill-conditioned system)");
    return out;
}

/// Plain conjugate gradients for symmetric positive definite systems;
/// iterative fallback for large meshes.
inline std::vector<double> cg_solve(const SparseSystem& s, double tol = 1e-12,
                                    int max_iters = 100000) {
    std::vector<double> x(s.dimension, 0.0), r = s.rhs, p = r;
    double rr = 0.0, bb = 0.0;
    for (double v : r) rr += v * v;
    bb = rr;
    if (bb == 0.0) return x;
    for (int it = 0; it < max_iters; ++it) {
        const auto ap = s.multiply(p);
        double pap = 0.0;
        for (int k = 0; k < s.dimension; ++k) pap += p[k] * ap[k];
        if (pap <= 0.0)
            throw SolverError("cg_solve: matrix is not positive definite");
        const double alpha = rr / pap;
        double rr_new = 0.0;
        for (int k = 0; k < s.dimension; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
            rr_new += r[k] * r[k];
        }
        if (std::sqrt(rr_new / bb) < tol) return x;
        for (int k = 0; k < s.dimension; ++k) p[k] = r[k] + (rr_new / rr) * p[k];
        rr = rr_new;
    }
    throw SolverError("cg_solve: no convergence within max_iters");
}

}  // namespace meshbench
