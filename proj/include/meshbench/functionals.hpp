#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "meshbench/grid.hpp"

namespace meshbench {

struct FunctionalConfig {
    double sigma = 0.5;            // weight between area and length terms
    double omega0 = 0.0;           // 0 = derive from the initial grid
    double omega_shrink = 0.5;
    int max_omega_updates = 20;
    double inner_tol = 1e-6;       // gradient inf-norm, scale-relative
    int inner_max_iters = 2000;
};

struct OptimizeResult {
    StructuredGrid grid;
    bool convex = false;
    int omega_updates_used = 0;
    double final_functional_value = 0.0;
    double final_gradient_norm = 0.0;
};

struct FunctionalEval {
    double value = 0.0;
    std::vector<double> gradient;  // interior coords, j-major, (x,y) interleaved
};

struct TraceRow {
    int iteration = 0;
    double f = 0.0;
    double grad_inf = 0.0;
    double min_alpha = 0.0;
    double omega = 0.0;
};

// Barrier applied per corner-triangle area. The 1/omega scaling makes the
// slope on negative areas grow as omega shrinks, which is what drives the
// grid into the convex set; without it the length term wins on reentrant
// boundaries no matter how small omega gets.
inline double area_barrier(double alpha, double omega) {
    return (std::sqrt(omega * omega + alpha * alpha) - alpha) / omega;
}

inline double area_barrier_slope(double alpha, double omega) {
    return (alpha / std::sqrt(omega * omega + alpha * alpha) - 1.0) / omega;
}

namespace detail {

inline std::size_t interior_offset(const StructuredGrid& g, int i, int j) {
    return 2 * (static_cast<std::size_t>(j - 1) * (g.n - 2) + (i - 1));
}

// Adds w * d(signed area(a,b,c))/d(vertex) to the interior gradient entries.
inline void add_area_gradient(const StructuredGrid& g, std::vector<double>& grad,
                              int ia, int ja, int ib, int jb, int ic, int jc,
                              double w) {
    const Point a = g.at(ia, ja), b = g.at(ib, jb), c = g.at(ic, jc);
    if (g.is_interior(ia, ja)) {
        const std::size_t o = interior_offset(g, ia, ja);
        grad[o] += w * 0.5 * (b.y - c.y);
        grad[o + 1] += w * 0.5 * (c.x - b.x);
    }
    if (g.is_interior(ib, jb)) {
        const std::size_t o = interior_offset(g, ib, jb);
        grad[o] += w * 0.5 * (c.y - a.y);
        grad[o + 1] += w * 0.5 * (a.x - c.x);
    }
    if (g.is_interior(ic, jc)) {
        const std::size_t o = interior_offset(g, ic, jc);
        grad[o] += w * 0.5 * (a.y - b.y);
        grad[o + 1] += w * 0.5 * (b.x - a.x);
    }
}

}  // namespace detail

/// Mean squared edge length over all horizontal and vertical grid edges,
/// with analytic partials w.r.t. the interior node coordinates.
inline FunctionalEval length_functional(const StructuredGrid& g) {
    FunctionalEval out;
    out.gradient.assign(2 * static_cast<std::size_t>(g.interior_count()), 0.0);
    const int edges = (g.n - 1) * g.m + (g.m - 1) * g.n;
    const double wedge = 1.0 / edges;
    auto accumulate = [&](int i0, int j0, int i1, int j1) {
        const Point d = g.at(i1, j1) - g.at(i0, j0);
        out.value += dot(d, d) * wedge;
        if (g.is_interior(i1, j1)) {
            const std::size_t o = detail::interior_offset(g, i1, j1);
            out.gradient[o] += 2.0 * d.x * wedge;
            out.gradient[o + 1] += 2.0 * d.y * wedge;
        }
        if (g.is_interior(i0, j0)) {
            const std::size_t o = detail::interior_offset(g, i0, j0);
            out.gradient[o] -= 2.0 * d.x * wedge;
            out.gradient[o + 1] -= 2.0 * d.y * wedge;
        }
    };
    for (int j = 0; j < g.m; ++j)
        for (int i = 0; i + 1 < g.n; ++i) accumulate(i, j, i + 1, j);
    for (int j = 0; j + 1 < g.m; ++j)
        for (int i = 0; i < g.n; ++i) accumulate(i, j, i, j + 1);
    return out;
}

/// Mean of the barrier over all 4(m-1)(n-1) corner-triangle areas. Defined
/// for non-convex grids; penalizing their negative areas is the point.
inline FunctionalEval area_functional(const StructuredGrid& g, double omega) {
    if (!(omega > 0.0)) throw InvalidInput("area_functional: omega must be > 0");
    FunctionalEval out;
    out.gradient.assign(2 * static_cast<std::size_t>(g.interior_count()), 0.0);
    const double wtri = 1.0 / (4.0 * g.cell_count());
    for (int j = 0; j + 1 < g.m; ++j) {
        for (int i = 0; i + 1 < g.n; ++i) {
            // corner triangles (A,B,D), (B,C,A), (C,D,B), (D,A,C)
            const int vi[4] = {i, i + 1, i + 1, i};
            const int vj[4] = {j, j, j + 1, j + 1};
            for (int t = 0; t < 4; ++t) {
                const int pa = t, pb = (t + 1) % 4, pd = (t + 3) % 4;
                const double alpha = triangle_signed_area(
                    g.at(vi[pa], vj[pa]), g.at(vi[pb], vj[pb]), g.at(vi[pd], vj[pd]));
                out.value += area_barrier(alpha, omega) * wtri;
                detail::add_area_gradient(g, out.gradient, vi[pa], vj[pa], vi[pb],
                                          vj[pb], vi[pd], vj[pd],
                                          area_barrier_slope(alpha, omega) * wtri);
            }
        }
    }
    return out;
}

/// sigma * S_omega + (1 - sigma) * L with summed gradients.
inline FunctionalEval combined_functional(const StructuredGrid& g, double omega,
                                          double sigma) {
    FunctionalEval s = area_functional(g, omega);
    FunctionalEval l = length_functional(g);
    FunctionalEval out;
    out.value = sigma * s.value + (1.0 - sigma) * l.value;
    out.gradient.resize(s.gradient.size());
    for (std::size_t k = 0; k < out.gradient.size(); ++k)
        out.gradient[k] = sigma * s.gradient[k] + (1.0 - sigma) * l.gradient[k];
    return out;
}

namespace detail {

inline double inf_norm(const std::vector<double>& v) {
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, std::abs(x));
    return mx;
}

inline double dot_vec(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

struct InnerResult {
    double f = 0.0;
    double grad_inf = 0.0;
    int iterations = 0;
};

// Limited-memory quasi-Newton descent with Armijo backtracking. Objective
// fills f and grad for a given x; x is updated in place.
template <class Objective>
InnerResult lbfgs_minimize(Objective&& obj, std::vector<double>& x,
                           double grad_tol, int max_iters,
                           const std::function<void(int, double, double)>& on_iter) {
    constexpr int kMemory = 8;
    constexpr double kArmijo = 1e-4;
    const std::size_t dim = x.size();

    std::vector<double> g(dim), x_new(dim), g_new(dim), d(dim);
    std::vector<std::vector<double>> s_hist, y_hist;
    std::vector<double> rho_hist;

    double f = 0.0;
    obj(x, f, g);
    if (!std::isfinite(f)) throw Error("optimizer: non-finite functional value");

    InnerResult res;
    int it = 0;
    for (; it < max_iters; ++it) {
        const double gnorm = inf_norm(g);
        if (on_iter) on_iter(it, f, gnorm);
        if (gnorm <= grad_tol) break;

        // Two-loop recursion for the search direction.
        d = g;
        const int hs = static_cast<int>(s_hist.size());
        std::vector<double> alpha_lb(hs);
        for (int k = hs - 1; k >= 0; --k) {
            alpha_lb[k] = rho_hist[k] * dot_vec(s_hist[k], d);
            for (std::size_t q = 0; q < dim; ++q) d[q] -= alpha_lb[k] * y_hist[k][q];
        }
        if (hs > 0) {
            const double gamma = dot_vec(s_hist[hs - 1], y_hist[hs - 1]) /
                                 dot_vec(y_hist[hs - 1], y_hist[hs - 1]);
            for (double& q : d) q *= gamma;
        }
        for (int k = 0; k < hs; ++k) {
            const double beta = rho_hist[k] * dot_vec(y_hist[k], d);
            for (std::size_t q = 0; q < dim; ++q)
                d[q] += (alpha_lb[k] - beta) * s_hist[k][q];
        }
        for (double& q : d) q = -q;

        double dg = dot_vec(d, g);
        if (!(dg < 0.0)) {  // not a descent direction; reset to steepest descent
            for (std::size_t q = 0; q < dim; ++q) d[q] = -g[q];
            dg = -dot_vec(g, g);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        double t = hs > 0 ? 1.0 : 1.0 / std::max(1.0, std::sqrt(-dg));
        double f_new = f;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t q = 0; q < dim; ++q) x_new[q] = x[q] + t * d[q];
            obj(x_new, f_new, g_new);
            if (!std::isfinite(f_new)) throw Error("optimizer: non-finite functional value");
            if (f_new <= f + kArmijo * t * dg) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // stalled: no decrease at the smallest step

        std::vector<double> s_vec(dim), y_vec(dim);
        for (std::size_t q = 0; q < dim; ++q) {
            s_vec[q] = x_new[q] - x[q];
            y_vec[q] = g_new[q] - g[q];
        }
        const double sy = dot_vec(s_vec, y_vec);
        if (sy > 1e-12 * std::sqrt(dot_vec(s_vec, s_vec) * dot_vec(y_vec, y_vec))) {
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > kMemory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }
        x.swap(x_new);
        g.swap(g_new);
        f = f_new;
    }
    res.f = f;
    res.grad_inf = inf_norm(g);
    res.iterations = it;
    return res;
}

inline void pack_interior(const StructuredGrid& g, std::vector<double>& x) {
    x.resize(2 * static_cast<std::size_t>(g.interior_count()));
    for (int j = 1; j + 1 < g.m; ++j)
        for (int i = 1; i + 1 < g.n; ++i) {
            const std::size_t o = interior_offset(g, i, j);
            x[o] = g.at(i, j).x;
            x[o + 1] = g.at(i, j).y;
        }
}

inline void unpack_interior(StructuredGrid& g, const std::vector<double>& x) {
    for (int j = 1; j + 1 < g.m; ++j)
        for (int i = 1; i + 1 < g.n; ++i) {
            const std::size_t o = interior_offset(g, i, j);
            g.at(i, j) = {x[o], x[o + 1]};
        }
}

}  // namespace detail

/// Minimizes the combined functional over the interior nodes, shrinking the
/// barrier scale between passes until the grid is convex. Boundary nodes are
/// never touched. `max_omega_updates = 0` performs no optimization and
/// reports the transfinite initial grid as-is.
inline OptimizeResult optimize_grid(const BoundarySpec& b, const FunctionalConfig& cfg,
                                    std::vector<TraceRow>* trace = nullptr) {
    if (!(cfg.sigma >= 0.0 && cfg.sigma <= 1.0))
        throw InvalidInput("optimize_grid: sigma must be in [0,1]");
    if (!(cfg.omega_shrink > 0.0 && cfg.omega_shrink < 1.0))
        throw InvalidInput("optimize_grid: omega_shrink must be in (0,1)");

    OptimizeResult res;
    res.grid = transfinite_init(b);
    StructuredGrid& g = res.grid;

    const double domain_area = std::abs(polygon_signed_area(b.nodes));
    const double eps = 1e-12 * domain_area / g.cell_count();

    double omega = cfg.omega0;
    if (!(omega > 0.0)) {
        const auto areas = cell_triangle_areas(g);
        double mean = 0.0;
        for (double a : areas.alpha) mean += a;
        mean /= static_cast<double>(areas.alpha.size());
        omega = std::max(mean, 1e-12 * domain_area);
    }

    std::vector<double> x;
    detail::pack_interior(g, x);

    for (int pass = 0; pass < cfg.max_omega_updates; ++pass) {
        auto objective = [&](const std::vector<double>& xs, double& f,
                             std::vector<double>& grad) {
            detail::unpack_interior(g, xs);
            FunctionalEval e = combined_functional(g, omega, cfg.sigma);
            f = e.value;
            grad = std::move(e.gradient);
        };
        // Scale-relative tolerance from the pass's starting value.
        detail::unpack_interior(g, x);
        const double f0 = combined_functional(g, omega, cfg.sigma).value;
        const double tol = cfg.inner_tol * (1.0 + std::abs(f0));

        auto on_iter = [&](int it, double f, double gnorm) {
            if (!trace) return;
            detail::unpack_interior(g, x);  // x tracks the accepted iterate lazily
            trace->push_back({it, f, gnorm, cell_triangle_areas(g).min(), omega});
        };
        auto inner = detail::lbfgs_minimize(objective, x, tol, cfg.inner_max_iters,
                                            trace ? std::function<void(int, double, double)>(on_iter)
                                                  : std::function<void(int, double, double)>());
        detail::unpack_interior(g, x);
        res.omega_updates_used = pass + 1;
        res.final_functional_value = inner.f;
        res.final_gradient_norm = inner.grad_inf;
        if (is_convex(g, eps)) {
            res.convex = true;
            break;
        }
        omega *= cfg.omega_shrink;
    }
    if (cfg.max_omega_updates == 0) {
        const FunctionalEval e = combined_functional(g, omega, cfg.sigma);
        res.final_functional_value = e.value;
        res.final_gradient_norm = detail::inf_norm(e.gradient);
        res.convex = is_convex(g, eps);
    } else if (!res.convex) {
        res.convex = is_convex(g, eps);
    }
    return res;
}

}  // namespace meshbench
