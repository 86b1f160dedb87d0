#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "meshbench/fem.hpp"
#include "meshbench/functionals.hpp"
#include "meshbench/gfd.hpp"
#include "meshbench/io.hpp"
#include "meshbench/problems.hpp"
#include "meshbench/report.hpp"

using namespace meshbench;

namespace {

const std::string kDataDir = MESHBENCH_DATA_DIR;

// -------------------------------------------------------------------------
// Independent residual oracle: nested fourth-order central differences in
// long double, applied to the analytic K and u only (never to the frozen f).

template <class F>
long double d4(const F& f, long double x, long double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

long double divergence_at_step(const Problem& prob, long double x, long double y,
                               long double h) {
    auto ux = [&](long double px, long double py) {
        return d4([&](long double t) { return (long double)prob.u_exact((double)t, (double)py); }, px, h);
    };
    auto uy = [&](long double px, long double py) {
        return d4([&](long double t) { return (long double)prob.u_exact((double)px, (double)t); }, py, h);
    };
    auto flux_x = [&](long double px, long double py) {
        const SymTensor2 k = prob.K((double)px, (double)py);
        return (long double)k.k11 * ux(px, py) + (long double)k.k12 * uy(px, py);
    };
    auto flux_y = [&](long double px, long double py) {
        const SymTensor2 k = prob.K((double)px, (double)py);
        return (long double)k.k12 * ux(px, py) + (long double)k.k22 * uy(px, py);
    };
    const long double div_x = d4([&](long double t) { return flux_x(t, y); }, x, h);
    const long double div_y = d4([&](long double t) { return flux_y(x, t); }, y, h);
    return div_x + div_y;
}

long double divergence_oracle(const Problem& prob, long double x, long double y) {
    // Richardson extrapolation of the fourth-order nested differences keeps
    // the double-precision evaluation noise below the 1e-8 target.
    const long double h = 6e-3L;
    const long double coarse = divergence_at_step(prob, x, y, h);
    const long double fine = divergence_at_step(prob, x, y, h / 2);
    return (16.0L * fine - coarse) / 15.0L;
}

// deterministic quasi-random points: Halton bases 2 and 3
double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

std::array<Point, 9> uniform_subgrid(double h) {
    std::array<Point, 9> pts;
    int k = 0;
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) pts[k++] = {di * h, dj * h};
    return pts;
}

// Weighted minimum-norm stencil via Eigen's SVD pseudoinverse: the dense
// oracle for the Cholesky normal-equations path inside stencil_coefficients.
std::array<double, 9> svd_stencil_oracle(const std::array<Point, 9>& pts,
                                         const std::array<double, 6>& mom) {
    Eigen::MatrixXd t(5, 8);
    Eigen::VectorXd wsqrt(8);
    int a = 0;
    for (int k = 0; k < 9; ++k) {
        if (k == 4) continue;
        const double xi = pts[k].x - pts[4].x, eta = pts[k].y - pts[4].y;
        t.col(a) << xi, eta, 0.5 * xi * xi, xi * eta, 0.5 * eta * eta;
        wsqrt[a] = 1.0 / std::sqrt(xi * xi + eta * eta);
        ++a;
    }
    Eigen::VectorXd c(5);
    c << mom[1], mom[2], mom[3] / 2, mom[4], mom[5] / 2;
    // substitute gamma = W^(1/2) z, minimize ||z|| s.t. (T W^(1/2)) z = c
    const Eigen::MatrixXd tw = t * wsqrt.asDiagonal();
    const Eigen::VectorXd z =
        tw.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(c);
    const Eigen::VectorXd gn = wsqrt.asDiagonal() * z;
    std::array<double, 9> out{};
    a = 0;
    double sum = 0.0;
    for (int k = 0; k < 9; ++k) {
        if (k == 4) continue;
        out[k] = gn[a];
        sum += gn[a];
        ++a;
    }
    out[4] = -sum;
    return out;
}

SparseSystem tridiag3() {
    SparseSystem s(3);
    s.add(0, 0, 2);  s.add(0, 1, -1);
    s.add(1, 0, -1); s.add(1, 1, 2);  s.add(1, 2, -1);
    s.add(2, 1, -1); s.add(2, 2, 2);
    s.rhs = {1, 0, 1};
    return s;
}

StructuredGrid convex_irregular_grid(int m) {
    const Polygon plow = scale_to_unit(read_polygon(kDataDir + "/regions/plow.poly"));
    const BoundarySpec b = distribute_boundary(plow, {0, 2, 3, 5}, m, m);
    const OptimizeResult res = optimize_grid(b, FunctionalConfig{});
    REQUIRE(res.convex);
    return res.grid;
}

Problem quadratic_problem(const SymTensor2& k) {
    // u = 1 + 2x - y + 0.5 x^2 + 0.3 xy + 0.7 y^2 with constant K
    Problem p;
    p.name = "quadratic";
    p.K = [k](double, double) { return k; };
    p.dK = [](double, double) { return TensorPartials{}; };
    p.u_exact = [](double x, double y) {
        return 1.0 + 2.0 * x - y + 0.5 * x * x + 0.3 * x * y + 0.7 * y * y;
    };
    p.f = [k](double, double) { return -(k.k11 * 1.0 + 2.0 * k.k12 * 0.3 + k.k22 * 1.4); };
    p.g = p.u_exact;
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// problems

TEST_CASE("built-in problem basics", "[problems]") {
    const Problem p1 = builtin_problem(1);
    REQUIRE(p1.f(0, 0) == Catch::Approx(-10.0).margin(1e-12));
    const SymTensor2 k1 = tensor_eval(p1, 0.3, 0.8);
    REQUIRE(k1.k11 == 1.0);
    REQUIRE(k1.k12 == 0.0);
    REQUIRE(k1.k22 == 1.0);

    const Problem p2 = builtin_problem(2);
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        REQUIRE(std::abs(p2.u_exact(t, 0.0)) < 1e-15);
        REQUIRE(std::abs(p2.u_exact(t, 1.0)) < 1e-14);
        REQUIRE(std::abs(p2.u_exact(0.0, t)) < 1e-15);
        REQUIRE(std::abs(p2.u_exact(1.0, t)) < 1e-14);
    }
    const SymTensor2 k2o = tensor_eval(p2, 0.0, 0.0);
    REQUIRE(k2o.k11 == Catch::Approx(1.0));
    REQUIRE(k2o.k12 == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(k2o.k22 == Catch::Approx(1.0));

    const Problem p3 = builtin_problem(3);
    const SymTensor2 k3 = tensor_eval(p3, 1.0, 1.0);
    REQUIRE(k3.k11 == Catch::Approx(5.0));
    REQUIRE(k3.k12 == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(k3.k22 == Catch::Approx(5.0));

    REQUIRE_THROWS_AS(builtin_problem(4), InvalidInput);
}

TEST_CASE("tensor spectra stay above one", "[problems]") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int id : {1, 2, 3}) {
        const Problem p = builtin_problem(id);
        for (int k = 0; k < 100; ++k) {
            const SymTensor2 t = tensor_eval(p, u(rng), u(rng));
            const double mean = 0.5 * (t.k11 + t.k22);
            const double dev = std::sqrt(0.25 * (t.k11 - t.k22) * (t.k11 - t.k22) +
                                         t.k12 * t.k12);
            REQUIRE(mean - dev >= 1.0 - 1e-12);
        }
    }
}

TEST_CASE("manufactured sources satisfy the divergence identity", "[problems][oracle]") {
    for (int id : {1, 2, 3}) {
        const Problem p = builtin_problem(id);
        long double worst = 0.0;
        for (int k = 1; k <= 1000; ++k) {
            const double x = halton(k, 2), y = halton(k, 3);
            const long double residual =
                (long double)p.f(x, y) + divergence_oracle(p, x, y);
            worst = std::max(worst, std::abs(residual));
        }
        INFO("problem " << id << " worst residual " << (double)worst);
        REQUIRE((double)worst < 1e-8);
    }
}

// ---------------------------------------------------------------------------
// gfd

TEST_CASE("operator moments", "[gfd]") {
    const auto m1 = operator_moments(SymTensor2{1, 0, 1}, TensorPartials{});
    REQUIRE(m1 == std::array<double, 6>{0, 0, 0, -2, 0, -2});
    const auto m3 = operator_moments(SymTensor2{3, 0, 3}, TensorPartials{});
    REQUIRE(m3 == std::array<double, 6>{0, 0, 0, -6, 0, -6});

    // frozen values from the symbolic derivation at (1/2, 1/2), problem 2
    const Problem p2 = builtin_problem(2);
    const auto m2 = operator_moments(p2.K(0.5, 0.5), p2.dK(0.5, 0.5));
    REQUIRE(m2[0] == 0.0);
    REQUIRE(m2[1] == Catch::Approx(-1.5).margin(1e-14));
    REQUIRE(m2[2] == Catch::Approx(-2.2071067811865475).margin(1e-14));
    REQUIRE(m2[3] == Catch::Approx(-3.5).margin(1e-14));
    REQUIRE(m2[4] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(m2[5] == Catch::Approx(-3.5).margin(1e-14));

    REQUIRE_THROWS_AS(operator_moments(SymTensor2{-1, 0, 1}, TensorPartials{}),
                      InvalidInput);
}

TEST_CASE("stencil on the uniform subgrid", "[gfd]") {
    const Stencil st = stencil_coefficients(uniform_subgrid(1.0), {0, 0, 0, -2, 0, -2});
    for (int k = 0; k < 9; ++k) {
        const double expect = k == 4 ? 8.0 / 3.0 : -1.0 / 3.0;
        REQUIRE(st.gamma[k] == Catch::Approx(expect).margin(1e-12));
    }
    double applied = 0.0, sum = 0.0, sum_x = 0.0;
    for (int k = 0; k < 9; ++k) {
        applied += st.gamma[k] * (st.points[k].x * st.points[k].x +
                                  st.points[k].y * st.points[k].y);
        sum += st.gamma[k];
        sum_x += st.gamma[k] * st.points[k].x;
    }
    REQUIRE(applied == Catch::Approx(-4.0).margin(1e-12));
    REQUIRE(sum == Catch::Approx(0.0).margin(1e-13));
    REQUIRE(sum_x == Catch::Approx(0.0).margin(1e-13));
}

TEST_CASE("stencil matches the SVD pseudoinverse oracle", "[gfd][oracle]") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> noise(-0.2, 0.2), mrand(-3, 3);
    for (int trial = 0; trial < 25; ++trial) {
        std::array<Point, 9> pts = uniform_subgrid(0.05);
        for (int k = 0; k < 9; ++k)
            if (k != 4) pts[k] = pts[k] + Point{0.05 * noise(rng), 0.05 * noise(rng)};
        const std::array<double, 6> mom{0,        mrand(rng), mrand(rng),
                                        -2.0 + noise(rng), mrand(rng), -2.0 + noise(rng)};
        const Stencil st = stencil_coefficients(pts, mom);
        const auto oracle = svd_stencil_oracle(pts, mom);
        double scale = 0.0;
        for (double g : oracle) scale = std::max(scale, std::abs(g));
        for (int k = 0; k < 9; ++k)
            REQUIRE(st.gamma[k] == Catch::Approx(oracle[k]).margin(1e-8 * scale));
    }
}

TEST_CASE("stencil reproduces the operator on quadratics", "[gfd]") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> noise(-0.25, 0.25), coef(-2, 2);
    for (int trial = 0; trial < 20; ++trial) {
        std::array<Point, 9> pts = uniform_subgrid(0.1);
        for (int k = 0; k < 9; ++k)
            pts[k] = pts[k] + Point{0.1 * noise(rng), 0.1 * noise(rng)};
        const SymTensor2 k{2.0 + noise(rng), 0.4, 1.5};
        const auto mom = operator_moments(k, TensorPartials{});
        const Stencil st = stencil_coefficients(pts, mom);
        const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng),
                     e = coef(rng), f0 = coef(rng);
        auto poly = [&](Point p) {
            const double x = p.x - pts[4].x, y = p.y - pts[4].y;
            return a + b * x + c * y + d * x * x + e * x * y + f0 * y * y;
        };
        double applied = 0.0;
        for (int q = 0; q < 9; ++q) applied += st.gamma[q] * poly(pts[q]);
        const double exact = -(k.k11 * 2 * d + 2 * k.k12 * e + k.k22 * 2 * f0);
        REQUIRE(applied == Catch::Approx(exact).margin(1e-7 * (1 + std::abs(exact))));
    }
}

TEST_CASE("degenerate stencil is rejected", "[gfd]") {
    std::array<Point, 9> collinear;
    for (int k = 0; k < 9; ++k) collinear[k] = {k * 0.1 - 0.4, 2.0 * (k * 0.1 - 0.4)};
    REQUIRE_THROWS_AS(stencil_coefficients(collinear, {0, 0, 0, -2, 0, -2}),
                      StencilError);
}

TEST_CASE("fd assembly dimensions and accounting", "[gfd]") {
    const Polygon sq({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const Problem p1 = builtin_problem(1);
    for (int size : {21, 41}) {
        const StructuredGrid g =
            transfinite_init(distribute_boundary(sq, {0, 1, 2, 3}, size, size));
        const FdAssembly fd = assemble_fd_system(g, p1);
        REQUIRE(fd.system.dimension == (size - 2) * (size - 2));
        REQUIRE(static_cast<int>(fd.stencils.size()) == fd.system.dimension);
        for (const auto& row : fd.system.rows)
            REQUIRE(row.size() <= 9);
    }

    // every assembled stencil keeps the zero-sum consistency row
    const StructuredGrid g9 = convex_irregular_grid(9);
    const FdAssembly fd9 = assemble_fd_system(g9, builtin_problem(2));
    for (const Stencil& st : fd9.stencils) {
        double sum = 0.0, scale = 0.0;
        for (double v : st.gamma) {
            sum += v;
            scale = std::max(scale, std::abs(v));
        }
        REQUIRE(std::abs(sum) < 1e-9 * scale);
    }

    StructuredGrid tangled = transfinite_init(distribute_boundary(sq, {0, 1, 2, 3}, 5, 5));
    tangled.at(2, 2) = {0.95, 0.95};
    REQUIRE_THROWS_AS(assemble_fd_system(tangled, p1), InvalidInput);
}

TEST_CASE("single-unknown assembly matches the hand relation", "[gfd][oracle]") {
    // 3x3 grid on the unit square, K = I: the only unknown must satisfy
    // U = mean(8 boundary neighbors) + (3/8) h^2 f(center), since the
    // weighted stencil is the uniform nine-point one.
    const Polygon sq({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const StructuredGrid g = transfinite_init(distribute_boundary(sq, {0, 1, 2, 3}, 3, 3));
    const Problem p1 = builtin_problem(1);
    const FdAssembly fd = assemble_fd_system(g, p1);
    REQUIRE(fd.system.dimension == 1);
    const std::vector<double> x = sparse_direct_solve(fd.system);

    double neighbor_mean = 0.0;
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
            if (di == 0 && dj == 0) continue;
            const Point p = g.at(1 + di, 1 + dj);
            neighbor_mean += p1.g(p.x, p.y) / 8.0;
        }
    const double h = 0.5;
    const double expect = neighbor_mean + 3.0 / 8.0 * h * h * p1.f(0.5, 0.5);
    REQUIRE(x[0] == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("fd solution is exact for quadratics with constant K", "[gfd]") {
    const SymTensor2 k{2.0, 0.5, 1.0};
    const Problem quad = quadratic_problem(k);
    const StructuredGrid g = convex_irregular_grid(11);
    const FdAssembly fd = assemble_fd_system(g, quad);
    const GaussSeidelResult gs = gauss_seidel_solve(fd.system, 1e-12, 1000000);
    const std::vector<double>& x = gs.converged ? gs.x : sparse_direct_solve(fd.system);
    int idx = 0;
    double worst = 0.0;
    for (int j = 1; j + 1 < g.m; ++j)
        for (int i = 1; i + 1 < g.n; ++i) {
            const Point p = g.at(i, j);
            worst = std::max(worst, std::abs(x[idx++] - quad.u_exact(p.x, p.y)));
        }
    REQUIRE(worst < 1e-7);
}

TEST_CASE("fd system is linear in the source", "[gfd]") {
    const StructuredGrid g = convex_irregular_grid(9);
    const Problem base = builtin_problem(1);
    Problem shifted = base;
    shifted.f = [](double x, double y) { return 3.0 + x - y; };
    shifted.g = [](double, double) { return 0.0; };
    Problem combined = base;
    combined.f = [&](double x, double y) { return base.f(x, y) + shifted.f(x, y); };
    combined.g = [&](double x, double y) { return base.g(x, y) + shifted.g(x, y); };

    const auto s1 = assemble_fd_system(g, base);
    const auto s2 = assemble_fd_system(g, shifted);
    const auto s12 = assemble_fd_system(g, combined);
    const auto x1 = sparse_direct_solve(s1.system);
    const auto x2 = sparse_direct_solve(s2.system);
    const auto x12 = sparse_direct_solve(s12.system);
    for (int r = 0; r < s1.system.dimension; ++r)
        REQUIRE(x12[r] == Catch::Approx(x1[r] + x2[r]).margin(2e-10 * (1 + std::abs(x12[r]))));
}

TEST_CASE("gauss-seidel solver", "[gfd][solver]") {
    SparseSystem ident(3);
    for (int r = 0; r < 3; ++r) ident.add(r, r, 1.0);
    ident.rhs = {3, -1, 7};
    const GaussSeidelResult gi = gauss_seidel_solve(ident);
    REQUIRE(gi.converged);
    REQUIRE(gi.iterations == 1);
    REQUIRE(gi.x == std::vector<double>{3, -1, 7});

    const GaussSeidelResult gt = gauss_seidel_solve(tridiag3(), 1e-12);
    REQUIRE(gt.converged);
    for (double v : gt.x) REQUIRE(v == Catch::Approx(1.0).margin(1e-8));

    SparseSystem zero(2);
    zero.add(0, 0, 2.0);
    zero.add(1, 1, 2.0);
    const GaussSeidelResult gz = gauss_seidel_solve(zero);
    REQUIRE(gz.converged);
    REQUIRE(gz.iterations == 1);
    REQUIRE(gz.x == std::vector<double>{0, 0});

    SparseSystem nodiag(2);
    nodiag.add(0, 1, 1.0);
    nodiag.add(1, 0, 1.0);
    REQUIRE_THROWS_AS(gauss_seidel_solve(nodiag), SolverError);

    SparseSystem diverge(2);
    diverge.add(0, 0, 1.0); diverge.add(0, 1, 2.0);
    diverge.add(1, 0, 2.0); diverge.add(1, 1, 1.0);
    diverge.rhs = {1, 1};
    const GaussSeidelResult gd = gauss_seidel_solve(diverge, 1e-10, 60);
    REQUIRE_FALSE(gd.converged);
}

TEST_CASE("gauss-seidel agrees with the direct solver", "[gfd][solver]") {
    const StructuredGrid g = convex_irregular_grid(11);
    const FdAssembly fd = assemble_fd_system(g, builtin_problem(3));
    const GaussSeidelResult gs = gauss_seidel_solve(fd.system, 1e-12, 1000000);
    REQUIRE(gs.converged);
    const std::vector<double> lu = sparse_direct_solve(fd.system);
    for (int r = 0; r < fd.system.dimension; ++r)
        REQUIRE(std::abs(gs.x[r] - lu[r]) < 1e-8);
}

// ---------------------------------------------------------------------------
// fem

TEST_CASE("pyramid gradients", "[fem]") {
    const std::array<Point, 3> unit{{{0, 0}, {1, 0}, {0, 1}}};
    const auto g = pyramid_gradient(unit);
    REQUIRE(g[0].x == Catch::Approx(-1.0));
    REQUIRE(g[0].y == Catch::Approx(-1.0));
    REQUIRE(g[1].x == Catch::Approx(1.0));
    REQUIRE(g[1].y == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(g[2].x == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(g[2].y == Catch::Approx(1.0));

    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int trial = 0; trial < 20; ++trial) {
        std::array<Point, 3> tri{{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}}};
        if (triangle_signed_area(tri[0], tri[1], tri[2]) <= 1e-3) continue;
        const auto gr = pyramid_gradient(tri);
        REQUIRE(std::abs(gr[0].x + gr[1].x + gr[2].x) < 1e-12);
        REQUIRE(std::abs(gr[0].y + gr[1].y + gr[2].y) < 1e-12);
        const Point shift{u(rng), u(rng)};
        std::array<Point, 3> moved = tri;
        for (auto& p : moved) p = p + shift;
        const auto gm = pyramid_gradient(moved);
        for (int k = 0; k < 3; ++k) {
            REQUIRE(gm[k].x == Catch::Approx(gr[k].x).margin(1e-10));
            REQUIRE(gm[k].y == Catch::Approx(gr[k].y).margin(1e-10));
        }
    }
    REQUIRE_THROWS_AS(pyramid_gradient({Point{0, 0}, Point{1, 1}, Point{2, 2}}),
                      InvalidInput);
}

TEST_CASE("element stiffness", "[fem]") {
    const std::array<Point, 3> unit{{{0, 0}, {1, 0}, {0, 1}}};
    const Problem p1 = builtin_problem(1);
    const ElementMatrix e = element_stiffness(unit, p1);
    const double expect[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            REQUIRE(e.k_local[i][j] == Catch::Approx(expect[i][j]).margin(1e-14));

    Problem f3 = p1;
    f3.f = [](double, double) { return 3.0; };
    const ElementMatrix e3 = element_stiffness(unit, f3);
    for (int i = 0; i < 3; ++i) REQUIRE(e3.f_local[i] == Catch::Approx(0.5));

    const Problem p3 = builtin_problem(3);
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int trial = 0; trial < 10; ++trial) {
        std::array<Point, 3> tri{{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}}};
        if (triangle_signed_area(tri[0], tri[1], tri[2]) <= 1e-3) continue;
        const ElementMatrix et = element_stiffness(tri, p3);
        for (int i = 0; i < 3; ++i) {
            double row = 0.0;
            for (int j = 0; j < 3; ++j) {
                row += et.k_local[i][j];
                REQUIRE(et.k_local[i][j] == Catch::Approx(et.k_local[j][i]).margin(1e-12));
            }
            REQUIRE(std::abs(row) < 1e-12);
        }
    }
}

TEST_CASE("fem assembly and linear exactness", "[fem]") {
    // unit square, four corner nodes plus the center: dimension 1
    TriMesh star;
    star.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    star.boundary = {1, 1, 1, 1, 0};
    star.triangles = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
    const SparseSystem s = assemble_fem_system(star, builtin_problem(1));
    REQUIRE(s.dimension == 1);

    Problem linear = builtin_problem(1);
    linear.u_exact = [](double x, double y) { return 1.0 + 2.0 * x - 3.0 * y; };
    linear.f = [](double, double) { return 0.0; };
    linear.g = linear.u_exact;
    const DistMeshParams params{.h0 = 0.22};
    const Polygon sq({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const DistMeshResult dm = distmesh_generate(sq, params);
    const std::vector<double> nodal = fem_solve(dm.mesh, linear);
    for (std::size_t i = 0; i < dm.mesh.nodes.size(); ++i) {
        const Point p = dm.mesh.nodes[i];
        REQUIRE(std::abs(nodal[i] - linear.u_exact(p.x, p.y)) < 1e-10);
    }

    TriMesh no_interior;
    no_interior.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    no_interior.boundary = {1, 1, 1, 1};
    no_interior.triangles = {{0, 1, 2}, {0, 2, 3}};
    REQUIRE_THROWS_AS(assemble_fem_system(no_interior, builtin_problem(1)), InvalidInput);
}

TEST_CASE("direct sparse solver", "[fem][solver]") {
    SparseSystem ident(4);
    for (int r = 0; r < 4; ++r) ident.add(r, r, 1.0);
    ident.rhs = {1, 2, 3, 4};
    REQUIRE(sparse_direct_solve(ident) == std::vector<double>{1, 2, 3, 4});

    const std::vector<double> x = sparse_direct_solve(tridiag3());
    for (double v : x) REQUIRE(v == Catch::Approx(1.0).margin(1e-12));

    SparseSystem singular(2);
    singular.add(0, 0, 1.0); singular.add(0, 1, 1.0);
    singular.add(1, 0, 1.0); singular.add(1, 1, 1.0);
    singular.rhs = {1, 2};
    REQUIRE_THROWS_AS(sparse_direct_solve(singular), SolverError);
}

TEST_CASE("assembled fem matrix is SPD", "[fem]") {
    const Polygon sq({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const DistMeshParams params{.h0 = 0.15};
    const DistMeshResult dm = distmesh_generate(sq, params);
    const SparseSystem s = assemble_fem_system(dm.mesh, builtin_problem(2));

    // exact symmetry of the assembled entries
    for (int r = 0; r < s.dimension; ++r)
        for (const auto& e : s.rows[r]) {
            bool found = false;
            for (const auto& e2 : s.rows[e.col])
                if (e2.col == r) {
                    REQUIRE(e2.value == e.value);
                    found = true;
                }
            REQUIRE(found);
        }

    // positive definiteness via a converging conjugate-direction solve
    SparseSystem rnd = s;
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(-1, 1);
    for (auto& v : rnd.rhs) v = u(rng);
    const std::vector<double> x = cg_solve(rnd, 1e-10);
    REQUIRE(rnd.relative_residual(x) < 1e-9);
}
