#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "meshbench/geometry.hpp"

namespace meshbench {

/// Resampled boundary for an m x n structured grid: 2(m+n-2) nodes walking
/// the region boundary with positive orientation, starting at the first
/// corner. Sides hold n, m, n, m points (corners shared).
struct BoundarySpec {
    int m = 0;  // "vertical" point count (left/right sides)
    int n = 0;  // "horizontal" point count (bottom/top sides)
    std::vector<Point> nodes;
    std::array<int, 4> corner_indices{};  // positions of the corners in nodes

    int node_count() const { return 2 * (m + n - 2); }
};

/// Logically rectangular grid: n columns (index i), m rows (index j),
/// stored j-major. Boundary rows/columns stay fixed on the region boundary.
struct StructuredGrid {
    int m = 0;  // rows
    int n = 0;  // columns
    std::vector<Point> points;  // size m*n, index j*n + i

    Point& at(int i, int j) { return points[static_cast<std::size_t>(j) * n + i]; }
    Point at(int i, int j) const { return points[static_cast<std::size_t>(j) * n + i]; }
    bool is_interior(int i, int j) const {
        return i > 0 && i < n - 1 && j > 0 && j < m - 1;
    }
    int cell_count() const { return (m - 1) * (n - 1); }
    int interior_count() const { return (m - 2) * (n - 2); }
};

/// Four signed corner-triangle areas per cell, 4*(m-1)*(n-1) total, cells
/// j-major, corners in order (A,B,D), (B,C,A), (C,D,B), (D,A,C) for cell
/// corners A=(i,j), B=(i+1,j), C=(i+1,j+1), D=(i,j+1).
struct CellTriangleAreas {
    std::vector<double> alpha;

    double min() const {
        double mn = alpha.empty() ? 0.0 : alpha[0];
        for (double a : alpha) mn = std::min(mn, a);
        return mn;
    }
};

namespace detail {

// Walks the polyline from corner index a to corner index b (cyclic) and
// resamples it into `count` points by arc length. Endpoints are kept exactly.
inline std::vector<Point> resample_arc(const Polygon& p, int a, int b, int count) {
    std::vector<Point> line;
    const int k = static_cast<int>(p.size());
    line.push_back(p.vertex(a));
    for (int i = a; i != b;) {
        i = (i + 1) % k;
        line.push_back(p.vertex(i));
    }
    std::vector<double> cum(line.size(), 0.0);
    for (std::size_t s = 1; s < line.size(); ++s)
        cum[s] = cum[s - 1] + dist(line[s - 1], line[s]);
    const double total = cum.back();
    std::vector<Point> out(count);
    out[0] = line.front();
    out[count - 1] = line.back();
    std::size_t seg = 0;
    for (int t = 1; t < count - 1; ++t) {
        const double target = total * t / (count - 1);
        while (seg + 1 < cum.size() - 1 && cum[seg + 1] < target) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double u = len > 0.0 ? (target - cum[seg]) / len : 0.0;
        out[t] = line[seg] + u * (line[seg + 1] - line[seg]);
    }
    return out;
}

}  // namespace detail

/// Resamples the four boundary arcs between the given corner vertices by arc
/// length: bottom and top into n-1 segments, right and left into m-1.
/// Corner indices refer to polygon vertices and must be distinct and in
/// cyclic order.
inline BoundarySpec distribute_boundary(const Polygon& p, std::array<int, 4> corners,
                                        int m, int n) {
    if (m < 2 || n < 2)
        throw InvalidInput("distribute_boundary: m and n must be >= 2");
    const int k = static_cast<int>(p.size());
    for (int c : corners)
        if (c < 0 || c >= k)
            throw InvalidInput("distribute_boundary: corner index out of range");
    // Cyclic order: offsets from the first corner must be strictly increasing.
    const int o1 = ((corners[1] - corners[0]) % k + k) % k;
    const int o2 = ((corners[2] - corners[0]) % k + k) % k;
    const int o3 = ((corners[3] - corners[0]) % k + k) % k;
    if (o1 == 0 || o2 == 0 || o3 == 0 || !(o1 < o2 && o2 < o3))
        throw InvalidInput("distribute_boundary: corners not distinct or not in cyclic order");

    const std::array<int, 4> counts{n, m, n, m};
    BoundarySpec b;
    b.m = m;
    b.n = n;
    for (int side = 0; side < 4; ++side) {
        auto arc = detail::resample_arc(p, corners[side], corners[(side + 1) % 4],
                                        counts[side]);
        b.corner_indices[side] = static_cast<int>(b.nodes.size());
        b.nodes.insert(b.nodes.end(), arc.begin(), arc.end() - 1);  // drop shared corner
    }
    return b;
}

/// Bilinear transfinite (Coons) interpolation of the four sides. Boundary
/// nodes are copied exactly; the interior may come out non-convex.
inline StructuredGrid transfinite_init(const BoundarySpec& b) {
    const int m = b.m, n = b.n;
    if (static_cast<int>(b.nodes.size()) != b.node_count())
        throw InvalidInput("transfinite_init: boundary node count mismatch");
    StructuredGrid g;
    g.m = m;
    g.n = n;
    g.points.assign(static_cast<std::size_t>(m) * n, Point{});

    // Sides in boundary order: bottom c0->c1, right c1->c2, top c2->c3
    // (right to left), left c3->c0 (top to bottom).
    auto bnode = [&](int idx) { return b.nodes[idx % b.nodes.size()]; };
    std::vector<Point> bottom(n), top(n), left(m), right(m);
    for (int i = 0; i < n; ++i) {
        bottom[i] = bnode(b.corner_indices[0] + i);
        top[n - 1 - i] = bnode(b.corner_indices[2] + i);
    }
    for (int j = 0; j < m; ++j) {
        right[j] = bnode(b.corner_indices[1] + j);
        left[m - 1 - j] = bnode(b.corner_indices[3] + j);
    }

    const Point p00 = bottom[0], p10 = bottom[n - 1], p01 = top[0], p11 = top[n - 1];
    for (int j = 0; j < m; ++j) {
        const double t = static_cast<double>(j) / (m - 1);
        for (int i = 0; i < n; ++i) {
            const double s = static_cast<double>(i) / (n - 1);
            Point p = (1 - t) * bottom[i] + t * top[i] + (1 - s) * left[j] + s * right[j] -
                      ((1 - s) * (1 - t) * p00 + s * (1 - t) * p10 + (1 - s) * t * p01 +
                       s * t * p11);
            g.at(i, j) = p;
        }
    }
    for (int i = 0; i < n; ++i) {
        g.at(i, 0) = bottom[i];
        g.at(i, m - 1) = top[i];
    }
    for (int j = 0; j < m; ++j) {
        g.at(0, j) = left[j];
        g.at(n - 1, j) = right[j];
    }
    return g;
}

inline CellTriangleAreas cell_triangle_areas(const StructuredGrid& g) {
    CellTriangleAreas out;
    out.alpha.reserve(4 * static_cast<std::size_t>(g.cell_count()));
    for (int j = 0; j + 1 < g.m; ++j) {
        for (int i = 0; i + 1 < g.n; ++i) {
            const Point a = g.at(i, j), b = g.at(i + 1, j);
            const Point c = g.at(i + 1, j + 1), d = g.at(i, j + 1);
            out.alpha.push_back(triangle_signed_area(a, b, d));
            out.alpha.push_back(triangle_signed_area(b, c, a));
            out.alpha.push_back(triangle_signed_area(c, d, b));
            out.alpha.push_back(triangle_signed_area(d, a, c));
        }
    }
    return out;
}

/// A grid is convex iff every corner-triangle area exceeds eps.
inline bool is_convex(const StructuredGrid& g, double eps) {
    if (eps < 0) throw InvalidInput("is_convex: eps must be >= 0");
    for (double a : cell_triangle_areas(g).alpha)
        if (!(a > eps)) return false;
    return true;
}

/// Scale-relative default tolerance for the convexity test.
inline double default_convexity_eps(const StructuredGrid& g) {
    double total = 0.0;
    const auto areas = cell_triangle_areas(g);
    for (double a : areas.alpha) total += a;
    return 1e-12 * std::abs(total / 2.0) / g.cell_count();
}

/// Per-node area weights: a quarter of the summed adjacent cell areas.
/// Sums to the domain area over all nodes. Requires a convex grid.
inline std::vector<double> node_areas(const StructuredGrid& g) {
    const auto areas = cell_triangle_areas(g);
    if (areas.min() <= 0.0)
        throw InvalidInput("node_areas: grid is not convex");
    std::vector<double> out(static_cast<std::size_t>(g.m) * g.n, 0.0);
    for (int j = 0; j + 1 < g.m; ++j) {
        for (int i = 0; i + 1 < g.n; ++i) {
            const std::size_t cell = static_cast<std::size_t>(j) * (g.n - 1) + i;
            double cell_area = 0.0;
            for (int t = 0; t < 4; ++t) cell_area += areas.alpha[4 * cell + t];
            cell_area *= 0.5;
            const double quarter = 0.25 * cell_area;
            out[static_cast<std::size_t>(j) * g.n + i] += quarter;
            out[static_cast<std::size_t>(j) * g.n + i + 1] += quarter;
            out[static_cast<std::size_t>(j + 1) * g.n + i] += quarter;
            out[static_cast<std::size_t>(j + 1) * g.n + i + 1] += quarter;
        }
    }
    return out;
}

}  // namespace meshbench
