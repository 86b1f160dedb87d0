#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "meshbench/errors.hpp"

namespace meshbench {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double dist(Point a, Point b) { return norm(a - b); }

inline bool finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Signed area of triangle (a,b,c); positive iff counterclockwise.
inline double triangle_signed_area(Point a, Point b, Point c) {
    return 0.5 * cross(b - a, c - a);
}

// Points within this distance of an edge count as "on the boundary".
inline constexpr double kBoundaryEps = 1e-12;

namespace detail {

// Proper or improper intersection of closed segments [a,b] and [c,d].
inline bool segments_intersect(Point a, Point b, Point c, Point d) {
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return true;
    auto on = [](Point p, Point q, Point r) {  // r collinear with pq and inside bbox
        return cross(q - p, r - p) == 0.0 &&
               std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
               std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
    };
    return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

inline double point_segment_distance(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return dist(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return dist(p, a + t * ab);
}

}  // namespace detail

/// Closed polygonal Jordan curve. Construction validates the invariants and
/// normalizes orientation to positive (counterclockwise).
class Polygon {
public:
    /// @throws InvalidInput on <3 vertices, repeated consecutive vertices,
    ///         self-intersection or zero area. Reversed when input is clockwise.
    explicit Polygon(std::vector<Point> vertices) : verts_(std::move(vertices)) {
        validate_and_normalize();
    }

    const std::vector<Point>& vertices() const { return verts_; }
    std::size_t size() const { return verts_.size(); }
    Point vertex(std::size_t i) const { return verts_[i]; }

    /// True if loading reversed the input vertex order.
    bool reversed_on_load() const { return reversed_; }

    /// Maps an index of the original input ordering to this polygon's ordering.
    std::size_t map_input_index(std::size_t i) const {
        if (!reversed_) return i;
        return i == 0 ? 0 : verts_.size() - i;
    }

private:
    void validate_and_normalize();

    std::vector<Point> verts_;
    bool reversed_ = false;
};

/// Shoelace sum; sign encodes orientation.
inline double polygon_signed_area(const std::vector<Point>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& a = v[i];
        const Point& b = v[(i + 1) % v.size()];
        s += cross(a, b);
    }
    return 0.5 * s;
}

inline double polygon_signed_area(const Polygon& p) {
    return polygon_signed_area(p.vertices());
}

inline void Polygon::validate_and_normalize() {
    if (verts_.size() < 3)
        throw InvalidInput("polygon needs at least 3 vertices, got " +
                           std::to_string(verts_.size()));
    for (Point p : verts_)
        if (!finite(p)) throw InvalidInput("polygon vertex is not finite");
    const std::size_t k = verts_.size();
    for (std::size_t i = 0; i < k; ++i) {
        const Point a = verts_[i], b = verts_[(i + 1) % k];
        if (a.x == b.x && a.y == b.y)
            throw InvalidInput("polygon has two equal consecutive vertices at index " +
                               std::to_string(i));
    }
    // O(k^2) simplicity test; fine for the region sizes this tool targets.
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            if (j == i || (j + 1) % k == i || (i + 1) % k == j) continue;  // adjacent
            if (detail::segments_intersect(verts_[i], verts_[(i + 1) % k],
                                           verts_[j], verts_[(j + 1) % k]))
                throw InvalidInput("polygon is self-intersecting (edges " +
                                   std::to_string(i) + " and " + std::to_string(j) + ")");
        }
    }
    const double area = polygon_signed_area(verts_);
    if (area == 0.0) throw InvalidInput("polygon has zero area");
    if (area < 0.0) {
        std::reverse(verts_.begin() + 1, verts_.end());  // keep vertex 0 first
        reversed_ = true;
    }
}

/// Distance from q to the polygon boundary, negative iff q lies strictly
/// inside (even/odd crossing rule, half-open edges). |d| <= kBoundaryEps
/// collapses to exactly 0.
inline double signed_distance(const Polygon& poly, Point q) {
    const auto& v = poly.vertices();
    const std::size_t k = v.size();
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i)
        d = std::min(d, detail::point_segment_distance(q, v[i], v[(i + 1) % k]));
    if (d <= kBoundaryEps) return 0.0;
    // Crossing number with the half-open convention [y_a, y_b): each vertex
    // counted once, horizontal edges never.
    bool inside = false;
    for (std::size_t i = 0; i < k; ++i) {
        const Point a = v[i], b = v[(i + 1) % k];
        if ((a.y > q.y) != (b.y > q.y)) {
            const double xcross = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (q.x < xcross) inside = !inside;
        }
    }
    return inside ? -d : d;
}

struct BoundingBox {
    double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
};

inline BoundingBox bounding_box(const std::vector<Point>& pts) {
    BoundingBox b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
    for (Point p : pts) {
        b.xmin = std::min(b.xmin, p.x);
        b.ymin = std::min(b.ymin, p.y);
        b.xmax = std::max(b.xmax, p.x);
        b.ymax = std::max(b.ymax, p.y);
    }
    return b;
}

/// Uniform scale + translation so the bounding box fits [0,1]^2, touching it
/// along the longer axis. Aspect ratio is preserved.
inline Polygon scale_to_unit(const Polygon& poly) {
    const BoundingBox bb = bounding_box(poly.vertices());
    const double extent = std::max(bb.width(), bb.height());
    if (extent <= 0.0) throw InvalidInput("scale_to_unit: degenerate bounding box");
    std::vector<Point> out;
    out.reserve(poly.size());
    for (Point p : poly.vertices())
        out.push_back({(p.x - bb.xmin) / extent, (p.y - bb.ymin) / extent});
    return Polygon(std::move(out));
}

}  // namespace meshbench
