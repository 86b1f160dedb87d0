#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "meshbench/geometry.hpp"
#include "meshbench/grid.hpp"

namespace meshbench {

/// Triangle mesh with counterclockwise elements and per-node boundary flags.
struct TriMesh {
    std::vector<Point> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::uint8_t> boundary;

    int interior_count() const {
        int c = 0;
        for (std::uint8_t b : boundary) c += b ? 0 : 1;
        return c;
    }
};

struct DistMeshParams {
    double h0 = 0.0;                   // target edge length (required)
    double fscale = 1.2;               // rest-length inflation
    double dt = 0.2;                   // pseudo-time step
    double retri_threshold = 0.1;      // fraction of h0 triggering re-Delaunay
    double move_tol = 0.001;           // fraction of h0 ending the iteration
    int max_iters = 500;
};

struct DistMeshResult {
    TriMesh mesh;
    int iterations = 0;
    bool converged = false;
    int delaunay_violations = 0;       // w.r.t. the final node positions
    int low_quality_triangles = 0;     // 2*r_in/r_circ below 0.02
};

namespace detail {

inline constexpr double kPredicateTol = 1e-12;

// Orientation of c relative to segment a->b with a floating point filter:
// +1 left, -1 right, 0 within tolerance of collinear.
inline int orient_filtered(Point a, Point b, Point c) {
    const double det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    const double mag = std::abs((b.x - a.x) * (c.y - a.y)) +
                       std::abs((b.y - a.y) * (c.x - a.x));
    if (std::abs(det) <= kPredicateTol * mag) return 0;
    return det > 0 ? 1 : -1;
}

// > 0 iff d lies strictly inside the circumcircle of CCW triangle (a,b,c);
// near-cocircular configurations resolve deterministically to "not inside".
inline bool in_circumcircle(Point a, Point b, Point c, Point d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    const double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                       ad * (bdx * cdy - bdy * cdx);
    const double mag = std::abs(adx * bdy * cd) + std::abs(adx * bd * cdy) +
                       std::abs(ady * bdx * cd) + std::abs(ady * bd * cdx) +
                       std::abs(ad * bdx * cdy) + std::abs(ad * bdy * cdx);
    return det > kPredicateTol * mag;
}

struct Circumcircle {
    Point center;
    double radius = 0.0;
};

inline Circumcircle circumcircle(Point a, Point b, Point c) {
    const double d = 2.0 * cross(b - a, c - a);
    if (d == 0.0) return {a, std::numeric_limits<double>::infinity()};
    const double a2 = dot(a, a), b2 = dot(b, b), c2 = dot(c, c);
    Point ctr{(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
              (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
    return {ctr, dist(ctr, a)};
}

// Incremental Bowyer-Watson triangulation over a super-triangle.
class DelaunayBuilder {
public:
    explicit DelaunayBuilder(const std::vector<Point>& pts) : pts_(pts) {
        const BoundingBox bb = bounding_box(pts_);
        const double diag = std::hypot(bb.width(), bb.height());
        const double r = 1e4 * std::max(diag, 1e-3);
        const Point c{0.5 * (bb.xmin + bb.xmax), 0.5 * (bb.ymin + bb.ymax)};
        super_ = static_cast<int>(pts_.size());
        pts_.push_back({c.x, c.y + r});
        pts_.push_back({c.x - 0.866025403784438647 * r, c.y - 0.5 * r});
        pts_.push_back({c.x + 0.866025403784438647 * r, c.y - 0.5 * r});
        tris_.push_back({{super_, super_ + 1, super_ + 2}, {-1, -1, -1}, true});
        for (int i = 0; i < super_; ++i) insert(i);
    }

    /// Alive triangles not touching the super-triangle, CCW.
    std::vector<std::array<int, 3>> finalize() const {
        std::vector<std::array<int, 3>> out;
        for (const Tri& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] >= super_ || t.v[1] >= super_ || t.v[2] >= super_) continue;
            out.push_back(t.v);
        }
        return out;
    }

private:
    struct Tri {
        std::array<int, 3> v;    // CCW vertices
        std::array<int, 3> adj;  // adj[k] across edge (v[k], v[k+1])
        bool alive = true;
    };

    bool in_cavity(int t) const {
        return t < static_cast<int>(stamp_.size()) && stamp_[t] == version_;
    }

    void insert(int p) {
        const int start = locate(pts_[p]);
        // Grow the cavity of triangles whose circumcircle contains p.
        std::vector<int> cavity;
        std::vector<std::pair<int, int>> boundary;  // (triangle, edge)
        std::vector<int> stack{start};
        ++version_;
        stamp_.resize(tris_.size(), 0);
        stamp_[start] = version_;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            cavity.push_back(t);
            for (int k = 0; k < 3; ++k) {
                const int nb = tris_[t].adj[k];
                if (nb < 0) {
                    boundary.push_back({t, k});
                    continue;
                }
                if (in_cavity(nb)) continue;
                const Tri& nt = tris_[nb];
                if (in_circumcircle(pts_[nt.v[0]], pts_[nt.v[1]], pts_[nt.v[2]],
                                    pts_[p])) {
                    stamp_[nb] = version_;
                    stack.push_back(nb);
                } else {
                    boundary.push_back({t, k});
                }
            }
        }
        for (int t : cavity) tris_[t].alive = false;

        // One new triangle per cavity boundary edge, fanned around p.
        edge_map_.clear();
        int last = hint_;
        for (auto [t, k] : boundary) {
            const int a = tris_[t].v[k];
            const int b = tris_[t].v[(k + 1) % 3];
            const int outside = tris_[t].adj[k];
            const int id = static_cast<int>(tris_.size());
            tris_.push_back({{a, b, p}, {outside, -1, -1}, true});
            if (outside >= 0) {
                // The outside triangle holds this edge reversed as (b, a).
                Tri& o = tris_[outside];
                for (int q = 0; q < 3; ++q)
                    if (o.v[q] == b && o.v[(q + 1) % 3] == a) o.adj[q] = id;
            }
            last = id;
            link_edge(b, p, id, 1);
            link_edge(p, a, id, 2);
        }
        hint_ = last;
    }

    // Pairs up the p-incident edges of the new fan via a directed-edge map.
    void link_edge(int a, int b, int tri, int side) {
        const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) |
                                  static_cast<std::uint32_t>(std::max(a, b));
        auto it = edge_map_.find(key);
        if (it == edge_map_.end()) {
            edge_map_.emplace(key, std::pair<int, int>{tri, side});
        } else {
            tris_[tri].adj[side] = it->second.first;
            tris_[it->second.first].adj[it->second.second] = tri;
            edge_map_.erase(it);
        }
    }

    // Greedy walk toward p, falling back to a scan when the walk degenerates.
    int locate(Point p) {
        int cur = hint_;
        if (cur < 0 || cur >= static_cast<int>(tris_.size()) || !tris_[cur].alive)
            cur = last_alive();
        const int cap = static_cast<int>(tris_.size()) + 16;
        for (int step = 0; step < cap; ++step) {
            const Tri& t = tris_[cur];
            int next = -1;
            for (int k = 0; k < 3; ++k) {
                if (orient_filtered(pts_[t.v[k]], pts_[t.v[(k + 1) % 3]], p) < 0) {
                    next = t.adj[k];
                    break;
                }
            }
            if (next < 0) return cur;  // inside (or on an edge) of cur
            cur = next;
        }
        for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i) {
            const Tri& t = tris_[i];
            if (!t.alive) continue;
            bool inside = true;
            for (int k = 0; k < 3 && inside; ++k)
                inside = orient_filtered(pts_[t.v[k]], pts_[t.v[(k + 1) % 3]], p) >= 0;
            if (inside) return i;
        }
        throw Error("delaunay: point location failed");
    }

    int last_alive() const {
        for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
            if (tris_[i].alive) return i;
        return 0;
    }

    std::vector<Point> pts_;
    std::vector<Tri> tris_;
    std::vector<int> stamp_;
    int version_ = 0;
    std::unordered_map<std::uint64_t, std::pair<int, int>> edge_map_;
    int super_ = 0;
    int hint_ = 0;
};

inline void reject_duplicates(const std::vector<Point>& pts, double eps) {
    std::unordered_map<std::uint64_t, std::vector<int>> buckets;
    const double cell = std::max(eps, 1e-300);
    auto key = [&](double x, double y) {
        const auto qx = static_cast<std::int64_t>(std::floor(x / cell));
        const auto qy = static_cast<std::int64_t>(std::floor(y / cell));
        return (static_cast<std::uint64_t>(qx) << 32) ^ static_cast<std::uint64_t>(qy & 0xffffffff);
    };
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy) {
                auto it = buckets.find(key(pts[i].x + dx * cell, pts[i].y + dy * cell));
                if (it == buckets.end()) continue;
                for (int j : it->second)
                    if (dist(pts[i], pts[j]) <= eps)
                        throw InvalidInput("delaunay: duplicate points " +
                                           std::to_string(j) + " and " + std::to_string(i));
            }
        buckets[key(pts[i].x, pts[i].y)].push_back(i);
    }
}

}  // namespace detail

/// Bowyer-Watson Delaunay triangulation of the point set's convex hull.
/// Boundary flags mark hull nodes. Duplicate points (within 1e-12 of each
/// other, scaled by the bounding box) and all-collinear inputs are rejected.
inline TriMesh delaunay(const std::vector<Point>& points) {
    if (points.size() < 3)
        throw InvalidInput("delaunay: need at least 3 points");
    const BoundingBox bb = bounding_box(points);
    const double scale = std::max(1.0, std::hypot(bb.width(), bb.height()));
    detail::reject_duplicates(points, 1e-12 * scale);

    bool collinear = true;
    for (std::size_t k = 2; k < points.size() && collinear; ++k)
        collinear = detail::orient_filtered(points[0], points[1], points[k]) == 0;
    if (collinear) throw InvalidInput("delaunay: all points are collinear");

    detail::DelaunayBuilder builder(points);
    TriMesh mesh;
    mesh.nodes = points;
    mesh.triangles = builder.finalize();
    if (mesh.triangles.empty())
        throw InvalidInput("delaunay: all points are collinear");

    // Hull nodes = endpoints of edges used by exactly one triangle.
    std::unordered_map<std::uint64_t, int> edge_count;
    auto ekey = [](int a, int b) {
        return (static_cast<std::uint64_t>(std::min(a, b)) << 32) |
               static_cast<std::uint32_t>(std::max(a, b));
    };
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) ++edge_count[ekey(t[k], t[(k + 1) % 3])];
    mesh.boundary.assign(mesh.nodes.size(), 0);
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k)
            if (edge_count[ekey(t[k], t[(k + 1) % 3])] == 1) {
                mesh.boundary[t[k]] = 1;
                mesh.boundary[t[(k + 1) % 3]] = 1;
            }
    return mesh;
}

/// Half the mean diagonal length over all grid cells; the DistMesh bar
/// length rule for variant (a).
inline double half_average_diagonal(const StructuredGrid& g) {
    double sum = 0.0;
    for (int j = 0; j + 1 < g.m; ++j)
        for (int i = 0; i + 1 < g.n; ++i) {
            sum += dist(g.at(i, j), g.at(i + 1, j + 1));
            sum += dist(g.at(i + 1, j), g.at(i, j + 1));
        }
    return 0.5 * sum / (2.0 * g.cell_count());
}

/// Number of mesh triangles whose circumcircle strictly contains some other
/// mesh node (beyond a 1e-10 relative margin).
inline int delaunay_violation_count(const TriMesh& mesh) {
    if (mesh.triangles.empty()) return 0;
    // Bucket nodes so each circumdisk only scans nearby candidates.
    const BoundingBox bb = bounding_box(mesh.nodes);
    double mean_edge = 0.0;
    for (const auto& t : mesh.triangles)
        mean_edge += dist(mesh.nodes[t[0]], mesh.nodes[t[1]]);
    mean_edge /= static_cast<double>(mesh.triangles.size());
    const double cell = std::max(mean_edge, 1e-12);
    const int nx = std::max(1, static_cast<int>(bb.width() / cell) + 1);
    const int ny = std::max(1, static_cast<int>(bb.height() / cell) + 1);
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(nx) * ny);
    auto bucket_of = [&](Point p) {
        int ix = std::clamp(static_cast<int>((p.x - bb.xmin) / cell), 0, nx - 1);
        int iy = std::clamp(static_cast<int>((p.y - bb.ymin) / cell), 0, ny - 1);
        return std::pair<int, int>{ix, iy};
    };
    for (int i = 0; i < static_cast<int>(mesh.nodes.size()); ++i) {
        auto [ix, iy] = bucket_of(mesh.nodes[i]);
        buckets[static_cast<std::size_t>(iy) * nx + ix].push_back(i);
    }
    int violations = 0;
    for (const auto& t : mesh.triangles) {
        const Point a = mesh.nodes[t[0]], b = mesh.nodes[t[1]], c = mesh.nodes[t[2]];
        const auto cc = detail::circumcircle(a, b, c);
        if (!std::isfinite(cc.radius)) {
            ++violations;
            continue;
        }
        const double margin = cc.radius * (1.0 - 1e-10);
        const int ix0 = std::clamp(static_cast<int>((cc.center.x - cc.radius - bb.xmin) / cell), 0, nx - 1);
        const int ix1 = std::clamp(static_cast<int>((cc.center.x + cc.radius - bb.xmin) / cell), 0, nx - 1);
        const int iy0 = std::clamp(static_cast<int>((cc.center.y - cc.radius - bb.ymin) / cell), 0, ny - 1);
        const int iy1 = std::clamp(static_cast<int>((cc.center.y + cc.radius - bb.ymin) / cell), 0, ny - 1);
        bool bad = false;
        for (int iy = iy0; iy <= iy1 && !bad; ++iy)
            for (int ix = ix0; ix <= ix1 && !bad; ++ix)
                for (int q : buckets[static_cast<std::size_t>(iy) * nx + ix]) {
                    if (q == t[0] || q == t[1] || q == t[2]) continue;
                    if (dist(mesh.nodes[q], cc.center) < margin) {
                        bad = true;
                        break;
                    }
                }
        if (bad) ++violations;
    }
    return violations;
}

namespace detail {

inline Point nearest_boundary_point(const Polygon& poly, Point q) {
    const auto& v = poly.vertices();
    double best = std::numeric_limits<double>::infinity();
    Point bp = v[0];
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i], b = v[(i + 1) % v.size()];
        const Point ab = b - a;
        const double len2 = dot(ab, ab);
        const double t = len2 > 0 ? std::clamp(dot(q - a, ab) / len2, 0.0, 1.0) : 0.0;
        const Point cand = a + t * ab;
        const double d = dist(q, cand);
        if (d < best) {
            best = d;
            bp = cand;
        }
    }
    return bp;
}

inline Point distance_gradient(const Polygon& poly, Point p, double step) {
    const double gx = signed_distance(poly, {p.x + step, p.y}) -
                      signed_distance(poly, {p.x - step, p.y});
    const double gy = signed_distance(poly, {p.x, p.y + step}) -
                      signed_distance(poly, {p.x, p.y - step});
    Point g{gx / (2 * step), gy / (2 * step)};
    const double n = norm(g);
    return n > 0 ? (1.0 / n) * g : Point{0, 0};
}

}  // namespace detail

/// DistMesh-style force-equilibrium mesher. Fixed nodes are the polygon
/// boundary resampled at spacing ~h0 per edge (corners kept); interior nodes
/// come from `seed_points` when given, otherwise from a triangular lattice
/// of pitch h0 clipped to the interior. Bars repel with
/// F = max(fscale*h0 - len, 0); boundary nodes never move.
inline DistMeshResult distmesh_generate(const Polygon& poly, const DistMeshParams& params,
                                        const std::vector<Point>* seed_points = nullptr) {
    if (!(params.h0 > 0)) throw InvalidInput("distmesh: h0 must be positive");
    const double h0 = params.h0;

    std::vector<Point> nodes;
    const auto& verts = poly.vertices();
    for (std::size_t e = 0; e < verts.size(); ++e) {
        const Point a = verts[e], b = verts[(e + 1) % verts.size()];
        const int segs = std::max(1, static_cast<int>(std::ceil(dist(a, b) / h0)));
        nodes.push_back(a);  // corner kept exactly
        for (int s = 1; s < segs; ++s)
            nodes.push_back(a + (static_cast<double>(s) / segs) * (b - a));
    }
    const int fixed_count = static_cast<int>(nodes.size());

    if (seed_points) {
        for (Point p : *seed_points) {
            if (!(signed_distance(poly, p) < 0))
                throw InvalidInput("distmesh: seed point not strictly inside the region");
            nodes.push_back(p);
        }
    } else {
        // Triangular lattice of pitch h0; points closer than 0.45*h0 to the
        // boundary are dropped, otherwise they jam against the fixed nodes
        // and equilibrium leaves badly compressed edges.
        const BoundingBox bb = bounding_box(verts);
        const double row_height = h0 * 0.866025403784438647;
        int row = 0;
        for (double y = bb.ymin + 0.5 * row_height; y < bb.ymax; y += row_height, ++row) {
            const double x0 = bb.xmin + ((row % 2) ? 0.75 * h0 : 0.25 * h0);
            for (double x = x0; x < bb.xmax; x += h0)
                if (signed_distance(poly, {x, y}) < -0.45 * h0) nodes.push_back({x, y});
        }
    }
    if (static_cast<int>(nodes.size()) == fixed_count)
        throw InvalidInput("distmesh: empty interior (h0 too large for the region)");

    auto nudge_coincident = [&](std::vector<Point>& pts) {
        // Interior nodes sitting on top of another node would break the
        // triangulation's duplicate check; push them slightly inward.
        const double eps = 1e-9 * std::max(1.0, h0);
        std::unordered_map<std::uint64_t, std::vector<int>> cells;
        auto key = [&](double x, double y) {
            const auto qx = static_cast<std::int64_t>(std::floor(x / eps));
            const auto qy = static_cast<std::int64_t>(std::floor(y / eps));
            return (static_cast<std::uint64_t>(qx) << 32) ^
                   static_cast<std::uint64_t>(qy & 0xffffffff);
        };
        for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
            bool clash = false;
            for (int dx = -1; dx <= 1 && !clash; ++dx)
                for (int dy = -1; dy <= 1 && !clash; ++dy) {
                    auto it = cells.find(key(pts[i].x + dx * eps, pts[i].y + dy * eps));
                    if (it == cells.end()) continue;
                    for (int j : it->second)
                        if (dist(pts[i], pts[j]) <= eps) {
                            clash = true;
                            break;
                        }
                }
            if (clash && i >= fixed_count) {
                const Point g = detail::distance_gradient(poly, pts[i], 1e-6 * h0);
                pts[i] = pts[i] - (0.013 * h0) * g;
            }
            cells[key(pts[i].x, pts[i].y)].push_back(i);
        }
    };

    std::vector<std::array<int, 3>> tris;
    std::vector<std::pair<int, int>> edges;
    std::vector<Point> last_tri_pos;
    auto retriangulate = [&]() {
        nudge_coincident(nodes);
        TriMesh t = delaunay(nodes);
        tris.clear();
        for (const auto& tri : t.triangles) {
            const Point centroid = (1.0 / 3.0) * (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]);
            if (signed_distance(poly, centroid) <= -1e-12) tris.push_back(tri);
        }
        edges.clear();
        std::unordered_map<std::uint64_t, int> seen;
        for (const auto& tri : tris)
            for (int k = 0; k < 3; ++k) {
                const int a = std::min(tri[k], tri[(k + 1) % 3]);
                const int b = std::max(tri[k], tri[(k + 1) % 3]);
                const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) |
                                          static_cast<std::uint32_t>(b);
                if (seen.emplace(key, 1).second) edges.push_back({a, b});
            }
        last_tri_pos = nodes;
    };

    retriangulate();
    int iter = 0;
    bool converged = false;
    std::vector<Point> forces(nodes.size());
    for (; iter < params.max_iters; ++iter) {
        double drift = 0.0;
        for (std::size_t i = fixed_count; i < nodes.size(); ++i)
            drift = std::max(drift, dist(nodes[i], last_tri_pos[i]));
        if (drift > params.retri_threshold * h0) retriangulate();

        std::fill(forces.begin(), forces.end(), Point{0, 0});
        for (auto [a, b] : edges) {
            const Point d = nodes[a] - nodes[b];
            const double len = norm(d);
            const double f = std::max(params.fscale * h0 - len, 0.0);
            if (f > 0 && len > 0) {
                const Point dir = (f / len) * d;
                forces[a] = forces[a] + dir;
                forces[b] = forces[b] - dir;
            }
        }

        double max_move = 0.0;
        for (std::size_t i = fixed_count; i < nodes.size(); ++i) {
            const Point before = nodes[i];
            Point p = nodes[i] + params.dt * forces[i];
            double d = signed_distance(poly, p);
            for (int attempt = 0; attempt < 3 && d > 0; ++attempt) {
                p = p - d * detail::distance_gradient(poly, p, 1e-6 * h0);
                d = signed_distance(poly, p);
            }
            if (d > 0) p = detail::nearest_boundary_point(poly, p);
            nodes[i] = p;
            max_move = std::max(max_move, dist(before, p));
        }
        if (max_move < params.move_tol * h0) {
            converged = true;
            ++iter;
            break;
        }
    }

    DistMeshResult res;
    res.iterations = iter;
    res.converged = converged;
    res.mesh.nodes = nodes;
    res.mesh.boundary.assign(nodes.size(), 0);
    for (int i = 0; i < fixed_count; ++i) res.mesh.boundary[i] = 1;
    // Final filter against the final positions: keep inside, positive-area
    // triangles (connectivity is the one from the last re-Delaunay).
    for (const auto& tri : tris) {
        const Point a = nodes[tri[0]], b = nodes[tri[1]], c = nodes[tri[2]];
        const Point centroid = (1.0 / 3.0) * (a + b + c);
        if (signed_distance(poly, centroid) <= -1e-12 &&
            triangle_signed_area(a, b, c) > 0)
            res.mesh.triangles.push_back(tri);
    }
    res.delaunay_violations = delaunay_violation_count(res.mesh);
    for (const auto& tri : res.mesh.triangles) {
        const Point a = nodes[tri[0]], b = nodes[tri[1]], c = nodes[tri[2]];
        const double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
        const double s = 0.5 * (la + lb + lc);
        const double area = triangle_signed_area(a, b, c);
        const double r_in = area / s;
        const double r_circ = la * lb * lc / (4.0 * area);
        if (2.0 * r_in / r_circ < 0.02) ++res.low_quality_triangles;
    }
    return res;
}

}  // namespace meshbench
