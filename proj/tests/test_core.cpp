#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <random>

#include "meshbench/geometry.hpp"
#include "meshbench/grid.hpp"
#include "meshbench/io.hpp"

using namespace meshbench;

namespace {

const std::string kDataDir = MESHBENCH_DATA_DIR;

// Independent inside test for the signed_distance agreement check: plain
// crossing count against a rightward ray.
bool crossing_number_inside(const std::vector<Point>& v, Point q) {
    bool in = false;
    const std::size_t k = v.size();
    for (std::size_t i = 0; i < k; ++i) {
        const Point a = v[i], b = v[(i + 1) % k];
        if ((a.y <= q.y && b.y > q.y) || (b.y <= q.y && a.y > q.y)) {
            const double t = (q.y - a.y) / (b.y - a.y);
            if (a.x + t * (b.x - a.x) > q.x) in = !in;
        }
    }
    return in;
}

Polygon unit_square() {
    return Polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

StructuredGrid square_grid(int m) {
    const BoundarySpec b = distribute_boundary(unit_square(), {0, 1, 2, 3}, m, m);
    return transfinite_init(b);
}

}  // namespace

TEST_CASE("triangle signed area", "[geometry]") {
    REQUIRE(triangle_signed_area({0, 0}, {1, 0}, {0, 1}) == 0.5);
    REQUIRE(triangle_signed_area({0, 0}, {0, 1}, {1, 0}) == -0.5);
    REQUIRE(triangle_signed_area({0, 0}, {1, 1}, {2, 2}) == 0.0);

    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int k = 0; k < 200; ++k) {
        const Point a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
        const double s = triangle_signed_area(a, b, c);
        REQUIRE(triangle_signed_area(b, a, c) == Catch::Approx(-s).margin(1e-12));
        REQUIRE(triangle_signed_area(a, c, b) == Catch::Approx(-s).margin(1e-12));
        REQUIRE(triangle_signed_area(c, b, a) == Catch::Approx(-s).margin(1e-12));
    }
}

TEST_CASE("polygon signed area and fan decomposition", "[geometry]") {
    REQUIRE(polygon_signed_area(std::vector<Point>{{0, 0}, {1, 0}, {1, 1}, {0, 1}}) == 1.0);
    REQUIRE(polygon_signed_area(std::vector<Point>{{0, 0}, {0, 1}, {1, 1}, {1, 0}}) == -1.0);
    REQUIRE(polygon_signed_area(std::vector<Point>{{0, 0}, {1, 0}, {0, 1}}) == 0.5);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        // convex polygon from sorted angles on a randomized radius
        std::vector<Point> pts;
        const int k = 5 + trial % 7;
        for (int i = 0; i < k; ++i) {
            const double th = 2 * 3.14159265358979 * i / k;
            const double r = u(rng);
            pts.push_back({r * std::cos(th), r * std::sin(th)});
        }
        double fan = 0.0;
        for (int i = 1; i + 1 < k; ++i)
            fan += triangle_signed_area(pts[0], pts[i], pts[i + 1]);
        REQUIRE(fan == Catch::Approx(polygon_signed_area(pts)).margin(1e-12));
    }
}

TEST_CASE("polygon validation and orientation normalization", "[geometry]") {
    REQUIRE_THROWS_AS(Polygon({{0, 0}, {1, 0}}), InvalidInput);
    REQUIRE_THROWS_AS(Polygon({{0, 0}, {0, 0}, {1, 1}}), InvalidInput);
    // bowtie
    REQUIRE_THROWS_AS(Polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), InvalidInput);

    const Polygon cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
    REQUIRE(cw.reversed_on_load());
    REQUIRE(polygon_signed_area(cw) == 1.0);
    REQUIRE(cw.vertex(0).x == 0.0);
    // input index 1 = (0,1) must map to its new position
    const Point mapped = cw.vertex(cw.map_input_index(1));
    REQUIRE(mapped.x == 0.0);
    REQUIRE(mapped.y == 1.0);
}

TEST_CASE("signed distance", "[geometry]") {
    const Polygon sq = unit_square();
    REQUIRE(signed_distance(sq, {0.5, 0.5}) == -0.5);
    REQUIRE(signed_distance(sq, {2.0, 0.5}) == 1.0);
    REQUIRE(signed_distance(sq, {1.0, 0.5}) == 0.0);

    const Polygon plow = read_polygon(kDataDir + "/regions/plow.poly");
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-0.3, 1.3);
    int checked = 0;
    for (int k = 0; k < 500; ++k) {
        const Point q{u(rng), u(rng)};
        const double d = signed_distance(plow, q);
        if (d == 0.0) continue;  // on-boundary band is excluded from the property
        REQUIRE((d < 0.0) == crossing_number_inside(plow.vertices(), q));
        ++checked;
    }
    REQUIRE(checked > 400);
}

TEST_CASE("scale to unit", "[geometry]") {
    const Polygon big({{2, 2}, {4, 2}, {4, 4}, {2, 4}});
    const Polygon unit = scale_to_unit(big);
    REQUIRE(polygon_signed_area(unit) == Catch::Approx(1.0));
    REQUIRE(bounding_box(unit.vertices()).xmin == 0.0);
    REQUIRE(bounding_box(unit.vertices()).xmax == 1.0);

    const Polygon rect({{0, 0}, {2, 0}, {2, 1}, {0, 1}});
    const Polygon scaled = scale_to_unit(rect);
    const BoundingBox bb = bounding_box(scaled.vertices());
    REQUIRE(bb.xmax == Catch::Approx(1.0));
    REQUIRE(bb.ymax == Catch::Approx(0.5));

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int trial = 0; trial < 10; ++trial) {
        const double ox = u(rng), oy = u(rng), s = std::abs(u(rng)) + 0.5;
        const Polygon p({{ox, oy}, {ox + s, oy}, {ox + 1.3 * s, oy + s}, {ox, oy + 0.7 * s}});
        const Polygon once = scale_to_unit(p);
        const Polygon twice = scale_to_unit(once);
        for (std::size_t i = 0; i < once.size(); ++i) {
            REQUIRE(twice.vertex(i).x == Catch::Approx(once.vertex(i).x).margin(1e-12));
            REQUIRE(twice.vertex(i).y == Catch::Approx(once.vertex(i).y).margin(1e-12));
        }
    }
}

TEST_CASE("distribute boundary", "[grid]") {
    const Polygon sq = unit_square();
    const BoundarySpec b3 = distribute_boundary(sq, {0, 1, 2, 3}, 3, 3);
    REQUIRE(static_cast<int>(b3.nodes.size()) == 8);
    REQUIRE(b3.corner_indices == std::array<int, 4>{0, 2, 4, 6});
    REQUIRE(b3.nodes[1].x == Catch::Approx(0.5));  // bottom midpoint
    REQUIRE(b3.nodes[1].y == 0.0);
    REQUIRE(b3.nodes[3].x == 1.0);                 // right midpoint
    REQUIRE(b3.nodes[3].y == Catch::Approx(0.5));

    const BoundarySpec b35 = distribute_boundary(sq, {0, 1, 2, 3}, 3, 5);
    REQUIRE(static_cast<int>(b35.nodes.size()) == 12);
    for (int i = 0; i < 5; ++i) {
        REQUIRE(b35.nodes[i].x == Catch::Approx(0.25 * i));
        REQUIRE(b35.nodes[i].y == 0.0);
    }

    REQUIRE_THROWS_AS(distribute_boundary(sq, {0, 2, 1, 3}, 3, 3), InvalidInput);
    REQUIRE_THROWS_AS(distribute_boundary(sq, {0, 1, 2, 3}, 1, 3), InvalidInput);
}

TEST_CASE("transfinite interpolation", "[grid]") {
    const StructuredGrid g3 = square_grid(3);
    REQUIRE(g3.at(1, 1).x == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(g3.at(1, 1).y == Catch::Approx(0.5).margin(1e-15));

    const StructuredGrid g21 = square_grid(21);
    const CellTriangleAreas a21 = cell_triangle_areas(g21);
    REQUIRE(a21.alpha.size() == 1600);
    REQUIRE(a21.min() > 0.0);

    // strongly reentrant boundary: the Coons patch must tangle somewhere
    const Polygon cshape = read_polygon(kDataDir + "/regions/cshape.poly");
    const BoundarySpec bc = distribute_boundary(scale_to_unit(cshape), {0, 1, 6, 7}, 21, 21);
    const StructuredGrid gc = transfinite_init(bc);
    REQUIRE(cell_triangle_areas(gc).min() < 0.0);

    // affine boundary reproduces the affine image of the uniform grid
    const Polygon para({{0, 0}, {2, 0.5}, {2.6, 1.7}, {0.6, 1.2}});
    const BoundarySpec bp = distribute_boundary(para, {0, 1, 2, 3}, 9, 9);
    const StructuredGrid gp = transfinite_init(bp);
    const Point origin = para.vertex(0);
    const Point ex = para.vertex(1) - origin, ey = para.vertex(3) - origin;
    for (int j = 0; j < 9; ++j)
        for (int i = 0; i < 9; ++i) {
            const double s = i / 8.0, t = j / 8.0;
            const Point expect = origin + s * ex + t * ey;
            REQUIRE(gp.at(i, j).x == Catch::Approx(expect.x).margin(1e-12));
            REQUIRE(gp.at(i, j).y == Catch::Approx(expect.y).margin(1e-12));
        }
}

TEST_CASE("cell triangle areas", "[grid]") {
    StructuredGrid cell;
    cell.m = cell.n = 2;
    cell.points = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};  // j-major: (0,0),(1,0) then (0,1),(1,1)
    const CellTriangleAreas a = cell_triangle_areas(cell);
    REQUIRE(a.alpha.size() == 4);
    for (double v : a.alpha) REQUIRE(v == 0.5);

    // D dragged onto the diagonal AC: exactly one corner triangle collapses
    StructuredGrid onDiag = cell;
    onDiag.at(0, 1) = {0.25, 0.25};
    const auto ad = cell_triangle_areas(onDiag).alpha;
    REQUIRE(std::count_if(ad.begin(), ad.end(), [](double v) { return v <= 0.0; }) == 1);
    REQUIRE(ad[3] == 0.0);

    // D dragged across the diagonal: exactly one strictly negative area
    StructuredGrid crossed = cell;
    crossed.at(0, 1) = {0.4, 0.2};
    const auto ac = cell_triangle_areas(crossed).alpha;
    REQUIRE(std::count_if(ac.begin(), ac.end(), [](double v) { return v < 0.0; }) == 1);

    StructuredGrid degen = cell;
    degen.at(1, 1) = degen.at(1, 0);  // repeated corner
    const auto adg = cell_triangle_areas(degen).alpha;
    REQUIRE(std::count(adg.begin(), adg.end(), 0.0) >= 1);
}

TEST_CASE("convexity test", "[grid]") {
    const StructuredGrid g = square_grid(5);
    REQUIRE(is_convex(g, 0.0));

    StructuredGrid bad = g;
    bad.at(2, 2) = {0.9, 0.9};  // drag the center node across its cell diagonal
    REQUIRE_FALSE(is_convex(bad, 0.0));

    const double min_alpha = cell_triangle_areas(g).min();
    REQUIRE_FALSE(is_convex(g, min_alpha * 1.01));
    REQUIRE_THROWS_AS(is_convex(g, -1.0), InvalidInput);
}

TEST_CASE("node areas", "[grid]") {
    const StructuredGrid g3 = square_grid(3);
    const std::vector<double> a = node_areas(g3);
    REQUIRE(a[4] == Catch::Approx(0.25));      // center
    REQUIRE(a[0] == Catch::Approx(0.0625));    // corner
    double total = 0.0;
    for (double v : a) total += v;
    REQUIRE(total == Catch::Approx(1.0).margin(1e-12));

    StructuredGrid bad = square_grid(5);
    bad.at(2, 2) = {0.95, 0.95};
    REQUIRE_THROWS_AS(node_areas(bad), InvalidInput);

    // partition property on an irregular convex grid
    const Polygon plow = scale_to_unit(read_polygon(kDataDir + "/regions/plow.poly"));
    const BoundarySpec b = distribute_boundary(plow, {0, 2, 3, 5}, 9, 9);
    const StructuredGrid gp = transfinite_init(b);
    const double boundary_area = polygon_signed_area(b.nodes);
    double cells = 0.0;
    const auto alphas = cell_triangle_areas(gp).alpha;
    for (std::size_t t = 0; t < alphas.size(); t += 4)
        cells += 0.5 * (alphas[t] + alphas[t + 1] + alphas[t + 2] + alphas[t + 3]);
    REQUIRE(cells == Catch::Approx(boundary_area).margin(1e-10));
    if (cell_triangle_areas(gp).min() > 0) {
        double na = 0.0;
        for (double v : node_areas(gp)) na += v;
        REQUIRE(na == Catch::Approx(boundary_area).margin(1e-10));
    }
}

TEST_CASE("file round trips are bit exact", "[io]") {
    namespace fs = std::filesystem;
    const fs::path tmp = fs::temp_directory_path() / "meshbench_io_test";
    fs::create_directories(tmp);

    std::mt19937 rng(19);
    std::uniform_real_distribution<double> u(-1, 1);

    StructuredGrid g;
    g.m = 4;
    g.n = 3;
    for (int k = 0; k < 12; ++k) g.points.push_back({u(rng), u(rng)});
    const std::string gpath = (tmp / "g.grid").string();
    write_grid(g, gpath);
    const StructuredGrid g2 = read_grid(gpath);
    REQUIRE(g2.m == g.m);
    REQUIRE(g2.n == g.n);
    for (int k = 0; k < 12; ++k) {
        REQUIRE(g2.points[k].x == g.points[k].x);
        REQUIRE(g2.points[k].y == g.points[k].y);
    }

    TriMesh mesh;
    mesh.nodes = {{0, 0}, {1, 0}, {u(rng), 2 + u(rng)}, {0.5, 0.5}};
    mesh.boundary = {1, 1, 1, 0};
    mesh.triangles = {{0, 1, 3}, {1, 2, 3}, {2, 0, 3}};
    const std::string mpath = (tmp / "m.mesh").string();
    write_mesh(mesh, mpath);
    const TriMesh m2 = read_mesh(mpath);
    REQUIRE(m2.nodes[2].x == mesh.nodes[2].x);
    REQUIRE(m2.nodes[2].y == mesh.nodes[2].y);
    REQUIRE(m2.triangles == mesh.triangles);
    REQUIRE(m2.boundary == mesh.boundary);

    REQUIRE_THROWS_AS(read_grid((tmp / "missing.grid").string()), IoError);
    REQUIRE_THROWS_AS(read_polygon((tmp / "missing.poly").string()), IoError);
}

TEST_CASE("key=value config", "[io]") {
    namespace fs = std::filesystem;
    const fs::path tmp = fs::temp_directory_path() / "meshbench_io_test";
    fs::create_directories(tmp);
    const std::string path = (tmp / "c.cfg").string();
    {
        std::ofstream out(path);
        out << "# comment\nsizes = 9,17\nregion = a, p.poly, 1,2,3,4\n"
               "region = b, q.poly, 1,2,3,4  # trailing\n";
    }
    const KeyValueConfig cfg = read_key_value_config(path);
    REQUIRE(cfg.get("sizes") == "9,17");
    REQUIRE(cfg.get_all("region").size() == 2);
    REQUIRE(split(cfg.get_all("region")[1], ',')[0] == "b");
}

TEST_CASE("bundled regions load cleanly", "[io]") {
    for (const char* name : {"square", "dome", "plow", "swan", "cshape"}) {
        const Polygon p = read_polygon(kDataDir + "/regions/" + name + ".poly");
        REQUIRE(polygon_signed_area(p) > 0.0);
    }
}
