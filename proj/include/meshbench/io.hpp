#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "meshbench/functionals.hpp"
#include "meshbench/geometry.hpp"
#include "meshbench/grid.hpp"
#include "meshbench/triangulation.hpp"

namespace meshbench {

namespace detail {

// 17 significant digits round-trips doubles exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

}  // namespace detail

/// Polygon file: line 1 = vertex count, then "x y" per line. Orientation is
/// normalized on load; use Polygon::map_input_index for indices that refer
/// to the file ordering.
inline Polygon read_polygon(const std::string& path) {
    auto in = detail::open_in(path);
    std::size_t k = 0;
    if (!(in >> k) || k < 3) throw IoError("polygon file " + path + ": bad vertex count");
    std::vector<Point> pts(k);
    for (std::size_t i = 0; i < k; ++i)
        if (!(in >> pts[i].x >> pts[i].y))
            throw IoError("polygon file " + path + ": truncated at vertex " +
                          std::to_string(i));
    try {
        return Polygon(std::move(pts));
    } catch (const InvalidInput& e) {
        throw IoError("polygon file " + path + ": " + e.what());
    }
}

inline void write_polygon(const Polygon& poly, const std::string& path) {
    auto out = detail::open_out(path);
    out << poly.size() << "\n";
    for (Point p : poly.vertices())
        out << detail::fmt17(p.x) << " " << detail::fmt17(p.y) << "\n";
}

/// Grid file: line 1 = "m n", then m*n lines "x y" in j-major order.
inline void write_grid(const StructuredGrid& g, const std::string& path) {
    auto out = detail::open_out(path);
    out << g.m << " " << g.n << "\n";
    for (int j = 0; j < g.m; ++j)
        for (int i = 0; i < g.n; ++i)
            out << detail::fmt17(g.at(i, j).x) << " " << detail::fmt17(g.at(i, j).y)
                << "\n";
}

inline StructuredGrid read_grid(const std::string& path) {
    auto in = detail::open_in(path);
    StructuredGrid g;
    if (!(in >> g.m >> g.n) || g.m < 2 || g.n < 2)
        throw IoError("grid file " + path + ": bad header");
    g.points.resize(static_cast<std::size_t>(g.m) * g.n);
    for (int j = 0; j < g.m; ++j)
        for (int i = 0; i < g.n; ++i)
            if (!(in >> g.at(i, j).x >> g.at(i, j).y))
                throw IoError("grid file " + path + ": truncated");
    return g;
}

/// Mesh file: line 1 = "nv nt"; nv lines "x y b" (b=1 for boundary nodes);
/// nt lines "i1 i2 i3", 1-based, counterclockwise.
inline void write_mesh(const TriMesh& mesh, const std::string& path) {
    auto out = detail::open_out(path);
    out << mesh.nodes.size() << " " << mesh.triangles.size() << "\n";
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        out << detail::fmt17(mesh.nodes[i].x) << " " << detail::fmt17(mesh.nodes[i].y)
            << " " << (mesh.boundary[i] ? 1 : 0) << "\n";
    for (const auto& t : mesh.triangles)
        out << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

inline TriMesh read_mesh(const std::string& path) {
    auto in = detail::open_in(path);
    std::size_t nv = 0, nt = 0;
    if (!(in >> nv >> nt) || nv < 3) throw IoError("mesh file " + path + ": bad header");
    TriMesh mesh;
    mesh.nodes.resize(nv);
    mesh.boundary.resize(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        int b = 0;
        if (!(in >> mesh.nodes[i].x >> mesh.nodes[i].y >> b))
            throw IoError("mesh file " + path + ": truncated node list");
        mesh.boundary[i] = b ? 1 : 0;
    }
    mesh.triangles.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        int a = 0, b = 0, c = 0;
        if (!(in >> a >> b >> c)) throw IoError("mesh file " + path + ": truncated triangles");
        if (a < 1 || b < 1 || c < 1 || a > static_cast<int>(nv) || b > static_cast<int>(nv) ||
            c > static_cast<int>(nv))
            throw IoError("mesh file " + path + ": triangle index out of range");
        mesh.triangles[t] = {a - 1, b - 1, c - 1};
    }
    return mesh;
}

/// Nodal solution file: "x y value" per line.
inline void write_solution(const std::vector<Point>& pts, const std::vector<double>& u,
                           const std::string& path) {
    auto out = detail::open_out(path);
    for (std::size_t i = 0; i < pts.size(); ++i)
        out << detail::fmt17(pts[i].x) << " " << detail::fmt17(pts[i].y) << " "
            << detail::fmt17(u[i]) << "\n";
}

/// Optimizer convergence trace as CSV.
inline void write_trace(const std::vector<TraceRow>& rows, const std::string& path) {
    auto out = detail::open_out(path);
    out << "iteration,f,grad_inf,min_alpha,omega\n";
    for (const auto& r : rows)
        out << r.iteration << "," << detail::fmt17(r.f) << "," << detail::fmt17(r.grad_inf)
            << "," << detail::fmt17(r.min_alpha) << "," << detail::fmt17(r.omega) << "\n";
}

/// Flat key=value configuration with '#' comments; keys may repeat.
struct KeyValueConfig {
    std::vector<std::pair<std::string, std::string>> entries;

    std::string get(const std::string& key, const std::string& fallback = "") const {
        for (const auto& [k, v] : entries)
            if (k == key) return v;
        return fallback;
    }
    std::vector<std::string> get_all(const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries)
            if (k == key) out.push_back(v);
        return out;
    }
};

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline KeyValueConfig read_key_value_config(const std::string& path) {
    auto in = detail::open_in(path);
    KeyValueConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected key = value");
        cfg.entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

}  // namespace meshbench
