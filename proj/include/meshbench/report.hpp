#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "meshbench/fem.hpp"
#include "meshbench/functionals.hpp"
#include "meshbench/gfd.hpp"
#include "meshbench/io.hpp"
#include "meshbench/problems.hpp"
#include "meshbench/triangulation.hpp"

namespace meshbench {

/// Quadratic grid-function error sqrt(sum_i (u_i - U_i)^2 A_i).
inline double quadratic_error(const std::vector<double>& numeric,
                              const std::vector<double>& exact,
                              const std::vector<double>& areas) {
    if (numeric.size() != exact.size() || numeric.size() != areas.size())
        throw InvalidInput("quadratic_error: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
        if (areas[i] < 0.0) throw InvalidInput("quadratic_error: negative area weight");
        const double d = numeric[i] - exact[i];
        s += d * d * areas[i];
    }
    return std::sqrt(s);
}

/// Empirical convergence order log(E_i/E_j) / log(n_j/n_i) between two
/// consecutive grid resolutions (n_j > n_i).
inline double empirical_order(double e_i, double e_j, double n_i, double n_j) {
    if (!(e_i > 0.0 && e_j > 0.0 && n_i > 0.0 && n_j > 0.0))
        throw InvalidInput("empirical_order: inputs must be positive");
    return std::log(e_i / e_j) / std::log(n_j / n_i);
}

/// Element count convention for structured grids: twice the cell count
/// (each quadrilateral split along a diagonal).
inline long structured_element_count(int m, int n) {
    return 2L * (m - 1) * (n - 1);
}

inline long structured_unknown_count(int m, int n) {
    return static_cast<long>(m - 2) * (n - 2);
}

// ---------------------------------------------------------------------------
// Solve-and-measure helpers shared by the CLI and the experiment harness.

struct FdSolution {
    std::vector<double> interior_values;  // j-major over interior nodes
    int iterations = 0;
    bool used_direct_fallback = false;
};

/// Assembles and solves the generalized-difference system, trying
/// Gauss-Seidel first and falling back to the direct sparse solver when the
/// sweeps do not converge.
inline FdSolution fd_solve(const StructuredGrid& g, const Problem& prob,
                           double tol = 1e-10, long max_iters = 1000000) {
    const FdAssembly fd = assemble_fd_system(g, prob);
    FdSolution sol;
    GaussSeidelResult gs = gauss_seidel_solve(fd.system, tol, max_iters);
    sol.iterations = gs.iterations;
    if (gs.converged) {
        sol.interior_values = std::move(gs.x);
    } else {
        sol.interior_values = sparse_direct_solve(fd.system);
        sol.used_direct_fallback = true;
    }
    return sol;
}

/// FD error sampling: interior nodes weighted by the quarter-cell node areas.
inline double fd_quadratic_error(const StructuredGrid& g, const Problem& prob,
                                 const std::vector<double>& interior_values) {
    const std::vector<double> all_areas = node_areas(g);
    std::vector<double> exact, areas;
    exact.reserve(interior_values.size());
    areas.reserve(interior_values.size());
    for (int j = 1; j + 1 < g.m; ++j)
        for (int i = 1; i + 1 < g.n; ++i) {
            const Point p = g.at(i, j);
            exact.push_back(prob.u_exact(p.x, p.y));
            areas.push_back(all_areas[static_cast<std::size_t>(j) * g.n + i]);
        }
    return quadratic_error(interior_values, exact, areas);
}

/// Solves the FEM system and expands to nodal values over all mesh nodes
/// (boundary nodes carry the Dirichlet data).
inline std::vector<double> fem_solve(const TriMesh& mesh, const Problem& prob,
                                     bool use_cg = false) {
    const SparseSystem s = assemble_fem_system(mesh, prob);
    const std::vector<double> x = use_cg ? cg_solve(s) : sparse_direct_solve(s);
    std::vector<double> nodal(mesh.nodes.size(), 0.0);
    int k = 0;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        nodal[i] = mesh.boundary[i] ? prob.g(mesh.nodes[i].x, mesh.nodes[i].y) : x[k++];
    return nodal;
}

/// FEM error sampling: element centroids weighted by element areas.
inline double fem_quadratic_error(const TriMesh& mesh, const Problem& prob,
                                  const std::vector<double>& nodal) {
    std::vector<double> numeric, exact, areas;
    numeric.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        const Point a = mesh.nodes[t[0]], b = mesh.nodes[t[1]], c = mesh.nodes[t[2]];
        const Point centroid = (1.0 / 3.0) * (a + b + c);
        numeric.push_back((nodal[t[0]] + nodal[t[1]] + nodal[t[2]]) / 3.0);
        exact.push_back(prob.u_exact(centroid.x, centroid.y));
        areas.push_back(triangle_signed_area(a, b, c));
    }
    return quadratic_error(numeric, exact, areas);
}

// ---------------------------------------------------------------------------
// Experiment harness.

inline const char* kMethodNames[3] = {"structured-FD", "distmesh-a-FEM",
                                      "distmesh-b-FEM"};

struct ExperimentRecord {
    std::string region;
    int size = 0;
    std::string method;
    int problem = 0;
    long elements = 0;
    long unknowns = 0;
    double error = 0.0;
    double order = 0.0;
    bool has_order = false;
};

struct ExperimentFailure {
    std::string region;
    int size = 0;
    std::string method;
    std::string diagnostic;
};

struct RegionSpec {
    std::string name;
    std::string polygon_path;
    std::array<int, 4> corners{};  // 0-based indices into the file's ordering
};

struct ExperimentConfig {
    std::vector<RegionSpec> regions;
    std::vector<int> sizes{21, 41, 81};
    std::vector<int> problems{1, 2, 3};
    FunctionalConfig functional;
    DistMeshParams distmesh;  // h0 is derived per grid
    double fd_tol = 1e-10;
    long fd_max_iters = 1000000;
    bool fem_use_cg = false;
    std::string out_dir = ".";
    int threads = 1;
};

struct ExperimentOutput {
    std::vector<ExperimentRecord> records;
    std::vector<ExperimentFailure> failures;
    std::string csv_path;
    std::vector<std::string> svg_paths;
};

namespace detail {

struct CellResult {
    std::vector<ExperimentRecord> records;
    std::vector<ExperimentFailure> failures;
};

// One (region, size) pipeline cell: optimize the structured grid, solve FD
// for every problem, build both DistMesh variants, solve FEM for every
// problem on each.
inline CellResult run_cell(const ExperimentConfig& cfg, const RegionSpec& region,
                           int size) {
    CellResult out;
    auto fail = [&](const char* method, const std::string& what) {
        out.failures.push_back({region.name, size, method, what});
    };

    Polygon poly = scale_to_unit(read_polygon(region.polygon_path));
    const int m = size, n = size;

    OptimizeResult opt;
    try {
        const BoundarySpec b = distribute_boundary(poly, region.corners, m, n);
        opt = optimize_grid(b, cfg.functional);
        if (!opt.convex)
            throw Error("grid optimizer did not reach a convex grid");
    } catch (const std::exception& e) {
        for (const char* method : kMethodNames) fail(method, e.what());
        return out;
    }

    for (int pid : cfg.problems) {
        try {
            const Problem prob = builtin_problem(pid);
            const FdSolution sol = fd_solve(opt.grid, prob, cfg.fd_tol, cfg.fd_max_iters);
            ExperimentRecord rec;
            rec.region = region.name;
            rec.size = size;
            rec.method = kMethodNames[0];
            rec.problem = pid;
            rec.elements = structured_element_count(m, n);
            rec.unknowns = structured_unknown_count(m, n);
            rec.error = fd_quadratic_error(opt.grid, prob, sol.interior_values);
            out.records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            fail(kMethodNames[0], e.what());
        }
    }

    const double h0 = half_average_diagonal(opt.grid);
    for (int variant = 0; variant < 2; ++variant) {
        const char* method = kMethodNames[variant + 1];
        try {
            DistMeshParams params = cfg.distmesh;
            params.h0 = h0;
            std::vector<Point> seeds;
            if (variant == 1) {
                for (int j = 1; j + 1 < opt.grid.m; ++j)
                    for (int i = 1; i + 1 < opt.grid.n; ++i)
                        seeds.push_back(opt.grid.at(i, j));
            }
            const DistMeshResult dm =
                distmesh_generate(poly, params, variant == 1 ? &seeds : nullptr);
            for (int pid : cfg.problems) {
                try {
                    const Problem prob = builtin_problem(pid);
                    const std::vector<double> nodal =
                        fem_solve(dm.mesh, prob, cfg.fem_use_cg);
                    ExperimentRecord rec;
                    rec.region = region.name;
                    rec.size = size;
                    rec.method = method;
                    rec.problem = pid;
                    rec.elements = static_cast<long>(dm.mesh.triangles.size());
                    rec.unknowns = dm.mesh.interior_count();
                    rec.error = fem_quadratic_error(dm.mesh, prob, nodal);
                    out.records.push_back(std::move(rec));
                } catch (const std::exception& e) {
                    fail(method, e.what());
                }
            }
        } catch (const std::exception& e) {
            fail(method, e.what());
        }
    }
    return out;
}

inline std::string format_error(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

inline std::string format_order(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline void write_svg_bars(const std::string& path, int problem, int size,
                           const std::vector<ExperimentRecord>& records,
                           const std::vector<std::string>& region_order) {
    // Grouped bars (one group per region, one bar per method) on a log scale.
    std::vector<std::pair<std::string, std::array<double, 3>>> groups;
    for (const auto& rname : region_order) {
        std::array<double, 3> vals{0, 0, 0};
        bool any = false;
        for (const auto& r : records) {
            if (r.region != rname || r.problem != problem || r.size != size) continue;
            for (int k = 0; k < 3; ++k)
                if (r.method == kMethodNames[k]) {
                    vals[k] = r.error;
                    any = true;
                }
        }
        if (any) groups.push_back({rname, vals});
    }
    auto out = open_out(path);
    const int width = 160 + static_cast<int>(groups.size()) * 130;
    const int height = 420, top = 40, bottom = 360, left = 80;
    double lo = 1e300, hi = -1e300;
    for (const auto& g : groups)
        for (double v : g.second)
            if (v > 0) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    if (hi < lo) {
        lo = 1e-6;
        hi = 1.0;
    }
    const double llo = std::floor(std::log10(lo)), lhi = std::ceil(std::log10(hi));
    auto ycoord = [&](double v) {
        const double t = (std::log10(v) - llo) / std::max(lhi - llo, 1.0);
        return bottom - t * (bottom - top);
    };
    const char* colors[3] = {"#4878a8", "#d08a42", "#5aa75a"};
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
        << height << "'>\n";
    out << "<text x='" << width / 2 << "' y='20' text-anchor='middle' font-size='15'>"
        << "Quadratic error, problem " << problem << " (" << size
        << " points per side)</text>\n";
    for (int e = static_cast<int>(llo); e <= static_cast<int>(lhi); ++e) {
        const double y = ycoord(std::pow(10.0, e));
        out << "<line x1='" << left << "' y1='" << y << "' x2='" << width - 20
            << "' y2='" << y << "' stroke='#cccccc'/>\n";
        out << "<text x='" << left - 8 << "' y='" << y + 4
            << "' text-anchor='end' font-size='11'>1e" << e << "</text>\n";
    }
    for (std::size_t gidx = 0; gidx < groups.size(); ++gidx) {
        const double gx = left + 20 + static_cast<double>(gidx) * 130;
        for (int k = 0; k < 3; ++k) {
            const double v = groups[gidx].second[k];
            if (v <= 0) continue;
            const double y = ycoord(v);
            out << "<rect x='" << gx + k * 32 << "' y='" << y << "' width='26' height='"
                << bottom - y << "' fill='" << colors[k] << "'/>\n";
        }
        out << "<text x='" << gx + 45 << "' y='" << bottom + 18
            << "' text-anchor='middle' font-size='12'>" << groups[gidx].first
            << "</text>\n";
    }
    for (int k = 0; k < 3; ++k) {
        out << "<rect x='" << left + k * 150 << "' y='" << height - 28
            << "' width='14' height='14' fill='" << colors[k] << "'/>\n";
        out << "<text x='" << left + k * 150 + 20 << "' y='" << height - 16
            << "' font-size='12'>" << kMethodNames[k] << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace detail

inline int env_thread_cap() {
    const char* env = std::getenv("MESHBENCH_THREADS");
    if (!env) return 0;
    const int v = std::atoi(env);
    return v > 0 ? v : 0;
}

/// Runs the full (region x size x method x problem) protocol, writes
/// results.csv and one error bar chart per problem, and returns all records
/// plus per-record failures (a failed stage skips its records but the run
/// continues).
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);

    struct Cell {
        int region_idx;
        int size;
    };
    std::vector<Cell> cells;
    for (int r = 0; r < static_cast<int>(cfg.regions.size()); ++r)
        for (int s : cfg.sizes) cells.push_back({r, s});

    std::vector<detail::CellResult> results(cells.size());
    int threads = cfg.threads;
    if (const int cap = env_thread_cap()) threads = cap;
    threads = std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));

    if (threads == 1) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            results[c] = detail::run_cell(cfg, cfg.regions[cells[c].region_idx],
                                          cells[c].size);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= cells.size()) return;
                results[c] = detail::run_cell(cfg, cfg.regions[cells[c].region_idx],
                                              cells[c].size);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    ExperimentOutput out;
    for (auto& r : results) {
        out.records.insert(out.records.end(), r.records.begin(), r.records.end());
        out.failures.insert(out.failures.end(), r.failures.begin(), r.failures.end());
    }

    // Deterministic order: region (config order), method, problem, size.
    auto region_rank = [&](const std::string& name) {
        for (std::size_t i = 0; i < cfg.regions.size(); ++i)
            if (cfg.regions[i].name == name) return i;
        return cfg.regions.size();
    };
    auto method_rank = [](const std::string& m) {
        for (int i = 0; i < 3; ++i)
            if (m == kMethodNames[i]) return i;
        return 3;
    };
    std::sort(out.records.begin(), out.records.end(),
              [&](const ExperimentRecord& a, const ExperimentRecord& b) {
                  return std::tuple(region_rank(a.region), method_rank(a.method),
                                    a.problem, a.size) <
                         std::tuple(region_rank(b.region), method_rank(b.method),
                                    b.problem, b.size);
              });

    // Orders between consecutive configured sizes.
    for (std::size_t i = 1; i < out.records.size(); ++i) {
        auto& cur = out.records[i];
        const auto& prev = out.records[i - 1];
        if (prev.region == cur.region && prev.method == cur.method &&
            prev.problem == cur.problem && prev.size < cur.size &&
            prev.error > 0.0 && cur.error > 0.0) {
            cur.order = empirical_order(prev.error, cur.error, prev.size, cur.size);
            cur.has_order = true;
        }
    }

    out.csv_path = cfg.out_dir + "/results.csv";
    {
        auto csv = detail::open_out(out.csv_path);
        csv << "region,size,method,problem,elements,unknowns,error,order\n";
        for (const auto& r : out.records) {
            csv << r.region << "," << r.size << "," << r.method << "," << r.problem
                << "," << r.elements << "," << r.unknowns << ","
                << detail::format_error(r.error) << ","
                << (r.has_order ? detail::format_order(r.order) : "") << "\n";
        }
    }

    std::vector<std::string> region_order;
    for (const auto& r : cfg.regions) region_order.push_back(r.name);
    const int chart_size = cfg.sizes.empty() ? 0 : *std::max_element(cfg.sizes.begin(),
                                                                     cfg.sizes.end());
    for (int pid : cfg.problems) {
        const std::string path = cfg.out_dir + "/err_p" + std::to_string(pid) + ".svg";
        detail::write_svg_bars(path, pid, chart_size, out.records, region_order);
        out.svg_paths.push_back(path);
    }
    return out;
}

}  // namespace meshbench
