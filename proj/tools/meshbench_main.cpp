// meshbench command line: variational grid generation, DistMesh-style
// triangulation, FD/FEM diffusion solves, and the comparison harness.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "meshbench/meshbench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNonConvex = 4;
constexpr int kExitSolver = 5;

struct UsageError : meshbench::Error {
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

std::array<int, 4> parse_corners(const std::string& spec, const meshbench::Polygon& poly) {
    const auto parts = meshbench::split(spec, ',');
    if (parts.size() != 4)
        throw UsageError("--corners expects four comma-separated 1-based indices");
    std::array<int, 4> corners{};
    for (int k = 0; k < 4; ++k) {
        const int idx = std::stoi(parts[k]);
        if (idx < 1 || idx > static_cast<int>(poly.size()))
            throw UsageError("corner index " + parts[k] + " out of range 1.." +
                             std::to_string(poly.size()));
        corners[k] = static_cast<int>(poly.map_input_index(idx - 1));
    }
    return corners;
}

int cmd_generate_grid(const std::string& polygon_path, const std::string& corner_spec,
                      int m, int n, const meshbench::FunctionalConfig& fcfg,
                      const std::string& out_path, const std::string& trace_path,
                      bool scale) {
    using namespace meshbench;
    Polygon poly = read_polygon(polygon_path);
    if (scale) poly = scale_to_unit(poly);
    const auto corners = parse_corners(corner_spec, poly);
    const BoundarySpec b = distribute_boundary(poly, corners, m, n);

    std::vector<TraceRow> trace;
    const OptimizeResult res = optimize_grid(b, fcfg, trace_path.empty() ? nullptr : &trace);
    write_grid(res.grid, out_path);
    if (!trace_path.empty()) write_trace(trace, trace_path);

    const double min_alpha = cell_triangle_areas(res.grid).min();
    std::printf("grid %dx%d  convex=%s  min_alpha=%.6e  F=%.9e  |grad|=%.3e  omega_updates=%d\n",
                m, n, res.convex ? "yes" : "no", min_alpha, res.final_functional_value,
                res.final_gradient_norm, res.omega_updates_used);
    std::printf("wrote %s\n", out_path.c_str());
    return res.convex ? kExitOk : kExitNonConvex;
}

int cmd_triangulate(const std::string& polygon_path, double h0,
                    const std::string& from_grid, const std::string& seed_grid,
                    meshbench::DistMeshParams params, const std::string& out_path,
                    bool scale) {
    using namespace meshbench;
    Polygon poly = read_polygon(polygon_path);
    if (scale) poly = scale_to_unit(poly);

    if (!from_grid.empty())
        params.h0 = half_average_diagonal(read_grid(from_grid));
    else
        params.h0 = h0;
    if (!(params.h0 > 0))
        throw UsageError("either --h0 or --from-grid is required");

    std::vector<Point> seeds;
    const std::vector<Point>* seed_ptr = nullptr;
    if (!seed_grid.empty()) {
        const StructuredGrid g = read_grid(seed_grid);
        for (int j = 1; j + 1 < g.m; ++j)
            for (int i = 1; i + 1 < g.n; ++i) seeds.push_back(g.at(i, j));
        seed_ptr = &seeds;
    }

    const DistMeshResult res = distmesh_generate(poly, params, seed_ptr);
    write_mesh(res.mesh, out_path);
    std::printf("mesh: %zu triangles, %d interior nodes of %zu, h0=%.6g\n",
                res.mesh.triangles.size(), res.mesh.interior_count(),
                res.mesh.nodes.size(), params.h0);
    std::printf("iterations=%d converged=%s delaunay_violations=%d low_quality=%d\n",
                res.iterations, res.converged ? "yes" : "no", res.delaunay_violations,
                res.low_quality_triangles);
    if (!res.converged)
        std::printf("warning: force equilibrium not reached; best mesh written\n");
    std::printf("wrote %s\n", out_path.c_str());
    return kExitOk;
}

void maybe_dump_system(const meshbench::SparseSystem& s, const std::string& path) {
    if (path.empty()) return;
    auto out = meshbench::detail::open_out(path);
    out << s.dump_coordinate();
    std::printf("wrote %s\n", path.c_str());
}

int cmd_solve(const std::string& grid_path, const std::string& mesh_path, int problem_id,
              const std::string& method, double tol, long max_iters, bool use_cg,
              const std::string& out_path, const std::string& dump_path) {
    using namespace meshbench;
    const Problem prob = builtin_problem(problem_id);

    if (method == "fd") {
        if (grid_path.empty() || !mesh_path.empty())
            throw UsageError("--method fd requires --grid (not --mesh)");
        const StructuredGrid g = read_grid(grid_path);
        maybe_dump_system(assemble_fd_system(g, prob).system, dump_path);
        const FdSolution sol = fd_solve(g, prob, tol, max_iters);
        const double err = fd_quadratic_error(g, prob, sol.interior_values);

        std::vector<double> nodal(g.points.size());
        int k = 0;
        for (int j = 0; j < g.m; ++j)
            for (int i = 0; i < g.n; ++i) {
                const Point p = g.at(i, j);
                nodal[static_cast<std::size_t>(j) * g.n + i] =
                    g.is_interior(i, j) ? sol.interior_values[k++] : prob.g(p.x, p.y);
            }
        if (!out_path.empty()) write_solution(g.points, nodal, out_path);
        std::printf("fd: unknowns=%d iterations=%d%s quadratic_error=%.9e\n",
                    g.interior_count(), sol.iterations,
                    sol.used_direct_fallback ? " (direct fallback)" : "", err);
        if (!out_path.empty()) std::printf("wrote %s\n", out_path.c_str());
        return kExitOk;
    }
    if (method == "fem") {
        if (mesh_path.empty() || !grid_path.empty())
            throw UsageError("--method fem requires --mesh (not --grid)");
        const TriMesh mesh = read_mesh(mesh_path);
        const std::vector<double> nodal = fem_solve(mesh, prob, use_cg);
        const double err = fem_quadratic_error(mesh, prob, nodal);
        if (!out_path.empty()) write_solution(mesh.nodes, nodal, out_path);
        std::printf("fem: unknowns=%d iterations=%d quadratic_error=%.9e\n",
                    mesh.interior_count(), 1, err);
        if (!out_path.empty()) std::printf("wrote %s\n", out_path.c_str());
        return kExitOk;
    }
    throw UsageError("--method must be fd or fem");
}

int cmd_compare(const std::string& config_path, const std::string& out_override,
                int threads) {
    using namespace meshbench;
    const KeyValueConfig kv = read_key_value_config(config_path);
    const std::filesystem::path base = std::filesystem::path(config_path).parent_path();

    ExperimentConfig cfg;
    cfg.threads = threads;
    if (const auto s = kv.get("sizes"); !s.empty()) {
        cfg.sizes.clear();
        for (const auto& tok : split(s, ',')) cfg.sizes.push_back(std::stoi(tok));
        for (std::size_t i = 1; i < cfg.sizes.size(); ++i)
            if (cfg.sizes[i] <= cfg.sizes[i - 1] || cfg.sizes[i - 1] < 3)
                throw UsageError("sizes must be >= 3 and strictly increasing");
        if (!cfg.sizes.empty() && cfg.sizes[0] < 3)
            throw UsageError("sizes must be >= 3 and strictly increasing");
    }
    if (const auto s = kv.get("problems"); !s.empty()) {
        cfg.problems.clear();
        for (const auto& tok : split(s, ',')) cfg.problems.push_back(std::stoi(tok));
    }
    if (const auto s = kv.get("sigma"); !s.empty()) cfg.functional.sigma = std::stod(s);
    if (const auto s = kv.get("fd_tol"); !s.empty()) cfg.fd_tol = std::stod(s);
    cfg.out_dir = !out_override.empty() ? out_override
                                        : kv.get("out", (base / "results").string());

    for (const auto& spec : kv.get_all("region")) {
        const auto parts = split(spec, ',');
        if (parts.size() != 6)
            throw UsageError("region entry needs: name, polygon-path, c1, c2, c3, c4");
        RegionSpec region;
        region.name = parts[0];
        region.polygon_path = (base / parts[1]).string();
        const Polygon poly = read_polygon(region.polygon_path);
        for (int k = 0; k < 4; ++k) {
            const int idx = std::stoi(parts[2 + k]);
            if (idx < 1 || idx > static_cast<int>(poly.size()))
                throw UsageError("region " + region.name + ": corner index out of range");
            region.corners[k] = static_cast<int>(poly.map_input_index(idx - 1));
        }
        cfg.regions.push_back(region);
    }
    if (cfg.regions.empty()) throw UsageError("config lists no regions");

    const ExperimentOutput out = run_experiment(cfg);
    std::printf("records=%zu failures=%zu\n", out.records.size(), out.failures.size());
    for (const auto& f : out.failures)
        std::fprintf(stderr, "failure: %s size=%d %s: %s\n", f.region.c_str(), f.size,
                     f.method.c_str(), f.diagnostic.c_str());
    std::printf("wrote %s\n", out.csv_path.c_str());
    for (const auto& p : out.svg_paths) std::printf("wrote %s\n", p.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"meshbench: convex structured grids, triangulations and "
                 "diffusion-solver comparisons on irregular polygonal regions"};
    app.require_subcommand(1);

    // generate-grid
    auto* gen = app.add_subcommand("generate-grid",
                                   "minimize the area/length functional into a convex grid");
    std::string gg_polygon, gg_corners, gg_out = "grid.grid", gg_trace;
    int gg_m = 21, gg_n = 21;
    bool gg_noscale = false;
    meshbench::FunctionalConfig fcfg;
    gen->add_option("--polygon", gg_polygon, "polygon file")->required();
    gen->add_option("--corners", gg_corners, "four 1-based vertex indices i1,i2,i3,i4")
        ->required();
    gen->add_option("--m", gg_m, "vertical point count");
    gen->add_option("--n", gg_n, "horizontal point count");
    gen->add_option("--sigma", fcfg.sigma, "area/length weight (default 0.5)");
    gen->add_option("--omega0", fcfg.omega0, "initial barrier scale (default: from grid)");
    gen->add_option("--omega-shrink", fcfg.omega_shrink, "barrier shrink factor");
    gen->add_option("--max-omega-updates", fcfg.max_omega_updates, "outer pass limit");
    gen->add_option("--inner-tol", fcfg.inner_tol, "inner gradient tolerance");
    gen->add_option("--inner-max-iters", fcfg.inner_max_iters, "inner iteration cap");
    gen->add_option("--out", gg_out, "output grid file");
    gen->add_option("--trace", gg_trace, "write convergence trace CSV");
    gen->add_flag("--no-scale", gg_noscale, "skip scaling the region into [0,1]^2");

    // triangulate
    auto* tri = app.add_subcommand("triangulate", "DistMesh-style triangulation");
    std::string tr_polygon, tr_from_grid, tr_seed_grid, tr_out = "mesh.mesh";
    double tr_h0 = 0.0;
    bool tr_noscale = false;
    meshbench::DistMeshParams dparams;
    tri->add_option("--polygon", tr_polygon, "polygon file")->required();
    tri->add_option("--h0", tr_h0, "target edge length");
    tri->add_option("--from-grid", tr_from_grid,
                    "derive h0 as half the mean cell diagonal of this grid");
    tri->add_option("--seed-grid", tr_seed_grid,
                    "seed interior nodes from this grid's inner nodes");
    tri->add_option("--fscale", dparams.fscale, "bar rest-length inflation");
    tri->add_option("--dt", dparams.dt, "pseudo-time step");
    tri->add_option("--max-iters", dparams.max_iters, "iteration cap");
    tri->add_option("--out", tr_out, "output mesh file");
    tri->add_flag("--no-scale", tr_noscale, "skip scaling the region into [0,1]^2");

    // solve
    auto* slv = app.add_subcommand("solve", "solve a diffusion problem on a grid or mesh");
    std::string sv_grid, sv_mesh, sv_method, sv_out;
    int sv_problem = 1;
    double sv_tol = 1e-10;
    long sv_max_iters = 1000000;
    bool sv_use_cg = false;
    slv->add_option("--grid", sv_grid, "structured grid file (for --method fd)");
    slv->add_option("--mesh", sv_mesh, "triangle mesh file (for --method fem)");
    slv->add_option("--problem", sv_problem, "built-in problem 1|2|3")->required();
    slv->add_option("--method", sv_method, "fd | fem")->required();
    slv->add_option("--tol", sv_tol, "iterative solver tolerance");
    slv->add_option("--max-iters", sv_max_iters, "iterative solver sweep cap");
    slv->add_flag("--use-cg", sv_use_cg, "use conjugate gradients for FEM");
    slv->add_option("--out", sv_out, "write nodal solution file");

    // compare
    auto* cmp = app.add_subcommand("compare", "run the full comparison protocol");
    std::string cp_config, cp_out;
    int cp_threads = 1;
    cmp->add_option("--config", cp_config, "key=value config listing regions")->required();
    cmp->add_option("--out", cp_out, "output directory (overrides config)");
    cmp->add_option("--threads", cp_threads, "parallel pipeline cells (MESHBENCH_THREADS overrides)");

    try {
        app.parse(argc, argv);
        if (gen->parsed())
            return cmd_generate_grid(gg_polygon, gg_corners, gg_m, gg_n, fcfg, gg_out,
                                     gg_trace, !gg_noscale);
        if (tri->parsed())
            return cmd_triangulate(tr_polygon, tr_h0, tr_from_grid, tr_seed_grid, dparams,
                                   tr_out, !tr_noscale);
        if (slv->parsed())
            return cmd_solve(sv_grid, sv_mesh, sv_problem, sv_method, sv_tol,
                             sv_max_iters, sv_use_cg, sv_out);
        if (cmp->parsed()) return cmd_compare(cp_config, cp_out, cp_threads);
        return kExitUsage;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const meshbench::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const meshbench::SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    } catch (const meshbench::InvalidInput& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
