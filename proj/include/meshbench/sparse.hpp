#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "meshbench/errors.hpp"

namespace meshbench {

/// Row-compressed sparse system A x = b. Entries within a row are kept in
/// column order; repeated additions to the same slot accumulate.
struct SparseSystem {
    struct Entry {
        int col = 0;
        double value = 0.0;
    };

    int dimension = 0;
    std::vector<std::vector<Entry>> rows;
    std::vector<double> rhs;

    explicit SparseSystem(int dim = 0) { resize(dim); }

    void resize(int dim) {
        dimension = dim;
        rows.assign(dim, {});
        rhs.assign(dim, 0.0);
    }

    void add(int r, int c, double v) {
        auto& row = rows[r];
        auto it = row.begin();
        while (it != row.end() && it->col < c) ++it;
        if (it != row.end() && it->col == c)
            it->value += v;
        else
            row.insert(it, {c, v});
    }

    double diagonal(int r) const {
        for (const Entry& e : rows[r])
            if (e.col == r) return e.value;
        return 0.0;
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        std::vector<double> y(dimension, 0.0);
        for (int r = 0; r < dimension; ++r)
            for (const Entry& e : rows[r]) y[r] += e.value * x[e.col];
        return y;
    }

    /// Relative 2-norm residual ||b - A x|| / ||b|| (absolute when b = 0).
    double relative_residual(const std::vector<double>& x) const {
        double rr = 0.0, bb = 0.0;
        const auto ax = multiply(x);
        for (int r = 0; r < dimension; ++r) {
            const double d = rhs[r] - ax[r];
            rr += d * d;
            bb += rhs[r] * rhs[r];
        }
        return bb > 0.0 ? std::sqrt(rr / bb) : std::sqrt(rr);
    }

    /// Coordinate text dump, one "row col value" line per entry (0-based),
    /// followed by "rhs row value" lines.
    std::string dump_coordinate() const {
        std::string out;
        char buf[128];
        for (int r = 0; r < dimension; ++r)
            for (const Entry& e : rows[r]) {
                std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r, e.col, e.value);
                out += buf;
            }
        for (int r = 0; r < dimension; ++r) {
            std::snprintf(buf, sizeof buf, "rhs %d %.17g\n", r, rhs[r]);
            out += buf;
        }
        return out;
    }
};

}  // namespace meshbench
