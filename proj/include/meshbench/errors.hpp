#pragma once

#include <stdexcept>
#include <string>

namespace meshbench {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments / malformed geometry handed in by the caller.
struct InvalidInput : Error {
    explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

// File could not be read, written or parsed.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// A linear solve failed (singular matrix, divergence, ...).
struct SolverError : Error {
    explicit SolverError(const std::string& msg) : Error(msg) {}
};

// A stencil could not be built (degenerate 3x3 subgrid etc.).
struct StencilError : Error {
    explicit StencilError(const std::string& msg) : Error(msg) {}
};

}  // namespace meshbench
