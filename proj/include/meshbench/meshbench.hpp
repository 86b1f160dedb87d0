#pragma once

// Umbrella header for the meshbench workbench: variational structured grid
// generation, generalized finite differences, DistMesh-style triangulation,
// linear FEM, and the side-by-side error/order experiment harness.

#include "meshbench/errors.hpp"
#include "meshbench/geometry.hpp"
#include "meshbench/grid.hpp"
#include "meshbench/functionals.hpp"
#include "meshbench/sparse.hpp"
#include "meshbench/problems.hpp"
#include "meshbench/gfd.hpp"
#include "meshbench/triangulation.hpp"
#include "meshbench/fem.hpp"
#include "meshbench/io.hpp"
#include "meshbench/report.hpp"
