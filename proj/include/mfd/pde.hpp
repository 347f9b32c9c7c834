#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mfd/nodes.hpp"
#include "mfd/point.hpp"
#include "mfd/stencil.hpp"

namespace mfd {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Global collocation system for the Poisson-Dirichlet problem. Interior
/// rows hold Laplacian stencil weights (the diagonal is always present since
/// the stencil center is its own node); boundary rows are identity rows with
/// rhs = g(x_i). Triplets are ordered by (row, col).
struct SparseSystem {
    std::size_t n = 0;
    std::vector<Triplet> triplets;
    std::vector<double> rhs;
};

struct AssemblyOptions {
    WeightMethod method = WeightMethod::sparse_qr;
    int q = 4;
    std::size_t m_neighbors = 0;  // 0 = twice the polynomial space dimension
    StencilOptions stencil;
    bool retry_double_m = false;  // one retry with doubled m on a degenerate node
    int threads = 0;              // 0 = runtime default (parallel build only)
};

using ScalarField = std::function<double(const Point&)>;

/// Builds the global system, one Laplacian stencil per interior node over its
/// m nearest neighbors. Parallelized over nodes when built with OpenMP; the
/// output is deterministic and identical to assemble_poisson_serial.
/// A node whose neighborhood admits no exact weights raises GrowthInfinite
/// carrying that node's index.
SparseSystem assemble_poisson(const NodeSet& x, const AssemblyOptions& opts, const ScalarField& f,
                              const ScalarField& g);

/// Single-threaded reference implementation with identical output.
SparseSystem assemble_poisson_serial(const NodeSet& x, const AssemblyOptions& opts,
                                     const ScalarField& f, const ScalarField& g);

enum class SolveStrategy { automatic, direct, iterative };

struct SolveOptions {
    double rel_tol = 1e-10;
    SolveStrategy strategy = SolveStrategy::automatic;  // direct up to n=2000
    std::size_t max_restarts = 400;                     // GMRES(50) cycles
};

/// Solves the assembled system to ||A u - rhs|| <= rel_tol * ||rhs||,
/// verifying the residual independently from the triplets. Dense LU with
/// partial pivoting up to n = 2000, restarted GMRES with Jacobi
/// preconditioning beyond. Raises SolveFailed (with the achieved residual)
/// when the contract cannot be met.
std::vector<double> solve_system(const SparseSystem& s, const SolveOptions& opts = {});

/// (max_i |u_i - exact(x_i)|, root mean square of the same differences).
std::pair<double, double> error_norms(const std::vector<double>& u, const ScalarField& exact,
                                      const NodeSet& x);

struct ConvergenceRow {
    double h;
    double max_err;
    double order;  // NaN on the first level
};

/// Manufactured Poisson problem u = sin(pi x) sin(pi y), f = -2 pi^2 u,
/// g = 0, run on perturbed unit-square grids of the given sizes.
/// observed order between consecutive levels: log(e1/e2) / log(h1/h2).
std::vector<ConvergenceRow> convergence_study(const std::vector<int>& levels_n_per_side,
                                              double perturbation, const AssemblyOptions& opts,
                                              unsigned long long seed = 0,
                                              double solve_rel_tol = 1e-10);

double manufactured_u(const Point& p);
double manufactured_f(const Point& p);

} // namespace mfd
