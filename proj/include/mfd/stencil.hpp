#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mfd/basis.hpp"
#include "mfd/diff_operator.hpp"
#include "mfd/matrix.hpp"
#include "mfd/point.hpp"

namespace mfd {

enum class WeightMethod { l2min, l1min, sparse_qr };

struct StencilOptions {
    double rank_tol_rel = 1e-10;    // rank truncation, relative to |R_11|
    double s_tol_rel = 1e-12;       // nonzero threshold for Q^T b, relative to ||b||
    double consist_tol_rel = 1e-8;  // consistency acceptance in the min-norm solve
};

/// One stencil computation: center z, candidate nodes, exactness order q and
/// the operator. Built via build_problem, which deduplicates the nodes and,
/// when z itself is among them, moves it to index 0.
struct StencilProblem {
    Point z;
    std::vector<Point> nodes;  // deduplicated; nodes[0] == z iff has_center
    int q;
    DiffOperator op;
    bool has_center;
    std::vector<std::size_t> source_index;  // nodes[j] came from Y_raw[source_index[j]]
    ScaledBasis basis;                      // centered at z, scale = max node distance

    std::size_t size() const { return nodes.size(); }
};

/// Exact differentiation weights. Only nonzero weights are stored; indices
/// refer to StencilProblem::nodes. Norms are the distance-weighted 1- and
/// 2-norms sum |w_j| ||y_j-z||^q and (sum w_j^2 ||y_j-z||^(2q))^(1/2),
/// in original length units.
struct WeightVector {
    WeightMethod method;
    std::vector<std::pair<std::size_t, double>> entries;
    double norm_1q = 0.0;
    double norm_2q = 0.0;
};

/// Diagnostics of the pivoted-QR node selection.
struct QrSelectDiagnostics {
    std::size_t rank = 0;        // rank of the full collocation matrix, r_q(Y)
    std::size_t s = 0;           // largest surviving index of Q^T b
    double bound_factor = 1.0;   // (1 + ||R1^-1 R2||_2^2)^(1/2)
    std::vector<std::size_t> selected;  // indices into nodes, ascending
    bool used_center_branch = false;
};

StencilProblem build_problem(const Point& z, const std::vector<Point>& y_raw, int q,
                             const DiffOperator& op);

/// The collocation system in the scaled basis. When the center is a node the
/// system is the reduced one (constant row and center column eliminated);
/// c0 is the coefficient of the operator's identity term at z, needed to
/// restore the center weight afterward.
struct Collocation {
    Matrix a;                   // nu x m, or (nu-1) x (m-1) in the center branch
    std::vector<double> rhs;
    std::vector<double> theta;  // (||y_j-z||/h)^(-q), one per column of a
    double c0 = 0.0;
    bool center = false;
};

Collocation collocation_system(const StencilProblem& p);

/// Exact weights of minimal distance-weighted 2-norm.
WeightVector weights_l2(const StencilProblem& p, const StencilOptions& opts = {});

/// Exact weights of minimal distance-weighted 1-norm (linear programming).
/// The weighted 1-norm of the result equals the growth function.
WeightVector weights_l1(const StencilProblem& p, const StencilOptions& opts = {});

/// Sparse weights via pivoted QR on the distance-scaled collocation matrix:
/// keeps at most rank-many nodes and reports the selection diagnostics.
std::pair<WeightVector, QrSelectDiagnostics> weights_sparse_qr(const StencilProblem& p,
                                                               const StencilOptions& opts = {});

/// (||w||_{1,q}, ||w||_{2,q}) in original units for arbitrary entries.
std::pair<double, double> weighted_norms(const std::vector<std::pair<std::size_t, double>>& entries,
                                         const StencilProblem& p);

/// rho_{q,D}(z, Y): the minimal weighted 1-norm among exact weight vectors.
/// Throws GrowthInfinite when no exact weights exist.
double growth_function(const StencilProblem& p, const StencilOptions& opts = {});

/// Sandwich from the minimal weighted 2-norm:
/// ||w**||_{2,q} <= rho <= sqrt(m) ||w**||_{2,q}.
std::pair<double, double> growth_bounds(const StencilProblem& p, const StencilOptions& opts = {});

/// Largest relative residual of the exactness conditions over the basis,
/// max_i |sum_j w_j p_i(y_j) - Dp_i(z)| / (1 + |Dp_i(z)|), in the scaled basis.
double verify_exactness(const WeightVector& w, const StencilProblem& p);

/// The f-independent factor ||w||_{1,q} of the consistency error bound
/// |Df(z) - sum w_j f(y_j)| <= ||w||_{1,q} |f|_q.
double error_bound_value(const WeightVector& w, const StencilProblem& p);

} // namespace mfd
