#include "mfd/stencil.hpp"

#include <algorithm>
#include <cmath>

#include "mfd/errors.hpp"
#include "mfd/qr.hpp"
#include "mfd/simplex.hpp"

namespace mfd {

namespace {

// Relative tolerance for treating nodes as coincident (with each other or
// with the center), measured against the stencil radius h.
constexpr double kCoincideRel = 1e-12;

std::vector<std::pair<std::size_t, double>> nonzero_entries(const std::vector<double>& w) {
    std::vector<std::pair<std::size_t, double>> e;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (w[j] != 0.0) e.emplace_back(j, w[j]);
    return e;
}

void set_norms(WeightVector& wv, const StencilProblem& p) {
    const auto [n1, n2] = weighted_norms(wv.entries, p);
    wv.norm_1q = n1;
    wv.norm_2q = n2;
}

// Full nu x m collocation matrix and right-hand side in the scaled basis,
// regardless of whether the center is a node.
void full_system(const StencilProblem& p, Matrix& a, std::vector<double>& b) {
    const std::size_t nu = p.basis.size(), m = p.nodes.size();
    a = Matrix(nu, m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::vector<double> col = eval_basis_at(p.basis, p.nodes[j]);
        for (std::size_t i = 0; i < nu; ++i) a(i, j) = col[i];
    }
    b = apply_operator_at_center(p.op, p.basis);
}

} // namespace

StencilProblem build_problem(const Point& z, const std::vector<Point>& y_raw, int q,
                             const DiffOperator& op) {
    if (static_cast<int>(z.size()) != op.dim())
        throw DimensionMismatch("build_problem: center dimension differs from operator");
    if (q <= op.order())
        throw OrderTooLow("build_problem: exactness order q must exceed the operator order");
    if (y_raw.empty()) throw InvalidArgument("build_problem: node list is empty");

    double h2 = 0.0;
    for (const Point& y : y_raw) {
        if (y.size() != z.size())
            throw DimensionMismatch("build_problem: node dimension differs from center");
        h2 = std::max(h2, dist_sq(y, z));
    }
    const double h = std::sqrt(h2);
    if (h == 0.0) throw AllNodesCoincide("build_problem: every node coincides with the center");
    const double tol2 = (kCoincideRel * h) * (kCoincideRel * h);

    // Deduplicate keeping the lowest original index; detect the center.
    std::vector<Point> nodes;
    std::vector<std::size_t> source;
    std::size_t center_pos = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i < y_raw.size(); ++i) {
        bool dup = false;
        for (const Point& kept : nodes) {
            if (dist_sq(y_raw[i], kept) <= tol2) {
                dup = true;
                break;
            }
        }
        if (dup) continue;
        if (center_pos == static_cast<std::size_t>(-1) && dist_sq(y_raw[i], z) <= tol2)
            center_pos = nodes.size();
        nodes.push_back(y_raw[i]);
        source.push_back(i);
    }

    const bool has_center = center_pos != static_cast<std::size_t>(-1);
    if (has_center && center_pos != 0) {
        std::rotate(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(center_pos),
                    nodes.begin() + static_cast<std::ptrdiff_t>(center_pos) + 1);
        std::rotate(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(center_pos),
                    source.begin() + static_cast<std::ptrdiff_t>(center_pos) + 1);
    }

    return StencilProblem{z, std::move(nodes), q, op, has_center, std::move(source),
                          make_scaled_basis(z, y_raw, q)};
}

Collocation collocation_system(const StencilProblem& p) {
    Matrix a_full;
    std::vector<double> b_full;
    full_system(p, a_full, b_full);
    const std::size_t nu = a_full.rows(), m = a_full.cols();
    const double h = p.basis.scale;

    Collocation c;
    c.c0 = p.op.c0(p.z);
    c.center = p.has_center;
    const std::size_t j0 = p.has_center ? 1 : 0;  // first column kept
    const std::size_t i0 = p.has_center ? 1 : 0;  // first row kept
    c.a = Matrix(nu - i0, m - j0);
    for (std::size_t i = i0; i < nu; ++i)
        for (std::size_t j = j0; j < m; ++j) c.a(i - i0, j - j0) = a_full(i, j);
    c.rhs.assign(b_full.begin() + static_cast<std::ptrdiff_t>(i0), b_full.end());
    c.theta.resize(m - j0);
    for (std::size_t j = j0; j < m; ++j)
        c.theta[j - j0] = std::pow(h / dist(p.nodes[j], p.z), static_cast<double>(p.q));
    return c;
}

WeightVector weights_l2(const StencilProblem& p, const StencilOptions& opts) {
    Collocation c = collocation_system(p);
    Matrix at = c.a;  // A Theta: column j scaled by theta_j
    for (std::size_t i = 0; i < at.rows(); ++i)
        for (std::size_t j = 0; j < at.cols(); ++j) at(i, j) *= c.theta[j];

    std::vector<double> v;
    try {
        v = min_norm_solution(at, c.rhs, opts.rank_tol_rel, opts.consist_tol_rel);
    } catch (const Inconsistent&) {
        throw GrowthInfinite("weights_l2: no exact weights exist (growth function is infinite)");
    }

    std::vector<double> w(p.nodes.size(), 0.0);
    const std::size_t j0 = c.center ? 1 : 0;
    double tail_sum = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        w[j + j0] = c.theta[j] * v[j];
        tail_sum += w[j + j0];
    }
    if (c.center) w[0] = c.c0 - tail_sum;

    WeightVector wv;
    wv.method = WeightMethod::l2min;
    wv.entries = nonzero_entries(w);
    set_norms(wv, p);
    return wv;
}

WeightVector weights_l1(const StencilProblem& p, const StencilOptions&) {
    Matrix a;
    std::vector<double> b;
    full_system(p, a, b);
    const double h = p.basis.scale;
    // Costs are the scaled distances to the q-th power; the center node, if
    // present, gets cost 0 and enters the program with free sign like any
    // other column.
    std::vector<double> costs(p.nodes.size());
    for (std::size_t j = 0; j < p.nodes.size(); ++j)
        costs[j] = std::pow(dist(p.nodes[j], p.z) / h, static_cast<double>(p.q));

    LpResult lp;
    try {
        lp = lp_min_weighted_l1(a, b, costs);
    } catch (const Infeasible&) {
        throw GrowthInfinite("weights_l1: no exact weights exist (growth function is infinite)");
    }

    WeightVector wv;
    wv.method = WeightMethod::l1min;
    wv.entries = nonzero_entries(lp.w);
    set_norms(wv, p);
    return wv;
}

std::pair<WeightVector, QrSelectDiagnostics> weights_sparse_qr(const StencilProblem& p,
                                                               const StencilOptions& opts) {
    Collocation c = collocation_system(p);
    Matrix at = c.a;
    for (std::size_t i = 0; i < at.rows(); ++i)
        for (std::size_t j = 0; j < at.cols(); ++j) at(i, j) *= c.theta[j];

    PivotedQR fac(at, opts.rank_tol_rel);
    const std::size_t r = fac.rank();
    const std::vector<double> qtb = fac.apply_qt(c.rhs);
    const double thr = opts.s_tol_rel * norm2(c.rhs);

    std::size_t s = 0;
    for (std::size_t i = 0; i < qtb.size(); ++i)
        if (std::abs(qtb[i]) > thr) s = i + 1;
    if (s > r)
        throw GrowthInfinite(
            "weights_sparse_qr: right-hand side has components beyond the numerical rank "
            "(growth function is infinite)");

    std::vector<double> v1;
    if (s > 0) {
        try {
            v1 = solve_upper_triangular(fac.r_block(s, s),
                                        std::vector<double>(qtb.begin(),
                                                            qtb.begin() + static_cast<std::ptrdiff_t>(s)));
        } catch (const SingularDiagonal&) {
            throw NumericalBreakdown(
                "weights_sparse_qr: leading block of R is singular; loosen s_tol_rel");
        }
    }

    double bound_factor = 1.0;
    if (s > 0 && s < at.cols()) {
        // X = R1^{-1} R2, one triangular solve per trailing column.
        Matrix x(s, at.cols() - s);
        const Matrix r1 = fac.r_block(s, s);
        for (std::size_t jj = s; jj < at.cols(); ++jj) {
            std::vector<double> col(s);
            for (std::size_t i = 0; i < s; ++i) col[i] = fac.r_entry(i, jj);
            const std::vector<double> sol = solve_upper_triangular(r1, col);
            for (std::size_t i = 0; i < s; ++i) x(i, jj - s) = sol[i];
        }
        const double sn = spectral_norm(x);
        bound_factor = std::sqrt(1.0 + sn * sn);
    }

    std::vector<double> w(p.nodes.size(), 0.0);
    const std::size_t j0 = c.center ? 1 : 0;
    double tail_sum = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
        const std::size_t col = fac.perm()[i];
        const double wj = c.theta[col] * v1[i];
        w[col + j0] = wj;
        tail_sum += wj;
    }
    if (c.center) w[0] = c.c0 - tail_sum;

    WeightVector wv;
    wv.method = WeightMethod::sparse_qr;
    wv.entries = nonzero_entries(w);
    set_norms(wv, p);

    QrSelectDiagnostics diag;
    diag.rank = c.center ? r + 1 : r;
    diag.s = s;
    diag.bound_factor = bound_factor;
    diag.used_center_branch = c.center;
    if (c.center) diag.selected.push_back(0);  // z belongs to the selection by construction
    for (std::size_t j = c.center ? 1 : 0; j < w.size(); ++j)
        if (w[j] != 0.0) diag.selected.push_back(j);
    return {std::move(wv), std::move(diag)};
}

std::pair<double, double> weighted_norms(const std::vector<std::pair<std::size_t, double>>& entries,
                                         const StencilProblem& p) {
    double n1 = 0.0, n2 = 0.0;
    for (const auto& [j, wj] : entries) {
        if (j >= p.nodes.size()) throw InvalidArgument("weighted_norms: node index out of range");
        const double t = std::pow(dist(p.nodes[j], p.z), static_cast<double>(p.q));
        n1 += std::abs(wj) * t;
        n2 += (wj * t) * (wj * t);
    }
    return {n1, std::sqrt(n2)};
}

double growth_function(const StencilProblem& p, const StencilOptions& opts) {
    return weights_l1(p, opts).norm_1q;
}

std::pair<double, double> growth_bounds(const StencilProblem& p, const StencilOptions& opts) {
    const WeightVector w2 = weights_l2(p, opts);
    const double lower = w2.norm_2q;
    return {lower, std::sqrt(static_cast<double>(p.nodes.size())) * lower};
}

double verify_exactness(const WeightVector& w, const StencilProblem& p) {
    const std::size_t nu = p.basis.size();
    std::vector<double> acc(nu, 0.0);
    for (const auto& [j, wj] : w.entries) {
        const std::vector<double> col = eval_basis_at(p.basis, p.nodes[j]);
        for (std::size_t i = 0; i < nu; ++i) acc[i] += wj * col[i];
    }
    const std::vector<double> b = apply_operator_at_center(p.op, p.basis);
    double worst = 0.0;
    for (std::size_t i = 0; i < nu; ++i)
        worst = std::max(worst, std::abs(acc[i] - b[i]) / (1.0 + std::abs(b[i])));
    return worst;
}

double error_bound_value(const WeightVector& w, const StencilProblem& p) {
    (void)p;
    return w.norm_1q;
}

} // namespace mfd
