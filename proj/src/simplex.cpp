#include "mfd/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfd/errors.hpp"
#include "mfd/point.hpp"

namespace mfd {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kReducedCostTol = 1e-11;

// Dense simplex tableau over the split system [A | -A | I] x = b, b >= 0.
// Rows can be dropped when Phase I reveals them as redundant.
struct Tableau {
    std::size_t ncols;                     // structural + artificial columns
    std::vector<std::vector<double>> row;  // each of length ncols + 1 (rhs last)
    std::vector<std::size_t> basis;        // basic column per row

    double rhs(std::size_t i) const { return row[i][ncols]; }

    void pivot(std::size_t pr, std::size_t pc) {
        std::vector<double>& prow = row[pr];
        const double d = prow[pc];
        for (double& x : prow) x /= d;
        prow[pc] = 1.0;  // exact
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == pr) continue;
            const double f = row[i][pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= ncols; ++j) row[i][j] -= f * prow[j];
            row[i][pc] = 0.0;  // exact
        }
        basis[pr] = pc;
    }
};

// One simplex phase with Bland's rule: enter the smallest eligible column
// index, break ratio ties by the smallest basic column index. That rule is
// what makes degenerate stencil LPs (gridded nodes produce many ties)
// terminate without cycling. Columns with allowed[j] == false never enter
// (Phase II bans the artificials).
void run_phase(Tableau& t, const std::vector<double>& cost, const std::vector<bool>& allowed,
               std::size_t max_iter) {
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        const std::size_t nrows = t.row.size();
        std::size_t enter = t.ncols;
        for (std::size_t j = 0; j < t.ncols; ++j) {
            if (!allowed[j]) continue;
            double red = cost[j];
            for (std::size_t i = 0; i < nrows; ++i) {
                const double cb = cost[t.basis[i]];
                if (cb != 0.0) red -= cb * t.row[i][j];
            }
            if (red < -kReducedCostTol) {
                enter = j;
                break;
            }
        }
        if (enter == t.ncols) return;  // optimal

        std::size_t leave = nrows;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nrows; ++i) {
            const double a = t.row[i][enter];
            if (a > kPivotTol) {
                const double ratio = t.rhs(i) / a;
                if (ratio < best_ratio - 1e-15 ||
                    (ratio <= best_ratio + 1e-15 &&
                     (leave == nrows || t.basis[i] < t.basis[leave]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
        }
        if (leave == nrows)
            throw Unbounded("lp_min_weighted_l1: unbounded phase objective (internal error)");
        t.pivot(leave, enter);
    }
    throw IterationLimit("lp_min_weighted_l1: simplex iteration cap reached");
}

} // namespace

LpResult lp_min_weighted_l1(const Matrix& a, const std::vector<double>& b,
                            const std::vector<double>& costs) {
    if (a.empty()) throw InvalidArgument("lp_min_weighted_l1: empty matrix");
    const std::size_t nr = a.rows(), n = a.cols();
    if (b.size() != nr) throw DimensionMismatch("lp_min_weighted_l1: rhs length != row count");
    if (costs.size() != n) throw DimensionMismatch("lp_min_weighted_l1: cost length != column count");
    for (double c : costs)
        if (!(c >= 0.0)) throw InvalidArgument("lp_min_weighted_l1: costs must be non-negative");

    const double bnorm = norm2(b);
    const double feas_tol = 1e-9 * (1.0 + bnorm);
    const std::size_t nstruct = 2 * n;       // u columns, then v columns
    const std::size_t ncols = nstruct + nr;  // plus one artificial per row

    // Row signs flipped where needed so the artificial basis starts feasible.
    Tableau t;
    t.ncols = ncols;
    t.row.assign(nr, std::vector<double>(ncols + 1, 0.0));
    t.basis.resize(nr);
    for (std::size_t i = 0; i < nr; ++i) {
        const double s = b[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            t.row[i][j] = s * a(i, j);
            t.row[i][n + j] = -s * a(i, j);
        }
        t.row[i][nstruct + i] = 1.0;
        t.row[i][ncols] = s * b[i];
        t.basis[i] = nstruct + i;
    }

    // Bland's rule trades speed for guaranteed termination; on degenerate
    // problems it can take a long walk, so the cap is generous.
    const std::size_t max_iter = 50 * (n + nr) + 200;

    // Phase I: drive the artificial variables to zero.
    {
        std::vector<double> cost1(ncols, 0.0);
        for (std::size_t i = 0; i < nr; ++i) cost1[nstruct + i] = 1.0;
        std::vector<bool> allowed(ncols, true);
        run_phase(t, cost1, allowed, max_iter);

        double art_sum = 0.0;
        for (std::size_t i = 0; i < t.row.size(); ++i)
            if (t.basis[i] >= nstruct) art_sum += t.rhs(i);
        if (art_sum > feas_tol)
            throw Infeasible("lp_min_weighted_l1: exactness constraints are infeasible");

        // Pivot lingering zero-valued artificials out; a row offering no
        // structural pivot is a redundant constraint and is dropped.
        for (std::size_t i = t.row.size(); i-- > 0;) {
            if (t.basis[i] < nstruct) continue;
            std::size_t pc = nstruct;
            for (std::size_t j = 0; j < nstruct; ++j) {
                if (std::abs(t.row[i][j]) > kPivotTol) {
                    pc = j;
                    break;
                }
            }
            if (pc < nstruct) {
                t.pivot(i, pc);
            } else {
                t.row.erase(t.row.begin() + static_cast<std::ptrdiff_t>(i));
                t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(i));
            }
        }
    }

    // Phase II: the weighted 1-norm objective on the split variables.
    {
        std::vector<double> cost2(ncols, 0.0);
        for (std::size_t j = 0; j < n; ++j) cost2[j] = cost2[n + j] = costs[j];
        std::vector<bool> allowed(ncols, false);
        for (std::size_t j = 0; j < nstruct; ++j) allowed[j] = true;
        run_phase(t, cost2, allowed, max_iter);
    }

    // The tableau rhs carries the roundoff of every pivot, so recompute the
    // basic values from the original columns: Gauss-Jordan with partial
    // pivoting on the (possibly redundant) system restricted to the basic
    // columns. The basic columns are linearly independent, so each gets a
    // pivot row; the remaining rows vanish by consistency.
    const std::size_t nbasic = t.row.size();
    std::vector<double> w(n, 0.0);
    if (nbasic > 0) {
        std::vector<std::vector<double>> m(nr, std::vector<double>(nbasic + 1));
        for (std::size_t i = 0; i < nr; ++i) {
            for (std::size_t k = 0; k < nbasic; ++k) {
                const std::size_t col = t.basis[k];
                m[i][k] = col < n ? a(i, col) : -a(i, col - n);
            }
            m[i][nbasic] = b[i];
        }
        std::vector<std::size_t> pivot_row(nbasic);
        std::size_t lead = 0;
        for (std::size_t k = 0; k < nbasic; ++k) {
            std::size_t p = lead;
            for (std::size_t i = lead + 1; i < nr; ++i)
                if (std::abs(m[i][k]) > std::abs(m[p][k])) p = i;
            if (lead >= nr || std::abs(m[p][k]) < 1e-300)
                throw NumericalBreakdown("lp_min_weighted_l1: dependent basis columns");
            std::swap(m[p], m[lead]);
            for (std::size_t i = 0; i < nr; ++i) {
                if (i == lead) continue;
                const double f = m[i][k] / m[lead][k];
                if (f == 0.0) continue;
                for (std::size_t j = k; j <= nbasic; ++j) m[i][j] -= f * m[lead][j];
            }
            pivot_row[k] = lead;
            ++lead;
        }
        for (std::size_t k = 0; k < nbasic; ++k) {
            const double xk = m[pivot_row[k]][nbasic] / m[pivot_row[k]][k];
            const std::size_t col = t.basis[k];
            if (col < n)
                w[col] += xk;
            else
                w[col - n] -= xk;
        }
    }

    // Basic variables that are degenerately zero at the vertex recompute to
    // rounding noise; clear them so the reported support is the exact one.
    double wmax = 0.0;
    for (double x : w) wmax = std::max(wmax, std::abs(x));
    for (double& x : w)
        if (std::abs(x) < 1e-13 * wmax) x = 0.0;

    std::vector<double> res = matvec(a, w);
    for (std::size_t i = 0; i < nr; ++i) res[i] -= b[i];
    if (norm2(res) > feas_tol)
        throw NumericalBreakdown("lp_min_weighted_l1: constraint residual exceeds tolerance");

    LpResult out;
    out.w = std::move(w);
    out.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) out.objective += costs[j] * std::abs(out.w[j]);
    return out;
}

} // namespace mfd
