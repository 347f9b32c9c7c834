#include "mfd/pde.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "mfd/errors.hpp"
#include "mfd/matrix.hpp"
#include "mfd/multi_index.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mfd {

namespace {

WeightVector compute_weights(const StencilProblem& p, WeightMethod method,
                             const StencilOptions& so) {
    switch (method) {
        case WeightMethod::l2min: return weights_l2(p, so);
        case WeightMethod::l1min: return weights_l1(p, so);
        case WeightMethod::sparse_qr: return weights_sparse_qr(p, so).first;
    }
    throw InvalidArgument("assemble_poisson: unknown weight method");
}

// One interior row: Laplacian stencil over the m nearest neighbors of node i.
void interior_row(const NodeSet& x, const KnnIndex& index, const AssemblyOptions& opts,
                  std::size_t m_eff, std::size_t i, std::vector<Triplet>& row) {
    const DiffOperator lap = DiffOperator::laplacian(x.dim);
    std::size_t m = m_eff;
    for (int attempt = 0;; ++attempt) {
        const std::vector<std::size_t> neigh = index.query(x.points[i], m);
        std::vector<Point> y;
        y.reserve(neigh.size());
        for (std::size_t idx : neigh) y.push_back(x.points[idx]);
        try {
            const StencilProblem p = build_problem(x.points[i], y, opts.q, lap);
            const WeightVector wv = compute_weights(p, opts.method, opts.stencil);
            row.clear();
            bool have_diag = false;
            for (const auto& [j, wj] : wv.entries) {
                const std::size_t col = neigh[p.source_index[j]];
                if (col == i) have_diag = true;
                row.push_back({i, col, wj});
            }
            if (!have_diag) row.push_back({i, i, 0.0});
            std::sort(row.begin(), row.end(),
                      [](const Triplet& a, const Triplet& b) { return a.col < b.col; });
            return;
        } catch (const GrowthInfinite& e) {
            if (opts.retry_double_m && attempt == 0 && m < x.size()) {
                m = std::min(2 * m, x.size());
                continue;
            }
            throw GrowthInfinite(e.what(), static_cast<long>(i));
        }
    }
}

SparseSystem assemble_impl(const NodeSet& x, const AssemblyOptions& opts, const ScalarField& f,
                           const ScalarField& g, bool parallel) {
    if (x.dim < 1 || x.size() == 0) throw InvalidArgument("assemble_poisson: empty node set");
    if (opts.q <= 2) throw OrderTooLow("assemble_poisson: need q > 2 for the Laplacian");
    if (!f || !g) throw InvalidArgument("assemble_poisson: f and g must be callable");
    const std::size_t n = x.size();
    const std::size_t m_eff =
        std::min(n, opts.m_neighbors > 0 ? opts.m_neighbors
                                         : 2 * dim_poly(x.dim, opts.q));
    const KnnIndex index(x);

    std::vector<std::vector<Triplet>> rows(n);
    std::vector<double> rhs(n, 0.0);
    std::vector<std::exception_ptr> errors(n);

    auto work = [&](std::size_t i) {
        try {
            if (x.boundary[i]) {
                rows[i].push_back({i, i, 1.0});
                rhs[i] = g(x.points[i]);
            } else {
                interior_row(x, index, opts, m_eff, i, rows[i]);
                rhs[i] = f(x.points[i]);
            }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    if (parallel) {
#ifdef _OPENMP
        const int nt = opts.threads > 0 ? opts.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(nt)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            work(static_cast<std::size_t>(i));
#else
        for (std::size_t i = 0; i < n; ++i) work(i);
#endif
    } else {
        for (std::size_t i = 0; i < n; ++i) work(i);
    }

    // Report the failure of the lowest node index, independent of the
    // execution order above.
    for (std::size_t i = 0; i < n; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);

    SparseSystem s;
    s.n = n;
    s.rhs = std::move(rhs);
    std::size_t nnz = 0;
    for (const auto& r : rows) nnz += r.size();
    s.triplets.reserve(nnz);
    for (const auto& r : rows) s.triplets.insert(s.triplets.end(), r.begin(), r.end());
    return s;
}

// Compressed sparse rows built from (row-sorted) triplets; duplicate entries
// are summed.
struct Csr {
    std::size_t n;
    std::vector<std::size_t> ptr, col;
    std::vector<double> val;

    explicit Csr(const SparseSystem& s) : n(s.n), ptr(s.n + 1, 0) {
        std::vector<Triplet> t = s.triplets;
        std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t[k].row >= n || t[k].col >= n)
                throw InvalidArgument("solve_system: triplet index out of range");
            if (!col.empty() && t[k].row == last_row_ && t[k].col == col.back()) {
                val.back() += t[k].value;
                continue;
            }
            while (last_row_ + 1 <= t[k].row) ptr[++last_row_] = col.size();
            col.push_back(t[k].col);
            val.push_back(t[k].value);
        }
        while (last_row_ + 1 <= n) ptr[++last_row_] = col.size();
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) s += val[k] * x[col[k]];
            y[i] = s;
        }
        return y;
    }

private:
    std::size_t last_row_ = 0;
};

double residual_norm(const SparseSystem& s, const std::vector<double>& u) {
    std::vector<double> r = s.rhs;
    for (const Triplet& t : s.triplets) r[t.row] -= t.value * u[t.col];
    return norm2(r);
}

std::vector<double> solve_direct(const SparseSystem& s) {
    const std::size_t n = s.n;
    Matrix a(n, n);
    for (const Triplet& t : s.triplets) a(t.row, t.col) += t.value;
    std::vector<double> b = s.rhs;
    std::vector<std::size_t> piv(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        if (std::abs(a(p, k)) < 1e-300)
            throw SolveFailed("solve_system: singular matrix in the direct factorization",
                              std::numeric_limits<double>::infinity());
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(b[k], b[p]);
        }
        const double d = a(k, k);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long ii = static_cast<long long>(k) + 1; ii < static_cast<long long>(n); ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            const double f = a(i, k) / d;
            if (f == 0.0) continue;
            a(i, k) = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<double> u(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        for (std::size_t j = i + 1; j < n; ++j) v -= a(i, j) * u[j];
        u[i] = v / a(i, i);
    }
    return u;
}

// Restarted GMRES with Jacobi (diagonal) left preconditioning.
std::vector<double> solve_gmres(const SparseSystem& s, double rel_tol, std::size_t max_restarts) {
    const Csr a(s);
    const std::size_t n = s.n;
    std::vector<double> dinv(n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = a.ptr[i]; k < a.ptr[i + 1]; ++k)
            if (a.col[k] == i && a.val[k] != 0.0) dinv[i] = 1.0 / a.val[k];

    const double bnorm = norm2(s.rhs);
    if (bnorm == 0.0) return std::vector<double>(n, 0.0);
    const double target = rel_tol * bnorm;
    constexpr std::size_t kDim = 50;

    std::vector<double> x(n, 0.0);
    double true_res = bnorm;
    for (std::size_t restart = 0; restart < max_restarts; ++restart) {
        std::vector<double> r = s.rhs;
        {
            const std::vector<double> ax = a.apply(x);
            for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];
        }
        true_res = norm2(r);
        if (true_res <= target) return x;

        for (std::size_t i = 0; i < n; ++i) r[i] *= dinv[i];
        const double beta = norm2(r);
        if (beta == 0.0) return x;

        std::vector<std::vector<double>> v;
        v.reserve(kDim + 1);
        v.push_back(r);
        for (double& e : v[0]) e /= beta;
        std::vector<std::vector<double>> h(kDim + 1, std::vector<double>(kDim, 0.0));
        std::vector<double> cs(kDim, 0.0), sn(kDim, 0.0), gvec(kDim + 1, 0.0);
        gvec[0] = beta;
        std::size_t m_used = 0;

        for (std::size_t j = 0; j < kDim; ++j) {
            std::vector<double> w = a.apply(v[j]);
            for (std::size_t i = 0; i < n; ++i) w[i] *= dinv[i];
            for (std::size_t i = 0; i <= j; ++i) {
                double dot = 0.0;
                for (std::size_t kk = 0; kk < n; ++kk) dot += w[kk] * v[i][kk];
                h[i][j] = dot;
                for (std::size_t kk = 0; kk < n; ++kk) w[kk] -= dot * v[i][kk];
            }
            h[j + 1][j] = norm2(w);
            if (h[j + 1][j] > 0.0) {
                for (double& e : w) e /= h[j + 1][j];
                v.push_back(std::move(w));
            }
            for (std::size_t i = 0; i < j; ++i) {
                const double t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            const double denom = std::hypot(h[j][j], h[j + 1][j]);
            if (denom == 0.0) {
                m_used = j;
                break;
            }
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            gvec[j + 1] = -sn[j] * gvec[j];
            gvec[j] = cs[j] * gvec[j];
            m_used = j + 1;
            // Also triggers on Arnoldi breakdown (h[j+1][j] == 0 makes the
            // rotated tail exactly zero).
            if (std::abs(gvec[j + 1]) <= 0.1 * rel_tol * bnorm) break;
        }

        std::vector<double> ym(m_used, 0.0);
        for (std::size_t i = m_used; i-- > 0;) {
            double t = gvec[i];
            for (std::size_t j = i + 1; j < m_used; ++j) t -= h[i][j] * ym[j];
            ym[i] = t / h[i][i];
        }
        for (std::size_t j = 0; j < m_used; ++j)
            for (std::size_t i = 0; i < n; ++i) x[i] += ym[j] * v[j][i];
    }
    throw SolveFailed("solve_system: iteration limit reached before the residual target",
                      true_res / bnorm);
}

} // namespace

SparseSystem assemble_poisson(const NodeSet& x, const AssemblyOptions& opts, const ScalarField& f,
                              const ScalarField& g) {
    return assemble_impl(x, opts, f, g, /*parallel=*/true);
}

SparseSystem assemble_poisson_serial(const NodeSet& x, const AssemblyOptions& opts,
                                     const ScalarField& f, const ScalarField& g) {
    return assemble_impl(x, opts, f, g, /*parallel=*/false);
}

std::vector<double> solve_system(const SparseSystem& s, const SolveOptions& opts) {
    if (s.rhs.size() != s.n) throw DimensionMismatch("solve_system: rhs length != system size");
    if (s.n == 0) return {};
    const bool direct = opts.strategy == SolveStrategy::direct ||
                        (opts.strategy == SolveStrategy::automatic && s.n <= 2000);
    std::vector<double> u =
        direct ? solve_direct(s) : solve_gmres(s, opts.rel_tol, opts.max_restarts);

    // The residual contract is verified from the triplets, independent of
    // whatever representation the solver used internally.
    const double res = residual_norm(s, u);
    const double bnorm = norm2(s.rhs);
    if (res > opts.rel_tol * bnorm)
        throw SolveFailed("solve_system: residual exceeds the requested tolerance",
                          bnorm > 0.0 ? res / bnorm : res);
    return u;
}

std::pair<double, double> error_norms(const std::vector<double>& u, const ScalarField& exact,
                                      const NodeSet& x) {
    if (u.size() != x.size()) throw DimensionMismatch("error_norms: solution length != node count");
    double mx = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double e = std::abs(u[i] - exact(x.points[i]));
        mx = std::max(mx, e);
        sq += e * e;
    }
    return {mx, u.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(u.size()))};
}

std::vector<ConvergenceRow> convergence_study(const std::vector<int>& levels_n_per_side,
                                              double perturbation, const AssemblyOptions& opts,
                                              unsigned long long seed, double solve_rel_tol) {
    if (levels_n_per_side.size() < 2)
        throw InvalidArgument("convergence_study: need at least two levels");
    std::vector<ConvergenceRow> table;
    table.reserve(levels_n_per_side.size());
    for (int n : levels_n_per_side) {
        const NodeSet x = gen_unit_square(n, perturbation, seed + static_cast<unsigned long long>(n));
        const SparseSystem s =
            assemble_poisson(x, opts, manufactured_f, [](const Point&) { return 0.0; });
        SolveOptions so;
        so.rel_tol = solve_rel_tol;
        const std::vector<double> u = solve_system(s, so);
        const auto [mx, rms] = error_norms(u, manufactured_u, x);
        (void)rms;
        ConvergenceRow row;
        row.h = 1.0 / static_cast<double>(n - 1);
        row.max_err = mx;
        row.order = std::numeric_limits<double>::quiet_NaN();
        if (!table.empty()) {
            const ConvergenceRow& prev = table.back();
            row.order = std::log(prev.max_err / row.max_err) / std::log(prev.h / row.h);
        }
        table.push_back(row);
    }
    return table;
}

double manufactured_u(const Point& p) {
    return std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]);
}

double manufactured_f(const Point& p) {
    return -2.0 * M_PI * M_PI * manufactured_u(p);
}

} // namespace mfd
