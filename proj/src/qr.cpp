#include "mfd/qr.hpp"

#include <cmath>
#include <cstdlib>

#include "mfd/errors.hpp"
#include "mfd/point.hpp"

namespace mfd {

namespace {

// Residual norm of column j restricted to rows k.. of the partially
// factored matrix. Recomputed at every step rather than downdated: the
// matrices here are small and recomputation avoids the classic norm-
// downdating accuracy loss.
double tail_col_norm(const Matrix& m, std::size_t k, std::size_t j) {
    double s = 0.0;
    for (std::size_t i = k; i < m.rows(); ++i) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

} // namespace

PivotedQR::PivotedQR(const Matrix& m, double rank_tol_rel, bool pivot) : qr_(m) {
    if (m.empty()) throw InvalidArgument("PivotedQR: empty matrix");
    if (!(rank_tol_rel > 0.0 && rank_tol_rel < 1.0))
        throw InvalidArgument("PivotedQR: rank_tol_rel must lie in (0, 1)");
    const std::size_t nr = m.rows(), nc = m.cols();
    const std::size_t nref = std::min(nr, nc);
    tau_.assign(nref, 0.0);
    perm_.resize(nc);
    for (std::size_t j = 0; j < nc; ++j) perm_[j] = j;

    for (std::size_t k = 0; k < nref; ++k) {
        if (pivot) {
            // Strict > keeps the lowest column index on ties.
            std::size_t best = k;
            double best_norm = tail_col_norm(qr_, k, k);
            for (std::size_t j = k + 1; j < nc; ++j) {
                const double nj = tail_col_norm(qr_, k, j);
                if (nj > best_norm) {
                    best_norm = nj;
                    best = j;
                }
            }
            if (best != k) {
                for (std::size_t i = 0; i < nr; ++i) std::swap(qr_(i, k), qr_(i, best));
                std::swap(perm_[k], perm_[best]);
            }
        }

        double colnorm = tail_col_norm(qr_, k, k);
        if (colnorm == 0.0) {
            tau_[k] = 0.0;  // nothing to annihilate
            continue;
        }
        const double alpha = qr_(k, k);
        const double beta = (alpha >= 0.0) ? -colnorm : colnorm;
        const double v0 = alpha - beta;  // no cancellation: signs of alpha, -beta agree
        tau_[k] = (beta - alpha) / beta;
        // Store u = v / v0 below the diagonal (u0 = 1 implicit), beta on it.
        for (std::size_t i = k + 1; i < nr; ++i) qr_(i, k) /= v0;
        qr_(k, k) = beta;

        for (std::size_t j = k + 1; j < nc; ++j) {
            double w = qr_(k, j);
            for (std::size_t i = k + 1; i < nr; ++i) w += qr_(i, k) * qr_(i, j);
            w *= tau_[k];
            qr_(k, j) -= w;
            for (std::size_t i = k + 1; i < nr; ++i) qr_(i, j) -= w * qr_(i, k);
        }
    }

    const double lead = std::abs(qr_(0, 0));
    rank_ = 0;
    for (std::size_t k = 0; k < nref; ++k) {
        if (std::abs(qr_(k, k)) > rank_tol_rel * lead)
            ++rank_;
        else if (pivot)
            break;  // pivoted diagonals are non-increasing
    }
}

double PivotedQR::r_entry(std::size_t i, std::size_t j) const {
    if (i >= qr_.rows() || j >= qr_.cols())
        throw InvalidArgument("PivotedQR::r_entry: index out of range");
    return i <= j ? qr_(i, j) : 0.0;
}

Matrix PivotedQR::r_block(std::size_t nr, std::size_t nc) const {
    if (nr > qr_.rows() || nc > qr_.cols())
        throw InvalidArgument("PivotedQR::r_block: block exceeds factor size");
    Matrix r(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = i; j < nc; ++j) r(i, j) = qr_(i, j);
    return r;
}

void PivotedQR::apply_reflector(std::size_t k, std::vector<double>& x) const {
    const double t = tau_[k];
    if (t == 0.0) return;
    double w = x[k];
    for (std::size_t i = k + 1; i < qr_.rows(); ++i) w += qr_(i, k) * x[i];
    w *= t;
    x[k] -= w;
    for (std::size_t i = k + 1; i < qr_.rows(); ++i) x[i] -= w * qr_(i, k);
}

std::vector<double> PivotedQR::apply_qt(const std::vector<double>& x) const {
    if (x.size() != qr_.rows()) throw DimensionMismatch("apply_qt: vector length != row count");
    std::vector<double> y = x;
    for (std::size_t k = 0; k < tau_.size(); ++k) apply_reflector(k, y);
    return y;
}

std::vector<double> PivotedQR::apply_q(const std::vector<double>& x) const {
    if (x.size() != qr_.rows()) throw DimensionMismatch("apply_q: vector length != row count");
    std::vector<double> y = x;
    for (std::size_t k = tau_.size(); k-- > 0;) apply_reflector(k, y);
    return y;
}

std::vector<double> solve_upper_triangular(const Matrix& r, const std::vector<double>& rhs) {
    const std::size_t n = rhs.size();
    if (r.rows() < n || r.cols() < n)
        throw DimensionMismatch("solve_upper_triangular: matrix smaller than rhs");
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= r(i, j) * x[j];
        const double d = r(i, i);
        if (std::abs(d) < 1e-300)
            throw SingularDiagonal("solve_upper_triangular: zero diagonal entry");
        x[i] = s / d;
    }
    return x;
}

std::vector<double> min_norm_solution(const Matrix& m, const std::vector<double>& b,
                                      double rank_tol_rel, double consist_tol_rel) {
    if (b.size() != m.rows()) throw DimensionMismatch("min_norm_solution: rhs length != row count");
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return std::vector<double>(m.cols(), 0.0);

    PivotedQR fac(m, rank_tol_rel);
    const std::size_t r = fac.rank();
    std::vector<double> c = fac.apply_qt(b);
    double tail = 0.0;
    for (std::size_t i = r; i < c.size(); ++i) tail += c[i] * c[i];
    if (std::sqrt(tail) > consist_tol_rel * bnorm)
        throw Inconsistent("min_norm_solution: right-hand side not in the range of the matrix");
    if (r == 0)
        throw Inconsistent("min_norm_solution: zero matrix with nonzero right-hand side");

    // Complete the orthogonal decomposition: with W = [R1 R2] (r rows of R),
    // factor W^T = Q2 T2. Then W y = c becomes T2^T (Q2^T y) = c, a lower
    // triangular forward solve, and the minimal-norm y is Q2 [u; 0].
    const std::size_t nc = m.cols();
    Matrix wt(nc, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i; j < nc; ++j) wt(j, i) = fac.r_entry(i, j);
    PivotedQR fac2(wt, rank_tol_rel, /*pivot=*/false);

    std::vector<double> u(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        double s = c[i];
        for (std::size_t j = 0; j < i; ++j) s -= fac2.r_entry(j, i) * u[j];
        const double d = fac2.r_entry(i, i);
        if (std::abs(d) < 1e-300)
            throw SingularDiagonal("min_norm_solution: rank-truncated factor is singular");
        u[i] = s / d;
    }
    std::vector<double> y(nc, 0.0);
    for (std::size_t i = 0; i < r; ++i) y[i] = u[i];
    y = fac2.apply_q(y);

    std::vector<double> v(nc, 0.0);
    for (std::size_t j = 0; j < nc; ++j) v[fac.perm()[j]] = y[j];

    std::vector<double> res = matvec(m, v);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] -= b[i];
    if (norm2(res) > consist_tol_rel * bnorm)
        throw Inconsistent("min_norm_solution: residual exceeds the consistency tolerance");
    return v;
}

double spectral_norm(const Matrix& m) {
    if (m.empty()) throw InvalidArgument("spectral_norm: empty matrix");
    const std::size_t nc = m.cols();
    std::vector<double> x(nc, 1.0 / std::sqrt(static_cast<double>(nc)));
    double sigma = 0.0;
    bool restarted = false;
    for (int it = 0; it < 500; ++it) {
        std::vector<double> y = matvec_transposed(m, matvec(m, x));
        double yn = norm2(y);
        if (yn == 0.0) {
            if (restarted) return 0.0;
            // The all-ones start can sit in the null space; restart from the
            // unit vector of the heaviest column (M^T M e_j = 0 forces
            // M e_j = 0, so this cannot stall again unless M = 0).
            restarted = true;
            std::size_t best = 0;
            double best_norm = -1.0;
            for (std::size_t j = 0; j < nc; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j) * m(i, j);
                if (s > best_norm) {
                    best_norm = s;
                    best = j;
                }
            }
            if (best_norm <= 0.0) return 0.0;
            x.assign(nc, 0.0);
            x[best] = 1.0;
            continue;
        }
        const double next = std::sqrt(yn);
        for (std::size_t j = 0; j < nc; ++j) x[j] = y[j] / yn;
        if (std::abs(next - sigma) <= 1e-10 * next) return next;
        sigma = next;
    }
    return sigma;
}

} // namespace mfd
