#pragma once

#include <vector>

#include "mfd/matrix.hpp"

namespace mfd {

/// Householder QR factorization with optional column pivoting,
/// M P = Q R with |R_11| >= |R_22| >= ... when pivoting is on.
///
/// Q is kept in factored form (the Householder vectors overwrite the
/// strict lower triangle of the work matrix); apply_qt / apply_q apply
/// it without ever forming the dense m-by-m factor.
class PivotedQR {
public:
    explicit PivotedQR(const Matrix& m, double rank_tol_rel = 1e-10, bool pivot = true);

    std::size_t rows() const { return qr_.rows(); }
    std::size_t cols() const { return qr_.cols(); }

    /// Numerical rank: number of diagonal entries with
    /// |R_kk| > rank_tol_rel * |R_00| (0 if the matrix is zero).
    std::size_t rank() const { return rank_; }

    /// perm()[j] is the original column placed at position j.
    const std::vector<std::size_t>& perm() const { return perm_; }

    double r_entry(std::size_t i, std::size_t j) const;

    /// The leading nr-by-nc block of R as a dense matrix.
    Matrix r_block(std::size_t nr, std::size_t nc) const;

    /// y = Q^T x (x has rows() entries).
    std::vector<double> apply_qt(const std::vector<double>& x) const;

    /// y = Q x.
    std::vector<double> apply_q(const std::vector<double>& x) const;

private:
    Matrix qr_;
    std::vector<double> tau_;
    std::vector<std::size_t> perm_;
    std::size_t rank_ = 0;

    void apply_reflector(std::size_t k, std::vector<double>& x) const;
};

/// Back substitution with R upper triangular (uses the leading n-by-n block).
/// Throws SingularDiagonal when a pivot magnitude falls below 1e-300.
std::vector<double> solve_upper_triangular(const Matrix& r, const std::vector<double>& rhs);

/// Minimal 2-norm solution of M x = b for a possibly rank-deficient M,
/// via a complete orthogonal decomposition (pivoted QR of M followed by
/// an unpivoted QR of the transposed leading rows). Throws Inconsistent
/// when b is not in the range of M up to consist_tol_rel * ||b||.
std::vector<double> min_norm_solution(const Matrix& m, const std::vector<double>& b,
                                      double rank_tol_rel = 1e-10,
                                      double consist_tol_rel = 1e-8);

/// Largest singular value by power iteration on M^T M
/// (at most 500 iterations, relative change tolerance 1e-10).
double spectral_norm(const Matrix& m);

} // namespace mfd
