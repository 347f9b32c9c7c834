#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "mfd/errors.hpp"
#include "mfd/matrix.hpp"
#include "mfd/point.hpp"
#include "mfd/qr.hpp"
#include "oracles.hpp"

using mfd::Matrix;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t nr, std::size_t nc) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j) m(i, j) = g(rng);
    return m;
}

// Exact-rank matrix as a product of two full-rank factors.
Matrix random_rank_matrix(std::mt19937_64& rng, std::size_t nr, std::size_t nc, std::size_t r) {
    return matmul(random_matrix(rng, nr, r), random_matrix(rng, r, nc));
}

double frob(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

// Largest entry of |M P - Q R|, with Q applied in factored form.
double reconstruction_error(const Matrix& m, const mfd::PivotedQR& fac) {
    double worst = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        std::vector<double> rcol(m.rows(), 0.0);
        for (std::size_t i = 0; i < m.rows(); ++i) rcol[i] = fac.r_entry(i, j);
        const std::vector<double> qr = fac.apply_q(rcol);
        for (std::size_t i = 0; i < m.rows(); ++i)
            worst = std::max(worst, std::abs(qr[i] - m(i, fac.perm()[j])));
    }
    return worst;
}

} // namespace

TEST_CASE("QR reconstructs the permuted matrix") {
    std::mt19937_64 rng(2024);
    const std::size_t shapes[][2] = {{5, 5}, {8, 4}, {4, 8}, {10, 3}, {3, 10}};
    for (const auto& sh : shapes) {
        const Matrix m = random_matrix(rng, sh[0], sh[1]);
        const mfd::PivotedQR fac(m);
        CHECK(reconstruction_error(m, fac) <= 1e-12 * std::max(1.0, frob(m)));

        // Pivoting orders the diagonal by non-increasing magnitude.
        for (std::size_t k = 1; k < std::min(sh[0], sh[1]); ++k)
            CHECK(std::abs(fac.r_entry(k, k)) <= std::abs(fac.r_entry(k - 1, k - 1)) * (1 + 1e-12));

        // Q is orthogonal, so applying it preserves norms.
        std::vector<double> x(sh[0]);
        for (auto& e : x) e = std::normal_distribution<double>()(rng);
        CHECK(mfd::norm2(fac.apply_qt(x)) == doctest::Approx(mfd::norm2(x)).epsilon(1e-13));
        const auto roundtrip = fac.apply_q(fac.apply_qt(x));
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(roundtrip[i] == doctest::Approx(x[i]).epsilon(1e-12));
    }

    // The unpivoted variant leaves the columns in place.
    const Matrix m = random_matrix(rng, 6, 4);
    const mfd::PivotedQR fac(m, 1e-10, /*pivot=*/false);
    for (std::size_t j = 0; j < 4; ++j) CHECK(fac.perm()[j] == j);
    CHECK(reconstruction_error(m, fac) <= 1e-12 * std::max(1.0, frob(m)));
}

TEST_CASE("numerical rank") {
    CHECK(mfd::PivotedQR(Matrix::identity(6)).rank() == 6);
    CHECK(mfd::PivotedQR(Matrix(4, 4)).rank() == 0);

    // Rank-1 outer product.
    Matrix m(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) m(i, j) = (1.0 + i) * (2.0 + j);
    CHECK(mfd::PivotedQR(m).rank() == 1);

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t nr = 3 + rng() % 6, nc = 3 + rng() % 6;
        const std::size_t r = 1 + rng() % std::min(nr, nc);
        const Matrix a = random_rank_matrix(rng, nr, nc, r);
        CHECK(mfd::PivotedQR(a).rank() == r);
        CHECK(oracles::rank(a) == r);  // the oracle agrees on these
    }

    CHECK_THROWS_AS(mfd::PivotedQR(Matrix{}), mfd::InvalidArgument);
    CHECK_THROWS_AS(mfd::PivotedQR(Matrix::identity(2), 2.0), mfd::InvalidArgument);
}

TEST_CASE("upper triangular solve") {
    Matrix r(2, 2);
    r(0, 0) = 2.0;
    r(0, 1) = 1.0;
    r(1, 1) = 4.0;
    const auto x = mfd::solve_upper_triangular(r, {4.0, 8.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));

    Matrix sing(2, 2);
    sing(0, 0) = 1.0;  // zero at (1,1)
    CHECK_THROWS_AS(mfd::solve_upper_triangular(sing, {1.0, 1.0}), mfd::SingularDiagonal);

    // Leading-block semantics: a larger matrix solves against its top corner.
    Matrix big(4, 4);
    big(0, 0) = 1.0;
    big(1, 1) = 1.0;
    big(2, 2) = 0.0;  // outside the 2x2 block, must not matter
    const auto y = mfd::solve_upper_triangular(big, {3.0, -2.0});
    CHECK(y[0] == 3.0);
    CHECK(y[1] == -2.0);
}

TEST_CASE("minimum-norm solve: underdetermined example") {
    Matrix m(1, 2);
    m(0, 0) = 1.0;
    m(0, 1) = 1.0;
    const auto v = mfd::min_norm_solution(m, {2.0});
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(1.0));
}

TEST_CASE("minimum-norm solve matches the pseudo-inverse oracle") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t nr = 2 + rng() % 7, nc = 2 + rng() % 7;
        const std::size_t r = 1 + rng() % std::min(nr, nc);
        const Matrix a = random_rank_matrix(rng, nr, nc, r);

        // Consistent right-hand side by construction.
        std::vector<double> x0(nc);
        std::normal_distribution<double> g;
        for (auto& e : x0) e = g(rng);
        const std::vector<double> b = matvec(a, x0);

        const auto v = mfd::min_norm_solution(a, b);
        const auto ref = oracles::min_norm(a, b);
        for (std::size_t j = 0; j < nc; ++j)
            CHECK(v[j] == doctest::Approx(ref[j]).epsilon(1e-8).scale(1.0));

        // Any solution is at least as long, and the minimizer is orthogonal
        // to the null space.
        const double vn = mfd::norm2(v);
        CHECK(vn <= mfd::norm2(x0) * (1.0 + 1e-10));
        const Matrix ns = oracles::null_space(a);
        for (std::size_t k = 0; k < ns.cols(); ++k) {
            double dot = 0.0;
            for (std::size_t j = 0; j < nc; ++j) dot += v[j] * ns(j, k);
            CHECK(std::abs(dot) <= 1e-9 * std::max(1.0, vn));
        }
    }
}

TEST_CASE("minimum-norm solve rejects inconsistent systems") {
    Matrix m(2, 2);
    m(0, 0) = 1.0;  // second row identically zero
    CHECK_THROWS_AS(mfd::min_norm_solution(m, {1.0, 1.0}), mfd::Inconsistent);

    // Inconsistency smaller than the tolerance is accepted.
    const auto v = mfd::min_norm_solution(m, {1.0, 1e-12});
    CHECK(v[0] == doctest::Approx(1.0));

    // Zero right-hand side short-circuits to the zero solution.
    const auto z = mfd::min_norm_solution(m, {0.0, 0.0});
    CHECK(z == std::vector<double>{0.0, 0.0});
}

TEST_CASE("spectral norm") {
    Matrix d(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    CHECK(mfd::spectral_norm(d) == doctest::Approx(3.0));

    // Nilpotent: power iteration must survive M^T M x = 0 on the first try.
    Matrix nil(2, 2);
    nil(0, 1) = 1.0;
    CHECK(mfd::spectral_norm(nil) == doctest::Approx(1.0));

    CHECK(mfd::spectral_norm(Matrix(3, 2)) == 0.0);

    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t nr = 2 + rng() % 6, nc = 2 + rng() % 6;
        const Matrix m = random_matrix(rng, nr, nc);
        const double ref = oracles::spectral_norm(m);
        CHECK(mfd::spectral_norm(m) == doctest::Approx(ref).epsilon(1e-8));
    }
}
