#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfd/errors.hpp"

namespace mfd {

/// Exponent vector of a d-variate monomial. All entries are non-negative.
class MultiIndex {
public:
    explicit MultiIndex(std::vector<int> exponents);
    static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(dim, 0)); }

    int dim() const { return static_cast<int>(e_.size()); }
    int total() const;  // |alpha|
    int operator[](std::size_t k) const { return e_[k]; }
    const std::vector<int>& exponents() const { return e_; }

    /// Product of the componentwise factorials, computed exactly in 64-bit
    /// integers. Only supported for |alpha| <= 20.
    double factorial() const;

    bool operator==(const MultiIndex& o) const { return e_ == o.e_; }
    bool operator!=(const MultiIndex& o) const { return e_ != o.e_; }

private:
    std::vector<int> e_;
};

/// dim of the space of d-variate polynomials of total degree < q:
/// binomial(q-1+d, d). Zero when q == 0.
std::size_t dim_poly(int d, int q);

/// All multi-indices with |alpha| < q, graded: grade ascending, and within a
/// grade the first coordinate decreases first. The zero index comes first.
std::vector<MultiIndex> graded_monomial_indices(int d, int q);

} // namespace mfd
