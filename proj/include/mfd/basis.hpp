#pragma once

#include <vector>

#include "mfd/diff_operator.hpp"
#include "mfd/multi_index.hpp"
#include "mfd/point.hpp"

namespace mfd {

/// Shifted-and-scaled monomial basis of the polynomials of total degree < q:
/// p_alpha(x) = ((x - center)/scale)^alpha, listed in graded order with the
/// constant first. The first basis function is identically 1 and all others
/// vanish at the center.
struct ScaledBasis {
    Point center;
    double scale = 1.0;
    int order = 0;  // q
    std::vector<MultiIndex> indices;

    int dim() const { return static_cast<int>(center.size()); }
    std::size_t size() const { return indices.size(); }
};

/// Builds the basis centered at z with scale = max_j ||y_j - z||_2.
ScaledBasis make_scaled_basis(const Point& z, const std::vector<Point>& Y, int q);

/// Values of all basis polynomials at y.
std::vector<double> eval_basis_at(const ScaledBasis& basis, const Point& y);

/// b_i = (D p_i)(center). Nonzero exactly for the indices appearing in D:
/// the derivative of ((x-z)/h)^alpha of order beta at z is alpha! h^{-|alpha|}
/// when beta == alpha and zero otherwise.
std::vector<double> apply_operator_at_center(const DiffOperator& op, const ScaledBasis& basis);

} // namespace mfd
