#include "mfd/basis.hpp"

#include <cmath>

#include "mfd/errors.hpp"

namespace mfd {

ScaledBasis make_scaled_basis(const Point& z, const std::vector<Point>& Y, int q) {
    const int d = static_cast<int>(z.size());
    if (d < 1) throw InvalidArgument("make_scaled_basis: center must have dimension >= 1");
    if (q < 1) throw InvalidArgument("make_scaled_basis: order q must be >= 1");
    if (Y.empty()) throw InvalidArgument("make_scaled_basis: node set is empty");
    double h2 = 0.0;
    for (const Point& y : Y) {
        if (static_cast<int>(y.size()) != d)
            throw DimensionMismatch("make_scaled_basis: node dimension differs from center");
        h2 = std::max(h2, dist_sq(y, z));
    }
    const double h = std::sqrt(h2);
    if (h == 0.0)
        throw AllNodesCoincide("make_scaled_basis: all nodes coincide with the center");
    ScaledBasis b;
    b.center = z;
    b.scale = h;
    b.order = q;
    b.indices = graded_monomial_indices(d, q);
    return b;
}

std::vector<double> eval_basis_at(const ScaledBasis& basis, const Point& y) {
    const int d = basis.dim();
    if (static_cast<int>(y.size()) != d)
        throw DimensionMismatch("eval_basis_at: point dimension differs from basis");
    // Powers of each scaled coordinate up to q-1, so each monomial is a
    // d-fold table lookup instead of repeated pow() calls.
    const int q = basis.order;
    std::vector<double> pow_table(static_cast<std::size_t>(d) * q);
    for (int k = 0; k < d; ++k) {
        const double t = (y[k] - basis.center[k]) / basis.scale;
        double acc = 1.0;
        for (int e = 0; e < q; ++e) {
            pow_table[static_cast<std::size_t>(k) * q + e] = acc;
            acc *= t;
        }
    }
    std::vector<double> vals(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const MultiIndex& alpha = basis.indices[i];
        double v = 1.0;
        for (int k = 0; k < d; ++k)
            v *= pow_table[static_cast<std::size_t>(k) * q + alpha[k]];
        vals[i] = v;
    }
    return vals;
}

std::vector<double> apply_operator_at_center(const DiffOperator& op, const ScaledBasis& basis) {
    if (op.dim() != basis.dim())
        throw DimensionMismatch("apply_operator_at_center: operator dimension differs from basis");
    if (basis.order <= op.order())
        throw OrderTooLow("apply_operator_at_center: exactness order q must exceed the operator order");
    std::vector<double> b(basis.size(), 0.0);
    for (const DiffOperator::Term& term : op.terms()) {
        // Find the basis slot whose multi-index matches this derivative.
        for (std::size_t i = 0; i < basis.size(); ++i) {
            if (basis.indices[i] == term.index) {
                const double c = term.coeff(basis.center);
                b[i] += c * static_cast<double>(term.index.factorial())
                          * std::pow(basis.scale, -static_cast<double>(term.index.total()));
                break;
            }
        }
    }
    return b;
}

} // namespace mfd
