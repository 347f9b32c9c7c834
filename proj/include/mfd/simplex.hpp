#pragma once

#include <vector>

#include "mfd/matrix.hpp"

namespace mfd {

struct LpResult {
    std::vector<double> w;
    double objective = 0.0;
};

/// Minimizes sum_j costs_j * |w_j| subject to A w = b.
///
/// Solved as a linear program via the split w = u - v with u, v >= 0 and a
/// dense two-phase primal simplex using Bland's rule. Because the u_j and
/// v_j columns are negatives of each other, at most one of them is ever
/// basic, so the returned w has at most rank(A) nonzero components.
///
/// costs must be non-negative; a zero cost is allowed (used for the center
/// column, whose weight does not enter the weighted 1-norm). The objective
/// stays bounded below by 0 regardless.
LpResult lp_min_weighted_l1(const Matrix& a, const std::vector<double>& b,
                            const std::vector<double>& costs);

} // namespace mfd
