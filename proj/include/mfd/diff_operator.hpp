#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mfd/multi_index.hpp"
#include "mfd/point.hpp"

namespace mfd {

/// Linear differential operator sum_beta c_beta(x) d^beta. Coefficients are
/// functions of the evaluation point; constant coefficients are the common
/// case. Terms with identically zero coefficients should not be listed.
class DiffOperator {
public:
    struct Term {
        MultiIndex index;
        std::function<double(const Point&)> coeff;
    };

    DiffOperator(int dim, std::vector<Term> terms);

    int dim() const { return dim_; }
    int order() const { return order_; }  // kappa: max |beta| over the terms
    const std::vector<Term>& terms() const { return terms_; }

    /// Coefficient of the zero multi-index evaluated at z; 0 if absent.
    double c0(const Point& z) const;

    // Common constant-coefficient operators.
    static DiffOperator laplacian(int d);
    static DiffOperator partial(const MultiIndex& beta);     // d^beta
    static DiffOperator identity(int d);
    static DiffOperator laplacian_plus_dx(int d);

    /// Named lookup used by the CLI: laplace, dx, dy, identity, laplace+dx.
    static DiffOperator named(const std::string& name, int d);

private:
    int dim_;
    int order_;
    std::vector<Term> terms_;
};

} // namespace mfd
