#include "mfd/diff_operator.hpp"

namespace mfd {

namespace {

std::function<double(const Point&)> constant(double c) {
    return [c](const Point&) { return c; };
}

} // namespace

DiffOperator::DiffOperator(int dim, std::vector<Term> terms)
    : dim_(dim), order_(0), terms_(std::move(terms)) {
    if (dim_ < 1) throw InvalidArgument("DiffOperator: dim must be >= 1");
    if (terms_.empty()) throw InvalidArgument("DiffOperator: no terms");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const Term& t = terms_[i];
        if (t.index.dim() != dim_) throw DimensionMismatch("DiffOperator: term dimension mismatch");
        if (!t.coeff) throw InvalidArgument("DiffOperator: null coefficient");
        for (std::size_t j = 0; j < i; ++j)
            if (terms_[j].index == t.index)
                throw InvalidArgument("DiffOperator: duplicate term index");
        if (t.index.total() > order_) order_ = t.index.total();
    }
}

double DiffOperator::c0(const Point& z) const {
    for (const Term& t : terms_)
        if (t.index.total() == 0) return t.coeff(z);
    return 0.0;
}

DiffOperator DiffOperator::laplacian(int d) {
    std::vector<Term> terms;
    for (int k = 0; k < d; ++k) {
        std::vector<int> e(static_cast<std::size_t>(d), 0);
        e[static_cast<std::size_t>(k)] = 2;
        terms.push_back({MultiIndex(e), constant(1.0)});
    }
    return DiffOperator(d, std::move(terms));
}

DiffOperator DiffOperator::partial(const MultiIndex& beta) {
    return DiffOperator(beta.dim(), {{beta, constant(1.0)}});
}

DiffOperator DiffOperator::identity(int d) {
    return DiffOperator(d, {{MultiIndex::zero(d), constant(1.0)}});
}

DiffOperator DiffOperator::laplacian_plus_dx(int d) {
    std::vector<Term> terms;
    for (int k = 0; k < d; ++k) {
        std::vector<int> e(static_cast<std::size_t>(d), 0);
        e[static_cast<std::size_t>(k)] = 2;
        terms.push_back({MultiIndex(e), constant(1.0)});
    }
    std::vector<int> ex(static_cast<std::size_t>(d), 0);
    ex[0] = 1;
    terms.push_back({MultiIndex(ex), constant(1.0)});
    return DiffOperator(d, std::move(terms));
}

DiffOperator DiffOperator::named(const std::string& name, int d) {
    if (name == "laplace") return laplacian(d);
    if (name == "identity") return identity(d);
    if (name == "laplace+dx") return laplacian_plus_dx(d);
    if (name == "dx") {
        std::vector<int> e(static_cast<std::size_t>(d), 0);
        e[0] = 1;
        return partial(MultiIndex(e));
    }
    if (name == "dy") {
        if (d < 2) throw InvalidArgument("operator dy needs d >= 2");
        std::vector<int> e(static_cast<std::size_t>(d), 0);
        e[1] = 1;
        return partial(MultiIndex(e));
    }
    throw InvalidArgument("unknown operator name: " + name);
}

} // namespace mfd
