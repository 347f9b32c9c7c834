#include "mfd/multi_index.hpp"

namespace mfd {

MultiIndex::MultiIndex(std::vector<int> exponents) : e_(std::move(exponents)) {
    if (e_.empty()) throw InvalidArgument("MultiIndex: empty exponent vector");
    for (int v : e_)
        if (v < 0) throw InvalidArgument("MultiIndex: negative exponent");
}

int MultiIndex::total() const {
    int s = 0;
    for (int v : e_) s += v;
    return s;
}

double MultiIndex::factorial() const {
    if (total() > 20) throw InvalidArgument("MultiIndex::factorial: |alpha| > 20");
    std::uint64_t f = 1;
    for (int v : e_)
        for (int k = 2; k <= v; ++k) f *= static_cast<std::uint64_t>(k);
    return static_cast<double>(f);
}

std::size_t dim_poly(int d, int q) {
    if (d < 1) throw InvalidArgument("dim_poly: d must be >= 1");
    if (q < 0) throw InvalidArgument("dim_poly: q must be >= 0");
    if (q == 0) return 0;
    // binomial(q-1+d, d), exact in 64-bit for the orders in use
    std::uint64_t num = 1, den = 1;
    for (int k = 1; k <= d; ++k) {
        num *= static_cast<std::uint64_t>(q - 1 + k);
        den *= static_cast<std::uint64_t>(k);
    }
    return static_cast<std::size_t>(num / den);
}

namespace {

void enumerate_grade(int remaining, std::size_t pos, std::vector<int>& cur,
                     std::vector<MultiIndex>& out) {
    if (pos + 1 == cur.size()) {
        cur[pos] = remaining;
        out.push_back(MultiIndex(cur));
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        cur[pos] = e;
        enumerate_grade(remaining - e, pos + 1, cur, out);
    }
}

} // namespace

std::vector<MultiIndex> graded_monomial_indices(int d, int q) {
    if (d < 1) throw InvalidArgument("graded_monomial_indices: d must be >= 1");
    if (q < 1) throw InvalidArgument("graded_monomial_indices: q must be >= 1");
    std::vector<MultiIndex> out;
    out.reserve(dim_poly(d, q));
    std::vector<int> cur(static_cast<std::size_t>(d), 0);
    for (int grade = 0; grade < q; ++grade) enumerate_grade(grade, 0, cur, out);
    return out;
}

} // namespace mfd
