#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace mfd {

using Point = std::vector<double>;

inline double dist_sq(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

inline double dist(const Point& a, const Point& b) {
    return std::sqrt(dist_sq(a, b));
}

inline double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace mfd
