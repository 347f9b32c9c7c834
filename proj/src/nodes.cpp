#include "mfd/nodes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "mfd/errors.hpp"

namespace mfd {

namespace {

void check_query(const NodeSet& x, const Point& p, std::size_t k) {
    if (static_cast<int>(p.size()) != x.dim)
        throw DimensionMismatch("knn: query dimension differs from node set");
    if (k < 1) throw InvalidArgument("knn: k must be at least 1");
    if (k > x.size()) throw KTooLarge("knn: k exceeds the number of nodes");
}

// Shared ordering: ascending distance, lowest index on ties. Both the brute
// force and the accelerated path sort with exactly this comparison on
// exactly the same squared distances, which is what makes them bit-identical.
std::vector<std::size_t> sort_and_trim(std::vector<std::pair<double, std::size_t>>& cand,
                                       std::size_t k) {
    std::sort(cand.begin(), cand.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = cand[i].second;
    return out;
}

} // namespace

std::vector<std::size_t> knn_brute_force(const NodeSet& x, const Point& p, std::size_t k) {
    check_query(x, p, k);
    std::vector<std::pair<double, std::size_t>> cand(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) cand[i] = {dist_sq(x.points[i], p), i};
    return sort_and_trim(cand, k);
}

std::vector<std::size_t> knn(const NodeSet& x, const Point& p, std::size_t k) {
    return knn_brute_force(x, p, k);
}

KnnIndex::KnnIndex(const NodeSet& x) : nodes_(&x) {
    const int d = x.dim;
    if (d < 1) throw InvalidArgument("KnnIndex: node set has no dimension");
    const std::size_t n = x.size();
    cells_per_axis_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::cbrt(static_cast<double>(n))));
    lo_.assign(d, 0.0);
    width_.assign(d, 0.0);
    std::vector<double> hi(d, 0.0);
    if (n > 0) {
        lo_ = x.points[0];
        hi = x.points[0];
        for (const Point& pt : x.points)
            for (int kk = 0; kk < d; ++kk) {
                lo_[kk] = std::min(lo_[kk], pt[kk]);
                hi[kk] = std::max(hi[kk], pt[kk]);
            }
    }
    min_width_ = 0.0;
    for (int kk = 0; kk < d; ++kk) {
        width_[kk] = (hi[kk] - lo_[kk]) / static_cast<double>(cells_per_axis_);
        if (cells_per_axis_ > 1 && width_[kk] > 0.0)
            min_width_ = min_width_ == 0.0 ? width_[kk] : std::min(min_width_, width_[kk]);
    }
    std::size_t total = 1;
    for (int kk = 0; kk < d; ++kk) total *= cells_per_axis_;
    cell_.assign(total, {});
    for (std::size_t i = 0; i < n; ++i) cell_[cell_id(cell_coords(x.points[i]))].push_back(i);
}

std::vector<std::size_t> KnnIndex::cell_coords(const Point& p) const {
    const int d = nodes_->dim;
    std::vector<std::size_t> c(d, 0);
    for (int kk = 0; kk < d; ++kk) {
        if (width_[kk] <= 0.0) continue;
        double t = (p[kk] - lo_[kk]) / width_[kk];
        if (t < 0.0) t = 0.0;
        std::size_t ci = static_cast<std::size_t>(t);
        if (ci >= cells_per_axis_) ci = cells_per_axis_ - 1;
        c[kk] = ci;
    }
    return c;
}

std::size_t KnnIndex::cell_id(const std::vector<std::size_t>& c) const {
    std::size_t id = 0;
    for (std::size_t v : c) id = id * cells_per_axis_ + v;
    return id;
}

std::vector<std::size_t> KnnIndex::query(const Point& p, std::size_t k) const {
    const NodeSet& x = *nodes_;
    check_query(x, p, k);
    const int d = x.dim;
    const std::vector<std::size_t> base = cell_coords(p);

    // Widest ring that can contain any cell.
    std::size_t ring_max = 0;
    for (int kk = 0; kk < d; ++kk) {
        ring_max = std::max(ring_max, base[kk]);
        ring_max = std::max(ring_max, cells_per_axis_ - 1 - base[kk]);
    }

    std::vector<std::pair<double, std::size_t>> cand;
    std::vector<long long> off(d, 0);

    // Collect every point whose cell sits at Chebyshev ring exactly `ring`
    // around the base cell.
    auto scan_ring = [&](std::size_t ring) {
        auto rec = [&](auto&& self, int axis, bool pinned) -> void {
            if (axis == d) {
                if (!pinned) return;  // interior of the ring, already seen
                std::vector<std::size_t> c(d);
                for (int kk = 0; kk < d; ++kk)
                    c[kk] = static_cast<std::size_t>(static_cast<long long>(base[kk]) + off[kk]);
                for (std::size_t idx : cell_[cell_id(c)])
                    cand.emplace_back(dist_sq(x.points[idx], p), idx);
                return;
            }
            const long long r = static_cast<long long>(ring);
            for (long long o = -r; o <= r; ++o) {
                const long long v = static_cast<long long>(base[axis]) + o;
                if (v < 0 || v >= static_cast<long long>(cells_per_axis_)) continue;
                off[axis] = o;
                self(self, axis + 1, pinned || (o == -r || o == r) || ring == 0);
            }
        };
        rec(rec, 0, false);
    };

    for (std::size_t ring = 0; ring <= ring_max; ++ring) {
        scan_ring(ring);
        if (cand.size() >= k && min_width_ > 0.0 && ring > 0) {
            // Any point not yet seen lies at least ring * min_width_ away.
            // Strict comparison: an unseen point at exactly that distance
            // could still win a tie on index, so only stop when the k-th
            // candidate is strictly closer.
            std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1),
                             cand.end());
            const double bound = static_cast<double>(ring) * min_width_;
            if (cand[k - 1].first < bound * bound) break;
        }
    }
    return sort_and_trim(cand, k);
}

NodeSet gen_unit_square(int n_per_side, double perturbation, unsigned long long seed) {
    if (n_per_side < 3) throw InvalidArgument("gen_unit_square: need at least 3 nodes per side");
    if (!(perturbation >= 0.0 && perturbation < 0.5))
        throw InvalidArgument("gen_unit_square: perturbation must lie in [0, 0.5)");
    const int n = n_per_side;
    const double h = 1.0 / static_cast<double>(n - 1);
    std::mt19937_64 rng(seed);
    auto canonical = [&rng]() {
        return static_cast<double>(rng() >> 11) * 0x1p-53;  // uniform in [0,1)
    };
    NodeSet out;
    out.dim = 2;
    out.points.reserve(static_cast<std::size_t>(n) * n);
    out.boundary.reserve(static_cast<std::size_t>(n) * n);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const bool bnd = ix == 0 || ix == n - 1 || iy == 0 || iy == n - 1;
            double px = ix * h, py = iy * h;
            if (!bnd && perturbation > 0.0) {
                px += (2.0 * canonical() - 1.0) * perturbation * h;
                py += (2.0 * canonical() - 1.0) * perturbation * h;
            }
            out.points.push_back({px, py});
            out.boundary.push_back(bnd);
        }
    }
    return out;
}

NodeSet gen_halton(std::size_t n, int d) {
    if (n < 1) throw InvalidArgument("gen_halton: need at least one point");
    if (d < 1 || d > 4) throw InvalidArgument("gen_halton: dimension must be 1..4");
    static const int bases[4] = {2, 3, 5, 7};
    NodeSet out;
    out.dim = d;
    out.points.reserve(n);
    out.boundary.assign(n, false);
    for (std::size_t i = 1; i <= n; ++i) {
        Point pt(d);
        for (int kk = 0; kk < d; ++kk) {
            const int b = bases[kk];
            double f = 1.0 / b, r = 0.0;
            for (std::size_t m = i; m > 0; m /= static_cast<std::size_t>(b)) {
                r += f * static_cast<double>(m % static_cast<std::size_t>(b));
                f /= b;
            }
            pt[kk] = r;
        }
        out.points.push_back(std::move(pt));
    }
    return out;
}

NodeSet read_nodes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_nodes: cannot open " + path);
    int d = 0;
    long long n = 0;
    if (!(in >> d >> n) || d < 1 || n < 1)
        throw IoError("read_nodes: bad header in " + path + " (expected `d N`)");
    NodeSet raw;
    raw.dim = d;
    raw.points.reserve(static_cast<std::size_t>(n));
    raw.boundary.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        Point pt(d);
        for (int kk = 0; kk < d; ++kk)
            if (!(in >> pt[kk]))
                throw IoError("read_nodes: bad coordinate at node " + std::to_string(i + 1));
        int flag = 0;
        if (!(in >> flag) || (flag != 0 && flag != 1))
            throw IoError("read_nodes: bad boundary flag at node " + std::to_string(i + 1));
        raw.points.push_back(std::move(pt));
        raw.boundary.push_back(flag == 1);
    }

    // Deduplicate points closer than 1e-14, keeping the lowest index.
    // Lexicographic sort brings near-equal points together so the scan only
    // compares within a window of equal-to-tolerance first coordinates.
    const double tol = 1e-14;
    const std::size_t total = raw.points.size();
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&raw](std::size_t a, std::size_t b) {
        return raw.points[a] < raw.points[b];
    });
    std::vector<bool> drop(total, false);
    for (std::size_t a = 0; a < total; ++a) {
        if (drop[order[a]]) continue;
        const Point& pa = raw.points[order[a]];
        for (std::size_t b = a + 1; b < total; ++b) {
            const Point& pb = raw.points[order[b]];
            if (pb[0] - pa[0] > tol) break;
            if (drop[order[b]]) continue;
            if (dist_sq(pa, pb) <= tol * tol) {
                const std::size_t lose = std::max(order[a], order[b]);
                drop[lose] = true;  // the lower original index survives
                if (lose == order[a]) break;
            }
        }
    }
    NodeSet out;
    out.dim = d;
    for (std::size_t i = 0; i < total; ++i) {
        if (drop[i]) continue;
        out.points.push_back(raw.points[i]);
        out.boundary.push_back(raw.boundary[i]);
    }
    return out;
}

void write_nodes(const std::string& path, const NodeSet& x) {
    std::ofstream out(path);
    if (!out) throw IoError("write_nodes: cannot open " + path);
    out << x.dim << ' ' << x.size() << '\n';
    char buf[64];
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int kk = 0; kk < x.dim; ++kk) {
            std::snprintf(buf, sizeof buf, "%.17g", x.points[i][kk]);
            out << buf << ' ';
        }
        out << (x.boundary[i] ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("write_nodes: write failed for " + path);
}

} // namespace mfd
