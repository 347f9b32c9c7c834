#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mfd/point.hpp"

namespace mfd {

/// Point cloud with boundary flags. Deduplicated on load (see read_nodes).
struct NodeSet {
    int dim = 0;
    std::vector<Point> points;
    std::vector<bool> boundary;

    std::size_t size() const { return points.size(); }
};

/// Indices of the k nearest points to x, ascending by distance, ties broken
/// by lowest index. Reference implementation: scans every point.
std::vector<std::size_t> knn_brute_force(const NodeSet& x, const Point& p, std::size_t k);

/// Uniform-grid-bucket accelerator. Returns results identical to
/// knn_brute_force (same distances, same tie-breaking).
class KnnIndex {
public:
    explicit KnnIndex(const NodeSet& x);

    std::vector<std::size_t> query(const Point& p, std::size_t k) const;

private:
    const NodeSet* nodes_;
    std::size_t cells_per_axis_ = 1;
    std::vector<double> lo_, width_;          // per axis
    std::vector<std::vector<std::size_t>> cell_;  // point indices per cell
    double min_width_ = 0.0;                  // smallest width among split axes

    std::vector<std::size_t> cell_coords(const Point& p) const;
    std::size_t cell_id(const std::vector<std::size_t>& c) const;
};

/// Convenience wrapper around the reference implementation.
std::vector<std::size_t> knn(const NodeSet& x, const Point& p, std::size_t k);

/// Tensor grid on the unit square with spacing 1/(n_per_side-1). Interior
/// nodes are displaced by uniform offsets in [-perturbation*h, +perturbation*h]
/// per coordinate (deterministic in seed); boundary nodes stay exact and are
/// flagged. Points are listed row by row (y outer, x inner).
NodeSet gen_unit_square(int n_per_side, double perturbation, unsigned long long seed);

/// First N points of the Halton sequence (bases 2, 3, 5, 7) in [0,1]^d,
/// starting at index 1. No boundary flags.
NodeSet gen_halton(std::size_t n, int d);

/// Node file format: first line `d N`, then N whitespace-separated lines of
/// d coordinates followed by an integer flag (0 interior, 1 boundary).
/// Points closer than 1e-14 are deduplicated keeping the lowest index.
NodeSet read_nodes(const std::string& path);
void write_nodes(const std::string& path, const NodeSet& x);

} // namespace mfd
