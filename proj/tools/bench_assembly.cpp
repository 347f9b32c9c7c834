// Benchmark: global stencil assembly, single-threaded reference vs the
// OpenMP-parallel path, on a perturbed unit-square grid. The per-node
// stencil computations are independent, so the parallel path should scale
// with the core count while producing the identical system.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "mfd/nodes.hpp"
#include "mfd/pde.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool identical(const mfd::SparseSystem& a, const mfd::SparseSystem& b) {
    if (a.n != b.n || a.triplets.size() != b.triplets.size() || a.rhs != b.rhs) return false;
    for (std::size_t i = 0; i < a.triplets.size(); ++i) {
        if (a.triplets[i].row != b.triplets[i].row || a.triplets[i].col != b.triplets[i].col ||
            a.triplets[i].value != b.triplets[i].value)
            return false;
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    int n_per_side = 41;
    int repeats = 3;
    if (argc > 1) n_per_side = std::atoi(argv[1]);
    if (argc > 2) repeats = std::atoi(argv[2]);
    if (n_per_side < 3 || repeats < 1) {
        std::fprintf(stderr, "usage: %s [n_per_side >= 3] [repeats >= 1]\n", argv[0]);
        return 1;
    }

    const mfd::NodeSet x = mfd::gen_unit_square(n_per_side, 0.2, 42);
    mfd::AssemblyOptions opts;
    opts.method = mfd::WeightMethod::sparse_qr;
    opts.q = 4;
    opts.m_neighbors = 20;

    const auto f = [](const mfd::Point& p) { return mfd::manufactured_f(p); };
    const auto g = [](const mfd::Point&) { return 0.0; };

#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled in this build\n");
#endif
    std::printf("grid %dx%d (%zu nodes), q=%d, m=%zu, method=sparse_qr, %d repeat(s)\n",
                n_per_side, n_per_side, x.size(), opts.q, opts.m_neighbors, repeats);

    double t_serial = 1e300, t_parallel = 1e300;
    mfd::SparseSystem s_serial, s_parallel;
    for (int r = 0; r < repeats; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        s_serial = mfd::assemble_poisson_serial(x, opts, f, g);
        t_serial = std::min(t_serial, seconds_since(t0));

        t0 = std::chrono::steady_clock::now();
        s_parallel = mfd::assemble_poisson(x, opts, f, g);
        t_parallel = std::min(t_parallel, seconds_since(t0));
    }

    std::printf("serial:   %.3f s\n", t_serial);
    std::printf("parallel: %.3f s\n", t_parallel);
    std::printf("speedup:  %.2fx\n", t_serial / t_parallel);
    std::printf("outputs identical: %s\n", identical(s_serial, s_parallel) ? "yes" : "NO");
    return identical(s_serial, s_parallel) ? 0 : 1;
}
