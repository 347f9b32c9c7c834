// Command-line front end: stencil computation, sparsification statistics,
// growth-function diagnostics, and the Poisson demo solver.
//
// Exit codes: 0 success, 1 usage/parse/IO errors, 2 infinite growth function
// (no exact stencil exists on the given geometry).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mfd/errors.hpp"
#include "mfd/multi_index.hpp"
#include "mfd/nodes.hpp"
#include "mfd/pde.hpp"
#include "mfd/stencil.hpp"

namespace {

// %.17g round-trips doubles exactly, which the CSV reports rely on.
std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

mfd::Point parse_point(const std::string& text) {
    mfd::Point z;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            z.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw mfd::InvalidArgument("cannot parse coordinate '" + item + "' in --z");
        }
    }
    if (z.empty()) throw mfd::InvalidArgument("--z needs at least one coordinate");
    return z;
}

mfd::WeightMethod parse_method(const std::string& name) {
    if (name == "l2") return mfd::WeightMethod::l2min;
    if (name == "l1") return mfd::WeightMethod::l1min;
    if (name == "qr") return mfd::WeightMethod::sparse_qr;
    throw mfd::InvalidArgument("unknown method '" + name + "' (expected l2, l1 or qr)");
}

struct Options {
    std::string nodes_path;
    std::string z_text;
    int q = 4;
    std::string method = "qr";
    std::string op = "laplace";
    std::size_t m = 0;  // 0 = all nodes (stencil/rho) or 2*nu (assembly)
    double rank_tol = 1e-10;
    double s_tol = 1e-12;
    double solve_tol = 1e-10;
    double perturb = 0.0;
    unsigned long long seed = 0;
    std::string out_path;
    // solve / converge extras
    int grid = 0;
    std::string problem = "sinsin";
    std::string out_matrix, out_rhs;
    std::vector<int> levels;
};

mfd::StencilOptions stencil_options(const Options& o) {
    mfd::StencilOptions s;
    s.rank_tol_rel = o.rank_tol;
    s.s_tol_rel = o.s_tol;
    return s;
}

// Node list for a single-stencil command: the whole file, or the m nearest
// neighbors of z when --m is given. Returns 0-based indices into the file.
std::vector<std::size_t> pick_nodes(const mfd::NodeSet& x, const mfd::Point& z, std::size_t m) {
    std::vector<std::size_t> sel;
    if (m == 0 || m >= x.size()) {
        sel.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) sel[i] = i;
    } else {
        sel = mfd::KnnIndex(x).query(z, m);
    }
    return sel;
}

int cmd_stencil(const Options& o) {
    const mfd::NodeSet x = mfd::read_nodes(o.nodes_path);
    const mfd::Point z = parse_point(o.z_text);
    if (static_cast<int>(z.size()) != x.dim)
        throw mfd::InvalidArgument("--z dimension differs from the node file");
    const std::vector<std::size_t> sel = pick_nodes(x, z, o.m);
    std::vector<mfd::Point> y;
    y.reserve(sel.size());
    for (std::size_t i : sel) y.push_back(x.points[i]);

    const mfd::DiffOperator op = mfd::DiffOperator::named(o.op, x.dim);
    const mfd::StencilProblem p = mfd::build_problem(z, y, o.q, op);
    const mfd::WeightMethod method = parse_method(o.method);
    const mfd::StencilOptions so = stencil_options(o);

    std::ostream& out = std::cout;
    out << "method " << o.method << "\n";
    out << "m " << p.size() << "\n";
    mfd::WeightVector wv;
    if (method == mfd::WeightMethod::sparse_qr) {
        auto [w, diag] = mfd::weights_sparse_qr(p, so);
        wv = std::move(w);
        out << "r " << diag.rank << "\n";
        out << "s " << diag.s << "\n";
        out << "bound_factor " << fmt(diag.bound_factor) << "\n";
    } else {
        wv = method == mfd::WeightMethod::l2min ? mfd::weights_l2(p, so) : mfd::weights_l1(p, so);
    }
    out << "norm_1q " << fmt(wv.norm_1q) << "\n";
    out << "norm_2q " << fmt(wv.norm_2q) << "\n";
    out << "selected";
    for (const auto& [j, w] : wv.entries) out << ' ' << sel[p.source_index[j]] + 1;
    out << "\n";
    for (const auto& [j, w] : wv.entries)
        out << "weight " << sel[p.source_index[j]] + 1 << ' ' << fmt(w) << "\n";
    return 0;
}

int cmd_rho(const Options& o) {
    const mfd::NodeSet x = mfd::read_nodes(o.nodes_path);
    const mfd::Point z = parse_point(o.z_text);
    if (static_cast<int>(z.size()) != x.dim)
        throw mfd::InvalidArgument("--z dimension differs from the node file");
    const std::vector<std::size_t> sel = pick_nodes(x, z, o.m);
    std::vector<mfd::Point> y;
    for (std::size_t i : sel) y.push_back(x.points[i]);

    const mfd::DiffOperator op = mfd::DiffOperator::named(o.op, x.dim);
    const mfd::StencilProblem p = mfd::build_problem(z, y, o.q, op);
    const mfd::StencilOptions so = stencil_options(o);
    const double rho = mfd::growth_function(p, so);
    const auto [lo, hi] = mfd::growth_bounds(p, so);
    std::cout << "rho " << fmt(rho) << "\n";
    std::cout << "lower " << fmt(lo) << "\n";
    std::cout << "upper " << fmt(hi) << "\n";
    return 0;
}

int cmd_sparsify(const Options& o) {
    const mfd::NodeSet x = mfd::read_nodes(o.nodes_path);
    const mfd::DiffOperator lap = mfd::DiffOperator::laplacian(x.dim);
    const std::size_t m_default = 2 * mfd::dim_poly(x.dim, o.q);
    const std::size_t m = std::min(x.size(), o.m > 0 ? o.m : m_default);
    const mfd::KnnIndex index(x);
    const mfd::StencilOptions so = stencil_options(o);

    std::ofstream file;
    std::ostream* outp = &std::cout;
    if (!o.out_path.empty()) {
        file.open(o.out_path);
        if (!file) throw mfd::IoError("cannot open output file " + o.out_path);
        outp = &file;
    }
    std::ostream& out = *outp;

    out << "node,m_used,nnz,bound_factor,ratio\n";
    std::size_t count = 0;
    double sum_nnz = 0.0, sum_bf = 0.0, sum_ratio = 0.0;
    double max_nnz = 0.0, max_bf = 0.0, max_ratio = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x.boundary[i]) continue;
        const std::vector<std::size_t> neigh = index.query(x.points[i], m);
        std::vector<mfd::Point> y;
        for (std::size_t idx : neigh) y.push_back(x.points[idx]);
        const mfd::StencilProblem p = mfd::build_problem(x.points[i], y, o.q, lap);
        const auto [wq, diag] = mfd::weights_sparse_qr(p, so);
        const mfd::WeightVector w2 = mfd::weights_l2(p, so);
        const double nnz = static_cast<double>(wq.entries.size());
        const double ratio = w2.norm_2q > 0.0 ? wq.norm_2q / w2.norm_2q : 1.0;
        out << i + 1 << ',' << p.size() << ',' << wq.entries.size() << ','
            << fmt(diag.bound_factor) << ',' << fmt(ratio) << "\n";
        ++count;
        sum_nnz += nnz;
        sum_bf += diag.bound_factor;
        sum_ratio += ratio;
        max_nnz = std::max(max_nnz, nnz);
        max_bf = std::max(max_bf, diag.bound_factor);
        max_ratio = std::max(max_ratio, ratio);
    }
    if (count > 0) {
        const double c = static_cast<double>(count);
        out << "summary,mean," << fmt(sum_nnz / c) << ',' << fmt(sum_bf / c) << ','
            << fmt(sum_ratio / c) << "\n";
        out << "summary,max," << fmt(max_nnz) << ',' << fmt(max_bf) << ',' << fmt(max_ratio)
            << "\n";
    }
    return 0;
}

struct Problem {
    mfd::ScalarField u, f;
};

Problem named_problem(const std::string& name, int dim) {
    if (name == "sinsin") {
        if (dim != 2)
            throw mfd::InvalidArgument("problem 'sinsin' requires 2D nodes");
        return {mfd::manufactured_u, mfd::manufactured_f};
    }
    if (name == "quad") {
        return {[](const mfd::Point& p) {
                    double s = 0.0;
                    for (double v : p) s += v * v;
                    return s;
                },
                [dim](const mfd::Point&) { return 2.0 * dim; }};
    }
    if (name == "linear") {
        return {[](const mfd::Point& p) {
                    double s = 0.0;
                    for (double v : p) s += v;
                    return s;
                },
                [](const mfd::Point&) { return 0.0; }};
    }
    throw mfd::InvalidArgument("unknown problem '" + name + "' (expected sinsin, quad or linear)");
}

void dump_matrix(const std::string& path, const mfd::SparseSystem& s) {
    std::ofstream out(path);
    if (!out) throw mfd::IoError("cannot open output file " + path);
    for (const mfd::Triplet& t : s.triplets)
        out << t.row + 1 << ' ' << t.col + 1 << ' ' << fmt(t.value) << '\n';
}

void dump_vector(const std::string& path, const std::vector<double>& v) {
    std::ofstream out(path);
    if (!out) throw mfd::IoError("cannot open output file " + path);
    for (double e : v) out << fmt(e) << '\n';
}

int cmd_solve(const Options& o) {
    mfd::NodeSet x;
    if (!o.nodes_path.empty())
        x = mfd::read_nodes(o.nodes_path);
    else if (o.grid >= 3)
        x = mfd::gen_unit_square(o.grid, o.perturb, o.seed);
    else
        throw mfd::InvalidArgument("solve needs --nodes FILE or --grid N (N >= 3)");

    const Problem prob = named_problem(o.problem, x.dim);
    mfd::AssemblyOptions ao;
    ao.method = parse_method(o.method);
    ao.q = o.q;
    ao.m_neighbors = o.m;
    ao.stencil = stencil_options(o);
    const mfd::SparseSystem s = mfd::assemble_poisson(x, ao, prob.f, prob.u);

    mfd::SolveOptions so;
    so.rel_tol = o.solve_tol;
    const std::vector<double> u = mfd::solve_system(s, so);

    std::vector<double> r = s.rhs;
    for (const mfd::Triplet& t : s.triplets) r[t.row] -= t.value * u[t.col];
    const double bnorm = mfd::norm2(s.rhs);
    const double residual = bnorm > 0.0 ? mfd::norm2(r) / bnorm : mfd::norm2(r);
    const auto [max_err, rms_err] = mfd::error_norms(u, prob.u, x);

    std::cout << "n " << s.n << "\n";
    std::cout << "max_err " << fmt(max_err) << "\n";
    std::cout << "rms_err " << fmt(rms_err) << "\n";
    std::cout << "residual " << fmt(residual) << "\n";

    if (!o.out_path.empty()) dump_vector(o.out_path, u);
    if (!o.out_matrix.empty()) dump_matrix(o.out_matrix, s);
    if (!o.out_rhs.empty()) dump_vector(o.out_rhs, s.rhs);
    return 0;
}

int cmd_converge(const Options& o) {
    if (o.levels.size() < 2)
        throw mfd::InvalidArgument("converge needs --levels with at least two grid sizes");
    mfd::AssemblyOptions ao;
    ao.method = parse_method(o.method);
    ao.q = o.q;
    ao.m_neighbors = o.m;
    ao.stencil = stencil_options(o);
    const std::vector<mfd::ConvergenceRow> table =
        mfd::convergence_study(o.levels, o.perturb, ao, o.seed, o.solve_tol);

    std::ofstream file;
    std::ostream* outp = &std::cout;
    if (!o.out_path.empty()) {
        file.open(o.out_path);
        if (!file) throw mfd::IoError("cannot open output file " + o.out_path);
        outp = &file;
    }
    std::ostream& out = *outp;
    out << "h,max_err,order\n";
    for (const mfd::ConvergenceRow& row : table) {
        out << fmt(row.h) << ',' << fmt(row.max_err) << ',';
        if (std::isnan(row.order))
            out << "\n";
        else
            out << fmt(row.order) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse numerical-differentiation stencils on scattered nodes"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&o](CLI::App* c, bool with_z) {
        c->add_option("--q", o.q, "Polynomial exactness order")->capture_default_str();
        c->add_option("--method", o.method, "Weight method: l2, l1 or qr")->capture_default_str();
        c->add_option("--m", o.m, "Neighborhood size (0 = default)")->capture_default_str();
        c->add_option("--rank-tol", o.rank_tol, "Relative rank truncation tolerance")
            ->capture_default_str();
        c->add_option("--s-tol", o.s_tol, "Relative threshold on Q^T b components")
            ->capture_default_str();
        if (with_z) c->add_option("--z", o.z_text, "Stencil center, comma-separated coordinates");
    };

    CLI::App* st = app.add_subcommand("stencil", "Compute one stencil and print its diagnostics");
    st->add_option("--nodes", o.nodes_path, "Node file")->required();
    add_common(st, true);
    st->get_option("--z")->required();
    st->add_option("--op", o.op, "Operator: laplace, dx, dy, identity, laplace+dx")
        ->capture_default_str();

    CLI::App* rho = app.add_subcommand("rho", "Growth function and its 2-norm sandwich");
    rho->add_option("--nodes", o.nodes_path, "Node file")->required();
    add_common(rho, true);
    rho->get_option("--z")->required();
    rho->add_option("--op", o.op, "Operator: laplace, dx, dy, identity, laplace+dx")
        ->capture_default_str();

    CLI::App* sp = app.add_subcommand("sparsify", "Per-node sparsification report (CSV)");
    sp->add_option("--nodes", o.nodes_path, "Node file")->required();
    add_common(sp, false);
    sp->add_option("--out", o.out_path, "Write the CSV here instead of stdout");

    CLI::App* so = app.add_subcommand("solve", "Poisson-Dirichlet demo solver");
    so->add_option("--nodes", o.nodes_path, "Node file");
    so->add_option("--grid", o.grid, "Generate an N-per-side unit-square grid instead");
    so->add_option("--perturb", o.perturb, "Interior grid perturbation in [0, 0.5)")
        ->capture_default_str();
    so->add_option("--seed", o.seed, "Perturbation seed")->capture_default_str();
    so->add_option("--problem", o.problem, "Manufactured problem: sinsin, quad, linear")
        ->capture_default_str();
    add_common(so, false);
    so->add_option("--solve-tol", o.solve_tol, "Relative residual target")->capture_default_str();
    so->add_option("--out", o.out_path, "Write the solution vector here (one value per line)");
    so->add_option("--out-matrix", o.out_matrix, "Dump the assembled matrix (i j w, 1-based)");
    so->add_option("--out-rhs", o.out_rhs, "Dump the right-hand side (one value per line)");

    CLI::App* cv = app.add_subcommand("converge", "Convergence study on refined grids (CSV)");
    cv->add_option("--levels", o.levels, "Grid sizes per side, e.g. 11,21,41")
        ->required()
        ->delimiter(',');
    cv->add_option("--perturb", o.perturb, "Interior grid perturbation in [0, 0.5)")
        ->capture_default_str();
    cv->add_option("--seed", o.seed, "Perturbation seed")->capture_default_str();
    add_common(cv, false);
    cv->add_option("--solve-tol", o.solve_tol, "Relative residual target")->capture_default_str();
    cv->add_option("--out", o.out_path, "Write the CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;  // --help exits 0, parse errors 1
    }

    try {
        if (st->parsed()) return cmd_stencil(o);
        if (rho->parsed()) return cmd_rho(o);
        if (sp->parsed()) return cmd_sparsify(o);
        if (so->parsed()) return cmd_solve(o);
        if (cv->parsed()) return cmd_converge(o);
        std::cerr << "no command given\n";
        return 1;
    } catch (const mfd::GrowthInfinite& e) {
        std::cerr << "GROWTH_INFINITE: " << e.what();
        if (e.node >= 0) std::cerr << " (node " << e.node + 1 << ")";
        std::cerr << "\n";
        return 2;
    } catch (const mfd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
