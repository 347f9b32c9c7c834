#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mfd/nodes.hpp"
#include "mfd/pde.hpp"

// MFD_CLI_BIN is injected by the build; the tests run the real executable.

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string base = "/tmp/mfd_cli_run_" + std::to_string(counter++);
    const std::string cmd =
        std::string(MFD_CLI_BIN) + " " + args + " >" + base + ".out 2>" + base + ".err";
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(base + ".out");
    r.err = slurp(base + ".err");
    std::remove((base + ".out").c_str());
    std::remove((base + ".err").c_str());
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

// Value of the first "key value..." line, split on whitespace.
std::vector<std::string> find_line(const std::string& text, const std::string& key) {
    for (const std::string& line : lines_of(text)) {
        std::istringstream ss(line);
        std::string head;
        ss >> head;
        if (head != key) continue;
        std::vector<std::string> rest;
        std::string tok;
        while (ss >> tok) rest.push_back(tok);
        return rest;
    }
    FAIL("missing line: " << key);
    return {};
}

double value_of(const std::string& text, const std::string& key) {
    const auto rest = find_line(text, key);
    REQUIRE(!rest.empty());
    return std::stod(rest[0]);
}

std::string nodes_file(const char* name, const mfd::NodeSet& x) {
    const std::string path = std::string("/tmp/mfd_cli_nodes_") + name + ".txt";
    mfd::write_nodes(path, x);
    return path;
}

mfd::NodeSet cross_nodes(double h) {
    mfd::NodeSet x;
    x.dim = 2;
    x.points = {{0.0, 0.0}, {h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}};
    x.boundary.assign(5, false);
    return x;
}

} // namespace

TEST_CASE("help exits cleanly") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("stencil --help").exit_code == 0);
}

TEST_CASE("usage errors exit with 1") {
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("stencil").exit_code == 1);  // missing required options
    const std::string path = nodes_file("usage", cross_nodes(0.1));
    CHECK(run_cli("stencil --nodes " + path + " --z 0,0 --method cg").exit_code == 1);
    CHECK(run_cli("stencil --nodes " + path + " --z 0,0 --op grad").exit_code == 1);
    CHECK(run_cli("stencil --nodes " + path + " --z 0,0,0 --q 4").exit_code == 1);
    CHECK(run_cli("stencil --nodes /missing.txt --z 0,0").exit_code == 1);
}

TEST_CASE("stencil command recovers the five-point star") {
    const double h = 0.1;
    const std::string path = nodes_file("star", cross_nodes(h));
    const RunResult r =
        run_cli("stencil --nodes " + path + " --z 0,0 --q 4 --method l1 --op laplace");
    REQUIRE(r.exit_code == 0);
    CHECK(find_line(r.out, "method")[0] == "l1");
    CHECK(value_of(r.out, "m") == 5);
    CHECK(value_of(r.out, "norm_1q") == doctest::Approx(4 * h * h).epsilon(1e-12));
    CHECK(find_line(r.out, "selected").size() == 5);

    double wsum = 0.0;
    int nweights = 0;
    for (const std::string& line : lines_of(r.out)) {
        std::istringstream ss(line);
        std::string head;
        int idx;
        double w;
        if (!(ss >> head >> idx >> w) || head != "weight") continue;
        ++nweights;
        wsum += w;
        if (idx == 1)
            CHECK(w == doctest::Approx(-4.0 / (h * h)).epsilon(1e-12));
        else
            CHECK(w == doctest::Approx(1.0 / (h * h)).epsilon(1e-12));
    }
    CHECK(nweights == 5);
    CHECK(std::abs(wsum) <= 1e-9);
}

TEST_CASE("stencil command with qr reports rank diagnostics and stays sparse") {
    mfd::NodeSet x = mfd::gen_halton(30, 2);
    const std::string path = nodes_file("halton30", x);
    const RunResult r =
        run_cli("stencil --nodes " + path + " --z 0.5,0.5 --q 4 --method qr --op laplace");
    REQUIRE(r.exit_code == 0);
    const double rank = value_of(r.out, "r");
    const double s = value_of(r.out, "s");
    CHECK(rank <= 10);  // polynomial space dimension for d = 2, q = 4
    CHECK(s <= rank);
    CHECK(value_of(r.out, "bound_factor") >= 1.0);
    CHECK(find_line(r.out, "selected").size() <= 10);

    // The same run through dx instead: still sparse, still fine.
    const RunResult r2 =
        run_cli("stencil --nodes " + path + " --z 0.5,0.5 --q 3 --method qr --op dx");
    REQUIRE(r2.exit_code == 0);
    CHECK(find_line(r2.out, "selected").size() <= 6);
}

TEST_CASE("collinear nodes exit with the growth code") {
    mfd::NodeSet x;
    x.dim = 2;
    x.points = {{-1.0, 0.0}, {-0.5, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
    x.boundary.assign(4, false);
    const std::string path = nodes_file("collinear", x);
    for (const char* method : {"l1", "l2", "qr"}) {
        const RunResult r = run_cli("stencil --nodes " + path + " --z 0,0 --q 3 --method " +
                                    method + " --op laplace");
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("GROWTH_INFINITE") != std::string::npos);
    }
}

TEST_CASE("rho command prints the growth function and its sandwich") {
    const double h = 0.5;
    mfd::NodeSet x;
    x.dim = 1;
    x.points = {{-h}, {0.0}, {h}};
    x.boundary.assign(3, false);
    const std::string path = nodes_file("rho1d", x);
    const RunResult r = run_cli("rho --nodes " + path + " --z 0 --q 3 --op laplace");
    REQUIRE(r.exit_code == 0);
    CHECK(value_of(r.out, "rho") == doctest::Approx(2 * h).epsilon(1e-12));
    CHECK(value_of(r.out, "lower") == doctest::Approx(std::sqrt(2.0) * h).epsilon(1e-12));
    CHECK(value_of(r.out, "upper") == doctest::Approx(std::sqrt(6.0) * h).epsilon(1e-12));
}

TEST_CASE("sparsify report round-trips through its own CSV") {
    const mfd::NodeSet x = mfd::gen_unit_square(5, 0.2, 31);
    const std::string path = nodes_file("sparsify", x);
    const std::string csv = "/tmp/mfd_cli_sparsify.csv";
    const RunResult r = run_cli("sparsify --nodes " + path + " --q 3 --m 12 --out " + csv);
    REQUIRE(r.exit_code == 0);

    const auto rows = lines_of(slurp(csv));
    REQUIRE(rows.size() >= 4);  // header, >= 1 node, two summary rows
    CHECK(rows[0] == "node,m_used,nnz,bound_factor,ratio");

    // Recompute the summaries from the data rows; %.17g makes this exact.
    double sum_nnz = 0, sum_bf = 0, sum_ratio = 0;
    double max_nnz = 0, max_bf = 0, max_ratio = 0;
    std::size_t count = 0;
    std::vector<std::string> summary;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::istringstream ss(rows[i]);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) f.push_back(field);
        REQUIRE(f.size() == 5);
        if (f[0] == "summary") {
            summary.push_back(rows[i]);
            continue;
        }
        const double nnz = std::stod(f[2]), bf = std::stod(f[3]), ratio = std::stod(f[4]);
        CHECK(nnz <= 10);        // never past the rank bound
        CHECK(bf >= 1.0);
        CHECK(ratio <= bf * (1.0 + 1e-8));
        sum_nnz += nnz;
        sum_bf += bf;
        sum_ratio += ratio;
        max_nnz = std::max(max_nnz, nnz);
        max_bf = std::max(max_bf, bf);
        max_ratio = std::max(max_ratio, ratio);
        ++count;
    }
    REQUIRE(count == 9);  // interior nodes of the 5x5 grid
    REQUIRE(summary.size() == 2);
    const double c = static_cast<double>(count);

    auto split = [](const std::string& line) {
        std::vector<double> v;
        std::istringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');  // "summary"
        std::getline(ss, field, ',');  // "mean" / "max"
        while (std::getline(ss, field, ',')) v.push_back(std::stod(field));
        return v;
    };
    const auto mean = split(summary[0]);
    CHECK(mean[0] == sum_nnz / c);
    CHECK(mean[1] == sum_bf / c);
    CHECK(mean[2] == sum_ratio / c);
    const auto mx = split(summary[1]);
    CHECK(mx[0] == max_nnz);
    CHECK(mx[1] == max_bf);
    CHECK(mx[2] == max_ratio);
    std::remove(csv.c_str());
}

TEST_CASE("sparsify with no interior nodes emits only the header") {
    mfd::NodeSet x = cross_nodes(0.25);
    x.boundary.assign(5, true);
    const std::string path = nodes_file("allbnd", x);
    const RunResult r = run_cli("sparsify --nodes " + path + " --q 3");
    CHECK(r.exit_code == 0);
    CHECK(lines_of(r.out).size() == 1);
}

TEST_CASE("solve command on an exact grid reproduces the quadratic") {
    const std::string sol = "/tmp/mfd_cli_solution.txt";
    const std::string mat = "/tmp/mfd_cli_matrix.txt";
    const std::string rhs = "/tmp/mfd_cli_rhs.txt";
    const RunResult r = run_cli("solve --grid 5 --problem quad --method qr --q 4 --out " + sol +
                                " --out-matrix " + mat + " --out-rhs " + rhs);
    REQUIRE(r.exit_code == 0);
    CHECK(value_of(r.out, "n") == 25);
    CHECK(value_of(r.out, "max_err") <= 1e-8);
    CHECK(value_of(r.out, "rms_err") <= 1e-8);
    CHECK(value_of(r.out, "residual") <= 1e-10);

    // Solution dump: one value per node, row-major exact grid.
    const auto su = lines_of(slurp(sol));
    REQUIRE(su.size() == 25);
    for (int iy = 0; iy < 5; ++iy)
        for (int ix = 0; ix < 5; ++ix) {
            const double xx = ix * 0.25, yy = iy * 0.25;
            CHECK(std::stod(su[iy * 5 + ix]) ==
                  doctest::Approx(xx * xx + yy * yy).epsilon(1e-8).scale(1.0));
        }

    // Matrix and rhs dumps are consistent with the printed solution.
    std::vector<double> u(25), b(25);
    for (int i = 0; i < 25; ++i) u[i] = std::stod(su[i]);
    const auto sb = lines_of(slurp(rhs));
    REQUIRE(sb.size() == 25);
    for (int i = 0; i < 25; ++i) b[i] = std::stod(sb[i]);
    std::vector<double> res = b;
    double bnorm = 0.0;
    for (double e : b) bnorm += e * e;
    for (const std::string& line : lines_of(slurp(mat))) {
        std::istringstream ss(line);
        int i, j;
        double w;
        REQUIRE((ss >> i >> j >> w));
        res[i - 1] -= w * u[j - 1];
    }
    double rnorm = 0.0;
    for (double e : res) rnorm += e * e;
    CHECK(std::sqrt(rnorm) <= 1e-10 * std::sqrt(bnorm));
    std::remove(sol.c_str());
    std::remove(mat.c_str());
    std::remove(rhs.c_str());
}

TEST_CASE("solve command input validation") {
    CHECK(run_cli("solve --problem quad").exit_code == 1);              // no nodes, no grid
    CHECK(run_cli("solve --grid 5 --problem cubic").exit_code == 1);    // unknown problem
    const std::string path = nodes_file("solve1d", [] {
        mfd::NodeSet x;
        x.dim = 1;
        x.points = {{0.0}, {0.5}, {1.0}};
        x.boundary = {true, false, true};
        return x;
    }());
    CHECK(run_cli("solve --nodes " + path + " --problem sinsin").exit_code == 1);  // 2D only
    CHECK(run_cli("solve --nodes " + path + " --problem linear --q 3").exit_code == 0);
}

TEST_CASE("converge command") {
    CHECK(run_cli("converge --levels 9").exit_code == 1);

    const std::string csv = "/tmp/mfd_cli_converge.csv";
    const RunResult r =
        run_cli("converge --levels 5,9 --perturb 0.1 --seed 4 --q 4 --out " + csv);
    REQUIRE(r.exit_code == 0);
    const auto rows = lines_of(slurp(csv));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "h,max_err,order");
    CHECK(rows[1].substr(0, rows[1].find(',')) == "0.25");
    CHECK(rows[1].back() == ',');  // no order on the first level
    std::istringstream ss(rows[2]);
    std::string field;
    std::getline(ss, field, ',');
    CHECK(std::stod(field) == doctest::Approx(0.125));
    std::getline(ss, field, ',');
    const double err2 = std::stod(field);
    std::getline(ss, field, ',');
    CHECK(std::isfinite(std::stod(field)));
    CHECK(err2 > 0.0);
    std::remove(csv.c_str());
}
