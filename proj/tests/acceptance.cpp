// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
// usage: acceptance <genfrac binary> <scratch dir> [property test binaries...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "genfrac/hierarchy.hpp"
#include "genfrac/kernel_io.hpp"
#include "genfrac/mittag_leffler.hpp"
#include "genfrac/numerics.hpp"
#include "genfrac/relaxation.hpp"
#include "genfrac/subordination.hpp"

using namespace genfrac;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Named {
    std::string name;
    KernelSpec kernel;
};

std::vector<Named> suite() {
    return {{"caputo03", KernelSpec::caputo(0.3)},
            {"caputo05", KernelSpec::caputo(0.5)},
            {"caputo08", KernelSpec::caputo(0.8)},
            {"distributed_order", KernelSpec::distributed_order(WeightFunction::constant(1.0))}};
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Outcome relaxation_vs_ml() {
    const auto grid = numerics::log_grid(0.01, 100.0, 41);
    double worst = 0.0;
    for (double alpha : {0.3, 0.5, 0.8})
        for (double lambda : {0.5, 1.0, 2.0}) {
            const auto sol = solve_relaxation({KernelSpec::caputo(alpha), lambda}, grid);
            for (std::size_t i = 0; i < grid.size(); ++i)
                worst = std::max(worst, std::abs(sol.values[i] - ml(alpha, -lambda * std::pow(grid[i], alpha))));
        }
    return {worst <= 1e-6, "max abs error " + fmt(worst) + " (tol 1e-6)"};
}

Outcome golden_and_masses() {
    std::vector<double> s;
    for (int i = 0; i <= 60; ++i) s.push_back(0.1 * i);
    const auto t = numerics::log_grid(0.1, 10.0, 21);
    const auto g = compute_G(KernelSpec::caputo(0.5), s, t);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < t.size(); ++j) {
            const double exact = std::exp(-s[i] * s[i] / (4.0 * t[j])) / std::sqrt(std::numbers::pi * t[j]);
            worst = std::max(worst, std::abs(g.at(i, j) - exact) / exact);
        }
    double mass = 0.0;
    for (const auto& [name, k] : suite()) {
        const auto grid = compute_G(k, {0.0, 1.0}, t);
        mass = std::max(mass, grid.max_mass_deviation());
    }
    return {worst <= 1e-6 && mass <= 1e-4,
            "golden rel error " + fmt(worst) + " (tol 1e-6), worst row mass deviation " + fmt(mass) + " (tol 1e-4)"};
}

Outcome heat_demo() {
    SpectralHeatDemo demo;
    demo.mode_count = 16;
    demo.t_grid = numerics::log_grid(0.1, 10.0, 11);
    double worst = 0.0;
    for (const auto& k : {KernelSpec::caputo(0.5), KernelSpec::distributed_order(WeightFunction::constant(1.0))})
        worst = std::max(worst, run_heat_demo(demo, k).max_discrepancy);
    return {worst <= 1e-4, "max per-mode discrepancy " + fmt(worst) + " (tol 1e-4)"};
}

Outcome growing_limit() {
    const auto k = KernelSpec::caputo(0.5);
    const auto a20 = A_growing(k, 20.0, 1.0);
    const double scaled = std::exp(a20.log_value - 20.0);
    HierarchyOptions both;
    both.policy = RoutePolicy::both;
    double worst = 0.0;
    bool missing = false;
    for (double t : numerics::log_grid(0.1, 5.0, 18)) {
        const auto v = A_growing(k, t, 1.0, both);
        if (!v.quadrature || !v.contour) {
            missing = true;
            continue;
        }
        worst = std::max(worst, std::abs(*v.quadrature - *v.contour) / std::abs(*v.contour));
    }
    const bool ok = scaled >= 1.96 && scaled <= 2.04 && worst <= 1e-4 && !missing;
    return {ok, "A(20,1)e^-20 = " + fmt(scaled) + " (in [1.96, 2.04]), route disagreement " + fmt(worst) +
                    " (tol 1e-4)" + (missing ? ", a route was missing" : "")};
}

Outcome integrability(const std::string& kernels_dir) {
    std::ostringstream d;
    bool ok = true;
    for (double alpha : {0.3, 0.5, 0.8}) {
        const auto r = check_integrability(KernelSpec::caputo(alpha));
        const bool good = r.verdict == Verdict::converges && r.limit && std::abs(*r.limit * alpha - 1.0) <= 0.01;
        ok = ok && good;
        d << "caputo " << alpha << ": " << to_string(r.verdict) << " I=" << (r.limit ? fmt(*r.limit) : "none") << "; ";
    }
    const auto dr = check_integrability(KernelSpec::distributed_order(WeightFunction::constant(1.0)));
    ok = ok && dr.verdict == Verdict::converges;
    const auto lr = check_integrability(load_kernel(kernels_dir + "/log1p_tabulated.json"));
    ok = ok && lr.verdict == Verdict::diverges;
    d << "distributed order: " << to_string(dr.verdict) << "; log(1+s): " << to_string(lr.verdict);
    return {ok, d.str()};
}

Outcome superadditivity() {
    double smallest = INFINITY;
    for (const auto& [name, k] : suite())
        for (int n = 2; n <= 4; ++n)
            for (const auto& m : check_superadditivity(k, 1.0, partitions_of(n))) smallest = std::min(smallest, m.margin);
    const double m2 = check_superadditivity(KernelSpec::caputo(0.5), 1.0, {{1, 1}}).front().margin;
    return {smallest > 0.0 && std::abs(m2 - 2.0) <= 0.01,
            "smallest margin " + fmt(smallest) + " (> 0), caputo 0.5 n=2 margin " + fmt(m2) + " (2 +- 0.01)"};
}

Outcome growing_intermittency() {
    HierarchyParams params{KernelSpec::caputo(0.5), 1.0, Regime::growing, 3, numerics::log_grid(0.1, 20.0, 24),
                           std::make_pair(5.0, 20.0), HierarchyOptions{}};
    const auto result = build_report(params);
    const auto& grid = result.table.t_grid;
    double slope_err = INFINITY;
    bool increasing = true;
    for (const auto& r : result.report.ratios) {
        if (r.n == 2 && r.parts == Partition{1, 1}) slope_err = std::abs(r.fitted_slope - 2.0) / 2.0;
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (grid[i - 1] >= 2.0 && !(r.log_ratio[i] > r.log_ratio[i - 1])) increasing = false;
    }
    return {slope_err <= 0.02 && increasing,
            "n=2 slope relative error " + fmt(slope_err) + " (tol 0.02), ratios increasing on [2, 20]: " +
                (increasing ? "yes" : "no")};
}

Outcome decaying_law() {
    const auto k = KernelSpec::caputo(0.5);
    const double scaled = A_decaying(k, 1e4, 1.0).value * std::tgamma(0.5) * std::sqrt(1e4);
    const double g05 = tauberian_profile(k).gamma;
    const double gdo = tauberian_profile(KernelSpec::distributed_order(WeightFunction::constant(1.0))).gamma;
    bool increasing = true;
    for (const auto& [name, kern] : suite()) {
        HierarchyParams params{kern, 1.0, Regime::decaying, 3, numerics::log_grid(0.1, 1e4, 51),
                               std::make_pair(1e2, 1e4), HierarchyOptions{}};
        for (const auto& r : build_report(params).report.ratios) increasing = increasing && r.strictly_increasing;
    }
    const bool ok = std::abs(scaled - 1.0) <= 0.05 && std::abs(g05 - 0.5) <= 0.01 && std::abs(gdo - 1.0) <= 0.01 &&
                    increasing;
    return {ok, "A(1e4,-1) Gamma(1/2) t^1/2 = " + fmt(scaled) + ", gamma caputo 0.5 = " + fmt(g05) +
                    ", gamma distributed order = " + fmt(gdo) + ", ratios increasing past 1e2: " +
                    (increasing ? "yes" : "no")};
}

Outcome property_suites(const std::vector<std::string>& binaries) {
    if (binaries.empty()) return {false, "no property suites given"};
    std::vector<std::string> failed;
    for (const auto& b : binaries) {
        const std::string cmd = "\"" + b + "\" > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) failed.push_back(fs::path(b).filename().string());
    }
    std::string d = std::to_string(binaries.size() - failed.size()) + "/" + std::to_string(binaries.size()) + " suites green";
    for (const auto& f : failed) d += ", failed " + f;
    return {failed.empty(), d};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[fs::relative(e.path(), root).string()] =
            std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return files;
}

Outcome determinism(const std::string& cli, const fs::path& scratch) {
    const fs::path a = scratch / "run1", b = scratch / "run2";
    fs::remove_all(a);
    fs::remove_all(b);
    fs::create_directories(scratch);
    // Different worker counts must not change a byte.
    const std::string common = "SOURCE_DATE_EPOCH=1700000000 ";
    const std::string c1 = common + "GENFRAC_THREADS=1 \"" + cli + "\" reproduce-paper --out \"" + a.string() + "\" > /dev/null";
    const std::string c2 = common + "GENFRAC_THREADS=4 \"" + cli + "\" reproduce-paper --out \"" + b.string() + "\" > /dev/null";
    if (std::system(c1.c_str()) != 0 || std::system(c2.c_str()) != 0) return {false, "reproduce-paper failed"};
    const auto s1 = snapshot(a), s2 = snapshot(b);
    if (s1.size() != s2.size()) return {false, "file counts differ"};
    for (const auto& [name, bytes] : s1) {
        const auto it = s2.find(name);
        if (it == s2.end()) return {false, name + " missing from second run"};
        if (it->second != bytes) return {false, name + " differs"};
    }
    return {true, std::to_string(s1.size()) + " files byte-identical"};
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <genfrac binary> <scratch dir> [property suites...]\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path scratch = argv[2];
    const std::vector<std::string> suites(argv + 3, argv + argc);
#ifdef GENFRAC_KERNELS
    const std::string kernels = GENFRAC_KERNELS;
#else
    const std::string kernels = "kernels";
#endif

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"caputo relaxation matches Mittag-Leffler", relaxation_vs_ml},
        {"subordination kernel golden case and row masses", golden_and_masses},
        {"heat demo subordination identity", heat_demo},
        {"growing asymptotics and route agreement", growing_limit},
        {"integrability classifier", [&] { return integrability(kernels); }},
        {"superadditivity margins", superadditivity},
        {"growing-regime intermittency", growing_intermittency},
        {"decaying-regime Tauberian law", decaying_law},
        {"property suites", [&] { return property_suites(suites); }},
        {"reproduce-paper determinism", [&] { return determinism(cli, scratch); }},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
