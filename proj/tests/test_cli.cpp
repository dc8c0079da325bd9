#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "genfrac/cli.hpp"
#include "genfrac/kernel_io.hpp"

using namespace genfrac;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kernels = GENFRAC_KERNELS;

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    Run r;
    r.code = cli::dispatch(args);
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("genfrac_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("usage errors exit 2") {
    const auto none = run({});
    CHECK(none.code == 2);
    CHECK(none.err.find("Usage") != std::string::npos);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"relax", "--kernel", kernels + "/caputo05.json", "--bogus"}).code == 2);
    CHECK(run({"relax"}).code == 2);
    CHECK(run({"relax", "--kernel", kernels + "/caputo05.json", "--lambda", "-1"}).code == 2);
    CHECK(run({"relax", "--kernel", "/nonexistent/kernel.json"}).code == 2);
    CHECK(run({"relax", "--kernel", "{\"family\": \"caputo\", \"alpha\": 1.5}"}).code == 2);
    CHECK(run({"relax", "--kernel", "{not json"}).code == 2);
    CHECK(run({"hierarchy", "--kernel", kernels + "/caputo05.json", "--regime", "sideways", "--out", "x"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("check") {
    const auto ok = run({"check", "--kernel", kernels + "/caputo05.json"});
    CHECK(ok.code == 0);
    const auto j = json::parse(ok.out);
    CHECK(j["integrability"]["verdict"] == "converges");
    CHECK(j["growing_hypotheses_met"] == true);
    CHECK(j["superadditivity"].size() == 7);  // partitions of 2, 3, 4
    const auto bad = run({"check", "--kernel", kernels + "/log1p_tabulated.json"});
    CHECK(bad.code == 1);
    CHECK(json::parse(bad.out)["integrability"]["verdict"] == "diverges");
}

TEST_CASE("relax prints the relaxation curve") {
    const auto r = run({"relax", "--kernel", kernels + "/caputo05.json", "--lambda", "1"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("t [time],u [dimensionless]", 0) == 0);
    bool found = false;
    std::string footer;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) footer = line.substr(2);
        if (line.rfind("1,", 0) == 0) {
            found = true;
            const double u = std::stod(line.substr(2, line.find(',', 2) - 2));
            CHECK(u == doctest::Approx(0.42758).epsilon(1e-5));
        }
    }
    CHECK(found);
    REQUIRE_FALSE(footer.empty());
    CHECK(json::parse(footer)["decay_class"]["kind"] == "power");
}

TEST_CASE("output directories and manifests") {
    ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    const auto a = scratch("h1"), b = scratch("h2");
    for (const auto& dir : {a, b}) {
        const auto r = run({"hierarchy", "--kernel", kernels + "/caputo05.json", "--beta", "1", "--regime", "growing",
                            "--nmax", "3", "--tmin", "1", "--tmax", "10", "--tpoints", "6", "--out", dir.string()});
        REQUIRE(r.code == 0);
    }
    for (const char* f : {"correlation_table.csv", "report.json", "ratios.csv", "manifest.json"}) {
        INFO(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const auto m = json::parse(slurp(a / "manifest.json"));
    CHECK(m["command"] == "hierarchy");
    CHECK(m["kernel_hash"] == kernel_hash(load_kernel(kernels + "/caputo05.json")));
    CHECK(m["timestamp"] == "2023-11-14T22:13:20Z");
    CHECK(m["parameters"]["nmax"] == 3);
    CHECK(slurp(a / "correlation_table.csv").rfind("n [order],t [time],kappa", 0) == 0);
    CHECK(slurp(a / "ratios.csv").find("\n1+1,") != std::string::npos);

    const auto s = scratch("s1");
    const auto r = run({"subordinate", "--kernel", kernels + "/caputo05.json", "--smax", "3", "--spoints", "7",
                        "--tmin", "0.5", "--tmax", "2", "--tpoints", "3", "--out", s.string()});
    CHECK(r.code == 0);
    const auto summary = json::parse(slurp(s / "summary.json"));
    CHECK(summary["max_mass_deviation"].get<double>() < 1e-4);
    CHECK(slurp(s / "kernel_grid.csv").rfind("s [", 0) == 0);

    const auto h = scratch("heat");
    CHECK(run({"heat-demo", "--kernel", kernels + "/caputo05.json", "--modes", "3", "--tpoints", "2", "--out",
               h.string()})
              .code == 0);
    CHECK(fs::exists(h / "modes.csv"));
    for (const auto& d : {a, b, s, h}) fs::remove_all(d);
}

TEST_CASE("numeric failure exits 1 with a diagnostic") {
    const auto s = scratch("bad");
    const auto r = run({"subordinate", "--kernel", kernels + "/log1p_tabulated.json", "--tpoints", "2", "--tmin", "1",
                        "--tmax", "10", "--out", s.string()});
    CHECK(r.code == 1);
    CHECK(fs::exists(s / "diagnostic.json"));
    CHECK(json::parse(slurp(s / "diagnostic.json"))["status"] == "numeric_failure");
    const auto u = run({"relax", "--kernel", kernels + "/log1p_tabulated.json", "--tmin", "1", "--tmax", "10"});
    CHECK(u.code == 1);
    CHECK(json::parse(u.out.substr(u.out.find("{\n")))["error"] == "invariant_violation");
    // The hierarchy still tabulates a kernel whose growing-regime hypothesis
    // fails, but says so in the report.
    const auto g = run({"hierarchy", "--kernel", kernels + "/log1p_tabulated.json", "--tpoints", "2", "--tmin", "1",
                        "--tmax", "2", "--out", s.string()});
    CHECK(g.code == 0);
    const auto report = json::parse(g.out);
    CHECK(report["hypothesis_met"] == false);
    CHECK(report["integrability"]["verdict"] == "diverges");
    fs::remove_all(s);
}

TEST_CASE("kernel-info") {
    const auto r = run({"kernel-info", "--kernel", kernels + "/distributed_order.json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["admissibility"]["admissible"] == true);
    CHECK(j["family"] == "distributed_order");
    CHECK(j["tauberian"]["gamma"].get<double>() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("kernel spec serialization") {
    const auto c = KernelSpec::caputo(0.3, "c");
    const auto d = KernelSpec::distributed_order(WeightFunction::polynomial({1.0, 0.5}));
    const auto t = KernelSpec::tabulated({-1.0, 0.0, 1.0}, {1.0, 0.0, -1.0});
    for (const auto& k : {c, d, t}) {
        const auto back = kernel_from_json(kernel_to_json(k));
        CHECK(kernel_to_json(back) == kernel_to_json(k));
        CHECK(kernel_hash(back) == kernel_hash(k));
        CHECK(eval_K(back, 2.5) == eval_K(k, 2.5));
    }
    CHECK(kernel_hash(c) != kernel_hash(KernelSpec::caputo(0.3000001, "c")));
    CHECK(kernel_hash(c).size() == 16);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    const auto inline_k = load_kernel(R"({"family":"distributed_order","weight":{"kind":"constant","value":1}})");
    CHECK(eval_L(inline_k, std::exp(1.0)) == doctest::Approx(std::exp(1.0) - 1.0));
    CHECK_THROWS_AS(kernel_to_json(KernelSpec::distributed_order(
                        WeightFunction::custom([](double a) { return a; }, "identity"))),
                    std::invalid_argument);
    CHECK_THROWS_AS(kernel_from_json(json{{"family", "exotic"}}), std::invalid_argument);
    CHECK_THROWS_AS(kernel_from_json(json{{"family", "caputo"}}), std::invalid_argument);
}
