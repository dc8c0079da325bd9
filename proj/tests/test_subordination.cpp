#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "genfrac/errors.hpp"
#include "genfrac/numerics.hpp"
#include "genfrac/subordination.hpp"

using namespace genfrac;
using std::numbers::pi;

namespace {

double golden(double s, double t) { return std::exp(-s * s / (4.0 * t)) / std::sqrt(pi * t); }

// E_{1/2}(-x) = e^{x^2} erfc(x)
double ml_half_neg(double x) { return std::exp(x * x) * std::erfc(x); }

} // namespace

TEST_CASE("transform in t of the subordination kernel") {
    const auto k = KernelSpec::caputo(0.5);
    CHECK(g_hat(k, 0.0, 3.0).value == doctest::Approx(eval_K(k, 3.0)));
    CHECK(g_hat(k, 1.0, 4.0).value == doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-14));
    CHECK(g_hat(k, 1e6, 4.0).underflow);
    // Integral over s equals K / L = 1/p.
    for (double p : {0.3, 2.0, 10.0}) {
        const double L = eval_L(k, p);
        const auto q = numerics::integrate_panels([&](double s) { return g_hat(k, s, p).value; }, 0.0, 80.0 / L, 16);
        CHECK(q.value == doctest::Approx(1.0 / p).epsilon(1e-10));
    }
}

TEST_CASE("golden case pointwise") {
    const auto k = KernelSpec::caputo(0.5);
    CHECK(evaluate_G(k, 1.0, 1.0).value == doctest::Approx(std::exp(-0.25) / std::sqrt(pi)).epsilon(1e-10));
    CHECK(evaluate_G(k, 0.0, 1.0).value == doctest::Approx(1.0 / std::sqrt(pi)).epsilon(1e-10));
    // Deep tail, relative accuracy kept by the moved contour.
    CHECK(evaluate_G(k, 6.0, 0.1).value == doctest::Approx(golden(6.0, 0.1)).epsilon(1e-8));
    const auto w = evaluate_weighted_G(k, 6.0, 0.1, 50.0);
    CHECK(w.value == doctest::Approx(std::exp(50.0) * golden(6.0, 0.1)).epsilon(1e-8));
}

TEST_CASE("golden case grid and row masses") {
    const auto s = numerics::linear_grid(0.0, 6.0, 25);
    const auto t = numerics::log_grid(0.1, 10.0, 9);
    const auto g = compute_G(KernelSpec::caputo(0.5), s, t);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < t.size(); ++j)
            worst = std::max(worst, std::abs(g.at(i, j) - golden(s[i], t[j])) / golden(s[i], t[j]));
    CHECK(worst <= 1e-6);
    CHECK(g.max_mass_deviation() <= 1e-4);
    CHECK(g.min_pre_clip >= -1e-8);
    CHECK(g.flagged == 0);
    CHECK(g.s_limit() == 6.0);
}

TEST_CASE("row masses of other kernels") {
    const auto s = numerics::linear_grid(0.0, 4.0, 5);
    const auto t = numerics::log_grid(0.1, 10.0, 4);
    for (const auto& k : {KernelSpec::caputo(0.3), KernelSpec::caputo(0.8),
                          KernelSpec::distributed_order(WeightFunction::constant(1.0))}) {
        const auto g = compute_G(k, s, t);
        INFO(k.family_name());
        CHECK(g.max_mass_deviation() <= 1e-4);
        for (double v : g.values) CHECK(v >= 0.0);
    }
}

TEST_CASE("scalar subordination") {
    const auto k = KernelSpec::caputo(0.5);
    const auto one = subordinate_scalar([](double) { return 1.0; }, k, 1.0, 40.0);
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-9));
    const auto e1 = subordinate_scalar([](double s) { return std::exp(-s); }, k, 1.0, 40.0);
    CHECK(e1.value == doctest::Approx(ml_half_neg(1.0)).epsilon(1e-9));
    for (double lambda : {1.0, 4.0, 9.0}) {
        const auto r = subordinate_exponential(-lambda, k, 2.0, 100.0);
        CHECK(r.value == doctest::Approx(ml_half_neg(lambda * std::sqrt(2.0))).epsilon(1e-8));
    }
    // Growing exponential: A(t, z) = E_{1/2}(z sqrt t) = e^{z^2 t} erfc(-z sqrt t).
    const auto grow = subordinate_exponential(1.0, k, 1.0, 200.0);
    CHECK(grow.value == doctest::Approx(std::exp(1.0) * std::erfc(-1.0)).epsilon(1e-8));
}

TEST_CASE("integrability refused on a short s range") {
    const auto k = KernelSpec::caputo(0.5);
    CHECK_THROWS_AS(subordinate_scalar([](double s) { return std::exp(3.0 * s); }, k, 5.0, 6.0, 3.0),
                    IntegrabilityError);
    const auto grid = compute_G(k, numerics::linear_grid(0.0, 6.0, 61), {1.0});
    CHECK_THROWS_AS(subordinate_scalar([](double s) { return std::exp(4.0 * s); }, grid, 1.0, 4.0),
                    IntegrabilityError);
}

TEST_CASE("tail bound") {
    const auto k = KernelSpec::caputo(0.5);
    double prev = log_tail_bound(k, 1.0, 1.0, 0.0);
    for (double S : {2.0, 4.0, 8.0, 16.0}) {
        const double b = log_tail_bound(k, S, 1.0, 0.0);
        CHECK(b < prev);
        prev = b;
    }
    const double S = tail_cutoff(k, 1.0, 0.0, std::log(1e-12));
    CHECK(log_tail_bound(k, S, 1.0, 0.0) <= std::log(1e-12) + 1e-6);
    // Exact tail of the golden kernel is erfc(S / 2); the bound must dominate it.
    CHECK(std::log(std::erfc(S / 2.0)) <= std::log(1e-12));
}

TEST_CASE("heat demo") {
    SpectralHeatDemo demo;
    demo.mode_count = 4;
    demo.coefficients = {1.0, 0.0, 2.0, -1.0};
    demo.t_grid = {0.5, 2.0};
    const auto r = run_heat_demo(demo, KernelSpec::caputo(0.5));
    REQUIRE(r.modes.size() == 4);
    CHECK(r.max_discrepancy <= 1e-4);
    for (double v : r.modes[1].relaxation) CHECK(v == 0.0);
    for (double v : r.modes[1].subordinated) CHECK(v == 0.0);
    // Modes are m = 1..mode_count with eigenvalue m^2.
    CHECK(r.modes[0].mode == 1);
    CHECK(r.modes[0].relaxation[0] == doctest::Approx(ml_half_neg(std::sqrt(0.5))).epsilon(1e-9));
    CHECK(r.modes[2].lambda == 9.0);
    CHECK(r.modes[2].relaxation[1] == doctest::Approx(2.0 * ml_half_neg(9.0 * std::sqrt(2.0))).epsilon(1e-8));
    CHECK(r.modes[2].subordinated[1] == doctest::Approx(2.0 * ml_half_neg(9.0 * std::sqrt(2.0))).epsilon(1e-8));

    const auto flat = KernelSpec::tabulated({-10.0, 10.0}, {0.0, 0.0});
    CHECK_THROWS_AS(run_heat_demo(demo, flat), PreconditionError);
    SpectralHeatDemo bad = demo;
    bad.coefficients = {1.0};
    CHECK_THROWS(bad.validate());
}
