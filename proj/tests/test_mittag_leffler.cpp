#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "genfrac/errors.hpp"
#include "genfrac/mittag_leffler.hpp"
#include "support.hpp"

using namespace genfrac;

TEST_CASE("matches arbitrary-precision series reference on all branches") {
    const auto rows = testsupport::read_csv("ml_points.csv");
    REQUIRE(rows.size() > 60);
    double worst = 0.0;
    for (const auto& r : rows) {
        const double alpha = r[0], z = r[1], ref = r[2];
        const double v = ml(alpha, z);
        // Absolute floor for values that sit near zero on the negative axis.
        const double err = std::abs(v - ref) / std::max(std::abs(ref), 1e-3);
        INFO("alpha=" << alpha << " z=" << z << " value=" << v << " ref=" << ref);
        CHECK(err < 1e-11);
        worst = std::max(worst, err);
    }
    MESSAGE("worst relative error " << worst);
}

TEST_CASE("closed forms") {
    CHECK(ml(1.0, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    CHECK(ml(1.0, -3.0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
    for (double a : {0.1, 0.5, 0.9}) CHECK(ml(a, 0.0) == 1.0);
    // E_{1/2}(x) = e^{x^2} erfc(-x)
    for (double x : {-8.0, -3.0, -1.0, -0.2, 0.4, 1.0, 3.0, 6.0}) {
        const double ref = std::exp(x * x) * std::erfc(-x);
        INFO("x=" << x);
        CHECK(ml(0.5, x) == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK(ml(0.5, 1.0) == doctest::Approx(5.00898008076228).epsilon(1e-12));
}

TEST_CASE("negative-axis asymptotics") {
    CHECK(ml(0.5, -10.0) == doctest::Approx(1.0 / (10.0 * std::tgamma(0.5))).epsilon(0.15));
    for (double a : {0.3, 0.5, 0.8}) {
        const double x = 1e4;
        CHECK(ml(a, -x) * x * std::tgamma(1.0 - a) == doctest::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("branch selection") {
    CHECK(ml_evaluate(0.5, 0.5).branch == MLBranch::series);
    CHECK(ml_evaluate(0.5, 20.0).branch == MLBranch::integral);
    CHECK(ml_evaluate(0.5, 20.0).value == doctest::Approx(std::exp(400.0) * std::erfc(-20.0)).epsilon(1e-11));
    CHECK(ml_evaluate(0.5, -20.0).branch == MLBranch::integral);
    CHECK(ml_evaluate(0.5, -60.0).branch == MLBranch::asymptotic);
    CHECK(ml_evaluate(0.9, 200.0).branch == MLBranch::asymptotic);
    CHECK(std::string(to_string(MLBranch::integral)) == "integral");
}

TEST_CASE("continuity across switchover radii") {
    for (double a : {0.3, 0.5, 0.8})
        for (double r : {-50.0, -5.0, -1.0, 1.0, 5.0, 50.0}) {
            if (r > 0 && std::pow(r, 1.0 / a) > 690) continue;
            const double d = 1e-9;
            const double lo = ml(a, r * (1 - d)), hi = ml(a, r * (1 + d));
            // Expected change from the local logarithmic slope, measured on one side.
            const double far = ml(a, r * (1 + 1e-4));
            const double slope = std::abs(std::log(far / hi)) / 1e-4;
            INFO("alpha=" << a << " r=" << r);
            CHECK(std::abs(std::log(hi / lo)) <= 1e-10 + 4.0 * d * slope);
        }
}

TEST_CASE("relaxation profile is completely monotone in t") {
    for (double a : {0.3, 0.5, 0.8})
        for (double lambda : {0.5, 1.0, 2.0}) {
            // Fourth-order forward differences on a log grid over [0.01, 100].
            for (int i = 0; i <= 40; ++i) {
                const double t = 0.01 * std::pow(10.0, i / 10.0);
                const double h = 0.05 * t;
                double f[5];
                for (int k = 0; k < 5; ++k) f[k] = ml(a, -lambda * std::pow(t + k * h, a));
                double d[5];
                std::copy(f, f + 5, d);
                for (int n = 1; n <= 4; ++n) {
                    for (int k = 0; k + n < 5; ++k) d[k] = d[k + 1] - d[k];
                    const double signed_diff = (n % 2 ? -1.0 : 1.0) * d[0];
                    INFO("alpha=" << a << " lambda=" << lambda << " t=" << t << " order=" << n);
                    CHECK(signed_diff >= -1e-12 * f[0]);
                }
            }
        }
}

TEST_CASE("domain and range errors") {
    CHECK_THROWS_AS(ml(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(ml(1.2, 1.0), DomainError);
    CHECK_THROWS_AS(ml(0.5, std::nan("")), DomainError);
    CHECK_THROWS_AS(ml(0.5, 1e4), RangeError);
}
