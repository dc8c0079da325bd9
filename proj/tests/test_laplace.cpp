#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "genfrac/errors.hpp"
#include "genfrac/laplace.hpp"

using namespace genfrac;
using namespace genfrac::laplace;
using std::numbers::pi;

TEST_CASE("talbot on elementary transforms") {
    CHECK(invert_talbot([](cplx p) { return 1.0 / p; }, 3.0).value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(invert_talbot([](cplx p) { return 1.0 / (p + 2.0); }, 1.0).value ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
    const auto r = invert_talbot([](cplx p) { return 1.0 / std::sqrt(p); }, 1.0);
    CHECK(r.value == doctest::Approx(1.0 / std::sqrt(pi)).epsilon(1e-10));
    CHECK(r.error_estimate < 1e-10);
    CHECK_FALSE(r.flagged);
    CHECK(r.method == Method::talbot);
    // E_{1/2}(-1) = e erfc(1)
    const auto ml = invert_talbot([](cplx p) { return std::pow(p, -0.5) / (std::sqrt(p) + 1.0); }, 1.0, 32);
    CHECK(ml.value == doctest::Approx(std::exp(1.0) * std::erfc(1.0)).epsilon(1e-10));
}

TEST_CASE("talbot through a moved crossing") {
    // e^{-s sqrt p} / sqrt p at s = 6, t = 0.1: the inverse is e^{-90}/sqrt(0.1 pi).
    auto logF = [](cplx p) { return -6.0 * std::sqrt(p) - 0.5 * std::log(p); };
    const double saddle = 90.0;  // p* where t = s / (2 sqrt p*)
    const auto r = invert_talbot_log(logF, 0.1, 2048, saddle);
    const double ref = std::exp(-90.0) / std::sqrt(0.1 * pi);
    CHECK(r.value == doctest::Approx(ref).epsilon(1e-9));
    CHECK(talbot_crossing(1.0, 24) == doctest::Approx(24 * 0.1709).epsilon(1e-3));
}

TEST_CASE("shifted bromwich line") {
    auto cfg = BromwichConfig::with_gap(2.0, 1.0);
    cfg.rightmost_singularity = 1.0;
    const auto r = invert_bromwich_shifted([](cplx p) { return 1.0 / (p - 1.0); }, 2.0, cfg);
    CHECK(r.value == doctest::Approx(std::exp(2.0)).epsilon(1e-9));
    CHECK(r.method == Method::bromwich_shifted);

    auto cfg2 = BromwichConfig::with_gap(1.0, 1.0);
    cfg2.rightmost_singularity = 0.0;
    CHECK(invert_bromwich_shifted([](cplx p) { return 1.0 / (p * p); }, 5.0, cfg2).value ==
          doctest::Approx(5.0).epsilon(1e-9));

    const auto g = invert_bromwich_shifted(
        [](cplx p) { return std::exp(-std::sqrt(p)) / std::sqrt(p); }, 1.0, cfg2);
    CHECK(g.value == doctest::Approx(std::exp(-0.25) / std::sqrt(pi)).epsilon(1e-8));

    auto bad = BromwichConfig::with_gap(0.5, 0.5);
    bad.rightmost_singularity = 1.0;
    CHECK_THROWS_AS(invert_bromwich_shifted([](cplx p) { return 1.0 / (p - 1.0); }, 1.0, bad), ContractViolation);
}

TEST_CASE("gaver-stehfest") {
    const auto r = invert_gaver_stehfest([](double p) { return 1.0 / (p + 1.0); }, 1.0);
    CHECK(r.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));
    CHECK(r.method == Method::gaver_stehfest);
    CHECK(invert_gaver_stehfest([](double p) { return 1.0 / p; }, 7.0).value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(invert_gaver_stehfest([](double p) { return 1.0 / p; }, 1.0, 7), std::invalid_argument);
    CHECK_THROWS_AS(invert_gaver_stehfest([](double p) { return 1.0 / p; }, 0.0), DomainError);
}

TEST_CASE("post-widder sequence") {
    // h = 1/(p + z): H_n(t) = (n / (n + z t))^{n+1}.
    const double z = 1.0;
    auto h = [z](double p) { return 1.0 / (p + z); };
    DerivativeOracle d = [z](int n, double p) {
        return (n % 2 ? -1.0 : 1.0) * std::tgamma(n + 1.0) / std::pow(p + z, n + 1);
    };
    const auto seq = post_widder_sequence(h, d, 1.0, 50);
    REQUIRE(seq.complete);
    REQUIRE(seq.values.size() == 50);
    for (int n = 1; n <= 50; ++n)
        CHECK(seq.values[n - 1] == doctest::Approx(std::pow(n / (n + z), n + 1.0)).epsilon(1e-10));
    CHECK(seq.values.back() == doctest::Approx(std::exp(-1.0)).epsilon(0.02));

    const auto one = post_widder_sequence([](double p) { return 1.0 / p; },
                                          DerivativeOracle([](int n, double p) {
                                              return (n % 2 ? -1.0 : 1.0) * std::tgamma(n + 1.0) / std::pow(p, n + 1);
                                          }),
                                          3.0, 8);
    for (double v : one.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    // Without an oracle the Gaver functional stands in; low orders are accurate.
    const auto fd = post_widder_sequence(h, std::nullopt, 1.0, 4);
    CHECK(fd.values.size() == 4);
    CHECK(fd.values[0] > fd.values[3] * 0.5);
}

TEST_CASE("stieltjes representation derivatives") {
    // sigma(r) = 1/(pi sqrt r) represents h(p) = 1/sqrt(p).
    StieltjesRepresentation s([](double r) { return 1.0 / (pi * std::sqrt(r)); });
    CHECK(s.value(4.0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(s.derivative(1, 4.0) == doctest::Approx(-0.5 * std::pow(4.0, -1.5)).epsilon(1e-9));
    CHECK(s.derivative(3, 2.0) == doctest::Approx(-0.5 * 1.5 * 2.5 * std::pow(2.0, -3.5)).epsilon(1e-8));
}
