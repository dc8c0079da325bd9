#include "genfrac/mittag_leffler.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include "genfrac/errors.hpp"

namespace genfrac {

const char* to_string(MLBranch branch) {
    switch (branch) {
    case MLBranch::series: return "series";
    case MLBranch::integral: return "integral";
    case MLBranch::asymptotic: return "asymptotic";
    }
    return "unknown";
}

namespace {

constexpr double series_radius = 5.0;
constexpr double negative_series_radius = 1.0;
constexpr double asymptotic_radius = 50.0;

double series(double alpha, double z) {
    const double lz = std::log(std::abs(z));
    const bool alternating = z < 0.0;
    double sum = 1.0;
    double previous = 1.0;
    for (int n = 1; n < 100000; ++n) {
        const double term = std::exp(n * lz - std::lgamma(1.0 + alpha * n));
        sum += (alternating && n % 2 == 1) ? -term : term;
        // Terms rise before they fall when z^{1/alpha} is large.
        if (term < previous && term < 1e-17 * std::abs(sum)) break;
        previous = term;
    }
    return sum;
}

// Sum over k >= 1 of (sign)^{k+1} x^{-k} / Gamma(1 - alpha k), using
// 1/Gamma(1 - y) = Gamma(y) sin(pi y) / pi. Summation stops where the envelope
// Gamma(alpha k) x^{-k} reaches its minimum.
double algebraic_tail(double alpha, double x, bool alternating) {
    const double lx = std::log(x);
    double sum = 0.0;
    double previous = INFINITY;
    for (int k = 1; k < 2000; ++k) {
        const double y = alpha * k;
        const double envelope = std::exp(std::lgamma(y) - k * lx) / std::numbers::pi;
        if (envelope > previous) break;
        previous = envelope;
        const double term = envelope * boost::math::sin_pi(y);
        sum += (alternating && k % 2 == 0) ? -term : term;
        if (envelope < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

// (sin(alpha pi) / (alpha pi)) * integral over u > 0 of
//   x e^{-u^{1/alpha}} / (u^2 + 2 c x u + x^2),   c = +-cos(alpha pi)
double kernel_integral(double alpha, double x, double c) {
    auto f = [alpha, x, c](double u) {
        return x * std::exp(-std::pow(u, 1.0 / alpha)) / (u * u + 2.0 * c * x * u + x * x);
    };
    // Double-exponential rules absorb the u^{1/alpha} endpoint behaviour at 0;
    // the split sits at the denominator minimum when it is on the half-line.
    const double split = std::max(-c * x, 0.5 * std::pow(2.0, alpha));
    boost::math::quadrature::tanh_sinh<double> head;
    boost::math::quadrature::exp_sinh<double> tail;
    const double total = head.integrate(f, 0.0, split, 1e-14) + tail.integrate(f, split, INFINITY, 1e-14);
    return std::sin(alpha * std::numbers::pi) / (alpha * std::numbers::pi) * total;
}

double leading_exponential(double alpha, double x) {
    const double exponent = std::pow(x, 1.0 / alpha);
    if (exponent > 700.0) {
        std::ostringstream msg;
        msg << "E_" << alpha << "(" << x << ") overflows double precision";
        throw RangeError(msg.str());
    }
    return std::exp(exponent) / alpha;
}

} // namespace

MLEvaluation ml_evaluate(double alpha, double z) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        std::ostringstream msg;
        msg << "Mittag-Leffler order must lie in (0, 1], got " << alpha;
        throw DomainError(msg.str());
    }
    if (!std::isfinite(z)) throw DomainError("Mittag-Leffler argument must be finite");

    MLEvaluation out;
    out.alpha = alpha;
    out.z = z;
    if (alpha == 1.0) {
        out.value = std::exp(z);
        if (!std::isfinite(out.value)) throw RangeError("exp(z) overflows double precision");
        return out;
    }
    if (z == 0.0) return out;

    const double x = std::abs(z);
    const double c = std::cos(alpha * std::numbers::pi);
    if (z > 0.0) {
        if (x <= series_radius) {
            out.value = series(alpha, z);
        } else if (x <= asymptotic_radius) {
            out.branch = MLBranch::integral;
            out.value = leading_exponential(alpha, x) - kernel_integral(alpha, x, -c);
        } else {
            out.branch = MLBranch::asymptotic;
            out.value = leading_exponential(alpha, x) - algebraic_tail(alpha, x, false);
        }
    } else {
        if (x <= negative_series_radius) {
            out.value = series(alpha, z);
        } else if (x <= asymptotic_radius) {
            out.branch = MLBranch::integral;
            out.value = kernel_integral(alpha, x, c);
        } else {
            out.branch = MLBranch::asymptotic;
            out.value = algebraic_tail(alpha, x, true);
        }
    }
    return out;
}

} // namespace genfrac
