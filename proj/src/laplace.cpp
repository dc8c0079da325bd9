#include "genfrac/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "genfrac/errors.hpp"

namespace genfrac::laplace {

const char* to_string(Method method) {
    switch (method) {
    case Method::talbot: return "talbot";
    case Method::gaver_stehfest: return "gaver_stehfest";
    case Method::bromwich_shifted: return "bromwich_shifted";
    }
    return "unknown";
}

namespace {

void require_time(double t, const char* what) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        std::ostringstream msg;
        msg << what << " requires finite t > 0, got " << t;
        throw DomainError(msg.str());
    }
}

constexpr double talbot_shift = -0.6122;
constexpr double talbot_cot_scale = 0.5017;
constexpr double talbot_angle = 0.6407;
constexpr double talbot_imag = 0.2645;

struct ContourSum {
    double value = 0.0;
    double magnitude = 0.0;  // sum of |terms|, the roundoff scale
};

// sigma scales the contour; its crossing of the real axis is sigma * talbot_crossing_factor.
// With log_form, F returns log F(p) and the exponentials are combined before
// evaluation, so F may overflow where e^{pt} F does not.
ContourSum talbot_contour(const ComplexTransform& F, double t, int nodes, double sigma, bool log_form = false) {
    const double h = 2.0 * std::numbers::pi / nodes;
    ContourSum out;
    // Nodes with theta > 0; their mirror images contribute the conjugate.
    for (int k = nodes / 2; k < nodes; ++k) {
        const double theta = -std::numbers::pi + (k + 0.5) * h;
        const double ct = talbot_angle * theta;
        const double cot = std::cos(ct) / std::sin(ct);
        const cplx p = sigma * cplx(talbot_shift + talbot_cot_scale * theta * cot, talbot_imag * theta);
        const double dre = talbot_cot_scale * (cot - ct / (std::sin(ct) * std::sin(ct)));
        const cplx dp = sigma * cplx(dre, talbot_imag);
        const cplx fp = F(p);
        if (!std::isfinite(fp.real()) || !std::isfinite(fp.imag())) {
            std::ostringstream msg;
            msg << "transform not finite on the Talbot contour at p = " << p;
            throw InversionError(msg.str());
        }
        const cplx term = log_form ? std::exp(p * t + fp) * dp : std::exp(p * t) * fp * dp;
        out.value += term.imag();
        out.magnitude += std::abs(term);
    }
    out.value *= h / std::numbers::pi;
    out.magnitude *= h / std::numbers::pi;
    return out;
}

constexpr double talbot_crossing_factor = talbot_shift + talbot_cot_scale / talbot_angle;

int even_nodes(int nodes) {
    if (nodes < 4) throw std::invalid_argument("Talbot inversion needs at least 4 nodes");
    return nodes + (nodes % 2);
}

} // namespace

double talbot_crossing(double t, int nodes) {
    return nodes / t * talbot_crossing_factor;
}

double talbot_sum(const ComplexTransform& F, double t, int nodes) {
    require_time(t, "talbot_sum");
    nodes = even_nodes(nodes);
    return talbot_contour(F, t, nodes, nodes / t).value;
}

InversionResult invert_talbot(const ComplexTransform& F, double t, int nodes) {
    require_time(t, "invert_talbot");
    nodes = even_nodes(nodes);
    return invert_talbot_through(F, t, nodes, talbot_crossing(t, nodes));
}

namespace {

InversionResult talbot_with_doubling(const ComplexTransform& F, double t, int nodes, double crossing, bool log_form) {
    require_time(t, "invert_talbot");
    if (!(crossing > 0.0)) throw std::invalid_argument("Talbot contour must cross the positive real axis");
    nodes = even_nodes(nodes);
    const double sigma = crossing / talbot_crossing_factor;
    const ContourSum coarse = talbot_contour(F, t, nodes, sigma, log_form);
    const ContourSum fine = talbot_contour(F, t, 2 * nodes, sigma, log_form);
    InversionResult r;
    r.method = Method::talbot;
    r.value = coarse.value;
    r.evaluations = static_cast<std::size_t>(nodes / 2 + nodes);
    const double roundoff = 4.0 * std::numeric_limits<double>::epsilon() * fine.magnitude;
    r.error_estimate = std::abs(coarse.value - fine.value) + roundoff;
    if (r.error_estimate > 1e-6 * std::max(1.0, std::abs(r.value))) {
        r.flagged = true;
        r.note = "node doubling did not converge";
    }
    return r;
}

} // namespace

InversionResult invert_talbot_through(const ComplexTransform& F, double t, int nodes, double crossing) {
    return talbot_with_doubling(F, t, nodes, crossing, false);
}

InversionResult invert_talbot_log(const ComplexTransform& logF, double t, int nodes, double crossing) {
    return talbot_with_doubling(logF, t, nodes, crossing, true);
}

// ---------------------------------------------------------------------------
// Bromwich line

void BromwichConfig::validate() const {
    if (nodes < 16) throw std::invalid_argument("BromwichConfig: nodes must be at least 16");
    if (!(truncation > 0.0)) throw std::invalid_argument("BromwichConfig: truncation must be positive");
    if (!std::isfinite(gamma)) throw std::invalid_argument("BromwichConfig: gamma must be finite");
}

BromwichConfig BromwichConfig::with_gap(double gamma, double gap, double truncation) {
    if (!(gap > 0.0)) throw std::invalid_argument("BromwichConfig::with_gap: gap must be positive");
    const double period = 40.0 / gap;
    const double step = 2.0 * std::numbers::pi / period;
    BromwichConfig c;
    c.gamma = gamma;
    c.truncation = truncation;
    c.nodes = std::max(16, static_cast<int>(std::ceil(truncation / step)));
    return c;
}

namespace {

constexpr int euler_order = 12;
constexpr int max_direct_blocks = 2000;

InversionResult line_quadrature(const ComplexTransform& F, double t, const BromwichConfig& config) {
    config.validate();
    const double h_req = config.truncation / config.nodes;
    const long m = std::max(1L, static_cast<long>(std::ceil(std::numbers::pi / (t * h_req))));
    const double h = std::numbers::pi / (static_cast<double>(m) * t);
    const long direct_blocks =
        std::clamp(static_cast<long>(std::ceil(config.truncation * t / std::numbers::pi)), 8L,
                   static_cast<long>(max_direct_blocks));
    const long total_blocks = direct_blocks + euler_order + 1;

    std::size_t evaluations = 0;
    double magnitude = 0.0;
    auto term = [&](long k) {
        const double y = k * h;
        const cplx fp = F(cplx(config.gamma, y));
        ++evaluations;
        if (!std::isfinite(fp.real()) || !std::isfinite(fp.imag())) {
            std::ostringstream msg;
            msg << "transform not finite on the Bromwich line at p = " << config.gamma << " + " << y << "i";
            throw InversionError(msg.str());
        }
        // Re[e^{i y t} F]; y t = k pi / m exactly.
        const double phase = static_cast<double>(k % (2 * m)) * std::numbers::pi / static_cast<double>(m);
        const double v = std::cos(phase) * fp.real() - std::sin(phase) * fp.imag();
        magnitude += std::abs(fp);
        return v;
    };

    // partial[j] = half of term 0 plus blocks 0..j
    std::vector<double> partial(total_blocks);
    double running = 0.5 * term(0);
    for (long j = 0; j < total_blocks; ++j) {
        double block = 0.0;
        for (long k = j * m + 1; k <= (j + 1) * m; ++k) block += term(k);
        running += block;
        partial[j] = running;
    }
    const double last_amplitude = std::abs(F(cplx(config.gamma, total_blocks * m * h)));

    auto euler = [&](long start) {
        // Binomial average of partial sums start .. start+euler_order-1
        const int q = euler_order - 1;
        double acc = 0.0, coef = 1.0;
        for (int i = 0; i <= q; ++i) {
            acc += coef * partial[start + i];
            coef = coef * (q - i) / (i + 1);
        }
        return acc / std::ldexp(1.0, q);
    };
    const double e0 = euler(direct_blocks - 1);
    const double e1 = euler(direct_blocks);

    const double scale = std::exp(config.gamma * t) * h / std::numbers::pi;
    InversionResult r;
    r.method = Method::bromwich_shifted;
    r.value = scale * e1;
    r.evaluations = evaluations;
    const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() * scale * magnitude;
    r.error_estimate = scale * std::abs(e1 - e0) + roundoff;
    std::ostringstream note;
    note << "step=" << h << " blocks=" << total_blocks << "x" << m
         << " tail_integrand_bound=" << std::exp(config.gamma * t) * last_amplitude / std::numbers::pi;
    r.note = note.str();
    if (!std::isfinite(r.value)) throw InversionError("Bromwich quadrature produced a non-finite value");
    if (r.error_estimate > 1e-6 * std::max(1.0, std::abs(r.value))) r.flagged = true;
    return r;
}

} // namespace

InversionResult bromwich_line(const ComplexTransform& F, double t, const BromwichConfig& config) {
    require_time(t, "bromwich_line");
    return line_quadrature(F, t, config);
}

InversionResult invert_bromwich_shifted(const ComplexTransform& F, double t, const BromwichConfig& config) {
    require_time(t, "invert_bromwich_shifted");
    if (config.rightmost_singularity && !(config.gamma > *config.rightmost_singularity)) {
        std::ostringstream msg;
        msg << "Bromwich abscissa gamma = " << config.gamma << " is not right of the singularity at "
            << *config.rightmost_singularity;
        throw ContractViolation(msg.str());
    }
    return line_quadrature(F, t, config);
}

// ---------------------------------------------------------------------------
// Gaver-Stehfest

namespace {

std::vector<long double> stehfest_coefficients(int order) {
    const int half = order / 2;
    auto fact = [](int n) {
        long double f = 1.0L;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    std::vector<long double> v(order + 1, 0.0L);
    for (int k = 1; k <= order; ++k) {
        long double acc = 0.0L;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            acc += std::pow(static_cast<long double>(j), half) * fact(2 * j) /
                   (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
        }
        v[k] = ((k + half) % 2 == 0 ? 1.0L : -1.0L) * acc;
    }
    return v;
}

} // namespace

InversionResult invert_gaver_stehfest(const RealTransform& F, double t, int order) {
    require_time(t, "invert_gaver_stehfest");
    if (order < 6 || order % 2 != 0) throw std::invalid_argument("Gaver-Stehfest order must be even and >= 6");
    const double a = std::numbers::ln2 / t;
    std::vector<long double> samples(order + 1);
    for (int k = 1; k <= order; ++k) {
        const double v = F(k * a);
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "transform not finite at p = " << k * a;
            throw InversionError(msg.str());
        }
        samples[k] = v;
    }
    auto estimate = [&](int n) {
        const auto coef = stehfest_coefficients(n);
        long double acc = 0.0L;
        for (int k = 1; k <= n; ++k) acc += coef[k] * samples[k];
        return static_cast<double>(acc * a);
    };
    const double f0 = estimate(order - 4);
    const double f1 = estimate(order - 2);
    const double f2 = estimate(order);
    InversionResult r;
    r.method = Method::gaver_stehfest;
    r.value = f2;
    r.evaluations = static_cast<std::size_t>(order);
    r.error_estimate = std::abs(f2 - f1);
    if (std::abs(f2 - f1) > std::abs(f1 - f0)) {
        r.flagged = true;
        r.note = "digit loss: consecutive-order differences stopped shrinking";
        r.error_estimate = std::max(r.error_estimate, std::abs(f1 - f0));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Post-Widder

PostWidderSequence post_widder_sequence(const RealTransform& h, const std::optional<DerivativeOracle>& derivative,
                                        double t, int n_max) {
    require_time(t, "post_widder_sequence");
    PostWidderSequence seq;
    for (int n = 1; n <= n_max; ++n) {
        double value = 0.0;
        try {
            if (derivative) {
                const double p = n / t;
                const double d = (*derivative)(n, p);
                if (!std::isfinite(d)) throw InversionError("derivative oracle returned a non-finite value");
                // ((-1)^n / n!) h^{(n)}(p) p^{n+1} in log form
                const double sign = ((n % 2 == 0) ? 1.0 : -1.0) * (d < 0.0 ? -1.0 : 1.0);
                value = d == 0.0 ? 0.0
                                 : sign * std::exp(std::log(std::abs(d)) + (n + 1) * std::log(p) - std::lgamma(n + 1.0));
            } else {
                const double a = std::numbers::ln2 / t;
                // n a C(2n,n) sum_k (-1)^k C(n,k) h((n+k) a)
                long double acc = 0.0L, binom = 1.0L;
                for (int k = 0; k <= n; ++k) {
                    const double hv = h((n + k) * a);
                    if (!std::isfinite(hv)) throw InversionError("transform not finite in the Gaver functional");
                    acc += (k % 2 == 0 ? 1.0L : -1.0L) * binom * hv;
                    binom = binom * (n - k) / (k + 1);
                }
                long double central = 1.0L;
                for (int k = 1; k <= n; ++k) central = central * (n + k) / k;
                value = static_cast<double>(n * a * central * acc);
            }
        } catch (const std::exception& e) {
            seq.complete = false;
            seq.error = e.what();
            break;
        }
        seq.values.push_back(value);
    }
    return seq;
}

StieltjesRepresentation::StieltjesRepresentation(std::function<double(double)> density)
    : density_(std::move(density)) {
    if (!density_) throw std::invalid_argument("StieltjesRepresentation needs a density");
}

double StieltjesRepresentation::derivative(int n, double p) const {
    if (!(p > 0.0)) throw DomainError("Stieltjes derivative requires p > 0");
    if (n < 0) throw std::invalid_argument("derivative order must be nonnegative");
    // r = p e^u spreads the mass evenly around the scale p.
    auto integrand = [this, n, p](double u) {
        const double r = p * std::exp(u);
        // The far ends underflow or overflow r; the integrand vanishes there.
        if (!(r > 0.0) || !std::isfinite(r)) return 0.0;
        const double s = density_(r);
        if (s == 0.0) return 0.0;
        const double v = s * r * std::exp(-(n + 1) * std::log1p(r / p));
        return std::isfinite(v) ? v : 0.0;
    };
    // Below u_lo, r is no longer representable. Densities such as
    // 1/(r log^2 r) still carry mass there, decaying only like a power of |u|.
    // In v = 1/|u| that remainder has a smooth integrand g(v) = f(-1/v)/v^2 on
    // [0, v_lo]; it is extrapolated from the samples at v_lo, 2 v_lo, 3 v_lo.
    const double u_lo = std::max(-700.0, std::log(1e-300 / p));
    boost::math::quadrature::tanh_sinh<double> inner;
    boost::math::quadrature::exp_sinh<double> outer;
    double integral = inner.integrate(integrand, u_lo, 0.0, 1e-13) +
                      outer.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
    const double v_lo = 1.0 / std::abs(u_lo);
    auto g = [&](int m) { return integrand(u_lo / m) * (u_lo / m) * (u_lo / m); };
    integral += std::max(0.0, v_lo * (23.0 / 12.0 * g(1) - 4.0 / 3.0 * g(2) + 5.0 / 12.0 * g(3)));
    const double scaled = integral * std::exp(-(n + 1) * std::log(p) + std::lgamma(n + 1.0));
    return (n % 2 == 0 ? 1.0 : -1.0) * scaled;
}

DerivativeOracle StieltjesRepresentation::oracle() const {
    auto self = *this;
    return [self](int n, double p) { return self.derivative(n, p); };
}

} // namespace genfrac::laplace
