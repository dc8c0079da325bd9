#include "genfrac/kernel_symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "genfrac/errors.hpp"
#include "genfrac/numerics.hpp"

namespace genfrac {

// ---------------------------------------------------------------------------
// WeightFunction

WeightFunction WeightFunction::constant(double value) {
    WeightFunction w;
    w.kind_ = Kind::constant;
    w.coefficients_ = {value};
    w.validate();
    return w;
}

WeightFunction WeightFunction::polynomial(std::vector<double> coefficients) {
    if (coefficients.empty()) throw std::invalid_argument("polynomial weight needs at least one coefficient");
    WeightFunction w;
    w.kind_ = Kind::polynomial;
    w.coefficients_ = std::move(coefficients);
    w.validate();
    return w;
}

WeightFunction WeightFunction::custom(std::function<double(double)> evaluator, std::string description) {
    if (!evaluator) throw std::invalid_argument("custom weight needs an evaluator");
    WeightFunction w;
    w.kind_ = Kind::custom;
    w.evaluator_ = std::move(evaluator);
    w.description_ = std::move(description);
    w.validate();
    return w;
}

double WeightFunction::operator()(double alpha) const {
    switch (kind_) {
    case Kind::constant:
        return coefficients_.front();
    case Kind::polynomial: {
        double acc = 0.0;
        for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * alpha + *it;
        return acc;
    }
    case Kind::custom:
        return evaluator_(alpha);
    }
    return 0.0;
}

void WeightFunction::validate() const {
    constexpr int samples = 1001;
    bool positive_somewhere = false;
    for (int i = 0; i < samples; ++i) {
        const double a = static_cast<double>(i) / (samples - 1);
        const double v = (*this)(a);
        if (!std::isfinite(v) || v < 0.0) {
            std::ostringstream msg;
            msg << "weight function must be finite and nonnegative on [0,1]; mu(" << a << ") = " << v;
            throw std::invalid_argument(msg.str());
        }
        positive_somewhere = positive_somewhere || v > 0.0;
    }
    if (!positive_somewhere) throw std::invalid_argument("weight function vanishes identically on [0,1]");
}

// ---------------------------------------------------------------------------
// KernelSpec

namespace {

std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), delta(n - 1), m(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x[k + 1] - x[k];
        delta[k] = (y[k + 1] - y[k]) / h[k];
    }
    if (n == 2) {
        m[0] = m[1] = delta[0];
        return m;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (delta[k - 1] * delta[k] <= 0.0) {
            m[k] = 0.0;
        } else {
            const double w1 = 2.0 * h[k] + h[k - 1];
            const double w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    m[0] = delta.front();
    m[n - 1] = delta.back();
    return m;
}

struct HermiteEval {
    double value;
    double slope;
};

HermiteEval tabulated_log_K(const TabulatedFamily& tab, double x) {
    const auto& xs = tab.log_p;
    const auto& ys = tab.log_K;
    const auto& ms = tab.slopes;
    if (x <= xs.front()) return {ys.front() + ms.front() * (x - xs.front()), ms.front()};
    if (x >= xs.back()) return {ys.back() + ms.back() * (x - xs.back()), ms.back()};
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double h = xs[k + 1] - xs[k];
    const double u = (x - xs[k]) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    const double value = h00 * ys[k] + h10 * h * ms[k] + h01 * ys[k + 1] + h11 * h * ms[k + 1];
    const double d00 = 6 * u2 - 6 * u, d10 = 3 * u2 - 4 * u + 1;
    const double d01 = -6 * u2 + 6 * u, d11 = 3 * u2 - 2 * u;
    const double slope = (d00 * ys[k] + d01 * ys[k + 1]) / h + d10 * ms[k] + d11 * ms[k + 1];
    return {value, slope};
}

double checked(double value, const char* what, double p) {
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << what << " is not finite at p = " << p;
        throw DomainError(msg.str());
    }
    return value;
}

void require_positive(double p, const char* what) {
    if (!(p > 0.0) || !std::isfinite(p)) {
        std::ostringstream msg;
        msg << what << " requires finite p > 0, got " << p;
        throw DomainError(msg.str());
    }
}

// 1/Gamma(x), finite at the poles of Gamma.
double rgamma(double x) {
    if (x > 0.0) return 1.0 / boost::math::tgamma(x);
    if (x == std::floor(x)) return 0.0;
    return boost::math::sin_pi(x) * boost::math::tgamma(1.0 - x) / std::numbers::pi;
}

} // namespace

KernelSpec::KernelSpec(Family family, std::string label)
    : family_(std::move(family)), label_(std::move(label)) {}

KernelSpec KernelSpec::caputo(double alpha, std::string label) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("caputo kernel requires 0 < alpha < 1");
    if (label.empty()) {
        std::ostringstream os;
        os << "caputo(" << alpha << ")";
        label = os.str();
    }
    return KernelSpec(CaputoFamily{alpha}, std::move(label));
}

KernelSpec KernelSpec::distributed_order(WeightFunction weight, std::string label) {
    const auto& rule = numerics::gauss_legendre_unit(distributed_order_nodes);
    DistributedOrderFamily fam{std::move(weight), {}, {}};
    fam.nodes.resize(rule.nodes.size());
    fam.weighted_mu.resize(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double a = 0.5 * (rule.nodes[i] + 1.0);
        fam.nodes[i] = a;
        fam.weighted_mu[i] = 0.5 * rule.weights[i] * fam.weight(a);
    }
    if (label.empty()) label = "distributed_order";
    return KernelSpec(std::move(fam), std::move(label));
}

KernelSpec KernelSpec::tabulated(std::vector<double> log_p, std::vector<double> log_K, std::string label) {
    if (log_p.size() < 2 || log_p.size() != log_K.size())
        throw std::invalid_argument("tabulated symbol needs at least two paired (log_p, log_K) samples");
    for (std::size_t i = 0; i < log_p.size(); ++i) {
        if (!std::isfinite(log_p[i]) || !std::isfinite(log_K[i]))
            throw std::invalid_argument("tabulated symbol samples must be finite (K > 0)");
        if (i > 0 && !(log_p[i] > log_p[i - 1]))
            throw std::invalid_argument("tabulated symbol log_p must be strictly increasing");
        if (i > 0 && log_K[i] > log_K[i - 1])
            throw std::invalid_argument("tabulated symbol K must be non-increasing in p");
    }
    TabulatedFamily fam{std::move(log_p), std::move(log_K), {}};
    fam.slopes = pchip_slopes(fam.log_p, fam.log_K);
    if (label.empty()) label = "tabulated";
    return KernelSpec(std::move(fam), std::move(label));
}

std::string KernelSpec::family_name() const {
    return std::visit(
        [](const auto& f) -> std::string {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, CaputoFamily>) return "caputo";
            else if constexpr (std::is_same_v<T, DistributedOrderFamily>) return "distributed_order";
            else return "tabulated";
        },
        family_);
}

bool KernelSpec::has_analytic_continuation() const {
    return !std::holds_alternative<TabulatedFamily>(family_);
}

// ---------------------------------------------------------------------------
// Symbols

double eval_K(const KernelSpec& kernel, double p) {
    require_positive(p, "eval_K");
    const double v = std::visit(
        [p](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, CaputoFamily>) {
                return std::pow(p, f.alpha - 1.0);
            } else if constexpr (std::is_same_v<T, DistributedOrderFamily>) {
                const double lp = std::log(p);
                double acc = 0.0;
                for (std::size_t i = 0; i < f.nodes.size(); ++i) acc += f.weighted_mu[i] * std::exp((f.nodes[i] - 1.0) * lp);
                return acc;
            } else {
                return std::exp(tabulated_log_K(f, std::log(p)).value);
            }
        },
        kernel.family());
    return checked(v, "K(p)", p);
}

double eval_L(const KernelSpec& kernel, double p) {
    require_positive(p, "eval_L");
    const double v = std::visit(
        [p](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, CaputoFamily>) {
                return std::pow(p, f.alpha);
            } else if constexpr (std::is_same_v<T, DistributedOrderFamily>) {
                const double lp = std::log(p);
                double acc = 0.0;
                for (std::size_t i = 0; i < f.nodes.size(); ++i) acc += f.weighted_mu[i] * std::exp(f.nodes[i] * lp);
                return acc;
            } else {
                return p * std::exp(tabulated_log_K(f, std::log(p)).value);
            }
        },
        kernel.family());
    return checked(v, "L(p)", p);
}

cplx eval_L(const KernelSpec& kernel, cplx p) {
    if (p.imag() == 0.0) {
        if (!(p.real() > 0.0)) {
            std::ostringstream msg;
            msg << "eval_L: p = " << p.real() << " lies on the cut (-inf, 0]";
            throw BranchError(msg.str());
        }
        return {eval_L(kernel, p.real()), 0.0};
    }
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) throw DomainError("eval_L: non-finite argument");
    return std::visit(
        [p](const auto& f) -> cplx {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, CaputoFamily>) {
                return std::exp(f.alpha * std::log(p));
            } else if constexpr (std::is_same_v<T, DistributedOrderFamily>) {
                const cplx lp = std::log(p);
                cplx acc = 0.0;
                for (std::size_t i = 0; i < f.nodes.size(); ++i) acc += f.weighted_mu[i] * std::exp(f.nodes[i] * lp);
                return acc;
            } else {
                throw BranchError("tabulated symbol has no analytic continuation off the positive half-line");
            }
        },
        kernel.family());
}

cplx eval_K(const KernelSpec& kernel, cplx p) {
    if (p.imag() == 0.0 && p.real() > 0.0) return {eval_K(kernel, p.real()), 0.0};
    return eval_L(kernel, p) / p;
}

double eval_dL(const KernelSpec& kernel, double p) {
    require_positive(p, "eval_dL");
    const double v = std::visit(
        [p](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, CaputoFamily>) {
                return f.alpha * std::pow(p, f.alpha - 1.0);
            } else if constexpr (std::is_same_v<T, DistributedOrderFamily>) {
                const double lp = std::log(p);
                double acc = 0.0;
                for (std::size_t i = 0; i < f.nodes.size(); ++i)
                    acc += f.weighted_mu[i] * f.nodes[i] * std::exp((f.nodes[i] - 1.0) * lp);
                return acc;
            } else {
                const auto h = tabulated_log_K(f, std::log(p));
                return std::exp(h.value) * (1.0 + h.slope);
            }
        },
        kernel.family());
    return checked(v, "L'(p)", p);
}

cplx eval_L_upper_cut(const KernelSpec& kernel, double r) {
    require_positive(r, "eval_L_upper_cut");
    const cplx lp(std::log(r), std::numbers::pi);
    return std::visit(
        [&lp](const auto& f) -> cplx {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, CaputoFamily>) {
                return std::exp(f.alpha * lp);
            } else if constexpr (std::is_same_v<T, DistributedOrderFamily>) {
                cplx acc = 0.0;
                for (std::size_t i = 0; i < f.nodes.size(); ++i) acc += f.weighted_mu[i] * std::exp(f.nodes[i] * lp);
                return acc;
            } else {
                throw BranchError("tabulated symbol has no boundary values on the cut");
            }
        },
        kernel.family());
}

// ---------------------------------------------------------------------------
// Levy representation

LevyTriplet levy_triplet(const KernelSpec& kernel) {
    return std::visit(
        [](const auto& f) -> LevyTriplet {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, CaputoFamily>) {
                const double alpha = f.alpha;
                const double c = alpha * rgamma(1.0 - alpha);
                return {0.0, 0.0, [alpha, c](double t) { return c * std::pow(t, -1.0 - alpha); },
                        "alpha t^(-1-alpha) / Gamma(1-alpha)"};
            } else if constexpr (std::is_same_v<T, DistributedOrderFamily>) {
                std::vector<double> coef(f.nodes.size());
                for (std::size_t i = 0; i < f.nodes.size(); ++i)
                    coef[i] = f.weighted_mu[i] * f.nodes[i] * rgamma(1.0 - f.nodes[i]);
                std::vector<double> nodes = f.nodes;
                return {0.0, 0.0,
                        [nodes, coef](double t) {
                            const double lt = std::log(t);
                            double acc = 0.0;
                            for (std::size_t i = 0; i < nodes.size(); ++i) acc += coef[i] * std::exp((-1.0 - nodes[i]) * lt);
                            return acc;
                        },
                        "integral of alpha t^(-1-alpha) mu(alpha) / Gamma(1-alpha) over [0,1]"};
            } else {
                throw BranchError("tabulated symbol carries no Levy representation");
            }
        },
        kernel.family());
}

double eval_levy_density(const LevyTriplet& triplet, double t) {
    if (!(t > 0.0)) throw DomainError("eval_levy_density requires t > 0");
    return triplet.density(t);
}

double levy_moment(const LevyTriplet& triplet, double t_lo, double t_hi) {
    if (!(t_lo > 0.0) || !(t_hi > t_lo)) throw DomainError("levy_moment requires 0 < t_lo < t_hi");
    // t = e^u
    auto integrand = [&triplet](double u) {
        const double t = std::exp(u);
        return std::min(1.0, t) * triplet.density(t) * t;
    };
    const double a = std::log(t_lo), b = std::log(t_hi);
    const int panels = std::max(4, static_cast<int>(std::ceil(b - a)));
    return numerics::integrate_panels(integrand, a, b, panels, 1e-12).value;
}

// ---------------------------------------------------------------------------
// Complete monotonicity and admissibility

CmSignTest cm_sign_test(const std::function<double(double)>& f, double p_lo, double p_hi,
                        std::size_t points, int max_order, double rel_step, double tol) {
    CmSignTest out;
    out.max_order = max_order;
    const auto grid = numerics::log_grid(p_lo, p_hi, points);
    out.points = grid.size();
    std::vector<double> vals(max_order + 1);
    for (double p : grid) {
        const double h = rel_step * p;
        for (int k = 0; k <= max_order; ++k) vals[k] = f(p + k * h);
        const double scale = std::abs(vals[0]);
        std::vector<double> diff = vals;
        for (int n = 0; n <= max_order; ++n) {
            // diff[0] holds Delta^n f(p)
            const double signed_diff = (n % 2 == 0 ? 1.0 : -1.0) * diff[0];
            const double margin = scale > 0.0 ? signed_diff / scale : signed_diff;
            if (!std::isfinite(margin) || margin < -tol) {
                out.passed = false;
                ++out.failures;
            }
            if (margin < out.worst_margin || !std::isfinite(margin)) {
                out.worst_margin = margin;
                out.worst_p = p;
                out.worst_order = n;
            }
            for (int k = 0; k + 1 < static_cast<int>(diff.size()) - n; ++k) diff[k] = diff[k + 1] - diff[k];
        }
    }
    return out;
}

const char* to_string(Flag flag) {
    switch (flag) {
    case Flag::yes: return "true";
    case Flag::no: return "false";
    case Flag::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

bool AdmissibilityReport::admissible() const {
    return !evaluation_failed && K_to_infinity_at_0 == Flag::yes && K_to_0_at_infinity == Flag::yes &&
           L_to_0_at_0 == Flag::yes && L_to_infinity_at_infinity == Flag::yes;
}

namespace {

// Decides whether positive samples f_0, f_1, ... taken at equal steps dx (in
// log p) toward an endpoint grow without bound. The increments of f are
// extrapolated geometrically; power-law growth is recognised from the
// log-log slope.
Flag tends_to_infinity(const std::vector<double>& f, double dx) {
    for (double v : f)
        if (!std::isfinite(v) || !(v > 0.0)) return Flag::inconclusive;
    const std::size_t n = f.size();
    const double slope = (std::log(f.back()) - std::log(f.front())) / (dx * (n - 1));
    if (slope > 0.02) return Flag::yes;
    std::vector<double> d(n - 1);
    double max_d = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        d[k] = f[k + 1] - f[k];
        max_d = std::max(max_d, d[k]);
    }
    if (max_d <= 1e-13 * std::abs(f.back())) return Flag::no;
    if (std::any_of(d.begin(), d.end(), [](double v) { return v <= 0.0; })) return Flag::inconclusive;
    double r_min = std::numeric_limits<double>::infinity(), r_max = 0.0;
    for (std::size_t k = 0; k + 1 < d.size(); ++k) {
        const double r = d[k + 1] / d[k];
        r_min = std::min(r_min, r);
        r_max = std::max(r_max, r);
    }
    if (r_max <= 0.9) return Flag::no;
    if (r_min >= 0.97) return Flag::yes;
    return Flag::inconclusive;
}

} // namespace

AdmissibilityReport check_admissibility(const KernelSpec& kernel) {
    AdmissibilityReport rep;
    constexpr int per_decade = 10;
    const double lo = 1e-8, hi = 1e8;
    const auto grid = numerics::log_grid_per_decade(lo, hi, per_decade);
    std::vector<double> K(grid.size()), L(grid.size());
    try {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            K[i] = eval_K(kernel, grid[i]);
            L[i] = eval_L(kernel, grid[i]);
        }
    } catch (const std::exception& e) {
        rep.evaluation_failed = true;
        rep.diagnostic = std::string("evaluation failed on the admissibility grid: ") + e.what();
        return rep;
    }
    const double dx = std::log(10.0) / per_decade;
    const std::size_t window = per_decade + 1;
    auto toward_zero = [&](const std::vector<double>& v, bool invert) {
        std::vector<double> out;
        for (std::size_t k = 0; k < window; ++k) {
            const double x = v[window - 1 - k];
            out.push_back(invert ? 1.0 / x : x);
        }
        return out;
    };
    auto toward_infinity = [&](const std::vector<double>& v, bool invert) {
        std::vector<double> out;
        for (std::size_t k = v.size() - window; k < v.size(); ++k) out.push_back(invert ? 1.0 / v[k] : v[k]);
        return out;
    };
    rep.K_to_infinity_at_0 = tends_to_infinity(toward_zero(K, false), dx);
    rep.K_to_0_at_infinity = tends_to_infinity(toward_infinity(K, true), dx);
    rep.L_to_0_at_0 = tends_to_infinity(toward_zero(L, true), dx);
    rep.L_to_infinity_at_infinity = tends_to_infinity(toward_infinity(L, false), dx);

    try {
        rep.stieltjes_witness = cm_sign_test([&kernel](double p) { return eval_K(kernel, p); }, lo, hi, 33, 6);
        rep.reciprocal_L_witness =
            cm_sign_test([&kernel](double p) { return 1.0 / eval_L(kernel, p); }, lo, hi, 33, 6);
    } catch (const std::exception& e) {
        rep.evaluation_failed = true;
        rep.diagnostic = std::string("evaluation failed in the sign test: ") + e.what();
    }
    return rep;
}

} // namespace genfrac
