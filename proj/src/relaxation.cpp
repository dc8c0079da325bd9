#include "genfrac/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "genfrac/errors.hpp"
#include "genfrac/numerics.hpp"

namespace genfrac {

void RelaxationProblem::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        std::ostringstream msg;
        msg << "relaxation rate must be positive and finite, got " << lambda;
        throw DomainError(msg.str());
    }
}

const char* to_string(DecayKind kind) {
    switch (kind) {
    case DecayKind::power: return "power";
    case DecayKind::logarithmic: return "logarithmic";
    case DecayKind::unclassified: return "unclassified";
    }
    return "unknown";
}

double relaxation_transform(const KernelSpec& kernel, double lambda, double p) {
    return eval_K(kernel, p) / (eval_L(kernel, p) + lambda);
}

cplx relaxation_transform(const KernelSpec& kernel, double lambda, cplx p) {
    const cplx L = eval_L(kernel, p);
    return L / (p * (L + lambda));
}

laplace::InversionResult relaxation_value(const RelaxationProblem& problem, double t,
                                          const RelaxationOptions& options, bool* disagreement) {
    const KernelSpec& kernel = problem.kernel;
    const double lambda = problem.lambda;
    const laplace::RealTransform real = [&kernel, lambda](double p) {
        return relaxation_transform(kernel, lambda, p);
    };
    const laplace::InversionResult gs = laplace::invert_gaver_stehfest(real, t, options.gaver_order);
    if (disagreement) *disagreement = gs.flagged;
    if (!kernel.has_analytic_continuation()) return gs;

    const laplace::ComplexTransform F = [&kernel, lambda](cplx p) {
        return relaxation_transform(kernel, lambda, p);
    };
    laplace::InversionResult tb = laplace::invert_talbot(F, t, options.talbot_nodes);
    const double gap = std::abs(tb.value - gs.value);
    const double allowed = std::max(options.agreement_floor, 3.0 * (tb.error_estimate + gs.error_estimate));
    if (disagreement) *disagreement = tb.flagged || gap > allowed;
    return tb;
}

RelaxationSolution solve_relaxation(const RelaxationProblem& problem, const std::vector<double>& t_grid,
                                    const RelaxationOptions& options) {
    problem.validate();
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0)) throw DomainError("relaxation grid must be positive; u(0) = 1 is not inverted");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw DomainError("relaxation grid must be strictly increasing");
    }
    const std::size_t n = t_grid.size();
    RelaxationSolution sol;
    sol.lambda = problem.lambda;
    sol.t_grid = t_grid;
    sol.values.assign(n, 0.0);
    sol.error_estimates.assign(n, 0.0);
    sol.flagged.assign(n, 0);
    sol.methods.assign(n, laplace::Method::talbot);
    std::vector<double> clipped(n, 0.0);

    numerics::parallel_for(n, [&](std::size_t i) {
        bool bad = false;
        const laplace::InversionResult r = relaxation_value(problem, t_grid[i], options, &bad);
        const double v = std::clamp(r.value, 0.0, 1.0);
        clipped[i] = std::abs(v - r.value);
        sol.values[i] = v;
        sol.error_estimates[i] = r.error_estimate;
        sol.flagged[i] = bad ? 1 : 0;
        sol.methods[i] = r.method;
    });
    for (double c : clipped) sol.max_clipped = std::max(sol.max_clipped, c);
    sol.decay_class = classify_decay(sol, options.robust_fit);
    return sol;
}

DecayClass classify_decay(const RelaxationSolution& solution, bool robust) {
    DecayClass out;
    const auto& t = solution.t_grid;
    const auto& u = solution.values;
    if (t.empty() || t.back() < 1e3) {
        out.reason = "grid does not reach t = 1e3";
        return out;
    }
    const double t_lo = t.back() / 100.0;
    std::vector<double> lt, lu, inv;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo * (1.0 - 1e-12)) continue;
        if (!(u[i] > 0.0)) {
            out.reason = "non-positive values in the tail window";
            return out;
        }
        lt.push_back(std::log(t[i]));
        lu.push_back(std::log(u[i]));
        inv.push_back(1.0 / u[i]);
    }
    if (lt.size() < 6) {
        out.reason = "fewer than six samples in the last two decades";
        return out;
    }
    auto fit = [robust](std::span<const double> x, std::span<const double> y) {
        return robust ? numerics::fit_line_robust(x, y) : numerics::fit_line(x, y);
    };
    const numerics::LineFit power = fit(lt, lu);
    const numerics::LineFit logarithmic = fit(lt, inv);

    // Both residuals in log u so they are comparable.
    double ss = 0.0;
    bool log_model_valid = logarithmic.slope > 0.0;
    for (std::size_t i = 0; i < lt.size(); ++i) {
        const double model = logarithmic.intercept + logarithmic.slope * lt[i];
        if (!(model > 0.0)) {
            log_model_valid = false;
            break;
        }
        const double r = lu[i] + std::log(model);
        ss += r * r;
    }
    out.power_residual = power.rms_residual;
    out.log_residual = log_model_valid ? std::sqrt(ss / lt.size()) : INFINITY;
    out.exponent = power.slope;

    // Both shipped examples separate by orders of magnitude; the absolute
    // cap rejects tails that neither model describes.
    constexpr double absolute_cap = 1e-2;
    if (out.power_residual < 0.5 * out.log_residual && out.power_residual < absolute_cap && power.slope < 0.0) {
        out.kind = DecayKind::power;
    } else if (out.log_residual < 0.5 * out.power_residual && out.log_residual < absolute_cap) {
        out.kind = DecayKind::logarithmic;
    } else {
        out.reason = "neither tail model fits decisively";
    }
    return out;
}

double relaxation_spectral_density(const KernelSpec& kernel, double lambda, double r) {
    if (!(r > 0.0)) throw DomainError("spectral density requires r > 0");
    const cplx L = eval_L_upper_cut(kernel, r);
    const cplx h = L / (-r * (L + lambda));
    return -h.imag() / std::numbers::pi;
}

CmSignTest relaxation_cm_test(const RelaxationProblem& problem, double t_lo, double t_hi, std::size_t points,
                              int max_order, const RelaxationOptions& options) {
    problem.validate();
    auto u = [&](double t) { return relaxation_value(problem, t, options).value; };
    return cm_sign_test(u, t_lo, t_hi, points, max_order);
}

} // namespace genfrac
