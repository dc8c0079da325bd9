#include "genfrac/subordination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "genfrac/errors.hpp"
#include "genfrac/numerics.hpp"
#include "genfrac/relaxation.hpp"

namespace genfrac {

constexpr double kInf = std::numeric_limits<double>::infinity();

GHat g_hat(const KernelSpec& kernel, double s, double p) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("g_hat requires finite s >= 0");
    const double K = eval_K(kernel, p);
    if (s == 0.0) return {K, false};
    const double e = s * eval_L(kernel, p);
    // exp underflows to zero past ~745
    if (e > 745.0) return {0.0, true};
    const double v = K * std::exp(-e);
    return {v, v == 0.0};
}

cplx g_hat(const KernelSpec& kernel, double s, cplx p) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("g_hat requires finite s >= 0");
    const cplx L = eval_L(kernel, p);
    return L / p * std::exp(-s * L);
}

namespace {

void require_s_t(double s, double t) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("subordination kernel requires finite s >= 0");
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("subordination kernel requires finite t > 0");
}

// Root of L'(p) = slope; L' decreases from +inf to 0 for the admissible families.
double saddle_point(const KernelSpec& kernel, double slope) {
    double lo = -32.0, hi = 32.0;  // log p
    if (eval_dL(kernel, std::exp(hi)) >= slope) return std::exp(hi);
    if (eval_dL(kernel, std::exp(lo)) <= slope) return std::exp(lo);
    for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        (eval_dL(kernel, std::exp(mid)) > slope ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

constexpr double underflow_exponent = -690.0;  // e^-690 ~ 1e-300

// contour_scale != 1 moves the crossing and the node count together; used for
// an independent second contour.
GValue invert_weighted(const KernelSpec& kernel, double s, double t, double log_weight,
                       const SubordinationOptions& options, double contour_scale = 1.0) {
    GValue out;
    if (!kernel.has_analytic_continuation()) {
        const laplace::RealTransform F = [&kernel, s](double p) { return g_hat(kernel, s, p).value; };
        const laplace::InversionResult gs = laplace::invert_gaver_stehfest(F, t, options.gaver_order);
        const double w = std::exp(log_weight);
        out.value = gs.value * w;
        out.error_estimate = gs.error_estimate * w;
        out.method = gs.method;
        out.flagged = gs.flagged;
        return out;
    }
    int nodes = options.talbot_nodes;
    double crossing = laplace::talbot_crossing(t, nodes);
    if (s > 0.0) {
        const double p_star = saddle_point(kernel, t / s);
        // Saddle-point size of the result; far below the underflow threshold
        // the contour integral is pure roundoff.
        const double L_star = eval_L(kernel, p_star);
        const double log_size = std::log(L_star / p_star) + p_star * t - s * L_star + log_weight;
        if (log_size < underflow_exponent) {
            out.value = 0.0;
            out.error_estimate = std::exp(log_size);
            return out;
        }
        if (p_star > crossing) {
            crossing = p_star;
            const double per_node = laplace::talbot_crossing(t, 1);
            const double wanted = std::ceil(1.1 * p_star / per_node);
            nodes = static_cast<int>(std::min(wanted, static_cast<double>(options.max_talbot_nodes)));
        }
    }
    if (contour_scale != 1.0) {
        crossing *= contour_scale;
        nodes = static_cast<int>(std::min(std::ceil(nodes * contour_scale), static_cast<double>(options.max_talbot_nodes)));
    }
    const bool capped = nodes >= options.max_talbot_nodes;
    const laplace::ComplexTransform logF = [&kernel, s, log_weight](cplx p) {
        const cplx L = eval_L(kernel, p);
        return std::log(L / p) - s * L + log_weight;
    };
    const laplace::InversionResult r = laplace::invert_talbot_log(logF, t, nodes, crossing);
    out.value = r.value;
    out.error_estimate = r.error_estimate;
    out.method = r.method;
    // A capped node count only matters if the doubling estimate says so.
    out.flagged = r.flagged || (capped && r.error_estimate > 1e-6 * std::abs(r.value));
    return out;
}

} // namespace

GValue evaluate_G(const KernelSpec& kernel, double s, double t, const SubordinationOptions& options,
                  bool cross_check) {
    require_s_t(s, t);
    GValue out = invert_weighted(kernel, s, t, 0.0, options);
    if (cross_check) {
        // Second opinion: a Talbot contour with a different crossing for
        // analytic kernels, a lower Gaver-Stehfest order for tabulated ones.
        GValue second;
        if (out.method == laplace::Method::talbot) {
            second = invert_weighted(kernel, s, t, 0.0, options, 1.5);
        } else {
            const laplace::RealTransform F = [&kernel, s](double p) { return g_hat(kernel, s, p).value; };
            const laplace::InversionResult gs = laplace::invert_gaver_stehfest(F, t, options.gaver_order - 2);
            second.value = gs.value;
            second.error_estimate = gs.error_estimate;
        }
        const double allowed = std::max(options.agreement_floor * std::max(1e-6, std::abs(out.value)),
                                        3.0 * (out.error_estimate + second.error_estimate));
        if (std::abs(out.value - second.value) > allowed) out.flagged = true;
    }
    return out;
}

GValue evaluate_weighted_G(const KernelSpec& kernel, double s, double t, double log_weight,
                           const SubordinationOptions& options) {
    require_s_t(s, t);
    return invert_weighted(kernel, s, t, log_weight, options);
}

double log_tail_bound(const KernelSpec& kernel, double S, double t, double beta) {
    // With a decaying weight the weighted tail is no longer nondecreasing in
    // t; bound the weight by its value at S and the plain tail instead.
    if (beta < 0.0) return beta * S + log_tail_bound(kernel, S, t, 0.0);
    auto f = [&](double lp) {
        const double p = std::exp(lp);
        const double L = eval_L(kernel, p);
        if (!(L > beta)) return kInf;
        return std::log(L) + p * t - S * (L - beta) - std::log(L - beta);
    };
    constexpr double lo = -23.0, hi = 23.0;
    constexpr int samples = 185;
    double best = kInf;
    int best_i = -1;
    for (int i = 0; i < samples; ++i) {
        const double v = f(lo + (hi - lo) * i / (samples - 1));
        if (v < best) {
            best = v;
            best_i = i;
        }
    }
    if (best_i < 0) return kInf;
    // golden-section refinement between the neighbours of the best sample
    double a = lo + (hi - lo) * std::max(best_i - 1, 0) / (samples - 1);
    double b = lo + (hi - lo) * std::min(best_i + 1, samples - 1) / (samples - 1);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 40; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return std::min({best, fc, fd});
}

double tail_cutoff(const KernelSpec& kernel, double t, double beta, double log_target) {
    if (log_tail_bound(kernel, 0.0, t, beta) <= log_target) return 0.0;
    double hi = 1.0;
    while (log_tail_bound(kernel, hi, t, beta) > log_target) {
        hi *= 2.0;
        if (hi > 1e12) {
            std::ostringstream msg;
            msg << "no s-cutoff brings the tail bound below e^" << log_target << " at t = " << t;
            throw IntegrabilityError(msg.str());
        }
    }
    double lo = hi / 2.0;
    if (hi == 1.0) lo = 0.0;
    for (int it = 0; it < 30 && hi - lo > 1e-6 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (log_tail_bound(kernel, mid, t, beta) > log_target ? lo : hi) = mid;
    }
    return hi;
}

double SubordinationKernelGrid::max_mass_deviation() const {
    double worst = 0.0;
    for (double m : row_mass) worst = std::max(worst, std::abs(m - 1.0));
    return worst;
}

namespace {

void require_grid(const std::vector<double>& g, bool allow_zero, const char* what) {
    if (g.empty()) throw DomainError(std::string(what) + " grid is empty");
    for (std::size_t i = 0; i < g.size(); ++i) {
        const bool ok = allow_zero ? g[i] >= 0.0 : g[i] > 0.0;
        if (!ok || !std::isfinite(g[i])) throw DomainError(std::string(what) + " grid has an invalid node");
        if (i > 0 && !(g[i] > g[i - 1])) throw DomainError(std::string(what) + " grid must be strictly increasing");
    }
}

constexpr int s_panels = 16;

struct Truncated {
    numerics::QuadratureResult integral;
    double cutoff = 0.0;
    double log_bound = 0.0;
};

// integral over [0, S] of f, with S from the tail bound for growth rate beta.
Truncated truncated_integral(const std::function<double(double)>& f, const KernelSpec& kernel, double t,
                             double beta, double s_limit, const SubordinationOptions& options) {
    const double log_tol = std::log(options.tail_tolerance);
    Truncated out;
    double S = tail_cutoff(kernel, t, beta, log_tol);
    if (S <= s_limit) {
        out.integral = numerics::integrate_panels(f, 0.0, S, s_panels, options.quadrature_tolerance);
        out.cutoff = S;
        out.log_bound = log_tail_bound(kernel, S, t, beta);
        return out;
    }
    // Relative criterion on the truncated range.
    out.integral = numerics::integrate_panels(f, 0.0, s_limit, s_panels, options.quadrature_tolerance);
    out.cutoff = s_limit;
    out.log_bound = log_tail_bound(kernel, s_limit, t, beta);
    const double scale = std::log(std::max(1.0, std::abs(out.integral.value)));
    if (!(out.log_bound <= std::log(options.tail_rejection) + scale)) {
        std::ostringstream msg;
        msg << "s-tail not integrable on [0, " << s_limit << "] at t = " << t << ": growth rate " << beta
            << " needs a cutoff near " << S;
        throw IntegrabilityError(msg.str());
    }
    return out;
}

} // namespace

SubordinationKernelGrid compute_G(const KernelSpec& kernel, const std::vector<double>& s_grid,
                                  const std::vector<double>& t_grid, const SubordinationOptions& options) {
    require_grid(s_grid, true, "s");
    require_grid(t_grid, false, "t");
    SubordinationKernelGrid grid{kernel, options, s_grid, t_grid, {}, {}, {}, {}, 0.0, 0, 0, {}};
    const std::size_t ns = s_grid.size(), nt = t_grid.size();
    grid.values.assign(ns * nt, 0.0);
    std::vector<double> raw(ns * nt, 0.0);
    std::vector<char> bad(ns * nt, 0);

    numerics::parallel_for(ns, [&](std::size_t i) {
        for (std::size_t j = 0; j < nt; ++j) {
            const GValue g = evaluate_G(kernel, s_grid[i], t_grid[j], options, true);
            raw[i * nt + j] = g.value;
            bad[i * nt + j] = g.flagged ? 1 : 0;
        }
    });
    for (std::size_t k = 0; k < raw.size(); ++k) {
        grid.min_pre_clip = std::min(grid.min_pre_clip, raw[k]);
        if (raw[k] < 0.0) ++grid.clipped;
        grid.values[k] = std::max(raw[k], 0.0);
        grid.flagged += bad[k];
    }
    if (grid.min_pre_clip < -1e-8) {
        std::ostringstream msg;
        msg << "negative inversion noise down to " << grid.min_pre_clip << " exceeds 1e-8";
        grid.diagnostics.push_back(msg.str());
    }

    grid.row_mass.assign(nt, 0.0);
    grid.row_mass_error.assign(nt, 0.0);
    grid.mass_cutoff.assign(nt, 0.0);
    numerics::parallel_for(nt, [&](std::size_t j) {
        const double t = t_grid[j];
        auto G = [&](double s) { return evaluate_G(kernel, s, t, options).value; };
        const Truncated tr = truncated_integral(G, kernel, t, 0.0, kInf, options);
        // Exponential extrapolation of what lies beyond the cutoff.
        double tail = 0.0;
        if (tr.cutoff > 0.0) {
            const double g1 = G(tr.cutoff), g0 = G(0.95 * tr.cutoff);
            if (g1 > 0.0 && g0 > g1) tail = g1 * 0.05 * tr.cutoff / std::log(g0 / g1);
        }
        grid.row_mass[j] = tr.integral.value + tail;
        grid.row_mass_error[j] = tr.integral.error + std::abs(tail) + std::exp(tr.log_bound);
        grid.mass_cutoff[j] = tr.cutoff;
    });
    for (std::size_t j = 0; j < nt; ++j) {
        const double dev = std::abs(grid.row_mass[j] - 1.0);
        if (dev > options.mass_rejection) {
            std::ostringstream msg;
            msg << "row mass " << grid.row_mass[j] << " at t = " << t_grid[j] << " deviates from 1 by " << dev;
            throw GridRejected(msg.str());
        }
        if (dev > options.mass_tolerance) {
            std::ostringstream msg;
            msg << "row mass at t = " << t_grid[j] << " off by " << dev;
            grid.diagnostics.push_back(msg.str());
        }
    }
    return grid;
}

ScalarSubordination subordinate_scalar(const std::function<double(double)>& u1, const KernelSpec& kernel,
                                       double t, double s_limit, double growth_rate,
                                       const SubordinationOptions& options) {
    if (!(t > 0.0)) throw DomainError("subordinate_scalar requires t > 0");
    auto f = [&](double s) {
        const double u = u1(s);
        if (u == 0.0) return 0.0;
        return evaluate_G(kernel, s, t, options).value * u;
    };
    const Truncated tr = truncated_integral(f, kernel, t, growth_rate, s_limit, options);
    if (!std::isfinite(tr.integral.value)) throw IntegrabilityError("subordinated integral is not finite");
    return {tr.integral.value, tr.integral.error + std::exp(tr.log_bound), tr.cutoff, tr.log_bound};
}

ScalarSubordination subordinate_scalar(const std::function<double(double)>& u1,
                                       const SubordinationKernelGrid& grid, double t, double growth_rate) {
    return subordinate_scalar(u1, grid.kernel, t, grid.s_limit(), growth_rate, grid.options);
}

ScalarSubordination subordinate_exponential(double z, const KernelSpec& kernel, double t, double s_limit,
                                            const SubordinationOptions& options) {
    if (!(t > 0.0)) throw DomainError("subordinate_exponential requires t > 0");
    auto f = [&](double s) { return evaluate_weighted_G(kernel, s, t, z * s, options).value; };
    const Truncated tr = truncated_integral(f, kernel, t, z, s_limit, options);
    if (!std::isfinite(tr.integral.value)) throw IntegrabilityError("subordinated integral is not finite");
    return {tr.integral.value, tr.integral.error + std::exp(tr.log_bound), tr.cutoff, tr.log_bound};
}

double SpectralHeatDemo::coefficient(int m) const {
    return coefficients.empty() ? 1.0 : coefficients.at(static_cast<std::size_t>(m - 1));
}

void SpectralHeatDemo::validate() const {
    if (mode_count < 1) throw DomainError("heat demo needs at least one mode");
    if (!coefficients.empty() && coefficients.size() != static_cast<std::size_t>(mode_count))
        throw DomainError("heat demo coefficient count does not match the mode count");
    for (double c : coefficients)
        if (!std::isfinite(c)) throw DomainError("heat demo coefficients must be finite");
    require_grid(t_grid, false, "t");
}

HeatDemoResult run_heat_demo(const SpectralHeatDemo& demo, const KernelSpec& kernel,
                             const SubordinationOptions& options) {
    demo.validate();
    const AdmissibilityReport adm = check_admissibility(kernel);
    if (!adm.admissible()) throw PreconditionError("heat demo refuses a non-admissible kernel: " + adm.diagnostic);

    const double S = tail_cutoff(kernel, demo.t_grid.back(), 0.0, std::log(options.tail_tolerance));
    const SubordinationKernelGrid grid = compute_G(kernel, numerics::linear_grid(0.0, S, 33), demo.t_grid, options);

    HeatDemoResult out;
    out.t_grid = demo.t_grid;
    out.max_mass_deviation = grid.max_mass_deviation();
    const std::size_t nt = demo.t_grid.size();
    for (int m = 1; m <= demo.mode_count; ++m) {
        HeatModeRow row;
        row.mode = m;
        row.lambda = demo.eigenvalue(m);
        row.coefficient = demo.coefficient(m);
        row.relaxation.assign(nt, 0.0);
        row.subordinated.assign(nt, 0.0);
        if (row.coefficient != 0.0) {
            const RelaxationSolution sol = solve_relaxation({kernel, row.lambda}, demo.t_grid);
            const double lambda = row.lambda;
            numerics::parallel_for(nt, [&](std::size_t j) {
                row.relaxation[j] = row.coefficient * sol.values[j];
                row.subordinated[j] = row.coefficient * subordinate_exponential(-lambda, kernel, demo.t_grid[j],
                                                                                 grid.s_limit(), options)
                                                            .value;
            });
        }
        for (std::size_t j = 0; j < nt; ++j)
            row.max_discrepancy = std::max(row.max_discrepancy, std::abs(row.relaxation[j] - row.subordinated[j]));
        out.max_discrepancy = std::max(out.max_discrepancy, row.max_discrepancy);
        out.modes.push_back(std::move(row));
    }
    return out;
}

} // namespace genfrac
