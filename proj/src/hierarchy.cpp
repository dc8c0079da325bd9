#include "genfrac/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "genfrac/errors.hpp"
#include "genfrac/numerics.hpp"

namespace genfrac {

const char* to_string(Regime regime) {
    return regime == Regime::growing ? "growing" : "decaying";
}

const char* to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::converges: return "converges";
    case Verdict::diverges: return "diverges";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

const char* to_string(CellMethod method) {
    switch (method) {
    case CellMethod::quadrature: return "quadrature";
    case CellMethod::contour: return "contour";
    case CellMethod::relaxation: return "relaxation";
    case CellMethod::degenerate: return "degenerate";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// p0

RootResult solve_p0(const KernelSpec& kernel, double z) {
    if (!(z > 0.0) || !std::isfinite(z)) {
        std::ostringstream msg;
        msg << "solve_p0 requires finite z > 0, got " << z;
        throw DomainError(msg.str());
    }
    constexpr double p_min = 1e-12, p_max = 1e12;
    double lo = 1.0, hi = 1.0;
    if (eval_L(kernel, 1.0) < z) {
        while (eval_L(kernel, hi) < z) {
            lo = hi;
            hi *= 2.0;
            if (hi > p_max) {
                std::ostringstream msg;
                msg << "L(p) stays below " << z << " on [1, 1e12]; the symbol is not onto (0, inf)";
                throw RangeError(msg.str());
            }
        }
    } else {
        while (eval_L(kernel, lo) > z) {
            hi = lo;
            lo *= 0.5;
            if (lo < p_min) {
                std::ostringstream msg;
                msg << "L(p) stays above " << z << " on [1e-12, 1]; the symbol does not vanish at 0";
                throw RangeError(msg.str());
            }
        }
    }
    const double tol = 1e-13 * std::max(1.0, z);
    double p = std::sqrt(lo * hi);
    int it = 0;
    for (; it < 200; ++it) {
        const double f = eval_L(kernel, p) - z;
        if (std::abs(f) <= tol) break;
        (f < 0.0 ? lo : hi) = p;
        double next = p - f / eval_dL(kernel, p);
        // Newton leaves the bracket: fall back to (geometric) bisection.
        if (!(next > lo && next < hi)) next = (hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (next == p) break;
        p = next;
    }
    RootResult r;
    r.z = z;
    r.p0 = p;
    r.bracket = {lo, hi};
    r.iterations = it;
    const double h = 1e-6 * p;
    r.L_prime_at_p0 = (eval_L(kernel, p + h) - eval_L(kernel, p - h)) / (2.0 * h);
    if (std::abs(eval_L(kernel, p) - z) > 1e-12 * std::max(1.0, z)) {
        std::ostringstream msg;
        msg << "root of L(p) = " << z << " did not reach the residual tolerance";
        throw RangeError(msg.str());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Integrability of 1/(s L(s))

IntegrabilityResult check_integrability(const KernelSpec& kernel) {
    IntegrabilityResult out;
    constexpr int intervals = 40;
    constexpr int window = 8;
    const double ln2 = std::numbers::ln2;
    try {
        double total = 0.0;
        for (int k = 0; k < intervals; ++k) {
            // s = e^u turns ds/(s L(s)) into du / L(e^u)
            const numerics::GaussRule rule = numerics::gauss_legendre(32, k * ln2, (k + 1) * ln2);
            double inc = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                inc += rule.weights[i] / eval_L(kernel, std::exp(rule.nodes[i]));
            total += inc;
            out.increments.push_back(inc);
            out.partial.push_back(total);
            out.T.push_back(std::ldexp(1.0, k + 1));
        }
    } catch (const NumericError& e) {
        out.reason = std::string("evaluation failed: ") + e.what();
        return out;
    }
    const auto& inc = out.increments;
    bool geometric = true, nondecreasing = true, harmonic = true;
    double last_ratio = 0.0;
    for (int k = intervals - window; k < intervals; ++k) {
        const double ratio = inc[k] / inc[k - 1];
        last_ratio = ratio;
        if (!(ratio <= 0.97)) geometric = false;
        if (!(inc[k] >= inc[k - 1])) nondecreasing = false;
        if (!(k * inc[k] >= (k - 1) * inc[k - 1])) harmonic = false;
    }
    if (geometric) {
        out.verdict = Verdict::converges;
        out.limit = out.partial.back() + inc.back() * last_ratio / (1.0 - last_ratio);
        out.reason = "dyadic increments decay geometrically";
    } else if (nondecreasing) {
        out.verdict = Verdict::diverges;
        out.reason = "dyadic increments are non-decreasing";
    } else if (harmonic) {
        out.verdict = Verdict::diverges;
        out.reason = "dyadic increments decay no faster than 1/k";
    } else {
        out.reason = "increments decay, but too slowly to extrapolate";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Partitions and superadditivity

std::vector<Partition> partitions_of(int n) {
    if (n < 2) return {};
    std::vector<Partition> all;
    Partition current;
    // parts non-increasing, each <= bound
    auto recurse = [&](auto&& self, int remaining, int bound) -> void {
        if (remaining == 0) {
            if (current.size() >= 2) all.push_back(current);
            return;
        }
        for (int part = 1; part <= std::min(remaining, bound); ++part) {
            current.push_back(part);
            self(self, remaining - part, part);
            current.pop_back();
        }
    };
    recurse(recurse, n, n);
    std::sort(all.begin(), all.end(), [](const Partition& a, const Partition& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
    if (n > 6 && all.size() > 20) all.resize(20);
    return all;
}

std::string to_string(const Partition& parts) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) s += '+';
        s += std::to_string(parts[i]);
    }
    return s;
}

std::vector<SuperadditivityMargin> check_superadditivity(const KernelSpec& kernel, double beta,
                                                         const std::vector<Partition>& partitions) {
    if (!(beta > 0.0)) throw DomainError("superadditivity margins need beta > 0");
    std::vector<SuperadditivityMargin> out;
    for (const Partition& parts : partitions) {
        int n = 0;
        double sum = 0.0;
        for (int m : parts) {
            if (m < 1) throw DomainError("partition parts must be positive");
            n += m;
            sum += solve_p0(kernel, m * beta).p0;
        }
        out.push_back({n, parts, solve_p0(kernel, n * beta).p0 - sum});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Growing regime

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long max_bromwich_block = 20000;

struct ContourValue {
    bool available = false;
    double log_value = 0.0;
    double error = 0.0;   // absolute
    double residue = 0.0;
    std::string note;
};

ContourValue contour_route(const KernelSpec& kernel, double t, double z, const RootResult& root) {
    ContourValue out;
    const double p0 = root.p0;
    if (!kernel.has_analytic_continuation()) {
        // Real-axis substitute: A(t) = e^{p0 t} * inverse of A~(q + p0), pole moved to q = 0.
        const laplace::RealTransform F = [&kernel, z, p0](double q) {
            const double p = q + p0;
            return eval_K(kernel, p) / (eval_L(kernel, p) - z);
        };
        const laplace::InversionResult r = laplace::invert_gaver_stehfest(F, t, laplace::default_gaver_order);
        if (!(r.value > 0.0)) {
            out.note = "shifted Gaver-Stehfest inversion returned a non-positive value";
            return out;
        }
        out.available = true;
        out.log_value = p0 * t + std::log(r.value);
        out.error = std::exp(p0 * t) * r.error_estimate;
        out.residue = std::exp(p0 * t) * z / (root.L_prime_at_p0 * p0);
        out.note = "shifted Gaver-Stehfest (no analytic continuation)";
        return out;
    }
    const double r = 0.5 * p0;
    laplace::BromwichConfig config = laplace::BromwichConfig::with_gap(r, r);
    const double h = config.truncation / config.nodes;
    if (std::ceil(std::numbers::pi / (t * h)) > max_bromwich_block) {
        out.note = "p0 t too small for the line quadrature";
        return out;
    }
    const laplace::ComplexTransform B = [&kernel, z](cplx p) {
        return z / (p * (eval_L(kernel, p) - z));
    };
    const laplace::InversionResult line = laplace::bromwich_line(B, t, config);
    const double c = z / (root.L_prime_at_p0 * p0);
    // log(1 + c e^{p0 t} + J) without forming e^{p0 t}
    const double rest = (1.0 + line.value) * std::exp(-p0 * t);
    if (!(c + rest > 0.0)) {
        out.note = "contour remainder cancels the residue term";
        return out;
    }
    out.available = true;
    out.log_value = p0 * t + std::log(c + rest);
    out.residue = c * std::exp(p0 * t);
    // central-difference L'(p0) is good to roughly 1e-9 relative
    out.error = line.error_estimate + 1e-9 * out.residue;
    out.note = line.flagged ? "Bromwich remainder flagged" : "";
    return out;
}

GrowingValue growing_cell(const KernelSpec& kernel, double t, double z, const HierarchyOptions& options) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("A_growing requires finite t > 0");
    if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("A_growing requires finite z > 0");
    GrowingValue out;
    out.root = solve_p0(kernel, z);

    bool want_contour = true, want_quadrature = true;
    switch (options.policy) {
    case RoutePolicy::automatic: want_quadrature = t <= options.quadrature_max_t; break;
    case RoutePolicy::both: break;
    case RoutePolicy::contour_only: want_quadrature = false; break;
    case RoutePolicy::quadrature_only: want_contour = false; break;
    }

    ContourValue contour;
    if (want_contour) {
        contour = contour_route(kernel, t, z, out.root);
        out.note = contour.note;
        if (contour.available) out.contour = std::exp(contour.log_value);
        out.residue_term = contour.residue;
        if (!contour.available) want_quadrature = true;
    }
    std::optional<ScalarSubordination> quad;
    if (want_quadrature) {
        quad = subordinate_exponential(z, kernel, t, kInf, options.subordination);
        out.quadrature = quad->value;
    }

    if (quad && (t <= options.quadrature_max_t || !contour.available)) {
        out.method = CellMethod::quadrature;
        out.value = quad->value;
        out.log_value = std::log(quad->value);
        out.error_estimate = quad->error_estimate;
    } else {
        out.method = CellMethod::contour;
        out.log_value = contour.log_value;
        out.value = std::exp(contour.log_value);
        out.error_estimate = contour.error;
    }
    if (quad && contour.available) {
        const double a = *out.quadrature, b = *out.contour;
        const double allowed = std::max(options.route_tolerance * std::abs(out.value), quad->error_estimate + contour.error);
        if (std::abs(a - b) > allowed) {
            out.flagged = true;
            std::ostringstream msg;
            msg << "routes disagree: quadrature " << a << ", contour " << b;
            out.note = msg.str();
        }
    }
    return out;
}

} // namespace

GrowingValue A_growing(const KernelSpec& kernel, double t, double z, const HierarchyOptions& options) {
    const IntegrabilityResult c10 = check_integrability(kernel);
    if (c10.verdict == Verdict::diverges)
        throw PreconditionError("integral of 1/(s L(s)) at infinity classified divergent: " + c10.reason);
    GrowingValue v = growing_cell(kernel, t, z, options);
    if (c10.verdict == Verdict::inconclusive) {
        if (!v.note.empty()) v.note += "; ";
        v.note += "integrability of 1/(s L(s)) inconclusive";
    }
    return v;
}

// ---------------------------------------------------------------------------
// Decaying regime

DecayingValues A_decaying(const KernelSpec& kernel, const std::vector<double>& t_grid, double z,
                          const RelaxationOptions& options) {
    DecayingValues out{solve_relaxation({kernel, z}, t_grid, options), true};
    const auto& v = out.solution.values;
    const auto& e = out.solution.error_estimates;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] + 2.0 * (e[i] + e[i - 1]) + 1e-14) out.monotone = false;
    return out;
}

laplace::InversionResult A_decaying(const KernelSpec& kernel, double t, double z, const RelaxationOptions& options) {
    const RelaxationProblem problem{kernel, z};
    problem.validate();
    return relaxation_value(problem, t, options);
}

// ---------------------------------------------------------------------------
// Tauberian profile

TauberianProfile tauberian_profile(const KernelSpec& kernel) {
    const std::vector<double> p = numerics::log_grid_per_decade(1e-8, 1e-3, 10);
    std::vector<double> x, y, w;
    for (double pi : p) {
        x.push_back(std::log(pi));
        y.push_back(std::log(eval_K(kernel, pi)));
        w.push_back(std::log(-std::log(pi)));
    }
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] > y[i - 1]) throw FitError("K is not non-increasing on [1e-8, 1e-3]");

    TauberianProfile out;
    const numerics::LineFit line = numerics::fit_line(x, y);
    out.power_only_gamma = -line.slope;
    out.power_only_residual = line.rms_residual;
    out.gamma = -line.slope;
    out.residual = line.rms_residual;
    out.q_description = "constant";

    // A pure power leaves nothing for the joint fit to explain.
    if (line.rms_residual > 1e-6) {
        const numerics::PlaneFit plane = numerics::fit_plane(x, w, y);
        if (plane.rms_residual < 0.1 * line.rms_residual) {
            out.gamma = -plane.c1;
            out.q_exponent = plane.c2;
            out.residual = plane.rms_residual;
            std::ostringstream d;
            d << "logarithmic: Q(x) ~ (log x)^" << plane.c2;
            out.q_description = d.str();
        } else {
            out.q_description = "unresolved slowly varying factor";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report

void HierarchyParams::validate() const {
    if (n_max < 2) throw DomainError("n_max must be at least 2");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and non-negative");
    if (t_grid.size() < 2) throw DomainError("time grid needs at least two points");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0) || !std::isfinite(t_grid[i])) throw DomainError("time grid must be positive");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw DomainError("time grid must be strictly increasing");
    }
    if (fit_window && !(fit_window->second > fit_window->first))
        throw DomainError("fit window must have t_lo < t_hi");
}

namespace {

std::vector<std::size_t> window_indices(const std::vector<double>& t, std::pair<double, double> window) {
    std::vector<std::size_t> idx;
    const double slack = 1e-9;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= window.first * (1.0 - slack) && t[i] <= window.second * (1.0 + slack)) idx.push_back(i);
    return idx;
}

} // namespace

HierarchyResult build_report(const HierarchyParams& params) {
    params.validate();
    HierarchyResult result;
    CorrelationTable& table = result.table;
    IntermittencyReport& report = result.report;
    const auto& t = params.t_grid;
    const std::size_t nt = t.size();
    const int n_max = params.n_max;
    const KernelSpec& kernel = params.kernel;

    table.regime = params.regime;
    table.n_max = n_max;
    table.t_grid = t;
    const std::size_t cells = static_cast<std::size_t>(n_max) * nt;
    table.kappa.assign(cells, 1.0);
    table.log_kappa.assign(cells, 0.0);
    table.error.assign(cells, 0.0);
    table.method.assign(cells, CellMethod::degenerate);
    table.flagged.assign(cells, 0);

    report.regime = params.regime;
    report.beta = params.beta;
    report.fit_window = params.fit_window.value_or(std::make_pair(t.back() / 10.0, t.back()));
    const std::vector<std::size_t> win = window_indices(t, report.fit_window);

    std::vector<Partition> all_partitions;
    for (int n = 2; n <= n_max; ++n)
        for (Partition& p : partitions_of(n)) all_partitions.push_back(std::move(p));

    if (params.beta == 0.0) {
        report.degenerate = true;
        report.notes.push_back("beta = 0: every correlation is identically 1");
        for (const Partition& parts : all_partitions) {
            RatioSeries rs;
            rs.parts = parts;
            for (int m : parts) rs.n += m;
            rs.log_ratio.assign(nt, 0.0);
            report.ratios.push_back(std::move(rs));
        }
        return result;
    }

    if (params.regime == Regime::growing) {
        report.integrability = check_integrability(kernel);
        const AdmissibilityReport adm = check_admissibility(kernel);
        report.hypothesis_met = adm.admissible() && report.integrability->verdict == Verdict::converges;
        if (!adm.admissible()) report.notes.push_back("kernel not admissible: " + adm.diagnostic);
        if (report.integrability->verdict != Verdict::converges)
            report.notes.push_back(std::string("growing-regime hypothesis unmet: integral of 1/(s L(s)) ") +
                                   to_string(report.integrability->verdict) + "; ratios reported as data only");
        report.superadditivity = check_superadditivity(kernel, params.beta, all_partitions);

        std::vector<std::string> cell_notes(cells);
        numerics::parallel_for(cells, [&](std::size_t k) {
            const int n = static_cast<int>(k / nt) + 1;
            const std::size_t j = k % nt;
            const GrowingValue v = growing_cell(kernel, t[j], n * params.beta, params.options);
            table.kappa[k] = v.value;
            table.log_kappa[k] = v.log_value;
            table.error[k] = v.error_estimate;
            table.method[k] = v.method;
            table.flagged[k] = v.flagged ? 1 : 0;
            if (v.flagged) cell_notes[k] = v.note;
        });
        for (std::size_t k = 0; k < cells; ++k)
            if (!cell_notes[k].empty())
                report.notes.push_back("n=" + std::to_string(k / nt + 1) + " t=" + std::to_string(t[k % nt]) + ": " +
                                       cell_notes[k]);
        for (std::size_t j = 0; j < nt; ++j)
            for (int n = 2; n <= n_max; ++n)
                if (table.log_kappa[table.index(n, j)] < table.log_kappa[table.index(n - 1, j)] - 1e-12) {
                    report.notes.push_back("kappa decreases in n at t=" + std::to_string(t[j]));
                    break;
                }
    } else {
        report.hypothesis_met = check_admissibility(kernel).admissible();
        try {
            report.tauberian = tauberian_profile(kernel);
        } catch (const FitError& e) {
            report.notes.push_back(std::string("tauberian profile: ") + e.what());
            report.hypothesis_met = false;
        }
        for (int n = 1; n <= n_max; ++n) {
            const DecayingValues d = A_decaying(kernel, t, n * params.beta, params.options.relaxation);
            if (!d.monotone) report.notes.push_back("kappa^(" + std::to_string(n) + ") not monotone in t");
            for (std::size_t j = 0; j < nt; ++j) {
                const std::size_t k = table.index(n, j);
                table.kappa[k] = d.solution.values[j];
                table.log_kappa[k] = std::log(d.solution.values[j]);
                table.error[k] = d.solution.error_estimates[j];
                table.method[k] = CellMethod::relaxation;
                table.flagged[k] = d.solution.flagged[j];
            }
        }
        if (win.size() >= 2) {
            std::vector<double> lx, ly;
            for (std::size_t j : win) {
                lx.push_back(std::log(t[j]));
                ly.push_back(table.log_kappa[table.index(1, j)]);
            }
            report.fitted_gamma = 1.0 + numerics::fit_line(lx, ly).slope;
        }
    }

    for (std::size_t q = 0; q < all_partitions.size(); ++q) {
        RatioSeries rs;
        rs.parts = all_partitions[q];
        for (int m : rs.parts) rs.n += m;
        rs.log_ratio.assign(nt, 0.0);
        for (std::size_t j = 0; j < nt; ++j) {
            double lr = table.log_kappa[table.index(rs.n, j)];
            for (int m : rs.parts) lr -= table.log_kappa[table.index(m, j)];
            rs.log_ratio[j] = lr;
        }
        if (win.size() >= 2) {
            std::vector<double> x, y;
            for (std::size_t j : win) {
                x.push_back(params.regime == Regime::growing ? t[j] : std::log(t[j]));
                y.push_back(rs.log_ratio[j]);
            }
            rs.fitted_slope = numerics::fit_line(x, y).slope;
            rs.strictly_increasing = true;
            for (std::size_t i = 1; i < win.size(); ++i)
                if (!(rs.log_ratio[win[i]] > rs.log_ratio[win[i - 1]])) rs.strictly_increasing = false;
        }
        if (params.regime == Regime::growing) {
            rs.predicted = report.superadditivity[q].margin;
        } else if (report.tauberian) {
            rs.predicted = (1.0 - report.tauberian->gamma) * (static_cast<double>(rs.parts.size()) - 1.0);
        }
        if (rs.predicted && *rs.predicted != 0.0)
            rs.relative_error = std::abs(rs.fitted_slope - *rs.predicted) / std::abs(*rs.predicted);
        report.ratios.push_back(std::move(rs));
    }
    if (win.size() < 2) report.notes.push_back("fit window holds fewer than two grid points");
    return result;
}

} // namespace genfrac
