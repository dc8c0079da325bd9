#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "genfrac/kernel_symbols.hpp"
#include "genfrac/laplace.hpp"

namespace genfrac {

struct GHat {
    double value = 0.0;
    bool underflow = false;  // s L(p) too large; value reported as 0
};

/// g(s, p) = K(p) exp(-s L(p)).
GHat g_hat(const KernelSpec& kernel, double s, double p);
cplx g_hat(const KernelSpec& kernel, double s, cplx p);

struct SubordinationOptions {
    int talbot_nodes = 32;
    int gaver_order = laplace::default_gaver_order;
    double agreement_floor = 1e-6;  // relative, between the two inversions of one cell
    double tail_tolerance = 1e-12;  // s-tail bound target
    double tail_rejection = 1e-8;   // relative tail bound at s_limit beyond which integrals are refused
    double quadrature_tolerance = 1e-10;
    double mass_tolerance = 1e-4;   // row-mass invariant
    double mass_rejection = 1e-3;   // row masses further off reject the grid
    int max_talbot_nodes = 8192;
};

/// G(s, t) before clipping, with the inversion diagnostics.
struct GValue {
    double value = 0.0;
    double error_estimate = 0.0;
    laplace::Method method = laplace::Method::talbot;
    bool flagged = false;
};

/// Inverts g(s, .) at t. The Talbot contour is moved out to the saddle point
/// of e^{pt} g(s, p) when that lies beyond the standard crossing, which keeps
/// relative accuracy deep in the tail of G in s.
GValue evaluate_G(const KernelSpec& kernel, double s, double t, const SubordinationOptions& options = {},
                  bool cross_check = false);

/// e^{log_weight} G(s, t), with the weight folded into the exponent of the
/// contour integrand so that neither factor has to be representable alone.
GValue evaluate_weighted_G(const KernelSpec& kernel, double s, double t, double log_weight,
                           const SubordinationOptions& options = {});

/// Chernoff-type bound on the s-tail integral over (S, inf) of e^{beta s} G(s, t):
///   log of inf over p with L(p) > beta of L(p) e^{pt - S(L(p) - beta)} / (L(p) - beta).
/// Valid because the tail is nondecreasing in t when beta >= 0. For beta < 0
/// the weight is bounded by e^{beta S} and the beta = 0 bound used.
double log_tail_bound(const KernelSpec& kernel, double S, double t, double beta);

/// Smallest S (up to bisection accuracy) with log_tail_bound <= log_target.
double tail_cutoff(const KernelSpec& kernel, double t, double beta, double log_target);

struct SubordinationKernelGrid {
    KernelSpec kernel;
    SubordinationOptions options;
    std::vector<double> s_grid;
    std::vector<double> t_grid;
    std::vector<double> values;           // values[i_s * t_grid.size() + i_t], clipped at 0
    std::vector<double> row_mass;         // per t
    std::vector<double> row_mass_error;   // quadrature error plus extrapolated tail
    std::vector<double> mass_cutoff;      // s_max used for each row mass
    double min_pre_clip = 0.0;
    std::size_t clipped = 0;
    std::size_t flagged = 0;              // cells where the inversions disagreed
    std::vector<std::string> diagnostics;

    double at(std::size_t i_s, std::size_t i_t) const { return values[i_s * t_grid.size() + i_t]; }
    double s_limit() const { return s_grid.empty() ? 0.0 : s_grid.back(); }
    double max_mass_deviation() const;
};

/// Tabulates G on s_grid x t_grid and integrates each column in s. Throws
/// GridRejected when a row mass is off by more than options.mass_rejection.
SubordinationKernelGrid compute_G(const KernelSpec& kernel, const std::vector<double>& s_grid,
                                  const std::vector<double>& t_grid, const SubordinationOptions& options = {});

struct ScalarSubordination {
    double value = 0.0;
    double error_estimate = 0.0;
    double s_cutoff = 0.0;
    double log_tail_bound = 0.0;
};

/// integral over s > 0 of G(s, t) u1(s) ds, for |u1(s)| <= C e^{growth_rate s}.
/// The integral is truncated where the tail bound falls below tail_tolerance.
/// When that point lies past s_limit the integral stops at s_limit, and it is
/// refused as not integrable if the bound there still exceeds
/// tail_rejection * max(1, |value|).
ScalarSubordination subordinate_scalar(const std::function<double(double)>& u1, const KernelSpec& kernel,
                                       double t, double s_limit, double growth_rate = 0.0,
                                       const SubordinationOptions& options = {});

ScalarSubordination subordinate_scalar(const std::function<double(double)>& u1,
                                       const SubordinationKernelGrid& grid, double t, double growth_rate = 0.0);

/// subordinate_scalar for u1(s) = e^{z s}, any real z, evaluated without
/// forming e^{z s} separately.
ScalarSubordination subordinate_exponential(double z, const KernelSpec& kernel, double t, double s_limit,
                                            const SubordinationOptions& options = {});

/// Modes e^{imx} on the torus, eigenvalues m^2.
struct SpectralHeatDemo {
    int mode_count = 16;
    std::vector<double> coefficients;  // empty means all ones
    std::vector<double> t_grid;

    double eigenvalue(int m) const { return static_cast<double>(m) * m; }
    double coefficient(int m) const;
    void validate() const;
};

struct HeatModeRow {
    int mode = 0;
    double lambda = 0.0;
    double coefficient = 0.0;
    std::vector<double> relaxation;    // c_m u_lambda(t), via the relaxation solver
    std::vector<double> subordinated;  // c_m integral G(s, t) e^{-lambda s} ds
    double max_discrepancy = 0.0;
};

struct HeatDemoResult {
    std::vector<double> t_grid;
    std::vector<HeatModeRow> modes;
    double max_discrepancy = 0.0;
    double max_mass_deviation = 0.0;
};

/// Per-mode comparison of the two routes. Non-admissible kernels are refused.
HeatDemoResult run_heat_demo(const SpectralHeatDemo& demo, const KernelSpec& kernel,
                             const SubordinationOptions& options = {});

} // namespace genfrac
