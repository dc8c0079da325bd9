#pragma once

#include <string>
#include <vector>

#include "genfrac/kernel_symbols.hpp"
#include "genfrac/laplace.hpp"

namespace genfrac {

/// (D_k u)(t) = -lambda u(t), u(0) = 1.
struct RelaxationProblem {
    KernelSpec kernel;
    double lambda = 1.0;

    void validate() const;
};

enum class DecayKind { power, logarithmic, unclassified };
const char* to_string(DecayKind kind);

struct DecayClass {
    DecayKind kind = DecayKind::unclassified;
    double exponent = 0.0;        // slope of log u against log t (power)
    double power_residual = 0.0;  // rms residual in log u of each model
    double log_residual = 0.0;
    std::string reason;
};

struct RelaxationOptions {
    int talbot_nodes = 32;
    int gaver_order = laplace::default_gaver_order;
    // Per-point agreement threshold between the two inversions, on top of
    // three times their combined error estimates.
    double agreement_floor = 1e-6;
    bool robust_fit = false;  // Theil-Sen tail fits in classify_decay
};

struct RelaxationSolution {
    double lambda = 0.0;
    std::vector<double> t_grid;
    std::vector<double> values;
    std::vector<double> error_estimates;
    std::vector<char> flagged;      // inversions disagreed, or the single method flagged itself
    std::vector<laplace::Method> methods;
    double max_clipped = 0.0;       // largest excursion outside [0, 1] removed by clipping
    DecayClass decay_class;
};

/// u~(p) = K(p) / (L(p) + lambda).
double relaxation_transform(const KernelSpec& kernel, double lambda, double p);
cplx relaxation_transform(const KernelSpec& kernel, double lambda, cplx p);

/// Inverts K/(L + lambda) at each grid time. Kernels with an analytic
/// continuation use Talbot cross-checked by Gaver-Stehfest; tabulated kernels
/// fall back to Gaver-Stehfest alone. t = 0 is rejected: u(0) = 1 is known.
RelaxationSolution solve_relaxation(const RelaxationProblem& problem, const std::vector<double>& t_grid,
                                    const RelaxationOptions& options = {});

/// Single point of the same computation.
laplace::InversionResult relaxation_value(const RelaxationProblem& problem, double t,
                                          const RelaxationOptions& options, bool* disagreement = nullptr);

/// Fits log u against log t (power law) and 1/u against log t (logarithmic
/// decay) over the last two decades of the grid, which must reach t >= 1e3.
DecayClass classify_decay(const RelaxationSolution& solution, bool robust = false);

/// Spectral density of the Stieltjes function K/(L + lambda):
///   sigma(r) = -(1/pi) Im h(-r + i0).
/// Requires an analytic continuation.
double relaxation_spectral_density(const KernelSpec& kernel, double lambda, double r);

/// Finite-difference sign test of t -> u(t) up to the given order on a log grid.
CmSignTest relaxation_cm_test(const RelaxationProblem& problem, double t_lo, double t_hi, std::size_t points,
                              int max_order, const RelaxationOptions& options = {});

} // namespace genfrac
