#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "genfrac/kernel_symbols.hpp"
#include "genfrac/relaxation.hpp"
#include "genfrac/subordination.hpp"

namespace genfrac {

enum class Regime { growing, decaying };
const char* to_string(Regime regime);

struct RootResult {
    double z = 0.0;
    double p0 = 0.0;
    double L_prime_at_p0 = 0.0;  // central difference, step 1e-6 p0
    std::pair<double, double> bracket;
    int iterations = 0;
};

/// Unique root of L(p0) = z. Brackets by doubling/halving from p = 1 inside
/// [1e-12, 1e12], then safeguarded Newton.
RootResult solve_p0(const KernelSpec& kernel, double z);

enum class Verdict { converges, diverges, inconclusive };
const char* to_string(Verdict verdict);

struct IntegrabilityResult {
    Verdict verdict = Verdict::inconclusive;
    std::vector<double> T;           // 2, 4, ..., 2^40
    std::vector<double> partial;     // I(T) = integral over [1, T] of ds / (s L(s))
    std::vector<double> increments;  // contribution of each dyadic interval
    std::optional<double> limit;     // geometric extrapolation of I(inf) when converging
    std::string reason;
};

/// Heuristic classification of the integrability of 1/(s L(s)) at infinity
/// from dyadic increments: converges when the last eight increment ratios
/// are all <= 0.97, diverges when the increments (or k times the k-th
/// increment, the harmonic signature of a logarithmic L) stop decreasing.
IntegrabilityResult check_integrability(const KernelSpec& kernel);

using Partition = std::vector<int>;

/// Partitions of n into at least two parts, parts non-increasing, in
/// lexicographic order. Exhaustive for n <= 6, the first 20 beyond.
std::vector<Partition> partitions_of(int n);
std::string to_string(const Partition& parts);

struct SuperadditivityMargin {
    int n = 0;
    Partition parts;
    double margin = 0.0;  // p0(n beta) - sum p0(m_j beta)
};

std::vector<SuperadditivityMargin> check_superadditivity(const KernelSpec& kernel, double beta,
                                                         const std::vector<Partition>& partitions);

enum class CellMethod { quadrature, contour, relaxation, degenerate };
const char* to_string(CellMethod method);

enum class RoutePolicy {
    automatic,       // both routes for t <= quadrature_max_t, contour beyond
    both,
    contour_only,
    quadrature_only,
};

struct HierarchyOptions {
    RoutePolicy policy = RoutePolicy::automatic;
    double quadrature_max_t = 5.0;
    double route_tolerance = 1e-4;  // relative agreement required of the two routes
    SubordinationOptions subordination;
    RelaxationOptions relaxation;
};

struct GrowingValue {
    double value = 0.0;       // may be +inf when only log_value is representable
    double log_value = 0.0;
    double error_estimate = 0.0;
    CellMethod method = CellMethod::contour;
    std::optional<double> quadrature;
    std::optional<double> contour;
    double residue_term = 0.0;  // z e^{p0 t} / (L'(p0) p0)
    RootResult root;
    bool flagged = false;
    std::string note;
};

/// A(t, z) = integral over s > 0 of e^{zs} G(s, t) ds for z > 0. The contour
/// route writes A = 1 + z e^{p0 t}/(L'(p0) p0) + J, with J the Bromwich line
/// integral of e^{pt} z/(p (L(p) - z)) at abscissa p0/2. Refuses kernels whose
/// 1/(s L(s)) integral is classified divergent.
GrowingValue A_growing(const KernelSpec& kernel, double t, double z, const HierarchyOptions& options = {});

struct DecayingValues {
    RelaxationSolution solution;
    bool monotone = true;  // non-increasing in t within twice the error estimates
};

/// A(t, -z) for z > 0 on a grid; the same computation as solve_relaxation
/// with lambda = z.
DecayingValues A_decaying(const KernelSpec& kernel, const std::vector<double>& t_grid, double z,
                          const RelaxationOptions& options = {});
laplace::InversionResult A_decaying(const KernelSpec& kernel, double t, double z,
                                    const RelaxationOptions& options = {});

struct TauberianProfile {
    double gamma = 0.0;
    double q_exponent = 0.0;      // Q(x) ~ (log x)^q_exponent; 0 when Q is constant
    std::string q_description;
    double residual = 0.0;        // rms of log K about the chosen model
    double power_only_gamma = 0.0;
    double power_only_residual = 0.0;
};

/// Fits log K(p) = c - gamma log p on p in [1e-8, 1e-3]; when a slowly varying
/// factor (log 1/p)^q is clearly present it is fitted jointly.
TauberianProfile tauberian_profile(const KernelSpec& kernel);

struct HierarchyParams {
    KernelSpec kernel;
    double beta = 1.0;
    Regime regime = Regime::growing;
    int n_max = 2;
    std::vector<double> t_grid;
    // Slope fits and monotonicity checks use [t_lo, t_hi]; default is the
    // last decade of the grid.
    std::optional<std::pair<double, double>> fit_window;
    HierarchyOptions options;

    void validate() const;
};

struct CorrelationTable {
    Regime regime = Regime::growing;
    int n_max = 0;
    std::vector<double> t_grid;
    // Row-major in (n - 1, i_t).
    std::vector<double> kappa;
    std::vector<double> log_kappa;
    std::vector<double> error;
    std::vector<CellMethod> method;
    std::vector<char> flagged;

    std::size_t index(int n, std::size_t i_t) const { return static_cast<std::size_t>(n - 1) * t_grid.size() + i_t; }
};

struct RatioSeries {
    int n = 0;
    Partition parts;
    std::vector<double> log_ratio;      // over the full grid
    double fitted_slope = 0.0;          // growing: d log ratio / dt; decaying: d log ratio / d log t
    std::optional<double> predicted;    // growing: superadditivity margin; decaying: (1 - gamma)(k - 1)
    double relative_error = 0.0;
    bool strictly_increasing = false;   // over the fit window
};

struct IntermittencyReport {
    Regime regime = Regime::growing;
    double beta = 0.0;
    bool degenerate = false;
    bool hypothesis_met = false;
    std::optional<IntegrabilityResult> integrability;
    std::vector<SuperadditivityMargin> superadditivity;
    std::vector<RatioSeries> ratios;
    std::optional<TauberianProfile> tauberian;
    std::optional<double> fitted_gamma;  // decaying: 1 + slope of log kappa^(1) against log t
    std::pair<double, double> fit_window{0.0, 0.0};
    std::vector<std::string> notes;
};

struct HierarchyResult {
    CorrelationTable table;
    IntermittencyReport report;
};

HierarchyResult build_report(const HierarchyParams& params);

} // namespace genfrac
