#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace genfrac::numerics {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b]. Nodes are computed once per order and cached.
const GaussRule& gauss_legendre_unit(int order);
GaussRule gauss_legendre(int order, double a, double b);

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive Gauss-Kronrod (7/15) on [a, b] split into `panels` equal pieces
// before refinement. Panel contributions are summed in index order.
QuadratureResult integrate_panels(const std::function<double(double)>& f,
                                  double a, double b, int panels,
                                  double rel_tol = 1e-11, int max_depth = 12);

// Ordinary least squares y = c0 + c1*x.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms_residual = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Theil-Sen slope with median intercept.
LineFit fit_line_robust(std::span<const double> x, std::span<const double> y);

// Least squares y = c0 + c1*x1 + c2*x2.
struct PlaneFit {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double rms_residual = 0.0;
};
PlaneFit fit_plane(std::span<const double> x1, std::span<const double> x2,
                   std::span<const double> y);

std::vector<double> log_grid(double lo, double hi, std::size_t points);
std::vector<double> log_grid_per_decade(double lo, double hi, int per_decade);
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

// Worker count from GENFRAC_THREADS (default: hardware concurrency).
unsigned worker_count();

// Runs body(i) for i in [0, n). Each index is handled exactly once; callers
// write results into preassigned slots so output order never depends on
// scheduling. The first exception thrown is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace genfrac::numerics
