#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace genfrac::laplace {

using cplx = std::complex<double>;

enum class Method { talbot, gaver_stehfest, bromwich_shifted };
const char* to_string(Method method);

struct InversionResult {
    double value = 0.0;
    double error_estimate = 0.0;
    Method method = Method::talbot;
    std::size_t evaluations = 0;
    bool flagged = false;  // estimate did not settle; treat value with suspicion
    std::string note;
};

/// Transform evaluator on the cut plane. Must satisfy F(conj p) = conj F(p)
/// and be callable concurrently.
using ComplexTransform = std::function<cplx(cplx)>;
/// Transform evaluator on the positive half-line.
using RealTransform = std::function<double(double)>;

inline constexpr int default_talbot_nodes = 24;
inline constexpr int default_gaver_order = 16;

/// Fixed-contour Talbot inversion on the optimized cotangent contour
///   p(theta) = (N/t) (-0.6122 + 0.5017 theta cot(0.6407 theta) + 0.2645 i theta).
/// All singularities of F must lie on (-inf, 0]. The error estimate compares
/// N against 2N nodes on the same contour.
InversionResult invert_talbot(const ComplexTransform& F, double t, int nodes = default_talbot_nodes);

/// Raw N-node contour sum, no error estimate.
double talbot_sum(const ComplexTransform& F, double t, int nodes);

/// Where the standard N-node contour crosses the positive real axis.
double talbot_crossing(double t, int nodes);

/// Same contour shape rescaled to cross the real axis at `crossing`. Moving
/// the crossing to the saddle point of e^{pt} F(p) keeps relative accuracy
/// where the inverse is exponentially small; the trapezoid then needs about
/// crossing * t / 0.171 nodes. The error estimate doubles the nodes on the
/// fixed contour.
InversionResult invert_talbot_through(const ComplexTransform& F, double t, int nodes, double crossing);

/// As invert_talbot_through, but logF returns log F(p) (any branch). For
/// transforms such as e^{-s L(p)} whose factors overflow separately.
InversionResult invert_talbot_log(const ComplexTransform& logF, double t, int nodes, double crossing);

struct BromwichConfig {
    double gamma = 1.0;       // abscissa of the vertical line
    double truncation = 64.0; // imaginary cutoff of the directly summed part
    int nodes = 4096;         // trapezoid nodes on [0, truncation]
    // When set, gamma must exceed it.
    std::optional<double> rightmost_singularity;

    void validate() const;

    /// Step chosen so that the aliasing images e^{-gap T} (T = 2 pi / h) sit
    /// below 1e-17; `gap` is the distance from the line to the nearest
    /// singularity on either side.
    static BromwichConfig with_gap(double gamma, double gap, double truncation = 64.0);
};

/// Trapezoidal evaluation of (1/2 pi i) integral of e^{pt} F(p) dp over
/// Re p = gamma. The step is refined to h = pi/(m t) so consecutive blocks
/// of m nodes alternate in sign; the tail past the cutoff is summed with
/// Euler's transformation of the block partial sums.
InversionResult invert_bromwich_shifted(const ComplexTransform& F, double t, const BromwichConfig& config);

/// Same quadrature without the abscissa precondition: for F with
/// singularities on both sides of the line this is the line integral itself,
/// not an inverse transform.
InversionResult bromwich_line(const ComplexTransform& F, double t, const BromwichConfig& config);

/// Gaver-Stehfest inversion from real samples F(k ln2 / t), k = 1..order.
InversionResult invert_gaver_stehfest(const RealTransform& F, double t, int order = default_gaver_order);

/// h^{(n)}(p) for n >= 0.
using DerivativeOracle = std::function<double(int n, double p)>;

struct PostWidderSequence {
    std::vector<double> values;  // H_1 .. H_k
    bool complete = true;
    std::string error;
};

/// H_n(t) = ((-1)^n / n!) h^{(n)}(n/t) (n/t)^{n+1}, n = 1..n_max. Without a
/// derivative oracle the Gaver functional (n-th finite difference with step
/// ln2/t) stands in for h^{(n)}.
PostWidderSequence post_widder_sequence(const RealTransform& h, const std::optional<DerivativeOracle>& derivative,
                                        double t, int n_max);

/// h(p) = integral over (0, inf) of sigma(r) dr / (p + r) for a nonnegative density sigma.
class StieltjesRepresentation {
public:
    explicit StieltjesRepresentation(std::function<double(double)> density);

    double value(double p) const { return derivative(0, p); }
    /// h^{(n)}(p) = (-1)^n n! integral of sigma(r) / (p + r)^{n+1} dr.
    double derivative(int n, double p) const;
    DerivativeOracle oracle() const;

private:
    std::function<double(double)> density_;
};

} // namespace genfrac::laplace
