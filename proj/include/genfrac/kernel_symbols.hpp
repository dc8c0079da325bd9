#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace genfrac {

using cplx = std::complex<double>;

/// Weight mu(alpha) >= 0 on [0, 1] for a distributed-order derivative.
///
/// Constant and polynomial weights are serializable; custom weights carry an
/// arbitrary evaluator and a free-text description.
class WeightFunction {
public:
    enum class Kind { constant, polynomial, custom };

    static WeightFunction constant(double value);
    /// mu(alpha) = sum_k coefficients[k] * alpha^k.
    static WeightFunction polynomial(std::vector<double> coefficients);
    static WeightFunction custom(std::function<double(double)> evaluator, std::string description);

    double operator()(double alpha) const;
    double at_zero() const { return (*this)(0.0); }
    double at_one() const { return (*this)(1.0); }

    Kind kind() const { return kind_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    const std::string& description() const { return description_; }

private:
    WeightFunction() = default;
    void validate() const;

    Kind kind_ = Kind::constant;
    std::vector<double> coefficients_;
    std::function<double(double)> evaluator_;
    std::string description_;
};

struct CaputoFamily {
    double alpha;
};

struct DistributedOrderFamily {
    WeightFunction weight;
    // Gauss-Legendre nodes on [0,1] and the products w_i * mu(alpha_i).
    std::vector<double> nodes;
    std::vector<double> weighted_mu;
};

/// Samples of log K against log p, interpolated by a monotone cubic
/// (Fritsch-Carlson) and extended linearly in log-log space past the ends.
struct TabulatedFamily {
    std::vector<double> log_p;
    std::vector<double> log_K;
    std::vector<double> slopes;  // d log K / d log p at the samples
};

class KernelSpec {
public:
    using Family = std::variant<CaputoFamily, DistributedOrderFamily, TabulatedFamily>;

    /// Caputo-Djrbashian kernel t^{-alpha}/Gamma(1-alpha); requires 0 < alpha < 1.
    static KernelSpec caputo(double alpha, std::string label = {});
    static KernelSpec distributed_order(WeightFunction weight, std::string label = {});
    static KernelSpec tabulated(std::vector<double> log_p, std::vector<double> log_K,
                                std::string label = {});

    const Family& family() const { return family_; }
    const std::string& label() const { return label_; }
    std::string family_name() const;

    /// Only closed-form families extend to the cut plane; tabulated symbols
    /// are known on the positive half-line alone.
    bool has_analytic_continuation() const;

private:
    KernelSpec(Family family, std::string label);

    Family family_;
    std::string label_;
};

/// Order of the distributed-order Gauss-Legendre rule.
inline constexpr int distributed_order_nodes = 64;

/// K(p) = integral of e^{-pt} k(t) dt for real p > 0.
double eval_K(const KernelSpec& kernel, double p);

/// L(p) = p K(p) on the positive half-line.
double eval_L(const KernelSpec& kernel, double p);

/// L on the cut plane C \ (-inf, 0], principal branch.
cplx eval_L(const KernelSpec& kernel, cplx p);

/// K(p) = L(p)/p on the cut plane.
cplx eval_K(const KernelSpec& kernel, cplx p);

/// L'(p) for real p > 0.
double eval_dL(const KernelSpec& kernel, double p);

/// Boundary value L(r e^{i pi}) approached from the upper half-plane, r > 0.
cplx eval_L_upper_cut(const KernelSpec& kernel, double r);

struct LevyTriplet {
    double a = 0.0;
    double b = 0.0;
    std::function<double(double)> density;
    std::string description;
};

/// Levy triplet of the complete Bernstein function L. The admissible
/// families used here all have a = b = 0.
LevyTriplet levy_triplet(const KernelSpec& kernel);

double eval_levy_density(const LevyTriplet& triplet, double t);

/// integral over [t_lo, t_hi] of min(1, t) m(t) dt.
double levy_moment(const LevyTriplet& triplet, double t_lo, double t_hi);

struct CmSignTest {
    bool passed = true;
    int max_order = 0;
    std::size_t points = 0;
    // Most negative value of (-1)^n Delta^n f / |f| seen over the grid.
    double worst_margin = 0.0;
    double worst_p = 0.0;
    int worst_order = 0;
    std::size_t failures = 0;
};

/// Finite-difference complete-monotonicity sign test: at each base point p of
/// a log grid, forward differences with step rel_step * p must satisfy
/// (-1)^n Delta^n f(p) >= -tol |f(p)| for n = 0..max_order.
CmSignTest cm_sign_test(const std::function<double(double)>& f, double p_lo, double p_hi,
                        std::size_t points, int max_order, double rel_step = 0.25,
                        double tol = 1e-12);

enum class Flag { yes, no, inconclusive };
const char* to_string(Flag flag);

struct AdmissibilityReport {
    Flag K_to_infinity_at_0 = Flag::inconclusive;
    Flag K_to_0_at_infinity = Flag::inconclusive;
    Flag L_to_0_at_0 = Flag::inconclusive;
    Flag L_to_infinity_at_infinity = Flag::inconclusive;
    CmSignTest stieltjes_witness;       // signs of K
    CmSignTest reciprocal_L_witness;    // signs of 1/L
    bool evaluation_failed = false;
    std::string diagnostic;

    bool admissible() const;
};

/// Sampled admissibility check on p in [1e-8, 1e8].
AdmissibilityReport check_admissibility(const KernelSpec& kernel);

} // namespace genfrac
