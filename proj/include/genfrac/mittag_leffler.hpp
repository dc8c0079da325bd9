#pragma once

namespace genfrac {

enum class MLBranch { series, integral, asymptotic };
const char* to_string(MLBranch branch);

struct MLEvaluation {
    double alpha = 1.0;
    double z = 0.0;
    double value = 1.0;
    MLBranch branch = MLBranch::series;
};

/// One-parameter Mittag-Leffler function E_alpha(z) on the real line,
/// 0 < alpha <= 1.
///
/// Power series near the origin (|z| <= 5 for z > 0, |z| <= 1 for z < 0 where
/// the alternating series loses digits), the Laplace-type integral
/// representation up to |z| = 50 and the asymptotic expansion beyond. For
/// z > 0 the value overflows once z^{1/alpha} passes ~709; that raises
/// RangeError.
MLEvaluation ml_evaluate(double alpha, double z);

inline double ml(double alpha, double z) { return ml_evaluate(alpha, z).value; }

} // namespace genfrac
