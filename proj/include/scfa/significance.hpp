#pragma once

#include <span>
#include <utility>

namespace scfa {

// Denominator convention for residual z scores: the solution treated as
// fixed (SE = 1/sqrt(n-3)) or as a second estimated correlation
// (SE = sqrt(2/(n-3))).
enum class ResidualSeMode { model_fixed, paired };

struct SignificanceConfig {
    double alpha = 0.05;
    ResidualSeMode residual_se_mode = ResidualSeMode::model_fixed;
};

// chi2 = (n-1) * sum r^2 with df = number of correlations; the figure of
// merit for a signal-cancellation attempt (sum of squared z = r*sqrt(n-1)).
std::pair<double, int> chi2_figure(std::span<const double> corrs, int n);

// |atanh(r_obs) - atanh(r_sol)| / SE. Correlations are clamped away from
// +-1 before the transform.
double residual_z(double r_obs, double r_sol, int n, ResidualSeMode mode);

}  // namespace scfa
