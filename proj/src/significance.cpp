#include "scfa/significance.hpp"

#include <cmath>
#include <string>

#include "scfa/errors.hpp"

namespace scfa {

std::pair<double, int> chi2_figure(std::span<const double> corrs, int n) {
    if (corrs.empty())
        throw InvalidInput("chi2_figure: no testable remaining variables");
    double sum_sq = 0.0;
    for (double r : corrs) {
        if (std::fabs(r) > 1.0 + 1e-12)
            throw InvalidInput("chi2_figure: |r| > 1");
        sum_sq += r * r;
    }
    return {(n - 1.0) * sum_sq, static_cast<int>(corrs.size())};
}

double residual_z(double r_obs, double r_sol, int n, ResidualSeMode mode) {
    if (n <= 3) throw InvalidInput("residual_z: n must exceed 3");
    if (std::fabs(r_obs) >= 1.0 || std::fabs(r_sol) >= 1.0)
        throw InvalidInput("residual_z: |r| = 1 has infinite transform");
    constexpr double kClamp = 1.0 - 1e-15;
    auto fisher = [](double r) {
        if (r > kClamp) r = kClamp;
        if (r < -kClamp) r = -kClamp;
        return std::atanh(r);
    };
    double se = mode == ResidualSeMode::model_fixed
                    ? 1.0 / std::sqrt(n - 3.0)
                    : std::sqrt(2.0 / (n - 3.0));
    return std::fabs(fisher(r_obs) - fisher(r_sol)) / se;
}

}  // namespace scfa
