#pragma once

#include <Eigen/Dense>

namespace scfa {

// A correlation matrix together with the sample size it was estimated from.
// The universal analysis input: unit diagonal, symmetric, positive
// semidefinite within tolerance, p >= 3, n >= p + 2.
struct CorrelationInput {
    Eigen::MatrixXd r;
    int n;

    CorrelationInput(Eigen::MatrixXd corr, int sample_size);

    int dim() const { return static_cast<int>(r.rows()); }
};

// Pearson correlations of the columns of an n x p data matrix.
// Invariant under per-column affine rescaling of the data.
CorrelationInput correlation_from_data(const Eigen::MatrixXd& data);

}  // namespace scfa
