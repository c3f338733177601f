#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace scfa {

// Population factor structure: loadings (p x m) and factor correlations
// (m x m, symmetric PSD with unit diagonal).
struct FactorStructureSpec {
    Eigen::MatrixXd loadings;
    Eigen::MatrixXd factor_corr;
};

struct PopulationModel {
    FactorStructureSpec spec;
    Eigen::MatrixXd r_pop;              // loadings * phi * loadings' + diag(uniqueness)
    Eigen::VectorXd uniqueness;         // 1 - communality, per variable
    Eigen::VectorXd signal_eigenvalues; // m largest eigenvalues of the common part, descending
    Eigen::VectorXd full_eigenvalues;   // all p eigenvalues of r_pop, descending
};

// Builds the population correlation matrix and its eigen-spectra.
// Throws InvalidInput when a communality exceeds 1 (Heywood population).
PopulationModel population_model(const FactorStructureSpec& spec);

// n x p sample from a zero-mean multivariate normal with covariance r_pop,
// via factor scores: X = F * loadings' + E * diag(sqrt(uniqueness)) with F
// drawn with covariance factor_corr. Identical seeds give identical output.
Eigen::MatrixXd sample_data(const PopulationModel& model, int n, std::uint64_t seed);

// The 18-variable, 6-factor benchmark structure with two doublet factors,
// one trifactorial variable, a proportional-loading bifactorial pair, and
// two orphan variables.
FactorStructureSpec builtin_challenge_spec();

}  // namespace scfa
