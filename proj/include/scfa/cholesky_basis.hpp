#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scfa/correlation.hpp"

namespace scfa {

// Upper-triangular basis of the correlation matrix: one unit-norm column per
// variable, t' * t reproduces r. Weighted column sums have the same
// projections (correlations) on the columns as the equivalent weighted sums
// of normalized raw data. Columns are stored in pivot order; column_index
// maps column -> variable and col_of maps variable -> column.
struct CholeskyBasis {
    Eigen::MatrixXd t;              // p x p, rows beyond `rank` are zero
    std::vector<int> column_index;  // column -> variable (0-based)
    std::vector<int> col_of;        // variable -> column
    int rank = 0;

    int dim() const { return static_cast<int>(t.cols()); }

    // Inner product of two variables' columns (= their correlation).
    double gram(int var_a, int var_b) const {
        return t.col(col_of[var_a]).head(rank).dot(t.col(col_of[var_b]).head(rank));
    }
};

// Pivoted Cholesky factorization with drop tolerance 1e-10; handles exact
// population matrices that are semidefinite. Throws NotACorrelationMatrix if
// a pivot falls below the negative tolerance.
CholeskyBasis cholesky_basis(const CorrelationInput& c);

// Correlation of the unit-normalized weighted column sum with each outside
// column. weights: (variable, weight) pairs; throws DegenerateCombination if
// the combination norm is < 1e-12.
std::vector<double> project_combination(
    const CholeskyBasis& basis,
    const std::vector<std::pair<int, double>>& weights,
    const std::vector<int>& outside);

}  // namespace scfa
