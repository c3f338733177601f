#include "scfa/cholesky_basis.hpp"

#include <cmath>
#include <string>

#include "scfa/errors.hpp"

namespace scfa {

namespace {
constexpr double kDropTol = 1e-10;
constexpr double kNegTol = -1e-8;
constexpr double kDegenerateNorm = 1e-12;
}  // namespace

CholeskyBasis cholesky_basis(const CorrelationInput& c) {
    const int p = c.dim();
    const Eigen::MatrixXd& r = c.r;

    CholeskyBasis basis;
    basis.t = Eigen::MatrixXd::Zero(p, p);
    basis.column_index.resize(p);
    basis.col_of.resize(p);

    // Pivoted Cholesky: columns are variables, row k is generated at step k.
    // The pivot is the largest residual diagonal; dimensions whose residual
    // falls below the drop tolerance are discarded (semidefinite population
    // inputs), so dropped dimensions never enter projections.
    std::vector<int> perm(p);
    for (int i = 0; i < p; ++i) perm[i] = i;
    Eigen::VectorXd resid = r.diagonal();

    int rank = 0;
    for (int k = 0; k < p; ++k) {
        int pivot = k;
        for (int m = k + 1; m < p; ++m)
            if (resid[perm[m]] > resid[perm[pivot]]) pivot = m;
        double best = resid[perm[pivot]];
        if (best < kNegTol)
            throw NotACorrelationMatrix("negative pivot " + std::to_string(best) +
                                        " during factorization");
        if (best <= kDropTol) break;
        std::swap(perm[k], perm[pivot]);

        const int vk = perm[k];
        const double diag = std::sqrt(best);
        basis.t(k, k) = diag;
        for (int m = k + 1; m < p; ++m) {
            const int vm = perm[m];
            double dot = basis.t.col(k).head(k).dot(basis.t.col(m).head(k));
            double val = (r(vk, vm) - dot) / diag;
            basis.t(k, m) = val;
            resid[vm] -= val * val;
        }
        ++rank;
    }
    basis.rank = rank;

    for (int m = 0; m < p; ++m) {
        basis.column_index[m] = perm[m];
        basis.col_of[perm[m]] = m;
    }

    // Bring each column to exact unit sum of squares; the factorization
    // already leaves norms 1 within the drop tolerance.
    for (int m = 0; m < p; ++m) {
        double norm = basis.t.col(m).head(rank).norm();
        if (norm > 0.0) basis.t.col(m).head(rank) /= norm;
    }
    return basis;
}

std::vector<double> project_combination(
    const CholeskyBasis& basis,
    const std::vector<std::pair<int, double>>& weights,
    const std::vector<int>& outside) {
    if (weights.empty()) throw InvalidInput("project_combination: empty weights");

    const int rank = basis.rank;
    Eigen::VectorXd combo = Eigen::VectorXd::Zero(rank);
    for (const auto& [var, w] : weights)
        combo += w * basis.t.col(basis.col_of[var]).head(rank);

    double norm = combo.norm();
    if (norm < kDegenerateNorm)
        throw DegenerateCombination("weighted combination has near-zero norm");
    combo /= norm;

    std::vector<double> corrs;
    corrs.reserve(outside.size());
    for (int var : outside)
        corrs.push_back(combo.dot(basis.t.col(basis.col_of[var]).head(rank)));
    return corrs;
}

}  // namespace scfa
