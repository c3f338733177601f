#include "scfa/correlation.hpp"

#include <cmath>
#include <string>

#include "scfa/errors.hpp"

namespace scfa {

namespace {
constexpr double kSymmetryTol = 1e-12;
constexpr double kDiagonalTol = 1e-8;
constexpr double kPsdTol = 1e-8;
}  // namespace

CorrelationInput::CorrelationInput(Eigen::MatrixXd corr, int sample_size)
    : r(std::move(corr)), n(sample_size) {
    const int p = static_cast<int>(r.rows());
    if (r.cols() != p) throw InvalidInput("correlation matrix must be square");
    if (p < 3) throw InvalidInput("need at least 3 variables, got " + std::to_string(p));
    if (n < p + 2)
        throw InvalidInput("sample size " + std::to_string(n) +
                           " too small for " + std::to_string(p) + " variables");
    if (!r.allFinite()) throw InvalidInput("correlation matrix has non-finite entries");

    for (int i = 0; i < p; ++i) {
        if (std::fabs(r(i, i) - 1.0) > kDiagonalTol)
            throw InvalidInput("diagonal entry " + std::to_string(i + 1) +
                               " is not 1 (got " + std::to_string(r(i, i)) + ")");
        r(i, i) = 1.0;
        for (int j = i + 1; j < p; ++j) {
            if (std::fabs(r(i, j) - r(j, i)) > kSymmetryTol)
                throw InvalidInput("matrix not symmetric at (" + std::to_string(i + 1) +
                                   "," + std::to_string(j + 1) + ")");
            if (std::fabs(r(i, j)) > 1.0 + kDiagonalTol)
                throw InvalidInput("correlation out of [-1,1] at (" + std::to_string(i + 1) +
                                   "," + std::to_string(j + 1) + ")");
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdTol)
        throw NotACorrelationMatrix(
            "matrix is not positive semidefinite (min eigenvalue " +
            std::to_string(es.eigenvalues().minCoeff()) + ")");
}

CorrelationInput correlation_from_data(const Eigen::MatrixXd& data) {
    const int n = static_cast<int>(data.rows());
    const int p = static_cast<int>(data.cols());
    if (n < 3) throw InvalidInput("need at least 3 observations, got " + std::to_string(n));
    if (!data.allFinite()) throw InvalidInput("data matrix has non-finite entries");

    Eigen::MatrixXd z = data.rowwise() - data.colwise().mean();
    for (int j = 0; j < p; ++j) {
        double ss = z.col(j).squaredNorm();
        if (ss <= 0.0) throw ZeroVarianceColumn(j);
        z.col(j) /= std::sqrt(ss);
    }
    Eigen::MatrixXd r = z.transpose() * z;
    r = 0.5 * (r + r.transpose());  // kill rounding asymmetry
    r.diagonal().setOnes();
    return CorrelationInput(std::move(r), n);
}

}  // namespace scfa
