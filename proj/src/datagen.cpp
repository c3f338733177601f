#include "scfa/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scfa/errors.hpp"
#include "scfa/parallel.hpp"
#include "scfa/rng.hpp"

namespace scfa {

namespace {
constexpr double kPhiPsdTol = 1e-10;
constexpr double kHeywoodTol = 1e-9;
}  // namespace

PopulationModel population_model(const FactorStructureSpec& spec) {
    const int p = static_cast<int>(spec.loadings.rows());
    const int m = static_cast<int>(spec.loadings.cols());
    if (p < 1 || m < 1) throw InvalidInput("population_model: empty structure");
    if (spec.factor_corr.rows() != m || spec.factor_corr.cols() != m)
        throw InvalidInput("population_model: factor correlation shape mismatch");
    if (!spec.loadings.allFinite() || !spec.factor_corr.allFinite())
        throw InvalidInput("population_model: non-finite entries");
    if (!spec.factor_corr.isApprox(spec.factor_corr.transpose(), 1e-12))
        throw InvalidInput("population_model: factor correlations not symmetric");
    for (int k = 0; k < m; ++k)
        if (std::fabs(spec.factor_corr(k, k) - 1.0) > 1e-12)
            throw InvalidInput("population_model: factor correlation diagonal must be 1");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> phi_es(spec.factor_corr,
                                                          Eigen::EigenvaluesOnly);
    if (phi_es.eigenvalues().minCoeff() < -kPhiPsdTol)
        throw InvalidInput("population_model: factor correlations not PSD");

    PopulationModel model;
    model.spec = spec;
    Eigen::MatrixXd common =
        spec.loadings * spec.factor_corr * spec.loadings.transpose();
    model.uniqueness.resize(p);
    for (int v = 0; v < p; ++v) {
        double communality = common(v, v);
        if (communality > 1.0 + kHeywoodTol)
            throw InvalidInput("population_model: communality of variable " +
                               std::to_string(v + 1) + " exceeds 1 (" +
                               std::to_string(communality) + ")");
        model.uniqueness[v] = std::max(0.0, 1.0 - communality);
    }
    model.r_pop = common;
    model.r_pop.diagonal().setOnes();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_common(common,
                                                             Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es_common.eigenvalues().reverse();
    model.signal_eigenvalues = ev.head(std::min(m, p));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_full(model.r_pop,
                                                           Eigen::EigenvaluesOnly);
    model.full_eigenvalues = es_full.eigenvalues().reverse();
    return model;
}

Eigen::MatrixXd sample_data(const PopulationModel& model, int n, std::uint64_t seed) {
    const int p = static_cast<int>(model.r_pop.rows());
    const int m = static_cast<int>(model.spec.loadings.cols());
    if (n < p + 2) throw InvalidInput("sample_data: n must be at least p + 2");

    // Square root of the factor correlation matrix (eigendecomposition so
    // singular PSD inputs are fine).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.spec.factor_corr);
    Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd root = es.eigenvectors() * d.asDiagonal();

    // Factor scores use streams 0..m-1, noise streams m..m+p-1; the counter
    // is the observation index, so row blocks can be drawn independently.
    Eigen::MatrixXd z(n, m), e(n, p);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        for (int k = 0; k < m; ++k)
            z(i, k) = rng::standard_normal(seed, k, i);
        for (int v = 0; v < p; ++v)
            e(i, v) = rng::standard_normal(seed, m + v, i);
    });

    Eigen::MatrixXd scores = z * root.transpose();
    Eigen::VectorXd noise_scale = model.uniqueness.cwiseSqrt();
    return scores * model.spec.loadings.transpose() + e * noise_scale.asDiagonal();
}

FactorStructureSpec builtin_challenge_spec() {
    FactorStructureSpec spec;
    spec.loadings.resize(18, 6);
    spec.loadings << //
        .50, 0, 0, 0, 0, 0,    //
        .60, 0, 0, 0, 0, 0,    //
        .55, 0, 0, 0, 0, 0,    //
        0, .50, 0, 0, 0, 0,    //
        0, .60, 0, 0, 0, 0,    //
        0, .50, .75, 0, 0, 0,  //
        0, -.40, -.60, 0, 0, 0,//
        0, 0, .50, 0, 0, 0,    //
        0, 0, .60, 0, 0, 0,    //
        0, 0, 0, .50, 0, 0,    //
        0, 0, 0, .60, 0, 0,    //
        0, .40, .60, .40, 0, 0,//
        0, 0, 0, 0, .50, 0,    //
        0, 0, 0, 0, .80, 0,    //
        0, 0, 0, 0, 0, .50,    //
        0, 0, 0, 0, 0, .80,    //
        0, 0, 0, 0, 0, 0,      //
        0, 0, 0, 0, 0, 0;
    spec.factor_corr.resize(6, 6);
    spec.factor_corr << //
        1.0, .40, -.30, 0.0, .40, 0.0,  //
        .40, 1.0, 0.0, -.30, .30, 0.0,  //
        -.30, 0.0, 1.0, 0.0, -.50, 0.0, //
        0.0, -.30, 0.0, 1.0, 0.0, 0.0,  //
        .40, .30, -.50, 0.0, 1.0, 0.0,  //
        0.0, 0.0, 0.0, 0.0, 0.0, 1.0;
    return spec;
}

}  // namespace scfa
