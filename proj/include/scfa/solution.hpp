#pragma once

#include <vector>

#include <Eigen/Dense>

#include "scfa/cholesky_basis.hpp"
#include "scfa/clustering.hpp"
#include "scfa/correlation.hpp"
#include "scfa/significance.hpp"

namespace scfa {

// Per-variable orphan screening statistic, recorded on both scales because
// the two are easy to confuse in reports.
struct OrphanStat {
    int var = 0;
    double max_abs_r = 0.0;
    double max_z = 0.0;  // max |r| * sqrt(n-1)
};

// Variables whose largest squared correlation (times n-1) stays below the
// Sidak-corrected chi2(1) critical value. Throws EmptyModel when every
// variable qualifies.
std::vector<int> detect_orphans(const CorrelationInput& c, double alpha,
                                std::vector<OrphanStat>* stats = nullptr);

// Loadings of the unifactorial cluster members: per member, the unweighted
// mean of the pair estimates over all within-cluster pairs containing it,
// signs harmonized so the smallest-index member loads positively.
// Returns a p x m matrix with only cluster-member rows filled.
Eigen::MatrixXd unifactorial_loadings(const ClusterSet& clusters,
                                      const DistanceMatrix& d,
                                      const CorrelationInput& c);

// Factor correlations from cross-cluster correlations corrected by the
// inverse loading product; entered as 0 when the mean raw correlation is
// not significant (two-sided, Sidak over factor pairs, delta-method SE of
// the mean).
Eigen::MatrixXd factor_correlations(const ClusterSet& clusters,
                                    const Eigen::MatrixXd& pattern,
                                    const CorrelationInput& c, double alpha);

struct MultifactorialOutcome {
    std::vector<int> explained;
    std::vector<int> unexplained_after;
};

// Explains each leftover variable by cancelling its signal with one
// unifactorial representative per factor, enumerating factor subsets by
// increasing cardinality; fills the target rows of `pattern` in place.
MultifactorialOutcome explain_multifactorial(const std::vector<int>& targets,
                                             const ClusterSet& clusters,
                                             Eigen::MatrixXd& pattern,
                                             const CholeskyBasis& basis, int n,
                                             double alpha);

// Noise-normalized sum of same-factor indicators; a library utility, the
// default pipeline does not use it.
struct MergedIndicator {
    std::vector<int> member_vars;
    std::vector<double> weights;  // scaling to unit noise variance, signed
    double loading = 0.0;
    int k = 0;
};
MergedIndicator merge_indicators(const std::vector<int>& member_vars,
                                 const std::vector<double>& loadings,
                                 const CorrelationInput& c);

// R_sol = pattern * phi * pattern' with unit diagonal.
Eigen::MatrixXd implied_correlations(const Eigen::MatrixXd& pattern,
                                     const Eigen::MatrixXd& phi);

struct FactorSolution {
    Eigen::MatrixXd pattern;  // p x m, orphan rows zero
    Eigen::MatrixXd phi;      // m x m
    std::vector<int> orphans;
    std::vector<int> multifactorial;
    std::vector<int> unexplained_after;
    ClusterSet clusters;
    Dendrogram dendrogram;
    std::vector<OrphanStat> orphan_stats;
    int n = 0;
    double alpha = 0.05;
};

struct ResidualRow {
    int i = 0, j = 0;  // 0-based variable ids, i < j
    double r_obs = 0.0, r_sol = 0.0, z = 0.0;
};

struct ResidualReport {
    std::vector<ResidualRow> rows;  // all non-orphan pairs, z descending
    double z_crit_var = 0.0;
    double z_crit_global = 0.0;
    int listed = 0;  // rows printed: all z > 2, minimum five
    ResidualSeMode mode = ResidualSeMode::model_fixed;
};

ResidualReport residual_report(const CorrelationInput& c,
                               const FactorSolution& solution,
                               const SignificanceConfig& cfg);

struct ScfaResult {
    FactorSolution solution;
    ResidualReport residuals;
};

// Full pipeline: orphans -> basis -> pair distances -> complete linkage ->
// gate -> coplanarity -> unifactorial loadings -> factor correlations ->
// multifactorial explanation -> residual report.
ScfaResult run_scfa(const CorrelationInput& input, const SignificanceConfig& cfg);
ScfaResult run_scfa(const Eigen::MatrixXd& data, const SignificanceConfig& cfg);

}  // namespace scfa
