#include "scfa/solution.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>

#include "scfa/distributions.hpp"
#include "scfa/errors.hpp"
#include "scfa/parallel.hpp"

namespace scfa {

std::vector<int> detect_orphans(const CorrelationInput& c, double alpha,
                                std::vector<OrphanStat>* stats) {
    const int p = c.dim();
    const double crit = chi_square_inv(1.0 - sidak_level(alpha, p - 1), 1);
    const double scale = std::sqrt(c.n - 1.0);

    std::vector<int> orphans;
    if (stats) stats->clear();
    for (int v = 0; v < p; ++v) {
        double max_abs = 0.0;
        for (int u = 0; u < p; ++u)
            if (u != v) max_abs = std::max(max_abs, std::fabs(c.r(v, u)));
        if (stats) stats->push_back({v, max_abs, max_abs * scale});
        if ((c.n - 1.0) * max_abs * max_abs < crit) orphans.push_back(v);
    }
    if (static_cast<int>(orphans.size()) == p)
        throw EmptyModel("all variables are orphans; no common factors to recover");
    return orphans;
}

namespace {

// Index of the cluster member inside the distance matrix.
int local_index(const DistanceMatrix& d, int var) {
    auto it = std::lower_bound(d.vars.begin(), d.vars.end(), var);
    return static_cast<int>(it - d.vars.begin());
}

// Asymptotic covariance of two sample correlations r_ij, r_kl under
// normality (Olkin-Siotani), evaluated at the sample values.
double corr_cov(const Eigen::MatrixXd& r, int i, int j, int k, int l, int n) {
    const double rij = r(i, j), rkl = r(k, l);
    const double rik = r(i, k), ril = r(i, l), rjk = r(j, k), rjl = r(j, l);
    double t = 0.5 * rij * rkl * (rik * rik + ril * ril + rjk * rjk + rjl * rjl) +
               rik * rjl + ril * rjk - rij * (rjk * rjl + rik * ril) -
               rkl * (rjk * rik + rjl * ril);
    return t / n;
}

}  // namespace

Eigen::MatrixXd unifactorial_loadings(const ClusterSet& clusters,
                                      const DistanceMatrix& d,
                                      const CorrelationInput& c) {
    const int p = c.dim();
    const int m = static_cast<int>(clusters.factors.size());
    Eigen::MatrixXd pattern = Eigen::MatrixXd::Zero(p, m);

    for (int f = 0; f < m; ++f) {
        const auto& members = clusters.factors[f];
        const int k = static_cast<int>(members.size());

        // Sign of each member relative to the smallest-index member.
        std::vector<double> sign(k, 1.0);
        for (int a = 1; a < k; ++a)
            sign[a] = c.r(members[0], members[a]) >= 0.0 ? 1.0 : -1.0;

        std::vector<double> sum(k, 0.0);
        std::vector<int> count(k, 0);
        for (int a = 0; a < k; ++a) {
            for (int b = a + 1; b < k; ++b) {
                const int i = members[a], j = members[b];
                const int li = local_index(d, i), lj = local_index(d, j);
                const double w = d.weight(std::min(li, lj), std::max(li, lj));
                double r_ij = c.r(i, j);
                // weight(li,lj) is stated for the (lower, higher) ordering,
                // which matches (i, j) since members are sorted.
                std::pair<double, double> ab;
                try {
                    ab = pair_loadings(w, r_ij);
                } catch (const InconsistentCancellation& e) {
                    throw InconsistentCancellation(
                        std::string(e.what()) + " within cluster starting at variable " +
                        std::to_string(members[0] + 1));
                }
                sum[a] += ab.first;
                sum[b] += std::fabs(ab.second);
                ++count[a];
                ++count[b];
            }
        }
        for (int a = 0; a < k; ++a) {
            double loading = sign[a] * sum[a] / count[a];
            pattern(members[a], f) = std::clamp(loading, -1.0, 1.0);
        }
    }
    return pattern;
}

Eigen::MatrixXd factor_correlations(const ClusterSet& clusters,
                                    const Eigen::MatrixXd& pattern,
                                    const CorrelationInput& c, double alpha) {
    const int m = static_cast<int>(clusters.factors.size());
    Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(m, m);
    if (m < 2) return phi;

    const long n_pairs = static_cast<long>(m) * (m - 1) / 2;
    const double z_crit = normal_quantile(1.0 - sidak_level(alpha, n_pairs) / 2.0);
    constexpr double kLoadingFloor = 0.05;

    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            const auto& aa = clusters.factors[a];
            const auto& bb = clusters.factors[b];

            // Mean raw cross-cluster correlation, sign-adjusted by the
            // harmonized member signs, with its delta-method SE.
            double rbar = 0.0;
            std::vector<std::pair<int, int>> pairs;
            for (int u : aa)
                for (int v : bb) {
                    double su = pattern(u, a) >= 0.0 ? 1.0 : -1.0;
                    double sv = pattern(v, b) >= 0.0 ? 1.0 : -1.0;
                    rbar += su * sv * c.r(u, v);
                    pairs.emplace_back(u, v);
                }
            const double k = static_cast<double>(pairs.size());
            rbar /= k;
            double var = 0.0;
            for (auto [u, v] : pairs)
                for (auto [x, y] : pairs) var += corr_cov(c.r, u, v, x, y, c.n);
            var /= k * k;
            double se = std::sqrt(std::max(var, 1e-300));

            if (std::fabs(rbar) / se < z_crit) continue;  // entered as null

            // Correct each cross correlation by the inverse loading product.
            double sum = 0.0;
            int cnt = 0;
            for (int u : aa)
                for (int v : bb) {
                    double lu = pattern(u, a), lv = pattern(v, b);
                    if (std::fabs(lu) < kLoadingFloor || std::fabs(lv) < kLoadingFloor)
                        continue;  // correction-unstable, excluded
                    sum += c.r(u, v) / (lu * lv);
                    ++cnt;
                }
            if (cnt == 0) continue;
            phi(a, b) = phi(b, a) = std::clamp(sum / cnt, -1.0, 1.0);
        }
    }
    return phi;
}

MultifactorialOutcome explain_multifactorial(const std::vector<int>& targets,
                                             const ClusterSet& clusters,
                                             Eigen::MatrixXd& pattern,
                                             const CholeskyBasis& basis, int n,
                                             double alpha) {
    MultifactorialOutcome out;
    const int m = static_cast<int>(clusters.factors.size());
    if (m == 0) {
        out.unexplained_after = targets;
        return out;
    }

    // Non-orphan universe: cluster members plus the targets themselves.
    std::vector<int> universe;
    for (const auto& f : clusters.factors)
        universe.insert(universe.end(), f.begin(), f.end());
    universe.insert(universe.end(), clusters.unexplained.begin(),
                    clusters.unexplained.end());
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());

    struct Combo {
        std::vector<int> factor_ids;
        std::vector<int> reps;
    };

    for (int target : targets) {
        bool explained = false;
        const int card_lo = m >= 2 ? 2 : 1;
        for (int card = card_lo; card <= m && !explained; ++card) {
            // Every combination of one representative per factor, over every
            // factor subset of this cardinality.
            std::vector<Combo> combos;
            std::vector<int> subset(card);
            std::function<void(int, int)> enumerate = [&](int start, int depth) {
                if (depth == card) {
                    std::vector<int> reps(card, 0);
                    std::function<void(int)> walk = [&](int level) {
                        if (level == card) {
                            Combo cb;
                            cb.factor_ids = subset;
                            cb.reps.reserve(card);
                            for (int q = 0; q < card; ++q)
                                cb.reps.push_back(clusters.factors[subset[q]][reps[q]]);
                            combos.push_back(std::move(cb));
                            return;
                        }
                        for (std::size_t r = 0;
                             r < clusters.factors[subset[level]].size(); ++r) {
                            reps[level] = static_cast<int>(r);
                            walk(level + 1);
                        }
                    };
                    walk(0);
                    return;
                }
                for (int f = start; f <= m - (card - depth); ++f) {
                    subset[depth] = f;
                    enumerate(f + 1, depth + 1);
                }
            };
            enumerate(0, 0);

            const double crit = chi_square_inv(
                1.0 - sidak_level(alpha, static_cast<long>(combos.size())),
                static_cast<int>(universe.size()) - card - 1);

            std::vector<CancellationResult> results(combos.size());
            parallel_for(combos.size(), [&](std::size_t k) {
                const auto& cb = combos[k];
                std::vector<int> outside;
                for (int x : universe) {
                    if (x == target) continue;
                    if (std::find(cb.reps.begin(), cb.reps.end(), x) != cb.reps.end())
                        continue;
                    outside.push_back(x);
                }
                results[k] = cancel_multi(basis, cb.reps, target, outside, n);
            });

            // Successful combinations; the subset holding the most convincing
            // cancellation (smallest chi2) provides the loadings.
            double best_chi2 = std::numeric_limits<double>::infinity();
            const std::vector<int>* best_subset = nullptr;
            for (std::size_t k = 0; k < combos.size(); ++k) {
                if (results[k].degenerate || results[k].chi2 > crit) continue;
                if (results[k].chi2 < best_chi2) {
                    best_chi2 = results[k].chi2;
                    best_subset = &combos[k].factor_ids;
                }
            }
            if (!best_subset) continue;

            std::map<int, double> acc, wsum;
            for (std::size_t k = 0; k < combos.size(); ++k) {
                if (results[k].degenerate || results[k].chi2 > crit) continue;
                if (combos[k].factor_ids != *best_subset) continue;
                std::map<int, CancellerInfo> info;
                for (int q = 0; q < card; ++q) {
                    int f = combos[k].factor_ids[q];
                    int rep = combos[k].reps[q];
                    info[rep] = {f, pattern(rep, f)};
                }
                auto loadings = multifactor_loadings(results[k], info);
                double floor = results[k].df * 1e-6;
                double weight = 1.0 / std::pow(std::max(results[k].chi2, floor), 2);
                for (auto [f, lam] : loadings) {
                    acc[f] += weight * lam;
                    wsum[f] += weight;
                }
            }
            for (auto [f, num] : acc)
                pattern(target, f) = std::clamp(num / wsum[f], -1.0, 1.0);
            out.explained.push_back(target);
            explained = true;
        }
        if (!explained) out.unexplained_after.push_back(target);
    }
    return out;
}

MergedIndicator merge_indicators(const std::vector<int>& member_vars,
                                 const std::vector<double>& loadings,
                                 const CorrelationInput& c) {
    if (member_vars.empty() || member_vars.size() != loadings.size())
        throw InvalidInput("merge_indicators: members and loadings must align");
    MergedIndicator merged;
    merged.member_vars = member_vars;
    merged.k = static_cast<int>(member_vars.size());

    // Scale each member to unit noise variance; negative loadings flip sign
    // so signals add.
    for (double lam : loadings) {
        if (std::fabs(lam) >= 1.0)
            throw InvalidInput("merge_indicators: member loading must be < 1");
        double s = 1.0 / std::sqrt(1.0 - lam * lam);
        merged.weights.push_back(lam < 0.0 ? -s : s);
    }

    double ss = 0.0;  // variance of the scaled sum
    for (int a = 0; a < merged.k; ++a)
        for (int b = 0; b < merged.k; ++b)
            ss += merged.weights[a] * merged.weights[b] *
                  c.r(member_vars[a], member_vars[b]);
    if (ss <= merged.k)
        throw NoSignal("merged indicator has no signal (sum of squares " +
                       std::to_string(ss) + " <= k)");
    merged.loading = std::sqrt(ss - merged.k) / std::sqrt(ss);
    return merged;
}

Eigen::MatrixXd implied_correlations(const Eigen::MatrixXd& pattern,
                                     const Eigen::MatrixXd& phi) {
    Eigen::MatrixXd r = pattern * phi * pattern.transpose();
    r.diagonal().setOnes();
    return r;
}

ResidualReport residual_report(const CorrelationInput& c,
                               const FactorSolution& solution,
                               const SignificanceConfig& cfg) {
    ResidualReport report;
    report.mode = cfg.residual_se_mode;

    std::vector<bool> orphan(c.dim(), false);
    for (int v : solution.orphans) orphan[v] = true;
    const int p_eff = c.dim() - static_cast<int>(solution.orphans.size());

    report.z_crit_var =
        normal_quantile(1.0 - sidak_level(cfg.alpha, p_eff) / 2.0);
    report.z_crit_global = normal_quantile(
        1.0 - sidak_level(cfg.alpha, static_cast<long>(p_eff) * (p_eff - 1) / 2) / 2.0);

    Eigen::MatrixXd implied = implied_correlations(solution.pattern, solution.phi);
    for (int i = 0; i < c.dim(); ++i) {
        if (orphan[i]) continue;
        for (int j = i + 1; j < c.dim(); ++j) {
            if (orphan[j]) continue;
            ResidualRow row;
            row.i = i;
            row.j = j;
            row.r_obs = c.r(i, j);
            row.r_sol = implied(i, j);
            row.z = residual_z(row.r_obs, row.r_sol, c.n, cfg.residual_se_mode);
            report.rows.push_back(row);
        }
    }
    std::sort(report.rows.begin(), report.rows.end(),
              [](const ResidualRow& a, const ResidualRow& b) {
                  if (a.z != b.z) return a.z > b.z;
                  return std::pair(a.i, a.j) < std::pair(b.i, b.j);
              });

    int above2 = 0;
    for (const auto& row : report.rows)
        if (row.z > 2.0) ++above2;
    report.listed = std::min<int>(static_cast<int>(report.rows.size()),
                                  std::max(5, above2));
    return report;
}

ScfaResult run_scfa(const CorrelationInput& input, const SignificanceConfig& cfg) {
    const int p = input.dim();

    FactorSolution sol;
    sol.n = input.n;
    sol.alpha = cfg.alpha;
    sol.orphans = detect_orphans(input, cfg.alpha, &sol.orphan_stats);

    std::vector<int> non_orphans;
    std::vector<bool> orphan(p, false);
    for (int v : sol.orphans) orphan[v] = true;
    for (int v = 0; v < p; ++v)
        if (!orphan[v]) non_orphans.push_back(v);

    // Basis over the non-orphan submatrix; indices are remapped so basis
    // variable k corresponds to non_orphans[k].
    Eigen::MatrixXd sub(non_orphans.size(), non_orphans.size());
    for (std::size_t a = 0; a < non_orphans.size(); ++a)
        for (std::size_t b = 0; b < non_orphans.size(); ++b)
            sub(a, b) = input.r(non_orphans[a], non_orphans[b]);
    CorrelationInput sub_input(sub, input.n);
    CholeskyBasis basis = cholesky_basis(sub_input);

    std::vector<int> local(non_orphans.size());
    for (std::size_t k = 0; k < local.size(); ++k) local[k] = static_cast<int>(k);

    DistanceMatrix dist = build_distances(basis, local, input.n);
    sol.dendrogram = complete_linkage(dist);
    ClusterSet gated = gate_clusters(sol.dendrogram, dist, cfg.alpha);
    ClusterSet scanned = coplanarity_scan(gated, basis, input.n, cfg.alpha);

    Eigen::MatrixXd local_pattern =
        unifactorial_loadings(scanned, dist, sub_input);
    Eigen::MatrixXd phi =
        factor_correlations(scanned, local_pattern, sub_input, cfg.alpha);

    std::vector<int> targets = scanned.unexplained;
    MultifactorialOutcome mf_out =
        explain_multifactorial(targets, scanned, local_pattern, basis, input.n,
                               cfg.alpha);

    // Map local (non-orphan) rows and cluster ids back to original variables.
    const int m = static_cast<int>(scanned.factors.size());
    sol.pattern = Eigen::MatrixXd::Zero(p, m);
    for (std::size_t k = 0; k < non_orphans.size(); ++k)
        sol.pattern.row(non_orphans[k]) = local_pattern.row(k);
    sol.phi = phi;
    sol.clusters = scanned;
    for (auto& f : sol.clusters.factors)
        for (int& v : f) v = non_orphans[v];
    for (int& v : sol.clusters.unexplained) v = non_orphans[v];
    for (int& v : sol.clusters.coplanar_rejected) v = non_orphans[v];
    sol.multifactorial = mf_out.explained;
    for (int& v : sol.multifactorial) v = non_orphans[v];
    sol.unexplained_after = mf_out.unexplained_after;
    for (int& v : sol.unexplained_after) v = non_orphans[v];

    ScfaResult result;
    result.residuals = residual_report(input, sol, cfg);
    result.solution = std::move(sol);
    return result;
}

ScfaResult run_scfa(const Eigen::MatrixXd& data, const SignificanceConfig& cfg) {
    return run_scfa(correlation_from_data(data), cfg);
}

}  // namespace scfa
