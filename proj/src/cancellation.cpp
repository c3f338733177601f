#include "scfa/cancellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "scfa/errors.hpp"
#include "scfa/significance.hpp"

namespace scfa {

namespace {

constexpr double kDegenerateNorm = 1e-12;
// Finite penalty above any attainable correlation so the simplex backs away
// from degenerate points instead of aborting on a non-finite value.
constexpr double kDegeneratePenalty = 1.5;

struct Simplex {
    std::vector<std::vector<double>> x;
    std::vector<double> f;
};

int worst_index(const Simplex& s) {
    return static_cast<int>(std::max_element(s.f.begin(), s.f.end()) - s.f.begin());
}
int best_index(const Simplex& s) {
    return static_cast<int>(std::min_element(s.f.begin(), s.f.end()) - s.f.begin());
}

void check_finite(double v) {
    if (!std::isfinite(v))
        throw Error("minimize_maxabs: objective returned a non-finite value");
}

MinimizeResult nelder_mead(
    const std::function<double(std::span<const double>)>& objective,
    const std::vector<double>& init, double tol, int max_iter) {
    const int dim = static_cast<int>(init.size());
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    Simplex s;
    s.x.push_back(init);
    for (int k = 0; k < dim; ++k) {
        auto pt = init;
        pt[k] += std::max(0.1, 0.1 * std::fabs(pt[k]));
        s.x.push_back(pt);
    }
    for (auto& pt : s.x) {
        double v = objective(pt);
        check_finite(v);
        s.f.push_back(v);
    }

    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        int hi = worst_index(s);
        int lo = best_index(s);
        if (s.f[hi] - s.f[lo] <= tol) {
            converged = true;
            break;
        }

        std::vector<double> centroid(dim, 0.0);
        for (int v = 0; v <= dim; ++v) {
            if (v == hi) continue;
            for (int k = 0; k < dim; ++k) centroid[k] += s.x[v][k];
        }
        for (double& c : centroid) c /= dim;

        auto blend = [&](double coef) {
            std::vector<double> pt(dim);
            for (int k = 0; k < dim; ++k)
                pt[k] = centroid[k] + coef * (centroid[k] - s.x[hi][k]);
            return pt;
        };

        auto refl = blend(alpha);
        double f_refl = objective(refl);
        check_finite(f_refl);

        // Second-worst value for the reflection acceptance test.
        double f_second = -std::numeric_limits<double>::infinity();
        for (int v = 0; v <= dim; ++v)
            if (v != hi) f_second = std::max(f_second, s.f[v]);

        if (f_refl < s.f[lo]) {
            auto expa = blend(gamma);
            double f_expa = objective(expa);
            check_finite(f_expa);
            if (f_expa < f_refl) {
                s.x[hi] = std::move(expa);
                s.f[hi] = f_expa;
            } else {
                s.x[hi] = std::move(refl);
                s.f[hi] = f_refl;
            }
        } else if (f_refl < f_second) {
            s.x[hi] = std::move(refl);
            s.f[hi] = f_refl;
        } else {
            auto contr = blend(f_refl < s.f[hi] ? rho : -rho);
            double f_contr = objective(contr);
            check_finite(f_contr);
            if (f_contr < std::min(f_refl, s.f[hi])) {
                s.x[hi] = std::move(contr);
                s.f[hi] = f_contr;
            } else {
                // Shrink toward the best vertex.
                for (int v = 0; v <= dim; ++v) {
                    if (v == lo) continue;
                    for (int k = 0; k < dim; ++k)
                        s.x[v][k] = s.x[lo][k] + sigma * (s.x[v][k] - s.x[lo][k]);
                    s.f[v] = objective(s.x[v]);
                    check_finite(s.f[v]);
                }
            }
        }
    }

    int lo = best_index(s);
    return {s.x[lo], s.f[lo], converged};
}

}  // namespace

MinimizeResult minimize_maxabs(
    const std::function<double(std::span<const double>)>& objective,
    std::vector<double> init, double tol, int max_iter) {
    if (init.empty()) throw InvalidInput("minimize_maxabs: empty init");
    const int dim = static_cast<int>(init.size());
    if (max_iter <= 0) max_iter = 200 * dim * dim;

    double f0 = objective(init);
    check_finite(f0);

    MinimizeResult first = nelder_mead(objective, init, tol, max_iter);
    MinimizeResult second = nelder_mead(objective, first.weights, tol, max_iter);
    if (second.value <= first.value) {
        second.converged = second.converged && first.converged;
        return second;
    }
    first.converged = first.converged && second.converged;
    return first;
}

namespace {

// Precomputed gram data for one cancellation problem: criterion evaluations
// reduce to O(|outside|) dot products, identical to projecting the weighted
// basis-column sum.
struct CancelWorkspace {
    Eigen::MatrixXd gram;     // (k+1) x (k+1): cancellers then target
    Eigen::MatrixXd cross;    // (k+1) x |outside|
    int k;

    CancelWorkspace(const CholeskyBasis& basis, const std::vector<int>& members,
                    const std::vector<int>& outside)
        : k(static_cast<int>(members.size()) - 1) {
        const int m = static_cast<int>(members.size());
        gram.resize(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                gram(a, b) = basis.gram(members[a], members[b]);
        cross.resize(m, static_cast<int>(outside.size()));
        for (int a = 0; a < m; ++a)
            for (std::size_t u = 0; u < outside.size(); ++u)
                cross(a, u) = basis.gram(members[a], outside[u]);
    }

    // Full weight vector (optimized weights plus the fixed -1).
    Eigen::VectorXd full_weights(std::span<const double> w) const {
        Eigen::VectorXd wv(k + 1);
        for (int a = 0; a < k; ++a) wv[a] = w[a];
        wv[k] = -1.0;
        return wv;
    }

    double norm2(std::span<const double> w) const {
        Eigen::VectorXd wv = full_weights(w);
        return wv.dot(gram * wv);
    }

    double criterion(std::span<const double> w) const {
        Eigen::VectorXd wv = full_weights(w);
        double n2 = wv.dot(gram * wv);
        if (n2 < kDegenerateNorm * kDegenerateNorm) return kDegeneratePenalty;
        double inv = 1.0 / std::sqrt(n2);
        double worst = 0.0;
        Eigen::VectorXd c = cross.transpose() * wv;
        for (int u = 0; u < c.size(); ++u)
            worst = std::max(worst, std::fabs(c[u]) * inv);
        return worst;
    }

    std::vector<double> correlations(std::span<const double> w) const {
        Eigen::VectorXd wv = full_weights(w);
        double n2 = wv.dot(gram * wv);
        double inv = 1.0 / std::sqrt(n2);
        Eigen::VectorXd c = cross.transpose() * wv;
        std::vector<double> out(c.size());
        for (int u = 0; u < c.size(); ++u) out[u] = c[u] * inv;
        return out;
    }
};

CancellationResult finish_cancellation(const CancelWorkspace& ws,
                                       const std::vector<int>& members,
                                       const MinimizeResult& opt, int n) {
    CancellationResult res;
    for (int a = 0; a < ws.k; ++a) res.weights.emplace_back(members[a], opt.weights[a]);
    res.weights.emplace_back(members.back(), -1.0);
    res.converged = opt.converged;
    res.df = static_cast<int>(ws.cross.cols());

    if (ws.norm2(opt.weights) < kDegenerateNorm * kDegenerateNorm ||
        opt.value >= kDegeneratePenalty) {
        res.degenerate = true;
        res.max_abs_corr = opt.value;
        res.chi2 = std::numeric_limits<double>::infinity();
        return res;
    }
    res.max_abs_corr = opt.value;
    auto corrs = ws.correlations(opt.weights);
    auto [chi2, df] = chi2_figure(corrs, n);
    res.chi2 = chi2;
    res.df = df;
    return res;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    if (v.size() % 2 == 1) return v[m];
    return 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

CancellationResult cancel_pair(const CholeskyBasis& basis, int i, int j,
                               const std::vector<int>& outside, int n) {
    if (i == j) throw InvalidInput("cancel_pair: i and j must differ");
    if (outside.empty()) throw InvalidInput("cancel_pair: empty outside set");

    const std::vector<int> members = {i, j};
    CancelWorkspace ws(basis, members, outside);
    const double r_ij = ws.gram(0, 1);

    // Near-duplicate variables: cancellation would collapse the combination.
    if (1.0 - std::fabs(r_ij) < 1e-12) {
        CancellationResult res;
        res.weights = {{i, r_ij >= 0 ? 1.0 : -1.0}, {j, -1.0}};
        res.degenerate = true;
        res.converged = true;
        res.chi2 = std::numeric_limits<double>::infinity();
        res.df = static_cast<int>(outside.size());
        return res;
    }

    // Population-consistent init: median of outside correlation ratios
    // r_vj / r_vi over variables where r_vi is clearly nonzero, falling back
    // to r_ij itself.
    const double ratio_floor = 2.0 / std::sqrt(n - 1.0);
    std::vector<double> ratios;
    for (std::size_t u = 0; u < outside.size(); ++u) {
        double rvi = ws.cross(0, u);
        if (std::fabs(rvi) > ratio_floor) ratios.push_back(ws.cross(1, u) / rvi);
    }
    double w0 = ratios.empty() ? r_ij : median(std::move(ratios));

    auto objective = [&ws](std::span<const double> w) { return ws.criterion(w); };
    MinimizeResult opt = minimize_maxabs(objective, {w0});
    return finish_cancellation(ws, members, opt, n);
}

CancellationResult cancel_multi(const CholeskyBasis& basis,
                                const std::vector<int>& cancellers, int target,
                                const std::vector<int>& outside, int n) {
    if (cancellers.empty()) throw InvalidInput("cancel_multi: no cancellers");
    for (int v : cancellers)
        if (v == target) throw InvalidInput("cancel_multi: target among cancellers");
    if (outside.empty()) throw InvalidInput("cancel_multi: empty outside set");

    std::vector<int> members = cancellers;
    members.push_back(target);
    CancelWorkspace ws(basis, members, outside);
    const int k = ws.k;

    // Least-squares regression of the target on the cancellers as init.
    Eigen::MatrixXd a = ws.gram.topLeftCorner(k, k);
    Eigen::VectorXd g = ws.gram.col(k).head(k);
    a.diagonal().array() += 1e-12;
    Eigen::VectorXd w0 = a.ldlt().solve(g);

    auto objective = [&ws](std::span<const double> w) { return ws.criterion(w); };
    MinimizeResult opt =
        minimize_maxabs(objective, std::vector<double>(w0.data(), w0.data() + k));
    return finish_cancellation(ws, members, opt, n);
}

std::pair<double, double> pair_loadings(double w, double r_ij) {
    if (w == 0.0) throw InvalidInput("pair_loadings: zero weight");
    double ratio = r_ij / w;
    if (ratio <= 0.0)
        throw InconsistentCancellation(
            "correlation sign contradicts cancellation weight (r=" +
            std::to_string(r_ij) + ", w=" + std::to_string(w) + ")");
    double a = std::sqrt(ratio);
    double b = r_ij / a;
    return {a, b};
}

std::map<int, double> multifactor_loadings(
    const CancellationResult& result,
    const std::map<int, CancellerInfo>& cancellers) {
    std::map<int, double> loadings;
    // The cancelled target is the trailing (var, -1) entry; every other
    // entry must carry a known unifactorial loading.
    for (std::size_t a = 0; a + 1 < result.weights.size(); ++a) {
        const auto& [var, w] = result.weights[a];
        auto it = cancellers.find(var);
        if (it == cancellers.end())
            throw InvalidInput("multifactor_loadings: canceller " +
                               std::to_string(var + 1) + " has no known loading");
        const auto& info = it->second;
        if (loadings.count(info.factor))
            throw InvalidInput("multifactor_loadings: duplicate factor among cancellers");
        loadings[info.factor] = w * info.loading;
    }
    return loadings;
}

}  // namespace scfa
