#pragma once

#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "scfa/cholesky_basis.hpp"

namespace scfa {

struct MinimizeResult {
    std::vector<double> weights;
    double value = 0.0;
    bool converged = true;
};

// Derivative-free simplex descent (reflection/expansion/contraction) with
// one restart from the best point; the minimax criterion is piecewise-smooth
// so gradient methods are avoided. Deterministic for a fixed init.
// max_iter <= 0 selects the default cap 200 * dim^2.
MinimizeResult minimize_maxabs(
    const std::function<double(std::span<const double>)>& objective,
    std::vector<double> init, double tol = 1e-8, int max_iter = 0);

// Outcome of one signal-cancellation attempt. weights includes the fixed -1
// entry for the cancelled variable; chi2/df come from the correlations of
// the normalized combination with the outside set.
struct CancellationResult {
    std::vector<std::pair<int, double>> weights;
    double max_abs_corr = 0.0;
    double chi2 = 0.0;
    int df = 0;
    bool converged = true;
    bool degenerate = false;  // near-duplicate variables; chi2 is +inf sentinel
};

// Cancel the common signal of variables i and j: weight of i is optimized,
// j is fixed at -1, criterion is the largest |correlation| of the combination
// with the outside variables.
CancellationResult cancel_pair(const CholeskyBasis& basis, int i, int j,
                               const std::vector<int>& outside, int n);

// Cancel the signal of `target` (fixed weight -1) with optimized weights on
// the cancellers.
CancellationResult cancel_multi(const CholeskyBasis& basis,
                                const std::vector<int>& cancellers, int target,
                                const std::vector<int>& outside, int n);

// Loadings of a cancelled pair from the optimized weight and their observed
// correlation: a = sqrt(r/w), b = r/a, so a*b = r exactly. a is positive,
// b inherits the sign of r. Throws InconsistentCancellation when r/w <= 0.
std::pair<double, double> pair_loadings(double w, double r_ij);

struct CancellerInfo {
    int factor;
    double loading;
};

// Loadings of the cancelled target on each canceller's factor: the weight
// scales the canceller's signal, so loading = w * canceller loading.
// Throws on duplicate factors among cancellers.
std::map<int, double> multifactor_loadings(
    const CancellationResult& result,
    const std::map<int, CancellerInfo>& cancellers);

}  // namespace scfa
