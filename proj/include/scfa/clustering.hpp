#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scfa/cancellation.hpp"
#include "scfa/cholesky_basis.hpp"

namespace scfa {

// Pairwise signal-cancellation chi2 values over the non-orphan variables.
// weight(i,j) for i < j is the optimized weight of vars[i] with vars[j]
// fixed at -1; entries can be +inf (near-duplicate sentinel).
struct DistanceMatrix {
    std::vector<int> vars;   // non-orphan variable ids, ascending
    Eigen::MatrixXd chi2;    // p' x p', symmetric, diagonal unused
    Eigen::MatrixXd weight;  // upper triangle meaningful
    int df = 0;              // outside-set size per entry (p' - 2)
    int n = 0;

    int size() const { return static_cast<int>(vars.size()); }
};

// All-pairs cancellation scan; entry (i,j) = cancel_pair(vars[i], vars[j])
// with outside = all other non-orphans. Parallelized over pairs with
// deterministic per-slot aggregation.
DistanceMatrix build_distances(const CholeskyBasis& basis,
                               const std::vector<int>& non_orphans, int n);

// One agglomeration step. Cluster ids follow the scipy convention:
// leaves are 0..p'-1, the cluster made by merge t gets id p'+t.
struct Merge {
    int a = 0, b = 0;
    double height = 0.0;  // sqrt(chi2) scale
    bool allowed = false;
};

struct Dendrogram {
    int leaves = 0;
    std::vector<Merge> merges;       // p'-1 entries, heights nondecreasing
    double threshold_height = 0.0;   // sqrt scale, set by gate_clusters
};

// Complete-linkage agglomeration (cluster distance = max pairwise chi2).
// Ties broken by the lexicographically smallest (min-index, min-index) pair.
Dendrogram complete_linkage(const DistanceMatrix& d);

struct ClusterSet {
    std::vector<std::vector<int>> factors;  // variable ids, each sorted; list ordered by smallest member
    std::vector<int> unexplained;           // singletons + coplanar rejects
    std::vector<int> coplanar_rejected;
};

// Accept merges whose complete-linkage chi2 distance is non-significant at
// the alpha level Sidak-corrected for the number of pair tests performed
// (p'(p'-1)/2); factors are the maximal allowed clusters of size >= 2.
// Fills the merges' allowed flags and the threshold height on `dend`.
ClusterSet gate_clusters(Dendrogram& dend, const DistanceMatrix& d, double alpha);

// Test every cluster triplet for coplanarity: representatives of the two
// lower-indexed clusters cancel a representative of the third; the triplet
// is coplanar when no attempt is significant (Sidak over the scan's attempt
// count). On detection the least-correlated cluster pair (mean |r|) is kept
// and the remaining cluster's variables move to unexplained; the scan
// restarts until stable.
ClusterSet coplanarity_scan(const ClusterSet& clusters, const CholeskyBasis& basis,
                            int n, double alpha);

enum class DendrogramFormat { ascii, dot };

// Deterministic text rendering; labels indexed by leaf id. Merges above the
// threshold are marked (dashed in DOT output).
std::string render_dendrogram(const Dendrogram& dend,
                              const std::vector<std::string>& labels,
                              DendrogramFormat format);

}  // namespace scfa
