#include "scfa/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "scfa/distributions.hpp"
#include "scfa/errors.hpp"
#include "scfa/parallel.hpp"

namespace scfa {

DistanceMatrix build_distances(const CholeskyBasis& basis,
                               const std::vector<int>& non_orphans, int n) {
    const int p = static_cast<int>(non_orphans.size());
    if (p < 3) throw InvalidInput("build_distances: need at least 3 non-orphan variables");

    DistanceMatrix d;
    d.vars = non_orphans;
    d.n = n;
    d.df = p - 2;
    d.chi2 = Eigen::MatrixXd::Zero(p, p);
    d.weight = Eigen::MatrixXd::Zero(p, p);

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(p * (p - 1) / 2);
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b) pairs.emplace_back(a, b);

    std::vector<CancellationResult> results(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
        auto [a, b] = pairs[k];
        std::vector<int> outside;
        outside.reserve(p - 2);
        for (int u = 0; u < p; ++u)
            if (u != a && u != b) outside.push_back(non_orphans[u]);
        results[k] = cancel_pair(basis, non_orphans[a], non_orphans[b], outside, n);
    });

    for (std::size_t k = 0; k < pairs.size(); ++k) {
        auto [a, b] = pairs[k];
        d.chi2(a, b) = d.chi2(b, a) = results[k].chi2;
        d.weight(a, b) = results[k].weights.front().second;
    }
    return d;
}

Dendrogram complete_linkage(const DistanceMatrix& d) {
    const int p = d.size();
    Dendrogram dend;
    dend.leaves = p;

    // Working distance matrix updated by the Lance-Williams rule for
    // complete linkage: D(a+b, c) = max(D(a,c), D(b,c)).
    Eigen::MatrixXd dist = d.chi2;
    std::vector<int> active(p);
    std::iota(active.begin(), active.end(), 0);
    std::vector<int> id(p), min_leaf(p);
    std::iota(id.begin(), id.end(), 0);
    std::iota(min_leaf.begin(), min_leaf.end(), 0);

    int next_id = p;
    while (active.size() > 1) {
        // Global minimum with lexicographic (min-leaf, min-leaf) tie-break.
        double best = std::numeric_limits<double>::infinity();
        int bi = -1, bj = -1;
        for (std::size_t x = 0; x < active.size(); ++x) {
            for (std::size_t y = x + 1; y < active.size(); ++y) {
                int a = active[x], b = active[y];
                double dv = dist(a, b);
                int lo = std::min(min_leaf[a], min_leaf[b]);
                int hi = std::max(min_leaf[a], min_leaf[b]);
                bool better = dv < best;
                if (dv == best && bi >= 0) {
                    int clo = std::min(min_leaf[bi], min_leaf[bj]);
                    int chi = std::max(min_leaf[bi], min_leaf[bj]);
                    better = lo < clo || (lo == clo && hi < chi);
                }
                if (better) {
                    best = dv;
                    bi = a;
                    bj = b;
                }
            }
        }

        Merge m;
        m.a = id[bi];
        m.b = id[bj];
        if (m.a > m.b) std::swap(m.a, m.b);
        m.height = std::isfinite(best) ? std::sqrt(best)
                                       : std::numeric_limits<double>::infinity();
        dend.merges.push_back(m);

        // Fold bj into bi, retire bj.
        for (int c : active) {
            if (c == bi || c == bj) continue;
            double dv = std::max(dist(bi, c), dist(bj, c));
            dist(bi, c) = dist(c, bi) = dv;
        }
        id[bi] = next_id++;
        min_leaf[bi] = std::min(min_leaf[bi], min_leaf[bj]);
        active.erase(std::find(active.begin(), active.end(), bj));
    }
    return dend;
}

ClusterSet gate_clusters(Dendrogram& dend, const DistanceMatrix& d, double alpha) {
    const int p = d.size();
    const long tests = static_cast<long>(p) * (p - 1) / 2;
    const double crit = chi_square_inv(1.0 - sidak_level(alpha, tests), d.df);
    dend.threshold_height = std::sqrt(crit);

    // With one critical value for every merge and nondecreasing heights,
    // allowed clusters are exactly the dendrogram cut at the threshold.
    for (auto& m : dend.merges) {
        double chi2_height = m.height * m.height;
        m.allowed = std::isfinite(m.height) && chi2_height <= crit;
    }

    // Rebuild cluster membership from the merge list.
    std::vector<std::vector<int>> by_id(2 * p - 1);
    for (int i = 0; i < p; ++i) by_id[i] = {i};
    std::vector<bool> is_root(2 * p - 1, false);
    for (int i = 0; i < p; ++i) is_root[i] = true;
    int next_id = p;
    for (const auto& m : dend.merges) {
        by_id[next_id] = by_id[m.a];
        by_id[next_id].insert(by_id[next_id].end(), by_id[m.b].begin(), by_id[m.b].end());
        std::sort(by_id[next_id].begin(), by_id[next_id].end());
        is_root[m.a] = is_root[m.b] = false;
        is_root[next_id] = true;
        ++next_id;
    }

    // Maximal allowed clusters: walk from the top, splitting disallowed merges.
    ClusterSet out;
    std::vector<int> stack;
    for (int i = 0; i < 2 * p - 1; ++i)
        if (is_root[i]) stack.push_back(i);
    while (!stack.empty()) {
        int node = stack.back();
        stack.pop_back();
        if (node < p) {
            out.unexplained.push_back(d.vars[node]);
            continue;
        }
        const Merge& m = dend.merges[node - p];
        if (m.allowed) {
            std::vector<int> vars;
            for (int leaf : by_id[node]) vars.push_back(d.vars[leaf]);
            std::sort(vars.begin(), vars.end());
            out.factors.push_back(std::move(vars));
        } else {
            stack.push_back(m.a);
            stack.push_back(m.b);
        }
    }
    std::sort(out.factors.begin(), out.factors.end());
    std::sort(out.unexplained.begin(), out.unexplained.end());
    return out;
}

namespace {

std::vector<int> all_cluster_vars(const ClusterSet& c) {
    std::vector<int> vars;
    for (const auto& f : c.factors) vars.insert(vars.end(), f.begin(), f.end());
    vars.insert(vars.end(), c.unexplained.begin(), c.unexplained.end());
    std::sort(vars.begin(), vars.end());
    return vars;
}

}  // namespace

ClusterSet coplanarity_scan(const ClusterSet& clusters, const CholeskyBasis& basis,
                            int n, double alpha) {
    ClusterSet cur = clusters;
    const std::vector<int> non_orphans = all_cluster_vars(clusters);

    bool changed = true;
    while (changed && cur.factors.size() >= 3) {
        changed = false;
        const auto& fs = cur.factors;
        const int m = static_cast<int>(fs.size());

        // Sidak count: every attempt the scan performs this pass.
        long total_attempts = 0;
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b)
                for (int c = b + 1; c < m; ++c)
                    total_attempts += static_cast<long>(fs[a].size()) * fs[b].size() * fs[c].size();
        const int df = static_cast<int>(non_orphans.size()) - 3;
        const double crit = chi_square_inv(1.0 - sidak_level(alpha, total_attempts), df);

        for (int a = 0; a < m && !changed; ++a) {
            for (int b = a + 1; b < m && !changed; ++b) {
                for (int c = b + 1; c < m && !changed; ++c) {
                    // Representatives of the two lower-indexed clusters cancel
                    // the third's representative.
                    std::vector<std::array<int, 3>> combos;
                    for (int u : fs[a])
                        for (int v : fs[b])
                            for (int t : fs[c]) combos.push_back({u, v, t});

                    std::vector<double> chis(combos.size());
                    parallel_for(combos.size(), [&](std::size_t k) {
                        auto [u, v, t] = combos[k];
                        std::vector<int> outside;
                        for (int x : non_orphans)
                            if (x != u && x != v && x != t) outside.push_back(x);
                        chis[k] = cancel_multi(basis, {u, v}, t, outside, n).chi2;
                    });
                    bool coplanar = true;
                    for (double chi : chis)
                        if (!(chi <= crit)) { coplanar = false; break; }
                    if (!coplanar) continue;

                    // Keep the least-correlated pair of clusters as factors,
                    // reject the remaining cluster as multifactorial.
                    std::array<int, 3> trip = {a, b, c};
                    double best_mean = std::numeric_limits<double>::infinity();
                    int reject = -1;
                    const std::array<std::pair<int, int>, 3> pairs = {
                        {{0, 1}, {0, 2}, {1, 2}}};
                    for (int q = 0; q < 3; ++q) {
                        auto [x, y] = pairs[q];
                        double sum = 0.0;
                        int cnt = 0;
                        for (int u : fs[trip[x]])
                            for (int v : fs[trip[y]]) {
                                sum += std::fabs(basis.gram(u, v));
                                ++cnt;
                            }
                        double mean = sum / cnt;
                        if (mean < best_mean) {
                            best_mean = mean;
                            reject = trip[3 - x - y];
                        }
                    }

                    for (int v : fs[reject]) {
                        cur.coplanar_rejected.push_back(v);
                        cur.unexplained.push_back(v);
                    }
                    cur.factors.erase(cur.factors.begin() + reject);
                    changed = true;
                }
            }
        }
    }
    std::sort(cur.unexplained.begin(), cur.unexplained.end());
    std::sort(cur.coplanar_rejected.begin(), cur.coplanar_rejected.end());
    return cur;
}

namespace {

void render_ascii_node(const Dendrogram& dend, int node,
                       const std::vector<std::string>& labels,
                       const std::string& prefix, bool last, std::ostringstream& out) {
    const int p = dend.leaves;
    out << prefix << (last ? "`-- " : "|-- ");
    if (node < p) {
        out << labels[node] << "\n";
        return;
    }
    const Merge& m = dend.merges[node - p];
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", m.height);
    out << "h=" << buf << (m.allowed ? "" : " *") << "\n";
    std::string child_prefix = prefix + (last ? "    " : "|   ");
    render_ascii_node(dend, m.a, labels, child_prefix, false, out);
    render_ascii_node(dend, m.b, labels, child_prefix, true, out);
}

}  // namespace

std::string render_dendrogram(const Dendrogram& dend,
                              const std::vector<std::string>& labels,
                              DendrogramFormat format) {
    const int p = dend.leaves;
    if (static_cast<int>(labels.size()) != p)
        throw InvalidInput("render_dendrogram: label count mismatch");

    std::ostringstream out;
    char buf[64];
    if (format == DendrogramFormat::ascii) {
        std::snprintf(buf, sizeof(buf), "%.4f", dend.threshold_height);
        out << "dendrogram (heights are sqrt chi2; * marks merges above threshold)\n";
        out << "threshold = " << buf << "\n";
        int root = p + static_cast<int>(dend.merges.size()) - 1;
        if (dend.merges.empty()) {
            for (int i = 0; i < p; ++i) out << "|-- " << labels[i] << "\n";
        } else {
            render_ascii_node(dend, root, labels, "", true, out);
        }
        return out.str();
    }

    // DOT digraph; merges above the threshold get dashed edges.
    out << "digraph dendrogram {\n";
    std::snprintf(buf, sizeof(buf), "%.4f", dend.threshold_height);
    out << "  graph [label=\"threshold=" << buf << "\"];\n";
    out << "  node [shape=box];\n";
    for (int i = 0; i < p; ++i)
        out << "  n" << i << " [label=\"" << labels[i] << "\"];\n";
    for (std::size_t t = 0; t < dend.merges.size(); ++t) {
        const Merge& m = dend.merges[t];
        std::snprintf(buf, sizeof(buf), "%.4f", m.height);
        out << "  n" << (p + t) << " [label=\"h=" << buf << "\"";
        if (!m.allowed) out << " style=dashed";
        out << "];\n";
        const char* style = m.allowed ? "" : " [style=dashed]";
        out << "  n" << (p + t) << " -> n" << m.a << style << ";\n";
        out << "  n" << (p + t) << " -> n" << m.b << style << ";\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace scfa
