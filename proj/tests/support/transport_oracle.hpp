#pragma once

// Brute-force optimal-transport references for tiny problems.
//
// primal_by_bases: every transportation-problem vertex is a basic solution whose basic cells
// form a spanning tree of the supply/demand bipartite graph. All (p+q-1)-subsets of cells are
// tried; the ones that form a tree give a unique solution by leaf peeling, and the cheapest
// feasible one is the optimum.
//
// dual_by_potentials: Kantorovich duality, W1 = max sum f(x) (mu(x) - nu(x)) over functions
// that are 1-Lipschitz for an integer metric. The constraint matrix is totally unimodular, so
// an optimal f can be taken integral; with f(x0) = 0 every |f(x)| <= d(x0, x).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

namespace hygraph::testing {

inline double primal_by_bases(const std::vector<double>& a, const std::vector<double>& b,
                              const std::vector<std::vector<double>>& cost) {
    const std::size_t p = a.size(), q = b.size(), cells = p * q, m = p + q - 1;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(m);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
        if (depth == m) {
            std::vector<double> ra = a, rb = b;
            std::vector<bool> done(m, false);
            std::vector<double> flow(m, 0.0);
            std::vector<int> row_count(p, 0), col_count(q, 0);
            for (std::size_t c : pick) {
                ++row_count[c / q];
                ++col_count[c % q];
            }
            for (std::size_t round = 0; round < m; ++round) {
                bool progressed = false;
                for (std::size_t t = 0; t < m && !progressed; ++t) {
                    if (done[t]) continue;
                    const std::size_t r = pick[t] / q, c = pick[t] % q;
                    if (row_count[r] == 1) {
                        flow[t] = ra[r];
                    } else if (col_count[c] == 1) {
                        flow[t] = rb[c];
                    } else {
                        continue;
                    }
                    ra[r] -= flow[t];
                    rb[c] -= flow[t];
                    --row_count[r];
                    --col_count[c];
                    done[t] = true;
                    progressed = true;
                }
                if (!progressed) return;  // cycle: not a basis
            }
            double total = 0.0;
            for (std::size_t t = 0; t < m; ++t) {
                if (flow[t] < -1e-12) return;
                total += flow[t] * cost[pick[t] / q][pick[t] % q];
            }
            for (double v : ra)
                if (std::abs(v) > 1e-12) return;
            for (double v : rb)
                if (std::abs(v) > 1e-12) return;
            best = std::min(best, total);
            return;
        }
        for (std::size_t c = start; c + (m - depth) <= cells; ++c) {
            pick[depth] = c;
            rec(c + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

// mu, nu: masses on points 0..k-1; dist: integer metric on those points.
inline double dual_by_potentials(const std::vector<double>& mu, const std::vector<double>& nu,
                                 const std::vector<std::vector<int>>& dist) {
    const std::size_t k = mu.size();
    std::vector<int> f(k, 0);
    double best = -std::numeric_limits<double>::infinity();
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == k) {
            double v = 0.0;
            for (std::size_t x = 0; x < k; ++x) v += f[x] * (mu[x] - nu[x]);
            best = std::max(best, v);
            return;
        }
        for (int val = -dist[0][i]; val <= dist[0][i]; ++val) {
            bool ok = true;
            for (std::size_t y = 0; y < i && ok; ++y) ok = std::abs(val - f[y]) <= dist[i][y];
            if (!ok) continue;
            f[i] = val;
            rec(i + 1);
        }
    };
    rec(1);  // f[0] = 0
    return best;
}

// All-pairs hop distances by BFS on an undirected adjacency list; unreachable = large.
inline std::vector<std::vector<int>> bfs_distances(const std::vector<std::vector<std::size_t>>& adj) {
    const std::size_t n = adj.size();
    std::vector<std::vector<int>> d(n, std::vector<int>(n, 1 << 20));
    for (std::size_t s = 0; s < n; ++s) {
        std::queue<std::size_t> q;
        d[s][s] = 0;
        q.push(s);
        while (!q.empty()) {
            const auto u = q.front();
            q.pop();
            for (auto v : adj[u])
                if (d[s][v] > d[s][u] + 1) {
                    d[s][v] = d[s][u] + 1;
                    q.push(v);
                }
        }
    }
    return d;
}

// Reference Ollivier-Ricci curvature of edge (i, j) computed both ways; returns the pair.
struct OracleCurvature {
    double primal;
    double dual;
};

inline OracleCurvature oracle_curvature(const std::vector<std::vector<std::size_t>>& adj, std::size_t i,
                                        std::size_t j, double alpha) {
    const auto d = bfs_distances(adj);
    const std::size_t n = adj.size();
    auto measure = [&](std::size_t v) {
        std::vector<double> m(n, 0.0);
        m[v] += alpha;
        for (auto u : adj[v]) m[u] += (1.0 - alpha) / static_cast<double>(adj[v].size());
        return m;
    };
    const auto mi = measure(i), mj = measure(j);

    std::vector<std::size_t> si, sj;
    for (std::size_t v = 0; v < n; ++v) {
        if (mi[v] > 0) si.push_back(v);
        if (mj[v] > 0) sj.push_back(v);
    }
    std::vector<double> a, b;
    for (auto v : si) a.push_back(mi[v]);
    for (auto v : sj) b.push_back(mj[v]);
    std::vector<std::vector<double>> cost(si.size(), std::vector<double>(sj.size()));
    for (std::size_t x = 0; x < si.size(); ++x)
        for (std::size_t y = 0; y < sj.size(); ++y) cost[x][y] = d[si[x]][sj[y]];

    // dual over the union of supports
    std::vector<std::size_t> uni;
    for (std::size_t v = 0; v < n; ++v)
        if (mi[v] > 0 || mj[v] > 0) uni.push_back(v);
    std::vector<double> mu, nu;
    std::vector<std::vector<int>> du(uni.size(), std::vector<int>(uni.size()));
    for (std::size_t x = 0; x < uni.size(); ++x) {
        mu.push_back(mi[uni[x]]);
        nu.push_back(mj[uni[x]]);
        for (std::size_t y = 0; y < uni.size(); ++y) du[x][y] = d[uni[x]][uni[y]];
    }
    const double dij = d[i][j];
    return {1.0 - primal_by_bases(a, b, cost) / dij, 1.0 - dual_by_potentials(mu, nu, du) / dij};
}

}  // namespace hygraph::testing
