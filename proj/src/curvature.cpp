#include "hygraph/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>

#include "hygraph/errors.hpp"

namespace hygraph::curvature {

namespace {

constexpr double kFlowEps = 1e-15;

struct Arc {
    std::size_t to;
    std::size_t rev;
    double cap;
    double cost;
};

class FlowNetwork {
public:
    explicit FlowNetwork(std::size_t n) : adj_(n) {}

    void add_arc(std::size_t u, std::size_t v, double cap, double cost) {
        adj_[u].push_back({v, adj_[v].size(), cap, cost});
        adj_[v].push_back({u, adj_[u].size() - 1, 0.0, -cost});
    }

    // Sends `amount` from s to t at minimum cost; returns that cost.
    double min_cost_flow(std::size_t s, std::size_t t, double amount) {
        const std::size_t n = adj_.size();
        constexpr double inf = std::numeric_limits<double>::infinity();
        std::vector<double> pot(n, 0.0), dist(n);
        std::vector<std::size_t> prev_node(n), prev_arc(n);
        double total = 0.0;
        using Item = std::pair<double, std::size_t>;
        while (amount > kFlowEps) {
            std::fill(dist.begin(), dist.end(), inf);
            dist[s] = 0.0;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
            pq.emplace(0.0, s);
            while (!pq.empty()) {
                const auto [d, u] = pq.top();
                pq.pop();
                if (d > dist[u]) continue;
                for (std::size_t a = 0; a < adj_[u].size(); ++a) {
                    const Arc& e = adj_[u][a];
                    if (e.cap <= kFlowEps) continue;
                    // reduced costs are non-negative up to rounding; clamp the noise
                    const double nd = d + std::max(0.0, e.cost + pot[u] - pot[e.to]);
                    if (nd < dist[e.to]) {
                        dist[e.to] = nd;
                        prev_node[e.to] = u;
                        prev_arc[e.to] = a;
                        pq.emplace(nd, e.to);
                    }
                }
            }
            if (dist[t] == inf) throw ContractError("transport: supply and demand totals differ");
            for (std::size_t v = 0; v < n; ++v) pot[v] += std::min(dist[v], dist[t]);

            double push = amount;
            for (std::size_t v = t; v != s; v = prev_node[v])
                push = std::min(push, adj_[prev_node[v]][prev_arc[v]].cap);
            for (std::size_t v = t; v != s; v = prev_node[v]) {
                Arc& e = adj_[prev_node[v]][prev_arc[v]];
                e.cap -= push;
                adj_[v][e.rev].cap += push;
                total += push * e.cost;
            }
            amount -= push;
        }
        return total;
    }

private:
    std::vector<std::vector<Arc>> adj_;
};

bool sorted_intersect(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return true;
        a[i] < b[j] ? ++i : ++j;
    }
    return false;
}

std::span<const std::size_t> neighbors(const CsrPattern& p, std::size_t v) {
    return {p.cols.data() + p.offsets[v], p.degree(v)};
}

// Hop distance between u and v, known to be at most 3 (both lie within one step of an edge).
double hop_distance(const CsrPattern& g, std::size_t u, std::size_t v) {
    if (u == v) return 0.0;
    if (g.contains(u, v)) return 1.0;
    if (sorted_intersect(neighbors(g, u), neighbors(g, v))) return 2.0;
    return 3.0;
}

CsrPattern undirected_view(std::size_t n, std::span<const graph::Edge> edges) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(edges.size() * 2);
    for (const auto& [s, d] : edges) {
        if (s >= n || d >= n) throw ContractError("ollivier_ricci: edge endpoint out of range");
        if (s == d) continue;
        pairs.emplace_back(s, d);
        pairs.emplace_back(d, s);
    }
    return CsrPattern::from_pairs(n, n, std::move(pairs));
}

struct Measure {
    std::vector<std::size_t> nodes;
    std::vector<double> mass;
};

Measure lazy_walk(const CsrPattern& g, std::size_t v, double alpha) {
    Measure m;
    const auto nb = neighbors(g, v);
    const double share = (1.0 - alpha) / static_cast<double>(nb.size());
    if (alpha > 0.0) {
        m.nodes.push_back(v);
        m.mass.push_back(alpha);
    }
    for (std::size_t u : nb) {
        m.nodes.push_back(u);
        m.mass.push_back(share);
    }
    return m;
}

double edge_curvature(const CsrPattern& g, std::size_t i, std::size_t j, double alpha) {
    const Measure mi = lazy_walk(g, i, alpha), mj = lazy_walk(g, j, alpha);
    Dense cost(mi.nodes.size(), mj.nodes.size());
    for (std::size_t a = 0; a < mi.nodes.size(); ++a)
        for (std::size_t b = 0; b < mj.nodes.size(); ++b) cost(a, b) = hop_distance(g, mi.nodes[a], mj.nodes[b]);
    return 1.0 - transport_cost(mi.mass, mj.mass, cost);  // d(i, j) = 1
}

}  // namespace

double transport_cost(std::span<const double> supply, std::span<const double> demand, const Dense& cost) {
    const std::size_t p = supply.size(), q = demand.size();
    if (cost.rows() != p || cost.cols() != q)
        throw DimensionError("transport_cost: cost " + cost.shape_string() + " for " +
                             std::to_string(p) + " supplies and " + std::to_string(q) + " demands");
    double ts = 0.0, td = 0.0;
    for (double v : supply) {
        if (v < 0) throw ContractError("transport_cost: negative supply");
        ts += v;
    }
    for (double v : demand) {
        if (v < 0) throw ContractError("transport_cost: negative demand");
        td += v;
    }
    if (std::abs(ts - td) > 1e-12 * std::max(1.0, ts))
        throw ContractError("transport_cost: supply and demand totals differ");

    const std::size_t s = p + q, t = p + q + 1;
    FlowNetwork net(p + q + 2);
    for (std::size_t a = 0; a < p; ++a) net.add_arc(s, a, supply[a], 0.0);
    for (std::size_t b = 0; b < q; ++b) net.add_arc(p + b, t, demand[b], 0.0);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < q; ++b)
            net.add_arc(a, p + b, std::numeric_limits<double>::infinity(), cost(a, b));
    return net.min_cost_flow(s, t, std::min(ts, td));
}

double EdgeCurvature::at(std::size_t i, std::size_t j) const {
    if (i < pattern.n_rows) {
        const auto first = pattern.cols.begin() + static_cast<std::ptrdiff_t>(pattern.offsets[i]);
        const auto last = pattern.cols.begin() + static_cast<std::ptrdiff_t>(pattern.offsets[i + 1]);
        const auto it = std::lower_bound(first, last, j);
        if (it != last && *it == j) return kappa[static_cast<std::size_t>(it - pattern.cols.begin())];
    }
    throw ContractError("no curvature for (" + std::to_string(i) + ", " + std::to_string(j) + ")");
}

Dense EdgeCurvature::values_for(const CsrPattern& p) const {
    Dense out(p.nnz(), 1);
    for (std::size_t r = 0; r < p.n_rows; ++r)
        for (std::size_t e = p.offsets[r]; e < p.offsets[r + 1]; ++e) out(e, 0) = at(r, p.cols[e]);
    return out;
}

EdgeCurvature ollivier_ricci(std::size_t n, std::span<const graph::Edge> edges, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ContractError("ollivier_ricci: alpha must lie in [0, 1)");
    EdgeCurvature out;
    out.alpha = alpha;
    out.pattern = undirected_view(n, edges);
    out.kappa.assign(out.pattern.nnz(), 0.0);
    const CsrPattern& g = out.pattern;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t e = g.offsets[i]; e < g.offsets[i + 1]; ++e) {
            const std::size_t j = g.cols[e];
            if (j < i) {
                out.kappa[e] = out.at(j, i);  // already computed for the mirrored entry
                continue;
            }
            out.kappa[e] = edge_curvature(g, i, j, alpha);
        }
    }
    return out;
}

EdgeCurvature ollivier_ricci(const graph::GraphDataset& g, double alpha) {
    return ollivier_ricci(g.n, g.edges, alpha);
}

EdgeCurvature ollivier_ricci(const CsrPattern& relation, double alpha) {
    if (relation.n_rows != relation.n_cols) throw ContractError("ollivier_ricci: relation must be square");
    const auto pairs = relation.pairs();
    return ollivier_ricci(relation.n_rows, pairs, alpha);
}

void write_csv(const EdgeCurvature& k, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "i,j,kappa\n";
    out.precision(17);
    for (std::size_t i = 0; i < k.pattern.n_rows; ++i)
        for (std::size_t e = k.pattern.offsets[i]; e < k.pattern.offsets[i + 1]; ++e)
            out << i << ',' << k.pattern.cols[e] << ',' << k.kappa[e] << '\n';
}

ad::Var CurvatureMlp::logits(const ad::Var& kappa) const {
    const auto hidden = ad::tanh(ad::add_row(ad::matmul(kappa, w1.var), b1.var));
    return ad::matmul(hidden, w2.var);
}

std::vector<Parameter*> CurvatureMlp::parameters() { return {&w1, &b1, &w2}; }

ad::Var neighbor_attention(const CurvatureMlp& mlp, const Dense& kappa, const CsrPattern& pattern) {
    if (kappa.rows() != pattern.nnz() || kappa.cols() != 1)
        throw DimensionError("neighbor_attention: kappa " + kappa.shape_string() + " for " +
                             std::to_string(pattern.nnz()) + " entries");
    return ad::segment_softmax(mlp.logits(ad::constant(kappa)), pattern);
}

}  // namespace hygraph::curvature
