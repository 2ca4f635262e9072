#include "hygraph/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "hygraph/errors.hpp"

namespace hygraph::metrics {

namespace {

void check_pair(std::span<const int> truth, std::span<const int> pred, const char* what) {
    if (truth.size() != pred.size())
        throw ContractError(std::string(what) + ": " + std::to_string(truth.size()) + " true labels vs " +
                            std::to_string(pred.size()) + " predictions");
    if (truth.empty()) throw ContractError(std::string(what) + ": no labels");
}

double choose2(long long n) { return static_cast<double>(n) * static_cast<double>(n - 1) / 2.0; }

// Same partition up to a bijection of label ids.
bool same_partition(const Contingency& c) {
    if (c.a.size() != c.b.size()) return false;
    for (const auto& row : c.table) {
        std::size_t nonzero = 0;
        for (long long x : row) nonzero += x != 0;
        if (nonzero != 1) return false;
    }
    return true;
}

}  // namespace

Contingency Contingency::from(std::span<const int> truth, std::span<const int> pred) {
    check_pair(truth, pred, "contingency");
    Contingency c;
    std::map<int, std::size_t> ti, pi;
    for (int t : truth) ti.emplace(t, 0);
    for (int p : pred) pi.emplace(p, 0);
    for (auto& [label, idx] : ti) {
        idx = c.true_ids.size();
        c.true_ids.push_back(label);
    }
    for (auto& [label, idx] : pi) {
        idx = c.pred_ids.size();
        c.pred_ids.push_back(label);
    }
    c.table.assign(ti.size(), std::vector<long long>(pi.size(), 0));
    c.a.assign(ti.size(), 0);
    c.b.assign(pi.size(), 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto u = ti[truth[i]], v = pi[pred[i]];
        ++c.table[u][v];
        ++c.a[u];
        ++c.b[v];
    }
    c.total = static_cast<long long>(truth.size());
    return c;
}

F1 f1_scores(std::span<const int> truth, std::span<const int> pred) {
    check_pair(truth, pred, "f1_scores");
    std::map<int, std::array<long long, 3>> counts;  // tp, fp, fn
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == pred[i]) {
            ++counts[truth[i]][0];
        } else {
            ++counts[pred[i]][1];
            ++counts[truth[i]][2];
        }
    }
    long long tp = 0, fp = 0, fn = 0;
    double macro = 0.0;
    for (const auto& [label, c] : counts) {
        tp += c[0];
        fp += c[1];
        fn += c[2];
        macro += 2.0 * static_cast<double>(c[0]) / static_cast<double>(2 * c[0] + c[1] + c[2]);
    }
    F1 out;
    out.micro = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    out.macro = macro / static_cast<double>(counts.size());
    return out;
}

double accuracy(std::span<const int> truth, std::span<const int> pred) {
    check_pair(truth, pred, "accuracy");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == pred[i];
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double entropy(std::span<const long long> counts, long long total) {
    double h = 0.0;
    const double n = static_cast<double>(total);
    for (long long c : counts)
        if (c > 0) h -= static_cast<double>(c) / n * std::log(static_cast<double>(c) / n);
    return h;
}

double mutual_information(const Contingency& c) {
    const double n = static_cast<double>(c.total);
    double mi = 0.0;
    for (std::size_t u = 0; u < c.a.size(); ++u) {
        for (std::size_t v = 0; v < c.b.size(); ++v) {
            const double nuv = static_cast<double>(c.table[u][v]);
            if (nuv == 0) continue;
            mi += nuv / n * std::log(n * nuv / (static_cast<double>(c.a[u]) * static_cast<double>(c.b[v])));
        }
    }
    return std::max(mi, 0.0);
}

double expected_mutual_information(const Contingency& c) {
    const long long n = c.total;
    const double nd = static_cast<double>(n);
    const double lg_n = std::lgamma(nd + 1.0);
    double emi = 0.0;
    for (long long a : c.a) {
        for (long long b : c.b) {
            const double ad = static_cast<double>(a), bd = static_cast<double>(b);
            // log of a! b! (N-a)! (N-b)! / N!, shared by every cell value
            const double base = std::lgamma(ad + 1) + std::lgamma(bd + 1) + std::lgamma(nd - ad + 1) +
                                std::lgamma(nd - bd + 1) - lg_n;
            for (long long x = std::max(1LL, a + b - n); x <= std::min(a, b); ++x) {
                const double xd = static_cast<double>(x);
                const double log_p = base - std::lgamma(xd + 1) - std::lgamma(ad - xd + 1) - std::lgamma(bd - xd + 1) -
                                     std::lgamma(nd - ad - bd + xd + 1);
                emi += xd / nd * std::log(nd * xd / (ad * bd)) * std::exp(log_p);
            }
        }
    }
    return emi;
}

double nmi(std::span<const int> truth, std::span<const int> pred) {
    const auto c = Contingency::from(truth, pred);
    const double hu = entropy(c.a, c.total), hv = entropy(c.b, c.total);
    // Both partitions a single cluster: identical, and 0/0 otherwise.
    if (c.a.size() == 1 && c.b.size() == 1) return 1.0;
    const double denom = 0.5 * (hu + hv);
    if (denom <= 0.0) return 0.0;
    return std::clamp(mutual_information(c) / denom, 0.0, 1.0);
}

Score ami(std::span<const int> truth, std::span<const int> pred) {
    const auto c = Contingency::from(truth, pred);
    if (same_partition(c)) return {1.0, false};
    const double mi = mutual_information(c), emi = expected_mutual_information(c);
    const double denom = 0.5 * (entropy(c.a, c.total) + entropy(c.b, c.total)) - emi;
    if (std::abs(denom) < 1e-12) return {0.0, true};
    return {(mi - emi) / denom, false};
}

Score ari(std::span<const int> truth, std::span<const int> pred) {
    const auto c = Contingency::from(truth, pred);
    if (same_partition(c)) return {1.0, false};
    // Everything in units of pairs, scaled by C(N, 2) to stay in exact integer arithmetic as
    // long as the counts fit a double mantissa.
    double index = 0.0, sa = 0.0, sb = 0.0;
    for (const auto& row : c.table)
        for (long long x : row) index += choose2(x);
    for (long long x : c.a) sa += choose2(x);
    for (long long x : c.b) sb += choose2(x);
    const double pairs = choose2(c.total);
    const double num = index * pairs - sa * sb;
    const double den = 0.5 * (sa + sb) * pairs - sa * sb;
    if (std::abs(den) < 1e-12) return {0.0, true};
    return {num / den, false};
}

// ---------------------------------------------------------------------------------------------

std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    if (n == 0) return {};
    const std::size_t m = cost[0].size();
    for (const auto& row : cost)
        if (row.size() != m) throw DimensionError("hungarian: ragged cost matrix");
    if (n > m) throw ContractError("hungarian: more rows than columns");
    // Shortest augmenting paths with row/column potentials; 1-based with a virtual column 0.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> out(n);
    for (std::size_t j = 1; j <= m; ++j)
        if (p[j] != 0) out[p[j] - 1] = j - 1;
    return out;
}

std::vector<int> match_clusters(std::span<const int> truth, std::span<const int> pred) {
    const auto c = Contingency::from(truth, pred);
    const std::size_t k = std::max(c.a.size(), c.b.size());
    // rows: predicted clusters, cols: true labels, padded square; maximise overlap
    std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
    for (std::size_t u = 0; u < c.a.size(); ++u)
        for (std::size_t v = 0; v < c.b.size(); ++v) cost[v][u] = -static_cast<double>(c.table[u][v]);
    const auto assign = hungarian(cost);
    int fresh = *std::max_element(c.true_ids.begin(), c.true_ids.end()) + 1;
    std::map<int, int> relabel;
    for (std::size_t v = 0; v < c.b.size(); ++v)
        relabel[c.pred_ids[v]] = assign[v] < c.a.size() ? c.true_ids[assign[v]] : fresh++;
    std::vector<int> out(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) out[i] = relabel[pred[i]];
    return out;
}

double matched_accuracy(std::span<const int> truth, std::span<const int> pred) {
    const auto mapped = match_clusters(truth, pred);
    return accuracy(truth, mapped);
}

// ---------------------------------------------------------------------------------------------

nlohmann::json Report::to_json() const {
    nlohmann::json j{{"acc", acc}, {"micro_f1", micro_f1}, {"macro_f1", macro_f1},
                     {"nmi", nmi},  {"ami", ami},           {"ari", ari}};
    if (!degenerate.empty()) j["degenerate"] = degenerate;
    return j;
}

namespace {

Report partition_part(std::span<const int> truth, std::span<const int> pred) {
    Report r;
    r.nmi = nmi(truth, pred);
    const auto am = ami(truth, pred);
    const auto ar = ari(truth, pred);
    r.ami = am.value;
    r.ari = ar.value;
    if (am.degenerate) r.degenerate.push_back("ami");
    if (ar.degenerate) r.degenerate.push_back("ari");
    return r;
}

}  // namespace

Report classification_report(std::span<const int> truth, std::span<const int> pred) {
    auto r = partition_part(truth, pred);
    r.acc = accuracy(truth, pred);
    const auto f = f1_scores(truth, pred);
    r.micro_f1 = f.micro;
    r.macro_f1 = f.macro;
    return r;
}

Report clustering_report(std::span<const int> truth, std::span<const int> clusters) {
    auto r = partition_part(truth, clusters);
    const auto mapped = match_clusters(truth, clusters);
    r.acc = accuracy(truth, mapped);
    const auto f = f1_scores(truth, mapped);
    r.micro_f1 = f.micro;
    r.macro_f1 = f.macro;
    return r;
}

}  // namespace hygraph::metrics
