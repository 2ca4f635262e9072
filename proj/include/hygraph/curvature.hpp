#pragma once

// Ollivier-Ricci edge curvature and the small MLP that turns it into neighbour attention.

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "hygraph/autodiff.hpp"
#include "hygraph/dense.hpp"
#include "hygraph/graph.hpp"
#include "hygraph/optim.hpp"
#include "hygraph/sparse.hpp"

namespace hygraph::curvature {

// Minimum total cost of moving `supply` onto `demand` (equal totals) with the given
// (supply x demand) cost matrix. Exact: successive shortest augmenting paths.
double transport_cost(std::span<const double> supply, std::span<const double> demand, const Dense& cost);

// Curvature of every edge of the undirected simple view of a graph, stored against a
// symmetric CSR pattern so that kappa(i, j) == kappa(j, i) by construction.
struct EdgeCurvature {
    CsrPattern pattern;
    std::vector<double> kappa;  // aligned with pattern.cols
    double alpha = 0.5;

    // Throws ContractError if (i, j) is not an edge.
    double at(std::size_t i, std::size_t j) const;
    // kappa for every entry of `p` (which must be a sub-pattern of the undirected view).
    Dense values_for(const CsrPattern& p) const;
};

// Lazy random-walk measures with idleness `alpha` (mass alpha stays on the node, the rest is
// spread evenly over its neighbours) compared by W1 over hop distance.
EdgeCurvature ollivier_ricci(std::size_t n, std::span<const graph::Edge> edges, double alpha = 0.5);
EdgeCurvature ollivier_ricci(const graph::GraphDataset& g, double alpha = 0.5);
EdgeCurvature ollivier_ricci(const CsrPattern& relation, double alpha = 0.5);

void write_csv(const EdgeCurvature& k, const std::filesystem::path& path);

// 1 -> hidden -> 1 tanh network producing one attention logit per edge. No output bias:
// the logits feed a softmax, which ignores a shared shift.
struct CurvatureMlp {
    Parameter w1;  // 1 x hidden
    Parameter b1;  // 1 x hidden
    Parameter w2;  // hidden x 1

    static constexpr std::size_t kHidden = 16;

    // kappa: m x 1 constant column. Returns m x 1 logits.
    ad::Var logits(const ad::Var& kappa) const;
    std::vector<Parameter*> parameters();
};

// Softmax of MLP(kappa) within every row of `pattern` (rows with no entries get nothing).
ad::Var neighbor_attention(const CurvatureMlp& mlp, const Dense& kappa, const CsrPattern& pattern);

}  // namespace hygraph::curvature
