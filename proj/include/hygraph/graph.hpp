#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "hygraph/dense.hpp"
#include "hygraph/sparse.hpp"

namespace hygraph::graph {

using Edge = std::pair<std::size_t, std::size_t>;

// Node index lists; the three sets are disjoint.
struct Masks {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;

    bool empty() const { return train.empty() && val.empty() && test.empty(); }
};

struct GraphDataset {
    std::size_t n = 0;
    Dense features;            // n x d
    std::vector<Edge> edges;   // directed (src, dst)
    std::vector<int> labels;   // empty when unlabelled
    Masks masks;
    std::size_t classes = 0;

    bool has_labels() const { return !labels.empty(); }
    std::size_t feature_dim() const { return features.cols(); }

    // Throws SchemaError describing the first violated invariant.
    void validate() const;
};

// Planetoid citation files. Content lines: id, feature values, label (tab separated); cites
// lines: two ids. Edges keep the file's column order. Features are L1 row-normalised.
// Citations naming an unknown id are skipped and counted in `dropped_edges`.
GraphDataset load_planetoid(const std::filesystem::path& content, const std::filesystem::path& cites,
                            std::size_t* dropped_edges = nullptr);

// JSON object {n, features, edges, labels|null, masks|null, classes}. Features pass through.
GraphDataset load_json_graph(const std::filesystem::path& path);
void save_json_graph(const GraphDataset& g, const std::filesystem::path& path);

// Adds the reverse of every edge.
GraphDataset symmetrize(const GraphDataset& g);

// Stratified train/val/test split with the given fractions (the remainder goes to val).
Masks stratified_split(std::span<const int> labels, std::size_t classes, double train_fraction,
                       double test_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------------------------

enum class Branch { along, rev, loop };

struct MultiOrderAdjacency {
    std::size_t n = 0;
    std::size_t max_order = 0;
    std::vector<CsrPattern> along;  // along[k - 1]: exact-length-k reachability, zero diagonal
    std::vector<CsrPattern> rev;    // transposes of along
    CsrPattern loop;                // identity

    const CsrPattern& relation(Branch b, std::size_t k) const;
};

MultiOrderAdjacency build_multi_order(std::span<const Edge> edges, std::size_t n, std::size_t max_order);

// ---------------------------------------------------------------------------------------------

// Seeded uniform permutation of 0..n-1.
std::vector<std::size_t> feature_permutation(std::size_t n, std::uint64_t seed);

// Row i of the result is row perm[i] of `features`.
Dense permute_rows(const Dense& features, std::span<const std::size_t> perm);

// Same graph with feature rows shuffled; topology, labels and masks are untouched.
GraphDataset corrupt_features(const GraphDataset& g, std::uint64_t seed,
                              std::vector<std::size_t>* permutation = nullptr);

// Complete tree with `branching` children per node and levels 0..depth, edges parent -> child.
// A node's class is the index of its depth-1 ancestor modulo `classes` (the root is class 0).
// Features are a per-class mean plus Gaussian noise, both with per-coordinate variance 1/d.
struct HierarchySpec {
    std::size_t depth = 4;
    std::size_t branching = 3;
    std::size_t classes = 3;
    double noise = 1.0;
    std::size_t feature_dim = 16;
    std::uint64_t seed = 0;
};

GraphDataset generate_hierarchy(const HierarchySpec& spec);

}  // namespace hygraph::graph
