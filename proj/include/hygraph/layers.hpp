#pragma once

// Multi-order curvature-attention graph convolution encoder.
//
// Features are lifted onto the manifold and read back in the tangent space at the origin.
// Each layer then, for every order k, runs three branches (messages along directed paths of
// length k, against them, and a self loop), sums the branches, mixes the K order outputs with
// a per-node softmax attention, maps the result onto the manifold, applies the layer bias by
// parallel transport and returns to the tangent space for the next layer.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "hygraph/autodiff.hpp"
#include "hygraph/curvature.hpp"
#include "hygraph/geometry.hpp"
#include "hygraph/graph.hpp"
#include "hygraph/optim.hpp"

namespace hygraph::layers {

inline constexpr std::size_t kBranches = 3;  // along, rev, loop

// Aggregation structure for one relation: row i lists the nodes i receives messages from.
struct Relation {
    CsrPattern pattern;
    Dense kappa;  // nnz x 1, curvature of each entry's edge in the order-k relation graph
};

// Topology-only inputs to the encoder, computed once per graph and reusable for any K up to
// max_order.
struct GraphContext {
    std::size_t n = 0;
    std::size_t max_order = 0;
    std::vector<Relation> along;  // along[k-1]: i hears from j when a length-k path j -> i exists
    std::vector<Relation> rev;    // rev[k-1]:   i hears from j when a length-k path i -> j exists
    CsrPattern loop;

    const Relation& relation(graph::Branch b, std::size_t k) const;
};

GraphContext build_context(const graph::GraphDataset& g, std::size_t max_order, double idleness = 0.5);
GraphContext build_context(std::span<const graph::Edge> edges, std::size_t n, std::size_t max_order,
                           double idleness = 0.5);

struct EncoderConfig {
    std::size_t in_dim = 0;
    std::size_t hidden = 512;
    std::size_t layers = 1;
    std::size_t orders = 4;
    std::size_t att_dim = 64;
    geometry::Space space = geometry::Space::poincare;
    double curvature = -1.0;
};

struct BranchParams {
    Parameter w;    // d_in x d_out
    Parameter eps;  // 1 x d_out
    curvature::CurvatureMlp mlp;  // unused by the loop branch
};

struct LayerParams {
    std::vector<std::array<BranchParams, kBranches>> orders;  // orders[k-1][branch]
    Parameter att_w;  // d_out x d_att
    Parameter att_v;  // d_att x 1
    Parameter bias;   // 1 x d_out, tangent vector at the origin
};

struct EncoderParams {
    EncoderConfig config;
    std::vector<LayerParams> layers;

    std::vector<Parameter*> parameters();
    geometry::Geometry geometry() const;
};

// Glorot-uniform weights, zero biases; fully determined by `seed`.
EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------------------------

// ReLU(sum_j alpha_ij (x_j W) + eps) over the entries of row i; alpha is nnz x 1.
ad::Var branch_conv(const ad::Var& x, const CsrPattern& pattern, const ad::Var& alpha, const Parameter& w,
                    const Parameter& eps);

ad::Var multi_order_fuse(const ad::Var& along, const ad::Var& rev, const ad::Var& loop);

struct OrderAttention {
    ad::Var output;   // n x d
    ad::Var weights;  // n x K, rows sum to one
};
OrderAttention order_attention(std::span<const ad::Var> per_order, const ad::Var& att_w, const ad::Var& att_v);

struct ForwardOptions {
    double dropout = 0.0;          // applied to tangent features entering each layer
    std::mt19937_64* rng = nullptr;  // required when dropout > 0
    bool keep_diagnostics = false;
};

struct LayerDiagnostics {
    Dense order_weights;          // n x K
    std::vector<Dense> neighbor;  // nnz x 1 attention column per (k, branch) for along and rev
    std::vector<const CsrPattern*> patterns;
};

struct EncoderOutput {
    ad::Var points;   // final manifold points H
    ad::Var tangent;  // X = log_o(H)
    std::vector<LayerDiagnostics> diagnostics;
};

EncoderOutput encoder_forward(const GraphContext& ctx, const Dense& features, const EncoderParams& params,
                              const ForwardOptions& options = {});

// ---------------------------------------------------------------------------------------------

// JSON tensor dump: {"format", "version", "meta", "tensors": [{"name", "rows", "cols", "data"}]}.
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, std::span<Parameter* const> params,
                     const nlohmann::json& meta = nlohmann::json::object());
// Fills `params` by name. Missing names, extra tensors and shape mismatches throw SchemaError;
// a wrong format or version also throws SchemaError. Returns the stored meta object.
nlohmann::json load_checkpoint(const std::filesystem::path& path, std::span<Parameter* const> params);

}  // namespace hygraph::layers
