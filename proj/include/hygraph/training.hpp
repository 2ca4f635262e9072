#pragma once

// Supervised and contrastive training of the encoder, and evaluation of the result.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "hygraph/graph.hpp"
#include "hygraph/layers.hpp"
#include "hygraph/metrics.hpp"
#include "hygraph/optim.hpp"

namespace hygraph::training {

enum class Task { supervised, unsupervised };
enum class EvalMode { probe, clustering };

Task parse_task(std::string_view s);
EvalMode parse_eval_mode(std::string_view s);
std::string to_string(Task t);
std::string to_string(EvalMode m);

struct TrainConfig {
    Task task = Task::supervised;
    std::size_t epochs = 200;
    double lr = 0.1;
    std::uint64_t seed = 0;
    geometry::Space space = geometry::Space::poincare;
    double curvature = -1.0;
    std::size_t orders = 2;
    std::size_t layers = 2;
    std::size_t hidden = 512;
    std::size_t att_dim = 64;
    double dropout = 0.0;
    std::size_t patience = 20;  // 0 disables early stopping
    double idleness = 0.5;
    EvalMode eval = EvalMode::probe;
    bool wallclock = false;  // record real seconds in the history instead of 0

    static TrainConfig supervised_defaults();
    static TrainConfig unsupervised_defaults();

    // Throws ContractError naming the first invalid field.
    void validate() const;
    layers::EncoderConfig encoder_config(std::size_t in_dim) const;
};

struct SupervisedHead {
    Parameter w;  // d x classes
    Parameter b;  // 1 x classes
};

struct ContrastiveHead {
    Parameter w;  // d x d scoring matrix
};

struct Model {
    layers::EncoderParams encoder;
    SupervisedHead supervised;
    ContrastiveHead contrastive;

    // Encoder parameters plus the head used by `task`.
    std::vector<Parameter*> parameters(Task task);
};

Model init_model(const TrainConfig& config, std::size_t in_dim, std::size_t classes);

// ---------------------------------------------------------------------------------------------

// Logits X W + b of the tangent embeddings.
ad::Var supervised_logits(const layers::GraphContext& ctx, const Dense& features, const Model& model);
// Mean cross-entropy over the training rows.
ad::Var supervised_loss(const layers::GraphContext& ctx, const graph::GraphDataset& g, const Model& model);

// Discriminator loss from tangent embeddings of the real (x) and corrupted (xc) views with the
// d x d scoring matrix w.
ad::Var contrastive_objective(const ad::Var& x, const ad::Var& xc, const ad::Var& w);

// Binary cross-entropy of the bilinear discriminator: real rows against the summary are
// positives, corrupted rows are negatives, averaged over both sets.
ad::Var contrastive_loss(const layers::GraphContext& ctx, const Dense& features, const Dense& corrupted,
                         const Model& model, const layers::ForwardOptions& options = {});

// One optimisation step each; return the loss before the update. Non-finite losses or
// gradients throw NonFiniteError with parameter norms and the largest logit magnitude.
double supervised_step(const layers::GraphContext& ctx, const graph::GraphDataset& g, Model& model, Adam& adam);
double contrastive_step(const layers::GraphContext& ctx, const graph::GraphDataset& g, const Dense& corrupted,
                        Model& model, Adam& adam, std::mt19937_64& rng, double dropout);

// ---------------------------------------------------------------------------------------------

struct HistoryRecord {
    std::size_t epoch = 0;
    double loss = 0.0;
    double val_metric = 0.0;
    double seconds = 0.0;

    nlohmann::json to_json() const;
};

struct FitResult {
    Model model;
    std::vector<HistoryRecord> history;
    bool diverged = false;
    std::string failure;
    std::size_t best_epoch = 0;
};

// Runs up to config.epochs epochs with early stopping on the validation metric (micro-F1 for
// supervised, held-out contrastive loss for unsupervised) and returns the best parameters.
FitResult fit(const graph::GraphDataset& g, const layers::GraphContext& ctx, const TrainConfig& config);

// Tangent embeddings without dropout.
Dense embed(const layers::GraphContext& ctx, const Dense& features, const Model& model);
std::vector<int> predict(const layers::GraphContext& ctx, const Dense& features, const Model& model);

// Adds a seeded 70/20/10 stratified split when the dataset carries labels but no masks.
graph::GraphDataset with_default_masks(graph::GraphDataset g, std::uint64_t seed);

// ---------------------------------------------------------------------------------------------

struct ProbeConfig {
    std::size_t epochs = 300;
    double lr = 0.01;
    std::uint64_t seed = 0;
};

// Softmax regression on frozen embeddings (columns standardised with training statistics),
// trained on the train mask. Returns a prediction for every node.
std::vector<int> linear_probe(const Dense& embeddings, std::span<const int> labels, const graph::Masks& masks,
                              std::size_t classes, const ProbeConfig& config = {});

struct KMeansConfig {
    std::size_t restarts = 10;
    std::size_t max_iter = 300;
    std::uint64_t seed = 0;
};

// Lloyd iterations from k-means++ seeding; the restart with the lowest inertia wins.
std::vector<int> kmeans(const Dense& points, std::size_t k, const KMeansConfig& config = {});

std::vector<int> select(std::span<const int> values, std::span<const std::size_t> rows);

// Final report on the test nodes (supervised, probe) or all labelled nodes (clustering).
metrics::Report evaluate(const graph::GraphDataset& g, const layers::GraphContext& ctx, const Model& model,
                         const TrainConfig& config);

}  // namespace hygraph::training
