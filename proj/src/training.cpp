#include "hygraph/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "hygraph/errors.hpp"

namespace hygraph::training {

namespace {

Dense glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    Dense m(fan_in, fan_out);
    for (double& v : m.values()) v = u(rng);
    return m;
}

// Frobenius norm of each layer's parameters, for divergence reports.
std::string parameter_summary(Model& model, Task task) {
    std::ostringstream out;
    out << "parameter norms:";
    for (auto* p : model.parameters(task)) {
        double s = 0.0;
        for (double v : p->value().values()) s += v * v;
        out << ' ' << p->name << '=' << std::sqrt(s);
    }
    return out.str();
}

void check_finite(double loss, const Dense& logits, Model& model, Task task) {
    if (std::isfinite(loss)) return;
    std::ostringstream msg;
    msg << "non-finite loss " << loss << "; max |logit| " << logits.max_abs() << "; "
        << parameter_summary(model, task);
    throw NonFiniteError(msg.str());
}

int argmax_row(const Dense& m, std::size_t r) {
    const auto row = m.row(r);
    return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::vector<Dense> snapshot(const std::vector<Parameter*>& params) {
    std::vector<Dense> out;
    for (auto* p : params) out.push_back(p->value());
    return out;
}

void restore(const std::vector<Parameter*>& params, const std::vector<Dense>& values) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->mutable_value() = values[i];
}

double micro_f1_on(const std::vector<int>& pred, const graph::GraphDataset& g, std::span<const std::size_t> rows) {
    return metrics::f1_scores(select(g.labels, rows), select(pred, rows)).micro;
}

}  // namespace

Task parse_task(std::string_view s) {
    if (s == "supervised") return Task::supervised;
    if (s == "unsupervised") return Task::unsupervised;
    throw ContractError("unknown task '" + std::string(s) + "' (expected supervised or unsupervised)");
}

EvalMode parse_eval_mode(std::string_view s) {
    if (s == "probe") return EvalMode::probe;
    if (s == "clustering") return EvalMode::clustering;
    throw ContractError("unknown eval mode '" + std::string(s) + "' (expected probe or clustering)");
}

std::string to_string(Task t) { return t == Task::supervised ? "supervised" : "unsupervised"; }
std::string to_string(EvalMode m) { return m == EvalMode::probe ? "probe" : "clustering"; }

TrainConfig TrainConfig::supervised_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::unsupervised_defaults() {
    TrainConfig c;
    c.task = Task::unsupervised;
    c.orders = 4;
    c.layers = 1;
    c.dropout = 0.1;
    return c;
}

void TrainConfig::validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ContractError("lr must be positive");
    if (!(curvature < 0.0) || !std::isfinite(curvature)) throw ContractError("curvature must be negative");
    if (orders < 1 || orders > 6) throw ContractError("k must lie in 1..6");
    if (layers < 1 || layers > 4) throw ContractError("layers must lie in 1..4");
    if (hidden < 1) throw ContractError("dim must be positive");
    if (att_dim < 1) throw ContractError("attention dimension must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ContractError("dropout must lie in [0, 1)");
    if (!(idleness >= 0.0 && idleness < 1.0)) throw ContractError("idleness must lie in [0, 1)");
}

layers::EncoderConfig TrainConfig::encoder_config(std::size_t in_dim) const {
    layers::EncoderConfig e;
    e.in_dim = in_dim;
    e.hidden = hidden;
    e.layers = layers;
    e.orders = orders;
    e.att_dim = att_dim;
    e.space = space;
    e.curvature = curvature;
    return e;
}

std::vector<Parameter*> Model::parameters(Task task) {
    auto out = encoder.parameters();
    if (task == Task::supervised) {
        out.push_back(&supervised.w);
        out.push_back(&supervised.b);
    } else {
        out.push_back(&contrastive.w);
    }
    return out;
}

Model init_model(const TrainConfig& config, std::size_t in_dim, std::size_t classes) {
    config.validate();
    Model m;
    m.encoder = layers::init_encoder(config.encoder_config(in_dim), config.seed);
    std::mt19937_64 rng(config.seed ^ 0x5bd1e9955bd1e995ULL);
    const std::size_t d = config.hidden, c = std::max<std::size_t>(classes, 1);
    m.supervised.w = Parameter("head.w", glorot(d, c, rng));
    m.supervised.b = Parameter("head.b", Dense(1, c));
    m.contrastive.w = Parameter("disc.w", glorot(d, d, rng));
    return m;
}

// ---------------------------------------------------------------------------------------------

ad::Var supervised_logits(const layers::GraphContext& ctx, const Dense& features, const Model& model) {
    const auto x = layers::encoder_forward(ctx, features, model.encoder).tangent;
    return ad::add_row(ad::matmul(x, model.supervised.w.var), model.supervised.b.var);
}

ad::Var supervised_loss(const layers::GraphContext& ctx, const graph::GraphDataset& g, const Model& model) {
    if (!g.has_labels() || g.masks.train.empty()) throw ContractError("supervised training needs labels and a train mask");
    return ad::cross_entropy(supervised_logits(ctx, g.features, model), g.labels, g.masks.train);
}

ad::Var contrastive_objective(const ad::Var& x, const ad::Var& xc, const ad::Var& w) {
    const auto summary = ad::sigmoid(ad::mean_rows(x));              // 1 x d
    const auto probe = ad::matmul(w, ad::transpose(summary));  // d x 1
    const std::vector<ad::Var> scores{ad::matmul(x, probe), ad::matmul(xc, probe)};
    Dense targets(x.rows() + xc.rows(), 1, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) targets(i, 0) = 1.0;
    return ad::bce_with_logits(ad::concat_rows(scores), targets);
}

ad::Var contrastive_loss(const layers::GraphContext& ctx, const Dense& features, const Dense& corrupted,
                         const Model& model, const layers::ForwardOptions& options) {
    const auto x = layers::encoder_forward(ctx, features, model.encoder, options).tangent;
    const auto xc = layers::encoder_forward(ctx, corrupted, model.encoder, options).tangent;
    return contrastive_objective(x, xc, model.contrastive.w.var);
}

double supervised_step(const layers::GraphContext& ctx, const graph::GraphDataset& g, Model& model, Adam& adam) {
    if (!g.has_labels() || g.masks.train.empty()) throw ContractError("supervised training needs labels and a train mask");
    auto params = model.parameters(Task::supervised);
    zero_grad(params);
    const auto logits = supervised_logits(ctx, g.features, model);
    const auto loss = ad::cross_entropy(logits, g.labels, g.masks.train);
    check_finite(loss.item(), logits.value(), model, Task::supervised);
    ad::backward(loss);
    adam.step(params);
    return loss.item();
}

double contrastive_step(const layers::GraphContext& ctx, const graph::GraphDataset& g, const Dense& corrupted,
                        Model& model, Adam& adam, std::mt19937_64& rng, double dropout) {
    auto params = model.parameters(Task::unsupervised);
    zero_grad(params);
    layers::ForwardOptions opt;
    opt.dropout = dropout;
    opt.rng = &rng;
    const auto loss = contrastive_loss(ctx, g.features, corrupted, model, opt);
    check_finite(loss.item(), Dense(1, 1), model, Task::unsupervised);
    ad::backward(loss);
    adam.step(params);
    return loss.item();
}

// ---------------------------------------------------------------------------------------------

nlohmann::json HistoryRecord::to_json() const {
    return {{"epoch", epoch}, {"loss", loss}, {"val_metric", val_metric}, {"seconds", seconds}};
}

Dense embed(const layers::GraphContext& ctx, const Dense& features, const Model& model) {
    return layers::encoder_forward(ctx, features, model.encoder).tangent.value();
}

std::vector<int> predict(const layers::GraphContext& ctx, const Dense& features, const Model& model) {
    const auto logits = supervised_logits(ctx, features, model).value();
    std::vector<int> out(logits.rows());
    for (std::size_t r = 0; r < logits.rows(); ++r) out[r] = argmax_row(logits, r);
    return out;
}

graph::GraphDataset with_default_masks(graph::GraphDataset g, std::uint64_t seed) {
    if (g.has_labels() && g.masks.empty()) g.masks = graph::stratified_split(g.labels, g.classes, 0.7, 0.2, seed);
    return g;
}

FitResult fit(const graph::GraphDataset& g, const layers::GraphContext& ctx, const TrainConfig& config) {
    config.validate();
    if (ctx.n != g.n) throw ContractError("fit: graph context does not match the dataset");
    const bool supervised = config.task == Task::supervised;
    if (supervised && (!g.has_labels() || g.masks.train.empty()))
        throw ContractError("supervised training needs labels and a train mask");

    FitResult result;
    result.model = init_model(config, g.feature_dim(), g.classes);
    Model& model = result.model;
    auto params = model.parameters(config.task);
    Adam adam(AdamConfig{config.lr});
    std::mt19937_64 rng(config.seed ^ 0x2545f4914f6cdd1dULL);

    // Validation signal: micro-F1 on the val mask (train mask when val is empty), or the
    // contrastive loss on one fixed corruption without dropout.
    const auto& val_rows = g.masks.val.empty() ? g.masks.train : g.masks.val;
    const Dense val_corrupted =
        supervised ? Dense() : graph::permute_rows(g.features, graph::feature_permutation(g.n, config.seed + 1));
    auto validation = [&]() -> double {
        if (supervised) return micro_f1_on(predict(ctx, g.features, model), g, val_rows);
        return contrastive_loss(ctx, g.features, val_corrupted, model).item();
    };
    auto better = [&](double a, double b) { return supervised ? a > b : a < b; };

    double best = supervised ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    auto best_values = snapshot(params);
    std::size_t since_best = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        HistoryRecord rec;
        rec.epoch = epoch;
        try {
            if (supervised) {
                rec.loss = supervised_step(ctx, g, model, adam);
            } else {
                const auto corrupted = graph::permute_rows(g.features, graph::feature_permutation(g.n, rng()));
                rec.loss = contrastive_step(ctx, g, corrupted, model, adam, rng, config.dropout);
            }
            rec.val_metric = validation();
            if (!std::isfinite(rec.val_metric)) throw NonFiniteError("non-finite validation metric");
        } catch (const NonFiniteError& e) {
            result.diverged = true;
            result.failure = "epoch " + std::to_string(epoch) + ": " + e.what();
            break;
        }
        if (config.wallclock)
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.history.push_back(rec);
        if (better(rec.val_metric, best)) {
            best = rec.val_metric;
            best_values = snapshot(params);
            result.best_epoch = epoch;
            since_best = 0;
        } else if (config.patience > 0 && ++since_best >= config.patience) {
            break;
        }
    }
    if (result.best_epoch > 0) restore(params, best_values);
    return result;
}

// ---------------------------------------------------------------------------------------------

std::vector<int> select(std::span<const int> values, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(values[r]);
    return out;
}

std::vector<int> linear_probe(const Dense& embeddings, std::span<const int> labels, const graph::Masks& masks,
                              std::size_t classes, const ProbeConfig& config) {
    if (labels.size() != embeddings.rows()) throw ContractError("linear_probe: one label per embedding row required");
    if (masks.train.empty()) throw ContractError("linear_probe: empty train mask");
    {
        const int first = labels[masks.train[0]];
        bool single = true;
        for (auto r : masks.train) single &= labels[r] == first;
        if (single) throw ContractError("linear_probe: the train mask holds a single class");
    }
    const std::size_t n = embeddings.rows(), d = embeddings.cols();
    // standardise with train statistics
    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (auto r : masks.train)
        for (std::size_t c = 0; c < d; ++c) mean[c] += embeddings(r, c);
    for (double& m : mean) m /= static_cast<double>(masks.train.size());
    for (auto r : masks.train)
        for (std::size_t c = 0; c < d; ++c) sd[c] += (embeddings(r, c) - mean[c]) * (embeddings(r, c) - mean[c]);
    for (double& s : sd) {
        s = std::sqrt(s / static_cast<double>(masks.train.size()));
        if (s < 1e-12) s = 1.0;
    }
    Dense x(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) x(r, c) = (embeddings(r, c) - mean[c]) / sd[c];

    std::mt19937_64 rng(config.seed);
    Parameter w("probe.w", glorot(d, classes, rng)), b("probe.b", Dense(1, classes));
    std::vector<Parameter*> params{&w, &b};
    Adam adam(AdamConfig{config.lr});
    const auto input = ad::constant(x);
    for (std::size_t e = 0; e < config.epochs; ++e) {
        zero_grad(params);
        const auto loss = ad::cross_entropy(ad::add_row(ad::matmul(input, w.var), b.var), labels, masks.train);
        ad::backward(loss);
        adam.step(params);
    }
    const Dense logits = ad::add_row(ad::matmul(input, w.var), b.var).value();
    std::vector<int> out(n);
    for (std::size_t r = 0; r < n; ++r) out[r] = argmax_row(logits, r);
    return out;
}

std::vector<int> kmeans(const Dense& points, std::size_t k, const KMeansConfig& config) {
    const std::size_t n = points.rows(), d = points.cols();
    if (k == 0 || k > n) throw ContractError("kmeans: need 1 <= k <= number of points");
    auto dist2 = [&](std::size_t r, const Dense& centers, std::size_t c) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double t = points(r, j) - centers(c, j);
            s += t * t;
        }
        return s;
    };
    std::mt19937_64 rng(config.seed);
    std::vector<int> best_assign;
    double best_inertia = std::numeric_limits<double>::infinity();
    for (std::size_t run = 0; run < std::max<std::size_t>(config.restarts, 1); ++run) {
        Dense centers(k, d);
        std::vector<double> closest(n, std::numeric_limits<double>::infinity());
        std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        for (std::size_t c = 0; c < k; ++c) {
            std::copy(points.row(pick).begin(), points.row(pick).end(), centers.row(c).begin());
            double total = 0.0;
            for (std::size_t r = 0; r < n; ++r) total += closest[r] = std::min(closest[r], dist2(r, centers, c));
            if (c + 1 == k) break;
            if (total <= 0.0) {
                pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
                continue;
            }
            double target = std::uniform_real_distribution<double>(0.0, total)(rng);
            pick = n - 1;
            for (std::size_t r = 0; r < n; ++r) {
                target -= closest[r];
                if (target <= 0.0) {
                    pick = r;
                    break;
                }
            }
        }
        std::vector<int> assign(n, -1);
        double inertia = 0.0;
        for (std::size_t it = 0; it < config.max_iter; ++it) {
            bool changed = false;
            inertia = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                std::size_t best_c = 0;
                double best_d = dist2(r, centers, 0);
                for (std::size_t c = 1; c < k; ++c) {
                    const double dd = dist2(r, centers, c);
                    if (dd < best_d) {
                        best_d = dd;
                        best_c = c;
                    }
                }
                inertia += best_d;
                if (assign[r] != static_cast<int>(best_c)) {
                    assign[r] = static_cast<int>(best_c);
                    changed = true;
                }
            }
            if (!changed) break;
            Dense sums(k, d);
            std::vector<std::size_t> count(k, 0);
            for (std::size_t r = 0; r < n; ++r) {
                ++count[assign[r]];
                for (std::size_t j = 0; j < d; ++j) sums(assign[r], j) += points(r, j);
            }
            for (std::size_t c = 0; c < k; ++c) {
                if (count[c] == 0) continue;  // an empty cluster keeps its centre
                for (std::size_t j = 0; j < d; ++j) centers(c, j) = sums(c, j) / static_cast<double>(count[c]);
            }
        }
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_assign = assign;
        }
    }
    return best_assign;
}

metrics::Report evaluate(const graph::GraphDataset& g, const layers::GraphContext& ctx, const Model& model,
                         const TrainConfig& config) {
    if (!g.has_labels()) throw ContractError("evaluation needs labels");
    if (config.task == Task::supervised) {
        const auto pred = predict(ctx, g.features, model);
        return metrics::classification_report(select(g.labels, g.masks.test), select(pred, g.masks.test));
    }
    const Dense x = embed(ctx, g.features, model);
    if (config.eval == EvalMode::clustering) {
        KMeansConfig kc;
        kc.seed = config.seed;
        return metrics::clustering_report(g.labels, kmeans(x, g.classes, kc));
    }
    ProbeConfig pc;
    pc.seed = config.seed;
    const auto pred = linear_probe(x, g.labels, g.masks, g.classes, pc);
    return metrics::classification_report(select(g.labels, g.masks.test), select(pred, g.masks.test));
}

}  // namespace hygraph::training
