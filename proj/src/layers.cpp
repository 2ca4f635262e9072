#include "hygraph/layers.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "hygraph/errors.hpp"

namespace hygraph::layers {

namespace {

constexpr const char* kBranchNames[kBranches] = {"along", "rev", "loop"};

Relation make_relation(const CsrPattern& aggregation, const curvature::EdgeCurvature& kappa) {
    return Relation{aggregation, kappa.values_for(aggregation)};
}

Dense glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    Dense m(fan_in, fan_out);
    for (double& v : m.values()) v = u(rng);
    return m;
}

std::string prefix(std::size_t l, std::size_t k, std::size_t b) {
    return "l" + std::to_string(l) + ".k" + std::to_string(k) + "." + kBranchNames[b] + ".";
}

}  // namespace

const Relation& GraphContext::relation(graph::Branch b, std::size_t k) const {
    if (k < 1 || k > max_order)
        throw ContractError("relation order " + std::to_string(k) + " outside 1.." + std::to_string(max_order));
    if (b == graph::Branch::loop) throw ContractError("the loop branch has no relation data");
    return b == graph::Branch::along ? along[k - 1] : rev[k - 1];
}

GraphContext build_context(std::span<const graph::Edge> edges, std::size_t n, std::size_t max_order,
                           double idleness) {
    const auto adj = graph::build_multi_order(edges, n, max_order);
    GraphContext ctx;
    ctx.n = n;
    ctx.max_order = max_order;
    ctx.loop = adj.loop;
    for (std::size_t k = 1; k <= max_order; ++k) {
        const auto kappa = curvature::ollivier_ricci(adj.along[k - 1], idleness);
        // along[k](j, i) means a length-k path j -> i, so node i's senders on the along branch
        // are the column entries of along[k], i.e. row i of rev[k].
        ctx.along.push_back(make_relation(adj.rev[k - 1], kappa));
        ctx.rev.push_back(make_relation(adj.along[k - 1], kappa));
    }
    return ctx;
}

GraphContext build_context(const graph::GraphDataset& g, std::size_t max_order, double idleness) {
    return build_context(g.edges, g.n, max_order, idleness);
}

// ---------------------------------------------------------------------------------------------

std::vector<Parameter*> EncoderParams::parameters() {
    std::vector<Parameter*> out;
    for (auto& layer : layers) {
        for (auto& order : layer.orders) {
            for (std::size_t b = 0; b < kBranches; ++b) {
                out.push_back(&order[b].w);
                out.push_back(&order[b].eps);
                if (b != static_cast<std::size_t>(graph::Branch::loop))
                    for (auto* p : order[b].mlp.parameters()) out.push_back(p);
            }
        }
        out.push_back(&layer.att_w);
        out.push_back(&layer.att_v);
        out.push_back(&layer.bias);
    }
    return out;
}

geometry::Geometry EncoderParams::geometry() const {
    return geometry::Geometry(config.space, manifold::Curvature(config.curvature));
}

EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed) {
    if (config.in_dim == 0 || config.hidden == 0 || config.layers == 0 || config.orders == 0 ||
        config.att_dim == 0)
        throw ContractError("encoder dimensions, layer count and order count must be positive");
    EncoderParams p;
    p.config = config;
    std::mt19937_64 rng(seed);
    const std::size_t h = curvature::CurvatureMlp::kHidden;
    for (std::size_t l = 0; l < config.layers; ++l) {
        const std::size_t d_in = l == 0 ? config.in_dim : config.hidden;
        LayerParams layer;
        for (std::size_t k = 1; k <= config.orders; ++k) {
            std::array<BranchParams, kBranches> order;
            for (std::size_t b = 0; b < kBranches; ++b) {
                const auto name = prefix(l, k, b);
                order[b].w = Parameter(name + "w", glorot(d_in, config.hidden, rng));
                order[b].eps = Parameter(name + "eps", Dense(1, config.hidden));
                if (b != static_cast<std::size_t>(graph::Branch::loop)) {
                    order[b].mlp.w1 = Parameter(name + "mlp.w1", glorot(1, h, rng));
                    order[b].mlp.b1 = Parameter(name + "mlp.b1", Dense(1, h));
                    order[b].mlp.w2 = Parameter(name + "mlp.w2", glorot(h, 1, rng));
                }
            }
            layer.orders.push_back(std::move(order));
        }
        const auto name = "l" + std::to_string(l) + ".";
        layer.att_w = Parameter(name + "att.w", glorot(config.hidden, config.att_dim, rng));
        layer.att_v = Parameter(name + "att.v", glorot(config.att_dim, 1, rng));
        layer.bias = Parameter(name + "bias", Dense(1, config.hidden));
        p.layers.push_back(std::move(layer));
    }
    return p;
}

// ---------------------------------------------------------------------------------------------

ad::Var branch_conv(const ad::Var& x, const CsrPattern& pattern, const ad::Var& alpha, const Parameter& w,
                    const Parameter& eps) {
    if (x.cols() != w.value().rows() || eps.value().rows() != 1 || eps.value().cols() != w.value().cols())
        throw ContractError("branch_conv: features " + x.value().shape_string() + ", weights " +
                            w.value().shape_string() + ", bias " + eps.value().shape_string());
    if (pattern.n_rows != x.rows() || pattern.n_cols != x.rows())
        throw ContractError("branch_conv: relation does not match the node count");
    // Every row's weights sum to one (or the row is empty), so the bias can be added after the
    // aggregation; empty rows then give ReLU(eps).
    const auto z = ad::matmul(x, w.var);
    return ad::relu(ad::add_row(ad::spmm(alpha, pattern, z), eps.var));
}

ad::Var multi_order_fuse(const ad::Var& along, const ad::Var& rev, const ad::Var& loop) {
    if (!along.value().same_shape(rev.value()) || !along.value().same_shape(loop.value()))
        throw ContractError("multi_order_fuse: branch shapes differ");
    return ad::add(ad::add(along, rev), loop);
}

OrderAttention order_attention(std::span<const ad::Var> per_order, const ad::Var& att_w, const ad::Var& att_v) {
    if (per_order.empty()) throw ContractError("order_attention needs at least one order");
    std::vector<ad::Var> scores;
    for (const auto& h : per_order) scores.push_back(ad::matmul(ad::tanh(ad::matmul(h, att_w)), att_v));
    const auto weights = ad::softmax_rows(ad::concat_cols(scores));
    ad::Var out = ad::mul_col(per_order[0], ad::slice_cols(weights, 0, 1));
    for (std::size_t k = 1; k < per_order.size(); ++k)
        out = ad::add(out, ad::mul_col(per_order[k], ad::slice_cols(weights, k, 1)));
    return {out, weights};
}

EncoderOutput encoder_forward(const GraphContext& ctx, const Dense& features, const EncoderParams& params,
                              const ForwardOptions& options) {
    const auto& cfg = params.config;
    if (features.rows() != ctx.n || features.cols() != cfg.in_dim)
        throw ContractError("encoder_forward: features " + features.shape_string() + " for " +
                            std::to_string(ctx.n) + " nodes and input dimension " + std::to_string(cfg.in_dim));
    if (cfg.orders > ctx.max_order)
        throw ContractError("encoder_forward: context holds " + std::to_string(ctx.max_order) +
                            " orders, encoder needs " + std::to_string(cfg.orders));
    if (options.dropout > 0.0 && !options.rng) throw ContractError("dropout requires a random generator");

    const auto geo = params.geometry();
    EncoderOutput out;
    ad::Var points = geo.exp0(ad::constant(features));
    ad::Var x = geo.log0(points);

    for (const auto& layer : params.layers) {
        if (options.dropout > 0.0) {
            std::bernoulli_distribution keep(1.0 - options.dropout);
            Dense mask(x.rows(), x.cols());
            const double scale = 1.0 / (1.0 - options.dropout);
            for (double& v : mask.values()) v = keep(*options.rng) ? scale : 0.0;
            x = ad::mul_const(x, mask);
        }
        LayerDiagnostics diag;
        std::vector<ad::Var> per_order;
        for (std::size_t k = 1; k <= cfg.orders; ++k) {
            const auto& bp = layer.orders[k - 1];
            std::array<ad::Var, kBranches> branch;
            for (std::size_t b = 0; b < 2; ++b) {
                const auto& rel = ctx.relation(static_cast<graph::Branch>(b), k);
                const auto alpha = curvature::neighbor_attention(bp[b].mlp, rel.kappa, rel.pattern);
                branch[b] = branch_conv(x, rel.pattern, alpha, bp[b].w, bp[b].eps);
                if (options.keep_diagnostics) {
                    diag.neighbor.push_back(alpha.value());
                    diag.patterns.push_back(&rel.pattern);
                }
            }
            const auto& lp = bp[static_cast<std::size_t>(graph::Branch::loop)];
            branch[2] = ad::relu(ad::add_row(ad::matmul(x, lp.w.var), lp.eps.var));
            per_order.push_back(multi_order_fuse(branch[0], branch[1], branch[2]));
        }
        const auto attended = order_attention(per_order, layer.att_w.var, layer.att_v.var);
        if (options.keep_diagnostics) {
            diag.order_weights = attended.weights.value();
            out.diagnostics.push_back(std::move(diag));
        }
        points = geo.bias_add(geo.exp0(attended.output), layer.bias.var);
        x = geo.log0(points);
    }
    out.points = points;
    out.tangent = x;
    return out;
}

// ---------------------------------------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& path, std::span<Parameter* const> params,
                     const nlohmann::json& meta) {
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto* p : params) {
        tensors.push_back({{"name", p->name},
                           {"rows", p->value().rows()},
                           {"cols", p->value().cols()},
                           {"data", p->value().storage()}});
    }
    const nlohmann::json doc{
        {"format", "hygraph-checkpoint"}, {"version", kCheckpointVersion}, {"meta", meta}, {"tensors", tensors}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    // Full round-trip precision for doubles.
    out << doc.dump() << '\n';
    if (!out) throw Error("failed writing checkpoint " + path.string());
}

nlohmann::json load_checkpoint(const std::filesystem::path& path, std::span<Parameter* const> params) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read checkpoint " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("checkpoint: ") + e.what(), 0);
    }
    if (!doc.is_object() || doc.value("format", "") != "hygraph-checkpoint")
        throw SchemaError("checkpoint " + path.string() + ": not a hygraph checkpoint");
    if (!doc.contains("version") || doc["version"] != kCheckpointVersion)
        throw SchemaError("checkpoint " + path.string() + ": unsupported version " +
                          (doc.contains("version") ? doc["version"].dump() : std::string("(missing)")));
    if (!doc.contains("tensors") || !doc["tensors"].is_array())
        throw SchemaError("checkpoint " + path.string() + ": missing tensors");

    std::map<std::string, Parameter*> by_name;
    for (auto* p : params) by_name[p->name] = p;
    std::set<std::string> seen;
    for (const auto& t : doc["tensors"]) {
        if (!t.is_object() || !t.contains("name") || !t.contains("rows") || !t.contains("cols") ||
            !t.contains("data"))
            throw SchemaError("checkpoint: malformed tensor entry");
        const auto name = t["name"].get<std::string>();
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw SchemaError("checkpoint: unexpected tensor " + name);
        if (!seen.insert(name).second) throw SchemaError("checkpoint: duplicate tensor " + name);
        const auto rows = t["rows"].get<std::size_t>(), cols = t["cols"].get<std::size_t>();
        auto& target = it->second->mutable_value();
        if (rows != target.rows() || cols != target.cols())
            throw SchemaError("checkpoint: tensor " + name + " is " + std::to_string(rows) + "x" +
                              std::to_string(cols) + ", model expects " + target.shape_string());
        const auto data = t["data"].get<std::vector<double>>();
        if (data.size() != rows * cols) throw SchemaError("checkpoint: tensor " + name + " has wrong data length");
        std::copy(data.begin(), data.end(), target.values().begin());
    }
    for (const auto& [name, p] : by_name)
        if (!seen.count(name)) throw SchemaError("checkpoint: missing tensor " + name);
    return doc.value("meta", nlohmann::json::object());
}

}  // namespace hygraph::layers
