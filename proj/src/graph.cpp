#include "hygraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>

#include "hygraph/errors.hpp"
#include "json.hpp"

namespace hygraph::graph {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::ifstream open_or_throw(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("cannot open " + p.string());
    return in;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

void check_disjoint(const Masks& m, std::size_t n) {
    std::vector<int> owner(n, -1);
    const std::vector<std::size_t>* sets[] = {&m.train, &m.val, &m.test};
    for (int s = 0; s < 3; ++s) {
        for (std::size_t i : *sets[s]) {
            if (i >= n) throw SchemaError("mask index " + std::to_string(i) + " out of range");
            if (owner[i] != -1) throw SchemaError("node " + std::to_string(i) + " appears in two masks");
            owner[i] = s;
        }
    }
}

}  // namespace

void GraphDataset::validate() const {
    if (features.rows() != n)
        throw SchemaError("features have " + std::to_string(features.rows()) + " rows for n = " +
                          std::to_string(n));
    if (!features.all_finite()) throw SchemaError("features contain non-finite values");
    for (const auto& [s, d] : edges)
        if (s >= n || d >= n)
            throw SchemaError("edge (" + std::to_string(s) + ", " + std::to_string(d) +
                              ") out of range for n = " + std::to_string(n));
    if (has_labels()) {
        if (labels.size() != n) throw SchemaError("labels length differs from n");
        for (int y : labels)
            if (y < 0 || static_cast<std::size_t>(y) >= classes)
                throw SchemaError("label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(classes) + ")");
    }
    check_disjoint(masks, n);
}

GraphDataset load_planetoid(const std::filesystem::path& content, const std::filesystem::path& cites,
                            std::size_t* dropped_edges) {
    auto in = open_or_throw(content);
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> label_names;
    std::string line;
    std::size_t line_no = 0, dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() < 3) throw ParseError("expected id, features and label", line_no);
        if (dim == 0) dim = fields.size() - 2;
        if (fields.size() - 2 != dim)
            throw ParseError("expected " + std::to_string(dim) + " features, found " +
                                 std::to_string(fields.size() - 2),
                             line_no);
        if (!index.emplace(fields.front(), rows.size()).second)
            throw ParseError("duplicate id '" + fields.front() + "'", line_no);
        std::vector<double> row(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            const std::string& f = fields[j + 1];
            std::size_t used = 0;
            try {
                row[j] = std::stod(f, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != f.size() || f.empty()) throw ParseError("bad feature value '" + f + "'", line_no);
        }
        rows.push_back(std::move(row));
        label_names.push_back(fields.back());
    }
    if (rows.empty()) throw ParseError("no nodes in " + content.string(), 0);

    GraphDataset g;
    g.n = rows.size();
    g.features = Dense(g.n, dim);
    for (std::size_t i = 0; i < g.n; ++i) {
        double total = 0.0;
        for (double v : rows[i]) total += std::abs(v);
        for (std::size_t j = 0; j < dim; ++j) g.features(i, j) = total > 0 ? rows[i][j] / total : 0.0;
    }
    std::map<std::string, int> label_ids;
    for (const auto& name : label_names) label_ids.emplace(name, 0);
    int next = 0;
    for (auto& [name, id] : label_ids) id = next++;
    g.classes = label_ids.size();
    g.labels.reserve(g.n);
    for (const auto& name : label_names) g.labels.push_back(label_ids.at(name));

    auto cin = open_or_throw(cites);
    std::size_t dropped = 0;
    line_no = 0;
    while (std::getline(cin, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 2) throw ParseError("expected two ids", line_no);
        const auto a = index.find(fields[0]);
        const auto b = index.find(fields[1]);
        if (a == index.end() || b == index.end()) {
            ++dropped;
            continue;
        }
        g.edges.emplace_back(a->second, b->second);
    }
    if (dropped_edges) *dropped_edges = dropped;
    g.validate();
    return g;
}

GraphDataset load_json_graph(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON in ") + path.string() + ": " + e.what(), 0);
    }
    auto require = [&](const char* key) -> const nlohmann::json& {
        if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
        return j.at(key);
    };
    GraphDataset g;
    try {
        g.n = require("n").get<std::size_t>();
        const auto& feats = require("features");
        if (!feats.is_array() || feats.size() != g.n)
            throw SchemaError("features must be an array of n rows");
        const std::size_t dim = g.n ? feats.at(0).size() : 0;
        g.features = Dense(g.n, dim);
        for (std::size_t i = 0; i < g.n; ++i) {
            const auto& row = feats.at(i);
            if (!row.is_array() || row.size() != dim)
                throw SchemaError("ragged feature row " + std::to_string(i));
            for (std::size_t c = 0; c < dim; ++c) g.features(i, c) = row.at(c).get<double>();
        }
        for (const auto& e : require("edges")) {
            if (!e.is_array() || e.size() != 2) throw SchemaError("edges must be [src, dst] pairs");
            const auto s = e.at(0).get<long long>(), d = e.at(1).get<long long>();
            if (s < 0 || d < 0) throw SchemaError("negative edge endpoint");
            g.edges.emplace_back(static_cast<std::size_t>(s), static_cast<std::size_t>(d));
        }
        g.classes = require("classes").get<std::size_t>();
        if (j.contains("labels") && !j.at("labels").is_null()) g.labels = j.at("labels").get<std::vector<int>>();
        if (j.contains("masks") && !j.at("masks").is_null()) {
            const auto& m = j.at("masks");
            for (const char* key : {"train", "val", "test"})
                if (!m.contains(key)) throw SchemaError(std::string("masks missing '") + key + "'");
            g.masks.train = m.at("train").get<std::vector<std::size_t>>();
            g.masks.val = m.at("val").get<std::vector<std::size_t>>();
            g.masks.test = m.at("test").get<std::vector<std::size_t>>();
        }
        for (const auto& [key, _] : j.items())
            if (key != "n" && key != "features" && key != "edges" && key != "labels" &&
                key != "masks" && key != "classes")
                throw SchemaError("unknown field '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("bad graph file ") + path.string() + ": " + e.what());
    }
    g.validate();
    return g;
}

void save_json_graph(const GraphDataset& g, const std::filesystem::path& path) {
    g.validate();
    nlohmann::json j;
    j["n"] = g.n;
    auto feats = nlohmann::json::array();
    for (std::size_t i = 0; i < g.n; ++i)
        feats.push_back(std::vector<double>(g.features.row(i).begin(), g.features.row(i).end()));
    j["features"] = std::move(feats);
    auto edges = nlohmann::json::array();
    for (const auto& [s, d] : g.edges) edges.push_back({s, d});
    j["edges"] = std::move(edges);
    j["labels"] = g.has_labels() ? nlohmann::json(g.labels) : nlohmann::json(nullptr);
    if (g.masks.empty())
        j["masks"] = nullptr;
    else
        j["masks"] = {{"train", g.masks.train}, {"val", g.masks.val}, {"test", g.masks.test}};
    j["classes"] = g.classes;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump() << '\n';
}

GraphDataset symmetrize(const GraphDataset& g) {
    GraphDataset out = g;
    out.edges.clear();
    for (const auto& [s, d] : g.edges) {
        out.edges.emplace_back(s, d);
        out.edges.emplace_back(d, s);
    }
    std::sort(out.edges.begin(), out.edges.end());
    out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
    return out;
}

Masks stratified_split(std::span<const int> labels, std::size_t classes, double train_fraction,
                       double test_fraction, std::uint64_t seed) {
    if (train_fraction <= 0 || test_fraction < 0 || train_fraction + test_fraction > 1.0)
        throw ContractError("invalid split fractions");
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class.at(static_cast<std::size_t>(labels[i])).push_back(i);
    std::mt19937_64 rng(seed);
    Masks m;
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        const double sz = static_cast<double>(members.size());
        std::size_t n_train = static_cast<std::size_t>(std::llround(train_fraction * sz));
        std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * sz));
        if (!members.empty()) n_train = std::max<std::size_t>(n_train, 1);
        n_train = std::min(n_train, members.size());
        n_test = std::min(n_test, members.size() - n_train);
        m.train.insert(m.train.end(), members.begin(), members.begin() + n_train);
        m.test.insert(m.test.end(), members.begin() + n_train, members.begin() + n_train + n_test);
        m.val.insert(m.val.end(), members.begin() + n_train + n_test, members.end());
    }
    for (auto* v : {&m.train, &m.val, &m.test}) std::sort(v->begin(), v->end());
    return m;
}

// ---------------------------------------------------------------------------------------------

const CsrPattern& MultiOrderAdjacency::relation(Branch b, std::size_t k) const {
    if (b == Branch::loop) return loop;
    if (k < 1 || k > max_order)
        throw ContractError("order " + std::to_string(k) + " outside 1.." + std::to_string(max_order));
    return b == Branch::along ? along[k - 1] : rev[k - 1];
}

MultiOrderAdjacency build_multi_order(std::span<const Edge> edges, std::size_t n, std::size_t max_order) {
    if (max_order < 1) throw ContractError("build_multi_order: K must be at least 1");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(edges.size());
    for (const auto& [s, d] : edges) {
        if (s >= n || d >= n) throw ContractError("build_multi_order: edge endpoint out of range");
        if (s != d) pairs.emplace_back(s, d);
    }
    const CsrPattern base = CsrPattern::from_pairs(n, n, std::move(pairs));

    MultiOrderAdjacency adj;
    adj.n = n;
    adj.max_order = max_order;
    adj.loop = CsrPattern::identity(n);

    // walk[i] holds every j reachable from i by a walk of exactly k steps, diagonal included
    CsrPattern walk = base;
    std::vector<std::size_t> mark(n, static_cast<std::size_t>(-1));
    for (std::size_t k = 1; k <= max_order; ++k) {
        if (k > 1) {
            CsrPattern next;
            next.n_rows = next.n_cols = n;
            next.offsets.assign(1, 0);
            std::vector<std::size_t> row;
            for (std::size_t i = 0; i < n; ++i) {
                row.clear();
                for (std::size_t e = walk.offsets[i]; e < walk.offsets[i + 1]; ++e) {
                    const std::size_t j = walk.cols[e];
                    for (std::size_t f = base.offsets[j]; f < base.offsets[j + 1]; ++f) {
                        const std::size_t t = base.cols[f];
                        if (mark[t] != i) {
                            mark[t] = i;
                            row.push_back(t);
                        }
                    }
                }
                std::sort(row.begin(), row.end());
                next.cols.insert(next.cols.end(), row.begin(), row.end());
                next.offsets.push_back(next.cols.size());
            }
            walk = std::move(next);
            std::fill(mark.begin(), mark.end(), static_cast<std::size_t>(-1));
        }
        CsrPattern off;
        off.n_rows = off.n_cols = n;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t e = walk.offsets[i]; e < walk.offsets[i + 1]; ++e)
                if (walk.cols[e] != i) off.cols.push_back(walk.cols[e]);
            off.offsets.push_back(off.cols.size());
        }
        adj.rev.push_back(off.transposed());
        adj.along.push_back(std::move(off));
    }
    return adj;
}

// ---------------------------------------------------------------------------------------------

std::vector<std::size_t> feature_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

Dense permute_rows(const Dense& features, std::span<const std::size_t> perm) {
    if (perm.size() != features.rows()) throw DimensionError("permute_rows: permutation size mismatch");
    Dense out(features.rows(), features.cols());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        const auto src = features.row(perm[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

GraphDataset corrupt_features(const GraphDataset& g, std::uint64_t seed, std::vector<std::size_t>* permutation) {
    if (g.n < 2) throw ContractError("corrupt_features: need at least two nodes");
    auto perm = feature_permutation(g.n, seed);
    GraphDataset out = g;
    out.features = permute_rows(g.features, perm);
    if (permutation) *permutation = std::move(perm);
    return out;
}

GraphDataset generate_hierarchy(const HierarchySpec& spec) {
    if (spec.depth < 2) throw ContractError("generate_hierarchy: depth must be at least 2");
    if (spec.branching < 2) throw ContractError("generate_hierarchy: branching must be at least 2");
    if (spec.classes < 1 || spec.classes > spec.branching)
        throw ContractError("generate_hierarchy: classes must be between 1 and the branching factor");
    if (spec.feature_dim < 1) throw ContractError("generate_hierarchy: feature_dim must be positive");
    if (!(spec.noise >= 0)) throw ContractError("generate_hierarchy: noise must be non-negative");

    GraphDataset g;
    g.classes = spec.classes;
    std::vector<std::size_t> branch{0};  // depth-1 ancestor index, root gets 0
    std::vector<std::size_t> level_start{0, 1};
    std::size_t count = 1, width = 1;
    for (std::size_t d = 1; d <= spec.depth; ++d) {
        const std::size_t parent_begin = level_start[d - 1];
        for (std::size_t p = 0; p < width; ++p) {
            for (std::size_t c = 0; c < spec.branching; ++c) {
                const std::size_t child = count++;
                g.edges.emplace_back(parent_begin + p, child);
                branch.push_back(d == 1 ? c : branch[parent_begin + p]);
            }
        }
        width *= spec.branching;
        level_start.push_back(count);
    }
    g.n = count;
    g.labels.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) g.labels[i] = static_cast<int>(branch[i] % spec.classes);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(spec.feature_dim)));
    Dense means(spec.classes, spec.feature_dim);
    for (double& v : means.values()) v = gauss(rng);
    g.features = Dense(g.n, spec.feature_dim);
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t c = 0; c < spec.feature_dim; ++c)
            g.features(i, c) = means(static_cast<std::size_t>(g.labels[i]), c) + spec.noise * gauss(rng);
    g.masks = stratified_split(g.labels, g.classes, 0.7, 0.2, spec.seed ^ 0x9e3779b97f4a7c15ULL);
    g.validate();
    return g;
}

}  // namespace hygraph::graph
