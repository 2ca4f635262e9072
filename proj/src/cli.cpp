#include "hygraph/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "hygraph/curvature.hpp"
#include "hygraph/geometry.hpp"
#include "hygraph/geometry_check.hpp"
#include "hygraph/layers.hpp"

namespace hygraph::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------------------------
// Config keys

enum CommandBit : unsigned {
    kTrainCmd = 1,
    kAblateCmd = 2,
    kEvalCmd = 4,
    kGeometryCmd = 8,
    kCurvatureCmd = 16,
};

constexpr unsigned kTrainLike = kTrainCmd | kAblateCmd;

const std::vector<std::pair<std::string, unsigned>>& commands() {
    static const std::vector<std::pair<std::string, unsigned>> table{
        {"train", kTrainCmd},         {"eval", kEvalCmd},
        {"ablate", kAblateCmd},       {"geometry-check", kGeometryCmd},
        {"curvature-dump", kCurvatureCmd},
    };
    return table;
}

unsigned command_bit(const std::string& command) {
    for (const auto& [name, bit] : commands())
        if (name == command) return bit;
    throw UsageError("unknown command '" + command + "'");
}

// How a key is spelled on the command line.
enum class Kind { count, real, flag, text, counts, texts };

struct Field {
    std::string key;
    unsigned commands;
    Kind kind;
    std::string help;
    std::function<void(const json&, RunConfig&)> read;
    std::function<json(const RunConfig&)> write;
};

[[noreturn]] void bad_type(const std::string& key, const char* expected) {
    throw UsageError("config key '" + key + "' must be " + expected);
}

void decode(const json& j, const std::string& key, std::size_t& out) {
    if (j.is_number_unsigned()) {
        out = j.get<std::size_t>();
    } else if (j.is_number_integer()) {
        if (j.get<long long>() < 0) bad_type(key, "a non-negative integer");
        out = static_cast<std::size_t>(j.get<long long>());
    } else {
        bad_type(key, "a non-negative integer");
    }
}

void decode(const json& j, const std::string& key, double& out) {
    if (!j.is_number()) bad_type(key, "a number");
    out = j.get<double>();
}

void decode(const json& j, const std::string& key, bool& out) {
    if (!j.is_boolean()) bad_type(key, "true or false");
    out = j.get<bool>();
}

void decode(const json& j, const std::string& key, std::string& out) {
    if (!j.is_string()) bad_type(key, "a string");
    out = j.get<std::string>();
}

void decode(const json& j, const std::string& key, fs::path& out) {
    std::string s;
    decode(j, key, s);
    out = s;
}

template <class T>
void decode(const json& j, const std::string& key, std::vector<T>& out) {
    if (!j.is_array()) bad_type(key, "an array");
    out.clear();
    for (const auto& item : j) {
        T v{};
        decode(item, key, v);
        out.push_back(v);
    }
}

template <class Parse, class T>
void decode_enum(const json& j, const std::string& key, Parse parse, T& out) {
    std::string s;
    decode(j, key, s);
    try {
        out = parse(s);
    } catch (const Error& e) {
        throw UsageError("config key '" + key + "': " + e.what());
    }
}

json encode(const fs::path& p) { return p.string(); }
template <class T>
json encode(const T& v) {
    return v;
}

// A field bound to a member reached through `get`.
template <class Get>
Field bind(std::string key, unsigned cmds, Kind kind, std::string help, Get get) {
    Field f{key, cmds, kind, std::move(help), {}, {}};
    f.read = [key, get](const json& j, RunConfig& c) { decode(j, key, get(c)); };
    f.write = [get](const RunConfig& c) { return encode(get(const_cast<RunConfig&>(c))); };
    return f;
}

const std::vector<Field>& fields() {
    using training::EvalMode;
    using training::Task;
    static const std::vector<Field> table = [] {
        std::vector<Field> t;
        const unsigned data = kTrainLike | kCurvatureCmd;
        t.push_back(bind("dataset", data, Kind::text, "hierarchy, a .json or .content file, or a name under $HYGRAPH_DATA_DIR",
                         [](RunConfig& c) -> auto& { return c.dataset; }));
        t.push_back(bind("symmetrize", data, Kind::flag, "add the reverse of every edge",
                         [](RunConfig& c) -> auto& { return c.symmetrize; }));
        t.push_back(bind("out", kTrainLike | kEvalCmd | kGeometryCmd | kCurvatureCmd, Kind::text, "output directory",
                         [](RunConfig& c) -> auto& { return c.out; }));

        Field task{"task", kTrainLike, Kind::text, "supervised or unsupervised", {}, {}};
        task.read = [](const json& j, RunConfig& c) { decode_enum(j, "task", training::parse_task, c.train.task); };
        task.write = [](const RunConfig& c) -> json { return training::to_string(c.train.task); };
        t.push_back(task);

        Field space{"space", kTrainLike, Kind::text, "poincare, lorentz or euclidean", {}, {}};
        space.read = [](const json& j, RunConfig& c) { decode_enum(j, "space", geometry::parse_space, c.train.space); };
        space.write = [](const RunConfig& c) -> json { return geometry::to_string(c.train.space); };
        t.push_back(space);

        t.push_back(bind("c", kTrainLike | kGeometryCmd, Kind::real, "curvature (negative)",
                         [](RunConfig& c) -> auto& { return c.train.curvature; }));
        t.push_back(bind("k", kTrainLike | kCurvatureCmd, Kind::count, "highest neighbourhood order",
                         [](RunConfig& c) -> auto& { return c.train.orders; }));
        t.push_back(bind("layers", kTrainLike, Kind::count, "number of encoder layers",
                         [](RunConfig& c) -> auto& { return c.train.layers; }));
        t.push_back(bind("dim", kTrainLike, Kind::count, "hidden dimension",
                         [](RunConfig& c) -> auto& { return c.train.hidden; }));
        t.push_back(bind("att_dim", kTrainLike, Kind::count, "order-attention dimension",
                         [](RunConfig& c) -> auto& { return c.train.att_dim; }));
        t.push_back(bind("lr", kTrainLike, Kind::real, "Adam learning rate (0.1 is aggressive for deep stacks)",
                         [](RunConfig& c) -> auto& { return c.train.lr; }));
        t.push_back(bind("epochs", kTrainLike, Kind::count, "maximum epochs",
                         [](RunConfig& c) -> auto& { return c.train.epochs; }));
        t.push_back(bind("seed", kTrainLike | kGeometryCmd | kCurvatureCmd, Kind::count, "random seed",
                         [](RunConfig& c) -> auto& { return c.train.seed; }));
        t.push_back(bind("dropout", kTrainLike, Kind::real, "dropout rate on tangent features",
                         [](RunConfig& c) -> auto& { return c.train.dropout; }));
        t.push_back(bind("patience", kTrainLike, Kind::count, "early-stopping patience in epochs (0 disables)",
                         [](RunConfig& c) -> auto& { return c.train.patience; }));
        t.push_back(bind("idleness", kTrainLike | kCurvatureCmd, Kind::real, "lazy random-walk idleness for curvature",
                         [](RunConfig& c) -> auto& { return c.train.idleness; }));

        Field eval{"eval", kTrainLike, Kind::text, "probe or clustering (unsupervised evaluation)", {}, {}};
        eval.read = [](const json& j, RunConfig& c) { decode_enum(j, "eval", training::parse_eval_mode, c.train.eval); };
        eval.write = [](const RunConfig& c) -> json { return training::to_string(c.train.eval); };
        t.push_back(eval);

        t.push_back(bind("wallclock", kTrainLike, Kind::flag, "record elapsed seconds in history.jsonl",
                         [](RunConfig& c) -> auto& { return c.train.wallclock; }));
        t.push_back(bind("hierarchy_depth", data, Kind::count, "hierarchy dataset: tree depth",
                         [](RunConfig& c) -> auto& { return c.hierarchy_depth; }));
        t.push_back(bind("hierarchy_branching", data, Kind::count, "hierarchy dataset: children per node",
                         [](RunConfig& c) -> auto& { return c.hierarchy_branching; }));
        t.push_back(bind("hierarchy_noise", data, Kind::real, "hierarchy dataset: feature noise scale",
                         [](RunConfig& c) -> auto& { return c.hierarchy_noise; }));

        t.push_back(bind("ks", kAblateCmd, Kind::counts, "orders to sweep",
                         [](RunConfig& c) -> auto& { return c.ks; }));
        t.push_back(bind("dims", kAblateCmd, Kind::counts, "hidden dimensions to sweep",
                         [](RunConfig& c) -> auto& { return c.dims; }));
        t.push_back(bind("spaces", kAblateCmd, Kind::texts, "spaces to sweep",
                         [](RunConfig& c) -> auto& { return c.spaces; }));
        t.push_back(bind("seeds", kAblateCmd, Kind::counts, "seeds to sweep",
                         [](RunConfig& c) -> auto& { return c.seeds; }));
        t.push_back(bind("jobs", kAblateCmd, Kind::count, "cells run in parallel",
                         [](RunConfig& c) -> auto& { return c.jobs; }));

        t.push_back(bind("model", kGeometryCmd, Kind::text, "poincare or lorentz",
                         [](RunConfig& c) -> auto& { return c.model; }));
        t.push_back(bind("trials", kGeometryCmd, Kind::count, "random trials",
                         [](RunConfig& c) -> auto& { return c.trials; }));

        t.push_back(bind("run", kEvalCmd, Kind::text, "directory of a finished train run",
                         [](RunConfig& c) -> auto& { return c.run; }));
        t.push_back(bind("eval", kEvalCmd, Kind::text, "probe or clustering; empty keeps the run's mode",
                         [](RunConfig& c) -> auto& { return c.eval_override; }));
        return t;
    }();
    return table;
}

const Field* find_field(const std::string& key, unsigned bit) {
    for (const auto& f : fields())
        if (f.key == key && (f.commands & bit)) return &f;
    return nullptr;
}

std::string flag_name(const std::string& key) {
    std::string s = "--" + key;
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

// ---------------------------------------------------------------------------------------------
// Files

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_history(const std::vector<training::HistoryRecord>& history, const fs::path& path) {
    std::string text;
    for (const auto& r : history) text += r.to_json().dump() + "\n";
    write_text(path, text);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_safe(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ch == ',' ? ';' : ' ';
    return s;
}

// ---------------------------------------------------------------------------------------------
// Datasets

std::optional<fs::path> existing(const fs::path& p) {
    std::error_code ec;
    if (fs::is_regular_file(p, ec)) return p;
    return std::nullopt;
}

graph::GraphDataset load_file(const fs::path& path) {
    if (path.extension() == ".json") return graph::load_json_graph(path);
    if (path.extension() == ".content") {
        auto cites = path;
        cites.replace_extension(".cites");
        if (!existing(cites)) throw UsageError("dataset " + path.string() + " has no sibling " + cites.string());
        return graph::load_planetoid(path, cites);
    }
    throw UsageError("dataset " + path.string() + ": expected a .json or .content file");
}

// Raw graph before symmetrisation and masks.
graph::GraphDataset load_raw(const RunConfig& config) {
    if (config.dataset == "hierarchy") {
        graph::HierarchySpec spec;
        spec.depth = config.hierarchy_depth;
        spec.branching = config.hierarchy_branching;
        spec.noise = config.hierarchy_noise;
        spec.seed = config.train.seed;
        return graph::generate_hierarchy(spec);
    }
    std::vector<fs::path> tried;
    const fs::path direct(config.dataset);
    tried.push_back(direct);
    if (auto p = existing(direct)) return load_file(*p);
    if (const char* root = std::getenv("HYGRAPH_DATA_DIR"); root && *root) {
        const fs::path base(root);
        const std::string name = config.dataset;
        for (const auto& candidate : {base / direct, base / (name + ".json"), base / (name + ".content"),
                                      base / name / (name + ".json"), base / name / (name + ".content")}) {
            tried.push_back(candidate);
            if (auto p = existing(candidate)) return load_file(*p);
        }
    }
    std::string msg = "dataset not found: " + config.dataset + " (tried";
    for (const auto& p : tried) msg += " " + p.string();
    msg += ")";
    throw UsageError(msg);
}

graph::GraphDataset finish_dataset(graph::GraphDataset g, const RunConfig& config) {
    if (config.symmetrize) g = graph::symmetrize(g);
    g = training::with_default_masks(std::move(g), config.train.seed);
    g.validate();
    return g;
}

// ---------------------------------------------------------------------------------------------
// Training runs

struct TrainOutcome {
    bool diverged = false;
    std::string failure;
    std::optional<metrics::Report> report;
    json metrics;
};

void require_labels(const graph::GraphDataset& g, const RunConfig& config) {
    if (config.train.task == training::Task::supervised && !g.has_labels())
        throw UsageError("supervised training needs a labelled dataset");
}

std::string protocol_name(const training::TrainConfig& t) {
    return t.task == training::Task::supervised ? "supervised" : training::to_string(t.eval);
}

json metrics_json(const std::optional<metrics::Report>& report, const training::TrainConfig& t) {
    json m = report ? report->to_json() : json::object();
    m["protocol"] = protocol_name(t);
    return m;
}

// Trains on g and writes config.json, history.jsonl, checkpoint.json and metrics.json to `dir`.
TrainOutcome train_into(const graph::GraphDataset& g, const RunConfig& config, const fs::path& dir) {
    fs::create_directories(dir);
    write_text(dir / "config.json", config.to_json().dump(2) + "\n");
    const auto ctx = layers::build_context(g, config.train.orders, config.train.idleness);

    TrainOutcome outcome;
    training::FitResult fit;
    try {
        fit = training::fit(g, ctx, config.train);
    } catch (const NonFiniteError& e) {
        fit.diverged = true;
        fit.failure = e.what();
    } catch (const BoundaryError& e) {
        fit.diverged = true;
        fit.failure = e.what();
    }
    write_history(fit.history, dir / "history.jsonl");
    if (fit.diverged) {
        outcome.diverged = true;
        outcome.failure = fit.failure;
        return outcome;
    }
    layers::save_checkpoint(dir / "checkpoint.json", fit.model.parameters(config.train.task), config.to_json());
    if (g.has_labels()) outcome.report = training::evaluate(g, ctx, fit.model, config.train);
    outcome.metrics = metrics_json(outcome.report, config.train);
    outcome.metrics["best_epoch"] = fit.best_epoch;
    outcome.metrics["epochs_run"] = fit.history.size();
    write_text(dir / "metrics.json", outcome.metrics.dump(2) + "\n");
    return outcome;
}

void print_report(std::ostream& out, const json& m) {
    for (const char* key : kMetricNames)
        if (m.contains(key)) out << "  " << key << " = " << format_double(m[key].get<double>()) << "\n";
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const auto g = load_dataset(config);
    require_labels(g, config);
    out << "dataset: " << g.n << " nodes, " << g.edges.size() << " edges, " << g.feature_dim() << " features, "
        << g.classes << " classes\n";
    const auto outcome = train_into(g, config, config.out);
    if (outcome.diverged) {
        err << "training diverged: " << outcome.failure << "\n";
        return kDiverged;
    }
    out << "best epoch " << outcome.metrics["best_epoch"] << " of " << outcome.metrics["epochs_run"] << "\n";
    print_report(out, outcome.metrics);
    out << "wrote " << config.out.string() << "\n";
    return kOk;
}

int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream&) {
    const fs::path ckpt = config.run / "checkpoint.json";
    if (!existing(ckpt)) throw UsageError("no checkpoint at " + ckpt.string());
    const json stored = read_json_file(ckpt);
    if (!stored.contains("meta")) throw SchemaError(ckpt.string() + ": missing meta");
    RunConfig run = RunConfig::from_json(stored["meta"]);
    if (!config.eval_override.empty()) {
        try {
            run.train.eval = training::parse_eval_mode(config.eval_override);
        } catch (const Error& e) {
            throw UsageError(std::string("eval: ") + e.what());
        }
    }
    const auto g = load_dataset(run);
    if (!g.has_labels()) throw UsageError("evaluation needs a labelled dataset");
    const auto ctx = layers::build_context(g, run.train.orders, run.train.idleness);
    auto model = training::init_model(run.train, g.feature_dim(), g.classes);
    layers::load_checkpoint(ckpt, model.parameters(run.train.task));
    const auto report = training::evaluate(g, ctx, model, run.train);
    const fs::path dir = config.out.empty() ? config.run / "eval" : config.out;
    fs::create_directories(dir);
    write_text(dir / "config.json", config.to_json().dump(2) + "\n");
    const json m = metrics_json(report, run.train);
    write_text(dir / "metrics.json", m.dump(2) + "\n");
    print_report(out, m);
    out << "wrote " << dir.string() << "\n";
    return kOk;
}

struct Cell {
    RunConfig config;
    fs::path dir;
    std::vector<AblationRow> rows;
};

int cmd_ablate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::vector<Cell> cells;
    for (std::size_t k : config.ks)
        for (std::size_t dim : config.dims)
            for (const auto& space : config.spaces)
                for (std::uint64_t seed : config.seeds) {
                    Cell cell;
                    cell.config = config;
                    cell.config.command = "train";
                    cell.config.train.orders = k;
                    cell.config.train.hidden = dim;
                    cell.config.train.space = geometry::parse_space(space);
                    cell.config.train.seed = seed;
                    cell.dir = config.out / "cells" /
                               ("k" + std::to_string(k) + "_dim" + std::to_string(dim) + "_" + space + "_seed" +
                                std::to_string(seed));
                    cell.config.out = cell.dir;
                    cells.push_back(std::move(cell));
                }

    // Graphs read from disk are shared read-only; the synthetic one depends on the cell seed.
    std::optional<graph::GraphDataset> shared;
    if (config.dataset != "hierarchy") {
        shared = load_raw(config);
        if (!shared->has_labels()) throw UsageError("ablation needs a labelled dataset");
    }

    std::mutex log_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            Cell& cell = cells[i];
            const auto& t = cell.config.train;
            std::string status = "ok";
            std::optional<metrics::Report> report;
            try {
                const auto g = finish_dataset(shared ? *shared : load_raw(cell.config), cell.config);
                require_labels(g, cell.config);
                const auto outcome = train_into(g, cell.config, cell.dir);
                if (outcome.diverged) status = "diverged";
                report = outcome.report;
            } catch (const std::exception& e) {
                status = std::string("error: ") + e.what();
            }
            const json values = report ? report->to_json() : json::object();
            for (const char* metric : kMetricNames) {
                AblationRow row{t.orders, t.hidden, geometry::to_string(t.space), t.seed, metric,
                                std::nan(""), status};
                if (values.contains(metric)) row.value = values[metric].get<double>();
                cell.rows.push_back(row);
            }
            std::lock_guard lock(log_mutex);
            out << "cell k=" << t.orders << " dim=" << t.hidden << " space=" << geometry::to_string(t.space)
                << " seed=" << t.seed << ": " << status;
            if (report) out << " acc=" << format_double(report->acc);
            out << "\n";
        }
    };
    const std::size_t jobs = std::min(config.jobs, cells.size());
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<AblationRow> rows;
    std::size_t failed = 0;
    for (const auto& cell : cells) {
        failed += cell.rows.front().status != "ok";
        rows.insert(rows.end(), cell.rows.begin(), cell.rows.end());
    }
    write_ablation_csv(rows, config.out / "ablation.csv");
    out << "wrote " << (config.out / "ablation.csv").string() << " (" << cells.size() << " cells)\n";
    if (failed) err << failed << " of " << cells.size() << " cells failed; see the status column\n";
    return kOk;
}

int cmd_geometry_check(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const auto model = config.model == "lorentz" ? manifold::Model::lorentz : manifold::Model::poincare;
    const auto r = geometry::geometry_check(model, config.train.curvature, config.trials, config.train.seed);
    out << "model " << config.model << ", c = " << format_double(config.train.curvature) << ", " << r.trials
        << " trials\n";
    out << "  max round-trip error = " << format_double(r.max_round_trip) << "\n";
    out << "  max constraint error = " << format_double(r.max_constraint) << "\n";
    out << "  max distance error   = " << format_double(r.max_distance) << "\n";
    if (!r.ok()) {
        for (const auto& f : r.failures) err << "tolerance breach: " << f << "\n";
        return kToleranceBreach;
    }
    out << "all properties within tolerance\n";
    return kOk;
}

int cmd_curvature_dump(const RunConfig& config, std::ostream& out, std::ostream&) {
    const auto g = load_dataset(config);
    const std::size_t k = config.train.orders;
    const auto adj = graph::build_multi_order(g.edges, g.n, k);
    const auto kappa = curvature::ollivier_ricci(adj.along[k - 1], config.train.idleness);
    const fs::path path = config.out / "curvature.csv";
    curvature::write_csv(kappa, path);
    out << "order " << k << ": " << kappa.kappa.size() << " entries";
    if (!kappa.kappa.empty()) {
        const auto [lo, hi] = std::minmax_element(kappa.kappa.begin(), kappa.kappa.end());
        out << ", kappa in [" << format_double(*lo) << ", " << format_double(*hi) << "]";
    }
    out << "\nwrote " << path.string() << "\n";
    return kOk;
}

}  // namespace

// ---------------------------------------------------------------------------------------------

std::vector<std::string> config_keys(const std::string& command) {
    const unsigned bit = command_bit(command);
    std::vector<std::string> keys{"command"};
    for (const auto& f : fields())
        if (f.commands & bit) keys.push_back(f.key);
    return keys;
}

json default_config(const std::string& command, training::Task task) {
    RunConfig c;
    c.command = command;
    c.train = task == training::Task::supervised ? training::TrainConfig::supervised_defaults()
                                                 : training::TrainConfig::unsupervised_defaults();
    c.ks = {1, 2, 3, 4, 5, 6};
    c.dims = {c.train.hidden};
    c.spaces = {"poincare"};
    c.seeds = {0};
    if (command == "eval") c.out.clear();
    if (command == "curvature-dump") c.train.orders = 1;
    return c.to_json();
}

json RunConfig::to_json() const {
    const unsigned bit = command_bit(command);
    json j = json::object();
    j["command"] = command;
    for (const auto& f : fields())
        if (f.commands & bit) j[f.key] = f.write(*this);
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    RunConfig c;
    if (j.contains("command")) decode(j["command"], "command", c.command);
    const unsigned bit = command_bit(c.command);
    for (const auto& [key, value] : j.items())
        if (key != "command" && !find_field(key, bit))
            throw UsageError("unknown config key '" + key + "' for " + c.command);
    training::Task task = training::Task::supervised;
    if ((bit & kTrainLike) && j.contains("task")) decode_enum(j["task"], "task", training::parse_task, task);
    c.train = task == training::Task::supervised ? training::TrainConfig::supervised_defaults()
                                                 : training::TrainConfig::unsupervised_defaults();
    for (const auto& f : fields())
        if ((f.commands & bit) && j.contains(f.key)) f.read(j[f.key], c);
    return c;
}

void RunConfig::validate() const {
    const unsigned bit = command_bit(command);
    auto check_train = [](const training::TrainConfig& t) {
        try {
            t.validate();
        } catch (const ContractError& e) {
            throw UsageError(e.what());
        }
    };
    if (bit & (kTrainLike | kCurvatureCmd)) {
        if (dataset.empty()) throw UsageError("dataset must be given");
        if (dataset == "hierarchy" && (hierarchy_depth < 2 || hierarchy_branching < 2 || !(hierarchy_noise >= 0.0)))
            throw UsageError("hierarchy needs depth >= 2, branching >= 2 and noise >= 0");
    }
    if (bit & (kTrainLike | kGeometryCmd | kCurvatureCmd)) {
        if (out.empty()) throw UsageError("out must be given");
    }
    if (bit & kTrainLike) check_train(train);
    if (bit & kAblateCmd) {
        if (ks.empty() || dims.empty() || spaces.empty() || seeds.empty())
            throw UsageError("empty ablation grid: ks, dims, spaces and seeds need at least one value each");
        if (jobs < 1) throw UsageError("jobs must be at least 1");
        auto t = train;
        for (std::size_t k : ks) {
            t.orders = k;
            check_train(t);
        }
        for (std::size_t d : dims) {
            t.hidden = d;
            check_train(t);
        }
        for (const auto& s : spaces) {
            try {
                geometry::parse_space(s);
            } catch (const Error& e) {
                throw UsageError(std::string("spaces: ") + e.what());
            }
        }
    }
    if (bit & kGeometryCmd) {
        if (trials < 1) throw UsageError("trials must be at least 1");
        if (model != "poincare" && model != "lorentz") throw UsageError("model must be poincare or lorentz");
        if (!(train.curvature < 0.0) || !std::isfinite(train.curvature)) throw UsageError("c must be negative");
    }
    if (bit & kCurvatureCmd) {
        if (train.orders < 1 || train.orders > 6) throw UsageError("k must lie in 1..6");
        if (!(train.idleness >= 0.0 && train.idleness < 1.0)) throw UsageError("idleness must lie in [0, 1)");
    }
    if (bit & kEvalCmd) {
        if (run.empty()) throw UsageError("run must be given");
    }
}

graph::GraphDataset load_dataset(const RunConfig& config) { return finish_dataset(load_raw(config), config); }

void write_ablation_csv(const std::vector<AblationRow>& rows, const fs::path& path) {
    std::string text = std::string(kAblationHeader) + "\n";
    for (const auto& r : rows) {
        text += std::to_string(r.k) + "," + std::to_string(r.dim) + "," + r.space + "," + std::to_string(r.seed) +
                "," + r.metric + "," + format_double(r.value) + "," + csv_safe(r.status) + "\n";
    }
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    write_text(path, text);
}

// ---------------------------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-order hyperbolic graph convolution with curvature-weighted attention"};
    app.name("hygraph");
    app.require_subcommand(1);

    struct Sub {
        CLI::App* app;
        std::string name;
        json flags = json::object();
        std::string config_file;
    };
    std::vector<std::unique_ptr<Sub>> subs;
    const std::map<std::string, std::string> blurbs{
        {"train", "train a model and write checkpoint, history and metrics"},
        {"eval", "re-evaluate the checkpoint of a finished run"},
        {"ablate", "train over a grid of orders, dimensions, spaces and seeds"},
        {"geometry-check", "randomised property check of the manifold maps"},
        {"curvature-dump", "write the Ollivier-Ricci curvature of an order-k relation"},
    };
    for (const auto& [name, bit] : commands()) {
        auto sub = std::make_unique<Sub>();
        sub->name = name;
        sub->app = app.add_subcommand(name, blurbs.at(name));
        Sub* s = sub.get();
        s->app->add_option("--config", s->config_file, "JSON config file; flags override its values");
        for (const auto& f : fields()) {
            if (!(f.commands & bit)) continue;
            const std::string key = f.key, flag = flag_name(f.key);
            switch (f.kind) {
                case Kind::count:
                    s->app->add_option_function<std::size_t>(flag, [s, key](const std::size_t& v) { s->flags[key] = v; },
                                                             f.help);
                    break;
                case Kind::real:
                    s->app->add_option_function<double>(flag, [s, key](const double& v) { s->flags[key] = v; }, f.help);
                    break;
                case Kind::flag:
                    s->app->add_flag_callback(flag, [s, key] { s->flags[key] = true; }, f.help);
                    break;
                case Kind::text:
                    s->app->add_option_function<std::string>(
                        flag, [s, key](const std::string& v) { s->flags[key] = v; }, f.help);
                    break;
                case Kind::counts:
                    s->app
                        ->add_option_function<std::vector<std::size_t>>(
                            flag, [s, key](const std::vector<std::size_t>& v) { s->flags[key] = v; }, f.help)
                        ->delimiter(',');
                    break;
                case Kind::texts:
                    s->app
                        ->add_option_function<std::vector<std::string>>(
                            flag, [s, key](const std::vector<std::string>& v) { s->flags[key] = v; }, f.help)
                        ->delimiter(',');
                    break;
            }
        }
        subs.push_back(std::move(sub));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    const Sub* chosen = nullptr;
    for (const auto& s : subs)
        if (s->app->parsed()) chosen = s.get();
    if (!chosen) {
        err << app.help();
        return kUsage;
    }

    RunConfig config;
    try {
        json file = json::object();
        if (!chosen->config_file.empty()) {
            file = read_json_file(chosen->config_file);
            if (!file.is_object()) throw UsageError(chosen->config_file + ": config must be a JSON object");
            if (file.contains("command") && file["command"] != chosen->name)
                throw UsageError(chosen->config_file + ": config is for command " + file["command"].dump() +
                                 ", not " + chosen->name);
        }
        // Task-dependent defaults need the task first: flag, then file, then supervised.
        training::Task task = training::Task::supervised;
        if (command_bit(chosen->name) & kTrainLike) {
            const json* src = chosen->flags.contains("task") ? &chosen->flags : file.contains("task") ? &file : nullptr;
            if (src) decode_enum((*src)["task"], "task", training::parse_task, task);
        }
        json merged = default_config(chosen->name, task);
        for (const auto& [key, value] : file.items()) merged[key] = value;
        for (const auto& [key, value] : chosen->flags.items()) merged[key] = value;
        config = RunConfig::from_json(merged);
        config.validate();
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    }

    out << "effective config:\n" << config.to_json().dump(2) << "\n";
    try {
        if (config.command != "eval") {
            fs::create_directories(config.out);
            write_text(config.out / "config.json", config.to_json().dump(2) + "\n");
        }
        if (config.command == "train") return cmd_train(config, out, err);
        if (config.command == "eval") return cmd_eval(config, out, err);
        if (config.command == "ablate") return cmd_ablate(config, out, err);
        if (config.command == "geometry-check") return cmd_geometry_check(config, out, err);
        return cmd_curvature_dump(config, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace hygraph::cli
