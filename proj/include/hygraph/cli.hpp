#pragma once

// Command-line front end: train, eval, ablate, geometry-check and curvature-dump.
//
// Configuration is resolved as defaults < config file < flags, validated before any work, echoed
// to stdout and written to <out>/config.json.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "hygraph/errors.hpp"
#include "hygraph/graph.hpp"
#include "hygraph/training.hpp"

namespace hygraph::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kDiverged = 3,
    kToleranceBreach = 4,
};

// Bad flags, config values or missing inputs; maps to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::string command = "train";
    std::string dataset = "hierarchy";
    bool symmetrize = false;
    std::filesystem::path out = "hygraph_out";
    training::TrainConfig train;

    // hierarchy bench
    std::size_t hierarchy_depth = 4;
    std::size_t hierarchy_branching = 3;
    double hierarchy_noise = 1.0;

    // ablate
    std::vector<std::size_t> ks;
    std::vector<std::size_t> dims;
    std::vector<std::string> spaces;
    std::vector<std::uint64_t> seeds;
    std::size_t jobs = 1;

    // geometry-check
    std::string model = "poincare";
    std::size_t trials = 1000;

    // eval: the run directory to re-evaluate; an empty eval mode keeps the run's own
    std::filesystem::path run;
    std::string eval_override;

    nlohmann::json to_json() const;
    // Every key must be known for `command`; type errors and unknown keys throw UsageError.
    static RunConfig from_json(const nlohmann::json& j);
    void validate() const;
};

// Keys accepted in config files and written to config.json for each command. A key is also the
// long flag of the same name with '_' spelled '-'.
std::vector<std::string> config_keys(const std::string& command);

// Defaults for a command and task, as a JSON object over config_keys(command).
nlohmann::json default_config(const std::string& command, training::Task task);

// Resolves `dataset` (hierarchy, a .json graph, a .content file, or a name looked up under
// $HYGRAPH_DATA_DIR) and applies symmetrize and default masks. Missing files throw UsageError
// naming the paths tried.
graph::GraphDataset load_dataset(const RunConfig& config);

struct AblationRow {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::string space;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
    std::string status;  // ok, diverged or error: <message>
};

inline constexpr const char* kAblationHeader = "k,dim,space,seed,metric,value,status";
inline constexpr const char* kMetricNames[] = {"acc", "micro_f1", "macro_f1", "nmi", "ami", "ari"};

void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path);

// Entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hygraph::cli
