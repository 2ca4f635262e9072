#pragma once

// Classification and partition-agreement metrics.
//
// Labels are arbitrary non-negative integers; partition metrics only look at which items share
// a label, so they are invariant under relabelling of either argument.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace hygraph::metrics {

// Counts n_uv of items with true label u and predicted label v, over compacted label ids.
struct Contingency {
    std::vector<std::vector<long long>> table;  // rows: true labels, cols: predicted labels
    std::vector<long long> a;                   // row sums
    std::vector<long long> b;                   // column sums
    long long total = 0;
    std::vector<int> true_ids;  // original label of each row
    std::vector<int> pred_ids;  // original label of each column

    static Contingency from(std::span<const int> truth, std::span<const int> pred);
};

struct F1 {
    double micro = 0.0;
    double macro = 0.0;
};

// Micro and macro F1 over the union of labels seen in either argument.
F1 f1_scores(std::span<const int> truth, std::span<const int> pred);

double accuracy(std::span<const int> truth, std::span<const int> pred);

// A value that may have come from a degenerate (near-zero) denominator; such values are 0.
struct Score {
    double value = 0.0;
    bool degenerate = false;
};

double mutual_information(const Contingency& c);
double entropy(std::span<const long long> counts, long long total);
// Exact expected mutual information under the permutation model, from the marginals only.
double expected_mutual_information(const Contingency& c);

// Arithmetic-mean normalisation throughout.
double nmi(std::span<const int> truth, std::span<const int> pred);
Score ami(std::span<const int> truth, std::span<const int> pred);
Score ari(std::span<const int> truth, std::span<const int> pred);

// Minimum-cost assignment of rows to distinct columns (rows <= cols). Returns the column of
// each row.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost);

// Relabels predicted cluster ids by the one-to-one matching that maximises agreement with the
// truth. Clusters left unmatched keep fresh ids that collide with no true label.
std::vector<int> match_clusters(std::span<const int> truth, std::span<const int> pred);

// Accuracy after optimal one-to-one matching of predicted clusters to true labels.
double matched_accuracy(std::span<const int> truth, std::span<const int> pred);

struct Report {
    double acc = 0.0;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    double nmi = 0.0;
    double ami = 0.0;
    double ari = 0.0;
    std::vector<std::string> degenerate;  // names of metrics that hit a degenerate denominator

    nlohmann::json to_json() const;
};

// Predictions live in the label space: plain accuracy and F1.
Report classification_report(std::span<const int> truth, std::span<const int> pred);
// Predictions are cluster ids: accuracy and F1 are taken after Hungarian matching.
Report clustering_report(std::span<const int> truth, std::span<const int> clusters);

}  // namespace hygraph::metrics
