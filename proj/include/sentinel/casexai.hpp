#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sentinel/dataset.hpp"
#include "sentinel/propxai.hpp"  // ByClass
#include "sentinel/svm.hpp"
#include "sentinel/types.hpp"

namespace sentinel {

using FeatureKey = std::array<int, kNumFeatures>;

struct FeatureKeyHash {
    size_t operator()(const FeatureKey& k) const {
        size_t h = 1469598103934665603ull;
        for (int v : k) {
            h ^= static_cast<size_t>(v) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

struct IndexEntry {
    std::vector<Origin> trojan_refs;
    std::vector<Origin> nontrojan_refs;
};

// Exact-feature-vector hashmap over the training set; immutable after build,
// safe for concurrent queries.
struct TrainingIndex {
    std::unordered_map<FeatureKey, IndexEntry, FeatureKeyHash> entries;
    double balance_t = 1.0;  // b(trojan) of the indexed set

    size_t total_refs() const;

    nlohmann::json to_json() const;
    static TrainingIndex from_json(const nlohmann::json& j);
};

TrainingIndex build_index(const Dataset& train);

// w(class) = count * b(class) / (d + 1)^2, with b(non-trojan) = 1.
double shell_weight(int count, double class_balance, double distance);

struct NeighborShell {
    double distance = 0.0;  // raw Euclidean over the five integer features
    long dist_sq = 0;
    FeatureKey key{};
    int t_count = 0, n_count = 0;
    double w_t = 0.0, w_n = 0.0;
    std::vector<Origin> trojan_refs, nontrojan_refs;
};

// The k nearest distinct keys, ascending distance; every key tied with the
// k-th distance is included.
std::vector<NeighborShell> knn_query(const TrainingIndex& ti, const FeatureVector& x, int k = 4);

// Per-class share of the summed shell weights.
ByClass<double> correspondence(const std::vector<NeighborShell>& shells);

struct CaseExplanation {
    Label prediction = Label::non_trojan;
    std::vector<NeighborShell> shells;
    ByClass<double> sum_w;
    ByClass<double> corr;
    bool agrees = false;  // argmax correspondence == prediction (tie: non-trojan)
};

CaseExplanation explain_case(const TrainedSvm& model, const TrainingIndex& ti,
                             const FeatureVector& x, int k = 4);

double agreement_rate(const TrainedSvm& model, const TrainingIndex& ti, const Dataset& test,
                      int k = 4);

std::string render_case_report(const CaseExplanation& ce, bool with_refs = true);
nlohmann::json case_explanation_json(const CaseExplanation& ce);

void save_index(const TrainingIndex& ti, const std::string& path);
TrainingIndex load_index(const std::string& path);

}  // namespace sentinel
