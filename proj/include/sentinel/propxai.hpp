#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sentinel/dataset.hpp"
#include "sentinel/metrics.hpp"
#include "sentinel/svm.hpp"
#include "sentinel/types.hpp"

namespace sentinel {

inline constexpr int kNumProperties = 31;

// The 31 non-empty feature subsets, ordered by ascending cardinality and then
// lexicographically in (LGFi, FFi, FFo, PI, PO) order.
struct Property {
    int id = 0;  // 1..31
    FeatureMask features;
};

const std::vector<Property>& enumerate_properties();
const Property& property_by_id(int id);

// X_j = 1 - (|P_j| - 1) / (n - 1)
double explainability(const Property& p, int n_features = kNumFeatures);

struct KnowledgeBase {
    Metric metric = Metric::mcc;
    std::array<double, kNumProperties> weights{};  // weights[id-1]

    double weight(int id) const { return weights[id - 1]; }
    double total() const;

    nlohmann::json to_json() const;
    static KnowledgeBase from_json(const nlohmann::json& j);
};

struct PropertyEnsemble {
    std::vector<TrainedSvm> engines;  // engines[id-1], masks match the property
};

template <typename T>
struct ByClass {
    T trojan{};
    T non_trojan{};
    T& of(Label l) { return l == Label::trojan ? trojan : non_trojan; }
    const T& of(Label l) const { return l == Label::trojan ? trojan : non_trojan; }
};

struct Verdict {
    Label decision = Label::non_trojan;
    ByClass<double> confidence;
    ByClass<std::vector<int>> registered;  // property ids, descending weight
    ByClass<double> explainability;        // mean X over registered, 0 if empty
    std::array<Label, kNumProperties> raw_votes{};
};

struct EnsembleConfig {
    std::vector<double> C_grid{0.1, 1.0, 10.0, 100.0, 1000.0};
    std::vector<double> gamma_grid;  // empty: {0.01, 0.1, 1/d, 1, 10} per property
    int folds = 5;
    Metric metric = Metric::mcc;
    TrainOptions train_options;
    int threads = 0;  // 0: hardware concurrency
};

// One class-weighted RBF engine per property (grid-searched), plus per-property
// effectiveness measured by reprocessing the training set. Metrics that can go
// negative (MCC) are clamped at zero so the knowledge base stays in [0, 1].
std::pair<PropertyEnsemble, KnowledgeBase> train_ensemble(const Dataset& train,
                                                          const EnsembleConfig& cfg);

Verdict decide(const PropertyEnsemble& ensemble, const KnowledgeBase& kb, const FeatureVector& x,
               double threshold = 0.05);

struct Rationale {
    std::string text;
    nlohmann::json json;
};

Rationale compose_rationale(const Verdict& v, const KnowledgeBase& kb);

void save_kb(const KnowledgeBase& kb, const std::string& path);
KnowledgeBase load_kb(const std::string& path);

}  // namespace sentinel
