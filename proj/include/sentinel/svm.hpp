#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/dataset.hpp"
#include "sentinel/metrics.hpp"
#include "sentinel/types.hpp"

namespace sentinel {

struct KernelParams {
    double gamma = 1.0;
    double C = 1.0;
    double weight_trojan = 1.0;      // static class weighting: b(trojan)
    double weight_non_trojan = 1.0;

    double class_weight(Label l) const {
        return l == Label::trojan ? weight_trojan : weight_non_trojan;
    }
};

struct Scaler {
    std::vector<double> means, stds;  // empty => identity

    static Scaler fit(const std::vector<std::vector<double>>& X);
    std::vector<double> apply(std::span<const double> x) const;
    bool identity() const { return means.empty(); }
};

struct TrainOptions {
    double tol = 1e-3;
    long max_iter = 1'000'000;  // pair updates
    bool standardize = true;
};

// Soft-margin RBF SVM; trojan maps to +1, non-trojan to -1.
struct TrainedSvm {
    FeatureMask mask = FeatureMask::all();
    KernelParams params;
    Scaler scaler;
    std::vector<std::vector<double>> support_vectors;  // scaled space
    std::vector<double> dual_coefs;                    // alpha_i * y_i
    double bias = 0.0;
    bool converged = true;

    // x is a raw-space vector of dimension mask.count().
    double decision_value(std::span<const double> x) const;
    Label classify_projected(std::span<const double> x) const {
        return decision_value(x) > 0.0 ? Label::trojan : Label::non_trojan;
    }
    Label classify(const FeatureVector& fv) const {
        auto proj = mask.project(fv);
        return classify_projected(proj);
    }

    nlohmann::json to_json() const;
    static TrainedSvm from_json(const nlohmann::json& j);
};

// SMO with maximal-violating-pair selection. X holds raw-space vectors of a
// common dimension; requires both classes present.
TrainedSvm train_svm(const std::vector<std::vector<double>>& X, const std::vector<Label>& y,
                     const KernelParams& params, const TrainOptions& opts = {});

// Mean metric over stratified k-fold cross-validation for one grid point.
double cv_score(const Dataset& ds, FeatureMask mask, const KernelParams& params, int folds,
                Metric metric, const TrainOptions& opts = {});

// Exhaustive grid scan; ties break toward smaller C, then smaller gamma.
// weight_trojan/weight_non_trojan of the returned params come from `weights`.
KernelParams grid_search(const Dataset& ds, FeatureMask mask, const std::vector<double>& C_grid,
                         const std::vector<double>& gamma_grid, int folds, Metric metric,
                         const KernelParams& weights, const TrainOptions& opts = {});

void save_svm(const TrainedSvm& m, const std::string& path);
TrainedSvm load_svm(const std::string& path);

}  // namespace sentinel
