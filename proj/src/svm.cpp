#include "sentinel/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "sentinel/util.hpp"

namespace sentinel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double d2 = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

// Full-matrix kernel when it fits; LRU rows otherwise.
class KernelCache {
  public:
    KernelCache(const std::vector<std::vector<double>>& X, double gamma, size_t budget_bytes)
        : X_(X), gamma_(gamma), n_(X.size()) {
        full_ = n_ * n_ * sizeof(double) <= budget_bytes;
        if (full_) {
            matrix_.resize(n_ * n_);
            for (size_t i = 0; i < n_; ++i) {
                matrix_[i * n_ + i] = 1.0;
                for (size_t j = i + 1; j < n_; ++j) {
                    double v = rbf(X_[i], X_[j], gamma_);
                    matrix_[i * n_ + j] = v;
                    matrix_[j * n_ + i] = v;
                }
            }
        } else {
            max_rows_ = std::max<size_t>(16, budget_bytes / (n_ * sizeof(double)));
        }
    }

    const double* row(size_t i) {
        if (full_) return &matrix_[i * n_];
        auto it = rows_.find(i);
        if (it != rows_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.first);
            return it->second.second.data();
        }
        if (rows_.size() >= max_rows_) {
            rows_.erase(lru_.back());
            lru_.pop_back();
        }
        std::vector<double> r(n_);
        for (size_t j = 0; j < n_; ++j) r[j] = rbf(X_[i], X_[j], gamma_);
        lru_.push_front(i);
        auto [pos, ok] = rows_.emplace(i, std::make_pair(lru_.begin(), std::move(r)));
        (void)ok;
        return pos->second.second.data();
    }

  private:
    const std::vector<std::vector<double>>& X_;
    double gamma_;
    size_t n_;
    bool full_ = false;
    std::vector<double> matrix_;
    size_t max_rows_ = 0;
    std::list<size_t> lru_;
    std::unordered_map<size_t, std::pair<std::list<size_t>::iterator, std::vector<double>>> rows_;
};

constexpr size_t kKernelBudgetBytes = 256u << 20;

}  // namespace

Scaler Scaler::fit(const std::vector<std::vector<double>>& X) {
    Scaler s;
    if (X.empty()) return s;
    size_t dim = X[0].size();
    s.means.assign(dim, 0.0);
    s.stds.assign(dim, 0.0);
    for (const auto& x : X)
        for (size_t k = 0; k < dim; ++k) s.means[k] += x[k];
    for (size_t k = 0; k < dim; ++k) s.means[k] /= static_cast<double>(X.size());
    for (const auto& x : X)
        for (size_t k = 0; k < dim; ++k) {
            double d = x[k] - s.means[k];
            s.stds[k] += d * d;
        }
    for (size_t k = 0; k < dim; ++k) {
        s.stds[k] = std::sqrt(s.stds[k] / static_cast<double>(X.size()));
        if (s.stds[k] == 0.0) s.stds[k] = 1.0;  // constant feature
    }
    return s;
}

std::vector<double> Scaler::apply(std::span<const double> x) const {
    if (identity()) return {x.begin(), x.end()};
    if (x.size() != means.size()) throw DataError("scaler dimension mismatch");
    std::vector<double> out(x.size());
    for (size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - means[k]) / stds[k];
    return out;
}

double TrainedSvm::decision_value(std::span<const double> x) const {
    size_t dim = support_vectors.empty() ? (scaler.identity() ? x.size() : scaler.means.size())
                                         : support_vectors[0].size();
    if (x.size() != dim)
        throw DataError("decision_value: expected " + std::to_string(dim) + " features, got " +
                        std::to_string(x.size()));
    std::vector<double> xs = scaler.apply(x);
    double v = bias;
    for (size_t i = 0; i < support_vectors.size(); ++i)
        v += dual_coefs[i] * rbf(xs, support_vectors[i], params.gamma);
    return v;
}

TrainedSvm train_svm(const std::vector<std::vector<double>>& X, const std::vector<Label>& y,
                     const KernelParams& params, const TrainOptions& opts) {
    const size_t n = X.size();
    if (n == 0 || y.size() != n) throw DataError("train_svm: empty or mismatched inputs");
    const size_t dim = X[0].size();
    for (const auto& x : X)
        if (x.size() != dim) throw DataError("train_svm: inconsistent feature dimensions");
    if (!(params.gamma > 0.0) || !(params.C > 0.0) || !(params.weight_trojan > 0.0) ||
        !(params.weight_non_trojan > 0.0))
        throw DataError("train_svm: gamma, C, and class weights must be positive");
    size_t n_pos = static_cast<size_t>(std::count(y.begin(), y.end(), Label::trojan));
    if (n_pos == 0 || n_pos == n)
        throw DataError("train_svm: training data must contain both classes");

    TrainedSvm model;
    model.params = params;

    std::vector<std::vector<double>> Xs;
    if (opts.standardize) {
        model.scaler = Scaler::fit(X);
        Xs.reserve(n);
        for (const auto& x : X) Xs.push_back(model.scaler.apply(x));
    } else {
        Xs = X;
    }

    std::vector<int8_t> sign(n);
    std::vector<double> cw(n);
    for (size_t i = 0; i < n; ++i) {
        sign[i] = y[i] == Label::trojan ? 1 : -1;
        cw[i] = params.C * params.class_weight(y[i]);
    }

    KernelCache cache(Xs, params.gamma, kKernelBudgetBytes);
    std::vector<double> alpha(n, 0.0), grad(n, -1.0);

    auto in_up = [&](size_t t) {
        return (sign[t] > 0 && alpha[t] < cw[t]) || (sign[t] < 0 && alpha[t] > 0.0);
    };
    auto in_low = [&](size_t t) {
        return (sign[t] < 0 && alpha[t] < cw[t]) || (sign[t] > 0 && alpha[t] > 0.0);
    };

    double m_val = 0.0, M_val = 0.0;
    long iter = 0;
    bool converged = false;
    while (iter < opts.max_iter) {
        long best_i = -1, best_j = -1;
        m_val = -kInf;
        M_val = kInf;
        for (size_t t = 0; t < n; ++t) {
            double v = -sign[t] * grad[t];
            if (in_up(t) && v > m_val) {
                m_val = v;
                best_i = static_cast<long>(t);
            }
            if (in_low(t) && v < M_val) {
                M_val = v;
                best_j = static_cast<long>(t);
            }
        }
        if (best_i < 0 || best_j < 0 || m_val - M_val <= opts.tol) {
            converged = true;
            break;
        }
        size_t i = static_cast<size_t>(best_i), j = static_cast<size_t>(best_j);
        const double* Ki = cache.row(i);
        // copy: fetching row j may evict row i in LRU mode
        std::vector<double> Ki_copy(Ki, Ki + n);
        const double* Kj = cache.row(j);

        double a = Ki_copy[i] + Kj[j] - 2.0 * Ki_copy[j];
        if (a <= 0.0) a = 1e-12;
        double step = (m_val - M_val) / a;
        double cap_i = sign[i] > 0 ? cw[i] - alpha[i] : alpha[i];
        double cap_j = sign[j] > 0 ? alpha[j] : cw[j] - alpha[j];
        step = std::min(step, std::min(cap_i, cap_j));

        alpha[i] += sign[i] * step;
        alpha[j] -= sign[j] * step;
        // snap to the box to keep the index sets exact
        for (size_t t : {i, j}) {
            if (alpha[t] < 1e-12) alpha[t] = 0.0;
            if (alpha[t] > cw[t] - 1e-12) alpha[t] = cw[t];
        }
        for (size_t t = 0; t < n; ++t) grad[t] += sign[t] * step * (Ki_copy[t] - Kj[t]);
        ++iter;
    }
    model.converged = converged;

    // bias: free vectors pin it exactly; otherwise bracket with (m+M)/2
    double free_sum = 0.0;
    size_t free_count = 0;
    for (size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < cw[t]) {
            free_sum += -sign[t] * grad[t];
            ++free_count;
        }
    }
    if (free_count > 0) {
        model.bias = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(m_val) && std::isfinite(M_val)) {
        model.bias = 0.5 * (m_val + M_val);
    } else if (std::isfinite(m_val)) {
        model.bias = m_val;
    } else if (std::isfinite(M_val)) {
        model.bias = M_val;
    } else {
        model.bias = 0.0;
    }

    for (size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            model.support_vectors.push_back(Xs[t]);
            model.dual_coefs.push_back(alpha[t] * sign[t]);
        }
    }
    return model;
}

double cv_score(const Dataset& ds, FeatureMask mask, const KernelParams& params, int folds,
                Metric metric, const TrainOptions& opts) {
    if (folds < 2) throw UsageError("cross-validation needs folds >= 2");
    std::vector<size_t> pos_idx, neg_idx;
    for (size_t i = 0; i < ds.records.size(); ++i)
        (ds.records[i].label == Label::trojan ? pos_idx : neg_idx).push_back(i);
    if (pos_idx.size() < static_cast<size_t>(folds) ||
        neg_idx.size() < static_cast<size_t>(folds))
        throw DataError("cannot stratify " + std::to_string(folds) + " folds: class counts are " +
                        std::to_string(pos_idx.size()) + " trojan / " +
                        std::to_string(neg_idx.size()) + " non-trojan");

    std::vector<int> fold_of(ds.records.size());
    for (size_t k = 0; k < pos_idx.size(); ++k) fold_of[pos_idx[k]] = static_cast<int>(k % folds);
    for (size_t k = 0; k < neg_idx.size(); ++k) fold_of[neg_idx[k]] = static_cast<int>(k % folds);

    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
        std::vector<std::vector<double>> X_train;
        std::vector<Label> y_train;
        std::vector<size_t> val;
        for (size_t i = 0; i < ds.records.size(); ++i) {
            if (fold_of[i] == f) {
                val.push_back(i);
            } else {
                X_train.push_back(mask.project(ds.records[i].features));
                y_train.push_back(ds.records[i].label);
            }
        }
        TrainedSvm m = train_svm(X_train, y_train, params, opts);
        Confusion c;
        for (size_t i : val) {
            auto x = mask.project(ds.records[i].features);
            c.add(m.classify_projected(x), ds.records[i].label);
        }
        total += evaluate_metric(metric, c);
    }
    return total / folds;
}

KernelParams grid_search(const Dataset& ds, FeatureMask mask, const std::vector<double>& C_grid,
                         const std::vector<double>& gamma_grid, int folds, Metric metric,
                         const KernelParams& weights, const TrainOptions& opts) {
    if (C_grid.empty() || gamma_grid.empty()) throw UsageError("grid_search: empty grid");
    KernelParams best = weights;
    double best_score = -kInf;
    bool have = false;
    for (double C : C_grid) {
        for (double gamma : gamma_grid) {
            KernelParams p = weights;
            p.C = C;
            p.gamma = gamma;
            double score = cv_score(ds, mask, p, folds, metric, opts);
            bool better = score > best_score;
            if (!better && score == best_score && have) {
                better = C < best.C || (C == best.C && gamma < best.gamma);
            }
            if (!have || better) {
                best = p;
                best_score = score;
                have = true;
            }
        }
    }
    return best;
}

nlohmann::json TrainedSvm::to_json() const {
    auto vec_hex = [](const std::vector<double>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (double d : v) a.push_back(hex_double(d));
        return a;
    };
    nlohmann::json svs = nlohmann::json::array();
    for (const auto& sv : support_vectors) svs.push_back(vec_hex(sv));
    return nlohmann::json{
        {"mask", mask.names()},
        {"gamma", hex_double(params.gamma)},
        {"C", hex_double(params.C)},
        {"class_weight",
         {{"trojan", hex_double(params.weight_trojan)},
          {"non_trojan", hex_double(params.weight_non_trojan)}}},
        {"scaler", {{"means", vec_hex(scaler.means)}, {"stds", vec_hex(scaler.stds)}}},
        {"svs", svs},
        {"dual_coefs", vec_hex(dual_coefs)},
        {"bias", hex_double(bias)},
        {"converged", converged}};
}

TrainedSvm TrainedSvm::from_json(const nlohmann::json& j) {
    auto vec_from = [](const nlohmann::json& a) {
        std::vector<double> v;
        for (const auto& e : a) v.push_back(parse_hex_double(e.get<std::string>()));
        return v;
    };
    TrainedSvm m;
    try {
        m.mask = FeatureMask::from_names(j.at("mask").get<std::vector<std::string>>());
        m.params.gamma = parse_hex_double(j.at("gamma").get<std::string>());
        m.params.C = parse_hex_double(j.at("C").get<std::string>());
        m.params.weight_trojan =
            parse_hex_double(j.at("class_weight").at("trojan").get<std::string>());
        m.params.weight_non_trojan =
            parse_hex_double(j.at("class_weight").at("non_trojan").get<std::string>());
        m.scaler.means = vec_from(j.at("scaler").at("means"));
        m.scaler.stds = vec_from(j.at("scaler").at("stds"));
        for (const auto& sv : j.at("svs")) m.support_vectors.push_back(vec_from(sv));
        m.dual_coefs = vec_from(j.at("dual_coefs"));
        m.bias = parse_hex_double(j.at("bias").get<std::string>());
        m.converged = j.value("converged", true);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed SVM model JSON: ") + e.what());
    }
    if (m.support_vectors.size() != m.dual_coefs.size())
        throw DataError("malformed SVM model JSON: svs/dual_coefs size mismatch");
    return m;
}

void save_svm(const TrainedSvm& m, const std::string& path) {
    write_file(path, m.to_json().dump(2) + "\n");
}

TrainedSvm load_svm(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": malformed JSON: " + e.what());
    }
    return TrainedSvm::from_json(j);
}

}  // namespace sentinel
