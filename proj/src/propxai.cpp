#include "sentinel/propxai.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "sentinel/util.hpp"

namespace sentinel {

const std::vector<Property>& enumerate_properties() {
    static const std::vector<Property> props = [] {
        std::vector<Property> out;
        for (uint8_t bits = 1; bits < (1u << kNumFeatures); ++bits)
            out.push_back(Property{0, FeatureMask{bits}});
        // ascending cardinality, then lexicographic in canonical feature order
        std::sort(out.begin(), out.end(), [](const Property& a, const Property& b) {
            int ca = a.features.count(), cb = b.features.count();
            if (ca != cb) return ca < cb;
            std::vector<int> ia, ib;
            for (int i = 0; i < kNumFeatures; ++i) {
                if (a.features.has(i)) ia.push_back(i);
                if (b.features.has(i)) ib.push_back(i);
            }
            return ia < ib;
        });
        for (size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i) + 1;
        return out;
    }();
    return props;
}

const Property& property_by_id(int id) {
    if (id < 1 || id > kNumProperties)
        throw DataError("property id out of range: " + std::to_string(id));
    return enumerate_properties()[static_cast<size_t>(id) - 1];
}

double explainability(const Property& p, int n_features) {
    int card = p.features.count();
    return 1.0 - static_cast<double>(card - 1) / static_cast<double>(n_features - 1);
}

double KnowledgeBase::total() const {
    double t = 0.0;
    for (double w : weights) t += w;
    return t;
}

nlohmann::json KnowledgeBase::to_json() const {
    nlohmann::json w = nlohmann::json::object();
    for (int id = 1; id <= kNumProperties; ++id) w[std::to_string(id)] = hex_double(weight(id));
    return nlohmann::json{{"metric", metric_name(metric)}, {"weights", w}};
}

KnowledgeBase KnowledgeBase::from_json(const nlohmann::json& j) {
    KnowledgeBase kb;
    try {
        kb.metric = metric_from_name(j.at("metric").get<std::string>());
        const auto& w = j.at("weights");
        for (int id = 1; id <= kNumProperties; ++id)
            kb.weights[id - 1] = parse_hex_double(w.at(std::to_string(id)).get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed knowledge base JSON: ") + e.what());
    }
    return kb;
}

void save_kb(const KnowledgeBase& kb, const std::string& path) {
    write_file(path, kb.to_json().dump(2) + "\n");
}

KnowledgeBase load_kb(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": malformed JSON: " + e.what());
    }
    return KnowledgeBase::from_json(j);
}

std::pair<PropertyEnsemble, KnowledgeBase> train_ensemble(const Dataset& train,
                                                          const EnsembleConfig& cfg) {
    if (train.count(Label::trojan) == 0 || train.count(Label::non_trojan) == 0)
        throw DataError("train_ensemble: training data must contain both classes");

    KernelParams weights;
    weights.weight_trojan = balance(train, Label::trojan);
    weights.weight_non_trojan = balance(train, Label::non_trojan);

    const auto& props = enumerate_properties();
    PropertyEnsemble ensemble;
    ensemble.engines.resize(props.size());
    KnowledgeBase kb;
    kb.metric = cfg.metric;

    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;

    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= props.size()) return;
            try {
                const Property& p = props[i];
                std::vector<double> gamma_grid = cfg.gamma_grid;
                if (gamma_grid.empty())
                    gamma_grid = {0.01, 0.1, 1.0 / p.features.count(), 1.0, 10.0};
                KernelParams best = grid_search(train, p.features, cfg.C_grid, gamma_grid,
                                                cfg.folds, cfg.metric, weights,
                                                cfg.train_options);
                std::vector<std::vector<double>> X;
                std::vector<Label> y;
                X.reserve(train.records.size());
                for (const auto& r : train.records) {
                    X.push_back(p.features.project(r.features));
                    y.push_back(r.label);
                }
                TrainedSvm m = train_svm(X, y, best, cfg.train_options);
                m.mask = p.features;

                Confusion c;
                for (const auto& r : train.records)
                    c.add(m.classify(r.features), r.label);
                double w = evaluate_metric(cfg.metric, c);
                kb.weights[i] = std::clamp(w, 0.0, 1.0);
                ensemble.engines[i] = std::move(m);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    unsigned hw = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                  : std::max(1u, std::thread::hardware_concurrency());
    unsigned n_threads = std::min<unsigned>(hw, kNumProperties);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return {std::move(ensemble), std::move(kb)};
}

Verdict decide(const PropertyEnsemble& ensemble, const KnowledgeBase& kb, const FeatureVector& x,
               double threshold) {
    const auto& props = enumerate_properties();
    if (ensemble.engines.size() != props.size())
        throw DataError("decide: ensemble must hold exactly " +
                        std::to_string(kNumProperties) + " engines");
    double total = kb.total();
    if (!(total > 0.0)) throw DataError("decide: knowledge base has no positive weight");

    Verdict v;
    ByClass<double> tally;
    for (size_t i = 0; i < props.size(); ++i) {
        const TrainedSvm& engine = ensemble.engines[i];
        if (engine.mask != props[i].features)
            throw DataError("decide: engine " + std::to_string(i + 1) +
                            " does not match its property feature set");
        Label vote = engine.classify(x);
        v.raw_votes[i] = vote;
        tally.of(vote) += kb.weight(props[i].id);
    }
    v.confidence.trojan = tally.trojan / total;
    v.confidence.non_trojan = tally.non_trojan / total;
    // tie goes to non-trojan (fewer false alarms)
    v.decision = tally.trojan > tally.non_trojan ? Label::trojan : Label::non_trojan;

    for (Label cls : {Label::trojan, Label::non_trojan}) {
        auto& reg = v.registered.of(cls);
        for (const auto& p : props) {
            if (v.raw_votes[p.id - 1] != cls) continue;
            if (kb.weight(p.id) / total >= threshold) reg.push_back(p.id);
        }
        std::sort(reg.begin(), reg.end(), [&kb](int a, int b) {
            if (kb.weight(a) != kb.weight(b)) return kb.weight(a) > kb.weight(b);
            return a < b;
        });
        if (!reg.empty()) {
            double sum = 0.0;
            for (int id : reg) sum += explainability(property_by_id(id));
            v.explainability.of(cls) = sum / static_cast<double>(reg.size());
        }
    }
    return v;
}

namespace {

std::string percent(double v, int decimals = 1) {
    return format_double(v * 100.0, decimals) + "%";
}

std::string id_list(const std::vector<int>& ids) {
    std::vector<std::string> s;
    s.reserve(ids.size());
    for (int id : ids) s.push_back(std::to_string(id));
    return join(s, ", ");
}

}  // namespace

Rationale compose_rationale(const Verdict& v, const KnowledgeBase& kb) {
    Rationale r;

    nlohmann::json classes = nlohmann::json::object();
    for (Label cls : {Label::trojan, Label::non_trojan}) {
        nlohmann::json props = nlohmann::json::array();
        for (int id : v.registered.of(cls)) {
            const Property& p = property_by_id(id);
            props.push_back({{"id", id},
                             {"features", p.features.names()},
                             {"weight", kb.weight(id)}});
        }
        classes[label_short(cls)] = {{"properties", props},
                                     {"explainability", v.explainability.of(cls)}};
    }
    r.json = nlohmann::json{{"decision", label_short(v.decision)},
                            {"confidence",
                             {{"t", v.confidence.trojan}, {"n", v.confidence.non_trojan}}},
                            {"classes", classes}};

    std::ostringstream out;
    out << "decision: " << (v.decision == Label::trojan ? "trojan (1)" : "non-trojan (0)")
        << "\n\n";
    out << "Prediction  Confidence  Properties                                Explainability\n";
    for (Label cls : {Label::trojan, Label::non_trojan}) {
        const auto& reg = v.registered.of(cls);
        std::string props = reg.empty() ? "No opinion" : id_list(reg);
        std::string expl = reg.empty() ? "0%" : percent(v.explainability.of(cls));
        std::ostringstream line;
        line << std::left << std::setw(12) << (cls == Label::trojan ? "1 (t)" : "0 (n)")
             << std::setw(12) << percent(v.confidence.of(cls)) << std::setw(42) << props << expl;
        out << line.str() << "\n";
    }
    out << "\nregistered properties (weight, descending):\n";
    bool any = false;
    for (Label cls : {Label::trojan, Label::non_trojan}) {
        for (int id : v.registered.of(cls)) {
            const Property& p = property_by_id(id);
            out << "  " << label_short(cls) << "  #" << std::setw(2) << id << "  "
                << std::left << std::setw(26) << join(p.features.names(), ", ") << std::right
                << "w=" << format_double(kb.weight(id), 4)
                << "  X=" << format_double(explainability(p), 2) << "\n";
            any = true;
        }
    }
    if (!any) out << "  (none above threshold)\n";
    r.text = out.str();
    return r;
}

}  // namespace sentinel
