#include "sentinel/casexai.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "sentinel/util.hpp"

namespace sentinel {

size_t TrainingIndex::total_refs() const {
    size_t n = 0;
    for (const auto& [key, e] : entries) n += e.trojan_refs.size() + e.nontrojan_refs.size();
    return n;
}

TrainingIndex build_index(const Dataset& train) {
    if (train.records.empty()) throw DataError("build_index: empty training set");
    TrainingIndex ti;
    ti.balance_t = balance(train, Label::trojan);  // throws when no trojans
    for (const auto& r : train.records) {
        FeatureKey key = r.features.as_array();
        IndexEntry& e = ti.entries[key];
        (r.label == Label::trojan ? e.trojan_refs : e.nontrojan_refs).push_back(r.origin);
    }
    return ti;
}

double shell_weight(int count, double class_balance, double distance) {
    double d1 = distance + 1.0;
    return static_cast<double>(count) * class_balance / (d1 * d1);
}

std::vector<NeighborShell> knn_query(const TrainingIndex& ti, const FeatureVector& x, int k) {
    if (ti.entries.empty()) throw DataError("knn_query: empty training index");
    if (k < 1) throw UsageError("knn_query: k must be >= 1");

    FeatureKey q = x.as_array();
    std::vector<std::pair<long, FeatureKey>> ranked;  // squared distance, key
    ranked.reserve(ti.entries.size());
    for (const auto& [key, entry] : ti.entries) {
        long d2 = 0;
        for (int i = 0; i < kNumFeatures; ++i) {
            long d = key[i] - q[i];
            d2 += d * d;
        }
        ranked.emplace_back(d2, key);
    }
    std::sort(ranked.begin(), ranked.end());

    size_t take = std::min<size_t>(static_cast<size_t>(k), ranked.size());
    // include every key tied with the k-th distance
    while (take < ranked.size() && ranked[take].first == ranked[take - 1].first) ++take;

    std::vector<NeighborShell> shells;
    shells.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        const auto& [d2, key] = ranked[i];
        const IndexEntry& e = ti.entries.at(key);
        NeighborShell s;
        s.dist_sq = d2;
        s.distance = std::sqrt(static_cast<double>(d2));
        s.key = key;
        s.t_count = static_cast<int>(e.trojan_refs.size());
        s.n_count = static_cast<int>(e.nontrojan_refs.size());
        s.w_t = shell_weight(s.t_count, ti.balance_t, s.distance);
        s.w_n = shell_weight(s.n_count, 1.0, s.distance);
        s.trojan_refs = e.trojan_refs;
        s.nontrojan_refs = e.nontrojan_refs;
        shells.push_back(std::move(s));
    }
    return shells;
}

ByClass<double> correspondence(const std::vector<NeighborShell>& shells) {
    if (shells.empty()) throw DataError("correspondence: no shells");
    double wt = 0.0, wn = 0.0;
    for (const auto& s : shells) {
        wt += s.w_t;
        wn += s.w_n;
    }
    double total = wt + wn;
    if (!(total > 0.0)) throw DataError("correspondence: zero total weight");
    ByClass<double> c;
    c.trojan = wt / total;
    c.non_trojan = wn / total;
    return c;
}

CaseExplanation explain_case(const TrainedSvm& model, const TrainingIndex& ti,
                             const FeatureVector& x, int k) {
    if (model.mask != FeatureMask::all())
        throw DataError("explain_case: the case-based model must use all five features");
    CaseExplanation ce;
    ce.prediction = model.classify(x);
    ce.shells = knn_query(ti, x, k);
    for (const auto& s : ce.shells) {
        ce.sum_w.trojan += s.w_t;
        ce.sum_w.non_trojan += s.w_n;
    }
    ce.corr = correspondence(ce.shells);
    Label knn_says =
        ce.corr.trojan > ce.corr.non_trojan ? Label::trojan : Label::non_trojan;
    ce.agrees = knn_says == ce.prediction;
    return ce;
}

double agreement_rate(const TrainedSvm& model, const TrainingIndex& ti, const Dataset& test,
                      int k) {
    if (test.records.empty()) throw DataError("agreement_rate: empty test set");
    size_t agree = 0;
    for (const auto& r : test.records)
        if (explain_case(model, ti, r.features, k).agrees) ++agree;
    return static_cast<double>(agree) / static_cast<double>(test.records.size());
}

namespace {

std::string key_str(const FeatureKey& k) {
    std::ostringstream out;
    out << "<";
    for (int i = 0; i < kNumFeatures; ++i) out << (i ? ", " : "") << k[i];
    out << ">";
    return out.str();
}

std::string origin_str(const Origin& o) {
    std::ostringstream out;
    out << "part " << o.part << ", version " << o.version << ", line " << o.line << ", name "
        << o.name << ", net " << o.net;
    return out.str();
}

}  // namespace

std::string render_case_report(const CaseExplanation& ce, bool with_refs) {
    std::ostringstream out;
    out << "prediction: "
        << (ce.prediction == Label::trojan ? "trojan (1)" : "non-trojan (0)") << "\n\n";
    out << "Distance  Feature Values        t:n               w(t)       w(n)\n";
    long t_total = 0, n_total = 0;
    for (const auto& s : ce.shells) {
        std::ostringstream line;
        line << std::left << std::setw(10) << format_double(s.distance, 2) << std::setw(22)
             << key_str(s.key) << std::setw(14)
             << (std::to_string(s.t_count) + ":" + std::to_string(s.n_count)) << std::right
             << std::setw(9) << format_double(s.w_t, 2) << "  " << std::setw(9)
             << format_double(s.w_n, 2);
        out << line.str() << "\n";
        t_total += s.t_count;
        n_total += s.n_count;
    }
    {
        std::ostringstream line;
        line << std::left << std::setw(10) << "Sum" << std::setw(22) << "" << std::setw(14)
             << (std::to_string(t_total) + "+" + std::to_string(n_total) + "=" +
                 std::to_string(t_total + n_total))
             << std::right << std::setw(9) << format_double(ce.sum_w.trojan, 2) << "  "
             << std::setw(9) << format_double(ce.sum_w.non_trojan, 2);
        out << line.str() << "\n";
    }
    out << "Correspondence: t " << format_double(ce.corr.trojan * 100.0, 1) << "%, n "
        << format_double(ce.corr.non_trojan * 100.0, 1) << "%\n";
    out << "KNN " << (ce.agrees ? "corresponds with" : "conflicts with")
        << " the SVM decision\n";
    if (with_refs) {
        out << "\nreferences:\n";
        for (const auto& s : ce.shells) {
            out << "  at " << key_str(s.key) << " (d=" << format_double(s.distance, 2) << "):\n";
            for (const auto& o : s.trojan_refs) out << "    [t] " << origin_str(o) << "\n";
            for (const auto& o : s.nontrojan_refs) out << "    [n] " << origin_str(o) << "\n";
        }
    }
    return out.str();
}

namespace {

nlohmann::json origin_json(const Origin& o) {
    return {{"part", o.part},
            {"version", o.version},
            {"line", o.line},
            {"name", o.name},
            {"net", o.net}};
}

Origin origin_from_json(const nlohmann::json& j) {
    Origin o;
    o.part = j.at("part").get<std::string>();
    o.version = j.at("version").get<std::string>();
    o.line = j.at("line").get<int>();
    o.name = j.at("name").get<std::string>();
    o.net = j.at("net").get<std::string>();
    return o;
}

}  // namespace

nlohmann::json case_explanation_json(const CaseExplanation& ce) {
    nlohmann::json shells = nlohmann::json::array();
    for (const auto& s : ce.shells) {
        nlohmann::json refs = nlohmann::json::array();
        for (const auto& o : s.trojan_refs) refs.push_back(origin_json(o));
        for (const auto& o : s.nontrojan_refs) refs.push_back(origin_json(o));
        shells.push_back({{"distance", s.distance},
                          {"key", s.key},
                          {"t", s.t_count},
                          {"n", s.n_count},
                          {"w_t", s.w_t},
                          {"w_n", s.w_n},
                          {"refs", refs}});
    }
    return nlohmann::json{
        {"prediction", label_short(ce.prediction)},
        {"correspondence", {{"t", ce.corr.trojan}, {"n", ce.corr.non_trojan}}},
        {"agrees", ce.agrees},
        {"shells", shells}};
}

nlohmann::json TrainingIndex::to_json() const {
    // sorted by key for stable artifact bytes
    std::vector<FeatureKey> keys;
    keys.reserve(entries.size());
    for (const auto& [key, e] : entries) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& key : keys) {
        const IndexEntry& e = entries.at(key);
        nlohmann::json t = nlohmann::json::array(), n = nlohmann::json::array();
        for (const auto& o : e.trojan_refs) t.push_back(origin_json(o));
        for (const auto& o : e.nontrojan_refs) n.push_back(origin_json(o));
        arr.push_back({{"key", key}, {"trojan_refs", t}, {"nontrojan_refs", n}});
    }
    return nlohmann::json{{"balance_t", hex_double(balance_t)}, {"entries", arr}};
}

TrainingIndex TrainingIndex::from_json(const nlohmann::json& j) {
    TrainingIndex ti;
    try {
        ti.balance_t = parse_hex_double(j.at("balance_t").get<std::string>());
        for (const auto& e : j.at("entries")) {
            FeatureKey key{};
            const auto& kj = e.at("key");
            if (!kj.is_array() || kj.size() != kNumFeatures)
                throw DataError("training index: key must have 5 entries");
            for (int i = 0; i < kNumFeatures; ++i) key[i] = kj[i].get<int>();
            IndexEntry entry;
            for (const auto& o : e.at("trojan_refs")) entry.trojan_refs.push_back(origin_from_json(o));
            for (const auto& o : e.at("nontrojan_refs"))
                entry.nontrojan_refs.push_back(origin_from_json(o));
            if (!ti.entries.emplace(key, std::move(entry)).second)
                throw DataError("training index: duplicate key");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed training index JSON: ") + e.what());
    }
    return ti;
}

void save_index(const TrainingIndex& ti, const std::string& path) {
    write_file(path, ti.to_json().dump(2) + "\n");
}

TrainingIndex load_index(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": malformed JSON: " + e.what());
    }
    return TrainingIndex::from_json(j);
}

}  // namespace sentinel
