#include "sentinel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "sentinel/util.hpp"

namespace sentinel {

namespace {

std::tuple<const std::string&, const std::string&, const std::string&> key_of(
    const NetRecord& r) {
    return {r.origin.part, r.origin.version, r.origin.net};
}

void check_duplicates(const std::vector<NetRecord>& records) {
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (const auto& r : records) {
        if (!seen.insert({r.origin.part, r.origin.version, r.origin.net}).second)
            throw DataError("duplicate record (" + r.origin.part + ", " + r.origin.version +
                            ", " + r.origin.net + ")");
    }
}

}  // namespace

size_t Dataset::count(Label l) const {
    return static_cast<size_t>(
        std::count_if(records.begin(), records.end(),
                      [l](const NetRecord& r) { return r.label == l; }));
}

void Dataset::append(const Dataset& other) {
    records.insert(records.end(), other.records.begin(), other.records.end());
    source_manifest.insert(source_manifest.end(), other.source_manifest.begin(),
                           other.source_manifest.end());
    check_duplicates(records);
}

void sort_canonical(std::vector<NetRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const NetRecord& a, const NetRecord& b) { return key_of(a) < key_of(b); });
}

std::string to_csv(const Dataset& ds) {
    std::ostringstream out;
    out << kCsvHeader << "\n";
    for (const auto& r : ds.records) {
        const auto f = r.features;
        out << csv_escape(r.origin.part) << ',' << csv_escape(r.origin.version) << ','
            << r.origin.line << ',' << csv_escape(r.origin.name) << ','
            << csv_escape(r.origin.net) << ',' << f.lgfi << ',' << f.ffi << ',' << f.ffo << ','
            << f.pi << ',' << f.po << ',' << static_cast<int>(r.label) << "\n";
    }
    return out.str();
}

Dataset from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    Dataset ds;
    auto parse_int = [&line_no](const std::string& s, const char* what) {
        try {
            size_t used = 0;
            int v = std::stoi(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ParseError("bad " + std::string(what) + " value '" + s + "'", line_no);
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != kCsvHeader)
                throw ParseError("unexpected CSV header (want '" + std::string(kCsvHeader) + "')",
                                 line_no);
            continue;
        }
        if (line.empty()) continue;
        auto fields = csv_split_line(line, line_no);
        if (fields.size() != 11)
            throw ParseError("expected 11 fields, got " + std::to_string(fields.size()), line_no);
        NetRecord r;
        r.origin.part = fields[0];
        r.origin.version = fields[1];
        r.origin.line = parse_int(fields[2], "line");
        r.origin.name = fields[3];
        r.origin.net = fields[4];
        r.features.lgfi = parse_int(fields[5], "LGFi");
        r.features.ffi = parse_int(fields[6], "FFi");
        r.features.ffo = parse_int(fields[7], "FFo");
        r.features.pi = parse_int(fields[8], "PI");
        r.features.po = parse_int(fields[9], "PO");
        int cls = parse_int(fields[10], "class");
        if (cls != 0 && cls != 1) throw ParseError("class must be 0 or 1", line_no);
        r.label = cls ? Label::trojan : Label::non_trojan;
        auto fa = r.features.as_array();
        for (int i = 0; i < kNumFeatures; ++i)
            if (fa[i] < 0)
                throw ParseError(std::string(kFeatureNames[i]) + " must be non-negative",
                                 line_no);
        ds.records.push_back(std::move(r));
    }
    check_duplicates(ds.records);
    return ds;
}

void write_csv_file(const Dataset& ds, const std::string& path) {
    write_file(path, to_csv(ds));
}

Dataset read_csv_file(const std::string& path) {
    try {
        return from_csv(read_file(path));
    } catch (const ParseError& e) {
        throw DataError(path + ":" + e.what());
    }
}

SplitResult split(const Dataset& ds, double test_fraction, uint64_t seed) {
    if (ds.records.empty()) throw DataError("split: empty dataset");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw DataError("split: test_fraction must be in (0, 1)");

    std::vector<NetRecord> sorted = ds.records;
    sort_canonical(sorted);

    // Hand-rolled Fisher-Yates; std::shuffle's draw is not pinned across
    // standard library implementations.
    std::vector<size_t> idx(sorted.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    for (size_t i = idx.size() - 1; i > 0; --i) {
        size_t j = static_cast<size_t>(rng() % (i + 1));
        std::swap(idx[i], idx[j]);
    }

    size_t n_test = static_cast<size_t>(std::llround(test_fraction * sorted.size()));
    n_test = std::min(n_test, sorted.size());

    SplitResult out;
    out.seed = seed;
    out.test_fraction = test_fraction;
    std::vector<uint8_t> in_test(sorted.size(), 0);
    for (size_t i = 0; i < n_test; ++i) in_test[idx[i]] = 1;
    for (size_t i = 0; i < sorted.size(); ++i)
        (in_test[i] ? out.test : out.train).records.push_back(sorted[i]);
    out.train.source_manifest = ds.source_manifest;
    out.test.source_manifest = ds.source_manifest;
    return out;
}

nlohmann::json split_manifest(const SplitResult& s) {
    nlohmann::json keys = nlohmann::json::array();
    for (const auto& r : s.test.records)
        keys.push_back({{"part", r.origin.part},
                        {"version", r.origin.version},
                        {"net", r.origin.net}});
    return nlohmann::json{
        {"seed", s.seed}, {"test_fraction", s.test_fraction}, {"test_keys", keys}};
}

double balance_from_counts(size_t non_trojan, size_t trojan, Label cls) {
    if (cls == Label::non_trojan) return 1.0;
    if (trojan == 0) throw DataError("balance undefined: dataset contains no trojan records");
    return static_cast<double>(non_trojan) / static_cast<double>(trojan);
}

double balance(const Dataset& ds, Label cls) {
    return balance_from_counts(ds.count(Label::non_trojan), ds.count(Label::trojan), cls);
}

}  // namespace sentinel
