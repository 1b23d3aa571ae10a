#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/types.hpp"

namespace sentinel {

struct SourceEntry {
    std::string part, version, path;
};

struct Dataset {
    std::vector<NetRecord> records;
    std::vector<SourceEntry> source_manifest;

    size_t size() const { return records.size(); }
    size_t count(Label l) const;
    // Rejects duplicate (part, version, net) triples.
    void append(const Dataset& other);
};

inline constexpr const char* kCsvHeader = "part,version,line,name,net,LGFi,FFi,FFo,PI,PO,class";

std::string to_csv(const Dataset& ds);
Dataset from_csv(const std::string& text);
void write_csv_file(const Dataset& ds, const std::string& path);
Dataset read_csv_file(const std::string& path);

struct SplitResult {
    Dataset train, test;
    uint64_t seed = 0;
    double test_fraction = 0.0;
};

// Records are canonically sorted by (part, version, net) before the seeded
// shuffle, so the partition does not depend on input order. Both halves are
// returned in canonical order.
SplitResult split(const Dataset& ds, double test_fraction, uint64_t seed);

nlohmann::json split_manifest(const SplitResult& s);

// Eq: b(trojan) = |non-trojan| / |trojan|, b(non-trojan) = 1.
double balance(const Dataset& ds, Label cls);
double balance_from_counts(size_t non_trojan, size_t trojan, Label cls);

void sort_canonical(std::vector<NetRecord>& records);

}  // namespace sentinel
