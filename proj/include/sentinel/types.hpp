#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

enum class Label : int { non_trojan = 0, trojan = 1 };

inline constexpr int kNumFeatures = 5;

// Canonical feature order used everywhere: CSV columns, masks, properties.
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames{
    "LGFi", "FFi", "FFo", "PI", "PO"};

struct FeatureVector {
    int lgfi = 0;
    int ffi = 0;
    int ffo = 0;
    int pi = 0;
    int po = 0;

    std::array<int, kNumFeatures> as_array() const { return {lgfi, ffi, ffo, pi, po}; }
    static FeatureVector from_array(const std::array<int, kNumFeatures>& a) {
        return FeatureVector{a[0], a[1], a[2], a[3], a[4]};
    }
    bool operator==(const FeatureVector&) const = default;
};

// Which of the five features a model consumes; bit i follows kFeatureNames.
struct FeatureMask {
    uint8_t bits = 0x1f;

    bool has(int i) const { return (bits >> i) & 1u; }
    int count() const;
    std::vector<std::string> names() const;
    std::vector<double> project(const FeatureVector& fv) const;

    static FeatureMask all() { return FeatureMask{0x1f}; }
    static FeatureMask of(std::initializer_list<int> idxs);
    static FeatureMask from_names(const std::vector<std::string>& names);

    bool operator==(const FeatureMask&) const = default;
};

// Where a training sample lives in its source netlist; "net" is the driving
// instance pin in dotted form, e.g. U294.QN.
struct Origin {
    std::string part;
    std::string version;
    int line = 0;
    std::string name;  // cell name of the driving gate
    std::string net;

    bool operator==(const Origin&) const = default;
};

struct NetRecord {
    Origin origin;
    FeatureVector features;
    Label label = Label::non_trojan;

    bool operator==(const NetRecord&) const = default;
};

inline const char* label_short(Label l) { return l == Label::trojan ? "t" : "n"; }

}  // namespace sentinel
