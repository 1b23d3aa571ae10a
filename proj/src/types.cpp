#include "sentinel/types.hpp"

#include "sentinel/util.hpp"

namespace sentinel {

int FeatureMask::count() const {
    int n = 0;
    for (int i = 0; i < kNumFeatures; ++i)
        if (has(i)) ++n;
    return n;
}

std::vector<std::string> FeatureMask::names() const {
    std::vector<std::string> out;
    for (int i = 0; i < kNumFeatures; ++i)
        if (has(i)) out.emplace_back(kFeatureNames[i]);
    return out;
}

std::vector<double> FeatureMask::project(const FeatureVector& fv) const {
    std::vector<double> out;
    auto a = fv.as_array();
    for (int i = 0; i < kNumFeatures; ++i)
        if (has(i)) out.push_back(static_cast<double>(a[i]));
    return out;
}

FeatureMask FeatureMask::of(std::initializer_list<int> idxs) {
    FeatureMask m{0};
    for (int i : idxs) m.bits |= static_cast<uint8_t>(1u << i);
    return m;
}

FeatureMask FeatureMask::from_names(const std::vector<std::string>& names) {
    FeatureMask m{0};
    for (const auto& n : names) {
        bool found = false;
        for (int i = 0; i < kNumFeatures; ++i) {
            if (to_lower(n) == to_lower(std::string(kFeatureNames[i]))) {
                m.bits |= static_cast<uint8_t>(1u << i);
                found = true;
                break;
            }
        }
        if (!found) throw DataError("unknown feature name: '" + n + "'");
    }
    return m;
}

}  // namespace sentinel
