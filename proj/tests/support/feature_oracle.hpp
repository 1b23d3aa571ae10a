#pragma once

#include "sentinel/featex.hpp"
#include "sentinel/netlist.hpp"
#include "sentinel/types.hpp"

namespace sentinel::testing {

// Independent reference for the five per-net features: exhaustive fixpoint
// relaxation (Bellman-Ford style) working straight off the NetlistIR pin
// maps, no CircuitGraph involved. Same level-counting conventions as
// extract_features; deliberately slow and obvious.
FeatureVector oracle_features(const NetlistIR& ir, NetId net, const FeatureConfig& cfg);

}  // namespace sentinel::testing
