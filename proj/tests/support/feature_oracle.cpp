#include "support/feature_oracle.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <vector>

namespace sentinel::testing {

namespace {

constexpr int kFar = std::numeric_limits<int>::max() / 4;

struct OracleView {
    const NetlistIR& ir;
    const FeatureConfig& cfg;

    bool is_ff(const Instance& inst) const { return ir.cell_of(inst).kind == CellKind::flipflop; }

    // connected input nets, optionally dropping clock/reset pins on flip-flops
    std::vector<NetId> input_nets(const Instance& inst, bool respect_exclusion) const {
        std::vector<NetId> nets;
        const CellDef& def = ir.cell_of(inst);
        bool ff = def.kind == CellKind::flipflop;
        for (const auto& pin : def.input_pins) {
            if (respect_exclusion && ff && cfg.is_excluded_ff_pin(pin)) continue;
            auto it = inst.pin_map.find(pin);
            if (it != inst.pin_map.end()) nets.push_back(it->second);
        }
        return nets;
    }

    std::vector<NetId> output_nets(const Instance& inst) const {
        std::vector<NetId> nets;
        for (const auto& pin : ir.cell_of(inst).output_pins) {
            auto it = inst.pin_map.find(pin);
            if (it != inst.pin_map.end()) nets.push_back(it->second);
        }
        return nets;
    }
};

// repeat "output <- min(input) + 1" sweeps until nothing changes
void relax_downstream(const OracleView& v, std::vector<int>& dist, bool through_ff) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& inst : v.ir.instances) {
            bool ff = v.is_ff(inst);
            if (ff && !through_ff) continue;
            int best = kFar;
            for (NetId in : v.input_nets(inst, true))
                best = std::min(best, dist[in]);
            if (best >= kFar) continue;
            for (NetId out : v.output_nets(inst)) {
                if (dist[out] > best + 1) {
                    dist[out] = best + 1;
                    changed = true;
                }
            }
        }
    }
}

// repeat "input <- min(output) + 1" sweeps until nothing changes
void relax_upstream(const OracleView& v, std::vector<int>& dist, bool through_ff) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& inst : v.ir.instances) {
            bool ff = v.is_ff(inst);
            if (ff && !through_ff) continue;
            int best = kFar;
            for (NetId out : v.output_nets(inst))
                best = std::min(best, dist[out]);
            if (best >= kFar) continue;
            for (NetId in : v.input_nets(inst, true)) {
                if (dist[in] > best + 1) {
                    dist[in] = best + 1;
                    changed = true;
                }
            }
        }
    }
}

}  // namespace

FeatureVector oracle_features(const NetlistIR& ir, NetId net, const FeatureConfig& cfg) {
    OracleView v{ir, cfg};
    const size_t n = ir.net_count();

    std::vector<int> up_pi(n, kFar), up_ff(n, kFar), down_po(n, kFar), down_ff(n, kFar);

    for (NetId p : ir.primary_inputs) up_pi[p] = 0;
    relax_downstream(v, up_pi, true);

    for (const auto& inst : ir.instances)
        if (v.is_ff(inst))
            for (NetId out : v.output_nets(inst)) up_ff[out] = 0;
    relax_downstream(v, up_ff, false);

    for (NetId p : ir.primary_outputs) down_po[p] = 0;
    relax_upstream(v, down_po, true);

    for (const auto& inst : ir.instances)
        if (v.is_ff(inst))
            for (NetId in : v.input_nets(inst, true)) down_ff[in] = std::min(down_ff[in], 1);
    relax_upstream(v, down_ff, false);

    auto capped = [&cfg](int d) { return std::min(d, cfg.cap); };

    FeatureVector fv;
    fv.ffi = capped(up_ff[net]);
    fv.pi = capped(up_pi[net]);
    fv.ffo = capped(down_ff[net]);
    fv.po = capped(down_po[net]);

    int lgfi = 0;
    const NetDriver& drv = ir.net_drivers[net];
    if (drv.kind == DriverKind::gate) {
        const Instance& g1 = ir.instances[drv.instance];
        const CellDef& d1 = ir.cell_of(g1);
        lgfi = static_cast<int>(d1.input_pins.size());
        if (d1.kind == CellKind::combinational) {
            std::set<int> level2;
            for (NetId in : v.input_nets(g1, false)) {
                const NetDriver& d2 = ir.net_drivers[in];
                if (d2.kind == DriverKind::gate) level2.insert(d2.instance);
            }
            for (int gi : level2)
                lgfi += static_cast<int>(ir.cell_of(ir.instances[gi]).input_pins.size());
        }
    }
    fv.lgfi = std::min(lgfi, cfg.cap);
    return fv;
}

}  // namespace sentinel::testing
