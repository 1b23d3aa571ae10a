#include "sentinel/synthgen.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "sentinel/util.hpp"

namespace sentinel {

PayloadKind payload_from_name(const std::string& name) {
    std::string n = to_lower(name);
    if (n == "mux" || n == "mux_leak") return PayloadKind::mux_leak;
    if (n == "xor" || n == "xor_corrupt") return PayloadKind::xor_corrupt;
    throw UsageError("unknown payload kind '" + name + "' (expected mux or xor)");
}

std::string payload_name(PayloadKind p) {
    return p == PayloadKind::mux_leak ? "mux_leak" : "xor_corrupt";
}

nlohmann::json Manifest::to_json() const {
    return nlohmann::json{{"module", module_name},   {"trojan_nets", trojan_nets},
                          {"gate_count", gate_count}, {"pi_count", pi_count},
                          {"po_count", po_count},     {"net_count", net_count},
                          {"edge_count", edge_count}};
}

Manifest Manifest::from_json(const nlohmann::json& j) {
    Manifest m;
    try {
        m.module_name = j.at("module").get<std::string>();
        m.trojan_nets = j.at("trojan_nets").get<std::vector<std::string>>();
        m.gate_count = j.at("gate_count").get<int>();
        m.pi_count = j.at("pi_count").get<int>();
        m.po_count = j.at("po_count").get<int>();
        m.net_count = j.at("net_count").get<int>();
        m.edge_count = j.at("edge_count").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed manifest JSON: ") + e.what());
    }
    return m;
}

namespace {

struct GInst {
    std::string cell, name;
    std::vector<std::pair<std::string, int>> pins;  // pin -> net index
};

struct Builder {
    std::vector<std::string> net_names;
    std::vector<GInst> instances;
    int edge_inputs = 0;

    int add_net(std::string name) {
        net_names.push_back(std::move(name));
        return static_cast<int>(net_names.size()) - 1;
    }
    void add_inst(GInst inst, int n_inputs) {
        instances.push_back(std::move(inst));
        edge_inputs += n_inputs;
    }
};

}  // namespace

GeneratedNetlist generate(const TrojanSpec& spec) {
    if (spec.host_gates < 10) throw DataError("synthgen: host_gates must be at least 10");
    if (spec.trigger_width < 2) throw DataError("synthgen: trigger_width must be at least 2");
    if (spec.trigger_width > 64)
        throw DataError("synthgen: trigger_width above 64 does not fit a two-level trigger");

    std::mt19937_64 rng(spec.seed);
    Builder b;

    const int npi = std::clamp(spec.host_gates / 10, 4, 16);
    const int npo = std::clamp(spec.host_gates / 12, 3, 12);

    std::vector<int> pi_nets;
    for (int i = 0; i < npi; ++i) pi_nets.push_back(b.add_net("pi" + std::to_string(i)));
    const int clk_net = b.add_net("clk");

    // benign DAG; pool holds nets eligible as gate inputs
    std::vector<int> pool = pi_nets;
    std::vector<int> gate_out(spec.host_gates, -1);
    std::vector<bool> gate_is_ff(spec.host_gates, false);

    auto pick_input = [&rng, &pool]() {
        size_t window = std::min<size_t>(pool.size(), 40);
        if (rng() % 5 == 0) return pool[rng() % pool.size()];
        return pool[pool.size() - 1 - (rng() % window)];
    };
    auto sample_distinct = [&](int count) {
        std::set<int> chosen;
        int attempts = 0;
        while (static_cast<int>(chosen.size()) < count) {
            if (++attempts > 200) {  // deterministic fallback for tiny pools
                for (size_t i = pool.size(); i-- > 0 && static_cast<int>(chosen.size()) < count;)
                    chosen.insert(pool[i]);
                break;
            }
            chosen.insert(pick_input());
        }
        return std::vector<int>(chosen.begin(), chosen.end());
    };

    struct ChosenCell {
        const char* base;
        const char* out_pin;
    };
    auto comb_cell = [&rng](int arity) -> ChosenCell {
        if (arity == 1) return (rng() % 2) ? ChosenCell{"INV", "QN"} : ChosenCell{"BUF", "Q"};
        static const ChosenCell families[] = {{"NAND", "QN"}, {"NOR", "QN"}, {"AND", "Q"},
                                              {"OR", "Q"},    {"XOR", "Q"}};
        return families[rng() % 5];
    };

    for (int i = 0; i < spec.host_gates; ++i) {
        bool ff = rng() % 10 == 0;
        int out = b.add_net("w" + std::to_string(i));
        gate_out[i] = out;
        gate_is_ff[i] = ff;
        GInst inst;
        inst.name = "g" + std::to_string(i);
        if (ff) {
            int d = pick_input();
            inst.cell = "DFFX1";
            inst.pins = {{"D", d}, {"CLK", clk_net}, {"Q", out}};
            b.add_inst(std::move(inst), 2);
        } else {
            // arity mix: 1 (10%), 2 (40%), 3 (30%), 4 (20%)
            int roll = static_cast<int>(rng() % 10);
            int arity = roll < 1 ? 1 : roll < 5 ? 2 : roll < 8 ? 3 : 4;
            arity = std::min<int>(arity, static_cast<int>(pool.size()));
            auto ins = sample_distinct(arity);
            ChosenCell cell = comb_cell(arity);
            inst.cell = std::string(cell.base) + (arity > 1 ? std::to_string(arity) : "") + "X1";
            for (size_t k = 0; k < ins.size(); ++k)
                inst.pins.emplace_back("IN" + std::to_string(k + 1), ins[k]);
            inst.pins.emplace_back(cell.out_pin, out);
            b.add_inst(std::move(inst), arity);
        }
        pool.push_back(out);
    }

    // primary outputs: distinct nets from the later half of the benign DAG
    std::vector<int> po_gates;
    {
        std::set<int> chosen;
        int lo = spec.host_gates / 2;
        int span = spec.host_gates - lo;
        int want = std::min(npo, span);
        int attempts = 0;
        while (static_cast<int>(chosen.size()) < want) {
            if (++attempts > 1000) {
                for (int g = lo; g < spec.host_gates && static_cast<int>(chosen.size()) < want;
                     ++g)
                    chosen.insert(g);
                break;
            }
            chosen.insert(lo + static_cast<int>(rng() % span));
        }
        po_gates.assign(chosen.begin(), chosen.end());
    }

    // trigger taps: flip-flop outputs first, then combinational outputs, all
    // from the first 70% of the DAG so the payload splice cannot form a cycle
    const int cutoff = spec.host_gates * 7 / 10;
    std::vector<int> ff_taps, comb_taps;
    for (int i = 0; i < cutoff; ++i)
        (gate_is_ff[i] ? ff_taps : comb_taps).push_back(gate_out[i]);
    if (static_cast<int>(ff_taps.size() + comb_taps.size()) < spec.trigger_width)
        throw DataError("synthgen: trigger_width " + std::to_string(spec.trigger_width) +
                        " exceeds the " + std::to_string(ff_taps.size() + comb_taps.size()) +
                        " internal nets available for taps");
    auto shuffle_vec = [&rng](std::vector<int>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
    };
    shuffle_vec(ff_taps);
    shuffle_vec(comb_taps);
    std::vector<int> taps;
    for (int n : ff_taps)
        if (static_cast<int>(taps.size()) < spec.trigger_width) taps.push_back(n);
    for (int n : comb_taps)
        if (static_cast<int>(taps.size()) < spec.trigger_width) taps.push_back(n);

    // AND tree, at most two levels of up-to-8-input gates
    std::vector<std::string> trojan_nets;
    int trigger_net = -1;
    int trigger_gates = 0;
    {
        const int W = spec.trigger_width;
        const int leaves = (W + 7) / 8;
        if (leaves == 1) {
            int out = b.add_net("troj_trigger");
            GInst inst;
            inst.cell = "AND" + std::to_string(W) + "X1";
            inst.name = "troj_trig_root";
            for (int k = 0; k < W; ++k)
                inst.pins.emplace_back("IN" + std::to_string(k + 1), taps[k]);
            inst.pins.emplace_back("Q", out);
            b.add_inst(std::move(inst), W);
            trigger_net = out;
            trigger_gates = 1;
            trojan_nets.push_back("troj_trigger");
        } else {
            std::vector<int> leaf_nets;
            int used = 0;
            for (int l = 0; l < leaves; ++l) {
                int size = W / leaves + (l < W % leaves ? 1 : 0);
                int out = b.add_net("troj_t" + std::to_string(l));
                GInst inst;
                inst.cell = "AND" + std::to_string(size) + "X1";
                inst.name = "troj_trig" + std::to_string(l);
                for (int k = 0; k < size; ++k)
                    inst.pins.emplace_back("IN" + std::to_string(k + 1), taps[used++]);
                inst.pins.emplace_back("Q", out);
                b.add_inst(std::move(inst), size);
                leaf_nets.push_back(out);
                trojan_nets.push_back("troj_t" + std::to_string(l));
            }
            int out = b.add_net("troj_trigger");
            GInst inst;
            inst.cell = "AND" + std::to_string(leaves) + "X1";
            inst.name = "troj_trig_root";
            for (size_t k = 0; k < leaf_nets.size(); ++k)
                inst.pins.emplace_back("IN" + std::to_string(k + 1), leaf_nets[k]);
            inst.pins.emplace_back("Q", out);
            b.add_inst(std::move(inst), static_cast<int>(leaf_nets.size()));
            trigger_net = out;
            trigger_gates = leaves + 1;
            trojan_nets.push_back("troj_trigger");
        }
    }

    // payload
    std::vector<std::pair<std::string, int>> po_aliases;  // assign name = net
    int mux_po_net = -1;
    std::string mux_po_name;
    if (spec.payload == PayloadKind::mux_leak) {
        size_t slot = rng() % po_gates.size();
        int victim_gate = po_gates[slot];
        int secret = gate_out[rng() % gate_out.size()];
        if (secret == gate_out[victim_gate]) secret = taps[0];
        mux_po_name = "po" + std::to_string(slot);
        mux_po_net = b.add_net(mux_po_name);
        GInst inst;
        inst.cell = "MUX2X1";
        inst.name = "troj_payload";
        inst.pins = {{"IN1", gate_out[victim_gate]},
                     {"IN2", secret},
                     {"S0", trigger_net},
                     {"Q", mux_po_net}};
        b.add_inst(std::move(inst), 3);
        trojan_nets.push_back(mux_po_name);
        for (size_t j = 0; j < po_gates.size(); ++j) {
            if (j == slot) continue;
            po_aliases.emplace_back("po" + std::to_string(j), gate_out[po_gates[j]]);
        }
    } else {
        // XOR splice on a late internal net that is not a primary output
        std::set<int> po_set(po_gates.begin(), po_gates.end());
        std::vector<int> candidates;
        for (int i = spec.host_gates * 8 / 10; i < spec.host_gates; ++i)
            if (!po_set.count(i)) candidates.push_back(i);
        if (candidates.empty())
            for (int i = spec.host_gates / 2; i < spec.host_gates; ++i)
                if (!po_set.count(i)) candidates.push_back(i);
        if (candidates.empty()) throw DataError("synthgen: no net available for the XOR payload");
        int target_gate = candidates[rng() % candidates.size()];
        int target_net = gate_out[target_gate];

        // reroute: the victim gate drives a fresh net, the XOR drives the old one
        int pre = b.add_net("pre_w" + std::to_string(target_gate));
        for (auto& inst : b.instances) {
            if (inst.name == "g" + std::to_string(target_gate)) {
                for (auto& [pin, net] : inst.pins)
                    if (net == target_net) net = pre;
            }
        }
        GInst inst;
        inst.cell = "XOR2X1";
        inst.name = "troj_payload";
        inst.pins = {{"IN1", pre}, {"IN2", trigger_net}, {"Q", target_net}};
        b.add_inst(std::move(inst), 2);
        trojan_nets.push_back(b.net_names[target_net]);
        for (size_t j = 0; j < po_gates.size(); ++j)
            po_aliases.emplace_back("po" + std::to_string(j), gate_out[po_gates[j]]);
    }

    // emit
    std::string module_name = "synth_s" + std::to_string(spec.seed);
    std::ostringstream v;
    v << "// synthetic benchmark, seed " << spec.seed << ", payload "
      << payload_name(spec.payload) << "\n";
    v << "module " << module_name << " (";
    for (int i = 0; i < npi; ++i) v << "pi" << i << ", ";
    v << "clk";
    int total_pos = static_cast<int>(po_aliases.size()) + (mux_po_net >= 0 ? 1 : 0);
    for (int j = 0; j < total_pos; ++j) v << ", po" << j;
    v << ");\n";
    for (int i = 0; i < npi; ++i) v << "  input pi" << i << ";\n";
    v << "  input clk;\n";
    for (int j = 0; j < total_pos; ++j) v << "  output po" << j << ";\n";
    for (const auto& name : b.net_names) {
        if (name.rfind("pi", 0) == 0 || name == "clk") continue;
        if (name.rfind("po", 0) == 0) continue;
        v << "  wire " << name << ";\n";
    }
    for (const auto& inst : b.instances) {
        v << "  " << inst.cell << " " << inst.name << " (";
        for (size_t k = 0; k < inst.pins.size(); ++k) {
            v << (k ? ", " : "") << "." << inst.pins[k].first << "("
              << b.net_names[inst.pins[k].second] << ")";
        }
        v << ");\n";
    }
    for (const auto& [po, net] : po_aliases)
        v << "  assign " << po << " = " << b.net_names[net] << ";\n";
    v << "endmodule\n";

    GeneratedNetlist out;
    out.verilog = v.str();
    out.manifest.module_name = module_name;
    out.manifest.trojan_nets = trojan_nets;
    out.manifest.gate_count = spec.host_gates + trigger_gates + 1;
    out.manifest.pi_count = npi + 1;
    out.manifest.po_count = total_pos;
    out.manifest.net_count = static_cast<int>(b.net_names.size());
    out.manifest.edge_count = b.edge_inputs + total_pos;
    return out;
}

}  // namespace sentinel
