#include "sentinel/featex.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <regex>
#include <set>

namespace sentinel {

namespace {
constexpr int kUnreached = std::numeric_limits<int>::max();
}

std::vector<std::string> FeatureConfig::default_excluded_ff_pins() {
    return {"CLK", "CK", "CP", "CLOCK", "RST",  "RSTB", "RESET", "RESETB",
            "SET", "SETB", "CLR", "CLRB", "PRE", "PREB", "SE",   "SI"};
}

bool FeatureConfig::is_excluded_ff_pin(const std::string& pin) const {
    std::string p = to_lower(pin);
    for (const auto& e : excluded_ff_pins)
        if (to_lower(e) == p) return true;
    return false;
}

CircuitGraph build_graph(const NetlistIR& ir, FeatureConfig cfg) {
    CircuitGraph g;
    g.ir_ = &ir;
    g.cfg_ = std::move(cfg);
    g.net_driver_node_.assign(ir.net_count(), -1);
    g.net_consumer_edges_.assign(ir.net_count(), {});

    // gate nodes sorted by instance name for reproducible ordering
    std::vector<int> order(ir.instances.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&ir](int a, int b) {
        return ir.instances[a].name < ir.instances[b].name;
    });

    std::vector<int> gate_node(ir.instances.size(), -1);
    for (int inst_idx : order) {
        GraphNode n;
        n.kind = GraphNode::Kind::gate;
        n.instance = inst_idx;
        n.name = ir.instances[inst_idx].name;
        gate_node[inst_idx] = static_cast<int>(g.nodes_.size());
        g.nodes_.push_back(std::move(n));
    }
    for (NetId net : ir.primary_inputs) {
        GraphNode n;
        n.kind = GraphNode::Kind::pi_term;
        n.net = net;
        n.name = ir.net_names[net];
        g.net_driver_node_[net] = static_cast<int>(g.nodes_.size());
        g.nodes_.push_back(std::move(n));
    }
    std::vector<int> po_node(ir.primary_outputs.size(), -1);
    for (size_t i = 0; i < ir.primary_outputs.size(); ++i) {
        GraphNode n;
        n.kind = GraphNode::Kind::po_term;
        n.net = ir.primary_outputs[i];
        n.name = ir.net_names[ir.primary_outputs[i]];
        po_node[i] = static_cast<int>(g.nodes_.size());
        g.nodes_.push_back(std::move(n));
    }
    for (NetId net = 0; net < static_cast<NetId>(ir.net_count()); ++net) {
        if (ir.net_drivers[net].kind == DriverKind::constant) {
            GraphNode n;
            n.kind = GraphNode::Kind::const_term;
            n.net = net;
            n.name = ir.net_names[net];
            g.net_driver_node_[net] = static_cast<int>(g.nodes_.size());
            g.nodes_.push_back(std::move(n));
        }
    }

    for (int inst_idx : order) {
        const Instance& inst = ir.instances[inst_idx];
        const CellDef& def = ir.cell_of(inst);
        for (const auto& pin : def.output_pins) {
            auto it = inst.pin_map.find(pin);
            if (it == inst.pin_map.end()) continue;
            g.net_driver_node_[it->second] = gate_node[inst_idx];
        }
    }

    auto add_edge = [&g](NetId net, int to, const std::string& pin) {
        int from = g.net_driver_node_[net];
        if (from < 0) return;  // floating nets carry no edges
        int idx = static_cast<int>(g.edges_.size());
        g.edges_.push_back(GraphEdge{from, to, net, pin});
        g.net_consumer_edges_[net].push_back(idx);
    };
    for (int inst_idx : order) {
        const Instance& inst = ir.instances[inst_idx];
        const CellDef& def = ir.cell_of(inst);
        for (const auto& pin : def.input_pins) {
            auto it = inst.pin_map.find(pin);
            if (it == inst.pin_map.end()) continue;
            add_edge(it->second, gate_node[inst_idx], pin);
        }
    }
    for (size_t i = 0; i < ir.primary_outputs.size(); ++i)
        add_edge(ir.primary_outputs[i], po_node[i], "");

    return g;
}

const CircuitGraph::Levels& CircuitGraph::levels() const {
    std::call_once(lazy_->once, [this] { compute_levels(lazy_->levels); });
    return lazy_->levels;
}

void CircuitGraph::compute_levels(Levels& lv) const {
    const NetlistIR& ir = *ir_;
    const size_t n_nets = ir.net_count();
    lv.up_pi.assign(n_nets, kUnreached);
    lv.up_ff.assign(n_nets, kUnreached);
    lv.down_po.assign(n_nets, kUnreached);
    lv.down_ff.assign(n_nets, kUnreached);

    auto gate_of = [this](int node) -> const Instance& {
        return ir_->instances[nodes_[node].instance];
    };
    auto kind_of = [this, &ir](int node) -> CellKind {
        return ir.cell_of(ir.instances[nodes_[node].instance]).kind;
    };

    // Downstream propagation: net -> consuming gates -> their output nets.
    // `through_ff` lets the wave cross flip-flops (counting them as a level).
    auto run_down = [&](std::vector<int>& dist, std::deque<NetId> queue, bool through_ff) {
        while (!queue.empty()) {
            NetId net = queue.front();
            queue.pop_front();
            int d = dist[net];
            for (int eidx : net_consumer_edges_[net]) {
                const GraphEdge& e = edges_[eidx];
                if (nodes_[e.to].kind != GraphNode::Kind::gate) continue;
                bool is_ff = kind_of(e.to) == CellKind::flipflop;
                if (is_ff && cfg_.is_excluded_ff_pin(e.to_pin)) continue;
                if (is_ff && !through_ff) continue;
                const Instance& inst = gate_of(e.to);
                const CellDef& def = ir.cell_of(inst);
                for (const auto& opin : def.output_pins) {
                    auto it = inst.pin_map.find(opin);
                    if (it == inst.pin_map.end()) continue;
                    NetId out = it->second;
                    if (dist[out] > d + 1) {
                        dist[out] = d + 1;
                        queue.push_back(out);
                    }
                }
            }
        }
    };

    // Upstream propagation: net -> driving gate -> its input nets.
    auto run_up = [&](std::vector<int>& dist, std::deque<NetId> queue, bool through_ff) {
        while (!queue.empty()) {
            NetId net = queue.front();
            queue.pop_front();
            int d = dist[net];
            int dn = net_driver_node_[net];
            if (dn < 0 || nodes_[dn].kind != GraphNode::Kind::gate) continue;
            bool is_ff = kind_of(dn) == CellKind::flipflop;
            if (is_ff && !through_ff) continue;
            const Instance& inst = gate_of(dn);
            const CellDef& def = ir.cell_of(inst);
            for (const auto& ipin : def.input_pins) {
                if (is_ff && cfg_.is_excluded_ff_pin(ipin)) continue;
                auto it = inst.pin_map.find(ipin);
                if (it == inst.pin_map.end()) continue;
                NetId in = it->second;
                if (dist[in] > d + 1) {
                    dist[in] = d + 1;
                    queue.push_back(in);
                }
            }
        }
    };

    // PI levels: sources are the primary inputs.
    {
        std::deque<NetId> q;
        for (NetId net : ir.primary_inputs) {
            lv.up_pi[net] = 0;
            q.push_back(net);
        }
        run_down(lv.up_pi, std::move(q), /*through_ff=*/true);
    }
    // FFi levels: sources are flip-flop output nets; the wave stops at
    // flip-flop consumers (their outputs are sources already).
    {
        std::deque<NetId> q;
        for (const auto& inst : ir.instances) {
            if (ir.cell_of(inst).kind != CellKind::flipflop) continue;
            const CellDef& def = ir.cell_of(inst);
            for (const auto& opin : def.output_pins) {
                auto it = inst.pin_map.find(opin);
                if (it == inst.pin_map.end()) continue;
                if (lv.up_ff[it->second] != 0) {
                    lv.up_ff[it->second] = 0;
                    q.push_back(it->second);
                }
            }
        }
        run_down(lv.up_ff, std::move(q), /*through_ff=*/false);
    }
    // PO levels: sources are the primary outputs.
    {
        std::deque<NetId> q;
        for (NetId net : ir.primary_outputs) {
            lv.down_po[net] = 0;
            q.push_back(net);
        }
        run_up(lv.down_po, std::move(q), /*through_ff=*/true);
    }
    // FFo levels: a net feeding a flip-flop data pin is one level away (the
    // flip-flop itself counts); the wave walks back through combinational
    // drivers only.
    {
        std::deque<NetId> q;
        for (const auto& inst : ir.instances) {
            if (ir.cell_of(inst).kind != CellKind::flipflop) continue;
            const CellDef& def = ir.cell_of(inst);
            for (const auto& ipin : def.input_pins) {
                if (cfg_.is_excluded_ff_pin(ipin)) continue;
                auto it = inst.pin_map.find(ipin);
                if (it == inst.pin_map.end()) continue;
                if (lv.down_ff[it->second] > 1) {
                    lv.down_ff[it->second] = 1;
                    q.push_back(it->second);
                }
            }
        }
        run_up(lv.down_ff, std::move(q), /*through_ff=*/false);
    }
}

FeatureVector extract_features(const CircuitGraph& g, NetId net) {
    const NetlistIR& ir = g.ir();
    if (net < 0 || net >= static_cast<NetId>(ir.net_count()))
        throw DataError("extract_features: net id out of range");
    if (ir.net_drivers[net].kind == DriverKind::none)
        throw DataError("net '" + ir.net_names[net] + "' has no driver");

    const FeatureConfig& cfg = g.config();
    const auto& lv = g.levels();
    auto capped = [&cfg](int v) { return v == kUnreached ? cfg.cap : std::min(v, cfg.cap); };

    FeatureVector fv;
    fv.ffi = capped(lv.up_ff[net]);
    fv.pi = capped(lv.up_pi[net]);
    fv.ffo = capped(lv.down_ff[net]);
    fv.po = capped(lv.down_po[net]);

    int lgfi = 0;
    const NetDriver& drv = ir.net_drivers[net];
    if (drv.kind == DriverKind::gate) {
        const Instance& g1 = ir.instances[drv.instance];
        const CellDef& def1 = ir.cell_of(g1);
        lgfi = static_cast<int>(def1.input_pins.size());
        if (def1.kind == CellKind::combinational) {
            std::set<int> seen;
            for (const auto& ipin : def1.input_pins) {
                auto it = g1.pin_map.find(ipin);
                if (it == g1.pin_map.end()) continue;
                const NetDriver& d2 = ir.net_drivers[it->second];
                if (d2.kind != DriverKind::gate) continue;
                if (!seen.insert(d2.instance).second) continue;
                lgfi += static_cast<int>(ir.cell_of(ir.instances[d2.instance]).input_pins.size());
            }
        }
    }
    fv.lgfi = std::min(lgfi, cfg.cap);
    return fv;
}

namespace {

std::vector<std::regex> compile_patterns(const std::vector<std::string>& patterns) {
    if (patterns.empty()) throw DataError("label_net: no label patterns given");
    std::vector<std::regex> regexes;
    regexes.reserve(patterns.size());
    for (const auto& p : patterns) {
        try {
            regexes.emplace_back(p, std::regex::ECMAScript | std::regex::icase);
        } catch (const std::regex_error& e) {
            throw DataError("invalid label pattern '" + p + "': " + e.what());
        }
    }
    return regexes;
}

Label label_with(const NetlistIR& ir, NetId net, const std::vector<std::regex>& regexes) {
    const NetDriver& drv = ir.net_drivers[net];
    std::vector<std::string> candidates{ir.net_names[net]};
    if (drv.kind == DriverKind::gate) candidates.push_back(ir.instances[drv.instance].name);
    for (const auto& re : regexes)
        for (const auto& s : candidates)
            if (std::regex_search(s, re)) return Label::trojan;
    return Label::non_trojan;
}

}  // namespace

Label label_net(const NetlistIR& ir, NetId net, const std::vector<std::string>& patterns) {
    return label_with(ir, net, compile_patterns(patterns));
}

std::vector<NetRecord> extract_all(const NetlistIR& ir, const std::string& part,
                                   const std::string& version,
                                   const std::vector<std::string>& patterns, FeatureConfig cfg) {
    CircuitGraph g = build_graph(ir, std::move(cfg));
    auto regexes = compile_patterns(patterns);
    std::vector<NetRecord> out;
    for (const auto& node : g.nodes()) {
        if (node.kind != GraphNode::Kind::gate) continue;
        const Instance& inst = ir.instances[node.instance];
        const CellDef& def = ir.cell_of(inst);
        for (const auto& opin : def.output_pins) {
            auto it = inst.pin_map.find(opin);
            if (it == inst.pin_map.end()) continue;
            NetRecord rec;
            rec.origin = Origin{part, version, inst.source_line, inst.cell_name,
                                inst.name + "." + opin};
            rec.features = extract_features(g, it->second);
            rec.label = label_with(ir, it->second, regexes);
            out.push_back(std::move(rec));
        }
    }
    return out;
}

}  // namespace sentinel
