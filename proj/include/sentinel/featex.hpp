#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "sentinel/netlist.hpp"
#include "sentinel/types.hpp"

namespace sentinel {

struct FeatureConfig {
    // Level count returned when a target (flip-flop, PI, PO) is unreachable;
    // computed values are clamped to this bound.
    int cap = 64;
    // Flip-flop pins excluded from traversal, matched case-insensitively.
    // Keeps the clock/reset trees from shadowing every data path.
    std::vector<std::string> excluded_ff_pins = default_excluded_ff_pins();

    static std::vector<std::string> default_excluded_ff_pins();
    bool is_excluded_ff_pin(const std::string& pin) const;
};

struct GraphNode {
    enum class Kind { gate, pi_term, po_term, const_term };
    Kind kind = Kind::gate;
    int instance = -1;  // index into NetlistIR::instances for gates
    NetId net = -1;     // terminal nodes
    std::string name;
};

struct GraphEdge {
    int from = -1;
    int to = -1;
    NetId net = -1;
    std::string to_pin;  // consuming pin; empty for PO terminals
};

// Immutable after build_graph; feature queries for different nets may run
// concurrently (the level maps are computed once under a once_flag).
class CircuitGraph {
  public:
    const NetlistIR& ir() const { return *ir_; }
    const FeatureConfig& config() const { return cfg_; }
    const std::vector<GraphNode>& nodes() const { return nodes_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }

    int driver_node(NetId n) const { return net_driver_node_[n]; }
    const std::vector<int>& consumer_edges(NetId n) const { return net_consumer_edges_[n]; }

  private:
    friend CircuitGraph build_graph(const NetlistIR&, FeatureConfig);
    friend FeatureVector extract_features(const CircuitGraph&, NetId);

    struct Levels {
        std::vector<int> up_pi, up_ff, down_po, down_ff;
    };
    struct LazyLevels {
        std::once_flag once;
        Levels levels;
    };
    const Levels& levels() const;
    void compute_levels(Levels& lv) const;

    const NetlistIR* ir_ = nullptr;
    FeatureConfig cfg_;
    std::vector<GraphNode> nodes_;
    std::vector<GraphEdge> edges_;
    std::vector<int> net_driver_node_;
    std::vector<std::vector<int>> net_consumer_edges_;  // per net: edge indices
    std::unique_ptr<LazyLevels> lazy_ = std::make_unique<LazyLevels>();
};

// The IR must outlive the returned graph.
CircuitGraph build_graph(const NetlistIR& ir, FeatureConfig cfg = {});

// Level-counting conventions (used symmetrically by the test oracle):
//   LGFi: input-pin count of the driving gate plus the input-pin counts of
//         the distinct gates driving those inputs; a flip-flop driver stops
//         the expansion at level one; no gate driver gives 0.
//   FFi:  combinational gates on the shortest path from a flip-flop output,
//         counting the net's driver; 0 when the driver is a flip-flop.
//   PI:   gates (combinational and flip-flops traversed through data pins)
//         on the shortest path from a primary input, counting the driver;
//         0 when the net is a primary input.
//   FFo:  combinational gates strictly downstream until a flip-flop input,
//         plus one for the flip-flop itself.
//   PO:   gates strictly downstream until a primary output, flip-flops
//         counted when traversed; 0 when the net is a primary output.
FeatureVector extract_features(const CircuitGraph& g, NetId net);

// Trojan iff the driving instance name or the net name matches any pattern
// (case-insensitive ECMAScript regex search).
Label label_net(const NetlistIR& ir, NetId net, const std::vector<std::string>& patterns);

// One record per gate-driven net, ordered by (driving instance name, output
// pin order); origin.net is "<instance>.<pin>".
std::vector<NetRecord> extract_all(const NetlistIR& ir, const std::string& part,
                                   const std::string& version,
                                   const std::vector<std::string>& patterns,
                                   FeatureConfig cfg = {});

}  // namespace sentinel
