#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sentinel/util.hpp"

namespace sentinel {

enum class CellKind { combinational, flipflop };

struct CellDef {
    std::string name;
    CellKind kind = CellKind::combinational;
    std::vector<std::string> input_pins;
    std::vector<std::string> output_pins;

    // Positional connections follow the gate-primitive convention:
    // outputs first, then inputs.
    std::vector<std::string> positional_order() const;
};

enum class UnknownCellPolicy { error, infer_combinational };

class CellLibrary {
  public:
    UnknownCellPolicy default_policy = UnknownCellPolicy::error;

    void add(CellDef def);
    const CellDef* find(const std::string& name) const;
    size_t size() const { return cells_.size(); }
    const std::map<std::string, CellDef>& cells() const { return cells_; }

    // Config document schema:
    // {"cells":[{"name":str,"kind":"comb"|"ff","inputs":[str],"outputs":[str]}]}
    static CellLibrary from_json_text(const std::string& text);
    static CellLibrary from_json_file(const std::string& path);

    // NAND/NOR/AND/OR/XOR/XNOR 2..8 inputs, INV/BUF, MUX2/MUX4, DFF variants,
    // each with X1/X2/X4 drive strengths.
    static CellLibrary builtin();

  private:
    std::map<std::string, CellDef> cells_;
};

using NetId = int32_t;

enum class DriverKind : uint8_t { none, primary_input, gate, constant };

struct NetDriver {
    DriverKind kind = DriverKind::none;
    int32_t instance = -1;  // valid when kind == gate
    std::string pin;        // output pin on the driving instance
};

struct Instance {
    std::string name;
    std::string cell_name;
    std::map<std::string, NetId> pin_map;  // pin name -> net id
    int source_line = 0;
};

struct NetlistIR {
    std::string module_name;
    std::vector<std::string> net_names;     // net id -> canonical name
    std::vector<NetDriver> net_drivers;     // net id -> driver
    std::vector<uint8_t> net_is_pi;
    std::vector<uint8_t> net_is_po;
    std::vector<NetId> primary_inputs;      // declaration order
    std::vector<NetId> primary_outputs;
    std::vector<Instance> instances;        // file order
    std::unordered_map<std::string, NetId> name_to_net;  // aliases included
    std::unordered_map<std::string, CellDef> cell_defs;  // cells referenced
    std::vector<std::string> warnings;

    size_t net_count() const { return net_names.size(); }
    const NetDriver& driver(NetId n) const { return net_drivers[n]; }
    const CellDef& cell_of(const Instance& inst) const;
    bool is_primary_input(NetId n) const { return net_is_pi[n] != 0; }
    bool is_primary_output(NetId n) const { return net_is_po[n] != 0; }
    std::optional<NetId> find_net(const std::string& name) const;
};

// Single-module structural subset: module header, input/output/wire
// declarations (scalar or ranged), gate instantiations with named or
// positional connections, and identifier-to-identifier assign aliases.
NetlistIR parse_netlist(std::string_view text, const CellLibrary& lib);
NetlistIR parse_netlist_file(const std::string& path, const CellLibrary& lib);

// Reprint of the IR in the same subset; escaped identifiers are used for
// names that are not plain identifiers (expanded bus bits in particular).
std::string emit_verilog(const NetlistIR& ir);

}  // namespace sentinel
