#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/types.hpp"

namespace sentinel {

enum class PayloadKind { mux_leak, xor_corrupt };

PayloadKind payload_from_name(const std::string& name);
std::string payload_name(PayloadKind p);

struct TrojanSpec {
    int trigger_width = 8;  // 2..64 (the AND tree stays within two levels)
    PayloadKind payload = PayloadKind::mux_leak;
    int host_gates = 150;
    uint64_t seed = 1;
};

struct Manifest {
    std::string module_name;
    std::vector<std::string> trojan_nets;  // canonical net names
    int gate_count = 0;
    int pi_count = 0;
    int po_count = 0;
    int net_count = 0;
    int edge_count = 0;

    nlohmann::json to_json() const;
    static Manifest from_json(const nlohmann::json& j);
};

struct GeneratedNetlist {
    std::string verilog;
    Manifest manifest;
};

// Benign layered random DAG (gate arity 1-4, ~10% flip-flops) plus a
// rare-event trigger (AND tree over internal nets, flip-flop outputs
// preferred) feeding a payload: a mux inserted before a primary output or an
// XOR splice on an internal net. Trojan instances are prefixed "troj_".
// Deterministic for a fixed spec; parses with the builtin cell library.
GeneratedNetlist generate(const TrojanSpec& spec);

}  // namespace sentinel
