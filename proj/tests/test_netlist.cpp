#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "sentinel/netlist.hpp"

using namespace sentinel;

namespace {

CellLibrary lib() { return CellLibrary::builtin(); }

const Instance& only_instance(const NetlistIR& ir) {
    REQUIRE(ir.instances.size() == 1);
    return ir.instances[0];
}

}  // namespace

TEST_CASE("minimal netlist: one NAND2") {
    const char* src =
        "module top (a, b, y);\n"
        "  input a, b;\n"
        "  output y;\n"
        "  NAND2X1 u1 (.IN1(a), .IN2(b), .QN(y));\n"
        "endmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    CHECK(ir.module_name == "top");
    CHECK(ir.net_count() == 3);
    CHECK(ir.primary_inputs.size() == 2);
    CHECK(ir.primary_outputs.size() == 1);
    const Instance& u1 = only_instance(ir);
    CHECK(u1.source_line == 4);
    CHECK(u1.cell_name == "NAND2X1");
    CHECK(u1.pin_map.size() == 3);
    NetId y = *ir.find_net("y");
    CHECK(ir.net_drivers[y].kind == DriverKind::gate);
    CHECK(ir.net_drivers[y].pin == "QN");
    CHECK(ir.warnings.empty());
}

TEST_CASE("bus declaration expands msb downto lsb") {
    const char* src =
        "module top (a, y);\n"
        "  input [1:0] a;\n"
        "  output y;\n"
        "  AND2X1 u1 (.IN1(a[1]), .IN2(a[0]), .Q(y));\n"
        "endmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    REQUIRE(ir.primary_inputs.size() == 2);
    CHECK(ir.net_names[ir.primary_inputs[0]] == "a[1]");
    CHECK(ir.net_names[ir.primary_inputs[1]] == "a[0]");
}

TEST_CASE("positional and named connections give identical pin maps") {
    const char* named =
        "module m (a, b, y);\n input a, b;\n output y;\n"
        "  NOR2X1 g (.QN(y), .IN1(a), .IN2(b));\nendmodule\n";
    const char* positional =
        "module m (a, b, y);\n input a, b;\n output y;\n"
        "  NOR2X1 g (y, a, b);\nendmodule\n";  // outputs first, then inputs
    NetlistIR ir1 = parse_netlist(named, lib());
    NetlistIR ir2 = parse_netlist(positional, lib());
    auto pins_of = [](const NetlistIR& ir) {
        std::map<std::string, std::string> out;
        for (const auto& [pin, net] : ir.instances[0].pin_map) out[pin] = ir.net_names[net];
        return out;
    };
    CHECK(pins_of(ir1) == pins_of(ir2));
}

TEST_CASE("assign aliases unify net ids") {
    const char* src =
        "module m (a, y);\n input a;\n output y;\n wire t;\n"
        "  INVX1 g (.IN1(a), .QN(t));\n"
        "  assign y = t;\n"
        "endmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    CHECK(*ir.find_net("y") == *ir.find_net("t"));
    // canonical name prefers the port name
    CHECK(ir.net_names[*ir.find_net("t")] == "y");
    CHECK(ir.net_count() == 2);  // a and the unified y/t
    CHECK(ir.net_drivers[*ir.find_net("y")].kind == DriverKind::gate);
}

TEST_CASE("constants become driven nets") {
    const char* src =
        "module m (a, y);\n input a;\n output y;\n"
        "  AND2X1 g (.IN1(a), .IN2(1'b1), .Q(y));\n"
        "endmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    auto c1 = ir.find_net("$const1");
    REQUIRE(c1.has_value());
    CHECK(ir.net_drivers[*c1].kind == DriverKind::constant);
}

TEST_CASE("escaped identifiers") {
    const char* src =
        "module m (\\a[0] , y);\n input \\a[0] ;\n output y;\n"
        "  BUFX1 g (.IN1(\\a[0] ), .Q(y));\n"
        "endmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    CHECK(ir.find_net("a[0]").has_value());
}

TEST_CASE("multi-output flip-flop with one output left unconnected") {
    const char* src =
        "module m (d, c, q);\n input d, c;\n output q;\n"
        "  DFFX1 r (.D(d), .CLK(c), .Q(q));\n"
        "endmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    CHECK(ir.cell_of(ir.instances[0]).kind == CellKind::flipflop);
    CHECK(ir.instances[0].pin_map.count("QN") == 0);
}

TEST_CASE("parse errors carry line numbers") {
    const char* bad_syntax =
        "module m (a);\n input a;\n wire w\n"  // missing semicolon
        "endmodule\n";
    CHECK_THROWS_AS(parse_netlist(bad_syntax, lib()), ParseError);
    try {
        parse_netlist(bad_syntax, lib());
    } catch (const ParseError& e) {
        CHECK(e.line == 4);  // error surfaces at 'endmodule'
    }
}

TEST_CASE("unknown cell rejected under error policy, inferred otherwise") {
    const char* src =
        "module m (a, y);\n input a;\n output y;\n"
        "  mystery_sub u (.Q(y), .A(a));\n"
        "endmodule\n";
    CHECK_THROWS_AS(parse_netlist(src, lib()), ParseError);

    CellLibrary inferring = lib();
    inferring.default_policy = UnknownCellPolicy::infer_combinational;
    NetlistIR ir = parse_netlist(src, inferring);
    const CellDef& def = ir.cell_of(ir.instances[0]);
    CHECK(def.kind == CellKind::combinational);
    CHECK(def.output_pins == std::vector<std::string>{"Q"});
    CHECK(def.input_pins == std::vector<std::string>{"A"});
}

TEST_CASE("multiply-driven net is a parse error") {
    const char* two_gates =
        "module m (a, y);\n input a;\n output y;\n"
        "  INVX1 g1 (.IN1(a), .QN(y));\n"
        "  BUFX1 g2 (.IN1(a), .Q(y));\n"
        "endmodule\n";
    CHECK_THROWS_AS(parse_netlist(two_gates, lib()), ParseError);

    const char* drives_input =
        "module m (a, y);\n input a;\n output y;\n"
        "  INVX1 g1 (.IN1(y), .QN(a));\n"
        "endmodule\n";
    CHECK_THROWS_AS(parse_netlist(drives_input, lib()), ParseError);

    const char* alias_two_drivers =
        "module m (a, y);\n input a;\n output y;\n wire t;\n"
        "  INVX1 g1 (.IN1(a), .QN(t));\n"
        "  INVX1 g2 (.IN1(a), .QN(y));\n"
        "  assign y = t;\n"
        "endmodule\n";
    CHECK_THROWS_AS(parse_netlist(alias_two_drivers, lib()), ParseError);
}

TEST_CASE("instance with no connected output pin is rejected") {
    const char* src =
        "module m (a, y);\n input a;\n output y;\n"
        "  INVX1 g1 (.IN1(a));\n"
        "  BUFX1 g2 (.IN1(a), .Q(y));\n"
        "endmodule\n";
    CHECK_THROWS_AS(parse_netlist(src, lib()), ParseError);
}

TEST_CASE("undeclared nets are rejected with a helpful message") {
    const char* src =
        "module m (a, y);\n input a;\n output y;\n"
        "  INVX1 g1 (.IN1(nowhere), .QN(y));\n"
        "endmodule\n";
    CHECK_THROWS_WITH_AS(parse_netlist(src, lib()),
                         doctest::Contains("undeclared net 'nowhere'"), ParseError);
}

TEST_CASE("undriven primary output records a warning") {
    const char* src =
        "module m (a, y, z);\n input a;\n output y, z;\n"
        "  INVX1 g (.IN1(a), .QN(y));\n"
        "endmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    REQUIRE(ir.warnings.size() == 1);
    CHECK(ir.warnings[0].find("'z'") != std::string::npos);

    // driven + floating partition covers all nets
    size_t driven = 0, floating = 0;
    for (NetId n = 0; n < static_cast<NetId>(ir.net_count()); ++n)
        (ir.net_drivers[n].kind == DriverKind::none ? floating : driven)++;
    CHECK(driven + floating == ir.net_count());
    CHECK(floating == 1);
}

TEST_CASE("reprint round-trip preserves counts and port sets") {
    const char* src =
        "module m (a, b, y);\n"
        "  input [1:0] a;\n"
        "  input b;\n"
        "  output y;\n"
        "  wire t1, t2;\n"
        "  NAND2X1 g1 (.IN1(a[1]), .IN2(a[0]), .QN(t1));\n"
        "  DFFX1 r1 (.D(t1), .CLK(b), .Q(t2));\n"
        "  assign y = t2;\n"
        "endmodule\n";
    NetlistIR ir1 = parse_netlist(src, lib());
    std::string printed = emit_verilog(ir1);
    NetlistIR ir2 = parse_netlist(printed, lib());
    std::string printed2 = emit_verilog(ir2);

    CHECK(ir1.instances.size() == ir2.instances.size());
    CHECK(ir1.net_count() == ir2.net_count());
    auto port_names = [](const NetlistIR& ir, const std::vector<NetId>& ids) {
        std::set<std::string> out;
        for (NetId n : ids) out.insert(ir.net_names[n]);
        return out;
    };
    CHECK(port_names(ir1, ir1.primary_inputs) == port_names(ir2, ir2.primary_inputs));
    CHECK(port_names(ir1, ir1.primary_outputs) == port_names(ir2, ir2.primary_outputs));
    CHECK(printed == printed2);
}

TEST_CASE("cell library config document") {
    const char* doc = R"({"cells": [
        {"name": "NAND4X1", "kind": "comb", "inputs": ["A", "B", "C", "D"], "outputs": ["QN"]},
        {"name": "MYDFF", "kind": "ff", "inputs": ["D", "CLK"], "outputs": ["Q"]}
    ]})";
    CellLibrary cl = CellLibrary::from_json_text(doc);
    const CellDef* nand4 = cl.find("NAND4X1");
    REQUIRE(nand4 != nullptr);
    CHECK(nand4->input_pins.size() == 4);
    CHECK(nand4->kind == CellKind::combinational);
    const CellDef* dff = cl.find("MYDFF");
    REQUIRE(dff != nullptr);
    CHECK(dff->kind == CellKind::flipflop);

    SUBCASE("empty document gives empty library") {
        CellLibrary empty = CellLibrary::from_json_text(R"({"cells": []})");
        CHECK(empty.size() == 0);
        CHECK(empty.find("NAND2X1") == nullptr);
        const char* src =
            "module m (a, y);\n input a;\n output y;\n"
            "  INVX1 g (.IN1(a), .QN(y));\nendmodule\n";
        CHECK_THROWS_AS(parse_netlist(src, empty), ParseError);
    }
    SUBCASE("duplicate cells rejected") {
        const char* dup = R"({"cells": [
            {"name": "X", "kind": "comb", "inputs": ["A"], "outputs": ["Y"]},
            {"name": "X", "kind": "comb", "inputs": ["A"], "outputs": ["Y"]}
        ]})";
        CHECK_THROWS_AS(CellLibrary::from_json_text(dup), DataError);
    }
    SUBCASE("cell without outputs rejected") {
        const char* no_out =
            R"({"cells": [{"name": "X", "kind": "comb", "inputs": ["A"], "outputs": []}]})";
        CHECK_THROWS_AS(CellLibrary::from_json_text(no_out), DataError);
    }
    SUBCASE("malformed document rejected") {
        CHECK_THROWS_AS(CellLibrary::from_json_text("{"), DataError);
        CHECK_THROWS_AS(CellLibrary::from_json_text(R"({"no_cells": 1})"), DataError);
    }
}

TEST_CASE("builtin library covers the families the generator emits") {
    CellLibrary cl = lib();
    for (const char* name : {"NAND2X1", "NOR4X1", "AND8X1", "XOR2X1", "INVX1", "BUFX1",
                             "MUX2X1", "DFFX1", "NAND4X1"})
        CHECK(cl.find(name) != nullptr);
    CHECK(cl.find("DFFX1")->kind == CellKind::flipflop);
}
