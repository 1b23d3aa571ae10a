#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>
#include <thread>

#include "sentinel/featex.hpp"
#include "sentinel/synthgen.hpp"
#include "support/feature_oracle.hpp"

using namespace sentinel;

namespace {

CellLibrary lib() { return CellLibrary::builtin(); }

FeatureVector features_of(const NetlistIR& ir, const std::string& net) {
    CircuitGraph g = build_graph(ir);
    return extract_features(g, *ir.find_net(net));
}

// pi1 -> b1 -> w1 -> i1 -> w2 -> [DFF r1] -> q1 -> i2 -> w3 -> b2 -> po1
const char* kChain =
    "module conv (pi1, clk, po1);\n"
    "  input pi1, clk;\n"
    "  output po1;\n"
    "  wire w1, w2, q1, w3;\n"
    "  BUFX1 b1 (.IN1(pi1), .Q(w1));\n"
    "  INVX1 i1 (.IN1(w1), .QN(w2));\n"
    "  DFFX1 r1 (.D(w2), .CLK(clk), .Q(q1));\n"
    "  INVX1 i2 (.IN1(q1), .QN(w3));\n"
    "  BUFX1 b2 (.IN1(w3), .Q(po1));\n"
    "endmodule\n";

}  // namespace

TEST_CASE("graph shape: single gate") {
    const char* src =
        "module m (a, b, y);\n input a, b;\n output y;\n"
        "  NAND2X1 u (.IN1(a), .IN2(b), .QN(y));\nendmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    CircuitGraph g = build_graph(ir);
    CHECK(g.nodes().size() == 4);  // 2 PI terminals, 1 gate, 1 PO terminal
    CHECK(g.edges().size() == 3);
}

TEST_CASE("graph shape: inverter chain") {
    for (int k : {1, 3, 7}) {
        std::ostringstream src;
        src << "module chain (a, y);\n input a;\n output y;\n";
        for (int i = 0; i + 1 < k; ++i) src << "  wire w" << i << ";\n";
        for (int i = 0; i < k; ++i) {
            std::string in = i == 0 ? "a" : "w" + std::to_string(i - 1);
            std::string out = i == k - 1 ? "y" : "w" + std::to_string(i);
            src << "  INVX1 g" << i << " (.IN1(" << in << "), .QN(" << out << "));\n";
        }
        src << "endmodule\n";
        NetlistIR ir = parse_netlist(src.str(), lib());
        CircuitGraph g = build_graph(ir);
        CHECK(g.nodes().size() == static_cast<size_t>(k) + 2);
        CHECK(g.edges().size() == static_cast<size_t>(k) + 1);
    }
}

TEST_CASE("lgfi: four-input gate fed by primary inputs") {
    const char* src =
        "module m (a, b, c, d, y);\n input a, b, c, d;\n output y;\n"
        "  NAND4X1 u (.IN1(a), .IN2(b), .IN3(c), .IN4(d), .QN(y));\nendmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    CHECK(features_of(ir, "y").lgfi == 4);  // second level is empty
}

TEST_CASE("level conventions on a mixed chain") {
    NetlistIR ir = parse_netlist(kChain, lib());
    CircuitGraph g = build_graph(ir);
    auto f = [&](const char* n) { return extract_features(g, *ir.find_net(n)); };
    const int cap = FeatureConfig{}.cap;

    FeatureVector w1 = f("w1");
    CHECK(w1.lgfi == 1);
    CHECK(w1.ffi == cap);  // no upstream flip-flop
    CHECK(w1.pi == 1);
    CHECK(w1.ffo == 2);  // i1 plus the flip-flop itself
    CHECK(w1.po == 4);   // i1, r1, i2, b2

    FeatureVector w2 = f("w2");
    CHECK(w2.lgfi == 2);
    CHECK(w2.pi == 2);
    CHECK(w2.ffo == 1);  // feeds the flip-flop directly
    CHECK(w2.po == 3);

    FeatureVector q1 = f("q1");  // flip-flop output
    CHECK(q1.ffi == 0);
    CHECK(q1.lgfi == 2);  // the flip-flop's own input pins, no expansion
    CHECK(q1.pi == 3);    // clock pin is excluded from traversal
    CHECK(q1.ffo == cap);
    CHECK(q1.po == 2);

    FeatureVector w3 = f("w3");
    CHECK(w3.lgfi == 3);  // i2 plus the flip-flop's two pins
    CHECK(w3.ffi == 1);
    CHECK(w3.pi == 4);
    CHECK(w3.po == 1);

    FeatureVector po1 = f("po1");
    CHECK(po1.po == 0);
    CHECK(po1.ffi == 2);
    CHECK(po1.pi == 5);
}

TEST_CASE("clock exclusion is configurable") {
    NetlistIR ir = parse_netlist(kChain, lib());
    FeatureConfig cfg;
    cfg.excluded_ff_pins.clear();
    CircuitGraph g = build_graph(ir, cfg);
    // with the clock traversable, q1 reaches the clk primary input in one hop
    CHECK(extract_features(g, *ir.find_net("q1")).pi == 1);
}

TEST_CASE("undriven net errors by name") {
    const char* src =
        "module m (a, y);\n input a;\n output y;\n wire dangling;\n"
        "  INVX1 g (.IN1(a), .QN(y));\nendmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    CircuitGraph g = build_graph(ir);
    CHECK_THROWS_WITH_AS(extract_features(g, *ir.find_net("dangling")),
                         doctest::Contains("dangling"), DataError);
}

TEST_CASE("labeling by instance or net name") {
    const char* src =
        "module m (a, y, z);\n input a;\n output y, z;\n wire troj_wire;\n"
        "  INVX1 Trojan_Trigger_3 (.IN1(a), .QN(y));\n"
        "  BUFX1 U294 (.IN1(a), .Q(troj_wire));\n"
        "  BUFX1 U295 (.IN1(troj_wire), .Q(z));\n"
        "endmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    std::vector<std::string> patterns{"troj"};
    CHECK(label_net(ir, *ir.find_net("y"), patterns) == Label::trojan);
    CHECK(label_net(ir, *ir.find_net("troj_wire"), patterns) == Label::trojan);  // net name
    CHECK(label_net(ir, *ir.find_net("z"), patterns) == Label::non_trojan);
    CHECK_THROWS_AS(label_net(ir, *ir.find_net("y"), {"["}), DataError);  // bad regex
    CHECK_THROWS_AS(label_net(ir, *ir.find_net("y"), {}), DataError);
}

TEST_CASE("extract_all: one record per gate-driven net, deterministic order") {
    const char* src =
        "module m (a, b, y);\n input a, b;\n output y;\n"
        "  NAND2X1 u (.IN1(a), .IN2(b), .QN(y));\nendmodule\n";
    NetlistIR ir = parse_netlist(src, lib());
    auto records = extract_all(ir, "m", "v1", {"troj"});
    REQUIRE(records.size() == 1);  // primary inputs carry no gate driver
    CHECK(records[0].origin.net == "u.QN");
    CHECK(records[0].origin.name == "NAND2X1");
    CHECK(records[0].origin.part == "m");
    CHECK(records[0].origin.line == 4);
    CHECK(records[0].label == Label::non_trojan);
}

TEST_CASE("features are invariant under instance reordering") {
    GeneratedNetlist gen = generate(TrojanSpec{6, PayloadKind::xor_corrupt, 40, 11});
    NetlistIR ir = parse_netlist(gen.verilog, lib());

    // reorder by reversing the instance statements textually
    std::istringstream in(gen.verilog);
    std::string line;
    std::vector<std::string> head, gates, tail;
    while (std::getline(in, line)) {
        if (line.find("(.") != std::string::npos)
            gates.push_back(line);
        else if (gates.empty())
            head.push_back(line);
        else
            tail.push_back(line);
    }
    REQUIRE(gates.size() == static_cast<size_t>(gen.manifest.gate_count));
    std::reverse(gates.begin(), gates.end());
    std::ostringstream shuffled;
    for (const auto& l : head) shuffled << l << "\n";
    for (const auto& l : gates) shuffled << l << "\n";
    for (const auto& l : tail) shuffled << l << "\n";
    NetlistIR ir2 = parse_netlist(shuffled.str(), lib());

    CircuitGraph g1 = build_graph(ir);
    CircuitGraph g2 = build_graph(ir2);
    for (NetId n = 0; n < static_cast<NetId>(ir.net_count()); ++n) {
        if (ir.net_drivers[n].kind == DriverKind::none) continue;
        NetId m = *ir2.find_net(ir.net_names[n]);
        CHECK(extract_features(g1, n) == extract_features(g2, m));
    }
}

TEST_CASE("buffer insertion on the shortest PI path bumps pi by one") {
    const char* before =
        "module m (a, clk, y);\n input a, clk;\n output y;\n wire w1, w2;\n"
        "  BUFX1 b1 (.IN1(a), .Q(w1));\n"
        "  INVX1 i1 (.IN1(w1), .QN(w2));\n"
        "  DFFX1 r (.D(w2), .CLK(clk), .Q(y));\n"
        "endmodule\n";
    const char* after =
        "module m (a, clk, y);\n input a, clk;\n output y;\n wire wb, w1, w2;\n"
        "  BUFX1 b0 (.IN1(a), .Q(wb));\n"
        "  BUFX1 b1 (.IN1(wb), .Q(w1));\n"
        "  INVX1 i1 (.IN1(w1), .QN(w2));\n"
        "  DFFX1 r (.D(w2), .CLK(clk), .Q(y));\n"
        "endmodule\n";
    NetlistIR ir1 = parse_netlist(before, lib());
    NetlistIR ir2 = parse_netlist(after, lib());
    FeatureVector f1 = features_of(ir1, "w2");
    FeatureVector f2 = features_of(ir2, "w2");
    CHECK(f2.pi == f1.pi + 1);
    CHECK(f2.ffo == f1.ffo);
    CHECK(f2.po == f1.po);
    CHECK(f2.ffi == f1.ffi);
}

TEST_CASE("oracle equivalence on generated circuits") {
    for (uint64_t seed : {1, 2, 3}) {
        TrojanSpec spec;
        spec.seed = seed;
        spec.host_gates = 60;
        spec.trigger_width = 6;
        spec.payload = seed % 2 ? PayloadKind::mux_leak : PayloadKind::xor_corrupt;
        GeneratedNetlist gen = generate(spec);
        NetlistIR ir = parse_netlist(gen.verilog, lib());
        FeatureConfig cfg;
        CircuitGraph g = build_graph(ir, cfg);
        for (NetId n = 0; n < static_cast<NetId>(ir.net_count()); ++n) {
            if (ir.net_drivers[n].kind == DriverKind::none) continue;
            CAPTURE(seed);
            CAPTURE(ir.net_names[n]);
            CHECK(extract_features(g, n) == testing::oracle_features(ir, n, cfg));
        }
    }
}

TEST_CASE("concurrent feature queries match serial results") {
    GeneratedNetlist gen = generate(TrojanSpec{8, PayloadKind::mux_leak, 80, 5});
    NetlistIR ir = parse_netlist(gen.verilog, lib());
    CircuitGraph g = build_graph(ir);

    std::vector<NetId> driven;
    for (NetId n = 0; n < static_cast<NetId>(ir.net_count()); ++n)
        if (ir.net_drivers[n].kind != DriverKind::none) driven.push_back(n);

    std::vector<FeatureVector> serial;
    serial.reserve(driven.size());
    {
        CircuitGraph g_serial = build_graph(ir);
        for (NetId n : driven) serial.push_back(extract_features(g_serial, n));
    }
    std::vector<FeatureVector> parallel(driven.size());
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t) {
        pool.emplace_back([&, t] {
            for (size_t i = t; i < driven.size(); i += 4)
                parallel[i] = extract_features(g, driven[i]);
        });
    }
    for (auto& th : pool) th.join();
    CHECK(parallel == serial);
}
