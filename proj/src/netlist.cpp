#include "sentinel/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sentinel {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_plain_ident(const std::string& s) {
    if (s.empty() || !is_ident_start(s[0])) return false;
    return std::all_of(s.begin() + 1, s.end(), is_ident_char);
}

const std::set<std::string>& keywords() {
    static const std::set<std::string> kw{"module", "endmodule", "input", "output",
                                          "wire",   "assign",    "inout"};
    return kw;
}

}  // namespace

std::vector<std::string> CellDef::positional_order() const {
    std::vector<std::string> order = output_pins;
    order.insert(order.end(), input_pins.begin(), input_pins.end());
    return order;
}

void CellLibrary::add(CellDef def) {
    if (def.name.empty()) throw DataError("cell library: cell with empty name");
    if (def.output_pins.empty())
        throw DataError("cell library: cell '" + def.name + "' has zero output pins");
    if (def.input_pins.empty())
        throw DataError("cell library: cell '" + def.name + "' has zero input pins");
    for (const auto& in : def.input_pins)
        for (const auto& out : def.output_pins)
            if (in == out)
                throw DataError("cell library: cell '" + def.name + "' lists pin '" + in +
                                "' as both input and output");
    auto [it, inserted] = cells_.emplace(def.name, std::move(def));
    if (!inserted) throw DataError("cell library: duplicate cell '" + it->first + "'");
}

const CellDef* CellLibrary::find(const std::string& name) const {
    auto it = cells_.find(name);
    return it == cells_.end() ? nullptr : &it->second;
}

CellLibrary CellLibrary::from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("cell library: malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("cells") || !doc["cells"].is_array())
        throw DataError("cell library: expected top-level object with \"cells\" array");
    CellLibrary lib;
    for (const auto& c : doc["cells"]) {
        CellDef def;
        try {
            def.name = c.at("name").get<std::string>();
            std::string kind = c.at("kind").get<std::string>();
            if (kind == "comb" || kind == "combinational")
                def.kind = CellKind::combinational;
            else if (kind == "ff" || kind == "flipflop")
                def.kind = CellKind::flipflop;
            else
                throw DataError("cell library: cell '" + def.name + "' has unknown kind '" +
                                kind + "' (expected \"comb\" or \"ff\")");
            def.input_pins = c.at("inputs").get<std::vector<std::string>>();
            def.output_pins = c.at("outputs").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("cell library: bad cell entry: ") + e.what());
        }
        lib.add(std::move(def));
    }
    return lib;
}

CellLibrary CellLibrary::from_json_file(const std::string& path) {
    return from_json_text(read_file(path));
}

CellLibrary CellLibrary::builtin() {
    CellLibrary lib;
    auto add_strengths = [&lib](CellDef base) {
        for (const char* suffix : {"", "X1", "X2", "X4"}) {
            CellDef d = base;
            d.name += suffix;
            lib.add(std::move(d));
        }
    };
    struct Family {
        const char* name;
        const char* out;
    };
    const Family multi[] = {{"NAND", "QN"}, {"NOR", "QN"}, {"XNOR", "QN"},
                            {"AND", "Q"},   {"OR", "Q"},   {"XOR", "Q"}};
    for (const auto& fam : multi) {
        for (int arity = 2; arity <= 8; ++arity) {
            CellDef d;
            d.name = std::string(fam.name) + std::to_string(arity);
            d.kind = CellKind::combinational;
            for (int i = 1; i <= arity; ++i) d.input_pins.push_back("IN" + std::to_string(i));
            d.output_pins = {fam.out};
            add_strengths(std::move(d));
        }
    }
    add_strengths(CellDef{"INV", CellKind::combinational, {"IN1"}, {"QN"}});
    add_strengths(CellDef{"BUF", CellKind::combinational, {"IN1"}, {"Q"}});
    add_strengths(CellDef{"MUX2", CellKind::combinational, {"IN1", "IN2", "S0"}, {"Q"}});
    add_strengths(
        CellDef{"MUX4", CellKind::combinational, {"IN1", "IN2", "IN3", "IN4", "S0", "S1"}, {"Q"}});
    add_strengths(CellDef{"DFF", CellKind::flipflop, {"D", "CLK"}, {"Q", "QN"}});
    add_strengths(CellDef{"DFFR", CellKind::flipflop, {"D", "CLK", "RSTB"}, {"Q", "QN"}});
    add_strengths(CellDef{"DFFS", CellKind::flipflop, {"D", "CLK", "SETB"}, {"Q", "QN"}});
    add_strengths(CellDef{"DFFSR", CellKind::flipflop, {"D", "CLK", "SETB", "RSTB"}, {"Q", "QN"}});
    add_strengths(CellDef{"SDFF", CellKind::flipflop, {"D", "SI", "SE", "CLK"}, {"Q", "QN"}});
    return lib;
}

const CellDef& NetlistIR::cell_of(const Instance& inst) const {
    auto it = cell_defs.find(inst.cell_name);
    if (it == cell_defs.end())
        throw DataError("internal: missing cell definition for '" + inst.cell_name + "'");
    return it->second;
}

std::optional<NetId> NetlistIR::find_net(const std::string& name) const {
    auto it = name_to_net.find(name);
    if (it == name_to_net.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

enum class Tok { ident, number, constant, punct, eof };

struct Token {
    Tok kind = Tok::eof;
    std::string text;
    int line = 1;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space_and_comments();
        Token t;
        t.line = line_;
        if (pos_ >= src_.size()) return t;
        char c = src_[pos_];
        if (c == '\\') {
            ++pos_;
            size_t start = pos_;
            while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            if (pos_ == start) throw ParseError("empty escaped identifier", line_);
            t.kind = Tok::ident;
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        if (is_ident_start(c)) {
            size_t start = pos_;
            while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
            t.kind = Tok::ident;
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            std::string digits(src_.substr(start, pos_ - start));
            if (pos_ < src_.size() && src_[pos_] == '\'') {
                ++pos_;
                if (pos_ >= src_.size()) throw ParseError("truncated literal", line_);
                char base = static_cast<char>(std::tolower(src_[pos_++]));
                size_t vstart = pos_;
                while (pos_ < src_.size() &&
                       (is_ident_char(src_[pos_]) || src_[pos_] == 'x' || src_[pos_] == 'z'))
                    ++pos_;
                std::string value(src_.substr(vstart, pos_ - vstart));
                if (digits != "1" || base != 'b' || (value != "0" && value != "1"))
                    throw ParseError("unsupported literal " + digits + "'" + base + value +
                                         " (only 1'b0 and 1'b1 are accepted)",
                                     line_);
                t.kind = Tok::constant;
                t.text = value;
                return t;
            }
            t.kind = Tok::number;
            t.text = std::move(digits);
            return t;
        }
        if (std::string("()[]{},;:.=#").find(c) != std::string::npos) {
            ++pos_;
            t.kind = Tok::punct;
            t.text = std::string(1, c);
            return t;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line_);
    }

  private:
    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                pos_ += 2;
                while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) {
                    if (src_[pos_] == '\n') ++line_;
                    ++pos_;
                }
                if (pos_ + 1 >= src_.size()) throw ParseError("unterminated block comment", line_);
                pos_ += 2;
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
};

// ---------------------------------------------------------------------------
// Statement parser
// ---------------------------------------------------------------------------

enum class Dir { input, output, wire };

struct Decl {
    Dir dir;
    bool has_range = false;
    long msb = 0, lsb = 0;
    std::vector<std::string> names;
    int line = 0;
};

struct NetRef {
    std::string name;       // expanded form, e.g. "a[1]" for indexed refs
    bool is_const = false;
    int const_val = 0;
    int line = 0;
};

struct AssignStmt {
    NetRef lhs, rhs;
    int line = 0;
};

struct InstStmt {
    std::string cell, name;
    bool named = false;
    std::vector<std::pair<std::string, std::optional<NetRef>>> named_conns;
    std::vector<NetRef> pos_conns;
    int line = 0;
};

struct ModuleText {
    std::string name;
    std::vector<std::pair<std::string, int>> header_ports;
    std::vector<Decl> decls;
    std::vector<AssignStmt> assigns;
    std::vector<InstStmt> insts;
};

class Parser {
  public:
    explicit Parser(std::string_view src) : lex_(src) { advance(); }

    ModuleText parse_module() {
        ModuleText m;
        expect_keyword("module");
        m.name = expect_ident("module name");
        if (accept_punct("(")) {
            if (!peek_punct(")")) {
                do {
                    int line = cur_.line;
                    m.header_ports.emplace_back(expect_ident("port name"), line);
                } while (accept_punct(","));
            }
            expect_punct(")");
        }
        expect_punct(";");
        while (!peek_keyword("endmodule")) {
            if (cur_.kind == Tok::eof)
                throw ParseError("unexpected end of file, missing 'endmodule'", cur_.line);
            if (peek_keyword("input"))
                m.decls.push_back(parse_decl(Dir::input));
            else if (peek_keyword("output"))
                m.decls.push_back(parse_decl(Dir::output));
            else if (peek_keyword("wire"))
                m.decls.push_back(parse_decl(Dir::wire));
            else if (peek_keyword("inout"))
                throw ParseError("inout ports are not supported", cur_.line);
            else if (peek_keyword("assign"))
                m.assigns.push_back(parse_assign());
            else if (cur_.kind == Tok::ident)
                m.insts.push_back(parse_instance());
            else
                throw ParseError("expected declaration, assign, or instantiation, got '" +
                                     cur_.text + "'",
                                 cur_.line);
        }
        advance();  // endmodule
        if (cur_.kind != Tok::eof)
            throw ParseError("text after 'endmodule' (only single-module files are supported)",
                             cur_.line);
        return m;
    }

  private:
    void advance() { cur_ = lex_.next(); }

    bool peek_punct(const char* p) const { return cur_.kind == Tok::punct && cur_.text == p; }
    bool peek_keyword(const char* k) const { return cur_.kind == Tok::ident && cur_.text == k; }

    bool accept_punct(const char* p) {
        if (!peek_punct(p)) return false;
        advance();
        return true;
    }

    void expect_punct(const char* p) {
        if (!peek_punct(p))
            throw ParseError("expected '" + std::string(p) + "', got '" + cur_.text + "'",
                             cur_.line);
        advance();
    }

    void expect_keyword(const char* k) {
        if (!peek_keyword(k))
            throw ParseError("expected '" + std::string(k) + "', got '" + cur_.text + "'",
                             cur_.line);
        advance();
    }

    std::string expect_ident(const char* what) {
        if (cur_.kind != Tok::ident)
            throw ParseError("expected " + std::string(what) + ", got '" + cur_.text + "'",
                             cur_.line);
        if (keywords().count(cur_.text))
            throw ParseError("keyword '" + cur_.text + "' used as " + what, cur_.line);
        std::string s = cur_.text;
        advance();
        return s;
    }

    long expect_number() {
        if (cur_.kind != Tok::number)
            throw ParseError("expected number, got '" + cur_.text + "'", cur_.line);
        long v = std::stol(cur_.text);
        advance();
        return v;
    }

    Decl parse_decl(Dir dir) {
        Decl d;
        d.dir = dir;
        d.line = cur_.line;
        advance();  // keyword
        if (accept_punct("[")) {
            d.has_range = true;
            d.msb = expect_number();
            expect_punct(":");
            d.lsb = expect_number();
            expect_punct("]");
        }
        do {
            d.names.push_back(expect_ident("net name"));
        } while (accept_punct(","));
        expect_punct(";");
        return d;
    }

    NetRef parse_net_ref() {
        NetRef r;
        r.line = cur_.line;
        if (cur_.kind == Tok::constant) {
            r.is_const = true;
            r.const_val = cur_.text == "1" ? 1 : 0;
            advance();
            return r;
        }
        r.name = expect_ident("net reference");
        if (accept_punct("[")) {
            long idx = expect_number();
            expect_punct("]");
            r.name += "[" + std::to_string(idx) + "]";
        }
        return r;
    }

    AssignStmt parse_assign() {
        AssignStmt a;
        a.line = cur_.line;
        advance();  // assign
        a.lhs = parse_net_ref();
        expect_punct("=");
        a.rhs = parse_net_ref();
        expect_punct(";");
        return a;
    }

    InstStmt parse_instance() {
        InstStmt s;
        s.line = cur_.line;
        s.cell = expect_ident("cell name");
        s.name = expect_ident("instance name");
        expect_punct("(");
        if (peek_punct(".")) {
            s.named = true;
            do {
                expect_punct(".");
                std::string pin = expect_ident("pin name");
                expect_punct("(");
                std::optional<NetRef> ref;
                if (!peek_punct(")")) ref = parse_net_ref();
                expect_punct(")");
                s.named_conns.emplace_back(std::move(pin), std::move(ref));
            } while (accept_punct(","));
        } else if (!peek_punct(")")) {
            do {
                s.pos_conns.push_back(parse_net_ref());
            } while (accept_punct(","));
        }
        expect_punct(")");
        expect_punct(";");
        return s;
    }

    Lexer lex_;
    Token cur_;
};

// ---------------------------------------------------------------------------
// Linker: declarations + aliases + instances -> NetlistIR
// ---------------------------------------------------------------------------

struct ProvNet {
    std::string name;
    int parent;
    bool declared_input = false;
    bool declared_output = false;
    // root-only state below
    bool is_pi = false, is_po = false;
    NetDriver driver;
};

class Linker {
  public:
    Linker(const ModuleText& m, const CellLibrary& lib) : m_(m), lib_(lib) {}

    NetlistIR run() {
        declare_all();
        check_header_ports();
        for (const auto& a : m_.assigns) apply_assign(a);
        for (const auto& s : m_.insts) apply_instance(s);
        return finalize();
    }

  private:
    int find(int i) {
        while (nets_[i].parent != i) {
            nets_[i].parent = nets_[nets_[i].parent].parent;
            i = nets_[i].parent;
        }
        return i;
    }

    void unite(int a, int b, int line) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (nets_[a].driver.kind != DriverKind::none && nets_[b].driver.kind != DriverKind::none)
            throw ParseError("nets '" + nets_[a].name + "' and '" + nets_[b].name +
                                 "' both have drivers and cannot be aliased",
                             line);
        // keep the lower-index (earlier-declared) net as root
        if (b < a) std::swap(a, b);
        nets_[b].parent = a;
        nets_[a].is_pi |= nets_[b].is_pi;
        nets_[a].is_po |= nets_[b].is_po;
        if (nets_[a].driver.kind == DriverKind::none) nets_[a].driver = nets_[b].driver;
    }

    int declare_scalar(const std::string& name, Dir dir, int line) {
        auto it = by_name_.find(name);
        int idx;
        if (it != by_name_.end()) {
            idx = it->second;
        } else {
            idx = static_cast<int>(nets_.size());
            nets_.push_back(ProvNet{name, idx});
            by_name_.emplace(name, idx);
        }
        ProvNet& n = nets_[idx];
        if (dir == Dir::input) {
            if (n.declared_output)
                throw ParseError("net '" + name + "' declared both input and output", line);
            n.declared_input = true;
            int root = find(idx);
            if (nets_[root].driver.kind == DriverKind::gate)
                throw ParseError("primary input '" + name + "' is also driven by a gate", line);
            nets_[root].is_pi = true;
            nets_[root].driver = NetDriver{DriverKind::primary_input, -1, ""};
        } else if (dir == Dir::output) {
            if (n.declared_input)
                throw ParseError("net '" + name + "' declared both input and output", line);
            n.declared_output = true;
            nets_[find(idx)].is_po = true;
        }
        return idx;
    }

    void declare_all() {
        for (const auto& d : m_.decls) {
            for (const auto& base : d.names) {
                auto prev = base_ranges_.find(base);
                if (prev != base_ranges_.end()) {
                    auto [had_range, pmsb, plsb] = prev->second;
                    if (had_range != d.has_range ||
                        (d.has_range && (pmsb != d.msb || plsb != d.lsb)))
                        throw ParseError("net '" + base + "' redeclared with a different range",
                                         d.line);
                } else {
                    base_ranges_.emplace(base, std::tuple<bool, long, long>{d.has_range, d.msb,
                                                                            d.lsb});
                }
                if (!d.has_range) {
                    declare_scalar(base, d.dir, d.line);
                } else {
                    long step = d.msb >= d.lsb ? -1 : 1;
                    for (long i = d.msb;; i += step) {
                        declare_scalar(base + "[" + std::to_string(i) + "]", d.dir, d.line);
                        if (i == d.lsb) break;
                    }
                }
                if (d.dir != Dir::wire) directed_bases_.insert(base);
            }
        }
    }

    void check_header_ports() {
        for (const auto& [port, line] : m_.header_ports) {
            if (!directed_bases_.count(port))
                throw ParseError("port '" + port + "' has no input/output declaration", line);
        }
    }

    int resolve_ref(const NetRef& r) {
        if (r.is_const) return const_net(r.const_val);
        auto it = by_name_.find(r.name);
        if (it != by_name_.end()) return it->second;
        std::string msg = "undeclared net '" + r.name + "'";
        auto bracket = r.name.find('[');
        if (bracket == std::string::npos) {
            auto br = base_ranges_.find(r.name);
            if (br != base_ranges_.end() && std::get<0>(br->second))
                msg += " (bus reference requires a bit-select)";
        } else {
            std::string base = r.name.substr(0, bracket);
            auto br = base_ranges_.find(base);
            if (br != base_ranges_.end()) {
                msg += std::get<0>(br->second) ? " (index outside declared range)"
                                               : " ('" + base + "' is a scalar net)";
            }
        }
        throw ParseError(msg, r.line);
    }

    int const_net(int value) {
        int& slot = const_nets_[value];
        if (slot == 0) {
            std::string name = value ? "$const1" : "$const0";
            int idx = static_cast<int>(nets_.size());
            nets_.push_back(ProvNet{name, idx});
            by_name_.emplace(name, idx);
            nets_[idx].driver = NetDriver{DriverKind::constant, -1, ""};
            slot = idx + 1;
        }
        return slot - 1;
    }

    void apply_assign(const AssignStmt& a) {
        if (a.lhs.is_const)
            throw ParseError("left side of assign must be a net", a.line);
        int lhs = resolve_ref(a.lhs);
        int rhs = resolve_ref(a.rhs);
        unite(lhs, rhs, a.line);
    }

    const CellDef& resolve_cell(const InstStmt& s) {
        if (const CellDef* def = lib_.find(s.cell)) {
            cell_defs_.emplace(s.cell, *def);
            return cell_defs_.at(s.cell);
        }
        if (lib_.default_policy == UnknownCellPolicy::error)
            throw ParseError("unknown cell '" + s.cell +
                                 "' (submodule instantiations are not processed; add the cell "
                                 "to the library to accept it)",
                             s.line);
        auto it = cell_defs_.find(s.cell);
        if (it == cell_defs_.end()) {
            CellDef def;
            def.name = s.cell;
            def.kind = CellKind::combinational;
            if (s.named) {
                static const std::set<std::string> out_names{"q", "qn", "y", "z", "o", "out"};
                for (const auto& [pin, ref] : s.named_conns) {
                    if (out_names.count(to_lower(pin)))
                        def.output_pins.push_back(pin);
                    else
                        def.input_pins.push_back(pin);
                }
                if (def.output_pins.empty() && !def.input_pins.empty()) {
                    // fall back to the primitive convention: first pin drives
                    def.output_pins.push_back(def.input_pins.front());
                    def.input_pins.erase(def.input_pins.begin());
                }
            } else {
                for (size_t i = 0; i < s.pos_conns.size(); ++i) {
                    if (i == 0)
                        def.output_pins.push_back("Y");
                    else
                        def.input_pins.push_back("A" + std::to_string(i));
                }
            }
            if (def.output_pins.empty())
                throw ParseError("cannot infer pins for cell '" + s.cell + "'", s.line);
            it = cell_defs_.emplace(s.cell, std::move(def)).first;
        } else {
            // extend an inferred cell with pins first seen on this instance
            CellDef& def = it->second;
            if (s.named) {
                for (const auto& [pin, ref] : s.named_conns) {
                    bool known =
                        std::count(def.input_pins.begin(), def.input_pins.end(), pin) ||
                        std::count(def.output_pins.begin(), def.output_pins.end(), pin);
                    if (!known) def.input_pins.push_back(pin);
                }
            }
        }
        return it->second;
    }

    void apply_instance(const InstStmt& s) {
        if (!instance_names_.insert(s.name).second)
            throw ParseError("duplicate instance name '" + s.name + "'", s.line);
        const CellDef& def = resolve_cell(s);

        Instance inst;
        inst.name = s.name;
        inst.cell_name = s.cell;
        inst.source_line = s.line;

        std::vector<std::pair<std::string, int>> conns;  // pin -> prov net
        if (s.named) {
            for (const auto& [pin, ref] : s.named_conns) {
                bool known = std::count(def.input_pins.begin(), def.input_pins.end(), pin) ||
                             std::count(def.output_pins.begin(), def.output_pins.end(), pin);
                if (!known)
                    throw ParseError("cell '" + s.cell + "' has no pin '" + pin + "'", s.line);
                if (!ref) continue;  // explicitly unconnected
                conns.emplace_back(pin, resolve_ref(*ref));
            }
        } else {
            auto order = def.positional_order();
            if (s.pos_conns.size() > order.size())
                throw ParseError("too many connections for cell '" + s.cell + "' (" +
                                     std::to_string(s.pos_conns.size()) + " > " +
                                     std::to_string(order.size()) + " pins)",
                                 s.line);
            for (size_t i = 0; i < s.pos_conns.size(); ++i)
                conns.emplace_back(order[i], resolve_ref(s.pos_conns[i]));
        }

        int inst_idx = static_cast<int>(instances_.size());
        bool any_output = false;
        for (auto& [pin, prov] : conns) {
            if (inst.pin_map.count(pin))
                throw ParseError("pin '" + pin + "' connected twice on instance '" + s.name + "'",
                                 s.line);
            inst.pin_map.emplace(pin, prov);  // prov index; remapped in finalize()
            bool is_output =
                std::count(def.output_pins.begin(), def.output_pins.end(), pin) != 0;
            if (is_output) {
                any_output = true;
                int root = find(prov);
                if (nets_[root].driver.kind != DriverKind::none)
                    throw ParseError("net '" + nets_[prov].name + "' has multiple drivers", s.line);
                nets_[root].driver = NetDriver{DriverKind::gate, inst_idx, pin};
            }
        }
        if (!any_output)
            throw ParseError("instance '" + s.name + "' has no connected output pin", s.line);
        instances_.push_back(std::move(inst));
    }

    NetlistIR finalize() {
        NetlistIR ir;
        ir.module_name = m_.name;
        ir.cell_defs = std::move(cell_defs_);

        // canonical name per root: prefer a PI name, then a PO name, then the
        // earliest declaration
        std::vector<int> root_rep(nets_.size(), -1);
        auto rank = [this](int i) {
            if (nets_[i].declared_input) return 0;
            if (nets_[i].declared_output) return 1;
            return 2;
        };
        for (int i = 0; i < static_cast<int>(nets_.size()); ++i) {
            int r = find(i);
            if (root_rep[r] == -1 || rank(i) < rank(root_rep[r])) root_rep[r] = i;
        }

        std::vector<NetId> dense(nets_.size(), -1);
        for (int i = 0; i < static_cast<int>(nets_.size()); ++i) {
            int r = find(i);
            if (dense[r] == -1) {
                dense[r] = static_cast<NetId>(ir.net_names.size());
                ir.net_names.push_back(nets_[root_rep[r]].name);
                ir.net_drivers.push_back(nets_[r].driver);
                ir.net_is_pi.push_back(nets_[r].is_pi ? 1 : 0);
                ir.net_is_po.push_back(nets_[r].is_po ? 1 : 0);
            }
            ir.name_to_net.emplace(nets_[i].name, dense[r]);
        }

        std::set<NetId> seen_pi, seen_po;
        for (int i = 0; i < static_cast<int>(nets_.size()); ++i) {
            NetId id = dense[find(i)];
            if (nets_[i].declared_input && seen_pi.insert(id).second)
                ir.primary_inputs.push_back(id);
            if (nets_[i].declared_output && seen_po.insert(id).second)
                ir.primary_outputs.push_back(id);
        }

        ir.instances = std::move(instances_);
        for (auto& inst : ir.instances) {
            for (auto& [pin, net] : inst.pin_map) net = dense[find(static_cast<int>(net))];
            auto it = ir.cell_defs.find(inst.cell_name);
            if (it == ir.cell_defs.end())
                throw DataError("internal: unresolved cell '" + inst.cell_name + "'");
        }

        for (NetId po : ir.primary_outputs) {
            if (ir.net_drivers[po].kind == DriverKind::none)
                ir.warnings.push_back("primary output '" + ir.net_names[po] + "' has no driver");
        }
        return ir;
    }

    const ModuleText& m_;
    const CellLibrary& lib_;
    std::vector<ProvNet> nets_;
    std::unordered_map<std::string, int> by_name_;
    std::map<std::string, std::tuple<bool, long, long>> base_ranges_;
    std::set<std::string> directed_bases_;
    std::set<std::string> instance_names_;
    std::vector<Instance> instances_;
    std::unordered_map<std::string, CellDef> cell_defs_;
    std::array<int, 2> const_nets_{0, 0};
};

}  // namespace

NetlistIR parse_netlist(std::string_view text, const CellLibrary& lib) {
    Parser parser(text);
    ModuleText m = parser.parse_module();
    Linker linker(m, lib);
    return linker.run();
}

NetlistIR parse_netlist_file(const std::string& path, const CellLibrary& lib) {
    try {
        return parse_netlist(read_file(path), lib);
    } catch (const ParseError& e) {
        throw DataError(path + ":" + e.what());  // e.what() starts with "line N:"
    }
}

std::string emit_verilog(const NetlistIR& ir) {
    auto ref = [](const std::string& name) {
        if (is_plain_ident(name) && !keywords().count(name)) return name;
        return "\\" + name + " ";
    };
    std::ostringstream out;
    out << "module " << ref(ir.module_name) << " (";
    bool first = true;
    for (NetId n : ir.primary_inputs) {
        out << (first ? "" : ", ") << ref(ir.net_names[n]);
        first = false;
    }
    for (NetId n : ir.primary_outputs) {
        out << (first ? "" : ", ") << ref(ir.net_names[n]);
        first = false;
    }
    out << ");\n";
    for (NetId n : ir.primary_inputs) out << "  input " << ref(ir.net_names[n]) << ";\n";
    for (NetId n : ir.primary_outputs) out << "  output " << ref(ir.net_names[n]) << ";\n";
    for (NetId n = 0; n < static_cast<NetId>(ir.net_count()); ++n) {
        if (ir.net_is_pi[n] || ir.net_is_po[n]) continue;
        if (ir.net_drivers[n].kind == DriverKind::constant) continue;
        out << "  wire " << ref(ir.net_names[n]) << ";\n";
    }
    for (const auto& inst : ir.instances) {
        const CellDef& def = ir.cell_of(inst);
        out << "  " << ref(inst.cell_name) << " " << ref(inst.name) << " (";
        bool fc = true;
        for (const auto& pin : def.positional_order()) {
            auto it = inst.pin_map.find(pin);
            if (it == inst.pin_map.end()) continue;
            NetId n = it->second;
            out << (fc ? "" : ", ") << "." << pin << "(";
            if (ir.net_drivers[n].kind == DriverKind::constant)
                out << (ir.net_names[n] == "$const1" ? "1'b1" : "1'b0");
            else
                out << ref(ir.net_names[n]);
            out << ")";
            fc = false;
        }
        out << ");\n";
    }
    out << "endmodule\n";
    return out.str();
}

}  // namespace sentinel
