#include "flagprep/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace flagprep {

using nlohmann::json;

ParseError::ParseError(const std::string& msg, std::size_t line, std::size_t column)
    : std::runtime_error(line ? msg + " (line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ")"
                              : msg),
      line_(line),
      column_(column) {}

static std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

static std::vector<PauliOperator> pauli_list(const json& j, const char* field, std::size_t n,
                                             char allowed) {
    if (!j.contains(field)) throw ParseError(std::string("missing field '") + field + "'");
    if (!j[field].is_array()) throw ParseError(std::string("field '") + field + "' must be an array");
    std::vector<PauliOperator> out;
    for (std::size_t i = 0; i < j[field].size(); ++i) {
        const auto& e = j[field][i];
        std::string where = std::string(field) + "[" + std::to_string(i) + "]";
        if (!e.is_string()) throw ParseError(where + " must be a string");
        auto s = e.get<std::string>();
        if (s.size() != n)
            throw ParseError(where + " has length " + std::to_string(s.size()) + ", expected " +
                             std::to_string(n));
        for (char ch : s)
            if (ch != 'I' && ch != allowed)
                throw ParseError(where + " contains '" + std::string(1, ch) + "'; only I and " +
                                 std::string(1, allowed) + " allowed");
        out.push_back(PauliOperator::from_string(s));
    }
    return out;
}

CssState parse_code_json(const std::string& text, const std::string& state_override) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [l, c] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError(std::string("malformed JSON: ") + e.what(), l, c);
    }
    CssState s;
    try {
        s.name = j.at("name").get<std::string>();
        s.n = j.at("n").get<std::size_t>();
        s.k = j.at("k").get<std::size_t>();
        s.d = j.at("d").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad header field: ") + e.what());
    }
    s.x_generators = pauli_list(j, "x_stabilizers", s.n, 'X');
    s.z_generators = pauli_list(j, "z_stabilizers", s.n, 'Z');
    s.logical_x = pauli_list(j, "logical_x", s.n, 'X');
    s.logical_z = pauli_list(j, "logical_z", s.n, 'Z');
    std::string label = state_override;
    if (label.empty()) label = j.value("default_state", std::string("0"));
    bool conj = j.value("hadamard_conjugate", false);
    try {
        s.set_state(label);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    if (conj) {
        // Prepare the conjugated state: swap X/Z roles of the inputs.
        s = s.hadamard_conjugate();
    }
    auto rep = validate_css_state(s);
    if (!rep.ok()) throw ValidationError(rep);
    return s;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

CssState parse_code_file(const std::filesystem::path& path, const std::string& state_override) {
    return parse_code_json(read_text_file(path), state_override);
}

std::filesystem::path resolve_code_path(const std::string& code, const std::filesystem::path& catalog_dir) {
    std::filesystem::path p(code);
    if (std::filesystem::exists(p)) return p;
    auto c = catalog_dir / (code + ".json");
    if (std::filesystem::exists(c)) return c;
    throw ParseError("unknown code '" + code + "' (not a file and not in " + catalog_dir.string() + ")");
}

}  // namespace flagprep

namespace flagprep {

std::string serialize_circuit(const Circuit& c) {
    std::ostringstream out;
    out << c.header_kind;
    for (const auto& [k, v] : c.attributes) out << ' ' << k << '=' << v;
    out << '\n';
    for (const auto& op : c.ops) {
        switch (op.kind) {
            case OpKind::InitPlus: out << "INIT+ " << c.qubit_name(op.a); break;
            case OpKind::InitZero: out << "INIT0 " << c.qubit_name(op.a); break;
            case OpKind::CX: out << "CX " << c.qubit_name(op.a) << ' ' << c.qubit_name(op.b); break;
            case OpKind::MeasZ: out << "MZ " << c.qubit_name(op.a) << " -> " << op.flag_id; break;
            case OpKind::MeasX: out << "MX " << c.qubit_name(op.a) << " -> " << op.flag_id; break;
            case OpKind::FinalMeas: out << "FINAL_MEAS " << type_char(op.basis); break;
        }
        out << '\n';
    }
    return out.str();
}

namespace {

struct QubitRef {
    char prefix;
    std::size_t index;
};

QubitRef parse_qubit(const std::string& tok, std::size_t line) {
    if (tok.size() < 2 || (tok[0] != 'c' && tok[0] != 't' && tok[0] != 'f'))
        throw ParseError("bad qubit name '" + tok + "'", line, 1);
    std::size_t idx = 0;
    for (std::size_t i = 1; i < tok.size(); ++i) {
        if (tok[i] < '0' || tok[i] > '9') throw ParseError("bad qubit name '" + tok + "'", line, 1);
        idx = idx * 10 + static_cast<std::size_t>(tok[i] - '0');
    }
    return {tok[0], idx};
}

}  // namespace

Circuit parse_circuit(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    Circuit c;
    bool have_header = false;
    struct RawOp {
        OpKind kind;
        QubitRef a{}, b{};
        std::size_t flag_id = 0;
        PauliType basis = PauliType::Z;
        std::size_t line = 0;
    };
    std::vector<RawOp> raw;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string w; ls >> w;) tok.push_back(w);
        if (tok.empty() || tok[0][0] == '#') continue;
        if (!have_header) {
            if (tok[0] != "CIRCUIT" && tok[0] != "GADGET")
                throw ParseError("expected CIRCUIT or GADGET header", lineno, 1);
            c.header_kind = tok[0];
            for (std::size_t i = 1; i < tok.size(); ++i) {
                auto eq = tok[i].find('=');
                if (eq == std::string::npos) throw ParseError("bad header attribute '" + tok[i] + "'", lineno, 1);
                c.attributes.emplace_back(tok[i].substr(0, eq), tok[i].substr(eq + 1));
            }
            have_header = true;
            continue;
        }
        const std::string& opc = tok[0];
        auto need = [&](std::size_t k) {
            if (tok.size() != k) throw ParseError("wrong operand count for " + opc, lineno, 1);
        };
        RawOp r{OpKind::CX};
        r.line = lineno;
        if (opc == "INIT+" || opc == "INIT0") {
            need(2);
            r.kind = opc == "INIT+" ? OpKind::InitPlus : OpKind::InitZero;
            r.a = parse_qubit(tok[1], lineno);
        } else if (opc == "CX") {
            need(3);
            r.kind = OpKind::CX;
            r.a = parse_qubit(tok[1], lineno);
            r.b = parse_qubit(tok[2], lineno);
        } else if (opc == "MZ" || opc == "MX") {
            need(4);
            if (tok[2] != "->") throw ParseError("expected '->' in measurement", lineno, 1);
            r.kind = opc == "MZ" ? OpKind::MeasZ : OpKind::MeasX;
            r.a = parse_qubit(tok[1], lineno);
            if (r.a.prefix != 'f') throw ParseError("only flag qubits may be measured", lineno, 1);
            try {
                r.flag_id = std::stoul(tok[3]);
            } catch (const std::exception&) {
                throw ParseError("bad flag outcome id '" + tok[3] + "'", lineno, 1);
            }
        } else if (opc == "FINAL_MEAS") {
            need(2);
            if (tok[1] != "X" && tok[1] != "Z") throw ParseError("FINAL_MEAS basis must be X or Z", lineno, 1);
            r.kind = OpKind::FinalMeas;
            r.basis = tok[1] == "X" ? PauliType::X : PauliType::Z;
        } else {
            throw ParseError("unknown opcode '" + opc + "' on line " + std::to_string(lineno), lineno, 1);
        }
        raw.push_back(r);
    }
    if (!have_header) throw ParseError("empty circuit file");

    std::size_t num_code = 0, num_flags = 0;
    auto touch = [&](const QubitRef& q) {
        if (q.prefix == 'f') num_flags = std::max(num_flags, q.index + 1);
        else num_code = std::max(num_code, q.index + 1);
    };
    for (const auto& r : raw) {
        if (r.kind == OpKind::FinalMeas) continue;
        touch(r.a);
        if (r.kind == OpKind::CX) touch(r.b);
    }
    c.num_code = num_code;
    c.roles.assign(num_code + num_flags, QubitRole::Control);
    std::vector<bool> role_set(num_code + num_flags, false);
    auto resolve = [&](const QubitRef& q, std::size_t line) -> uint32_t {
        std::size_t id = q.prefix == 'f' ? num_code + q.index : q.index;
        if (q.prefix != 'f') {
            QubitRole role = q.prefix == 'c' ? QubitRole::Control : QubitRole::Target;
            if (role_set[id] && c.roles[id] != role)
                throw ParseError("qubit " + std::to_string(q.index) + " used as both control and target name", line, 1);
            c.roles[id] = role;
            role_set[id] = true;
        }
        return static_cast<uint32_t>(id);
    };
    for (const auto& r : raw) {
        Operation op{r.kind};
        if (r.kind != OpKind::FinalMeas) op.a = resolve(r.a, r.line);
        if (r.kind == OpKind::CX) op.b = resolve(r.b, r.line);
        op.flag_id = static_cast<uint32_t>(r.flag_id);
        op.basis = r.kind == OpKind::InitPlus || r.kind == OpKind::MeasX ? PauliType::X : r.basis;
        if (r.kind == OpKind::FinalMeas) op.basis = r.basis;
        if (r.kind == OpKind::InitPlus || r.kind == OpKind::InitZero || r.kind == OpKind::MeasZ ||
            r.kind == OpKind::MeasX) {
            if (op.a >= num_code) {
                bool xflag = r.kind == OpKind::InitZero || r.kind == OpKind::MeasZ;
                c.roles[op.a] = xflag ? QubitRole::FlagX : QubitRole::FlagZ;
            }
        }
        c.ops.push_back(op);
    }
    return c;
}

Circuit read_circuit_file(const std::filesystem::path& path) { return parse_circuit(read_text_file(path)); }

}  // namespace flagprep
