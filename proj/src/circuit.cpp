#include "flagprep/circuit.hpp"

namespace flagprep {

uint32_t Circuit::add_flag(QubitRole role) {
    roles.push_back(role);
    return static_cast<uint32_t>(roles.size() - 1);
}

std::size_t Circuit::cx_count() const {
    std::size_t n = 0;
    for (const auto& op : ops) n += op.kind == OpKind::CX;
    return n;
}

std::size_t Circuit::flag_measurement_count() const {
    std::size_t n = 0;
    for (const auto& op : ops) n += op.kind == OpKind::MeasZ || op.kind == OpKind::MeasX;
    return n;
}

std::string Circuit::qubit_name(std::size_t q) const {
    if (q >= num_code) return "f" + std::to_string(q - num_code);
    return (roles[q] == QubitRole::Control ? "c" : "t") + std::to_string(q);
}

std::string Circuit::attribute(const std::string& key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return v;
    return {};
}

void Circuit::set_attribute(const std::string& key, const std::string& value) {
    for (auto& [k, v] : attributes)
        if (k == key) {
            v = value;
            return;
        }
    attributes.emplace_back(key, value);
}

std::string check_circuit_structure(const Circuit& c) {
    enum State : uint8_t { Fresh, Live, Measured };
    std::vector<State> st(c.num_qubits(), Fresh);
    bool final_seen = false;
    auto name = [&](uint32_t q) { return c.qubit_name(q); };
    for (std::size_t i = 0; i < c.ops.size(); ++i) {
        const auto& op = c.ops[i];
        std::string at = " (op " + std::to_string(i) + ")";
        if (final_seen) return "operation after final measurement" + at;
        auto need_live = [&](uint32_t q) -> std::string {
            if (q >= c.num_qubits()) return "qubit index out of range" + at;
            if (st[q] == Fresh) return name(q) + " used before initialization" + at;
            if (st[q] == Measured) return name(q) + " used after measurement" + at;
            return {};
        };
        switch (op.kind) {
            case OpKind::InitPlus:
            case OpKind::InitZero:
                if (op.a >= c.num_qubits()) return "qubit index out of range" + at;
                if (st[op.a] != Fresh) return name(op.a) + " initialized twice" + at;
                st[op.a] = Live;
                break;
            case OpKind::CX: {
                if (op.a == op.b) return "CX with identical qubits" + at;
                if (auto e = need_live(op.a); !e.empty()) return e;
                if (auto e = need_live(op.b); !e.empty()) return e;
                break;
            }
            case OpKind::MeasZ:
            case OpKind::MeasX:
                if (auto e = need_live(op.a); !e.empty()) return e;
                if (!c.is_flag(op.a)) return "code qubit " + name(op.a) + " measured early" + at;
                st[op.a] = Measured;
                break;
            case OpKind::FinalMeas:
                final_seen = true;
                break;
        }
    }
    for (std::size_t q = 0; q < c.num_qubits(); ++q) {
        if (st[q] == Fresh) return name(q) + " never initialized";
        if (c.is_flag(q) && st[q] != Measured) return name(q) + " never measured";
    }
    return {};
}

}  // namespace flagprep
