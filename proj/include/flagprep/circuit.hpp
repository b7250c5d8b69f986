#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "flagprep/pauli.hpp"

namespace flagprep {

enum class QubitRole { Control, Target, FlagX, FlagZ };

enum class OpKind { InitPlus, InitZero, CX, MeasZ, MeasX, FinalMeas };

struct Operation {
    OpKind kind;
    uint32_t a = 0;        // qubit (control for CX)
    uint32_t b = 0;        // CX target
    uint32_t flag_id = 0;  // measurement outcome index
    PauliType basis = PauliType::Z;  // FinalMeas basis

    static Operation init_plus(uint32_t q) { return {OpKind::InitPlus, q, 0, 0, PauliType::X}; }
    static Operation init_zero(uint32_t q) { return {OpKind::InitZero, q, 0, 0, PauliType::Z}; }
    static Operation cx(uint32_t a, uint32_t b) { return {OpKind::CX, a, b, 0, PauliType::Z}; }
    static Operation meas_z(uint32_t q, uint32_t id) { return {OpKind::MeasZ, q, 0, id, PauliType::Z}; }
    static Operation meas_x(uint32_t q, uint32_t id) { return {OpKind::MeasX, q, 0, id, PauliType::X}; }
    static Operation final_meas(PauliType basis) { return {OpKind::FinalMeas, 0, 0, 0, basis}; }

    bool operator==(const Operation& o) const {
        return kind == o.kind && a == o.a && b == o.b && flag_id == o.flag_id && basis == o.basis;
    }
};

// Qubits 0..num_code-1 are code qubits; qubit num_code+k is flag k.
struct Circuit {
    std::string header_kind = "CIRCUIT";  // CIRCUIT or GADGET
    std::vector<std::pair<std::string, std::string>> attributes;  // header key=value pairs
    std::size_t num_code = 0;
    std::vector<QubitRole> roles;
    std::vector<Operation> ops;

    std::size_t num_qubits() const { return roles.size(); }
    std::size_t num_flags() const { return roles.size() - num_code; }
    bool is_flag(std::size_t q) const { return q >= num_code; }
    uint32_t add_flag(QubitRole role);

    std::size_t cx_count() const;
    std::size_t flag_measurement_count() const;
    std::string qubit_name(std::size_t q) const;
    std::string attribute(const std::string& key) const;
    void set_attribute(const std::string& key, const std::string& value);

    bool operator==(const Circuit& o) const {
        return header_kind == o.header_kind && attributes == o.attributes && num_code == o.num_code &&
               roles == o.roles && ops == o.ops;
    }
};

// Checks structural invariants: every qubit initialized once before use, flags measured once after
// their last gate, no code-qubit measurement before the final one. Returns an empty string if valid.
std::string check_circuit_structure(const Circuit& c);

}  // namespace flagprep
