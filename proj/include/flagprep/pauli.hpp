#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flagprep/gf2.hpp"

namespace flagprep {

class GroupTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PauliType { X, Z };

inline PauliType opposite(PauliType t) { return t == PauliType::X ? PauliType::Z : PauliType::X; }
inline char type_char(PauliType t) { return t == PauliType::X ? 'X' : 'Z'; }

// Phase-free Pauli operator on n qubits.
struct PauliOperator {
    BitVector x;
    BitVector z;

    PauliOperator() = default;
    explicit PauliOperator(std::size_t n) : x(n), z(n) {}
    PauliOperator(BitVector xb, BitVector zb);

    static PauliOperator from_string(const std::string& s);  // over {I,X,Y,Z}
    static PauliOperator single(std::size_t n, std::size_t q, char p);
    static PauliOperator of_type(PauliType t, const BitVector& support);

    std::size_t num_qubits() const { return x.size(); }
    std::size_t weight() const { return (x | z).popcount(); }
    bool is_identity() const { return x.none() && z.none(); }
    bool is_type(PauliType t) const { return t == PauliType::X ? z.none() : x.none(); }
    const BitVector& bits(PauliType t) const { return t == PauliType::X ? x : z; }
    BitVector& bits(PauliType t) { return t == PauliType::X ? x : z; }
    std::string to_string() const;

    PauliOperator& operator*=(const PauliOperator& o) {
        x ^= o.x;
        z ^= o.z;
        return *this;
    }
    friend PauliOperator operator*(PauliOperator a, const PauliOperator& b) { return a *= b; }
    bool operator==(const PauliOperator& o) const { return x == o.x && z == o.z; }
};

bool commutes(const PauliOperator& p, const PauliOperator& q);

struct CliffordGate {
    enum class Kind { CX, H } kind;
    std::size_t a = 0;
    std::size_t b = 0;
    static CliffordGate cx(std::size_t a, std::size_t b) { return {Kind::CX, a, b}; }
    static CliffordGate h(std::size_t q) { return {Kind::H, q, q}; }
};

PauliOperator conjugate_through_gate(PauliOperator p, const CliffordGate& g);

// Exact minimum weight of e times any product of the generators (Gray-code walk).
std::size_t min_weight_modulo(const PauliOperator& e, const std::vector<PauliOperator>& generators);

inline constexpr std::size_t kMaxEnumeratedGenerators = 20;

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(ValidationReport r);
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

// A CSS code together with a chosen logical state.
struct CssState {
    std::string name;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t d = 0;
    std::vector<PauliOperator> x_generators;
    std::vector<PauliOperator> z_generators;
    std::vector<PauliOperator> logical_x;
    std::vector<PauliOperator> logical_z;
    // Per logical qubit: which representative stabilizes the prepared state.
    std::vector<PauliType> stabilizing_type;
    std::string state_label;

    std::size_t t() const { return d / 2; }

    // Generators plus state-stabilizing logicals of the given type.
    std::vector<PauliOperator> stabilizers_of_type(PauliType t) const;
    const std::vector<PauliOperator>& generators_of_type(PauliType t) const {
        return t == PauliType::X ? x_generators : z_generators;
    }
    // State-stabilizing logical representatives of the given type.
    std::vector<PauliOperator> stabilizing_logicals(PauliType t) const;
    // Same-type operators that reduce an error of type t.
    std::vector<PauliOperator> reduction_group(PauliType t) const { return stabilizers_of_type(t); }

    // Selects the logical state from a label: "0", "+", or one character per logical qubit.
    void set_state(const std::string& label);
    // Swaps the roles of X and Z everywhere (Hadamard conjugation).
    CssState hadamard_conjugate() const;
};

struct SyndromeClass {
    BitVector syndrome;
    BitVector cls;
    bool operator==(const SyndromeClass& o) const { return syndrome == o.syndrome && cls == o.cls; }
};

// error_type is the type of the error; checks run against opposite-type generators and logicals.
SyndromeClass syndrome_and_class(const PauliOperator& e, const CssState& state, PauliType error_type);
SyndromeClass syndrome_and_class(const BitVector& support, const CssState& state, PauliType error_type);

ValidationReport validate_css_state(const CssState& state);

// Minimum coset weight for every error coset of one type, indexed by the error's
// commutation pattern with the opposite-type state stabilizers (generators first, then logicals).
class CosetTable {
public:
    CosetTable(const CssState& state, PauliType error_type);

    std::size_t num_check_bits() const { return checks_.size(); }
    uint64_t key(const BitVector& support) const;
    uint64_t column(std::size_t q) const { return columns_[q]; }
    uint8_t weight_of_key(uint64_t key) const { return dist_[key]; }
    std::size_t min_weight(const BitVector& support) const { return dist_[key(support)]; }
    std::size_t max_weight() const { return max_; }

private:
    std::vector<BitVector> checks_;
    std::vector<uint64_t> columns_;
    std::vector<uint8_t> dist_;
    std::size_t max_ = 0;
};

inline constexpr std::size_t kMaxCosetBits = 24;

std::size_t max_coset_weight(const CssState& state, PauliType error_type);

}  // namespace flagprep
