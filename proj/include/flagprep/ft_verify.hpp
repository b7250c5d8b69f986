#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flagprep/circuit.hpp"
#include "flagprep/gadget.hpp"
#include "flagprep/pauli.hpp"

namespace flagprep {

enum class FaultSite { AfterInit, AfterCX, BeforeMeasurement };

struct FaultLocation {
    std::size_t op_index = 0;
    FaultSite site = FaultSite::AfterInit;
    PauliType type = PauliType::X;
    // Each variant is the set of qubits receiving the Pauli of `type`.
    std::vector<std::vector<uint32_t>> variants;

    // Position at which the fault is inserted for propagation.
    std::size_t insert_position() const { return site == FaultSite::BeforeMeasurement ? op_index : op_index + 1; }
};

// Init sites are skipped when the Pauli stabilizes the initial state; measurement sites are kept only
// when the Pauli flips the outcome; final measurement and idling are not fault locations.
std::vector<FaultLocation> enumerate_fault_locations(const Circuit& c, PauliType type);

struct ChosenFault {
    std::size_t location = 0;  // index into enumerate_fault_locations
    std::size_t variant = 0;
    bool operator==(const ChosenFault& o) const { return location == o.location && variant == o.variant; }
};

struct Counterexample {
    std::vector<ChosenFault> faults;
    BitVector residual;  // code-qubit error of the tested type
    std::size_t reduced_weight = 0;
};

struct VerifyResult {
    bool pass = true;
    std::optional<Counterexample> counterexample;
    uint64_t combinations = 0;  // fault combinations examined
};

class VerificationBudgetExhausted : public BudgetExhausted {
public:
    VerificationBudgetExhausted(uint64_t checked, uint64_t total)
        : BudgetExhausted("verification stopped after " + std::to_string(checked) + " of " +
                          std::to_string(total) + " fault combinations"),
          checked(checked),
          total(total) {}
    uint64_t checked;
    uint64_t total;
};

// Number of combinations of at most t faults on distinct locations (saturates at UINT64_MAX).
uint64_t count_fault_combinations(const std::vector<FaultLocation>& locs, std::size_t t);

struct VerifyOptions {
    uint64_t budget = 0;   // 0 means unlimited
    unsigned threads = 0;  // 0 means hardware concurrency
};

VerifyResult verify_fault_tolerance(const Circuit& c, const CssState& state, std::size_t t, PauliType type,
                                    const VerifyOptions& opts = {});

struct ReplayResult {
    BitVector flags;
    BitVector residual;
    std::size_t reduced_weight = 0;
};

// Independent re-propagation of a fault set, for checking reported counterexamples.
ReplayResult replay_faults(const Circuit& c, const CssState& state, PauliType type,
                           const std::vector<ChosenFault>& faults);

std::string describe_counterexample(const Circuit& c, PauliType type, const Counterexample& ce);

}  // namespace flagprep
