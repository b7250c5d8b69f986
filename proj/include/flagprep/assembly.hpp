#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "flagprep/bipartite.hpp"
#include "flagprep/circuit.hpp"
#include "flagprep/gadget.hpp"
#include "flagprep/pauli.hpp"

namespace flagprep {

class CyclicPrecedence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AssemblyOptions {
    std::size_t t = 0;                  // 0 means the state's t
    // Smaller t for Z-detecting gadgets; 0 drops them. Applied only if the coset bound certifies it.
    std::optional<std::size_t> z_gadget_t_override;
    std::size_t retries = 16;
    uint64_t seed = 1;
    bool x_gadgets = true;  // false strips the X-detecting gadgets
    bool z_gadgets = true;  // false strips the Z-detecting gadgets
};

struct AssemblyInfo {
    std::size_t t_x = 0;
    std::size_t t_z = 0;
    bool override_applied = false;
    std::size_t max_z_coset_weight = 0;
};

// Fuses the bipartite circuit with per-qubit flag gadgets. The result is in a valid time order with
// lazy initialization and eager flag measurement.
Circuit assemble_ft_circuit(const BipartiteCircuit& bip, const CssState& state, GadgetLibrary& library,
                            const AssemblyOptions& opts = {}, AssemblyInfo* info = nullptr);

// Gadget t actually used for Z-detecting gadgets, after checking the override against the coset bound.
std::size_t z_gadget_t(const CssState& state, std::size_t t, std::optional<std::size_t> override_t,
                       std::size_t* max_weight = nullptr);

// Picks, among synthesis trials, the bipartite circuit with the fewest CX gates after gadgets.
BipartiteCircuit best_bipartite_for_assembly(const CssState& state, GadgetLibrary& library, std::size_t trials,
                                             uint64_t seed, const AssemblyOptions& opts = {});

enum class ScheduleObjective { MinMaxQubits, MinDepth };

struct CircuitMetrics {
    std::size_t cx_count = 0;
    std::size_t flag_count = 0;
    std::size_t depth = 0;
    std::size_t max_simultaneous_qubits = 0;
};

CircuitMetrics circuit_metrics(const Circuit& c);

// Re-emits the CX gates in the given order with lazy initialization, eager flag measurement, and the
// final measurement last. `order` indexes the circuit's CX gates in their current order.
Circuit rebuild_with_order(const Circuit& c, const std::vector<std::size_t>& order);

Circuit schedule_circuit(const Circuit& c, ScheduleObjective objective, std::size_t shuffles, uint64_t seed);

// Searches slot permutations and gate orders together: each shuffle runs all gadgets forward and
// fuses waiting slot pairs greedily. Returns the best circuit under the objective.
Circuit assemble_and_schedule(const BipartiteCircuit& bip, const CssState& state, GadgetLibrary& library,
                              const AssemblyOptions& opts, ScheduleObjective objective, std::size_t shuffles,
                              AssemblyInfo* info = nullptr);

}  // namespace flagprep
