#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flagprep/circuit.hpp"
#include "flagprep/pauli.hpp"

namespace flagprep {

// Aaronson-Gottesman stabilizer tableau with sign tracking. Starts in |0...0>.
class Tableau {
public:
    explicit Tableau(std::size_t n);

    std::size_t num_qubits() const { return n_; }
    void h(std::size_t q);
    void cx(std::size_t a, std::size_t b);
    void apply_pauli(const PauliOperator& p);
    void apply_x(std::size_t q);
    void apply_z(std::size_t q);

    struct MeasureResult {
        bool outcome;  // true means -1
        bool deterministic;
    };
    MeasureResult measure_z(std::size_t q, std::mt19937_64& rng);
    MeasureResult measure_x(std::size_t q, std::mt19937_64& rng);

    // Sign of p if p (up to sign) is in the stabilizer group: false = +1, true = -1.
    std::optional<bool> stabilizer_sign(const PauliOperator& p) const;

private:
    struct Row {
        std::vector<uint64_t> x, z;
        bool r = false;
    };
    bool getx(const Row& row, std::size_t q) const { return (row.x[q >> 6] >> (q & 63)) & 1; }
    bool getz(const Row& row, std::size_t q) const { return (row.z[q >> 6] >> (q & 63)) & 1; }
    void rowsum(Row& h, const Row& i) const;

    std::size_t n_;
    std::size_t words_;
    std::vector<Row> rows_;  // destabilizers [0,n), stabilizers [n,2n)
};

struct TableauCheck {
    bool ok = true;
    std::string message;
};

// Noiseless run of the circuit; every flag must read +1 deterministically and every state
// stabilizer (generators and stabilizing logicals) must hold with sign +1.
TableauCheck tableau_check_circuit(const Circuit& c, const CssState& state);

// Result of running a circuit with Pauli faults on the tableau.
struct TableauRun {
    std::vector<bool> flag_outcomes;         // by flag id, true = -1
    std::vector<bool> stabilizer_flips;      // per entry of the probe list, true = -1
};

// A fault applied right after operation `after_op` (or before it if before_op is set).
struct InjectedFault {
    std::size_t op_index;
    bool before = false;
    PauliOperator pauli;
};

// Runs the circuit with injected Paulis and reports flag outcomes and the sign of each probe operator
// (given on code qubits) at the end of the circuit. Throws if any probe is not a stabilizer up to sign.
TableauRun run_tableau_with_faults(const Circuit& c, const std::vector<InjectedFault>& faults,
                                   const std::vector<PauliOperator>& probes, uint64_t seed = 0);

}  // namespace flagprep
