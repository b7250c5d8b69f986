#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "flagprep/circuit.hpp"
#include "flagprep/decoder.hpp"
#include "flagprep/gadget.hpp"
#include "flagprep/pauli.hpp"

namespace flagprep {

enum class QecMode { FullFT, FtXOnly, NoQec };

std::string to_string(QecMode m);
QecMode parse_qec_mode(const std::string& s);  // full_ft, ft_x_only, no_qec

// One Steane-type Z-error correction round on a |+> data block using a |0> resource block.
struct SteaneExperimentConfig {
    CssState code;               // any logical state; the experiment sets |0> and |+> itself
    Circuit resource;            // |0> preparation circuit; unused in NoQec mode
    QecMode mode = QecMode::FullFT;
    double p = 1e-3;
    double data_multiplier = 10;  // data block depolarizing rate is this times p
    double memory_divisor = 100;
    std::size_t samples = 100000;
    uint64_t seed = 1;
    std::size_t shards = 64;
    unsigned threads = 0;
};

struct SteaneExperimentResult {
    std::size_t samples = 0;
    std::size_t logical_errors = 0;
    std::size_t prep_attempts = 0;
    std::size_t prep_accepted = 0;
    double logical_error_rate() const { return samples ? static_cast<double>(logical_errors) / samples : 0.0; }
    std::pair<double, double> interval() const;
    double acceptance() const { return prep_attempts ? static_cast<double>(prep_accepted) / prep_attempts : 1.0; }
};

// Builds the resource circuit for a mode: FtXOnly strips the Z-detecting gadgets.
Circuit steane_resource_circuit(const CssState& code, QecMode mode, GadgetLibrary& lib, std::size_t shuffles = 200);

SteaneExperimentResult run_steane_qec_experiment(const SteaneExperimentConfig& cfg);

// Z frames across the transversal CX (resource controls, data targets) followed by an X-basis
// readout of the resource. Returns {measured resource Z pattern, data Z pattern}.
struct TransversalNoise {
    uint64_t control_z = 0;  // Z faults on resource qubits after the gate
    uint64_t target_z = 0;   // Z faults on data qubits after the gate
    uint64_t meas_flip = 0;
};
std::pair<uint64_t, uint64_t> transversal_cx_z(uint64_t resource_z, uint64_t data_z, const TransversalNoise& noise);

// Exact no-QEC logical error rate: two independent depolarizing rounds on every data qubit,
// then ideal min-weight decoding. Enumerates all 2^n Z patterns, so n must be small.
double no_qec_closed_form(const CssState& code, double p, double data_multiplier = 10);

}  // namespace flagprep
