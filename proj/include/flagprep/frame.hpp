#pragma once

#include <cstddef>

#include "flagprep/circuit.hpp"
#include "flagprep/gf2.hpp"

namespace flagprep {

// Where a Pauli frame ends up: flipped flag outcomes by flag id and the residual on code qubits.
struct FrameEffect {
    BitVector flags;
    BitVector x;  // code qubits
    BitVector z;
};

// Propagates a Pauli inserted immediately before operation `pos` (pos == ops.size() means at the end)
// through the rest of the circuit. x and z range over all qubits.
FrameEffect propagate_frame(const Circuit& c, std::size_t pos, BitVector x, BitVector z);

}  // namespace flagprep
