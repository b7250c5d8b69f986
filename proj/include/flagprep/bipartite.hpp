#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "flagprep/circuit.hpp"
#include "flagprep/pauli.hpp"

namespace flagprep {

class RankDeficient : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AdjacencyAsymmetry : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Bipartite CX preparation circuit: controls start in |+>, targets in |0>, one CX per edge.
struct BipartiteCircuit {
    std::size_t n = 0;
    std::vector<std::size_t> controls;
    std::vector<std::size_t> targets;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // (control, target), sorted

    std::size_t degree(std::size_t q) const;
    std::size_t max_degree() const;
    // Plain (non-FT) circuit: inits, then edges in sorted order.
    Circuit to_circuit(const CssState& state) const;
};

uint64_t splitmix64(uint64_t x);

BipartiteCircuit synthesize_bipartite(const CssState& state, uint64_t seed);
BipartiteCircuit best_of_trials(const CssState& state, std::size_t trials, uint64_t seed);

}  // namespace flagprep
