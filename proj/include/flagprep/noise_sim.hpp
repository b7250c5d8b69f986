#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flagprep/circuit.hpp"
#include "flagprep/pauli.hpp"

namespace flagprep {

struct NoiseModel {
    double p = 1e-3;
    double memory_divisor = 100.0;
    double q() const { return p / memory_divisor; }
};

struct LocationCounts {
    std::size_t L_p = 0;
    std::size_t L_q = 0;
};

// L_p: inits, CX gates and flag measurements. L_q: one idle location per active qubit per CX step.
LocationCounts count_fault_locations(const Circuit& c);

class DegeneratePlan : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BucketPair {
    std::size_t f_p = 0;
    std::size_t f_q = 0;
    double prob = 0;      // true probability of exactly this many faults
    double sampling = 0;  // renormalized over retained nontrivial pairs
};

struct SubsetPlan {
    std::size_t L_p = 0, L_q = 0;
    double p = 0, q = 0;
    std::size_t S = 0;
    double p00 = 0;             // probability of no fault at all
    double trivial_addback = 0;  // expected fault-free samples per S drawn
    std::vector<BucketPair> pairs;

    double effective_count() const { return static_cast<double>(S) + trivial_addback; }
};

SubsetPlan build_subset_plan(std::size_t L_p, std::size_t L_q, const NoiseModel& model, std::size_t S);

// Binomial pmf in log space; exposed for tests.
double binomial_pmf(std::size_t n, double p, std::size_t k);

enum class NoiseKind : uint8_t { Depol1, Depol2, MeasFlip, Idle };

struct NoiseLocation {
    NoiseKind kind;
    std::size_t position;  // fault inserted just before this op index
    uint32_t q0 = 0;
    uint32_t q1 = 0;  // second qubit of a two-qubit location
    PauliType meas_basis = PauliType::Z;  // for MeasFlip
};

struct NoiseLocations {
    std::vector<NoiseLocation> p_locations;
    std::vector<NoiseLocation> q_locations;
};

NoiseLocations enumerate_noise_locations(const Circuit& c);

// Pauli on one or two qubits: bit 0 = x(q0), 1 = z(q0), 2 = x(q1), 3 = z(q1).
uint8_t random_fault_pattern(const NoiseLocation& loc, std::mt19937_64& rng);

// Effects of single-qubit X and Z at each location, propagated to the end of the circuit.
// Code frames are packed into one word, so the code must have at most 64 qubits.
class FaultEffectTable {
public:
    explicit FaultEffectTable(const Circuit& c);

    struct Effect {
        std::vector<uint64_t> flags;
        uint64_t x = 0, z = 0;
    };
    std::size_t flag_words() const { return W_; }

    // Accumulates the effect of `pattern` at a location into (flags, x, z).
    void apply(bool idle, std::size_t loc, uint8_t pattern, uint64_t* flags, uint64_t& x, uint64_t& z) const;

    const NoiseLocations& locations() const { return locs_; }

private:
    std::size_t W_ = 1;
    NoiseLocations locs_;
    // Per location: 4 basis effects, each W flag words then x and z.
    std::vector<uint64_t> p_data_, q_data_;
};

// Explicit forward simulation of injected Paulis; the oracle the table is checked against.
struct InjectedPauli {
    std::size_t position;  // before this op index
    PauliOperator pauli;   // over all circuit qubits
};

struct FrameOutcome {
    BitVector flags;
    BitVector x, z;  // code qubits
};

class PauliFrameSimulator {
public:
    explicit PauliFrameSimulator(const Circuit& c) : c_(c) {}
    FrameOutcome run(std::vector<InjectedPauli> faults) const;

private:
    const Circuit& c_;
};

// Which residual type the final transversal measurement reads and which checks define its syndrome.
struct ObservationSpec {
    PauliType error_type = PauliType::X;
    std::vector<uint64_t> checks;  // generators, then state-stabilizing logicals; each a code-qubit mask
    std::size_t syndrome_bits = 0;

    static ObservationSpec for_state(const CssState& state, PauliType error_type);
    uint64_t key(uint64_t residual) const;
    uint64_t syndrome(uint64_t key) const { return key & ((syndrome_bits >= 64) ? ~0ULL : ((1ULL << syndrome_bits) - 1)); }
    uint64_t cls(uint64_t key) const { return key >> syndrome_bits; }
};

struct SampleOutcome {
    uint64_t key = 0;  // syndrome bits, then class bits
    uint16_t f_p = 0, f_q = 0;
};

struct MonteCarloResult {
    std::size_t drawn = 0;
    std::size_t accepted = 0;  // among drawn samples
    double trivial_addback = 0;
    std::size_t syndrome_bits = 0;
    std::size_t class_bits = 0;
    std::vector<SampleOutcome> outcomes;  // accepted drawn samples, shard order

    double effective_count() const { return static_cast<double>(drawn) + trivial_addback; }
    double acceptance() const { return (static_cast<double>(accepted) + trivial_addback) / effective_count(); }
};

struct MonteCarloOptions {
    std::size_t shards = 64;
    unsigned threads = 0;  // 0 means hardware concurrency
};

MonteCarloResult run_monte_carlo(const Circuit& c, const CssState& state, const SubsetPlan& plan, uint64_t seed,
                                 const MonteCarloOptions& opts = {});

// Shard seeds and sizes shared with other samplers.
uint64_t shard_seed(uint64_t seed, std::size_t shard);
std::size_t shard_size(std::size_t total, std::size_t shards, std::size_t shard);

// Runs fn(shard_index) over all shards on a thread pool.
void for_each_shard(std::size_t shards, unsigned threads, const std::function<void(std::size_t)>& fn);

std::pair<double, double> wilson_interval(double successes, double trials, double z = 1.959963984540054);

// Binary outcome stream: magic, header counts, then fixed-width records.
void write_outcomes(const std::string& path, const MonteCarloResult& r);
MonteCarloResult read_outcomes(const std::string& path);
void write_outcomes_csv(const std::string& path, const MonteCarloResult& r);

}  // namespace flagprep
