#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flagprep/noise_sim.hpp"
#include "flagprep/pauli.hpp"

namespace flagprep {

// Class words pack logical bit i at position i. Ties resolve toward the smallest
// bit vector read from index 0, so bit 0 is the most significant for ordering.
bool class_lex_less(uint64_t a, uint64_t b, std::size_t class_bits);

// Per-syndrome class histogram from accepted training samples.
class MLTable {
public:
    MLTable() = default;
    MLTable(std::size_t syndrome_bits, std::size_t class_bits) : syndrome_bits_(syndrome_bits), class_bits_(class_bits) {}

    void add(uint64_t syndrome, uint64_t cls, uint64_t count = 1);
    void merge(const MLTable& other);

    std::optional<uint64_t> most_likely(uint64_t syndrome) const;
    // Count of the runner-up class divided by the winner's count; 0 when only one class was seen.
    double runner_up_ratio(uint64_t syndrome) const;
    const std::vector<std::pair<uint64_t, uint64_t>>* counts(uint64_t syndrome) const;

    std::size_t size() const { return entries_.size(); }
    std::size_t syndrome_bits() const { return syndrome_bits_; }
    std::size_t class_bits() const { return class_bits_; }
    uint64_t total() const { return total_; }
    std::vector<uint64_t> syndromes() const;  // sorted

private:
    std::size_t syndrome_bits_ = 0;
    std::size_t class_bits_ = 0;
    uint64_t total_ = 0;
    // class -> count, sorted by class
    std::unordered_map<uint64_t, std::vector<std::pair<uint64_t, uint64_t>>> entries_;
};

MLTable build_ml_lut(const std::vector<SampleOutcome>& training, std::size_t syndrome_bits, std::size_t class_bits);

class ClassConflict : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MWEntry {
    uint64_t cls = 0;
    uint8_t weight = 0;
    bool ambiguous = false;  // another error of the same weight gives a different class
};

class MWTable {
public:
    std::size_t syndrome_bits = 0;
    std::size_t class_bits = 0;
    std::size_t w_max = 0;
    std::size_t conflicts = 0;  // syndromes reached by errors of different class
    std::unordered_map<uint64_t, MWEntry> entries;

    const MWEntry* find(uint64_t syndrome) const;
};

// Enumerates all errors of one type with weight 1..w_max on the ideal state.
// Conflicts within the guaranteed radius throw ClassConflict; beyond it the lower weight wins.
MWTable build_mw_lut(const CssState& state, PauliType error_type, std::size_t w_max);

inline constexpr std::size_t kMaxMWEnumeration = 10'000'000;

struct DecodePolicy {
    bool use_ml = true;
    bool use_mw = true;
    bool even_distance_discard = false;
    std::size_t t = 0;  // MW weight that triggers a discard
    // Discard when the runner-up class is at least this likely relative to the winner.
    std::optional<double> ml_ratio_discard;
};

enum class DecodeSource : uint8_t { ML, MW, Fallback, Discard };

struct Decision {
    DecodeSource source = DecodeSource::Fallback;
    uint64_t cls = 0;
};

Decision decode(uint64_t syndrome, const MLTable* ml, const MWTable* mw, const DecodePolicy& policy);

struct LayerStats {
    uint64_t hits = 0;
    uint64_t errors = 0;
};

struct EvaluationReport {
    uint64_t samples = 0;  // accepted test samples, fault-free add-back excluded
    double trivial_addback = 0;
    uint64_t discarded = 0;
    double logical_errors = 0;
    double kept = 0;  // accepted, not discarded, including add-back
    LayerStats ml, mw, fallback;
    double addback_errors = 0;  // add-back samples decoded to a nontrivial class
    double logical_error_rate() const { return kept > 0 ? logical_errors / kept : 0.0; }
    std::pair<double, double> interval() const { return wilson_interval(logical_errors, kept); }
    double post_discard_rate() const;  // kept / accepted
};

EvaluationReport evaluate_test_set(const std::vector<SampleOutcome>& test, double trivial_addback,
                                   std::size_t syndrome_bits, const MLTable* ml, const MWTable* mw,
                                   const DecodePolicy& policy);

struct Split {
    std::vector<SampleOutcome> train, test;
    double train_addback = 0, test_addback = 0;
};

// Random equal partition keyed by seed; the fault-free add-back is halved.
Split split_train_test(const MonteCarloResult& r, uint64_t seed);

// JSON persistence of full class histograms.
void write_ml_table(const std::filesystem::path& path, const MLTable& t);
MLTable read_ml_table(const std::filesystem::path& path);
void write_mw_table(const std::filesystem::path& path, const MWTable& t);

}  // namespace flagprep
