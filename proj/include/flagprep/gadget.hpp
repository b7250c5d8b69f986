#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flagprep/circuit.hpp"
#include "flagprep/pauli.hpp"

namespace flagprep {

// Gadget-local qubits: 0 is the root c, 1..r are targets, r+1..r+m are flags.
struct FlagGadget {
    std::size_t t = 0;
    std::size_t r = 0;
    std::size_t m = 0;  // flags actually used
    PauliType detect_type = PauliType::X;
    std::vector<std::pair<uint8_t, uint8_t>> gates;  // time-ordered CX(control, target)
    uint8_t root = 0;  // qubit initialized in the root basis (|+> for X-detecting); differs from 0 after a teleport

    std::size_t num_qubits() const { return 1 + r + m; }
    bool is_flag(std::size_t q) const { return q > r; }
    std::size_t cx_count() const { return gates.size(); }
    // Qubits whose measurement is a flag outcome: all flags.
    std::vector<uint8_t> flag_qubits() const;

    // Standalone circuit: root in the root basis, everything else in the other basis,
    // lazy initialization and eager flag measurement.
    Circuit to_circuit() const;
    static FlagGadget from_circuit(const Circuit& c);
    // State prepared on {c} ∪ targets: GHZ-like, stabilized by the full-support root-type operator.
    CssState target_state() const;

    bool operator==(const FlagGadget& o) const {
        return t == o.t && r == o.r && m == o.m && detect_type == o.detect_type && gates == o.gates &&
               root == o.root;
    }
};

// Exhaustive check of all combinations of f <= t faults of the detect type.
bool gadget_ft_test(const FlagGadget& g, std::size_t t);

FlagGadget hadamard_conjugate_gadget(const FlagGadget& g);

enum class SearchStatus { Found, SearchExhausted, BudgetExhausted };

struct SearchOptions {
    uint64_t node_budget = 0;  // FT tests; 0 means unlimited
    bool allow_teleport = true;
};

struct SearchResult {
    SearchStatus status = SearchStatus::SearchExhausted;
    std::optional<FlagGadget> gadget;
    uint64_t nodes = 0;  // candidate FT tests performed
};

SearchResult discover_gadget(std::size_t t, std::size_t r, std::size_t m, const SearchOptions& opts = {});

class MissingGadget : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// X-detecting gadgets keyed by (t, r); Z-detecting ones are obtained by conjugation.
class GadgetLibrary {
public:
    struct Entry {
        FlagGadget gadget;
        bool optimal = false;  // discovery at m-1 was exhausted (or m == 0)
    };

    GadgetLibrary() = default;
    explicit GadgetLibrary(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void set_options(const SearchOptions& o) { opts_ = o; }
    // When false, discoveries stay in memory and the directory is only read.
    void set_persist(bool p) { persist_ = p; }
    // Looks up (t, r); on a miss discovers at m = 0, 1, 2, ... and persists if a directory is set.
    const Entry& get(std::size_t t, std::size_t r);
    std::optional<Entry> find(std::size_t t, std::size_t r) const;
    void insert(const Entry& e);
    std::size_t max_flags_tried = 16;

private:
    std::filesystem::path file_for(std::size_t t, std::size_t r) const;
    std::optional<Entry> load(std::size_t t, std::size_t r) const;

    mutable std::mutex mu_;
    std::map<std::pair<std::size_t, std::size_t>, Entry> entries_;
    std::filesystem::path dir_;
    SearchOptions opts_;
    bool persist_ = true;
};

std::string serialize_gadget(const FlagGadget& g, bool optimal);
FlagGadget parse_gadget(const std::string& text, bool* optimal = nullptr);

}  // namespace flagprep
