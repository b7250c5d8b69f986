#include "flagprep/pauli.hpp"

#include <algorithm>
#include <bit>
#include <deque>

namespace flagprep {

PauliOperator::PauliOperator(BitVector xb, BitVector zb) : x(std::move(xb)), z(std::move(zb)) {
    if (x.size() != z.size()) throw std::invalid_argument("x/z length mismatch");
}

PauliOperator PauliOperator::from_string(const std::string& s) {
    PauliOperator p(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        switch (s[i]) {
            case 'I': case '_': break;
            case 'X': p.x.set(i); break;
            case 'Z': p.z.set(i); break;
            case 'Y': p.x.set(i); p.z.set(i); break;
            default: throw std::invalid_argument(std::string("bad Pauli character '") + s[i] + "'");
        }
    }
    return p;
}

PauliOperator PauliOperator::single(std::size_t n, std::size_t q, char c) {
    PauliOperator p(n);
    if (c == 'X' || c == 'Y') p.x.set(q);
    if (c == 'Z' || c == 'Y') p.z.set(q);
    return p;
}

PauliOperator PauliOperator::of_type(PauliType t, const BitVector& support) {
    PauliOperator p(support.size());
    p.bits(t) = support;
    return p;
}

std::string PauliOperator::to_string() const {
    std::string s(num_qubits(), 'I');
    for (std::size_t i = 0; i < s.size(); ++i) {
        bool a = x.get(i), b = z.get(i);
        s[i] = a ? (b ? 'Y' : 'X') : (b ? 'Z' : 'I');
    }
    return s;
}

bool commutes(const PauliOperator& p, const PauliOperator& q) {
    if (p.num_qubits() != q.num_qubits()) throw std::invalid_argument("qubit count mismatch");
    return p.x.dot(q.z) == p.z.dot(q.x);
}

PauliOperator conjugate_through_gate(PauliOperator p, const CliffordGate& g) {
    if (g.kind == CliffordGate::Kind::CX) {
        if (p.x.get(g.a)) p.x.flip(g.b);
        if (p.z.get(g.b)) p.z.flip(g.a);
    } else {
        bool xa = p.x.get(g.a), za = p.z.get(g.a);
        p.x.set(g.a, za);
        p.z.set(g.a, xa);
    }
    return p;
}

std::size_t min_weight_modulo(const PauliOperator& e, const std::vector<PauliOperator>& generators) {
    if (generators.size() > kMaxEnumeratedGenerators)
        throw GroupTooLarge("reduction group has " + std::to_string(generators.size()) +
                            " generators; enumeration cap is " +
                            std::to_string(kMaxEnumeratedGenerators));
    PauliOperator cur = e;
    std::size_t best = cur.weight();
    const uint64_t total = 1ULL << generators.size();
    for (uint64_t i = 1; i < total && best > 0; ++i) {
        cur *= generators[std::countr_zero(i)];
        best = std::min(best, cur.weight());
    }
    return best;
}

ValidationError::ValidationError(ValidationReport r)
    : std::runtime_error([&] {
          std::string s = "invalid CSS state:";
          for (const auto& v : r.violations) s += "\n  " + v;
          return s;
      }()),
      report_(std::move(r)) {}

std::vector<PauliOperator> CssState::stabilizing_logicals(PauliType t) const {
    std::vector<PauliOperator> out;
    const auto& reps = t == PauliType::X ? logical_x : logical_z;
    for (std::size_t j = 0; j < stabilizing_type.size() && j < reps.size(); ++j)
        if (stabilizing_type[j] == t) out.push_back(reps[j]);
    return out;
}

std::vector<PauliOperator> CssState::stabilizers_of_type(PauliType t) const {
    auto out = generators_of_type(t);
    for (auto& l : stabilizing_logicals(t)) out.push_back(std::move(l));
    return out;
}

void CssState::set_state(const std::string& label) {
    stabilizing_type.assign(k, PauliType::Z);
    if (label == "0" || label == "+") {
        stabilizing_type.assign(k, label == "0" ? PauliType::Z : PauliType::X);
    } else if (label.size() == k) {
        for (std::size_t j = 0; j < k; ++j) {
            if (label[j] == '0') stabilizing_type[j] = PauliType::Z;
            else if (label[j] == '+') stabilizing_type[j] = PauliType::X;
            else throw std::invalid_argument("bad state label '" + label + "'");
        }
    } else {
        throw std::invalid_argument("bad state label '" + label + "'");
    }
    state_label = label;
}

CssState CssState::hadamard_conjugate() const {
    CssState h = *this;
    auto swap_ops = [](std::vector<PauliOperator>& v) {
        for (auto& p : v) std::swap(p.x, p.z);
    };
    h.x_generators = z_generators;
    h.z_generators = x_generators;
    h.logical_x = logical_z;
    h.logical_z = logical_x;
    swap_ops(h.x_generators);
    swap_ops(h.z_generators);
    swap_ops(h.logical_x);
    swap_ops(h.logical_z);
    for (auto& s : h.stabilizing_type) s = opposite(s);
    std::string label;
    for (auto s : h.stabilizing_type) label += s == PauliType::Z ? '0' : '+';
    h.state_label = label;
    return h;
}

SyndromeClass syndrome_and_class(const BitVector& support, const CssState& state, PauliType error_type) {
    PauliType check = opposite(error_type);
    const auto& gens = state.generators_of_type(check);
    auto logs = state.stabilizing_logicals(check);
    SyndromeClass sc{BitVector(gens.size()), BitVector(logs.size())};
    for (std::size_t i = 0; i < gens.size(); ++i)
        if (gens[i].bits(check).dot(support)) sc.syndrome.set(i);
    for (std::size_t j = 0; j < logs.size(); ++j)
        if (logs[j].bits(check).dot(support)) sc.cls.set(j);
    return sc;
}

SyndromeClass syndrome_and_class(const PauliOperator& e, const CssState& state, PauliType error_type) {
    return syndrome_and_class(e.bits(error_type), state, error_type);
}

ValidationReport validate_css_state(const CssState& s) {
    ValidationReport rep;
    auto bad = [&](std::string msg) { rep.violations.push_back(std::move(msg)); };
    auto check_len = [&](const std::vector<PauliOperator>& v, const char* what) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i].num_qubits() != s.n)
                bad(std::string(what) + "[" + std::to_string(i) + "] has wrong length");
    };
    check_len(s.x_generators, "x_generators");
    check_len(s.z_generators, "z_generators");
    check_len(s.logical_x, "logical_x");
    check_len(s.logical_z, "logical_z");
    if (!rep.ok()) return rep;

    for (std::size_t i = 0; i < s.x_generators.size(); ++i)
        if (!s.x_generators[i].is_type(PauliType::X))
            bad("x_generators[" + std::to_string(i) + "] is not X-type");
    for (std::size_t i = 0; i < s.z_generators.size(); ++i)
        if (!s.z_generators[i].is_type(PauliType::Z))
            bad("z_generators[" + std::to_string(i) + "] is not Z-type");
    if (s.logical_x.size() != s.k || s.logical_z.size() != s.k)
        bad("expected " + std::to_string(s.k) + " logical representatives of each type");
    if (s.stabilizing_type.size() != s.k) bad("state label does not cover every logical qubit");

    for (std::size_t i = 0; i < s.x_generators.size(); ++i)
        for (std::size_t j = 0; j < s.z_generators.size(); ++j)
            if (!commutes(s.x_generators[i], s.z_generators[j]))
                bad("x_generators[" + std::to_string(i) + "] and z_generators[" + std::to_string(j) +
                    "] anticommute");
    for (std::size_t j = 0; j < s.logical_x.size(); ++j) {
        for (std::size_t i = 0; i < s.z_generators.size(); ++i)
            if (!commutes(s.logical_x[j], s.z_generators[i]))
                bad("logical_x[" + std::to_string(j) + "] anticommutes with z_generators[" +
                    std::to_string(i) + "]");
        for (std::size_t l = 0; l < s.logical_z.size(); ++l)
            if (commutes(s.logical_x[j], s.logical_z[l]) == (j == l))
                bad("logical_x[" + std::to_string(j) + "] and logical_z[" + std::to_string(l) +
                    "] have wrong commutation");
    }
    for (std::size_t j = 0; j < s.logical_z.size(); ++j)
        for (std::size_t i = 0; i < s.x_generators.size(); ++i)
            if (!commutes(s.logical_z[j], s.x_generators[i]))
                bad("logical_z[" + std::to_string(j) + "] anticommutes with x_generators[" +
                    std::to_string(i) + "]");
    if (!rep.ok()) return rep;

    for (PauliType t : {PauliType::X, PauliType::Z}) {
        auto stabs = s.stabilizers_of_type(t);
        RowSpace rs(s.n);
        for (std::size_t i = 0; i < stabs.size(); ++i)
            if (!rs.insert(stabs[i].bits(t)))
                bad(std::string(1, type_char(t)) + "-type stabilizer " + std::to_string(i) +
                    " is dependent on earlier ones (rank deficiency)");
    }
    std::size_t total = s.x_generators.size() + s.z_generators.size() + s.k;
    if (total != s.n)
        bad("generator count " + std::to_string(total) + " does not equal n = " + std::to_string(s.n));
    return rep;
}

CosetTable::CosetTable(const CssState& state, PauliType error_type) {
    checks_ = {};
    PauliType check = opposite(error_type);
    for (const auto& p : state.stabilizers_of_type(check)) checks_.push_back(p.bits(check));
    if (checks_.size() > kMaxCosetBits)
        throw GroupTooLarge("coset table needs 2^" + std::to_string(checks_.size()) +
                            " entries; cap is 2^" + std::to_string(kMaxCosetBits));
    columns_.assign(state.n, 0);
    for (std::size_t i = 0; i < checks_.size(); ++i)
        for (auto q : checks_[i].ones()) columns_[q] |= 1ULL << i;

    const std::size_t size = std::size_t{1} << checks_.size();
    dist_.assign(size, 0xFF);
    dist_[0] = 0;
    std::vector<uint64_t> frontier{0}, next;
    std::vector<uint64_t> cols;
    for (auto c : columns_)
        if (c && std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
    uint8_t level = 0;
    std::size_t seen = 1;
    while (!frontier.empty()) {
        ++level;
        next.clear();
        for (auto s : frontier)
            for (auto c : cols) {
                uint64_t u = s ^ c;
                if (dist_[u] == 0xFF) {
                    dist_[u] = level;
                    next.push_back(u);
                }
            }
        seen += next.size();
        if (!next.empty()) max_ = level;
        frontier.swap(next);
    }
    if (seen != size) throw std::logic_error("coset table: check operators are not independent");
}

uint64_t CosetTable::key(const BitVector& support) const {
    uint64_t k = 0;
    for (auto q : support.ones()) k ^= columns_[q];
    return k;
}

std::size_t max_coset_weight(const CssState& state, PauliType error_type) {
    return CosetTable(state, error_type).max_weight();
}

}  // namespace flagprep
