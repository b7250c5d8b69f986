#include "flagprep/tableau.hpp"

#include <bit>

namespace flagprep {

Tableau::Tableau(std::size_t n) : n_(n), words_((n + 63) / 64), rows_(2 * n) {
    for (auto& r : rows_) {
        r.x.assign(words_, 0);
        r.z.assign(words_, 0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        rows_[i].x[i >> 6] |= 1ULL << (i & 63);
        rows_[n + i].z[i >> 6] |= 1ULL << (i & 63);
    }
}

void Tableau::h(std::size_t q) {
    const std::size_t w = q >> 6;
    const uint64_t m = 1ULL << (q & 63);
    for (auto& row : rows_) {
        bool x = row.x[w] & m, z = row.z[w] & m;
        row.r ^= x && z;
        if (x != z) {
            row.x[w] ^= m;
            row.z[w] ^= m;
        }
    }
}

void Tableau::cx(std::size_t a, std::size_t b) {
    for (auto& row : rows_) {
        bool xa = getx(row, a), zb = getz(row, b);
        bool xb = getx(row, b), za = getz(row, a);
        row.r ^= xa && zb && (xb == za);
        if (xa) row.x[b >> 6] ^= 1ULL << (b & 63);
        if (zb) row.z[a >> 6] ^= 1ULL << (a & 63);
    }
}

void Tableau::apply_x(std::size_t q) {
    for (auto& row : rows_)
        if (getz(row, q)) row.r = !row.r;
}

void Tableau::apply_z(std::size_t q) {
    for (auto& row : rows_)
        if (getx(row, q)) row.r = !row.r;
}

void Tableau::apply_pauli(const PauliOperator& p) {
    for (auto q : p.x.ones()) apply_x(q);
    for (auto q : p.z.ones()) apply_z(q);
}

static int g_phase(bool x1, bool z1, bool x2, bool z2) {
    if (!x1 && !z1) return 0;
    if (x1 && z1) return int(z2) - int(x2);
    if (x1 && !z1) return int(z2) * (2 * int(x2) - 1);
    return int(x2) * (1 - 2 * int(z2));
}

void Tableau::rowsum(Row& h, const Row& i) const {
    int sum = 2 * int(h.r) + 2 * int(i.r);
    for (std::size_t q = 0; q < n_; ++q)
        sum += g_phase(getx(i, q), getz(i, q), getx(h, q), getz(h, q));
    sum = ((sum % 4) + 4) % 4;
    h.r = sum == 2;
    for (std::size_t w = 0; w < words_; ++w) {
        h.x[w] ^= i.x[w];
        h.z[w] ^= i.z[w];
    }
}

Tableau::MeasureResult Tableau::measure_z(std::size_t q, std::mt19937_64& rng) {
    const std::size_t n = n_;
    std::size_t p = 2 * n;
    for (std::size_t i = n; i < 2 * n; ++i)
        if (getx(rows_[i], q)) {
            p = i;
            break;
        }
    if (p < 2 * n) {
        for (std::size_t i = 0; i < 2 * n; ++i)
            if (i != p && getx(rows_[i], q)) rowsum(rows_[i], rows_[p]);
        rows_[p - n] = rows_[p];
        Row& s = rows_[p];
        std::fill(s.x.begin(), s.x.end(), 0);
        std::fill(s.z.begin(), s.z.end(), 0);
        s.z[q >> 6] |= 1ULL << (q & 63);
        s.r = rng() & 1;
        return {s.r, false};
    }
    Row scratch;
    scratch.x.assign(words_, 0);
    scratch.z.assign(words_, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (getx(rows_[i], q)) rowsum(scratch, rows_[i + n]);
    return {scratch.r, true};
}

Tableau::MeasureResult Tableau::measure_x(std::size_t q, std::mt19937_64& rng) {
    h(q);
    auto r = measure_z(q, rng);
    h(q);
    return r;
}

std::optional<bool> Tableau::stabilizer_sign(const PauliOperator& p) const {
    if (p.num_qubits() != n_) throw std::invalid_argument("probe length mismatch");
    auto anticommutes = [&](const Row& row) {
        uint64_t acc = 0;
        for (std::size_t w = 0; w < words_; ++w)
            acc ^= (row.x[w] & p.z.words()[w]) ^ (row.z[w] & p.x.words()[w]);
        return std::popcount(acc) & 1;
    };
    for (std::size_t i = n_; i < 2 * n_; ++i)
        if (anticommutes(rows_[i])) return std::nullopt;
    Row acc;
    acc.x.assign(words_, 0);
    acc.z.assign(words_, 0);
    for (std::size_t i = 0; i < n_; ++i)
        if (anticommutes(rows_[i])) rowsum(acc, rows_[i + n_]);
    // acc now equals +-p; compare the Y-count phase convention of p.
    for (std::size_t w = 0; w < words_; ++w)
        if (acc.x[w] != p.x.words()[w] || acc.z[w] != p.z.words()[w])
            throw std::logic_error("stabilizer decomposition mismatch");
    return acc.r;
}

static PauliOperator extend(const PauliOperator& p, std::size_t n) {
    PauliOperator out(n);
    for (auto q : p.x.ones()) out.x.set(q);
    for (auto q : p.z.ones()) out.z.set(q);
    return out;
}

TableauRun run_tableau_with_faults(const Circuit& c, const std::vector<InjectedFault>& faults,
                                   const std::vector<PauliOperator>& probes, uint64_t seed) {
    std::mt19937_64 rng(seed);
    Tableau tab(c.num_qubits());
    TableauRun run;
    run.flag_outcomes.assign(c.num_flags(), false);
    // A fault "before" index ops.size() lands at the very end of the circuit.
    std::vector<std::vector<const InjectedFault*>> before(c.ops.size() + 1), after(c.ops.size());
    for (const auto& f : faults) (f.before ? before : after).at(f.op_index).push_back(&f);
    for (std::size_t i = 0; i < c.ops.size(); ++i) {
        const auto& op = c.ops[i];
        for (auto* f : before[i]) tab.apply_pauli(f->pauli);
        switch (op.kind) {
            case OpKind::InitPlus: tab.h(op.a); break;
            case OpKind::InitZero: break;
            case OpKind::CX: tab.cx(op.a, op.b); break;
            case OpKind::MeasZ: run.flag_outcomes.at(op.flag_id) = tab.measure_z(op.a, rng).outcome; break;
            case OpKind::MeasX: run.flag_outcomes.at(op.flag_id) = tab.measure_x(op.a, rng).outcome; break;
            case OpKind::FinalMeas: break;
        }
        for (auto* f : after[i]) tab.apply_pauli(f->pauli);
    }
    for (auto* f : before.back()) tab.apply_pauli(f->pauli);
    for (const auto& p : probes) {
        auto s = tab.stabilizer_sign(extend(p, c.num_qubits()));
        if (!s) throw std::logic_error("probe operator is not a stabilizer of the final state");
        run.stabilizer_flips.push_back(*s);
    }
    return run;
}

TableauCheck tableau_check_circuit(const Circuit& c, const CssState& state) {
    if (auto e = check_circuit_structure(c); !e.empty()) return {false, "malformed circuit: " + e};
    if (c.num_code != state.n) return {false, "circuit code-qubit count does not match the state"};
    std::mt19937_64 rng(12345);
    Tableau tab(c.num_qubits());
    for (const auto& op : c.ops) {
        switch (op.kind) {
            case OpKind::InitPlus: tab.h(op.a); break;
            case OpKind::InitZero: break;
            case OpKind::CX: tab.cx(op.a, op.b); break;
            case OpKind::MeasZ:
            case OpKind::MeasX: {
                auto r = op.kind == OpKind::MeasZ ? tab.measure_z(op.a, rng) : tab.measure_x(op.a, rng);
                if (!r.deterministic)
                    return {false, "flag " + c.qubit_name(op.a) + " measurement is not deterministic"};
                if (r.outcome) return {false, "flag " + c.qubit_name(op.a) + " reads -1"};
                break;
            }
            case OpKind::FinalMeas: break;
        }
    }
    auto check = [&](const std::vector<PauliOperator>& ops, const char* what) -> TableauCheck {
        for (std::size_t i = 0; i < ops.size(); ++i) {
            auto s = tab.stabilizer_sign(extend(ops[i], c.num_qubits()));
            std::string id = std::string(what) + "[" + std::to_string(i) + "] " + ops[i].to_string();
            if (!s) return {false, id + " is not a stabilizer of the output"};
            if (*s) return {false, id + " has eigenvalue -1"};
        }
        return {};
    };
    for (auto t : {PauliType::X, PauliType::Z}) {
        auto r = check(state.generators_of_type(t), t == PauliType::X ? "x_generator" : "z_generator");
        if (!r.ok) return r;
        r = check(state.stabilizing_logicals(t), t == PauliType::X ? "logical_x" : "logical_z");
        if (!r.ok) return r;
    }
    return {};
}

}  // namespace flagprep
