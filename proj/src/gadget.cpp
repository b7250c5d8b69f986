#include "flagprep/gadget.hpp"

#include <algorithm>
#include <bit>
#include <fstream>

#include "flagprep/io.hpp"

namespace flagprep {

std::vector<uint8_t> FlagGadget::flag_qubits() const {
    std::vector<uint8_t> f;
    for (std::size_t k = 0; k < m; ++k) f.push_back(static_cast<uint8_t>(r + 1 + k));
    return f;
}

Circuit FlagGadget::to_circuit() const {
    const bool xdet = detect_type == PauliType::X;
    Circuit c;
    c.header_kind = "GADGET";
    c.set_attribute("t", std::to_string(t));
    c.set_attribute("r", std::to_string(r));
    c.set_attribute("m", std::to_string(m));
    c.set_attribute("type", std::string(1, type_char(detect_type)));
    c.num_code = r + 1;
    c.roles.assign(r + 1, xdet ? QubitRole::Target : QubitRole::Control);
    c.roles[0] = xdet ? QubitRole::Control : QubitRole::Target;
    for (std::size_t k = 0; k < m; ++k) c.add_flag(xdet ? QubitRole::FlagX : QubitRole::FlagZ);

    const std::size_t nq = num_qubits();
    std::vector<int> first(nq, -1), last(nq, -1);
    for (std::size_t i = 0; i < gates.size(); ++i)
        for (auto q : {gates[i].first, gates[i].second}) {
            if (first[q] < 0) first[q] = static_cast<int>(i);
            last[q] = static_cast<int>(i);
        }
    auto init = [&](uint32_t q) {
        bool plus = (q == root) == xdet;
        c.ops.push_back(plus ? Operation::init_plus(q) : Operation::init_zero(q));
    };
    for (uint32_t q = 0; q < nq; ++q)
        if (first[q] < 0) init(q);
    for (std::size_t i = 0; i < gates.size(); ++i) {
        auto [a, b] = gates[i];
        for (auto q : {a, b})
            if (first[q] == static_cast<int>(i)) init(q);
        c.ops.push_back(Operation::cx(a, b));
        for (auto q : {a, b})
            if (is_flag(q) && last[q] == static_cast<int>(i)) {
                uint32_t id = static_cast<uint32_t>(q - r - 1);
                c.ops.push_back(xdet ? Operation::meas_z(q, id) : Operation::meas_x(q, id));
            }
    }
    for (uint32_t q = 0; q < nq; ++q)
        if (is_flag(q) && last[q] < 0) {
            uint32_t id = static_cast<uint32_t>(q - r - 1);
            c.ops.push_back(xdet ? Operation::meas_z(q, id) : Operation::meas_x(q, id));
        }
    return c;
}

FlagGadget FlagGadget::from_circuit(const Circuit& c) {
    if (c.header_kind != "GADGET") throw ParseError("not a gadget file");
    FlagGadget g;
    try {
        g.t = std::stoul(c.attribute("t"));
        g.r = std::stoul(c.attribute("r"));
        g.m = std::stoul(c.attribute("m"));
    } catch (const std::exception&) {
        throw ParseError("gadget header needs numeric t, r, m");
    }
    auto type = c.attribute("type");
    if (type != "X" && type != "Z") throw ParseError("gadget type must be X or Z");
    g.detect_type = type == "X" ? PauliType::X : PauliType::Z;
    if (c.num_code != g.r + 1 || c.num_flags() != g.m)
        throw ParseError("gadget qubit count does not match header");
    const OpKind root_init = g.detect_type == PauliType::X ? OpKind::InitPlus : OpKind::InitZero;
    for (const auto& op : c.ops) {
        if (op.kind == OpKind::CX) g.gates.emplace_back(op.a, op.b);
        if (op.kind == root_init) g.root = static_cast<uint8_t>(op.a);
    }
    return g;
}

CssState FlagGadget::target_state() const {
    CssState s;
    s.name = "gadget";
    s.n = r + 1;
    s.k = 0;
    s.d = 2 * t + 1;
    BitVector all(r + 1);
    for (std::size_t q = 0; q <= r; ++q) all.set(q);
    PauliType root_type = detect_type;
    PauliType other = opposite(root_type);
    std::vector<PauliOperator> roots{PauliOperator::of_type(root_type, all)};
    std::vector<PauliOperator> pairs;
    for (std::size_t q = 1; q <= r; ++q)
        pairs.push_back(PauliOperator::of_type(other, BitVector::from_indices(r + 1, {0, q})));
    if (root_type == PauliType::X) {
        s.x_generators = roots;
        s.z_generators = pairs;
    } else {
        s.z_generators = roots;
        s.x_generators = pairs;
    }
    return s;
}

namespace {

struct ComboChecker {
    std::size_t t;
    std::size_t r;
    uint64_t data_mask;
    uint64_t flag_mask;

    bool ok(uint64_t e, std::size_t f) const {
        if (e & flag_mask) return true;
        std::size_t w = static_cast<std::size_t>(std::popcount(e & data_mask));
        return std::min(w, r + 1 - w) <= f;
    }

    // All combinations of up to t effects containing at least one of the first n_new entries.
    bool check(const std::vector<uint64_t>& all, std::size_t n_new) const {
        for (std::size_t i = 0; i < n_new; ++i)
            if (!rec(all, i + 1, all[i], 1)) return false;
        return true;
    }

    bool rec(const std::vector<uint64_t>& all, std::size_t start, uint64_t acc, std::size_t f) const {
        if (!ok(acc, f)) return false;
        if (f == t) return true;
        for (std::size_t j = start; j < all.size(); ++j)
            if (!rec(all, j + 1, acc ^ all[j], f + 1)) return false;
        return true;
    }
};

}  // namespace

bool gadget_ft_test(const FlagGadget& g, std::size_t t) {
    const std::size_t nq = g.num_qubits();
    if (nq > 64) throw std::invalid_argument("gadget too large for the FT test");
    const bool xdet = g.detect_type == PauliType::X;
    // Forward propagation of a fault of the detect type inserted right after gate `from` (or at the
    // start when from == -1) on the qubits in `mask`.
    auto propagate = [&](uint64_t mask, std::size_t from) {
        for (std::size_t i = from; i < g.gates.size(); ++i) {
            auto [a, b] = g.gates[i];
            if (xdet) {
                if (mask >> a & 1) mask ^= 1ULL << b;
            } else {
                if (mask >> b & 1) mask ^= 1ULL << a;
            }
        }
        return mask;
    };
    std::vector<uint64_t> effects;
    for (std::size_t i = 0; i < g.gates.size(); ++i) {
        auto [a, b] = g.gates[i];
        effects.push_back(propagate(1ULL << a, i + 1));
        effects.push_back(propagate(1ULL << b, i + 1));
        effects.push_back(propagate((1ULL << a) | (1ULL << b), i + 1));
    }
    // Initialization faults: every qubit except targets and the root; they are placed before the
    // qubit's first gate, which is equivalent to the circuit start.
    for (std::size_t q = 0; q < nq; ++q) {
        bool target = q >= 1 && q <= g.r;
        if (target || q == g.root) continue;
        bool used = std::any_of(g.gates.begin(), g.gates.end(),
                                [&](auto& p) { return p.first == q || p.second == q; });
        if (!used && !g.is_flag(q)) continue;
        effects.push_back(propagate(1ULL << q, 0));
    }
    uint64_t flag_mask = 0;
    for (auto f : g.flag_qubits()) {
        flag_mask |= 1ULL << f;
        effects.push_back(1ULL << f);  // measurement flip
    }
    ComboChecker cc{t, g.r, (1ULL << (g.r + 1)) - 1, flag_mask};
    return cc.check(effects, effects.size());
}

FlagGadget hadamard_conjugate_gadget(const FlagGadget& g) {
    FlagGadget h = g;
    h.detect_type = opposite(g.detect_type);
    for (auto& [a, b] : h.gates) std::swap(a, b);
    return h;
}

namespace {

enum FlagStatus : uint8_t { Unused, Entangled, Done, Root };

class Searcher {
public:
    Searcher(std::size_t t, std::size_t r, std::size_t m, const SearchOptions& o)
        : t_(t), r_(r), m_(m), opts_(o), nq_(1 + r + m) {
        if (nq_ > 64) throw std::invalid_argument("gadget too large for search");
        map_.resize(nq_);
        for (std::size_t q = 0; q < nq_; ++q) map_[q] = 1ULL << q;
        status_.assign(m, Unused);
        uint64_t fm = 0;
        for (std::size_t k = 0; k < m; ++k) fm |= 1ULL << (r + 1 + k);
        checker_ = ComboChecker{t, r, (1ULL << (r + 1)) - 1, fm};
    }

    SearchResult run() {
        SearchResult res;
        bool found = dfs();
        res.nodes = nodes_;
        if (found) {
            res.status = SearchStatus::Found;
            res.gadget = build();
        } else {
            res.status = budget_hit_ ? SearchStatus::BudgetExhausted : SearchStatus::SearchExhausted;
        }
        return res;
    }

private:
    uint8_t flag_q(std::size_t k) const { return static_cast<uint8_t>(r_ + 1 + k); }
    std::size_t flag_k(std::size_t q) const { return q - r_ - 1; }
    bool is_flag(std::size_t q) const { return q > r_; }

    std::vector<uint8_t> controls() const {
        std::vector<uint8_t> c{root_};
        for (std::size_t k = 0; k < m_; ++k)
            if (status_[k] == Entangled) c.push_back(flag_q(k));
        return c;
    }

    struct Candidate {
        uint8_t a, b;
        enum Kind : uint8_t { Target, Entangle, Disentangle, Teleport } kind;
    };

    std::vector<Candidate> candidates() const {
        std::vector<Candidate> out;
        auto ctl = controls();
        if (next_target_ <= r_)
            for (auto x : ctl) out.push_back({x, static_cast<uint8_t>(next_target_), Candidate::Target});
        if (next_flag_ < m_)
            for (auto x : ctl) out.push_back({x, flag_q(next_flag_), Candidate::Entangle});
        for (std::size_t k = 0; k < m_; ++k) {
            if (status_[k] != Entangled) continue;
            for (auto x : ctl)
                if (x != flag_q(k)) out.push_back({x, flag_q(k), Candidate::Disentangle});
        }
        if (opts_.allow_teleport)
            for (std::size_t k = 0; k < m_; ++k)
                if (status_[k] == Entangled) out.push_back({flag_q(k), root_, Candidate::Teleport});
        return out;
    }

    // Effects of flag-initialization locations currently present (all non-root flags in use).
    void dynamic_effects(std::vector<uint64_t>& out, int skip) const {
        for (std::size_t k = 0; k < m_; ++k)
            if ((status_[k] == Entangled || status_[k] == Done) && static_cast<int>(k) != skip)
                out.push_back(map_[flag_q(k)]);
    }

    bool dfs() {
        auto cands = candidates();
        for (const auto& cand : cands) {
            if (opts_.node_budget && nodes_ >= opts_.node_budget) {
                budget_hit_ = true;
                return false;
            }
            ++nodes_;
            if (try_apply(cand)) {
                if (complete()) return true;
                if (dfs()) return true;
                undo();
                if (budget_hit_) return false;
            }
        }
        return false;
    }

    bool complete() const {
        if (next_target_ <= r_) return false;
        for (auto s : status_)
            if (s == Entangled) return false;
        return true;
    }

    struct UndoRecord {
        Candidate cand;
        uint64_t old_map_a;
        std::size_t static_size;
        uint8_t old_root;
        std::vector<FlagStatus> old_status;
        std::size_t old_next_target, old_next_flag;
    };

    bool try_apply(const Candidate& cand) {
        const uint8_t a = cand.a, b = cand.b;
        std::vector<uint64_t> all;
        all.reserve(static_.size() + m_ + 6);
        const uint64_t ea = map_[a], eb = map_[b];
        all.push_back(ea);
        all.push_back(eb);
        all.push_back(ea ^ eb);
        int changed_flag = -1;
        if (is_flag(a) && a != root_) {
            changed_flag = static_cast<int>(flag_k(a));
            if (cand.kind != Candidate::Teleport) all.push_back(ea ^ eb);  // new init effect of a
        }
        if (cand.kind == Candidate::Entangle) {
            all.push_back(1ULL << b);  // measurement flip and init of the new flag coincide
        }
        if (cand.kind == Candidate::Teleport) {
            all.push_back(eb);  // old root becomes an initialized |0> qubit right before this gate
        }
        const std::size_t n_new = all.size();
        all.insert(all.end(), static_.begin(), static_.end());
        dynamic_effects(all, changed_flag);
        if (!checker_.check(all, n_new)) return false;

        UndoRecord u{cand, map_[a], static_.size(), root_, status_, next_target_, next_flag_};
        map_[a] ^= map_[b];
        static_.push_back(ea);
        static_.push_back(eb);
        static_.push_back(ea ^ eb);
        switch (cand.kind) {
            case Candidate::Target: ++next_target_; break;
            case Candidate::Entangle:
                status_[flag_k(b)] = Entangled;
                ++next_flag_;
                static_.push_back(1ULL << b);
                break;
            case Candidate::Disentangle: status_[flag_k(b)] = Done; break;
            case Candidate::Teleport:
                status_[flag_k(a)] = Root;
                if (is_flag(b)) status_[flag_k(b)] = Done;
                root_ = a;
                static_.push_back(eb);
                break;
        }
        prepended_.push_back({a, b});
        undo_.push_back(std::move(u));
        return true;
    }

    void undo() {
        auto& u = undo_.back();
        map_[u.cand.a] = u.old_map_a;
        static_.resize(u.static_size);
        root_ = u.old_root;
        status_ = u.old_status;
        next_target_ = u.old_next_target;
        next_flag_ = u.old_next_flag;
        prepended_.pop_back();
        undo_.pop_back();
    }

    FlagGadget build() const {
        FlagGadget g;
        g.t = t_;
        g.r = r_;
        g.m = next_flag_;
        g.detect_type = PauliType::X;
        g.root = root_;
        g.gates.assign(prepended_.rbegin(), prepended_.rend());
        return g;
    }

    std::size_t t_, r_, m_;
    SearchOptions opts_;
    std::size_t nq_;
    ComboChecker checker_{};
    std::vector<uint64_t> map_;
    std::vector<uint64_t> static_;  // CX fault effects, measurement flips, non-flag init faults
    std::vector<FlagStatus> status_;
    uint8_t root_ = 0;
    std::size_t next_target_ = 1;
    std::size_t next_flag_ = 0;
    std::vector<std::pair<uint8_t, uint8_t>> prepended_;
    std::vector<UndoRecord> undo_;
    uint64_t nodes_ = 0;
    bool budget_hit_ = false;
};

}  // namespace

SearchResult discover_gadget(std::size_t t, std::size_t r, std::size_t m, const SearchOptions& opts) {
    if (t < 1 || r < 1) throw std::invalid_argument("discover_gadget needs t >= 1 and r >= 1");
    return Searcher(t, r, m, opts).run();
}

std::string serialize_gadget(const FlagGadget& g, bool optimal) {
    Circuit c = g.to_circuit();
    c.set_attribute("optimal", optimal ? "yes" : "no");
    return serialize_circuit(c);
}

FlagGadget parse_gadget(const std::string& text, bool* optimal) {
    Circuit c = parse_circuit(text);
    if (optimal) *optimal = c.attribute("optimal") == "yes";
    return FlagGadget::from_circuit(c);
}

std::filesystem::path GadgetLibrary::file_for(std::size_t t, std::size_t r) const {
    return dir_ / ("gadget_t" + std::to_string(t) + "_r" + std::to_string(r) + ".txt");
}

std::optional<GadgetLibrary::Entry> GadgetLibrary::load(std::size_t t, std::size_t r) const {
    if (dir_.empty()) return std::nullopt;
    auto p = file_for(t, r);
    if (!std::filesystem::exists(p)) return std::nullopt;
    Entry e;
    e.gadget = parse_gadget(read_text_file(p), &e.optimal);
    if (e.gadget.t != t || e.gadget.r != r || e.gadget.detect_type != PauliType::X)
        throw ParseError("gadget file " + p.string() + " does not match its key");
    return e;
}

std::optional<GadgetLibrary::Entry> GadgetLibrary::find(std::size_t t, std::size_t r) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find({t, r});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void GadgetLibrary::insert(const Entry& e) {
    std::lock_guard lock(mu_);
    entries_[{e.gadget.t, e.gadget.r}] = e;
}

const GadgetLibrary::Entry& GadgetLibrary::get(std::size_t t, std::size_t r) {
    std::lock_guard lock(mu_);
    auto key = std::make_pair(t, r);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    if (auto e = load(t, r)) return entries_[key] = *e;
    bool optimal = true;
    for (std::size_t m = 0; m <= max_flags_tried; ++m) {
        auto res = discover_gadget(t, r, m, opts_);
        if (res.status == SearchStatus::Found) {
            Entry e{*res.gadget, optimal};
            if (!dir_.empty() && persist_) {
                std::filesystem::create_directories(dir_);
                write_text_file(file_for(t, r), serialize_gadget(e.gadget, e.optimal));
            }
            return entries_[key] = e;
        }
        if (res.status == SearchStatus::BudgetExhausted) optimal = false;
    }
    throw BudgetExhausted("no gadget for t=" + std::to_string(t) + ", r=" + std::to_string(r) +
                          " within the node budget");
}

}  // namespace flagprep
