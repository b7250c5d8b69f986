#include "flagprep/assembly.hpp"

#include <algorithm>
#include <climits>
#include <numeric>
#include <optional>
#include <random>

namespace flagprep {

std::size_t z_gadget_t(const CssState& state, std::size_t t, std::optional<std::size_t> override_t,
                       std::size_t* max_weight) {
    if (!override_t || *override_t >= t) return t;
    std::size_t w = 0;
    try {
        w = max_coset_weight(state, PauliType::Z);
    } catch (const GroupTooLarge&) {
        return t;
    }
    if (max_weight) *max_weight = w;
    // Combinations of more than override_t faults may leave any error, which the coset bound keeps
    // within their own fault count.
    return w <= *override_t + 1 ? *override_t : t;
}

namespace {

// One gadget (or a bare code qubit) as a time-ordered list of its gates. Slot entries are shared
// with a gadget on the other side; only their own-side qubit is known here.
struct Unit {
    struct Entry {
        bool slot = false;
        uint32_t a = 0, b = 0;  // private gate, or own-side qubit in a
    };
    std::size_t code = 0;
    bool x_side = true;
    std::vector<Entry> entries;
};

struct Layout {
    Circuit skeleton;  // roles and attributes, no operations
    std::vector<bool> plus;
    std::vector<Unit> units;
    std::vector<std::size_t> unit_of;  // code qubit -> unit
};

Unit make_unit(std::size_t code, const FlagGadget* g, std::size_t degree, bool x_side, Layout& L) {
    Unit u{code, x_side, {}};
    if (!g) {
        for (std::size_t i = 0; i < degree; ++i) u.entries.push_back({true, static_cast<uint32_t>(code), 0});
        return u;
    }
    const bool xdet = g->detect_type == PauliType::X;
    std::vector<uint32_t> global(g->num_qubits(), UINT32_MAX);
    global[0] = static_cast<uint32_t>(code);
    for (std::size_t q = g->r + 1; q < g->num_qubits(); ++q) {
        global[q] = L.skeleton.add_flag(xdet ? QubitRole::FlagX : QubitRole::FlagZ);
        L.plus.push_back(false);
    }
    for (std::size_t q = 0; q < g->num_qubits(); ++q)
        if (q == 0 || q > g->r) L.plus[global[q]] = (q == g->root) == xdet;
    std::size_t slots = 0;
    for (auto [a, b] : g->gates) {
        auto passive = xdet ? b : a;
        if (passive >= 1 && passive <= g->r) {
            u.entries.push_back({true, global[xdet ? a : b], 0});
            ++slots;
        } else {
            u.entries.push_back({false, global[a], global[b]});
        }
    }
    if (slots != g->r) throw std::logic_error("gadget does not entangle each target once");
    return u;
}

Layout make_layout(const BipartiteCircuit& bip, const CssState& state, GadgetLibrary& library,
                   const AssemblyOptions& opts, AssemblyInfo* info) {
    if (bip.n != state.n) throw std::invalid_argument("bipartite circuit and state sizes differ");
    const std::size_t t = opts.t ? opts.t : state.t();
    std::size_t maxw = 0;
    const std::size_t tz = z_gadget_t(state, t, opts.z_gadget_t_override, &maxw);
    if (info) *info = {t, tz, tz != t, maxw};

    auto fetch = [&](std::size_t tt, std::size_t r) -> FlagGadget {
        try {
            return library.get(tt, r).gadget;
        } catch (const BudgetExhausted& e) {
            throw MissingGadget("no gadget for t=" + std::to_string(tt) + ", r=" + std::to_string(r) + ": " +
                                e.what());
        }
    };

    Layout L;
    Circuit& c = L.skeleton;
    c.num_code = state.n;
    c.roles.assign(state.n, QubitRole::Target);
    L.plus.assign(state.n, false);
    for (auto q : bip.controls) {
        c.roles[q] = QubitRole::Control;
        L.plus[q] = true;
    }
    L.unit_of.assign(state.n, SIZE_MAX);
    for (auto q : bip.controls) {
        std::size_t r = bip.degree(q);
        std::optional<FlagGadget> g;
        if (opts.x_gadgets && r > 0) g = fetch(t, r);
        L.unit_of[q] = L.units.size();
        L.units.push_back(make_unit(q, g ? &*g : nullptr, r, true, L));
    }
    for (auto q : bip.targets) {
        std::size_t r = bip.degree(q);
        std::optional<FlagGadget> g;
        if (opts.z_gadgets && tz > 0 && r > 0) g = hadamard_conjugate_gadget(fetch(tz, r));
        L.unit_of[q] = L.units.size();
        L.units.push_back(make_unit(q, g ? &*g : nullptr, r, false, L));
    }
    c.set_attribute("code", state.name);
    c.set_attribute("state", state.state_label);
    c.set_attribute("t", std::to_string(t));
    if (tz != t) c.set_attribute("t_z", std::to_string(tz));
    return L;
}

PauliType final_basis(const CssState& state) {
    bool all_x = !state.stabilizing_type.empty();
    for (auto t : state.stabilizing_type) all_x = all_x && t == PauliType::X;
    return all_x ? PauliType::X : PauliType::Z;
}

Circuit emit(const Layout& L, const std::vector<Operation>& gates, const CssState& state) {
    Circuit c = L.skeleton;
    for (std::size_t q = 0; q < c.num_qubits(); ++q)
        c.ops.push_back(L.plus[q] ? Operation::init_plus(static_cast<uint32_t>(q))
                                  : Operation::init_zero(static_cast<uint32_t>(q)));
    c.ops.insert(c.ops.end(), gates.begin(), gates.end());
    for (std::size_t q = c.num_code; q < c.num_qubits(); ++q) {
        auto id = static_cast<uint32_t>(q - c.num_code);
        c.ops.push_back(c.roles[q] == QubitRole::FlagX ? Operation::meas_z(static_cast<uint32_t>(q), id)
                                                       : Operation::meas_x(static_cast<uint32_t>(q), id));
    }
    c.ops.push_back(Operation::final_meas(final_basis(state)));
    std::vector<std::size_t> ident(gates.size());
    std::iota(ident.begin(), ident.end(), 0);
    return rebuild_with_order(c, ident);
}

// Random topological order of chains sharing nodes; empty on a cycle.
std::vector<std::size_t> topo_order(std::size_t nodes, const std::vector<std::vector<std::size_t>>& chains,
                                    std::mt19937_64& rng) {
    std::vector<std::vector<std::size_t>> succ(nodes);
    std::vector<std::size_t> indeg(nodes, 0);
    for (const auto& ch : chains)
        for (std::size_t i = 1; i < ch.size(); ++i) {
            succ[ch[i - 1]].push_back(ch[i]);
            ++indeg[ch[i]];
        }
    std::vector<std::size_t> ready, out;
    for (std::size_t v = 0; v < nodes; ++v)
        if (indeg[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
        std::size_t k = std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(rng);
        std::size_t v = ready[k];
        ready[k] = ready.back();
        ready.pop_back();
        out.push_back(v);
        for (auto w : succ[v])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    if (out.size() != nodes) out.clear();
    return out;
}

}  // namespace

Circuit assemble_ft_circuit(const BipartiteCircuit& bip, const CssState& state, GadgetLibrary& library,
                            const AssemblyOptions& opts, AssemblyInfo* info) {
    Layout L = make_layout(bip, state, library, opts, info);
    const std::size_t E = bip.edges.size();
    std::mt19937_64 rng(opts.seed);
    for (std::size_t attempt = 0; attempt <= opts.retries; ++attempt) {
        // Global edge order fixes which slot each edge takes in both of its gadgets.
        std::vector<std::size_t> perm(E);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::vector<std::size_t>> edges_of(state.n);
        for (auto e : perm) {
            edges_of[bip.edges[e].first].push_back(e);
            edges_of[bip.edges[e].second].push_back(e);
        }
        std::vector<uint32_t> xside(E), zside(E);
        std::vector<Operation> private_ops;  // nodes E.. of the precedence graph
        std::vector<std::vector<std::size_t>> chains;
        for (const auto& u : L.units) {
            std::vector<std::size_t> chain;
            std::size_t slot = 0;
            for (const auto& en : u.entries) {
                if (en.slot) {
                    std::size_t e = edges_of[u.code][slot++];
                    (u.x_side ? xside : zside)[e] = en.a;
                    chain.push_back(e);
                } else {
                    private_ops.push_back(Operation::cx(en.a, en.b));
                    chain.push_back(E + private_ops.size() - 1);
                }
            }
            chains.push_back(std::move(chain));
        }
        auto order = topo_order(E + private_ops.size(), chains, rng);
        if (order.empty() && E + private_ops.size() > 0) continue;
        std::vector<Operation> gates;
        for (auto v : order) gates.push_back(v < E ? Operation::cx(xside[v], zside[v]) : private_ops[v - E]);
        return emit(L, gates, state);
    }
    throw CyclicPrecedence("gadget precedence constraints stayed cyclic after " + std::to_string(opts.retries) +
                           " retries");
}

namespace {

// Runs every gadget forward in lock step, fusing a control's slot with a target's slot whenever both
// are waiting and their edge is unused. The fused-gate order is the slot permutation. Never deadlocks:
// a waiting control always has an unused edge to a target that is also waiting.
std::vector<Operation> simulate_joint(const Layout& L, const BipartiteCircuit& bip, ScheduleObjective obj,
                                      double greed, std::mt19937_64& rng) {
    const std::size_t nq = L.skeleton.num_qubits();
    std::vector<std::size_t> remaining(nq, 0);
    for (const auto& u : L.units)
        for (const auto& en : u.entries) {
            ++remaining[en.a];
            if (!en.slot) ++remaining[en.b];
        }
    std::vector<std::vector<std::size_t>> unused(bip.n);  // control -> targets
    for (auto [a, b] : bip.edges) unused[a].push_back(b);
    std::vector<std::size_t> pos(L.units.size(), 0);
    std::vector<bool> open(nq, false);
    std::vector<std::size_t> layer(nq, 0);
    std::vector<Operation> out;
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    struct Cand {
        std::size_t u1, u2;  // u2 == SIZE_MAX for private gates
        uint32_t a, b;
    };
    std::vector<Cand> cands;
    for (;;) {
        cands.clear();
        for (std::size_t i = 0; i < L.units.size(); ++i) {
            const auto& u = L.units[i];
            if (pos[i] >= u.entries.size()) continue;
            const auto& en = u.entries[pos[i]];
            if (!en.slot) {
                cands.push_back({i, SIZE_MAX, en.a, en.b});
            } else if (u.x_side) {
                for (auto tq : unused[u.code]) {
                    std::size_t j = L.unit_of[tq];
                    if (pos[j] < L.units[j].entries.size() && L.units[j].entries[pos[j]].slot)
                        cands.push_back({i, j, en.a, L.units[j].entries[pos[j]].a});
                }
            }
        }
        if (cands.empty()) break;
        std::size_t pick = std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng);
        if (u01(rng) < greed) {
            long best = LONG_MAX;
            std::size_t ties = 0;
            for (std::size_t k = 0; k < cands.size(); ++k) {
                const auto& cd = cands[k];
                long score = 0;
                if (obj == ScheduleObjective::MinMaxQubits) {
                    for (auto q : {cd.a, cd.b}) {
                        score += !open[q];
                        score -= L.skeleton.is_flag(q) && remaining[q] == 1;
                    }
                } else {
                    score = static_cast<long>(std::max(layer[cd.a], layer[cd.b]));
                }
                if (score < best) {
                    best = score;
                    pick = k;
                    ties = 1;
                } else if (score == best && std::uniform_int_distribution<std::size_t>(0, ties++)(rng) == 0) {
                    pick = k;
                }
            }
        }
        const auto cd = cands[pick];
        ++pos[cd.u1];
        if (cd.u2 != SIZE_MAX) {
            ++pos[cd.u2];
            auto& v = unused[L.units[cd.u1].code];
            v.erase(std::find(v.begin(), v.end(), L.units[cd.u2].code));
        }
        out.push_back(Operation::cx(cd.a, cd.b));
        std::size_t l = std::max(layer[cd.a], layer[cd.b]) + 1;
        for (auto q : {cd.a, cd.b}) {
            open[q] = true;
            --remaining[q];
            layer[q] = l;
        }
    }
    for (std::size_t i = 0; i < L.units.size(); ++i)
        if (pos[i] != L.units[i].entries.size()) throw std::logic_error("joint assembly stalled");
    return out;
}

}  // namespace

BipartiteCircuit best_bipartite_for_assembly(const CssState& state, GadgetLibrary& library, std::size_t trials,
                                             uint64_t seed, const AssemblyOptions& opts) {
    if (trials == 0) throw std::invalid_argument("trials must be at least 1");
    const std::size_t t = opts.t ? opts.t : state.t();
    const std::size_t tz = z_gadget_t(state, t, opts.z_gadget_t_override);
    auto flags = [&](std::size_t tt, std::size_t r) { return r == 0 ? 0 : library.get(tt, r).gadget.m; };
    BipartiteCircuit best;
    std::size_t best_cost = SIZE_MAX, best_flags = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        auto bc = synthesize_bipartite(state, i == 0 ? seed : splitmix64(seed ^ (0xa5a5a5a5ULL + i)));
        std::size_t f = 0;
        for (auto q : bc.controls) f += opts.x_gadgets ? flags(t, bc.degree(q)) : 0;
        for (auto q : bc.targets) f += opts.z_gadgets && tz > 0 ? flags(tz, bc.degree(q)) : 0;
        std::size_t cost = bc.edges.size() + 2 * f;
        if (cost < best_cost || (cost == best_cost && f < best_flags) ||
            (cost == best_cost && f == best_flags && bc.max_degree() < best.max_degree())) {
            best = std::move(bc);
            best_cost = cost;
            best_flags = f;
        }
    }
    return best;
}

CircuitMetrics circuit_metrics(const Circuit& c) {
    CircuitMetrics m;
    std::vector<std::size_t> layer(c.num_qubits(), 0);
    std::size_t live = 0;
    for (const auto& op : c.ops) {
        switch (op.kind) {
            case OpKind::InitPlus:
            case OpKind::InitZero:
                m.max_simultaneous_qubits = std::max(m.max_simultaneous_qubits, ++live);
                break;
            case OpKind::CX: {
                ++m.cx_count;
                std::size_t l = std::max(layer[op.a], layer[op.b]) + 1;
                layer[op.a] = layer[op.b] = l;
                m.depth = std::max(m.depth, l);
                break;
            }
            case OpKind::MeasZ:
            case OpKind::MeasX:
                ++m.flag_count;
                if (live) --live;
                break;
            case OpKind::FinalMeas: break;
        }
    }
    return m;
}

Circuit rebuild_with_order(const Circuit& c, const std::vector<std::size_t>& order) {
    std::vector<Operation> cx, init(c.num_qubits(), Operation::init_zero(0));
    std::vector<std::optional<Operation>> meas(c.num_qubits());
    Operation fin = Operation::final_meas(PauliType::Z);
    bool has_final = false;
    for (const auto& op : c.ops) {
        switch (op.kind) {
            case OpKind::InitPlus:
            case OpKind::InitZero: init[op.a] = op; break;
            case OpKind::CX: cx.push_back(op); break;
            case OpKind::MeasZ:
            case OpKind::MeasX: meas[op.a] = op; break;
            case OpKind::FinalMeas:
                fin = op;
                has_final = true;
                break;
        }
    }
    if (order.size() != cx.size()) throw std::invalid_argument("order does not cover every CX gate");
    std::vector<int> first(c.num_qubits(), -1), last(c.num_qubits(), -1);
    for (std::size_t i = 0; i < order.size(); ++i)
        for (auto q : {cx[order[i]].a, cx[order[i]].b}) {
            if (first[q] < 0) first[q] = static_cast<int>(i);
            last[q] = static_cast<int>(i);
        }
    Circuit out = c;
    out.ops.clear();
    for (std::size_t q = 0; q < c.num_qubits(); ++q)
        if (first[q] < 0) {
            out.ops.push_back(init[q]);
            if (meas[q]) out.ops.push_back(*meas[q]);
        }
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& g = cx[order[i]];
        for (auto q : {g.a, g.b})
            if (first[q] == static_cast<int>(i)) out.ops.push_back(init[q]);
        out.ops.push_back(g);
        for (auto q : {g.a, g.b})
            if (last[q] == static_cast<int>(i) && meas[q]) out.ops.push_back(*meas[q]);
    }
    if (has_final) out.ops.push_back(fin);
    return out;
}

namespace {

// Samples a topological order of the per-qubit gate DAG. Gates sharing a qubit keep their relative
// order; every such pair lies inside one gadget, so gadget precedence is preserved.
std::vector<std::size_t> sample_order(const Circuit& c, const std::vector<Operation>& cx, ScheduleObjective obj,
                                      double greed, std::mt19937_64& rng) {
    const std::size_t G = cx.size(), nq = c.num_qubits();
    std::vector<std::vector<std::size_t>> succ(G);
    std::vector<std::size_t> indeg(G, 0), remaining(nq, 0);
    std::vector<int> prev(nq, -1);
    for (std::size_t i = 0; i < G; ++i)
        for (auto q : {cx[i].a, cx[i].b}) {
            ++remaining[q];
            if (prev[q] >= 0) {
                succ[prev[q]].push_back(i);
                ++indeg[i];
            }
            prev[q] = static_cast<int>(i);
        }
    std::vector<bool> open(nq, false);
    std::vector<std::size_t> layer(nq, 0);
    std::vector<std::size_t> ready, out;
    for (std::size_t i = 0; i < G; ++i)
        if (indeg[i] == 0) ready.push_back(i);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    while (!ready.empty()) {
        std::size_t pick = std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(rng);
        if (u01(rng) < greed) {
            long best = LONG_MAX;
            std::size_t ties = 0;
            for (std::size_t k = 0; k < ready.size(); ++k) {
                const auto& g = cx[ready[k]];
                long score = 0;
                if (obj == ScheduleObjective::MinMaxQubits) {
                    for (auto q : {g.a, g.b}) {
                        score += !open[q];
                        score -= c.is_flag(q) && remaining[q] == 1;
                    }
                } else {
                    score = static_cast<long>(std::max(layer[g.a], layer[g.b]));
                }
                if (score < best) {
                    best = score;
                    pick = k;
                    ties = 1;
                } else if (score == best && std::uniform_int_distribution<std::size_t>(0, ties++)(rng) == 0) {
                    pick = k;
                }
            }
        }
        std::size_t v = ready[pick];
        ready[pick] = ready.back();
        ready.pop_back();
        out.push_back(v);
        const auto& g = cx[v];
        std::size_t l = std::max(layer[g.a], layer[g.b]) + 1;
        for (auto q : {g.a, g.b}) {
            open[q] = true;
            --remaining[q];
            layer[q] = l;
        }
        for (auto w : succ[v])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    return out;
}

std::pair<std::size_t, std::size_t> objective_key(const CircuitMetrics& m, ScheduleObjective obj) {
    return obj == ScheduleObjective::MinMaxQubits ? std::make_pair(m.max_simultaneous_qubits, m.depth)
                                                  : std::make_pair(m.depth, m.max_simultaneous_qubits);
}

}  // namespace

Circuit schedule_circuit(const Circuit& c, ScheduleObjective objective, std::size_t shuffles, uint64_t seed) {
    std::vector<Operation> cx;
    for (const auto& op : c.ops)
        if (op.kind == OpKind::CX) cx.push_back(op);
    std::vector<std::size_t> ident(cx.size());
    std::iota(ident.begin(), ident.end(), 0);
    Circuit best = rebuild_with_order(c, ident);
    auto best_key = objective_key(circuit_metrics(best), objective);
    for (std::size_t s = 0; s < shuffles; ++s) {
        std::mt19937_64 rng(splitmix64(seed + s));
        // Mix of fully random and strongly greedy orders.
        double greed = s % 4 == 0 ? 0.0 : std::uniform_real_distribution<double>(0.5, 1.0)(rng);
        auto order = sample_order(c, cx, objective, greed, rng);
        Circuit cand = rebuild_with_order(c, order);
        auto key = objective_key(circuit_metrics(cand), objective);
        if (key < best_key) {
            best_key = key;
            best = std::move(cand);
        }
    }
    return best;
}

Circuit assemble_and_schedule(const BipartiteCircuit& bip, const CssState& state, GadgetLibrary& library,
                              const AssemblyOptions& opts, ScheduleObjective objective, std::size_t shuffles,
                              AssemblyInfo* info) {
    Circuit best = assemble_ft_circuit(bip, state, library, opts, info);
    auto best_key = objective_key(circuit_metrics(best), objective);
    Layout L = make_layout(bip, state, library, opts, nullptr);
    for (std::size_t s = 0; s < shuffles; ++s) {
        std::mt19937_64 rng(splitmix64(opts.seed + s));
        double greed = s % 4 == 0 ? 0.0 : std::uniform_real_distribution<double>(0.5, 1.0)(rng);
        Circuit cand = emit(L, simulate_joint(L, bip, objective, greed, rng), state);
        auto key = objective_key(circuit_metrics(cand), objective);
        if (key < best_key) {
            best_key = key;
            best = std::move(cand);
        }
    }
    return best;
}

}  // namespace flagprep
