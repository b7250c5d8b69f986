#include "flagprep/bipartite.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace flagprep {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::size_t BipartiteCircuit::degree(std::size_t q) const {
    std::size_t d = 0;
    for (const auto& [c, t] : edges) d += (c == q) + (t == q);
    return d;
}

std::size_t BipartiteCircuit::max_degree() const {
    std::vector<std::size_t> deg(n, 0);
    for (const auto& [c, t] : edges) {
        ++deg[c];
        ++deg[t];
    }
    return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

Circuit BipartiteCircuit::to_circuit(const CssState& state) const {
    Circuit c;
    c.set_attribute("code", state.name.empty() ? "unnamed" : state.name);
    c.set_attribute("state", state.state_label.empty() ? "-" : state.state_label);
    c.num_code = n;
    c.roles.assign(n, QubitRole::Target);
    for (auto q : controls) c.roles[q] = QubitRole::Control;
    for (std::size_t q = 0; q < n; ++q)
        c.ops.push_back(c.roles[q] == QubitRole::Control ? Operation::init_plus(q) : Operation::init_zero(q));
    for (const auto& [a, b] : edges) c.ops.push_back(Operation::cx(a, b));
    return c;
}

BipartiteCircuit synthesize_bipartite(const CssState& state, uint64_t seed) {
    const std::size_t n = state.n;
    auto xs = state.stabilizers_of_type(PauliType::X);
    auto zs = state.stabilizers_of_type(PauliType::Z);
    const std::size_t r = xs.size();
    if (r + zs.size() != n) throw RankDeficient("state does not have n independent generators");

    GF2Matrix X(0, n), Z(0, n);
    for (const auto& p : xs) X.append_row(p.x);
    for (const auto& p : zs) Z.append_row(p.z);

    std::mt19937_64 rng(splitmix64(seed));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    // Greedy pivot set: columns of X that are linearly independent, in shuffled order.
    RowSpace cols(r);
    std::vector<std::size_t> piv, rest;
    for (auto q : order) {
        if (piv.size() < r && cols.insert(X.column(q))) piv.push_back(q);
        else rest.push_back(q);
    }
    if (piv.size() != r) throw RankDeficient("X-type stabilizers are not full rank");
    std::sort(piv.begin(), piv.end());
    std::sort(rest.begin(), rest.end());

    GF2Matrix X1 = X.select_columns(piv), X2 = X.select_columns(rest);
    GF2Matrix Z1 = Z.select_columns(piv), Z2 = Z.select_columns(rest);
    GF2Matrix B = invert(X1) * X2;  // r x (n-r): control i couples to target j
    GF2Matrix Z2inv;
    try {
        Z2inv = invert(Z2);
    } catch (const SingularMatrix&) {
        throw AdjacencyAsymmetry("Z-type block on targets is singular; generators do not commute");
    }
    if (Z2inv * Z1 != B.transpose())
        throw AdjacencyAsymmetry("X- and Z-derived adjacency matrices disagree");

    BipartiteCircuit bc;
    bc.n = n;
    bc.controls = piv;
    bc.targets = rest;
    for (std::size_t i = 0; i < r; ++i)
        for (auto j : B.row(i).ones()) bc.edges.emplace_back(piv[i], rest[j]);
    std::sort(bc.edges.begin(), bc.edges.end());
    return bc;
}

BipartiteCircuit best_of_trials(const CssState& state, std::size_t trials, uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("trials must be at least 1");
    BipartiteCircuit best;
    for (std::size_t i = 0; i < trials; ++i) {
        auto bc = synthesize_bipartite(state, i == 0 ? seed : splitmix64(seed ^ (0xa5a5a5a5ULL + i)));
        if (i == 0 || bc.edges.size() < best.edges.size() ||
            (bc.edges.size() == best.edges.size() && bc.max_degree() < best.max_degree()))
            best = std::move(bc);
    }
    return best;
}

}  // namespace flagprep
