#include "flagprep/noise_sim.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>
#include <unordered_set>

#include "flagprep/bipartite.hpp"
#include "flagprep/frame.hpp"

namespace flagprep {

LocationCounts count_fault_locations(const Circuit& c) {
    LocationCounts lc;
    std::size_t active = 0;
    for (const auto& op : c.ops) {
        switch (op.kind) {
            case OpKind::InitPlus:
            case OpKind::InitZero:
                ++lc.L_p;
                ++active;
                break;
            case OpKind::CX:
                ++lc.L_p;
                lc.L_q += active;
                break;
            case OpKind::MeasZ:
            case OpKind::MeasX:
                ++lc.L_p;
                if (active) --active;
                break;
            case OpKind::FinalMeas: break;
        }
    }
    return lc;
}

double binomial_pmf(std::size_t n, double p, std::size_t k) {
    if (k > n) return 0.0;
    if (p <= 0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1) return k == n ? 1.0 : 0.0;
    double nn = static_cast<double>(n), kk = static_cast<double>(k);
    double lg = std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1);
    return std::exp(lg + kk * std::log(p) + (nn - kk) * std::log1p(-p));
}

SubsetPlan build_subset_plan(std::size_t L_p, std::size_t L_q, const NoiseModel& model, std::size_t S) {
    if (S == 0) throw std::invalid_argument("S must be at least 1");
    if (!(model.p >= 0 && model.p < 1)) throw std::invalid_argument("p must lie in [0, 1)");
    SubsetPlan plan;
    plan.L_p = L_p;
    plan.L_q = L_q;
    plan.p = model.p;
    plan.q = model.q();
    plan.S = S;
    const double cutoff = 1.0 / (static_cast<double>(S) * static_cast<double>(S));
    auto pmf = [&](std::size_t n, double p) {
        std::vector<double> v;
        for (std::size_t k = 0; k <= n; ++k) {
            double x = binomial_pmf(n, p, k);
            // Past the mode the pmf only decreases; stop once it drops below any useful product.
            if (x <= cutoff && static_cast<double>(k) > n * p) break;
            v.push_back(x);
        }
        return v;
    };
    auto a = pmf(L_p, plan.p), b = pmf(L_q, plan.q);
    plan.p00 = std::exp(static_cast<double>(L_p) * std::log1p(-plan.p) + static_cast<double>(L_q) * std::log1p(-plan.q));
    if (plan.p00 >= 1.0 - cutoff) throw DegeneratePlan("no fault bucket above the 1/S^2 threshold");
    double total = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (i == 0 && j == 0) continue;
            double pr = a[i] * b[j];
            if (pr <= cutoff) continue;
            plan.pairs.push_back({i, j, pr, 0});
            total += pr;
        }
    if (plan.pairs.empty()) throw DegeneratePlan("no fault bucket above the 1/S^2 threshold");
    for (auto& pr : plan.pairs) pr.sampling = pr.prob / total;
    plan.trivial_addback = static_cast<double>(S) * plan.p00 / (1.0 - plan.p00);
    return plan;
}

NoiseLocations enumerate_noise_locations(const Circuit& c) {
    NoiseLocations nl;
    std::vector<uint32_t> active;
    for (std::size_t i = 0; i < c.ops.size(); ++i) {
        const auto& op = c.ops[i];
        switch (op.kind) {
            case OpKind::InitPlus:
            case OpKind::InitZero:
                nl.p_locations.push_back({NoiseKind::Depol1, i + 1, op.a, 0, PauliType::Z});
                active.push_back(op.a);
                break;
            case OpKind::CX:
                nl.p_locations.push_back({NoiseKind::Depol2, i + 1, op.a, op.b, PauliType::Z});
                for (auto q : active) nl.q_locations.push_back({NoiseKind::Idle, i + 1, q, 0, PauliType::Z});
                break;
            case OpKind::MeasZ:
            case OpKind::MeasX:
                nl.p_locations.push_back({NoiseKind::MeasFlip, i, op.a, 0,
                                          op.kind == OpKind::MeasZ ? PauliType::Z : PauliType::X});
                if (auto it = std::find(active.begin(), active.end(), op.a); it != active.end()) active.erase(it);
                break;
            case OpKind::FinalMeas: break;
        }
    }
    return nl;
}

uint8_t random_fault_pattern(const NoiseLocation& loc, std::mt19937_64& rng) {
    switch (loc.kind) {
        case NoiseKind::Depol2: return static_cast<uint8_t>(1 + rng() % 15);
        case NoiseKind::MeasFlip: return loc.meas_basis == PauliType::Z ? 1 : 2;
        default: return static_cast<uint8_t>(1 + rng() % 3);
    }
}

FaultEffectTable::FaultEffectTable(const Circuit& c) : locs_(enumerate_noise_locations(c)) {
    if (c.num_code > 64) throw std::invalid_argument("fault effect tables support at most 64 code qubits");
    W_ = std::max<std::size_t>(1, (c.num_flags() + 63) / 64);
    auto pack = [](const BitVector& v) { return v.num_words() ? v.words()[0] : 0ULL; };
    auto fill = [&](const std::vector<NoiseLocation>& locs, std::vector<uint64_t>& data) {
        const std::size_t stride = 4 * (W_ + 2);
        data.assign(locs.size() * stride, 0);
        for (std::size_t l = 0; l < locs.size(); ++l) {
            const auto& loc = locs[l];
            for (std::size_t b = 0; b < 4; ++b) {
                if (b >= 2 && loc.kind != NoiseKind::Depol2) break;
                BitVector x(c.num_qubits()), z(c.num_qubits());
                uint32_t q = b < 2 ? loc.q0 : loc.q1;
                (b % 2 == 0 ? x : z).set(q);
                auto e = propagate_frame(c, loc.position, std::move(x), std::move(z));
                uint64_t* out = &data[l * stride + b * (W_ + 2)];
                for (std::size_t w = 0; w < W_ && w < e.flags.num_words(); ++w) out[w] = e.flags.words()[w];
                out[W_] = pack(e.x);
                out[W_ + 1] = pack(e.z);
            }
        }
    };
    fill(locs_.p_locations, p_data_);
    fill(locs_.q_locations, q_data_);
}

void FaultEffectTable::apply(bool idle, std::size_t loc, uint8_t pattern, uint64_t* flags, uint64_t& x,
                             uint64_t& z) const {
    const std::size_t stride = 4 * (W_ + 2);
    const uint64_t* base = &(idle ? q_data_ : p_data_)[loc * stride];
    for (std::size_t b = 0; b < 4; ++b) {
        if (!((pattern >> b) & 1)) continue;
        const uint64_t* e = base + b * (W_ + 2);
        for (std::size_t w = 0; w < W_; ++w) flags[w] ^= e[w];
        x ^= e[W_];
        z ^= e[W_ + 1];
    }
}

FrameOutcome PauliFrameSimulator::run(std::vector<InjectedPauli> faults) const {
    std::stable_sort(faults.begin(), faults.end(),
                     [](const InjectedPauli& a, const InjectedPauli& b) { return a.position < b.position; });
    const std::size_t nq = c_.num_qubits();
    BitVector x(nq), z(nq);
    FrameOutcome out{BitVector(c_.num_flags()), BitVector(c_.num_code), BitVector(c_.num_code)};
    std::size_t next = 0;
    auto inject_upto = [&](std::size_t pos) {
        for (; next < faults.size() && faults[next].position <= pos; ++next) {
            x ^= faults[next].pauli.x;
            z ^= faults[next].pauli.z;
        }
    };
    for (std::size_t i = 0; i < c_.ops.size(); ++i) {
        inject_upto(i);
        const auto& op = c_.ops[i];
        switch (op.kind) {
            case OpKind::InitPlus:
            case OpKind::InitZero:
                x.set(op.a, false);
                z.set(op.a, false);
                break;
            case OpKind::CX:
                if (x.get(op.a)) x.flip(op.b);
                if (z.get(op.b)) z.flip(op.a);
                break;
            case OpKind::MeasZ:
                if (x.get(op.a)) out.flags.flip(op.flag_id);
                break;
            case OpKind::MeasX:
                if (z.get(op.a)) out.flags.flip(op.flag_id);
                break;
            case OpKind::FinalMeas: break;
        }
    }
    inject_upto(c_.ops.size());
    for (std::size_t q = 0; q < c_.num_code; ++q) {
        out.x.set(q, x.get(q));
        out.z.set(q, z.get(q));
    }
    return out;
}

ObservationSpec ObservationSpec::for_state(const CssState& state, PauliType error_type) {
    if (state.n > 64) throw std::invalid_argument("observation masks support at most 64 code qubits");
    ObservationSpec o;
    o.error_type = error_type;
    auto check_type = opposite(error_type);
    auto mask = [&](const PauliOperator& p) {
        const BitVector& b = p.bits(check_type);
        return b.num_words() ? b.words()[0] : 0ULL;
    };
    for (const auto& g : state.generators_of_type(check_type)) o.checks.push_back(mask(g));
    o.syndrome_bits = o.checks.size();
    for (const auto& l : state.stabilizing_logicals(check_type)) o.checks.push_back(mask(l));
    if (o.checks.size() > 64) throw std::invalid_argument("too many check bits for a 64-bit key");
    return o;
}

uint64_t ObservationSpec::key(uint64_t residual) const {
    uint64_t k = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) k |= static_cast<uint64_t>(std::popcount(residual & checks[i]) & 1) << i;
    return k;
}

uint64_t shard_seed(uint64_t seed, std::size_t shard) { return splitmix64(seed ^ splitmix64(shard + 0x9e37ULL)); }

std::size_t shard_size(std::size_t total, std::size_t shards, std::size_t shard) {
    return total / shards + (shard < total % shards ? 1 : 0);
}

void for_each_shard(std::size_t shards, unsigned threads, const std::function<void(std::size_t)>& fn) {
    unsigned nt = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    nt = static_cast<unsigned>(std::min<std::size_t>(nt, shards));
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (std::size_t s; (s = next.fetch_add(1)) < shards;) fn(s);
    };
    if (nt <= 1) {
        body();
        return;
    }
    std::vector<std::thread> ths;
    for (unsigned i = 0; i < nt; ++i) ths.emplace_back(body);
    for (auto& t : ths) t.join();
}

namespace {

// Floyd's algorithm: k distinct values from [0, n).
void sample_distinct(std::size_t n, std::size_t k, std::mt19937_64& rng, std::vector<std::size_t>& out) {
    out.clear();
    if (k > n) throw std::logic_error("more faults than locations");
    for (std::size_t j = n - k; j < n; ++j) {
        std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
        else out.push_back(j);
    }
}

}  // namespace

MonteCarloResult run_monte_carlo(const Circuit& c, const CssState& state, const SubsetPlan& plan, uint64_t seed,
                                 const MonteCarloOptions& opts) {
    if (c.num_code != state.n) throw std::invalid_argument("circuit and state sizes differ");
    FaultEffectTable table(c);
    const auto& locs = table.locations();
    if (locs.p_locations.size() != plan.L_p || locs.q_locations.size() != plan.L_q)
        throw std::invalid_argument("subset plan was built for a different circuit");
    PauliType final_basis = PauliType::Z;
    for (const auto& op : c.ops)
        if (op.kind == OpKind::FinalMeas) final_basis = op.basis;
    auto obs = ObservationSpec::for_state(state, opposite(final_basis));
    const bool read_x = obs.error_type == PauliType::X;

    std::vector<double> weights;
    for (const auto& pr : plan.pairs) weights.push_back(pr.sampling);

    const std::size_t shards = std::max<std::size_t>(1, opts.shards);
    std::vector<MonteCarloResult> parts(shards);
    for_each_shard(shards, opts.threads, [&](std::size_t s) {
        std::mt19937_64 rng(shard_seed(seed, s));
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        auto& r = parts[s];
        const std::size_t W = table.flag_words();
        std::vector<uint64_t> flags(W);
        std::vector<std::size_t> idx;
        const std::size_t n = shard_size(plan.S, shards, s);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& pr = plan.pairs[pick(rng)];
            std::fill(flags.begin(), flags.end(), 0);
            uint64_t x = 0, z = 0;
            sample_distinct(locs.p_locations.size(), pr.f_p, rng, idx);
            for (auto l : idx) table.apply(false, l, random_fault_pattern(locs.p_locations[l], rng), flags.data(), x, z);
            sample_distinct(locs.q_locations.size(), pr.f_q, rng, idx);
            for (auto l : idx) table.apply(true, l, random_fault_pattern(locs.q_locations[l], rng), flags.data(), x, z);
            ++r.drawn;
            bool flagged = false;
            for (auto w : flags) flagged = flagged || w;
            if (flagged) continue;
            ++r.accepted;
            r.outcomes.push_back({obs.key(read_x ? x : z), static_cast<uint16_t>(pr.f_p), static_cast<uint16_t>(pr.f_q)});
        }
    });

    MonteCarloResult res;
    res.syndrome_bits = obs.syndrome_bits;
    res.class_bits = obs.checks.size() - obs.syndrome_bits;
    res.trivial_addback = plan.trivial_addback;
    std::size_t total = 0;
    for (const auto& p : parts) total += p.outcomes.size();
    res.outcomes.reserve(total);
    for (auto& p : parts) {
        res.drawn += p.drawn;
        res.accepted += p.accepted;
        res.outcomes.insert(res.outcomes.end(), p.outcomes.begin(), p.outcomes.end());
    }
    return res;
}

std::pair<double, double> wilson_interval(double successes, double trials, double z) {
    if (trials <= 0) throw std::invalid_argument("Wilson interval needs at least one trial");
    if (successes < 0 || successes > trials) throw std::invalid_argument("successes out of range");
    double ph = successes / trials, z2 = z * z;
    double denom = 1 + z2 / trials;
    double center = (ph + z2 / (2 * trials)) / denom;
    double half = z * std::sqrt(ph * (1 - ph) / trials + z2 / (4 * trials * trials)) / denom;
    double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

namespace {

constexpr char kMagic[8] = {'F', 'P', 'O', 'U', 'T', '0', '1', '\n'};

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("truncated outcome file");
    return v;
}

}  // namespace

void write_outcomes(const std::string& path, const MonteCarloResult& r) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os.write(kMagic, sizeof(kMagic));
    put<uint64_t>(os, r.drawn);
    put<uint64_t>(os, r.accepted);
    put<double>(os, r.trivial_addback);
    put<uint32_t>(os, static_cast<uint32_t>(r.syndrome_bits));
    put<uint32_t>(os, static_cast<uint32_t>(r.class_bits));
    put<uint64_t>(os, r.outcomes.size());
    for (const auto& o : r.outcomes) {
        put<uint64_t>(os, o.key);
        put<uint16_t>(os, o.f_p);
        put<uint16_t>(os, o.f_q);
    }
}

MonteCarloResult read_outcomes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error(path + ": not an outcome file");
    MonteCarloResult r;
    r.drawn = get<uint64_t>(is);
    r.accepted = get<uint64_t>(is);
    r.trivial_addback = get<double>(is);
    r.syndrome_bits = get<uint32_t>(is);
    r.class_bits = get<uint32_t>(is);
    auto n = get<uint64_t>(is);
    r.outcomes.resize(n);
    for (auto& o : r.outcomes) {
        o.key = get<uint64_t>(is);
        o.f_p = get<uint16_t>(is);
        o.f_q = get<uint16_t>(is);
    }
    return r;
}

void write_outcomes_csv(const std::string& path, const MonteCarloResult& r) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    auto bits = [](uint64_t v, std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) s += ((v >> i) & 1) ? '1' : '0';
        return s;
    };
    os << "syndrome,class,f_p,f_q\n";
    for (const auto& o : r.outcomes)
        os << bits(o.key, r.syndrome_bits) << ',' << bits(o.key >> r.syndrome_bits, r.class_bits) << ',' << o.f_p
           << ',' << o.f_q << '\n';
}

}  // namespace flagprep
