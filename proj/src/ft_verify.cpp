#include "flagprep/ft_verify.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include "flagprep/frame.hpp"

namespace flagprep {

std::vector<FaultLocation> enumerate_fault_locations(const Circuit& c, PauliType type) {
    std::vector<FaultLocation> locs;
    for (std::size_t i = 0; i < c.ops.size(); ++i) {
        const auto& op = c.ops[i];
        switch (op.kind) {
            case OpKind::InitPlus:
                if (type == PauliType::Z) locs.push_back({i, FaultSite::AfterInit, type, {{op.a}}});
                break;
            case OpKind::InitZero:
                if (type == PauliType::X) locs.push_back({i, FaultSite::AfterInit, type, {{op.a}}});
                break;
            case OpKind::CX:
                locs.push_back({i, FaultSite::AfterCX, type, {{op.a}, {op.b}, {op.a, op.b}}});
                break;
            case OpKind::MeasZ:
                if (type == PauliType::X) locs.push_back({i, FaultSite::BeforeMeasurement, type, {{op.a}}});
                break;
            case OpKind::MeasX:
                if (type == PauliType::Z) locs.push_back({i, FaultSite::BeforeMeasurement, type, {{op.a}}});
                break;
            case OpKind::FinalMeas: break;
        }
    }
    return locs;
}

uint64_t count_fault_combinations(const std::vector<FaultLocation>& locs, std::size_t t) {
    // Elementary symmetric polynomials of the per-location variant counts.
    std::vector<long double> e(t + 1, 0.0L);
    e[0] = 1.0L;
    for (const auto& l : locs)
        for (std::size_t k = t; k >= 1; --k) e[k] += e[k - 1] * static_cast<long double>(l.variants.size());
    long double total = 0;
    for (std::size_t k = 1; k <= t; ++k) total += e[k];
    return total >= 1.8e19L ? UINT64_MAX : static_cast<uint64_t>(total + 0.5L);
}

namespace {

FrameEffect variant_effect(const Circuit& c, const FaultLocation& l, std::size_t v) {
    BitVector x(c.num_qubits()), z(c.num_qubits());
    for (auto q : l.variants[v]) (l.type == PauliType::X ? x : z).flip(q);
    return propagate_frame(c, l.insert_position(), std::move(x), std::move(z));
}

struct Tables {
    std::size_t W = 0;  // flag words
    std::vector<std::size_t> first_variant;  // per location, into the flat arrays; size L+1
    std::vector<uint64_t> flags;
    std::vector<uint64_t> keys;
};

class Worker {
public:
    Worker(const Tables& tb, const CosetTable& ct, std::size_t t, std::atomic<bool>& stop,
           std::atomic<uint64_t>& done, uint64_t budget)
        : tb_(tb), ct_(ct), t_(t), stop_(stop), done_(done), budget_(budget), acc_((t + 1) * tb.W, 0) {}

    // Explores all combinations whose first location is `l0`.
    void run_first(std::size_t l0) {
        for (std::size_t v = tb_.first_variant[l0]; v < tb_.first_variant[l0 + 1] && !halted(); ++v) {
            chosen_.assign(1, {l0, v - tb_.first_variant[l0]});
            std::copy_n(&tb_.flags[v * tb_.W], tb_.W, &acc_[tb_.W]);
            keyacc_[1] = tb_.keys[v];
            check(1);
            if (t_ > 1) rec(l0 + 1, 2);
        }
    }

    std::optional<Counterexample> found;
    uint64_t local = 0;

private:
    bool halted() const { return stop_.load(std::memory_order_relaxed) || found.has_value(); }

    void check(std::size_t f) {
        if (++local % 4096 == 0) {
            uint64_t d = done_.fetch_add(4096, std::memory_order_relaxed) + 4096;
            if (budget_ && d >= budget_) stop_ = true;
        }
        const uint64_t* fl = &acc_[f * tb_.W];
        for (std::size_t w = 0; w < tb_.W; ++w)
            if (fl[w]) return;
        std::size_t wt = ct_.weight_of_key(keyacc_[f]);
        if (wt > f) found = Counterexample{chosen_, {}, wt};
    }

    void rec(std::size_t from, std::size_t f) {
        const std::size_t L = tb_.first_variant.size() - 1;
        for (std::size_t l = from; l < L && !halted(); ++l) {
            for (std::size_t v = tb_.first_variant[l]; v < tb_.first_variant[l + 1]; ++v) {
                for (std::size_t w = 0; w < tb_.W; ++w)
                    acc_[f * tb_.W + w] = acc_[(f - 1) * tb_.W + w] ^ tb_.flags[v * tb_.W + w];
                keyacc_[f] = keyacc_[f - 1] ^ tb_.keys[v];
                chosen_.push_back({l, v - tb_.first_variant[l]});
                check(f);
                if (found) return;
                if (f < t_) rec(l + 1, f + 1);
                if (found) return;
                chosen_.pop_back();
            }
        }
    }

    const Tables& tb_;
    const CosetTable& ct_;
    std::size_t t_;
    std::atomic<bool>& stop_;
    std::atomic<uint64_t>& done_;
    uint64_t budget_;
    std::vector<uint64_t> acc_;
    uint64_t keyacc_[8] = {};
    std::vector<ChosenFault> chosen_;
};

}  // namespace

VerifyResult verify_fault_tolerance(const Circuit& c, const CssState& state, std::size_t t, PauliType type,
                                    const VerifyOptions& opts) {
    if (c.num_code != state.n) throw std::invalid_argument("circuit and state sizes differ");
    if (t > 7) throw std::invalid_argument("verification supports t <= 7");
    VerifyResult res;
    if (t == 0) return res;
    auto locs = enumerate_fault_locations(c, type);
    CosetTable ct(state, type);

    Tables tb;
    tb.W = std::max<std::size_t>(1, (c.num_flags() + 63) / 64);
    tb.first_variant.push_back(0);
    for (const auto& l : locs) {
        for (std::size_t v = 0; v < l.variants.size(); ++v) {
            auto e = variant_effect(c, l, v);
            for (std::size_t w = 0; w < tb.W; ++w) tb.flags.push_back(w < e.flags.num_words() ? e.flags.words()[w] : 0);
            tb.keys.push_back(ct.key(type == PauliType::X ? e.x : e.z));
        }
        tb.first_variant.push_back(tb.keys.size());
    }

    const uint64_t total = count_fault_combinations(locs, t);
    unsigned nt = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    nt = static_cast<unsigned>(std::min<std::size_t>(nt, std::max<std::size_t>(1, locs.size())));
    std::atomic<bool> stop{false};
    std::atomic<uint64_t> done{0};
    std::atomic<std::size_t> next{0};
    std::vector<Worker> workers;
    workers.reserve(nt);
    for (unsigned i = 0; i < nt; ++i) workers.emplace_back(tb, ct, t, stop, done, opts.budget);
    std::mutex mu;
    std::optional<Counterexample> best;
    auto body = [&](Worker& w) {
        for (;;) {
            if (stop.load()) return;
            std::size_t l0 = next.fetch_add(1);
            if (l0 >= locs.size()) return;
            w.run_first(l0);
            if (w.found) {
                std::lock_guard lock(mu);
                // Keep the earliest first location so single-threaded and parallel runs agree.
                if (!best || w.found->faults.front().location < best->faults.front().location) best = w.found;
                stop = true;
                return;
            }
        }
    };
    if (nt == 1) {
        body(workers[0]);
    } else {
        std::vector<std::thread> ths;
        for (unsigned i = 0; i < nt; ++i) ths.emplace_back(body, std::ref(workers[i]));
        for (auto& th : ths) th.join();
    }
    for (const auto& w : workers) res.combinations += w.local;
    if (best) {
        auto rep = replay_faults(c, state, type, best->faults);
        best->residual = rep.residual;
        res.pass = false;
        res.counterexample = std::move(best);
        return res;
    }
    if (opts.budget && res.combinations < total) throw VerificationBudgetExhausted(res.combinations, total);
    return res;
}

ReplayResult replay_faults(const Circuit& c, const CssState& state, PauliType type,
                           const std::vector<ChosenFault>& faults) {
    auto locs = enumerate_fault_locations(c, type);
    ReplayResult r{BitVector(c.num_flags()), BitVector(c.num_code), 0};
    for (const auto& f : faults) {
        auto e = variant_effect(c, locs.at(f.location), f.variant);
        r.flags ^= e.flags;
        r.residual ^= type == PauliType::X ? e.x : e.z;
    }
    // Brute-force reduction, independent of the coset table.
    try {
        r.reduced_weight =
            min_weight_modulo(PauliOperator::of_type(type, r.residual), state.reduction_group(type));
    } catch (const GroupTooLarge&) {
        r.reduced_weight = CosetTable(state, type).min_weight(r.residual);
    }
    return r;
}

std::string describe_counterexample(const Circuit& c, PauliType type, const Counterexample& ce) {
    auto locs = enumerate_fault_locations(c, type);
    std::ostringstream os;
    os << ce.faults.size() << " " << type_char(type) << " fault(s):";
    for (const auto& f : ce.faults) {
        const auto& l = locs.at(f.location);
        os << " [op " << l.op_index << (l.site == FaultSite::BeforeMeasurement ? " before" : " after") << ":";
        for (auto q : l.variants.at(f.variant)) os << " " << type_char(type) << c.qubit_name(q);
        os << "]";
    }
    os << " -> undetected residual " << ce.residual.to_string() << " of reduced weight " << ce.reduced_weight;
    return os.str();
}

}  // namespace flagprep
