#include "flagprep/decoder.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <numeric>
#include <random>

#include "flagprep/io.hpp"
#include "json.hpp"

namespace flagprep {

using nlohmann::json;

bool class_lex_less(uint64_t a, uint64_t b, std::size_t class_bits) {
    for (std::size_t i = 0; i < class_bits; ++i) {
        bool x = (a >> i) & 1, y = (b >> i) & 1;
        if (x != y) return y;
    }
    return false;
}

void MLTable::add(uint64_t syndrome, uint64_t cls, uint64_t count) {
    auto& v = entries_[syndrome];
    auto it = std::lower_bound(v.begin(), v.end(), cls, [](const auto& e, uint64_t c) { return e.first < c; });
    if (it != v.end() && it->first == cls)
        it->second += count;
    else
        v.insert(it, {cls, count});
    total_ += count;
}

void MLTable::merge(const MLTable& other) {
    for (const auto& [s, v] : other.entries_)
        for (const auto& [c, n] : v) add(s, c, n);
}

const std::vector<std::pair<uint64_t, uint64_t>>* MLTable::counts(uint64_t syndrome) const {
    auto it = entries_.find(syndrome);
    return it == entries_.end() ? nullptr : &it->second;
}

std::optional<uint64_t> MLTable::most_likely(uint64_t syndrome) const {
    const auto* v = counts(syndrome);
    if (!v || v->empty()) return std::nullopt;
    auto best = v->front();
    for (const auto& e : *v)
        if (e.second > best.second || (e.second == best.second && class_lex_less(e.first, best.first, class_bits_)))
            best = e;
    return best.first;
}

double MLTable::runner_up_ratio(uint64_t syndrome) const {
    const auto* v = counts(syndrome);
    if (!v || v->size() < 2) return 0.0;
    uint64_t a = 0, b = 0;
    for (const auto& e : *v) {
        if (e.second > a) {
            b = a;
            a = e.second;
        } else if (e.second > b) {
            b = e.second;
        }
    }
    return a ? static_cast<double>(b) / static_cast<double>(a) : 0.0;
}

std::vector<uint64_t> MLTable::syndromes() const {
    std::vector<uint64_t> s;
    s.reserve(entries_.size());
    for (const auto& e : entries_) s.push_back(e.first);
    std::sort(s.begin(), s.end());
    return s;
}

MLTable build_ml_lut(const std::vector<SampleOutcome>& training, std::size_t syndrome_bits, std::size_t class_bits) {
    MLTable t(syndrome_bits, class_bits);
    const uint64_t mask = syndrome_bits >= 64 ? ~0ULL : (1ULL << syndrome_bits) - 1;
    for (const auto& o : training) t.add(o.key & mask, o.key >> syndrome_bits);
    return t;
}

const MWEntry* MWTable::find(uint64_t syndrome) const {
    auto it = entries.find(syndrome);
    return it == entries.end() ? nullptr : &it->second;
}

namespace {

double binom(std::size_t n, std::size_t k) {
    double r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

}  // namespace

MWTable build_mw_lut(const CssState& state, PauliType error_type, std::size_t w_max) {
    auto spec = ObservationSpec::for_state(state, error_type);
    MWTable t;
    t.syndrome_bits = spec.syndrome_bits;
    t.class_bits = spec.checks.size() - spec.syndrome_bits;
    t.w_max = w_max;
    const std::size_t n = state.n;
    w_max = std::min(w_max, n);
    double total = 0;
    for (std::size_t w = 1; w <= w_max; ++w) total += binom(n, w);
    if (total > static_cast<double>(kMaxMWEnumeration))
        throw std::invalid_argument("MW table enumeration exceeds " + std::to_string(kMaxMWEnumeration) + " errors");
    const std::size_t radius = state.d ? (state.d - 1) / 2 : 0;

    // Column contributions so each error's key is an XOR of its qubits' columns.
    std::vector<uint64_t> col(n);
    for (std::size_t q = 0; q < n; ++q) col[q] = spec.key(1ULL << q);

    std::vector<std::size_t> idx;
    for (std::size_t w = 1; w <= w_max; ++w) {
        idx.resize(w);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            uint64_t key = 0;
            for (auto q : idx) key ^= col[q];
            uint64_t s = spec.syndrome(key), c = spec.cls(key);
            auto [it, fresh] = t.entries.try_emplace(s, MWEntry{c, static_cast<uint8_t>(w), false});
            if (!fresh && it->second.cls != c) {
                if (w <= radius)
                    throw ClassConflict("errors of weight " + std::to_string(it->second.weight) + " and " +
                                        std::to_string(w) + " share a syndrome with different classes");
                ++t.conflicts;
                if (it->second.weight == w) it->second.ambiguous = true;
            }
            // next combination
            std::size_t i = w;
            while (i > 0 && idx[i - 1] == n - w + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < w; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return t;
}

Decision decode(uint64_t syndrome, const MLTable* ml, const MWTable* mw, const DecodePolicy& policy) {
    const MWEntry* mwe = mw ? mw->find(syndrome) : nullptr;
    if (policy.even_distance_discard && mwe && mwe->weight == policy.t) return {DecodeSource::Discard, 0};
    if (policy.use_ml && ml) {
        if (auto c = ml->most_likely(syndrome)) {
            if (policy.ml_ratio_discard && ml->runner_up_ratio(syndrome) >= *policy.ml_ratio_discard)
                return {DecodeSource::Discard, 0};
            return {DecodeSource::ML, *c};
        }
    }
    if (policy.use_mw && mwe) return {DecodeSource::MW, mwe->cls};
    return {DecodeSource::Fallback, 0};
}

double EvaluationReport::post_discard_rate() const {
    double accepted = static_cast<double>(samples) + trivial_addback;
    return accepted > 0 ? kept / accepted : 0.0;
}

EvaluationReport evaluate_test_set(const std::vector<SampleOutcome>& test, double trivial_addback,
                                   std::size_t syndrome_bits, const MLTable* ml, const MWTable* mw,
                                   const DecodePolicy& policy) {
    EvaluationReport r;
    r.samples = test.size();
    r.trivial_addback = trivial_addback;
    const uint64_t mask = syndrome_bits >= 64 ? ~0ULL : (1ULL << syndrome_bits) - 1;
    for (const auto& o : test) {
        uint64_t s = o.key & mask, truth = o.key >> syndrome_bits;
        Decision d = decode(s, ml, mw, policy);
        if (d.source == DecodeSource::Discard) {
            ++r.discarded;
            continue;
        }
        r.kept += 1;
        bool wrong = d.cls != truth;
        LayerStats& layer = d.source == DecodeSource::ML ? r.ml : d.source == DecodeSource::MW ? r.mw : r.fallback;
        ++layer.hits;
        if (wrong) {
            ++layer.errors;
            r.logical_errors += 1;
        }
    }
    // Fault-free samples carry zero syndrome and trivial class.
    Decision d0 = decode(0, ml, mw, policy);
    if (d0.source != DecodeSource::Discard) {
        r.kept += trivial_addback;
        if (d0.cls != 0) {
            r.addback_errors = trivial_addback;
            r.logical_errors += trivial_addback;
        }
    }
    return r;
}

Split split_train_test(const MonteCarloResult& r, uint64_t seed) {
    std::vector<std::size_t> order(r.outcomes.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    Split s;
    const std::size_t half = order.size() / 2;
    s.train.reserve(half);
    s.test.reserve(order.size() - half);
    for (std::size_t i = 0; i < order.size(); ++i) (i < half ? s.train : s.test).push_back(r.outcomes[order[i]]);
    s.train_addback = r.trivial_addback / 2;
    s.test_addback = r.trivial_addback - s.train_addback;
    return s;
}

void write_ml_table(const std::filesystem::path& path, const MLTable& t) {
    json j;
    j["kind"] = "ml";
    j["syndrome_bits"] = t.syndrome_bits();
    j["class_bits"] = t.class_bits();
    json rows = json::array();
    for (uint64_t s : t.syndromes()) {
        json counts = json::array();
        for (const auto& [c, n] : *t.counts(s)) counts.push_back({c, n});
        rows.push_back({{"syndrome", s}, {"class", *t.most_likely(s)}, {"counts", counts}});
    }
    j["entries"] = rows;
    write_text_file(path, j.dump(1) + "\n");
}

MLTable read_ml_table(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (j.value("kind", "") != "ml") throw ParseError(path.string() + ": not an ML table");
    MLTable t(j.at("syndrome_bits").get<std::size_t>(), j.at("class_bits").get<std::size_t>());
    for (const auto& row : j.at("entries"))
        for (const auto& c : row.at("counts"))
            t.add(row.at("syndrome").get<uint64_t>(), c.at(0).get<uint64_t>(), c.at(1).get<uint64_t>());
    return t;
}

void write_mw_table(const std::filesystem::path& path, const MWTable& t) {
    json j;
    j["kind"] = "mw";
    j["syndrome_bits"] = t.syndrome_bits;
    j["class_bits"] = t.class_bits;
    j["w_max"] = t.w_max;
    j["conflicts"] = t.conflicts;
    std::vector<uint64_t> keys;
    for (const auto& e : t.entries) keys.push_back(e.first);
    std::sort(keys.begin(), keys.end());
    json rows = json::array();
    for (uint64_t s : keys) {
        const auto& e = t.entries.at(s);
        rows.push_back({{"syndrome", s}, {"class", e.cls}, {"weight", e.weight}, {"ambiguous", e.ambiguous}});
    }
    j["entries"] = rows;
    write_text_file(path, j.dump(1) + "\n");
}

}  // namespace flagprep
