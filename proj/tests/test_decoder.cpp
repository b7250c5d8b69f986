#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>

#include "flagprep/assembly.hpp"
#include "flagprep/decoder.hpp"
#include "test_util.hpp"

using namespace flagprep;
using namespace flagprep::testing;

namespace {

uint64_t key_of(uint64_t s, uint64_t c, std::size_t sb) { return s | (c << sb); }

// Calls fn(mask) for every subset of n qubits of weight 1..w.
template <class F>
void for_each_error(std::size_t n, std::size_t w, F fn) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 1; k <= w; ++k) {
        idx.resize(k);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            uint64_t m = 0;
            for (auto q : idx) m |= 1ULL << q;
            fn(m);
            std::size_t i = k;
            while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
}

}  // namespace

TEST(MLTable, TrivialAndMajority) {
    std::vector<SampleOutcome> v(5);
    auto t = build_ml_lut(v, 3, 1);
    EXPECT_EQ(t.most_likely(0), std::optional<uint64_t>(0));
    EXPECT_FALSE(t.most_likely(5).has_value());

    std::vector<SampleOutcome> w = {{key_of(5, 1, 3)}, {key_of(5, 1, 3)}, {key_of(5, 0, 3)}};
    auto u = build_ml_lut(w, 3, 1);
    EXPECT_EQ(u.most_likely(5), std::optional<uint64_t>(1));
    EXPECT_DOUBLE_EQ(u.runner_up_ratio(5), 0.5);
}

TEST(MLTable, TieBreakLexicographic) {
    // Two logical bits: class 0b01 reads [1,0] and class 0b10 reads [0,1], so 0b10 is smaller.
    EXPECT_TRUE(class_lex_less(0b10, 0b01, 2));
    EXPECT_FALSE(class_lex_less(0b01, 0b10, 2));
    MLTable t(4, 2);
    t.add(3, 0b01);
    t.add(3, 0b10);
    EXPECT_EQ(t.most_likely(3), std::optional<uint64_t>(0b10));
    MLTable a(4, 2), b(4, 2);
    a.add(1, 0, 2);
    b.add(1, 1, 3);
    a.merge(b);
    EXPECT_EQ(a.most_likely(1), std::optional<uint64_t>(1));
    EXPECT_EQ(a.total(), 5u);
}

TEST(MWTable, SteaneHasOneEntryPerQubit) {
    auto s = load_code("steane", "0");
    auto t = build_mw_lut(s, PauliType::X, 1);
    EXPECT_EQ(t.entries.size(), 7u);
    EXPECT_EQ(t.conflicts, 0u);
    EXPECT_TRUE(build_mw_lut(s, PauliType::X, 0).entries.empty());
}

TEST(MWTable, GolayIsPerfect) {
    auto s = load_code("golay", "0");
    auto t = build_mw_lut(s, PauliType::X, 3);
    EXPECT_EQ(t.syndrome_bits, 11u);
    EXPECT_EQ(t.entries.size(), 2047u);
    for (uint64_t syn = 1; syn < 2048; ++syn) ASSERT_NE(t.find(syn), nullptr) << syn;
    // Code-capacity exactness for every correctable error.
    auto spec = ObservationSpec::for_state(s, PauliType::X);
    DecodePolicy mw_only;
    mw_only.use_ml = false;
    std::size_t checked = 0;
    for_each_error(23, 3, [&](uint64_t m) {
        uint64_t k = spec.key(m);
        auto d = decode(spec.syndrome(k), nullptr, &t, mw_only);
        ASSERT_EQ(d.source, DecodeSource::MW);
        ASSERT_EQ(d.cls, spec.cls(k));
        ++checked;
    });
    EXPECT_EQ(checked, 23u + 253u + 1771u);
}

TEST(MWTable, SteaneExactnessBothTypes) {
    for (const char* label : {"0", "+"}) {
        auto s = load_code("steane", label);
        for (auto type : {PauliType::X, PauliType::Z}) {
            auto t = build_mw_lut(s, type, 1);
            auto spec = ObservationSpec::for_state(s, type);
            for_each_error(7, 1, [&](uint64_t m) {
                uint64_t k = spec.key(m);
                auto d = decode(spec.syndrome(k), nullptr, &t, DecodePolicy{});
                ASSERT_EQ(d.cls, spec.cls(k));
            });
        }
    }
}

TEST(MWTable, ConflictInsideRadiusThrows) {
    // Asking a distance-3 code for weight-2 entries is beyond its radius: no throw, conflicts counted.
    auto s = load_code("steane", "0");
    auto t = build_mw_lut(s, PauliType::X, 2);
    EXPECT_GT(t.conflicts, 0u);
    // Claiming a larger distance puts the same collisions inside the radius.
    s.d = 5;
    EXPECT_THROW(build_mw_lut(s, PauliType::X, 2), ClassConflict);
}

TEST(Decode, EvenDistanceDiscard) {
    auto s = load_code("selfdual20");
    ASSERT_EQ(s.d, 6u);
    auto t = build_mw_lut(s, PauliType::X, 3);
    EXPECT_GT(t.conflicts, 0u);
    DecodePolicy pol;
    pol.even_distance_discard = true;
    pol.t = 3;
    auto spec = ObservationSpec::for_state(s, PauliType::X);
    std::size_t discards = 0;
    for_each_error(20, 3, [&](uint64_t m) {
        uint64_t k = spec.key(m);
        auto d = decode(spec.syndrome(k), nullptr, &t, pol);
        if (t.find(spec.syndrome(k))->weight <= 2) {
            ASSERT_EQ(d.source, DecodeSource::MW);
            ASSERT_EQ(d.cls, spec.cls(k));
        } else {
            ASSERT_EQ(d.source, DecodeSource::Discard);
            ++discards;
        }
    });
    EXPECT_GT(discards, 0u);
}

TEST(Evaluate, TrivialAndFallback) {
    std::vector<SampleOutcome> trivial(10);
    auto r = evaluate_test_set(trivial, 100.0, 3, nullptr, nullptr, DecodePolicy{});
    EXPECT_EQ(r.logical_errors, 0.0);
    EXPECT_DOUBLE_EQ(r.kept, 110.0);
    EXPECT_DOUBLE_EQ(r.post_discard_rate(), 1.0);

    // Unknown syndrome with nontrivial class falls back to trivial and counts as a logical error.
    std::vector<SampleOutcome> one = {{key_of(6, 1, 3)}};
    auto e = evaluate_test_set(one, 0.0, 3, nullptr, nullptr, DecodePolicy{});
    EXPECT_EQ(e.fallback.hits, 1u);
    EXPECT_EQ(e.fallback.errors, 1u);
    EXPECT_DOUBLE_EQ(e.logical_error_rate(), 1.0);
}

TEST(Evaluate, RatioDiscardOptional) {
    MLTable t(3, 1);
    t.add(2, 0, 10);
    t.add(2, 1, 9);
    DecodePolicy pol;
    EXPECT_EQ(decode(2, &t, nullptr, pol).source, DecodeSource::ML);
    pol.ml_ratio_discard = 0.8;
    EXPECT_EQ(decode(2, &t, nullptr, pol).source, DecodeSource::Discard);
}

class SteanePipeline : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        state_ = new CssState(load_code("steane", "0"));
        GadgetLibrary lib;
        AssemblyOptions o;
        o.z_gadget_t_override = 0;
        auto c = assemble_and_schedule(synthesize_bipartite(*state_, 1), *state_, lib, o,
                                       ScheduleObjective::MinMaxQubits, 100);
        auto lc = count_fault_locations(c);
        auto plan = build_subset_plan(lc.L_p, lc.L_q, NoiseModel{5e-3}, 400000);
        mc_ = new MonteCarloResult(run_monte_carlo(c, *state_, plan, 11));
    }
    static void TearDownTestSuite() {
        delete state_;
        delete mc_;
    }
    static CssState* state_;
    static MonteCarloResult* mc_;
};
CssState* SteanePipeline::state_ = nullptr;
MonteCarloResult* SteanePipeline::mc_ = nullptr;

TEST_F(SteanePipeline, SplitIsDeterministicAndEqual) {
    auto a = split_train_test(*mc_, 3), b = split_train_test(*mc_, 3);
    ASSERT_EQ(a.train.size(), b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) ASSERT_EQ(a.train[i].key, b.train[i].key);
    EXPECT_LE(a.test.size() - a.train.size(), 1u);
    EXPECT_DOUBLE_EQ(a.train_addback + a.test_addback, mc_->trivial_addback);
}

TEST_F(SteanePipeline, MLDominatesMWAlone) {
    auto sp = split_train_test(*mc_, 5);
    auto ml = build_ml_lut(sp.train, mc_->syndrome_bits, mc_->class_bits);
    EXPECT_EQ(ml.most_likely(0), std::optional<uint64_t>(0));
    auto mw = build_mw_lut(*state_, PauliType::X, 1);
    DecodePolicy both, mw_only;
    mw_only.use_ml = false;
    auto r1 = evaluate_test_set(sp.test, sp.test_addback, mc_->syndrome_bits, &ml, &mw, both);
    auto r2 = evaluate_test_set(sp.test, sp.test_addback, mc_->syndrome_bits, &ml, &mw, mw_only);
    EXPECT_LE(r1.logical_errors, r2.logical_errors);
    EXPECT_GT(r1.ml.hits, 0u);
    EXPECT_EQ(r1.ml.hits + r1.mw.hits + r1.fallback.hits + r1.discarded, sp.test.size());
    EXPECT_GT(r1.logical_error_rate(), 0.0);
    EXPECT_LT(r1.logical_error_rate(), 5e-3);
}

TEST_F(SteanePipeline, MLTableFileRoundTrip) {
    auto ml = build_ml_lut(mc_->outcomes, mc_->syndrome_bits, mc_->class_bits);
    auto path = std::filesystem::temp_directory_path() / "flagprep_ml_test.json";
    write_ml_table(path, ml);
    auto back = read_ml_table(path);
    EXPECT_EQ(back.total(), ml.total());
    for (uint64_t s : ml.syndromes()) {
        EXPECT_EQ(back.most_likely(s), ml.most_likely(s));
        EXPECT_EQ(*back.counts(s), *ml.counts(s));
    }
    std::filesystem::remove(path);
}
