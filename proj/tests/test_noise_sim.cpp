#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "flagprep/assembly.hpp"
#include "flagprep/noise_sim.hpp"
#include "flagprep/tableau.hpp"
#include "test_util.hpp"

using namespace flagprep;
using namespace flagprep::testing;

namespace {

GadgetLibrary& lib() {
    static GadgetLibrary l;
    return l;
}

Circuit steane_circuit() {
    auto s = load_code("steane", "0");
    AssemblyOptions o;
    o.z_gadget_t_override = 0;
    return assemble_and_schedule(synthesize_bipartite(s, 1), s, lib(), o, ScheduleObjective::MinMaxQubits, 200);
}

Circuit tiny() {
    Circuit c;
    c.num_code = 2;
    c.roles = {QubitRole::Control, QubitRole::Target};
    c.ops = {Operation::init_plus(0), Operation::init_zero(1), Operation::cx(0, 1)};
    uint32_t f = c.add_flag(QubitRole::FlagX);
    c.ops.push_back(Operation::meas_z(f, 0));
    return c;
}

}  // namespace

TEST(Locations, Counts) {
    auto lc = count_fault_locations(tiny());
    EXPECT_EQ(lc.L_p, 4u);
    EXPECT_EQ(lc.L_q, 2u);
    auto e = count_fault_locations(Circuit{});
    EXPECT_EQ(e.L_p, 0u);
    EXPECT_EQ(e.L_q, 0u);

    auto c = steane_circuit();
    auto base = count_fault_locations(c);
    auto nl = enumerate_noise_locations(c);
    EXPECT_EQ(nl.p_locations.size(), base.L_p);
    EXPECT_EQ(nl.q_locations.size(), base.L_q);
    // Running the CX list twice keeps every qubit alive across both passes.
    Circuit d = c;
    std::vector<Operation> cx;
    for (const auto& op : c.ops)
        if (op.kind == OpKind::CX) cx.push_back(op);
    d.ops.clear();
    for (const auto& op : c.ops)
        if (op.kind != OpKind::CX) d.ops.push_back(op);
    auto fin = d.ops.back();
    d.ops.pop_back();
    d.ops.insert(d.ops.end(), cx.begin(), cx.end());
    d.ops.insert(d.ops.end(), cx.begin(), cx.end());
    d.ops.push_back(fin);
    std::vector<std::size_t> ident(2 * cx.size());
    for (std::size_t i = 0; i < ident.size(); ++i) ident[i] = i;
    d = rebuild_with_order(d, ident);
    EXPECT_EQ(d.cx_count(), 2 * c.cx_count());
    EXPECT_GT(count_fault_locations(d).L_q, 2 * base.L_q);
}

TEST(SubsetPlan, LowRateLimit) {
    NoiseModel m{1e-6};
    auto plan = build_subset_plan(28, 120, m, 1000);
    double first_order = 1000.0 / (28 * 1e-6 + 120 * 1e-8);
    EXPECT_NEAR(plan.effective_count() / first_order, 1.0, 0.01);
}

TEST(SubsetPlan, SteaneAtOnePercent) {
    auto c = steane_circuit();
    auto lc = count_fault_locations(c);
    auto plan = build_subset_plan(lc.L_p, lc.L_q, NoiseModel{1e-2}, 10'000'000);
    EXPECT_GT(plan.effective_count(), 3.4 * 1e7);
    double oracle = std::exp(lc.L_p * std::log(1 - 1e-2) + lc.L_q * std::log(1 - 1e-4));
    EXPECT_NEAR(plan.p00 / oracle, 1.0, 1e-12);
    double sum = 0;
    for (const auto& pr : plan.pairs) {
        EXPECT_GT(pr.prob, 1e-14);
        EXPECT_FALSE(pr.f_p == 0 && pr.f_q == 0);
        sum += pr.sampling;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(plan.trivial_addback, 1e7 * plan.p00 / (1 - plan.p00), 1e-6);
}

TEST(SubsetPlan, Degenerate) {
    EXPECT_THROW(build_subset_plan(5, 5, NoiseModel{1e-9}, 10), DegeneratePlan);
    EXPECT_THROW(build_subset_plan(5, 5, NoiseModel{0.0}, 10), DegeneratePlan);
    EXPECT_THROW(build_subset_plan(0, 0, NoiseModel{0.1}, 10), DegeneratePlan);
}

TEST(Wilson, Examples) {
    EXPECT_EQ(wilson_interval(0, 100).first, 0.0);
    EXPECT_EQ(wilson_interval(100, 100).second, 1.0);
    auto [lo, hi] = wilson_interval(2, 6140);
    EXPECT_NEAR(lo * 1e4, 0.9, 0.05);
    EXPECT_NEAR(hi * 1e4, 11.9, 0.05);
    EXPECT_THROW(wilson_interval(1, 0), std::invalid_argument);
}

TEST(MonteCarlo, ForcedSingleFaultBucket) {
    auto s = load_code("steane", "0");
    auto c = steane_circuit();
    auto lc = count_fault_locations(c);
    auto plan = build_subset_plan(lc.L_p, lc.L_q, NoiseModel{1e-3}, 10);
    ASSERT_EQ(plan.pairs.size(), 1u);
    ASSERT_EQ(plan.pairs[0].f_p, 1u);
    ASSERT_EQ(plan.pairs[0].f_q, 0u);
    plan.S = 2000;
    auto r = run_monte_carlo(c, s, plan, 3);
    CosetTable ct(s, PauliType::X);
    for (const auto& o : r.outcomes) {
        EXPECT_EQ(o.f_p, 1u);
        EXPECT_EQ(o.f_q, 0u);
        // Accepted single faults leave correctable residuals.
        EXPECT_LE(ct.weight_of_key(o.key), 1u);
    }
}

TEST(MonteCarlo, NoiselessRun) {
    auto s = load_code("steane", "0");
    auto c = steane_circuit();
    auto lc = count_fault_locations(c);
    SubsetPlan plan;
    plan.L_p = lc.L_p;
    plan.L_q = lc.L_q;
    plan.S = 500;
    plan.pairs = {{0, 0, 1.0, 1.0}};
    auto r = run_monte_carlo(c, s, plan, 1);
    EXPECT_EQ(r.accepted, 500u);
    for (const auto& o : r.outcomes) EXPECT_EQ(o.key, 0u);
}

TEST(MonteCarlo, DeterministicAcrossThreads) {
    auto s = load_code("steane", "0");
    auto c = steane_circuit();
    auto lc = count_fault_locations(c);
    auto plan = build_subset_plan(lc.L_p, lc.L_q, NoiseModel{5e-3}, 20000);
    auto a = run_monte_carlo(c, s, plan, 42, {16, 1});
    auto b = run_monte_carlo(c, s, plan, 42, {16, 4});
    auto d = run_monte_carlo(c, s, plan, 43, {16, 1});
    ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) EXPECT_EQ(a.outcomes[i].key, b.outcomes[i].key);
    EXPECT_EQ(a.accepted, b.accepted);
    EXPECT_NE(a.accepted == d.accepted && a.outcomes.size() == d.outcomes.size() &&
                  std::equal(a.outcomes.begin(), a.outcomes.end(), d.outcomes.begin(),
                             [](auto& x, auto& y) { return x.key == y.key; }),
              true);
}

// Rejection at low p is dominated by single faults, so the sampled acceptance
// must match 1 - p * (sum over p-locations of the fraction of Paulis that flip a flag).
TEST(MonteCarlo, SteaneAcceptanceMatchesFirstOrderEstimate) {
    auto s = load_code("steane", "0");
    auto c = steane_circuit();
    FaultEffectTable table(c);
    const auto& locs = table.locations().p_locations;
    double flagging = 0;
    for (std::size_t l = 0; l < locs.size(); ++l) {
        const auto& loc = locs[l];
        int total = 0, hits = 0;
        int patterns = loc.kind == NoiseKind::Depol2 ? 16 : 4;
        for (int pat = 1; pat < patterns; ++pat) {
            if (loc.kind == NoiseKind::MeasFlip && pat != (loc.meas_basis == PauliType::Z ? 1 : 2)) continue;
            std::vector<uint64_t> f(table.flag_words(), 0);
            uint64_t x = 0, z = 0;
            table.apply(false, l, static_cast<uint8_t>(pat), f.data(), x, z);
            ++total;
            hits += f[0] != 0;
        }
        flagging += static_cast<double>(hits) / total;
    }
    const double p = 1e-3;
    const double expected = 1.0 - p * flagging;
    auto lc = count_fault_locations(c);
    auto plan = build_subset_plan(lc.L_p, lc.L_q, NoiseModel{p}, 200000);
    auto r = run_monte_carlo(c, s, plan, 7);
    EXPECT_NEAR(r.acceptance(), expected, 1e-3);
    EXPECT_GT(r.acceptance(), 0.98);
}

TEST(FrameOracle, TableauAgreementOnRandomFaultSets) {
    std::mt19937_64 rng(2024);
    std::size_t tested = 0;
    for (const auto& [name, state] : std::vector<std::pair<std::string, std::string>>{
             {"steane", "0"}, {"steane", "+"}, {"surface3", "0"}, {"surface3", "+"}}) {
        auto s = load_code(name, state);
        AssemblyOptions o;
        o.z_gadget_t_override = 0;
        auto c = assemble_and_schedule(synthesize_bipartite(s, 1), s, lib(), o, ScheduleObjective::MinMaxQubits, 100);
        if (c.num_qubits() > 12) continue;
        ++tested;
        auto probes = s.stabilizers_of_type(PauliType::X);
        for (const auto& p : s.stabilizers_of_type(PauliType::Z)) probes.push_back(p);
        auto nl = enumerate_noise_locations(c);
        PauliFrameSimulator sim(c);
        FaultEffectTable table(c);
        for (int trial = 0; trial < 2000; ++trial) {
            std::vector<InjectedPauli> inj;
            std::vector<InjectedFault> tab;
            std::vector<uint64_t> flags(table.flag_words(), 0);
            uint64_t x = 0, z = 0;
            int nf = 1 + static_cast<int>(rng() % 4);
            for (int k = 0; k < nf; ++k) {
                bool idle = rng() % 3 == 0 && !nl.q_locations.empty();
                const auto& locs = idle ? nl.q_locations : nl.p_locations;
                std::size_t li = rng() % locs.size();
                const auto& loc = locs[li];
                uint8_t pat = random_fault_pattern(loc, rng);
                PauliOperator p(c.num_qubits());
                if (pat & 1) p.x.set(loc.q0);
                if (pat & 2) p.z.set(loc.q0);
                if (pat & 4) p.x.set(loc.q1);
                if (pat & 8) p.z.set(loc.q1);
                inj.push_back({loc.position, p});
                tab.push_back({loc.position, true, p});
                table.apply(idle, li, pat, flags.data(), x, z);
            }
            auto fr = sim.run(inj);
            auto tr = run_tableau_with_faults(c, tab, probes, trial);
            for (std::size_t f = 0; f < c.num_flags(); ++f) {
                ASSERT_EQ(fr.flags.get(f), tr.flag_outcomes[f]) << name << state << " trial " << trial;
                ASSERT_EQ(fr.flags.get(f), ((flags[f / 64] >> (f % 64)) & 1) != 0);
            }
            PauliOperator err(s.n);
            err.x = fr.x;
            err.z = fr.z;
            for (std::size_t k = 0; k < probes.size(); ++k)
                ASSERT_EQ(tr.stabilizer_flips[k], !commutes(err, probes[k])) << name << state << " trial " << trial;
            ASSERT_EQ(fr.x.words()[0], x);
            ASSERT_EQ(fr.z.words()[0], z);
        }
    }
    EXPECT_GE(tested, 2u);
}

TEST(OutcomeFiles, BinaryRoundTripAndCsv) {
    auto s = load_code("steane", "0");
    auto c = steane_circuit();
    auto lc = count_fault_locations(c);
    auto r = run_monte_carlo(c, s, build_subset_plan(lc.L_p, lc.L_q, NoiseModel{1e-2}, 3000), 5);
    auto dir = std::filesystem::temp_directory_path() / "flagprep_outcomes_test";
    std::filesystem::create_directories(dir);
    write_outcomes((dir / "o.bin").string(), r);
    auto back = read_outcomes((dir / "o.bin").string());
    EXPECT_EQ(back.drawn, r.drawn);
    EXPECT_EQ(back.accepted, r.accepted);
    EXPECT_EQ(back.trivial_addback, r.trivial_addback);
    ASSERT_EQ(back.outcomes.size(), r.outcomes.size());
    for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
        EXPECT_EQ(back.outcomes[i].key, r.outcomes[i].key);
        EXPECT_EQ(back.outcomes[i].f_p, r.outcomes[i].f_p);
    }
    write_outcomes_csv((dir / "o.csv").string(), r);
    std::ifstream is(dir / "o.csv");
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "syndrome,class,f_p,f_q");
    std::ofstream((dir / "bad.bin").string()) << "garbage";
    EXPECT_THROW(read_outcomes((dir / "bad.bin").string()), std::runtime_error);
    std::filesystem::remove_all(dir);
}
