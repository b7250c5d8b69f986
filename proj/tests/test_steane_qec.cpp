#include <gtest/gtest.h>

#include <cmath>

#include "flagprep/assembly.hpp"
#include "flagprep/ft_verify.hpp"
#include "flagprep/steane_qec.hpp"
#include "test_util.hpp"

using namespace flagprep;
using namespace flagprep::testing;

namespace {

GadgetLibrary& lib() {
    static GadgetLibrary l;
    return l;
}

SteaneExperimentConfig config(const std::string& code, QecMode mode, double p, std::size_t samples) {
    SteaneExperimentConfig cfg;
    cfg.code = load_code(code);
    if (mode != QecMode::NoQec) cfg.resource = steane_resource_circuit(cfg.code, mode, lib(), 50);
    cfg.mode = mode;
    cfg.p = p;
    cfg.samples = samples;
    cfg.seed = 17;
    return cfg;
}

}  // namespace

TEST(TransversalCx, SingleZInsertions) {
    for (unsigned j = 0; j < 7; ++j) {
        uint64_t z = 1ULL << j;
        // Data Z before the gate shows up on the paired resource qubit and stays on the data.
        auto [m1, d1] = transversal_cx_z(0, z, {});
        EXPECT_EQ(m1, z);
        EXPECT_EQ(d1, z);
        // Resource Z is read out but does not reach the data.
        auto [m2, d2] = transversal_cx_z(z, 0, {});
        EXPECT_EQ(m2, z);
        EXPECT_EQ(d2, 0u);
        // Faults after the gate stay on their own block.
        auto [m3, d3] = transversal_cx_z(0, 0, {0, z, 0});
        EXPECT_EQ(m3, 0u);
        EXPECT_EQ(d3, z);
        auto [m4, d4] = transversal_cx_z(0, 0, {z, 0, 0});
        EXPECT_EQ(m4, z);
        EXPECT_EQ(d4, 0u);
    }
}

TEST(SteaneQec, NoiselessHasNoErrors) {
    for (auto mode : {QecMode::FullFT, QecMode::FtXOnly, QecMode::NoQec}) {
        auto r = run_steane_qec_experiment(config("steane", mode, 0.0, 2000));
        EXPECT_EQ(r.samples, 2000u);
        EXPECT_EQ(r.logical_errors, 0u) << to_string(mode);
        EXPECT_DOUBLE_EQ(r.acceptance(), 1.0);
    }
}

TEST(SteaneQec, NoQecMatchesClosedForm) {
    const double p = 5e-3;
    auto r = run_steane_qec_experiment(config("steane", QecMode::NoQec, p, 200000));
    double expect = no_qec_closed_form(load_code("steane"), p);
    double sigma = std::sqrt(expect * (1 - expect) / r.samples);
    EXPECT_NEAR(r.logical_error_rate(), expect, 4 * sigma);
}

TEST(SteaneQec, CorrectionHelpsAndIsReproducible) {
    const double p = 5e-3;
    auto a = run_steane_qec_experiment(config("steane", QecMode::FullFT, p, 100000));
    auto b = run_steane_qec_experiment(config("steane", QecMode::FullFT, p, 100000));
    EXPECT_EQ(a.logical_errors, b.logical_errors);
    auto none = run_steane_qec_experiment(config("steane", QecMode::NoQec, p, 100000));
    EXPECT_LT(a.logical_error_rate(), none.logical_error_rate());
    EXPECT_GT(a.acceptance(), 0.9);
    EXPECT_LT(a.acceptance(), 1.0);
}

TEST(SteaneQec, ThreadCountDoesNotChangeResult) {
    auto cfg = config("steane", QecMode::FullFT, 1e-2, 20000);
    cfg.threads = 1;
    auto a = run_steane_qec_experiment(cfg);
    cfg.threads = 3;
    auto b = run_steane_qec_experiment(cfg);
    EXPECT_EQ(a.logical_errors, b.logical_errors);
    EXPECT_EQ(a.prep_attempts, b.prep_attempts);
}

TEST(SteaneQec, XOnlyResourceIsNotZTolerant) {
    auto code = load_code("color17", "0");
    auto c = steane_resource_circuit(code, QecMode::FtXOnly, lib(), 50);
    EXPECT_TRUE(verify_fault_tolerance(c, code, 2, PauliType::X).pass);
    auto z = verify_fault_tolerance(c, code, 2, PauliType::Z);
    ASSERT_FALSE(z.pass);
    ASSERT_TRUE(z.counterexample.has_value());
    EXPECT_LE(z.counterexample->faults.size(), 2u);
    auto full = steane_resource_circuit(code, QecMode::FullFT, lib(), 50);
    EXPECT_TRUE(verify_fault_tolerance(full, code, 2, PauliType::Z).pass);
}

TEST(SteaneQec, ModeNames) {
    for (auto m : {QecMode::FullFT, QecMode::FtXOnly, QecMode::NoQec}) EXPECT_EQ(parse_qec_mode(to_string(m)), m);
    EXPECT_THROW(parse_qec_mode("bogus"), std::invalid_argument);
}
