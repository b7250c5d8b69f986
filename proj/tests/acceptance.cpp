// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
// Criteria listed with --expect-fail are known to miss their reference band; they still print
// FAIL, but only an unexpected result changes the exit status.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flagprep/assembly.hpp"
#include "flagprep/bipartite.hpp"
#include "flagprep/decoder.hpp"
#include "flagprep/ft_verify.hpp"
#include "flagprep/gadget.hpp"
#include "flagprep/io.hpp"
#include "flagprep/noise_sim.hpp"
#include "flagprep/steane_qec.hpp"
#include "flagprep/tableau.hpp"

using namespace flagprep;

namespace {

std::string data_dir = FLAGPREP_DATA_DIR;
unsigned threads = 0;
double scale = 1.0;  // sample-count multiplier

CssState load(const std::string& name, const std::string& state = "") {
    return parse_code_file(data_dir + "/codes/" + name + ".json", state);
}

GadgetLibrary& shipped_library() {
    static GadgetLibrary lib(data_dir + "/gadgets");
    static bool init = [] {
        lib.set_persist(false);
        return true;
    }();
    (void)init;
    return lib;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Circuit steane_zero_circuit() {
    auto s = load("steane", "0");
    AssemblyOptions o;
    o.z_gadget_t_override = 0;
    return assemble_and_schedule(synthesize_bipartite(s, 1), s, shipped_library(), o,
                                 ScheduleObjective::MinMaxQubits, 1000);
}

Circuit color17_zero_circuit() {
    auto s = load("color17", "0");
    return assemble_and_schedule(synthesize_bipartite(s, 1), s, shipped_library(), {},
                                 ScheduleObjective::MinMaxQubits, 1000);
}

struct PipelinePoint {
    double p = 0;
    double acceptance = 0;
    double effective = 0;
    double rate = 0, lo = 0, hi = 0;
    double errors = 0;
};

// Simulate, split into halves, train the sampled table, evaluate ML then MW on the test half.
PipelinePoint run_pipeline(const Circuit& c, const CssState& s, double p, std::size_t drawn, uint64_t seed) {
    auto lc = count_fault_locations(c);
    auto plan = build_subset_plan(lc.L_p, lc.L_q, NoiseModel{p}, drawn);
    MonteCarloOptions mo;
    mo.threads = threads;
    auto mc = run_monte_carlo(c, s, plan, seed, mo);
    auto sp = split_train_test(mc, seed + 1);
    auto ml = build_ml_lut(sp.train, mc.syndrome_bits, mc.class_bits);
    auto mw = build_mw_lut(s, PauliType::X, (s.d - 1) / 2);
    auto rep = evaluate_test_set(sp.test, sp.test_addback, mc.syndrome_bits, &ml, &mw, DecodePolicy{});
    PipelinePoint pt;
    pt.p = p;
    pt.acceptance = mc.acceptance();
    pt.effective = mc.effective_count();
    pt.rate = rep.logical_error_rate();
    std::tie(pt.lo, pt.hi) = rep.interval();
    pt.errors = rep.logical_errors;
    return pt;
}

std::size_t scaled(double n) { return static_cast<std::size_t>(std::max(1.0, n * scale)); }

// 1 and 2: gadget flag counts with exhaustion certificates one flag below.
Outcome gadget_row(std::size_t t, const std::vector<std::size_t>& expected, double limit_s) {
    Timer timer;
    std::ostringstream d;
    bool ok = true;
    for (std::size_t r = 1; r <= expected.size(); ++r) {
        std::size_t want = expected[r - 1];
        // The reference table groups 1-4 targets under one flag; one or two targets need none.
        std::size_t found_m = 0;
        bool found = false;
        for (std::size_t m = 0; m <= want && !found; ++m) {
            auto res = discover_gadget(t, r, m);
            if (res.status == SearchStatus::Found) {
                found = true;
                found_m = res.gadget->m;
                if (!gadget_ft_test(*res.gadget, t)) ok = false;
            } else if (res.status != SearchStatus::SearchExhausted) {
                ok = false;
            }
        }
        bool match = found && (r <= 2 ? found_m <= want : found_m == want);
        ok = ok && match;
        d << " r" << r << "=" << (found ? std::to_string(found_m) : "none");
    }
    double secs = timer.seconds();
    ok = ok && secs <= limit_s;
    d << " (" << fmt("%.1f", secs) << " s, limit " << limit_s << " s)";
    return {ok, "flags per target count:" + d.str()};
}

Outcome criterion1() { return gadget_row(2, {1, 1, 1, 1, 2, 3, 3, 3, 3, 3, 3, 4, 4}, 600); }
Outcome criterion2() { return gadget_row(3, {1, 1, 1, 1, 2, 3, 4, 4}, 7200); }

Outcome criterion3() {
    std::ostringstream d;
    bool ok = true;
    VerifyOptions vo;
    vo.threads = threads;
    auto check = [&](const std::string& name, const Circuit& c, const CssState& s, std::size_t t, double limit) {
        Timer timer;
        bool x = verify_fault_tolerance(c, s, t, PauliType::X, vo).pass;
        bool z = verify_fault_tolerance(c, s, t, PauliType::Z, vo).pass;
        double secs = timer.seconds();
        ok = ok && x && z && secs <= limit;
        d << name << " t=" << t << " X " << (x ? "pass" : "FAIL") << ", Z " << (z ? "pass" : "FAIL") << " in "
          << fmt("%.1f", secs) << " s; ";
    };
    auto stripped = [&](const std::string& name, const CssState& s, bool strip_x) {
        AssemblyOptions o;
        o.x_gadgets = !strip_x;
        o.z_gadgets = strip_x;
        auto c = assemble_and_schedule(synthesize_bipartite(s, 1), s, shipped_library(), o,
                                       ScheduleObjective::MinMaxQubits, 50);
        auto type = strip_x ? PauliType::X : PauliType::Z;
        auto r = verify_fault_tolerance(c, s, 1, type, vo);
        bool caught = !r.pass && r.counterexample && r.counterexample->faults.size() == 1;
        ok = ok && caught;
        d << name << (strip_x ? " without X gadgets" : " without Z gadgets") << ": "
          << (caught ? "1-fault counterexample" : "NO counterexample") << "; ";
    };
    auto steane = load("steane", "0");
    check("steane", steane_zero_circuit(), steane, 1, 60);
    auto color = load("color17", "0");
    check("color17", color17_zero_circuit(), color, 2, 4 * 3600);
    stripped("steane", steane, true);
    stripped("color17", color, true);
    stripped("color17", color, false);
    return {ok, d.str()};
}

Outcome criterion4() {
    Timer timer;
    auto s = load("steane", "0");
    auto c = steane_zero_circuit();
    auto pt = run_pipeline(c, s, 1e-3, scaled(3.5e6), 2024);
    bool acc_ok = pt.acceptance >= 0.975 && pt.acceptance <= 0.981;
    bool rate_ok = pt.rate >= 1.8e-5 && pt.rate <= 4.4e-5;
    bool size_ok = pt.effective >= 1e8 * scale;
    std::ostringstream d;
    d << "effective samples " << fmt("%.3g", pt.effective) << "; acceptance " << fmt("%.5f", pt.acceptance)
      << (acc_ok ? " in" : " OUTSIDE") << " [0.975, 0.981]; logical error rate " << fmt("%.3g", pt.rate) << " ["
      << fmt("%.3g", pt.lo) << ", " << fmt("%.3g", pt.hi) << "]" << (rate_ok ? " in" : " OUTSIDE")
      << " [1.8e-5, 4.4e-5]; " << fmt("%.0f", timer.seconds()) << " s";
    return {acc_ok && rate_ok && size_ok, d.str()};
}

Outcome criterion5() {
    std::ostringstream d;
    auto fit = [&](const std::string& name, const Circuit& c, const CssState& s, const std::vector<double>& ps,
                   double drawn, double want, double tol) {
        std::vector<double> xs, ys;
        d << name << ":";
        for (double p : ps) {
            auto pt = run_pipeline(c, s, p, scaled(drawn), 77 + xs.size());
            xs.push_back(p);
            ys.push_back(pt.rate);
            d << " p=" << fmt("%.2g", p) << " rate " << fmt("%.3g", pt.rate) << " (" << fmt("%.0f", pt.errors)
              << " errors)";
        }
        double slope = loglog_slope(xs, ys);
        bool ok = std::isfinite(slope) && std::abs(slope - want) <= tol;
        d << ", slope " << fmt("%.2f", slope) << " vs " << want << " +/- " << tol << "; ";
        return ok;
    };
    bool a = fit("steane", steane_zero_circuit(), load("steane", "0"), {2.5e-3, 5e-3, 1e-2}, 2e6, 2.0, 0.3);
    bool b = fit("color17", color17_zero_circuit(), load("color17", "0"), {5e-3, 7.0711e-3, 1e-2}, 4e6, 3.0, 0.5);
    return {a && b, d.str()};
}

Outcome criterion6() {
    auto s = load("golay", "0");
    auto mw = build_mw_lut(s, PauliType::X, 3);
    bool covers = mw.entries.size() == 2047;
    for (uint64_t syn = 1; syn < 2048; ++syn) covers = covers && mw.find(syn) != nullptr;
    auto spec = ObservationSpec::for_state(s, PauliType::X);
    DecodePolicy pol;
    pol.use_ml = false;
    std::size_t checked = 0, wrong = 0;
    auto test = [&](uint64_t m) {
        uint64_t k = spec.key(m);
        ++checked;
        if (decode(spec.syndrome(k), nullptr, &mw, pol).cls != spec.cls(k)) ++wrong;
    };
    for (int a = 0; a < 23; ++a) {
        test(1ULL << a);
        for (int b = a + 1; b < 23; ++b) {
            test((1ULL << a) | (1ULL << b));
            for (int c = b + 1; c < 23; ++c) test((1ULL << a) | (1ULL << b) | (1ULL << c));
        }
    }
    bool ok = covers && wrong == 0;
    return {ok, std::to_string(mw.entries.size()) + " syndromes" + (covers ? ", all 2047 nonzero covered" : ", INCOMPLETE") +
                    "; " + std::to_string(wrong) + " wrong classes over " + std::to_string(checked) +
                    " error patterns of weight <= 3"};
}

Outcome criterion7() {
    auto steane = max_coset_weight(load("steane", "0"), PauliType::Z);
    auto golay = max_coset_weight(load("golay", "0"), PauliType::Z);
    return {steane == 1 && golay == 3,
            "steane Z " + std::to_string(steane) + " (want 1), golay Z " + std::to_string(golay) + " (want 3)"};
}

Outcome criterion8() {
    Timer timer;
    auto s = load("golay", "0");
    AssemblyOptions o;
    o.z_gadget_t_override = 2;
    AssemblyInfo info;
    auto c = assemble_and_schedule(synthesize_bipartite(s, 1), s, shipped_library(), o,
                                   ScheduleObjective::MinMaxQubits, 10000, &info);
    auto m = circuit_metrics(c);
    bool ok = info.override_applied && m.cx_count <= 260 && m.max_simultaneous_qubits <= 56;
    return {ok, std::to_string(m.cx_count) + " CX (<= 260), " + std::to_string(m.max_simultaneous_qubits) +
                    " qubits (<= 56), " + std::to_string(m.flag_count) + " flags, Z gadgets at t=" +
                    std::to_string(info.t_z) + ", " + fmt("%.0f", timer.seconds()) + " s"};
}

Outcome criterion9() {
    auto code = load("color17");
    std::ostringstream d;
    auto series = [&](QecMode mode, const std::vector<double>& ps, double samples) {
        SteaneExperimentConfig cfg;
        cfg.code = code;
        cfg.mode = mode;
        if (mode != QecMode::NoQec) cfg.resource = steane_resource_circuit(code, mode, shipped_library(), 1000);
        cfg.samples = scaled(samples);
        cfg.threads = threads;
        std::vector<double> rates;
        for (double p : ps) {
            cfg.p = p;
            cfg.seed = 900 + rates.size() + 10 * static_cast<int>(mode);
            rates.push_back(run_steane_qec_experiment(cfg).logical_error_rate());
        }
        return rates;
    };
    const std::vector<double> fit_ps = {2.5e-3, 5e-3, 1e-2};
    auto x_only = series(QecMode::FtXOnly, fit_ps, 4e6);
    auto full = series(QecMode::FullFT, fit_ps, 4e6);
    double sx = loglog_slope(fit_ps, x_only), sf = loglog_slope(fit_ps, full);
    bool slopes = std::abs(sx - 2.0) <= 0.3 && std::abs(sf - 3.0) <= 0.5;
    auto full_low = series(QecMode::FullFT, {1e-3, 2.5e-3}, 8e6);
    auto none_low = series(QecMode::NoQec, {1e-3, 2.5e-3}, 8e6);
    bool better = full_low[0] <= none_low[0] && full_low[1] <= none_low[1];
    d << "ft_x_only slope " << fmt("%.2f", sx) << " (2 +/- 0.3), full_ft slope " << fmt("%.2f", sf)
      << " (3 +/- 0.5); full_ft vs no_qec at p=1e-3: " << fmt("%.3g", full_low[0]) << " vs "
      << fmt("%.3g", none_low[0]) << ", at 2.5e-3: " << fmt("%.3g", full_low[1]) << " vs "
      << fmt("%.3g", none_low[1]);
    return {slopes && better, d.str()};
}

Outcome criterion10() {
    std::mt19937_64 rng(10);
    std::size_t circuits = 0, injections = 0, mismatches = 0;
    std::ostringstream names;
    for (const char* code : {"steane", "surface3", "color17", "surface5", "golay", "selfdual20", "qr47"}) {
        for (const char* label : {"0", "+"}) {
            auto s = load(code, label);
            if (s.n > 12) continue;
            std::vector<std::pair<std::string, Circuit>> cs;
            cs.emplace_back("bipartite", synthesize_bipartite(s, 1).to_circuit(s));
            AssemblyOptions o;
            o.z_gadget_t_override = 0;
            cs.emplace_back("ft", assemble_and_schedule(synthesize_bipartite(s, 1), s, shipped_library(), o,
                                                        ScheduleObjective::MinMaxQubits, 200));
            auto probes = s.stabilizers_of_type(PauliType::X);
            for (const auto& p : s.stabilizers_of_type(PauliType::Z)) probes.push_back(p);
            for (const auto& [kind, c] : cs) {
                if (c.num_qubits() > 12) continue;
                ++circuits;
                names << code << "|" << label << "> " << kind << " (" << c.num_qubits() << "q); ";
                auto nl = enumerate_noise_locations(c);
                PauliFrameSimulator sim(c);
                for (int trial = 0; trial < 10000; ++trial) {
                    std::vector<InjectedPauli> inj;
                    std::vector<InjectedFault> tab;
                    int nf = 1 + static_cast<int>(rng() % 4);
                    for (int k = 0; k < nf; ++k) {
                        bool idle = rng() % 3 == 0 && !nl.q_locations.empty();
                        const auto& locs = idle ? nl.q_locations : nl.p_locations;
                        const auto& loc = locs[rng() % locs.size()];
                        uint8_t pat = random_fault_pattern(loc, rng);
                        PauliOperator pauli(c.num_qubits());
                        if (pat & 1) pauli.x.set(loc.q0);
                        if (pat & 2) pauli.z.set(loc.q0);
                        if (pat & 4) pauli.x.set(loc.q1);
                        if (pat & 8) pauli.z.set(loc.q1);
                        inj.push_back({loc.position, pauli});
                        tab.push_back({loc.position, true, pauli});
                    }
                    auto fr = sim.run(inj);
                    auto tr = run_tableau_with_faults(c, tab, probes, static_cast<uint64_t>(trial));
                    bool same = true;
                    for (std::size_t f = 0; f < c.num_flags(); ++f) same = same && fr.flags.get(f) == tr.flag_outcomes[f];
                    PauliOperator err(s.n);
                    err.x = fr.x;
                    err.z = fr.z;
                    for (std::size_t k = 0; k < probes.size(); ++k)
                        same = same && tr.stabilizer_flips[k] == !commutes(err, probes[k]);
                    ++injections;
                    if (!same) ++mismatches;
                }
            }
        }
    }
    bool ok = circuits > 0 && mismatches == 0;
    return {ok, std::to_string(mismatches) + " mismatches in " + std::to_string(injections) + " injections over " +
                    std::to_string(circuits) + " circuits: " + names.str()};
}

Outcome golay_smoke() {
    Timer timer;
    auto s = load("golay", "0");
    AssemblyOptions o;
    o.z_gadget_t_override = 2;
    auto c = assemble_and_schedule(synthesize_bipartite(s, 1), s, shipped_library(), o,
                                   ScheduleObjective::MinMaxQubits, 100);
    VerifyOptions vo;
    vo.threads = threads;
    bool x = verify_fault_tolerance(c, s, 3, PauliType::X, vo).pass;
    bool z = verify_fault_tolerance(c, s, 3, PauliType::Z, vo).pass;
    return {x && z, std::string("golay |0> assembled and verified at t=3: X ") + (x ? "pass" : "FAIL") + ", Z " +
                        (z ? "pass" : "FAIL") + ", " + fmt("%.0f", timer.seconds()) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only, expect_fail;
    app.add_option("--only", only, "Run only these criteria (0 is the Golay smoke test)");
    app.add_option("--expect-fail", expect_fail, "Criteria known to miss their reference band");
    app.add_option("--scale", scale, "Sample-count multiplier");
    app.add_option("--threads", threads, "Worker threads (0: all cores)");
    app.add_option("--data", data_dir, "Data directory");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<int, std::function<Outcome()>>> all = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5}, {6, criterion6},
        {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {0, golay_smoke}};
    std::set<int> selected(only.begin(), only.end()), known(expect_fail.begin(), expect_fail.end());
    int unexpected = 0;
    for (const auto& [id, fn] : all) {
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::string label = id == 0 ? "smoke" : "criterion " + std::to_string(id);
        std::string note;
        if (!o.pass && known.count(id)) note = " (known deviation)";
        if (o.pass && known.count(id)) note = " (listed as known deviation but passed)";
        std::cout << label << ": " << (o.pass ? "PASS" : "FAIL") << note << ": " << o.detail << std::endl;
        if (o.pass == static_cast<bool>(known.count(id))) ++unexpected;
    }
    return unexpected ? 1 : 0;
}
