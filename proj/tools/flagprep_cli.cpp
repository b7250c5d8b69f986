#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "flagprep/assembly.hpp"
#include "flagprep/bipartite.hpp"
#include "flagprep/decoder.hpp"
#include "flagprep/ft_verify.hpp"
#include "flagprep/gadget.hpp"
#include "flagprep/io.hpp"
#include "flagprep/noise_sim.hpp"
#include "flagprep/steane_qec.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace flagprep;
using nlohmann::json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitVerifyFailed = 2;

struct Globals {
    std::string data_dir;
    unsigned threads = 0;
};

std::string default_data_dir() {
    if (const char* d = std::getenv("FLAGPREP_DATA")) return d;
    return FLAGPREP_DEFAULT_DATA_DIR;
}

unsigned default_threads() {
    if (const char* t = std::getenv("FLAGPREP_THREADS")) return static_cast<unsigned>(std::strtoul(t, nullptr, 10));
    return 0;
}

CssState load_state(const Globals& g, const std::string& code, const std::string& state) {
    return parse_code_file(resolve_code_path(code, fs::path(g.data_dir) / "codes"), state);
}

void write_json(const std::string& path, const json& j) {
    if (!path.empty()) write_text_file(path, j.dump(2) + "\n");
}

PauliType parse_type(const std::string& s) {
    if (s == "X" || s == "x") return PauliType::X;
    if (s == "Z" || s == "z") return PauliType::Z;
    throw std::invalid_argument("type must be X or Z");
}

// Residual type read by the final transversal measurement of a prepared state.
PauliType observed_error_type(const CssState& s) {
    bool all_x = !s.stabilizing_type.empty();
    for (auto t : s.stabilizing_type) all_x = all_x && t == PauliType::X;
    return all_x ? PauliType::Z : PauliType::X;
}

std::unique_ptr<GadgetLibrary> make_library(const Globals& g, const std::string& cache) {
    if (!cache.empty()) return std::make_unique<GadgetLibrary>(cache);
    auto lib = std::make_unique<GadgetLibrary>(fs::path(g.data_dir) / "gadgets");
    lib->set_persist(false);
    return lib;
}

json metrics_json(const CircuitMetrics& m) {
    return {{"cx", m.cx_count}, {"flags", m.flag_count}, {"depth", m.depth}, {"max_qubits", m.max_simultaneous_qubits}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flag-qubit fault-tolerant state preparation toolkit"};
    app.require_subcommand(1);
    Globals g;
    g.data_dir = default_data_dir();
    g.threads = default_threads();
    app.add_option("--data", g.data_dir, "Data directory holding codes/ and gadgets/");
    app.add_option("--threads", g.threads, "Worker threads (0: all cores; env FLAGPREP_THREADS)");

    // synth
    auto* synth = app.add_subcommand("synth", "Synthesize a bipartite (non-FT) preparation circuit");
    std::string code, state, out, json_out;
    std::size_t trials = 32;
    uint64_t seed = 0;
    synth->add_option("--code", code, "Catalog name or code file")->required();
    synth->add_option("--state", state, "Logical state label (default: the code's)");
    synth->add_option("--trials", trials, "Randomized reduction trials");
    synth->add_option("--seed", seed, "RNG seed")->required();
    synth->add_option("--out", out, "Circuit file to write");
    synth->add_option("--json", json_out, "Summary JSON");

    // gadget
    auto* gadget = app.add_subcommand("gadget", "Search for a flag gadget");
    std::size_t gt = 1, gr = 1, gm = 0;
    uint64_t budget = 0;
    bool no_teleport = false;
    gadget->add_option("--t", gt, "Faults tolerated")->required();
    gadget->add_option("--r", gr, "Number of targets")->required();
    gadget->add_option("--m", gm, "Number of flags")->required();
    gadget->add_option("--budget", budget, "Node budget (0: unlimited)");
    gadget->add_flag("--no-teleport", no_teleport, "Disable the teleporting disentangle move");
    gadget->add_option("--out", out, "Gadget file to write");
    gadget->add_option("--json", json_out, "Summary JSON");

    // assemble
    auto* assemble = app.add_subcommand("assemble", "Assemble and schedule a flag-at-origin FT circuit");
    std::optional<std::size_t> z_override;
    std::size_t retries = 16, shuffles = 1000, asm_t = 0;
    std::string objective = "qubits", gadget_dir;
    bool strip_x = false, strip_z = false;
    assemble->add_option("--code", code, "Catalog name or code file")->required();
    assemble->add_option("--state", state, "Logical state label");
    assemble->add_option("--t", asm_t, "Faults tolerated (default: floor(d/2))");
    assemble->add_option("--z-override", z_override, "Lower t for Z-detecting gadgets if certified");
    assemble->add_option("--retries", retries, "Assembly retries per schedule");
    assemble->add_option("--trials", trials, "Bipartite synthesis trials")->default_val(1);
    assemble->add_option("--shuffles", shuffles, "Scheduling shuffles");
    assemble->add_option("--objective", objective, "qubits or depth")->check(CLI::IsMember({"qubits", "depth"}));
    assemble->add_option("--gadget-dir", gadget_dir, "Writable gadget cache (default: read-only shipped library)");
    assemble->add_flag("--strip-x", strip_x, "Omit X-detecting gadgets");
    assemble->add_flag("--strip-z", strip_z, "Omit Z-detecting gadgets");
    assemble->add_option("--seed", seed, "RNG seed")->required();
    assemble->add_option("--out", out, "Circuit file to write");
    assemble->add_option("--json", json_out, "Summary JSON");

    // verify
    auto* verify = app.add_subcommand("verify", "Exhaustively verify fault tolerance");
    std::string circuit_path, type_str = "both";
    std::size_t vt = 0;
    verify->add_option("--circuit", circuit_path, "Circuit file")->required();
    verify->add_option("--code", code, "Code (default: the circuit's code attribute)");
    verify->add_option("--state", state, "State (default: the circuit's state attribute)");
    verify->add_option("--t", vt, "Faults tolerated (default: floor(d/2))");
    verify->add_option("--type", type_str, "X, Z or both")->check(CLI::IsMember({"X", "Z", "both"}));
    verify->add_option("--budget", budget, "Combination budget (0: unlimited)");
    verify->add_option("--json", json_out, "Summary JSON");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Circuit-level Monte Carlo with subset sampling");
    double p = 1e-3;
    std::size_t samples = 100000;
    std::string csv_out;
    simulate->add_option("--circuit", circuit_path, "Circuit file")->required();
    simulate->add_option("--code", code, "Code (default: the circuit's code attribute)");
    simulate->add_option("--state", state, "State (default: the circuit's state attribute)");
    simulate->add_option("--p", p, "Physical error rate");
    simulate->add_option("--samples", samples, "Drawn samples S");
    simulate->add_option("--seed", seed, "RNG seed")->required();
    simulate->add_option("--out", out, "Binary outcome file");
    simulate->add_option("--csv", csv_out, "Outcome CSV export");
    simulate->add_option("--json", json_out, "Summary JSON");

    // decode
    auto* decode_cmd = app.add_subcommand("decode", "Build lookup tables and evaluate the logical error rate");
    std::string outcomes_path, train_path, test_path, ml_out;
    std::optional<std::size_t> wmax, discard_t;
    std::optional<double> ratio_discard;
    bool even_discard = false, no_ml = false;
    std::string dtype;
    decode_cmd->add_option("--code", code, "Catalog name or code file")->required();
    decode_cmd->add_option("--state", state, "Logical state label");
    decode_cmd->add_option("--outcomes", outcomes_path, "Outcome file to split into train and test halves");
    decode_cmd->add_option("--train", train_path, "Training outcome file");
    decode_cmd->add_option("--test", test_path, "Test outcome file");
    decode_cmd->add_option("--seed", seed, "Split seed (required with --outcomes)");
    decode_cmd->add_option("--type", dtype, "Error type (default: the one the final measurement reads)");
    decode_cmd->add_option("--wmax", wmax, "MW table weight (default: floor((d-1)/2), or d/2 with discard)");
    decode_cmd->add_flag("--even-discard", even_discard, "Discard syndromes whose MW weight equals t");
    decode_cmd->add_option("--discard-t", discard_t, "Weight that triggers a discard (default: d/2)");
    decode_cmd->add_option("--ratio-discard", ratio_discard, "Discard when runner-up/winner count ratio >= this");
    decode_cmd->add_flag("--no-ml", no_ml, "Skip the sampled lookup table");
    decode_cmd->add_option("--ml-out", ml_out, "Write the sampled lookup table (JSON)");
    decode_cmd->add_option("--out", out, "Report JSON");

    // lut-mw
    auto* lut = app.add_subcommand("lut-mw", "Build the code-capacity minimum-weight lookup table");
    lut->add_option("--code", code, "Catalog name or code file")->required();
    lut->add_option("--state", state, "Logical state label");
    lut->add_option("--type", dtype, "Error type (default: the one the final measurement reads)");
    lut->add_option("--wmax", wmax, "Maximum error weight (default: floor((d-1)/2))");
    lut->add_option("--out", out, "Table JSON");

    // steane
    auto* steane = app.add_subcommand("steane", "Steane-type error correction with flag-prepared resource states");
    std::vector<double> ps{1e-3};
    std::string mode = "full_ft";
    steane->add_option("--code", code, "Catalog name or code file")->required();
    steane->add_option("--p", ps, "Physical error rates")->expected(1, -1);
    steane->add_option("--mode", mode, "full_ft, ft_x_only or no_qec")
        ->check(CLI::IsMember({"full_ft", "ft_x_only", "no_qec"}));
    steane->add_option("--samples", samples, "Samples per rate");
    steane->add_option("--shuffles", shuffles, "Scheduling shuffles for the resource circuit")->default_val(200);
    steane->add_option("--seed", seed, "RNG seed")->required();
    steane->add_option("--out", out, "CSV series");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*synth) {
            auto s = load_state(g, code, state);
            auto bip = best_of_trials(s, trials, seed);
            auto c = bip.to_circuit(s);
            c.set_attribute("code", s.name);
            c.set_attribute("state", s.state_label);
            if (!out.empty()) write_text_file(out, serialize_circuit(c));
            std::cout << s.name << " |" << s.state_label << ">: " << bip.edges.size() << " CX, max degree "
                      << bip.max_degree() << "\n";
            write_json(json_out, {{"code", s.name}, {"state", s.state_label}, {"cx", bip.edges.size()},
                                  {"max_degree", bip.max_degree()}, {"controls", bip.controls.size()}});
            return 0;
        }

        if (*gadget) {
            SearchOptions so;
            so.node_budget = budget;
            so.allow_teleport = !no_teleport;
            auto t0 = std::chrono::steady_clock::now();
            auto r = discover_gadget(gt, gr, gm, so);
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            json j = {{"t", gt}, {"r", gr}, {"m", gm}, {"nodes", r.nodes}, {"seconds", secs}};
            if (r.status == SearchStatus::Found) {
                const auto& fg = *r.gadget;
                if (!out.empty()) write_text_file(out, serialize_gadget(fg, false));
                std::cout << fg.m << (fg.m == 1 ? " flag, " : " flags, ") << fg.cx_count() << " CX\n";
                j["status"] = "found";
                j["flags"] = fg.m;
                j["cx"] = fg.cx_count();
                write_json(json_out, j);
                return 0;
            }
            bool exhausted = r.status == SearchStatus::SearchExhausted;
            std::cout << "no gadget with " << gm << " flags: "
                      << (exhausted ? "search exhausted" : "node budget exhausted") << " after " << r.nodes
                      << " nodes\n";
            j["status"] = exhausted ? "search_exhausted" : "budget_exhausted";
            write_json(json_out, j);
            return kExitVerifyFailed;
        }

        if (*assemble) {
            auto s = load_state(g, code, state);
            auto lib_ptr = make_library(g, gadget_dir);
            auto& lib = *lib_ptr;
            AssemblyOptions o;
            o.t = asm_t;
            o.z_gadget_t_override = z_override;
            o.retries = retries;
            o.seed = seed;
            o.x_gadgets = !strip_x;
            o.z_gadgets = !strip_z;
            auto bip = trials > 1 ? best_bipartite_for_assembly(s, lib, trials, seed, o) : synthesize_bipartite(s, seed);
            AssemblyInfo info;
            auto obj = objective == "depth" ? ScheduleObjective::MinDepth : ScheduleObjective::MinMaxQubits;
            auto c = assemble_and_schedule(bip, s, lib, o, obj, shuffles, &info);
            auto m = circuit_metrics(c);
            if (!out.empty()) write_text_file(out, serialize_circuit(c));
            std::cout << s.name << " |" << s.state_label << ">: " << m.cx_count << " CX, " << m.flag_count
                      << " flags, " << m.max_simultaneous_qubits << " qubits, depth " << m.depth << " (t_x="
                      << info.t_x << ", t_z=" << info.t_z << (info.override_applied ? ", override applied" : "")
                      << ")\n";
            json j = metrics_json(m);
            j["code"] = s.name;
            j["state"] = s.state_label;
            j["t_x"] = info.t_x;
            j["t_z"] = info.t_z;
            j["override_applied"] = info.override_applied;
            write_json(json_out, j);
            return 0;
        }

        if (*verify) {
            auto c = read_circuit_file(circuit_path);
            auto s = load_state(g, code.empty() ? c.attribute("code") : code,
                                state.empty() ? c.attribute("state") : state);
            std::size_t t = vt ? vt : s.t();
            VerifyOptions vo;
            vo.budget = budget;
            vo.threads = g.threads;
            bool ok = true;
            json j = {{"t", t}};
            std::vector<PauliType> types;
            if (type_str != "Z") types.push_back(PauliType::X);
            if (type_str != "X") types.push_back(PauliType::Z);
            for (auto type : types) {
                auto r = verify_fault_tolerance(c, s, t, type, vo);
                std::string name = type == PauliType::X ? "X" : "Z";
                j[name] = {{"pass", r.pass}, {"combinations", r.combinations}};
                std::cout << name << " errors, t=" << t << ": " << (r.pass ? "PASS" : "FAIL") << " ("
                          << r.combinations << " fault combinations)\n";
                if (!r.pass) {
                    ok = false;
                    std::string dump = describe_counterexample(c, type, *r.counterexample);
                    std::cout << dump << (dump.empty() || dump.back() != '\n' ? "\n" : "");
                    j[name]["counterexample"] = dump;
                }
            }
            write_json(json_out, j);
            return ok ? 0 : kExitVerifyFailed;
        }

        if (*simulate) {
            auto c = read_circuit_file(circuit_path);
            auto s = load_state(g, code.empty() ? c.attribute("code") : code,
                                state.empty() ? c.attribute("state") : state);
            auto lc = count_fault_locations(c);
            auto plan = build_subset_plan(lc.L_p, lc.L_q, NoiseModel{p}, samples);
            MonteCarloOptions mo;
            mo.threads = g.threads;
            auto r = run_monte_carlo(c, s, plan, seed, mo);
            if (!out.empty()) write_outcomes(out, r);
            if (!csv_out.empty()) write_outcomes_csv(csv_out, r);
            auto [lo, hi] = wilson_interval(static_cast<double>(r.accepted) + r.trivial_addback, r.effective_count());
            std::cout << "L_p=" << lc.L_p << " L_q=" << lc.L_q << " effective samples " << r.effective_count()
                      << ", acceptance " << r.acceptance() << " [" << lo << ", " << hi << "]\n";
            write_json(json_out, {{"p", p},
                                  {"L_p", lc.L_p},
                                  {"L_q", lc.L_q},
                                  {"drawn", r.drawn},
                                  {"accepted", r.accepted},
                                  {"trivial_addback", r.trivial_addback},
                                  {"effective", r.effective_count()},
                                  {"acceptance", r.acceptance()},
                                  {"acceptance_ci", {lo, hi}}});
            return 0;
        }

        if (*decode_cmd) {
            auto s = load_state(g, code, state);
            PauliType type = dtype.empty() ? observed_error_type(s) : parse_type(dtype);
            Split sp;
            std::size_t sb = 0, cb = 0;
            if (!outcomes_path.empty()) {
                if (decode_cmd->count("--seed") == 0) throw std::invalid_argument("--seed is required with --outcomes");
                auto r = read_outcomes(outcomes_path);
                sb = r.syndrome_bits;
                cb = r.class_bits;
                sp = split_train_test(r, seed);
            } else {
                if (train_path.empty() || test_path.empty())
                    throw std::invalid_argument("give --outcomes, or both --train and --test");
                auto tr = read_outcomes(train_path), te = read_outcomes(test_path);
                sb = tr.syndrome_bits;
                cb = tr.class_bits;
                sp.train = std::move(tr.outcomes);
                sp.test = std::move(te.outcomes);
                sp.train_addback = tr.trivial_addback;
                sp.test_addback = te.trivial_addback;
            }
            DecodePolicy pol;
            pol.use_ml = !no_ml;
            pol.even_distance_discard = even_discard;
            pol.t = discard_t.value_or(s.d / 2);
            pol.ml_ratio_discard = ratio_discard;
            std::size_t w = wmax.value_or(even_discard ? pol.t : (s.d - 1) / 2);
            auto mw = build_mw_lut(s, type, w);
            if (mw.syndrome_bits != sb || mw.class_bits != cb)
                throw std::invalid_argument("outcome file does not match the code's check layout");
            auto ml = build_ml_lut(sp.train, sb, cb);
            if (!ml_out.empty()) write_ml_table(ml_out, ml);
            auto rep = evaluate_test_set(sp.test, sp.test_addback, sb, &ml, &mw, pol);
            auto [lo, hi] = rep.interval();
            std::cout << "logical error rate " << rep.logical_error_rate() << " [" << lo << ", " << hi << "] over "
                      << rep.kept << " kept samples; ML " << rep.ml.hits << "/" << rep.ml.errors << " MW "
                      << rep.mw.hits << "/" << rep.mw.errors << " fallback " << rep.fallback.hits << "/"
                      << rep.fallback.errors << " (hits/errors), discarded " << rep.discarded << "\n";
            auto layer = [](const LayerStats& l) { return json{{"hits", l.hits}, {"errors", l.errors}}; };
            write_json(out, {{"logical_error_rate", rep.logical_error_rate()},
                             {"ci", {lo, hi}},
                             {"kept", rep.kept},
                             {"test_samples", rep.samples},
                             {"test_addback", rep.trivial_addback},
                             {"discarded", rep.discarded},
                             {"post_discard_rate", rep.post_discard_rate()},
                             {"ml", layer(rep.ml)},
                             {"mw", layer(rep.mw)},
                             {"fallback", layer(rep.fallback)},
                             {"ml_entries", ml.size()},
                             {"mw_entries", mw.entries.size()}});
            return 0;
        }

        if (*lut) {
            auto s = load_state(g, code, state);
            PauliType type = dtype.empty() ? observed_error_type(s) : parse_type(dtype);
            std::size_t w = wmax.value_or((s.d - 1) / 2);
            auto mw = build_mw_lut(s, type, w);
            if (mw.conflicts)
                std::cerr << "warning: " << mw.conflicts
                          << " syndromes are reached by errors of different classes; lower weight kept\n";
            if (!out.empty()) write_mw_table(out, mw);
            std::cout << mw.entries.size() << " syndromes of " << (1ULL << mw.syndrome_bits) - 1
                      << " nonzero, w_max " << w << "\n";
            return 0;
        }

        if (*steane) {
            auto s = load_state(g, code, "");
            auto qm = parse_qec_mode(mode);
            auto lib_ptr = make_library(g, "");
            auto& lib = *lib_ptr;
            SteaneExperimentConfig cfg;
            cfg.code = s;
            cfg.mode = qm;
            if (qm != QecMode::NoQec) cfg.resource = steane_resource_circuit(s, qm, lib, shuffles);
            cfg.samples = samples;
            cfg.seed = seed;
            cfg.threads = g.threads;
            std::ostringstream csv;
            csv << "p,mode,logical_error_rate,ci_lo,ci_hi,acceptance,samples,errors\n";
            for (double pv : ps) {
                cfg.p = pv;
                auto r = run_steane_qec_experiment(cfg);
                auto [lo, hi] = r.interval();
                csv << pv << "," << mode << "," << r.logical_error_rate() << "," << lo << "," << hi << ","
                    << r.acceptance() << "," << r.samples << "," << r.logical_errors << "\n";
                std::cout << "p=" << pv << " " << mode << ": logical error rate " << r.logical_error_rate() << " ["
                          << lo << ", " << hi << "], resource acceptance " << r.acceptance() << "\n";
            }
            if (!out.empty()) write_text_file(out, csv.str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return 0;
}
