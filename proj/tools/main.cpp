// terrace-lab: command-line front end of the invasion-terrace laboratory.
//
// Subcommands:
//   predict          closed-form trichotomy prediction (exit 2 on a boundary)
//   simulate         run a scenario config; writes summary.json, fronts.csv,
//                    field_t*.csv into --out-dir
//   wave             solve a traveling-wave profile; writes wave.csv
//   verify-barriers  assemble and certify a barrier; writes certificate.json,
//                    exit 0 iff certified
//   sweep            admissibility map over a (c1, c2) grid; writes region.csv
//
// TERRACE_LAB_THREADS overrides --threads everywhere.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "harness.hpp"
#include "terrace/barriers.hpp"
#include "terrace/errors.hpp"
#include "terrace/waves.hpp"

namespace {

using namespace terrace;
using harness::json;

struct ParamFlags {
    double d = 1.0, r = 1.0, a = 0.5, b = 2.0;

    void attach(CLI::App* app) {
        app->add_option("-d", d, "diffusivity of v");
        app->add_option("-r", r, "growth rate of v");
        app->add_option("-a", a, "competition felt by u, in (0,1)");
        app->add_option("-b", b, "competition felt by v, > 1");
    }
    ModelParams params() const { return validate_params({d, r, a, b}); }
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
    return j;
}

int cmd_predict(const ParamFlags& pf, double c_llw) {
    const ModelParams p = pf.params();
    if (c_llw <= 0.0) c_llw = 2.0 * std::sqrt(1.0 - p.a);
    const speeds::SpeedPrediction pr = speeds::predict_trichotomy(p, c_llw);
    std::cout << harness::prediction_to_json(pr).dump(2) << "\n";
    return 0;
}

int cmd_simulate(const std::string& config, const std::string& out_dir) {
    const harness::Scenario s = harness::parse_scenario(load_json(config));
    const harness::RunSummary rs = harness::run_scenario(s, out_dir);
    std::cout << rs.to_json().dump(2) << "\n";
    return rs.pass ? 0 : 1;
}

int cmd_wave(const ParamFlags& pf, double c, double delta, double truncation,
             int mesh, const std::string& out_dir) {
    const ModelParams p = pf.params();
    const waves::WaveProfile w =
        waves::solve_profile(c, p, delta, truncation, mesh);
    json j;
    j["c"] = w.c;
    j["delta"] = w.delta;
    j["residual"] = w.residual;
    j["truncation_error"] = w.truncation_error;
    j["phi_decreasing"] = w.phi_decreasing;
    j["psi_increasing"] = w.psi_increasing;
    j["measured_decay_plus"] = w.measured_decay_plus;
    j["measured_decay_minus"] = w.measured_decay_minus;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ostringstream csv;
        csv << "xi,phi,psi\n";
        for (std::size_t i = 0; i < w.xi.size(); ++i)
            csv << harness::fmt(w.xi[i]) << "," << harness::fmt(w.phi[i]) << ","
                << harness::fmt(w.psi[i]) << "\n";
        harness::write_file(out_dir + "/wave.csv", csv.str());
        j["artifacts"] = {"wave.csv"};
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_verify(const ParamFlags& pf, const std::string& which, double c1,
               double c2, double delta, const std::string& out_dir) {
    const ModelParams p = pf.params();
    barriers::AssemblyKind kind;
    if (which == "terrace_super")
        kind = barriers::AssemblyKind::terrace_super;
    else if (which == "terrace_sub")
        kind = barriers::AssemblyKind::terrace_sub;
    else if (which == "compact_super")
        kind = barriers::AssemblyKind::compact_super;
    else if (which == "nonexistence_sub")
        kind = barriers::AssemblyKind::nonexistence_sub;
    else
        throw ConfigError("unknown assembly '" + which + "'");
    const barriers::BarrierAssembly asmb =
        barriers::assemble(kind, p, c1, c2, delta);
    barriers::Lattice lat;
    lat.t0 = 0.0;
    lat.t1 = 40.0;
    lat.nt = 200;
    lat.nx = 400;
    // Sample where the construction actually varies: around the interfaces at
    // both ends of the certification window.
    double lo = 0.0, hi = 1.0;
    for (double t : {lat.t0, lat.t1})
        for (double x : asmb.kink_positions(t)) {
            lo = std::min(lo, x - 20.0);
            hi = std::max(hi, x + 20.0);
        }
    lat.x0 = lo;
    lat.x1 = hi;
    const barriers::ResidualReport rep = barriers::try_certify(asmb, lat);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        harness::write_file(out_dir + "/certificate.json", rep.to_json() + "\n");
    }
    std::cout << rep.to_json() << "\n";
    return rep.certified ? 0 : 1;
}

int cmd_sweep(const std::string& config, const std::string& out_dir,
              int threads) {
    const harness::SweepSpec s = harness::parse_sweep(load_json(config));
    const std::string csv =
        harness::run_sweep(s, harness::resolve_threads(threads));
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        harness::write_file(out_dir + "/region.csv", csv);
    } else {
        std::cout << csv;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"terrace-lab: invasion-terrace numerical laboratory"};
    app.require_subcommand(1);

    ParamFlags pf;
    double delta = 0.0, c_llw = -1.0, c = 2.0, c1 = 3.0, c2 = 1.8;
    double truncation = 120.0;
    int mesh = 4800, threads = 0;
    std::string config, out_dir, which = "terrace_super";

    CLI::App* predict = app.add_subcommand("predict", "trichotomy prediction");
    pf.attach(predict);
    predict->add_option("--c-llw", c_llw, "measured c_LLW (default 2 sqrt(1-a))");

    CLI::App* simulate = app.add_subcommand("simulate", "run a scenario config");
    simulate->add_option("--config", config, "scenario JSON file")->required();
    simulate->add_option("--out-dir", out_dir, "artifact directory");

    CLI::App* wave = app.add_subcommand("wave", "solve a traveling wave");
    pf.attach(wave);
    wave->add_option("-c,--speed", c, "wave speed");
    wave->add_option("--delta", delta, "kinetics perturbation");
    wave->add_option("--truncation", truncation, "half-length of the xi window");
    wave->add_option("--mesh", mesh, "collocation nodes");
    wave->add_option("--out-dir", out_dir, "artifact directory");

    CLI::App* verify =
        app.add_subcommand("verify-barriers", "assemble and certify a barrier");
    pf.attach(verify);
    verify->add_option("--which", which,
                       "terrace_super | terrace_sub | compact_super | "
                       "nonexistence_sub");
    verify->add_option("--c1", c1, "first-front speed");
    verify->add_option("--c2", c2, "second-front speed");
    verify->add_option("--delta", delta, "kinetics perturbation");
    verify->add_option("--out-dir", out_dir, "artifact directory");

    CLI::App* sweep = app.add_subcommand("sweep", "(c1,c2) admissibility map");
    sweep->add_option("--config", config, "sweep JSON file")->required();
    sweep->add_option("--out-dir", out_dir, "artifact directory");
    sweep->add_option("--threads", threads,
                      "worker count (TERRACE_LAB_THREADS overrides)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (predict->parsed()) return cmd_predict(pf, c_llw);
        if (simulate->parsed()) return cmd_simulate(config, out_dir);
        if (wave->parsed())
            return cmd_wave(pf, c, delta, truncation, mesh, out_dir);
        if (verify->parsed())
            return cmd_verify(pf, which, c1, c2, delta, out_dir);
        if (sweep->parsed()) return cmd_sweep(config, out_dir, threads);
    } catch (const terrace::BoundaryCase& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const terrace::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 1;
}
