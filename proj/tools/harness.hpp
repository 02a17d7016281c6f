#pragma once

// Scenario configs, experiment orchestration and artifact emission for the
// terrace-lab CLI. JSON schema is versioned; all floating-point output uses
// 17 significant digits, '.' decimal separator and LF line endings so that
// reruns are byte-identical and diff-able.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "terrace/barriers.hpp"
#include "terrace/fronts.hpp"
#include "terrace/model.hpp"
#include "terrace/solver.hpp"
#include "terrace/speeds.hpp"

namespace terrace {
namespace harness {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

// One initial-data field. Pair kinds (terrace_pair, llw_background) set both
// components at once and appear under "pair" in the scenario.
struct SeedSpec {
    std::string kind;  // bump | heaviside_like | exp_tail | terrace_pair |
                       // llw_background
    double center = 0.0, halfwidth = 10.0, amplitude = 1.0;  // bump
    double edge = 0.0;                                       // heaviside_like
    double rate = 1.0, anchor = 0.0;                         // exp_tail
    double c1 = 0.0, c2 = 0.0, x_v = 20.0, c_llw = -1.0;     // terrace_pair
};

// One requested analysis over the finished trajectory.
struct AnalysisSpec {
    std::string type;  // fit_speed | wedge_check | plateau_extent | final_sup
    // fit_speed
    std::string field = "u";  // also used by final_sup
    double level = 0.5;
    double window_fraction = 0.5;
    std::optional<double> predicted;
    double rel_tol = 0.03;
    std::optional<double> min_speed, max_speed;
    // wedge_check
    double c_lo = 0.0, c_hi = 0.0, eps_geom = 0.5, eps_val = 0.05;
    // plateau_extent
    double u_star = 1.0, v_star = 0.0, eps = 0.05;
    std::optional<double> min_extent_speed;
    // final_sup
    double max_value = 0.01;
};

struct ScenarioSolver {
    std::optional<double> x_min, x_max, dx, dt;
    std::optional<int> n;
    double t_end = 150.0;
    std::optional<double> snapshot_every;
    double delta = 0.0;
    bool dump_fields = false;  // true: every snapshot; false: first and last
};

struct Scenario {
    std::string name;
    ModelParams params;
    std::optional<SeedSpec> seed_u, seed_v;  // either both ...
    std::optional<SeedSpec> seed_pair;       // ... or one pair kind
    ScenarioSolver solver;
    std::vector<AnalysisSpec> analyses;
    std::optional<double> expected_c_llw;  // feeds predict_trichotomy
};

// Parse/serialize; parsing rejects unknown keys and wrong types with a
// ConfigError naming the offending field. Round-trips exactly.
Scenario parse_scenario(const json& j);
json scenario_to_json(const Scenario& s);

struct AnalysisResult {
    AnalysisSpec spec;
    bool pass = false;
    json details;  // measured numbers per type
};

struct RunSummary {
    Scenario scenario;
    Grid grid;
    SolverConfig config;
    std::vector<AnalysisResult> analyses;
    double invariant_violation = 0.0;  // max excursion outside [0,1]
    bool pass = false;
    std::vector<std::string> artifacts;  // file names inside out_dir

    json to_json() const;
};

// Materializes the grid/solver defaults, builds the seeds, integrates, runs
// the analyses and (when out_dir is nonempty) writes summary.json, fronts.csv
// and field_t*.csv into out_dir. Deterministic: no timestamps in artifacts.
RunSummary run_scenario(const Scenario& s, const std::string& out_dir);

// Speed-pair admissibility sweep. Cells are evaluated (optionally in
// `threads` parallel workers) and emitted in row-major (c1 outer) order as
// CSV "c1,c2,class,measured_c1,measured_c2"; the measured columns are filled
// only when `simulate` is set (short run from the terrace_pair seed).
struct SweepSpec {
    ModelParams params;
    double c1_min = 2.3, c1_max = 4.0;
    int c1_count = 10;
    double c2_min = 1.2, c2_max = 2.2;
    int c2_count = 10;
    double c_llw = -1.0;  // negative: 2 sqrt(1-a)
    bool simulate = false;
    double t_end = 40.0;
};

SweepSpec parse_sweep(const json& j);
std::string run_sweep(const SweepSpec& s, int threads);

// Formatting helpers shared by the CLI (17 significant digits, C locale).
std::string fmt(double x);
json prediction_to_json(const speeds::SpeedPrediction& p);
void write_file(const std::string& path, const std::string& contents);

// Resolves the worker count: TERRACE_LAB_THREADS overrides the flag; zero or
// negative falls back to the hardware concurrency.
int resolve_threads(int flag_value);

}  // namespace harness
}  // namespace terrace
