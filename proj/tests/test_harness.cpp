#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "harness.hpp"
#include "terrace/errors.hpp"

using namespace terrace;
using harness::json;

namespace {

json minimal_scenario() {
    return json::parse(R"({
        "schema_version": 1,
        "name": "mini",
        "params": {"d": 1.0, "r": 1.21, "a": 0.5, "b": 1.1},
        "seeds": {
            "u": {"kind": "heaviside_like", "edge": 0.0},
            "v": {"kind": "bump", "center": 5.0, "halfwidth": 3.0,
                  "amplitude": 0.8}
        },
        "solver": {"x_min": -20.0, "x_max": 40.0, "t_end": 5.0,
                   "snapshot_every": 0.25},
        "analyses": [
            {"type": "fit_speed", "field": "v", "predicted": 2.2,
             "rel_tol": 0.5}
        ]
    })");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("scenario parse/serialize/parse is the identity") {
    const harness::Scenario s1 = harness::parse_scenario(minimal_scenario());
    const json j1 = harness::scenario_to_json(s1);
    const harness::Scenario s2 = harness::parse_scenario(j1);
    const json j2 = harness::scenario_to_json(s2);
    CHECK(j1.dump() == j2.dump());

    // The bundled scenario round-trips too.
    std::ifstream in(TERRACE_SCENARIO_FILE);
    REQUIRE(in.good());
    json bundled;
    in >> bundled;
    const json b1 = harness::scenario_to_json(harness::parse_scenario(bundled));
    const json b2 = harness::scenario_to_json(harness::parse_scenario(b1));
    CHECK(b1.dump() == b2.dump());
}

TEST_CASE("malformed configs raise ConfigError naming the field") {
    auto parses_to_error = [](json j, const std::string& needle) {
        try {
            harness::parse_scenario(j);
            return false;
        } catch (const ConfigError& e) {
            return std::string(e.what()).find(needle) != std::string::npos;
        }
    };
    json j = minimal_scenario();
    j["solvr"] = json::object();
    CHECK(parses_to_error(j, "solvr"));

    j = minimal_scenario();
    j.erase("schema_version");
    CHECK(parses_to_error(j, "schema_version"));

    j = minimal_scenario();
    j["params"]["d"] = "one";
    CHECK(parses_to_error(j, "params.d"));

    j = minimal_scenario();
    j["seeds"]["u"]["kind"] = "plateau";
    CHECK(parses_to_error(j, "seeds.u.kind"));

    j = minimal_scenario();
    j["seeds"]["pair"] = {{"kind", "llw_background"}};
    CHECK(parses_to_error(j, "seeds"));  // mixes pair with u/v

    j = minimal_scenario();
    j["analyses"][0]["type"] = "fit_sped";
    CHECK(parses_to_error(j, "analyses[0].type"));

    j = minimal_scenario();
    j["solver"]["t_end"] = -1.0;
    CHECK(parses_to_error(j, "solver.t_end"));
}

TEST_CASE("run_scenario: defaults, analyses and invariant monitor") {
    harness::Scenario s = harness::parse_scenario(minimal_scenario());
    s.solver.x_min.reset();
    s.solver.x_max.reset();
    const harness::RunSummary rs = harness::run_scenario(s, "");
    // Default window: [-100, 1.3 c1* t_end + 100] at dx = 0.1; the
    // accelerated prediction for these parameters gives c1* = 2.2.
    CHECK(rs.grid.x_min == -100.0);
    CHECK(rs.grid.x_max == doctest::Approx(1.3 * 2.2 * 5.0 + 100.0));
    CHECK(rs.grid.dx() == doctest::Approx(0.1).epsilon(1e-6));
    // Snapshot cadence is an exact integer multiple of dt.
    const double k = rs.config.snapshot_every / rs.config.dt;
    CHECK(std::abs(k - std::round(k)) < 1e-9);
    CHECK(rs.invariant_violation <= 1e-12);
    REQUIRE(rs.analyses.size() == 1);
    CHECK(rs.analyses[0].details.contains("fitted_speed"));
}

TEST_CASE("rerunning a scenario reproduces every artifact byte for byte") {
    namespace fs = std::filesystem;
    const harness::Scenario s = harness::parse_scenario(minimal_scenario());
    const fs::path base = fs::temp_directory_path() / "terrace_harness_det";
    fs::remove_all(base);
    harness::run_scenario(s, (base / "run1").string());
    harness::run_scenario(s, (base / "run2").string());
    for (const char* name :
         {"summary.json", "fronts.csv", "field_t0.csv", "field_t5.csv"}) {
        const std::string a = slurp((base / "run1" / name).string());
        const std::string b = slurp((base / "run2" / name).string());
        REQUIRE(!a.empty());
        CHECK(a == b);
        // LF endings only, no CR bytes.
        CHECK(a.find('\r') == std::string::npos);
    }
    // Full 17-significant-digit positions survive the CSV round trip.
    const std::string fronts = slurp((base / "run1" / "fronts.csv").string());
    CHECK(fronts.substr(0, fronts.find('\n')) == "t,x_front_u,x_front_v");
    fs::remove_all(base);
}

TEST_CASE("prediction serialization: extinction reports a null c1_star") {
    const speeds::SpeedPrediction pr = speeds::predict_trichotomy(
        {1.0, 0.25, 0.5, 1.1}, 2.0 * std::sqrt(0.5));
    const json j = harness::prediction_to_json(pr);
    CHECK(j.at("case") == "extinction");
    CHECK(j.at("c1_star").is_null());
    CHECK(j.at("c2_star") == 2.0);
}

TEST_CASE("sweep: deterministic rows, thread independence, classes") {
    const json cfg = json::parse(R"({
        "params": {"d": 1.0, "r": 1.21, "a": 0.5, "b": 1.1},
        "c1": {"min": 1.4, "max": 4.0, "count": 5},
        "c2": {"min": 1.2, "max": 2.2, "count": 4}
    })");
    const harness::SweepSpec spec = harness::parse_sweep(cfg);
    const std::string one = harness::run_sweep(spec, 1);
    const std::string four = harness::run_sweep(spec, 4);
    CHECK(one == four);
    CHECK(one.substr(0, one.find('\n')) ==
          "c1,c2,class,measured_c1,measured_c2");
    // Row-major order and correct classes on the two extreme cells:
    // (1.4, 1.2) is not an interior pair, (4.0, 2.2) is.
    std::istringstream lines(one);
    std::string header, first, row;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(first.find("interior") == std::string::npos);
    std::string last;
    while (std::getline(lines, row))
        if (!row.empty()) last = row;
    CHECK(last.find("interior") != std::string::npos);
    // 20 cells.
    int count = 0;
    for (char c : one) count += c == '\n';
    CHECK(count == 21);
}

TEST_CASE("sweep config validation") {
    CHECK_THROWS_AS(
        harness::parse_sweep(json::parse(R"({"c1": {"count": 0}})")),
        ConfigError);
    CHECK_THROWS_AS(
        harness::parse_sweep(json::parse(R"({"c3": {}})")), ConfigError);
}

TEST_CASE("TERRACE_LAB_THREADS overrides the flag") {
    ::setenv("TERRACE_LAB_THREADS", "3", 1);
    CHECK(harness::resolve_threads(8) == 3);
    ::unsetenv("TERRACE_LAB_THREADS");
    CHECK(harness::resolve_threads(8) == 8);
    CHECK(harness::resolve_threads(0) >= 1);
}
