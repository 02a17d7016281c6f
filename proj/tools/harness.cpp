#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "terrace/errors.hpp"
#include "terrace/seeds.hpp"

namespace terrace {
namespace harness {

namespace {

std::string path_of(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

void check_object(const json& j, const std::string& where) {
    if (!j.is_object())
        throw ConfigError("field '" + where + "' must be an object");
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    check_object(j, where);
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok)
            throw ConfigError("unknown field '" + path_of(where, it.key()) + "'");
    }
}

double get_num(const json& j, const std::string& where, const char* key,
               double fallback, bool required = false) {
    if (!j.contains(key)) {
        if (required)
            throw ConfigError("missing field '" + path_of(where, key) + "'");
        return fallback;
    }
    const json& v = j.at(key);
    if (!v.is_number())
        throw ConfigError("field '" + path_of(where, key) + "' must be a number");
    return v.get<double>();
}

int get_int(const json& j, const std::string& where, const char* key,
            int fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer())
        throw ConfigError("field '" + path_of(where, key) + "' must be an integer");
    return v.get<int>();
}

bool get_bool(const json& j, const std::string& where, const char* key,
              bool fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean())
        throw ConfigError("field '" + path_of(where, key) + "' must be a boolean");
    return v.get<bool>();
}

std::string get_str(const json& j, const std::string& where, const char* key,
                    const std::string& fallback, bool required = false) {
    if (!j.contains(key)) {
        if (required)
            throw ConfigError("missing field '" + path_of(where, key) + "'");
        return fallback;
    }
    const json& v = j.at(key);
    if (!v.is_string())
        throw ConfigError("field '" + path_of(where, key) + "' must be a string");
    return v.get<std::string>();
}

std::optional<double> get_opt(const json& j, const std::string& where,
                              const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return get_num(j, where, key, 0.0);
}

ModelParams parse_params(const json& j, const std::string& where) {
    check_keys(j, where, {"d", "r", "a", "b"});
    ModelParams p;
    p.d = get_num(j, where, "d", 1.0);
    p.r = get_num(j, where, "r", 1.0);
    p.a = get_num(j, where, "a", 0.5);
    p.b = get_num(j, where, "b", 2.0);
    return p;
}

SeedSpec parse_seed(const json& j, const std::string& where, bool pair_slot) {
    check_keys(j, where,
               {"kind", "center", "halfwidth", "amplitude", "edge", "rate",
                "anchor", "c1", "c2", "x_v", "c_llw"});
    SeedSpec s;
    s.kind = get_str(j, where, "kind", "", true);
    const bool is_pair = s.kind == "terrace_pair" || s.kind == "llw_background";
    const bool is_single = s.kind == "bump" || s.kind == "heaviside_like" ||
                           s.kind == "exp_tail";
    if (!is_pair && !is_single)
        throw ConfigError("field '" + path_of(where, "kind") +
                          "' has unknown seed kind '" + s.kind + "'");
    if (pair_slot != is_pair)
        throw ConfigError("field '" + path_of(where, "kind") + "': '" + s.kind +
                          (pair_slot ? "' is not a pair seed"
                                     : "' must go under seeds.pair"));
    s.center = get_num(j, where, "center", s.center);
    s.halfwidth = get_num(j, where, "halfwidth", s.halfwidth);
    s.amplitude = get_num(j, where, "amplitude", s.amplitude);
    s.edge = get_num(j, where, "edge", s.edge);
    s.rate = get_num(j, where, "rate", s.rate);
    s.anchor = get_num(j, where, "anchor", s.anchor);
    s.c1 = get_num(j, where, "c1", s.c1, s.kind == "terrace_pair");
    s.c2 = get_num(j, where, "c2", s.c2, s.kind == "terrace_pair");
    s.x_v = get_num(j, where, "x_v", s.x_v);
    s.c_llw = get_num(j, where, "c_llw", s.c_llw);
    return s;
}

json seed_to_json(const SeedSpec& s) {
    json j;
    j["kind"] = s.kind;
    if (s.kind == "bump") {
        j["center"] = s.center;
        j["halfwidth"] = s.halfwidth;
        j["amplitude"] = s.amplitude;
    } else if (s.kind == "heaviside_like") {
        j["edge"] = s.edge;
    } else if (s.kind == "exp_tail") {
        j["rate"] = s.rate;
        j["anchor"] = s.anchor;
    } else if (s.kind == "terrace_pair") {
        j["c1"] = s.c1;
        j["c2"] = s.c2;
        j["x_v"] = s.x_v;
        j["c_llw"] = s.c_llw;
    }
    return j;
}

AnalysisSpec parse_analysis(const json& j, const std::string& where) {
    check_keys(j, where,
               {"type", "field", "level", "window_fraction", "predicted",
                "rel_tol", "min_speed", "max_speed", "c_lo", "c_hi", "eps_geom",
                "eps_val", "u_star", "v_star", "eps", "min_extent_speed",
                "max_value"});
    AnalysisSpec a;
    a.type = get_str(j, where, "type", "", true);
    if (a.type != "fit_speed" && a.type != "wedge_check" &&
        a.type != "plateau_extent" && a.type != "final_sup")
        throw ConfigError("field '" + path_of(where, "type") +
                          "' has unknown analysis type '" + a.type + "'");
    a.field = get_str(j, where, "field", a.field);
    if (a.field != "u" && a.field != "v")
        throw ConfigError("field '" + path_of(where, "field") +
                          "' must be 'u' or 'v'");
    a.level = get_num(j, where, "level", a.level);
    a.window_fraction = get_num(j, where, "window_fraction", a.window_fraction);
    a.predicted = get_opt(j, where, "predicted");
    a.rel_tol = get_num(j, where, "rel_tol", a.rel_tol);
    a.min_speed = get_opt(j, where, "min_speed");
    a.max_speed = get_opt(j, where, "max_speed");
    a.c_lo = get_num(j, where, "c_lo", a.c_lo);
    a.c_hi = get_num(j, where, "c_hi", a.c_hi);
    a.eps_geom = get_num(j, where, "eps_geom", a.eps_geom);
    a.eps_val = get_num(j, where, "eps_val", a.eps_val);
    a.u_star = get_num(j, where, "u_star", a.u_star);
    a.v_star = get_num(j, where, "v_star", a.v_star);
    a.eps = get_num(j, where, "eps", a.eps);
    a.min_extent_speed = get_opt(j, where, "min_extent_speed");
    a.max_value = get_num(j, where, "max_value", a.max_value);
    return a;
}

json analysis_to_json(const AnalysisSpec& a) {
    json j;
    j["type"] = a.type;
    if (a.type == "fit_speed") {
        j["field"] = a.field;
        j["level"] = a.level;
        j["window_fraction"] = a.window_fraction;
        if (a.predicted) j["predicted"] = *a.predicted;
        j["rel_tol"] = a.rel_tol;
        if (a.min_speed) j["min_speed"] = *a.min_speed;
        if (a.max_speed) j["max_speed"] = *a.max_speed;
    } else if (a.type == "wedge_check") {
        j["c_lo"] = a.c_lo;
        j["c_hi"] = a.c_hi;
        j["eps_geom"] = a.eps_geom;
        j["eps_val"] = a.eps_val;
    } else if (a.type == "plateau_extent") {
        j["u_star"] = a.u_star;
        j["v_star"] = a.v_star;
        j["eps"] = a.eps;
        if (a.min_extent_speed) j["min_extent_speed"] = *a.min_extent_speed;
    } else if (a.type == "final_sup") {
        j["field"] = a.field;
        j["max_value"] = a.max_value;
    }
    return j;
}

std::vector<double> build_single_seed(const SeedSpec& s, const Grid& g) {
    if (s.kind == "bump")
        return seeds::bump(g, s.center, s.halfwidth, s.amplitude);
    if (s.kind == "heaviside_like") return seeds::heaviside_like(g, s.edge);
    return seeds::exp_tail(g, s.rate, s.anchor);
}

std::string csv_time_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

}  // namespace

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << contents;
}

int resolve_threads(int flag_value) {
    if (const char* env = std::getenv("TERRACE_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    if (flag_value > 0) return flag_value;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

json prediction_to_json(const speeds::SpeedPrediction& p) {
    json j;
    j["case"] = speeds::to_string(p.case_id);
    if (std::isnan(p.c1_star))
        j["c1_star"] = nullptr;
    else
        j["c1_star"] = p.c1_star;
    j["c2_star"] = p.c2_star;
    j["c_llw_used"] = p.c_llw_used;
    j["linearly_determined"] = p.linearly_determined;
    return j;
}

Scenario parse_scenario(const json& j) {
    check_keys(j, "", {"schema_version", "name", "params", "seeds", "solver",
                       "analyses", "expected_c_llw"});
    const int ver = get_int(j, "", "schema_version", -1);
    if (!j.contains("schema_version"))
        throw ConfigError("missing field 'schema_version'");
    if (ver != kSchemaVersion)
        throw ConfigError("field 'schema_version' must be " +
                          std::to_string(kSchemaVersion));
    Scenario s;
    s.name = get_str(j, "", "name", "scenario");
    if (!j.contains("params")) throw ConfigError("missing field 'params'");
    s.params = parse_params(j.at("params"), "params");
    if (!j.contains("seeds")) throw ConfigError("missing field 'seeds'");
    const json& seeds_j = j.at("seeds");
    check_keys(seeds_j, "seeds", {"u", "v", "pair"});
    if (seeds_j.contains("pair")) {
        if (seeds_j.contains("u") || seeds_j.contains("v"))
            throw ConfigError("field 'seeds' mixes 'pair' with 'u'/'v'");
        s.seed_pair = parse_seed(seeds_j.at("pair"), "seeds.pair", true);
    } else {
        if (!seeds_j.contains("u"))
            throw ConfigError("missing field 'seeds.u'");
        if (!seeds_j.contains("v"))
            throw ConfigError("missing field 'seeds.v'");
        s.seed_u = parse_seed(seeds_j.at("u"), "seeds.u", false);
        s.seed_v = parse_seed(seeds_j.at("v"), "seeds.v", false);
    }
    if (j.contains("solver")) {
        const json& sj = j.at("solver");
        check_keys(sj, "solver",
                   {"x_min", "x_max", "n", "dx", "dt", "t_end",
                    "snapshot_every", "delta", "dump_fields"});
        s.solver.x_min = get_opt(sj, "solver", "x_min");
        s.solver.x_max = get_opt(sj, "solver", "x_max");
        if (sj.contains("n")) s.solver.n = get_int(sj, "solver", "n", 0);
        s.solver.dx = get_opt(sj, "solver", "dx");
        s.solver.dt = get_opt(sj, "solver", "dt");
        s.solver.t_end = get_num(sj, "solver", "t_end", s.solver.t_end);
        s.solver.snapshot_every = get_opt(sj, "solver", "snapshot_every");
        s.solver.delta = get_num(sj, "solver", "delta", 0.0);
        s.solver.dump_fields = get_bool(sj, "solver", "dump_fields", false);
    }
    if (s.solver.t_end <= 0.0)
        throw ConfigError("field 'solver.t_end' must be positive");
    if (j.contains("analyses")) {
        const json& aj = j.at("analyses");
        if (!aj.is_array())
            throw ConfigError("field 'analyses' must be an array");
        for (std::size_t i = 0; i < aj.size(); ++i)
            s.analyses.push_back(
                parse_analysis(aj.at(i), "analyses[" + std::to_string(i) + "]"));
    }
    if (j.contains("expected_c_llw"))
        s.expected_c_llw = get_num(j, "", "expected_c_llw", 0.0);
    return s;
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = s.name;
    j["params"] = {{"d", s.params.d},
                   {"r", s.params.r},
                   {"a", s.params.a},
                   {"b", s.params.b}};
    json seeds_j;
    if (s.seed_pair) {
        seeds_j["pair"] = seed_to_json(*s.seed_pair);
    } else {
        seeds_j["u"] = seed_to_json(*s.seed_u);
        seeds_j["v"] = seed_to_json(*s.seed_v);
    }
    j["seeds"] = seeds_j;
    json sj;
    if (s.solver.x_min) sj["x_min"] = *s.solver.x_min;
    if (s.solver.x_max) sj["x_max"] = *s.solver.x_max;
    if (s.solver.n) sj["n"] = *s.solver.n;
    if (s.solver.dx) sj["dx"] = *s.solver.dx;
    if (s.solver.dt) sj["dt"] = *s.solver.dt;
    sj["t_end"] = s.solver.t_end;
    if (s.solver.snapshot_every) sj["snapshot_every"] = *s.solver.snapshot_every;
    if (s.solver.delta != 0.0) sj["delta"] = s.solver.delta;
    if (s.solver.dump_fields) sj["dump_fields"] = true;
    j["solver"] = sj;
    if (!s.analyses.empty()) {
        json arr = json::array();
        for (const AnalysisSpec& a : s.analyses) arr.push_back(analysis_to_json(a));
        j["analyses"] = arr;
    }
    if (s.expected_c_llw) j["expected_c_llw"] = *s.expected_c_llw;
    return j;
}

json RunSummary::to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["scenario"] = scenario_to_json(scenario);
    j["grid"] = {{"x_min", grid.x_min},
                 {"x_max", grid.x_max},
                 {"n", grid.n},
                 {"dx", grid.dx()}};
    j["dt"] = config.dt;
    j["t_end"] = config.t_end;
    j["snapshot_every"] = config.snapshot_every;
    j["delta"] = config.delta;
    j["invariant_violation"] = invariant_violation;
    json arr = json::array();
    for (const AnalysisResult& a : analyses) {
        json aj;
        aj["type"] = a.spec.type;
        aj["pass"] = a.pass;
        aj["details"] = a.details;
        arr.push_back(aj);
    }
    j["analyses"] = arr;
    j["pass"] = pass;
    j["artifacts"] = artifacts;
    return j;
}

RunSummary run_scenario(const Scenario& s, const std::string& out_dir) {
    RunSummary out;
    out.scenario = s;
    const ModelParams p = validate_params(s.params);

    // Grid defaults: left margin 100, right end covering the fastest front at
    // 1.3 c1* t_end plus 100; dx = 0.1.
    double cref = p.kpp_u_speed();
    const double c_llw_guess =
        s.expected_c_llw ? *s.expected_c_llw : 2.0 * std::sqrt(1.0 - p.a);
    try {
        const speeds::SpeedPrediction pr =
            speeds::predict_trichotomy(p, c_llw_guess);
        if (std::isfinite(pr.c1_star)) cref = std::max(cref, pr.c1_star);
    } catch (const BoundaryCase&) {
    }
    if (s.seed_pair && s.seed_pair->kind == "terrace_pair")
        cref = std::max(cref, s.seed_pair->c1);
    const double x_min = s.solver.x_min.value_or(-100.0);
    const double x_max =
        s.solver.x_max.value_or(1.3 * cref * s.solver.t_end + 100.0);
    if (!(x_max > x_min)) throw ConfigError("field 'solver.x_max' <= x_min");
    Grid g;
    g.x_min = x_min;
    g.x_max = x_max;
    if (s.solver.n) {
        g.n = *s.solver.n;
    } else {
        const double dx = s.solver.dx.value_or(0.1);
        if (!(dx > 0.0)) throw ConfigError("field 'solver.dx' must be positive");
        g.n = static_cast<int>(std::lround((x_max - x_min) / dx)) + 1;
    }
    out.grid = validate_grid(g);

    SolverConfig cfg;
    cfg.grid = out.grid;
    cfg.t_end = s.solver.t_end;
    cfg.delta = s.solver.delta;
    const double snap_req =
        s.solver.snapshot_every.value_or(std::min(2.5, cfg.t_end));
    if (!(snap_req > 0.0))
        throw ConfigError("field 'solver.snapshot_every' must be positive");
    const double dt_req = s.solver.dt.value_or(0.9 * cfl_limit(out.grid, p));
    if (!(dt_req > 0.0)) throw ConfigError("field 'solver.dt' must be positive");
    // Snapshot cadence must be an integer multiple of dt; shrink dt to fit.
    cfg.snapshot_every = snap_req;
    cfg.dt = snap_req / std::ceil(snap_req / dt_req - 1e-12);
    out.config = cfg;

    StatePair s0;
    s0.t = 0.0;
    if (s.seed_pair) {
        if (s.seed_pair->kind == "terrace_pair") {
            auto uv = seeds::terrace_pair(out.grid, p, s.seed_pair->c1,
                                          s.seed_pair->c2, s.seed_pair->c_llw,
                                          s.seed_pair->x_v);
            s0.u = std::move(uv.first);
            s0.v = std::move(uv.second);
        } else {
            auto uv = seeds::llw_background(out.grid, p);
            s0.u = std::move(uv.first);
            s0.v = std::move(uv.second);
        }
    } else {
        s0.u = build_single_seed(*s.seed_u, out.grid);
        s0.v = build_single_seed(*s.seed_v, out.grid);
    }

    double worst = 0.0;
    Monitor inv = [&worst](const StatePair& st) {
        for (double u : st.u)
            worst = std::max({worst, -u, u - 1.0});
        for (double v : st.v)
            worst = std::max({worst, -v, v - 1.0});
    };
    Trajectory traj = integrate(s0, p, cfg, {inv});
    out.invariant_violation = worst;

    out.pass = true;
    for (const AnalysisSpec& a : s.analyses) {
        AnalysisResult res;
        res.spec = a;
        if (a.type == "fit_speed") {
            const fronts::Field which =
                a.field == "u" ? fronts::Field::u : fronts::Field::v;
            fronts::FrontTrack track = fronts::track_front(traj, which, a.level);
            fronts::SpeedReport rep =
                fronts::fit_speed(track, a.window_fraction, a.predicted);
            res.details["fitted_speed"] = rep.fitted_speed;
            res.details["intercept"] = rep.intercept;
            res.details["rms_residual"] = rep.rms_residual;
            res.details["fit_window"] = {rep.t0, rep.t1};
            res.pass = true;
            if (rep.relative_error) {
                res.details["relative_error"] = *rep.relative_error;
                res.pass = res.pass && std::abs(*rep.relative_error) <= a.rel_tol;
            }
            if (a.min_speed)
                res.pass = res.pass && rep.fitted_speed >= *a.min_speed;
            if (a.max_speed)
                res.pass = res.pass && rep.fitted_speed <= *a.max_speed;
        } else if (a.type == "wedge_check") {
            const bool ok =
                fronts::wedge_check(traj, a.c_lo, a.c_hi, a.eps_geom, a.eps_val);
            res.details["holds"] = ok;
            res.pass = ok;
        } else if (a.type == "plateau_extent") {
            const StatePair& last = traj.snapshots.back();
            auto ext = fronts::plateau_extent(out.grid, last, a.u_star, a.v_star,
                                              a.eps);
            if (ext) {
                res.details["extent"] = {ext->first, ext->second};
                const double spd = ext->second / cfg.t_end;
                res.details["extent_speed"] = spd;
                res.pass = !a.min_extent_speed || spd >= *a.min_extent_speed;
            } else {
                res.details["extent"] = nullptr;
                res.pass = false;
            }
        } else {  // final_sup
            const StatePair& last = traj.snapshots.back();
            const std::vector<double>& f = a.field == "u" ? last.u : last.v;
            double sup = 0.0;
            for (double y : f) sup = std::max(sup, std::abs(y));
            res.details["sup"] = sup;
            res.pass = sup < a.max_value;
        }
        out.pass = out.pass && res.pass;
        out.analyses.push_back(std::move(res));
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        // fronts.csv: rightmost 0.5-level crossing per snapshot, empty cell
        // when the level is not attained.
        std::ostringstream fronts_csv;
        fronts_csv << "t,x_front_u,x_front_v\n";
        for (const StatePair& st : traj.snapshots) {
            fronts_csv << fmt(st.t) << ",";
            if (auto xu = fronts::level_position(out.grid, st.u, 0.5))
                fronts_csv << fmt(*xu);
            fronts_csv << ",";
            if (auto xv = fronts::level_position(out.grid, st.v, 0.5))
                fronts_csv << fmt(*xv);
            fronts_csv << "\n";
        }
        write_file(out_dir + "/fronts.csv", fronts_csv.str());
        out.artifacts.push_back("fronts.csv");

        std::vector<const StatePair*> dumps;
        if (s.solver.dump_fields) {
            for (const StatePair& st : traj.snapshots) dumps.push_back(&st);
        } else {
            dumps.push_back(&traj.snapshots.front());
            dumps.push_back(&traj.snapshots.back());
        }
        for (const StatePair* st : dumps) {
            std::ostringstream field_csv;
            field_csv << "x,u,v\n";
            for (int i = 0; i < out.grid.n; ++i)
                field_csv << fmt(out.grid.x(i)) << "," << fmt(st->u[i]) << ","
                          << fmt(st->v[i]) << "\n";
            const std::string name = "field_t" + csv_time_tag(st->t) + ".csv";
            write_file(out_dir + "/" + name, field_csv.str());
            out.artifacts.push_back(name);
        }
        write_file(out_dir + "/summary.json", out.to_json().dump(2) + "\n");
        out.artifacts.push_back("summary.json");
    }
    return out;
}

SweepSpec parse_sweep(const json& j) {
    check_keys(j, "", {"schema_version", "params", "c1", "c2", "c_llw",
                       "simulate", "t_end"});
    if (j.contains("schema_version") &&
        get_int(j, "", "schema_version", -1) != kSchemaVersion)
        throw ConfigError("field 'schema_version' must be " +
                          std::to_string(kSchemaVersion));
    SweepSpec s;
    if (j.contains("params")) s.params = parse_params(j.at("params"), "params");
    auto axis = [&](const char* key, double& lo, double& hi, int& count) {
        if (!j.contains(key)) return;
        const json& a = j.at(key);
        check_keys(a, key, {"min", "max", "count"});
        lo = get_num(a, key, "min", lo);
        hi = get_num(a, key, "max", hi);
        count = get_int(a, key, "count", count);
        if (count < 1)
            throw ConfigError("field '" + std::string(key) +
                              ".count' must be >= 1");
        if (!(hi >= lo))
            throw ConfigError("field '" + std::string(key) + ".max' < min");
    };
    axis("c1", s.c1_min, s.c1_max, s.c1_count);
    axis("c2", s.c2_min, s.c2_max, s.c2_count);
    s.c_llw = get_num(j, "", "c_llw", s.c_llw);
    s.simulate = get_bool(j, "", "simulate", false);
    s.t_end = get_num(j, "", "t_end", s.t_end);
    return s;
}

std::string run_sweep(const SweepSpec& s, int threads) {
    const ModelParams p = validate_params(s.params);
    const double c_llw =
        s.c_llw > 0.0 ? s.c_llw : 2.0 * std::sqrt(1.0 - p.a);
    const int cells = s.c1_count * s.c2_count;
    std::vector<std::string> rows(cells);

    auto cell_value = [&](int idx) {
        const int i = idx / s.c2_count, k = idx % s.c2_count;
        const double c1 =
            s.c1_count == 1
                ? s.c1_min
                : s.c1_min + (s.c1_max - s.c1_min) * i / (s.c1_count - 1);
        const double c2 =
            s.c2_count == 1
                ? s.c2_min
                : s.c2_min + (s.c2_max - s.c2_min) * k / (s.c2_count - 1);
        std::string cls;
        try {
            cls = speeds::to_string(speeds::admissible(c1, c2, p, c_llw));
        } catch (const Error& e) {
            cls = "error";
        }
        std::string m1, m2;
        if (s.simulate && cls == "interior") {
            try {
                Scenario sc;
                sc.name = "sweep_cell";
                sc.params = p;
                SeedSpec pair;
                pair.kind = "terrace_pair";
                pair.c1 = c1;
                pair.c2 = c2;
                pair.c_llw = c_llw;
                sc.seed_pair = pair;
                sc.solver.t_end = s.t_end;
                // Enough snapshots for the half-range speed fit.
                sc.solver.snapshot_every = s.t_end / 40.0;
                AnalysisSpec fu;
                fu.type = "fit_speed";
                fu.field = "u";
                AnalysisSpec fv = fu;
                fv.field = "v";
                sc.analyses = {fv, fu};
                RunSummary rs = run_scenario(sc, "");
                m1 = fmt(rs.analyses[0].details.at("fitted_speed").get<double>());
                m2 = fmt(rs.analyses[1].details.at("fitted_speed").get<double>());
            } catch (const Error&) {
                m1 = m2 = "";
            }
        }
        rows[idx] = fmt(c1) + "," + fmt(c2) + "," + cls + "," + m1 + "," + m2;
    };

    const int workers = std::max(1, std::min(threads, cells));
    if (workers == 1) {
        for (int idx = 0; idx < cells; ++idx) cell_value(idx);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int idx = w; idx < cells; idx += workers) cell_value(idx);
            });
        for (std::thread& t : pool) t.join();
    }

    std::string csv = "c1,c2,class,measured_c1,measured_c2\n";
    for (const std::string& row : rows) csv += row + "\n";
    return csv;
}

}  // namespace harness
}  // namespace terrace
