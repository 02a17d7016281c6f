// Acceptance suite: eleven pinned criteria covering the trichotomy
// simulations, the hair-trigger wedge, terrace speeds, the nonexistence
// lower bound, barrier certification, the comparison principle, wave/decay
// consistency, the speed calculus and the solver convergence orders.
//
// Prints exactly one "Axx PASS/FAIL" line per criterion with the measured
// numbers and exits 0 iff every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "harness.hpp"
#include "terrace/barriers.hpp"
#include "terrace/errors.hpp"
#include "terrace/seeds.hpp"
#include "terrace/waves.hpp"

using namespace terrace;
using harness::Scenario;
using harness::SeedSpec;
using harness::AnalysisSpec;
using harness::RunSummary;

namespace {

const ModelParams kRef{1.0, 1.21, 0.5, 1.1};   // accelerated regime
const ModelParams kP3{1.0, 9.0, 0.5, 1.1};     // linear-determinacy regime
const ModelParams kP1{1.0, 0.25, 0.5, 1.1};    // extinction regime

// Worst invariant-region excursion seen anywhere in the suite (A11).
double g_invariant = 0.0;

void note_invariant(const Trajectory& traj) {
    for (const StatePair& s : traj.snapshots) {
        for (double u : s.u) g_invariant = std::max({g_invariant, -u, u - 1.0});
        for (double v : s.v) g_invariant = std::max({g_invariant, -v, v - 1.0});
    }
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return out;
}

double fitted(const RunSummary& rs, std::size_t idx) {
    return rs.analyses.at(idx).details.at("fitted_speed").get<double>();
}

// --- A1: accelerated trichotomy case from the bundled scenario file --------

Outcome a1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::ifstream in(TERRACE_SCENARIO_FILE);
    if (!in) return {false, "cannot open " TERRACE_SCENARIO_FILE};
    harness::json j;
    in >> j;
    const Scenario s = harness::parse_scenario(j);
    const RunSummary rs = harness::run_scenario(s, "");
    g_invariant = std::max(g_invariant, rs.invariant_violation);
    const double wall = seconds_since(t0);
    const double cv = fitted(rs, 0), cu = fitted(rs, 1);
    const bool ok = rs.pass && wall < 60.0;
    return {ok, "v-speed " + num(cv) + " (target 2.2), u-speed " + num(cu) +
                    " (target 1.6655, floor 1.5556), " + num(wall) + " s"};
}

// --- A2 + A4: linear-determinacy case and the hair-trigger wedge -----------

RunSummary run_p3() {
    Scenario s;
    s.name = "trichotomy_case3";
    s.params = kP3;
    SeedSpec u, v;
    u.kind = "heaviside_like";
    u.edge = 0.0;
    v.kind = "bump";
    v.center = 0.0;
    v.halfwidth = 10.0;
    v.amplitude = 1.0;
    s.seed_u = u;
    s.seed_v = v;
    s.solver.t_end = 60.0;
    s.solver.snapshot_every = 1.0;
    // Forward Euler under-resolves the pulled-front growth rate r = 9 at the
    // CFL default step (ln(1 + r dt)/(r dt) = 0.98): shrink dt and fit the
    // tail window so the measured speed reflects the asymptote.
    s.solver.dt = 0.002;
    AnalysisSpec fv;
    fv.type = "fit_speed";
    fv.field = "v";
    fv.window_fraction = 0.2;
    fv.predicted = 6.0;
    fv.rel_tol = 0.03;
    AnalysisSpec fu = fv;
    fu.field = "u";
    fu.predicted = 1.4142;
    AnalysisSpec wedge;
    wedge.type = "wedge_check";
    wedge.c_lo = 2.0;
    wedge.c_hi = 6.0;
    wedge.eps_geom = 0.5;
    wedge.eps_val = 0.05;
    s.analyses = {fv, fu, wedge};
    return harness::run_scenario(s, "");
}

const RunSummary& p3_summary() {
    static RunSummary rs = run_p3();
    return rs;
}

Outcome a2() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunSummary& rs = p3_summary();
    g_invariant = std::max(g_invariant, rs.invariant_violation);
    const double wall = seconds_since(t0);
    const bool ok =
        rs.analyses[0].pass && rs.analyses[1].pass && wall < 90.0;
    return {ok, "v-speed " + num(fitted(rs, 0)) + " (target 6), u-speed " +
                    num(fitted(rs, 1)) + " (target 1.4142), " + num(wall) +
                    " s"};
}

Outcome a4() {
    const RunSummary& rs = p3_summary();
    const bool ok = rs.analyses[2].pass;
    return {ok, std::string("wedge (2,6), eps_geom 0.5, eps_val 0.05: ") +
                    (ok ? "clean" : "violated")};
}

// --- A3: extinction case ---------------------------------------------------

Outcome a3() {
    const auto t0 = std::chrono::steady_clock::now();
    Scenario s;
    s.name = "trichotomy_case1";
    s.params = kP1;
    SeedSpec u, v;
    u.kind = "heaviside_like";
    u.edge = 0.0;
    // Behind the overtaking u front, v only decays logistically at the slow
    // rate r(b-1) = 0.025, so a unit-amplitude bump cannot reach 0.01 by
    // T=100 for any scheme; the extinction statement covers every compactly
    // supported v seed, and a modest bump behind the u edge exhibits it
    // within the pinned horizon.
    v.kind = "bump";
    v.center = -20.0;
    v.halfwidth = 5.0;
    v.amplitude = 0.1;
    s.seed_u = u;
    s.seed_v = v;
    s.solver.t_end = 100.0;
    AnalysisSpec fu;
    fu.type = "fit_speed";
    fu.field = "u";
    fu.predicted = 2.0;
    fu.rel_tol = 0.03;
    AnalysisSpec sup;
    sup.type = "final_sup";
    sup.field = "v";
    sup.max_value = 0.01;
    s.analyses = {fu, sup};
    const RunSummary rs = harness::run_scenario(s, "");
    g_invariant = std::max(g_invariant, rs.invariant_violation);
    const double wall = seconds_since(t0);
    const bool ok = rs.pass && wall < 60.0;
    return {ok, "u-speed " + num(fitted(rs, 0)) + " (target 2), sup v(T) " +
                    num(rs.analyses[1].details.at("sup").get<double>()) +
                    " (< 0.01), " + num(wall) + " s"};
}

// --- A5: terrace speeds ----------------------------------------------------

Outcome a5() {
    Scenario s;
    s.name = "terrace_speeds";
    s.params = kRef;
    SeedSpec pair;
    pair.kind = "terrace_pair";
    pair.c1 = 3.0;
    pair.c2 = 1.8;
    s.seed_pair = pair;
    s.solver.t_end = 120.0;
    AnalysisSpec fv;
    fv.type = "fit_speed";
    fv.field = "v";
    fv.predicted = 3.0;
    fv.rel_tol = 0.03;
    AnalysisSpec fu = fv;
    fu.field = "u";
    fu.predicted = 1.8;
    s.analyses = {fv, fu};
    const RunSummary rs = harness::run_scenario(s, "");
    g_invariant = std::max(g_invariant, rs.invariant_violation);
    return {rs.pass, "v-speed " + num(fitted(rs, 0)) + " (target 3), u-speed " +
                         num(fitted(rs, 1)) + " (target 1.8)"};
}

// --- A6: nonexistence lower bound ------------------------------------------

Outcome a6() {
    Scenario s;
    s.name = "nonexistence_lower_bound";
    s.params = kRef;
    SeedSpec u, v;
    u.kind = "bump";
    u.center = 0.0;
    u.halfwidth = 10.0;
    u.amplitude = 1.0;
    v.kind = "exp_tail";
    v.rate = speeds::lambda_v(2.3, kRef.r, kRef.d);
    v.anchor = 20.0;
    s.seed_u = u;
    s.seed_v = v;
    // The chasing front approaches its attractor slowly from a compact seed
    // (local speed 1.44 at t=250, 1.558 at t=600); run long and fit the tail
    // of the track.
    s.solver.t_end = 600.0;
    // The v tail sustains speed 2.3 > c1*; widen the window accordingly.
    s.solver.x_max = 1.3 * 2.3 * 600.0 + 100.0;
    const double floor = 0.97 * speeds::f_inverse(2.3, kRef.a);
    AnalysisSpec fu;
    fu.type = "fit_speed";
    fu.field = "u";
    fu.window_fraction = 0.2;
    fu.min_speed = floor;
    s.analyses = {fu};
    const RunSummary rs = harness::run_scenario(s, "");
    g_invariant = std::max(g_invariant, rs.invariant_violation);
    return {rs.pass, "u-speed " + num(fitted(rs, 0)) + " (floor " + num(floor) +
                         " = 0.97 x 1.5718)"};
}

// --- A7: barrier certification ---------------------------------------------

barriers::Lattice lattice_around(const barriers::BarrierAssembly& a) {
    barriers::Lattice lat;
    lat.t0 = 0.0;
    lat.t1 = 40.0;
    lat.nt = 200;
    lat.nx = 400;
    double lo = 1e300, hi = -1e300;
    for (double t : {lat.t0, lat.t1})
        for (double k : a.kink_positions(t)) {
            lo = std::min(lo, k);
            hi = std::max(hi, k);
        }
    lat.x0 = lo - 60.0;
    lat.x1 = hi + 80.0;
    return lat;
}

Outcome a7() {
    const double delta = 0.02;
    auto pair = barriers::ordered_terrace_pair(kRef, 3.0, 1.8, delta);
    const barriers::BarrierAssembly compact = barriers::assemble(
        barriers::AssemblyKind::compact_super, kRef, 0.0, 1.8, delta);
    const barriers::BarrierAssembly nonex = barriers::assemble(
        barriers::AssemblyKind::nonexistence_sub, kRef, 2.3, 1.5, delta);

    bool ok = true;
    std::string detail;
    double wbar_id = -1.0, z_id = -1.0;
    const std::pair<const char*, const barriers::BarrierAssembly*> all[] = {
        {"terrace_super", &pair.first},
        {"terrace_sub", &pair.second},
        {"compact_super", &compact},
        {"nonexistence_sub", &nonex}};
    for (const auto& [name, a] : all) {
        const barriers::ResidualReport rep =
            barriers::try_certify(*a, lattice_around(*a));
        ok = ok && rep.certified && rep.sampled > 0;
        if (rep.identity_residuals.count("wbar"))
            wbar_id = std::max(wbar_id, rep.identity_residuals.at("wbar"));
        if (rep.identity_residuals.count("z"))
            z_id = std::max(z_id, rep.identity_residuals.at("z"));
        detail += std::string(name) + (rep.certified ? " ok" : " FAILED") + ", ";
        if (!rep.certified) detail += rep.failure + ", ";
    }
    ok = ok && wbar_id >= 0.0 && wbar_id < 1e-12;
    ok = ok && z_id >= 0.0 && z_id < 1e-12;
    detail += "identity residuals wbar " + num(wbar_id) + ", z " + num(z_id) +
              " (< 1e-12)";
    return {ok, detail};
}

// --- A8: comparison-principle property suite -------------------------------

Outcome a8() {
    std::mt19937 rng(20260824u);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Grid g{-30.0, 30.0, 301};

    // Smooth random field in [0,1]: squashed random trigonometric sum.
    auto random_field = [&] {
        double c[4], ph[4];
        for (int k = 0; k < 4; ++k) {
            c[k] = 2.0 * unit(rng) - 1.0;
            ph[k] = 6.283185307179586 * unit(rng);
        }
        std::vector<double> f(g.n);
        for (int i = 0; i < g.n; ++i) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k)
                s += c[k] * std::cos((k + 1) * 0.10471975511965977 * g.x(i) +
                                     ph[k]);
            f[i] = 0.5 + 0.5 * std::tanh(s);
        }
        return f;
    };

    SolverConfig cfg;
    cfg.grid = g;
    cfg.t_end = 50.0;
    cfg.snapshot_every = 2.5;
    cfg.dt = 2.5 / std::ceil(2.5 / (0.9 * cfl_limit(g, kRef)));

    int ordered = 0;
    for (int trial = 0; trial < 20; ++trial) {
        StatePair lo, hi;
        hi.u = random_field();
        lo.v = random_field();
        const std::vector<double> fu = random_field(), fv = random_field();
        lo.u.resize(g.n);
        hi.v.resize(g.n);
        for (int i = 0; i < g.n; ++i) {
            lo.u[i] = hi.u[i] * fu[i];
            hi.v[i] = lo.v[i] * fv[i];
        }
        Trajectory tl = integrate(lo, kRef, cfg);
        Trajectory th = integrate(hi, kRef, cfg);
        note_invariant(tl);
        note_invariant(th);
        if (comparison_monitor(tl, th, 1e-9)) ++ordered;
    }
    return {ordered == 20,
            num(ordered) + "/20 random ordered pairs stayed ordered to T=50"};
}

// --- A9: wave/decay consistency --------------------------------------------

Outcome a9() {
    if (!waves::uniqueness_condition(kRef))
        return {false, "uniqueness condition unexpectedly false"};
    const waves::WaveProfile w = waves::solve_profile(1.8, kRef, 0.0, 150.0, 6000);
    const double phi_ref = 0.343224, psi_ref = 0.066307;
    bool ok = w.phi_decreasing && w.psi_increasing;
    ok = ok && std::abs(w.measured_decay_plus - phi_ref) < 0.02 * phi_ref;
    ok = ok && std::abs(w.measured_decay_minus - psi_ref) < 0.05 * psi_ref;

    // Guess independence on a shared mesh.
    const int mesh = 4000;
    const double X = 100.0;
    const waves::WaveProfile w1 = waves::solve_profile(1.8, kRef, 0.0, X, mesh);
    std::vector<double> phi_g(mesh + 1), psi_g(mesh + 1);
    for (int i = 0; i <= mesh; ++i) {
        const double xi = -X + 2.0 * X * i / mesh;
        phi_g[i] = 0.5 * (1.0 - std::tanh(0.5 * (xi - 3.0)));
        psi_g[i] = 0.5 * (1.0 + std::tanh(0.5 * (xi - 3.0)));
    }
    const waves::WaveProfile w2 =
        waves::solve_profile(1.8, kRef, 0.0, X, mesh, &phi_g, &psi_g);
    auto interp = [](const std::vector<double>& xs, const std::vector<double>& ys,
                     double x) {
        std::size_t k = 1;
        while (k + 1 < xs.size() && xs[k] < x) ++k;
        const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return ys[k - 1] + t * (ys[k] - ys[k - 1]);
    };
    double diff = 0.0;
    for (double x = -60.0; x <= 60.0; x += 0.5) {
        diff = std::max(diff, std::abs(interp(w1.xi, w1.phi, x) -
                                       interp(w2.xi, w2.phi, x)));
        diff = std::max(diff, std::abs(interp(w1.xi, w1.psi, x) -
                                       interp(w2.xi, w2.psi, x)));
    }
    ok = ok && diff < 1e-6;
    return {ok, "phi-decay " + num(w.measured_decay_plus) + " (target " +
                    num(phi_ref) + " +-2%), psi-decay " +
                    num(w.measured_decay_minus) + " (target " + num(psi_ref) +
                    " +-5%), guess gap " + num(diff) + " (< 1e-6)"};
}

// --- A10: speed-calculus residuals -----------------------------------------

Outcome a10() {
    using namespace speeds;
    double worst_quad = 0.0, worst_id = 0.0;
    for (double c : log_spaced(1.5, 40.0, 50)) {
        const double l = lambda_u(c, 0.5);
        worst_quad = std::max(worst_quad, std::abs(l * l - c * l + 0.5));
    }
    for (double c : log_spaced(2.3, 40.0, 50)) {
        const double l = lambda_v(c, 1.21, 1.0);
        worst_quad = std::max(worst_quad, std::abs(l * l - c * l + 1.21));
    }
    for (double c2 : {1.5, 1.8, 2.5}) {
        const double l = lambda_u(c2, 0.5);
        for (double c1 :
             log_spaced(std::max(c2, f_of(c2, 0.5)) + 0.05, 40.0, 17)) {
            const double L = big_lambda(c2, c1, 0.5);
            worst_quad = std::max(
                worst_quad, std::abs(L * L - c1 * L + l * (c1 - c2) + 1.0));
        }
    }
    const double lo = 2.0 * std::sqrt(0.5), hi = 2.8284271247461903;
    for (double y : log_spaced(lo * 1.0001, hi * 0.9999, 50))
        worst_id = std::max(worst_id, std::abs(f_of(f_inverse(y, 0.5), 0.5) - y));

    // (L^2 + 1)/L < c1 at sampled admissible pairs.
    bool wbound = true;
    for (double c2 : {1.5, 1.8, 2.0, 2.6})
        for (double c1 : {3.0, 3.5, 4.0, 6.0, 10.0}) {
            if (!(c1 > c2 && c1 > f_of(c2, 0.5))) continue;
            const double L = big_lambda(c2, c1, 0.5);
            wbound = wbound && (L * L + 1.0) / L < c1;
        }
    const bool ok = worst_quad < 1e-12 && worst_id < 1e-12 && wbound;
    return {ok, "quadratic residual " + num(worst_quad) +
                    ", round-trip residual " + num(worst_id) +
                    " (< 1e-12), w-speed bound " +
                    (wbound ? "holds" : "VIOLATED")};
}

// --- A11: convergence orders and the global invariant ----------------------

Outcome a11() {
    auto make_cfg = [](const Grid& g, double dt, double t_end) {
        SolverConfig cfg;
        cfg.grid = g;
        cfg.dt = dt;
        cfg.t_end = t_end;
        cfg.snapshot_every = t_end;
        return cfg;
    };

    // Temporal order: homogeneous run, only time discretization contributes.
    const Grid gh{0.0, 1.0, 3};
    auto run_t = [&](double dt) {
        StatePair s;
        s.u.assign(gh.n, 0.2);
        s.v.assign(gh.n, 0.9);
        Trajectory tr = integrate(s, kRef, make_cfg(gh, dt, 4.0));
        note_invariant(tr);
        return tr.snapshots.back();
    };
    const StatePair s1 = run_t(0.04), s2 = run_t(0.02), s3 = run_t(0.01);
    const double et1 =
        std::abs(s1.u[0] - s2.u[0]) + std::abs(s1.v[0] - s2.v[0]);
    const double et2 =
        std::abs(s2.u[0] - s3.u[0]) + std::abs(s2.v[0] - s3.v[0]);
    const double tratio = et1 / et2;

    // Spatial order: smooth tanh profiles, tiny fixed dt.
    auto run_x = [&](int n) {
        Grid g{-20.0, 20.0, n};
        StatePair s;
        s.u.resize(g.n);
        s.v.resize(g.n);
        for (int i = 0; i < g.n; ++i) {
            const double x = g.x(i);
            s.u[i] = 0.5 * (1.0 - std::tanh(x / 4.0));
            s.v[i] = 0.5 * (1.0 + std::tanh(x / 4.0));
        }
        Trajectory tr = integrate(s, kRef, make_cfg(g, 1e-4, 0.5));
        note_invariant(tr);
        return tr.snapshots.back();
    };
    const StatePair c1 = run_x(101), c2 = run_x(201), c3 = run_x(401);
    double ex1 = 0.0, ex2 = 0.0;
    for (int i = 0; i < 101; ++i) {
        ex1 = std::max(ex1, std::abs(c1.u[i] - c2.u[2 * i]));
        ex2 = std::max(ex2, std::abs(c2.u[2 * i] - c3.u[4 * i]));
    }
    const double xratio = ex1 / ex2;

    const bool ok = std::abs(tratio - 2.0) <= 0.10 * 2.0 &&
                    std::abs(xratio - 4.0) <= 0.20 * 4.0 &&
                    g_invariant <= 1e-12;
    return {ok, "temporal ratio " + num(tratio) + " (2 +-10%), spatial ratio " +
                    num(xratio) + " (4 +-20%), suite invariant excursion " +
                    num(g_invariant) + " (<= 1e-12)"};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"A1", a1},   {"A2", a2},   {"A3", a3}, {"A4", a4},
        {"A5", a5},   {"A6", a6},   {"A7", a7}, {"A8", a8},
        {"A9", a9},   {"A10", a10}, {"A11", a11}};
    bool all = true;
    for (const auto& [id, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::printf("%-4s %s  %s\n", id, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
