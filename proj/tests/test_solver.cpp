#include "doctest.h"

#include <cmath>
#include <random>

#include "terrace/seeds.hpp"
#include "terrace/solver.hpp"

using namespace terrace;

namespace {
const ModelParams kRef{1.0, 1.21, 0.5, 1.1};

StatePair homogeneous(const Grid& g, double u, double v) {
    StatePair s;
    s.u.assign(g.n, u);
    s.v.assign(g.n, v);
    return s;
}

SolverConfig basic_config(const Grid& g, double dt, double t_end,
                          double snapshot_every) {
    SolverConfig cfg;
    cfg.grid = g;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.snapshot_every = snapshot_every;
    return cfg;
}
}  // namespace

TEST_CASE("cfl_limit formula") {
    CHECK(cfl_limit(Grid{0, 10, 101}, {1, 1, 0.5, 1.1}) ==
          doctest::Approx(0.005).epsilon(1e-10));
    CHECK(cfl_limit(Grid{0, 10, 101}, {4, 1, 0.5, 1.1}) ==
          doctest::Approx(0.00125).epsilon(1e-10));
    // Reference params: reaction bound 1/(4*1.21*2.1) = 0.0984 dominates only
    // for coarse grids; at dx=0.1 the diffusion bound wins.
    const double reaction = 1.0 / (4.0 * 1.21 * 2.1);
    CHECK(cfl_limit(Grid{0, 100, 101}, kRef) ==
          doctest::Approx(reaction).epsilon(1e-10));
}

TEST_CASE("step leaves equilibria unchanged") {
    Grid g{0, 10, 101};
    auto cfg = basic_config(g, 0.004, 1, 0.1);
    for (auto [u, v] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}) {
        auto s = homogeneous(g, u, v);
        auto next = step(s, kRef, cfg);
        CHECK(next.u == s.u);
        CHECK(next.v == s.v);
        CHECK(next.t == doctest::Approx(0.004));
    }
}

TEST_CASE("step rejects dt above the CFL limit") {
    Grid g{0, 10, 101};
    auto cfg = basic_config(g, 0.05, 1, 0.1);  // limit is 0.005
    auto s = homogeneous(g, 0.5, 0.5);
    CHECK_THROWS_AS(step(s, kRef, cfg), CflViolation);
}

TEST_CASE("homogeneous step equals one forward-Euler ODE step") {
    Grid g{0, 10, 101};
    const double dt = 0.004;
    auto cfg = basic_config(g, dt, 1, 0.1);
    auto s = homogeneous(g, 0.5, 0.5);
    auto next = step(s, kRef, cfg);
    auto [fu, fv] = reaction(kRef, 0.5, 0.5);
    for (int i = 0; i < g.n; ++i) {
        CHECK(std::abs(next.u[i] - (0.5 + dt * fu)) < 1e-14);
        CHECK(std::abs(next.v[i] - (0.5 + dt * fv)) < 1e-14);
    }
}

TEST_CASE("integrate with t_end=0 returns only the initial state") {
    Grid g{0, 10, 101};
    auto cfg = basic_config(g, 0.004, 0.0, 0.1);
    auto s = homogeneous(g, 0.3, 0.7);
    auto traj = integrate(s, kRef, cfg);
    REQUIRE(traj.snapshots.size() == 1);
    CHECK(traj.snapshots[0].u == s.u);
}

TEST_CASE("homogeneous ((1-a)/4, 1) converges to (1,0)") {
    Grid g{0, 10, 11};
    auto cfg = basic_config(g, 0.05, 80.0, 5.0);
    auto s = homogeneous(g, (1.0 - kRef.a) / 4.0, 1.0);
    auto traj = integrate(s, kRef, cfg);
    const auto& last = traj.snapshots.back();
    CHECK(last.t == doctest::Approx(80.0));
    CHECK(last.u[0] > 0.9);
    CHECK(last.v[0] < 0.1);
}

TEST_CASE("integrate is deterministic (bitwise)") {
    Grid g{-10, 30, 401};
    auto cfg = basic_config(g, 0.004, 2.0, 0.5);
    StatePair s;
    s.u = seeds::bump(g, 0.0, 3.0, 1.0);
    s.v = seeds::bump(g, 5.0, 3.0, 0.8);
    auto t1 = integrate(s, kRef, cfg);
    auto t2 = integrate(s, kRef, cfg);
    REQUIRE(t1.snapshots.size() == t2.snapshots.size());
    for (std::size_t k = 0; k < t1.snapshots.size(); ++k) {
        CHECK(t1.snapshots[k].u == t2.snapshots[k].u);
        CHECK(t1.snapshots[k].v == t2.snapshots[k].v);
    }
}

TEST_CASE("invariant region holds without clamping") {
    Grid g{-20, 20, 401};
    auto cfg = basic_config(g, 0.004, 5.0, 0.5);
    StatePair s;
    s.u = seeds::bump(g, -3.0, 5.0, 1.0);
    s.v = seeds::heaviside_like(g, 10.0);
    auto traj = integrate(s, kRef, cfg);
    for (const auto& snap : traj.snapshots)
        for (int i = 0; i < g.n; ++i) {
            CHECK(snap.u[i] >= -1e-12);
            CHECK(snap.u[i] <= 1.0 + 1e-12);
            CHECK(snap.v[i] >= -1e-12);
            CHECK(snap.v[i] <= 1.0 + 1e-12);
        }
}

TEST_CASE("comparison principle: ordered data stay ordered") {
    Grid g{-20, 40, 601};
    auto cfg = basic_config(g, 0.004, 20.0, 1.0);
    StatePair lo, hi;
    lo.u = seeds::bump(g, 0.0, 5.0, 0.6);
    lo.v = seeds::heaviside_like(g, 20.0);
    hi.u = lo.u;
    hi.v = lo.v;
    for (int i = 0; i < g.n; ++i) {
        hi.u[i] = std::min(1.0, hi.u[i] + 0.1 * seeds::bump(g, 2.0, 4.0, 1.0)[i]);
        hi.v[i] *= 0.9;
    }
    REQUIRE(competitive_leq(lo, hi));
    auto tl = integrate(lo, kRef, cfg);
    auto th = integrate(hi, kRef, cfg);
    CHECK(comparison_monitor(tl, th));
}

TEST_CASE("comparison monitor reports a swapped pair immediately") {
    Grid g{0, 10, 101};
    auto cfg = basic_config(g, 0.0, 0.0, 0.1);
    cfg.dt = 0.004;
    StatePair lo = homogeneous(g, 0.2, 0.8), hi = homogeneous(g, 0.6, 0.4);
    auto tl = integrate(lo, kRef, cfg);
    auto th = integrate(hi, kRef, cfg);
    CHECK(comparison_monitor(tl, th));        // correct order
    CHECK_FALSE(comparison_monitor(th, tl));  // swapped
}

TEST_CASE("temporal order: halving dt halves the error") {
    // Homogeneous run, so only the time discretization contributes.
    Grid g{0, 1, 3};
    const double T = 4.0;
    auto run = [&](double dt) {
        auto cfg = basic_config(g, dt, T, T);
        return integrate(homogeneous(g, 0.2, 0.9), kRef, cfg).snapshots.back();
    };
    auto s1 = run(0.04), s2 = run(0.02), s3 = run(0.01);
    const double e1 = std::abs(s1.u[0] - s2.u[0]) + std::abs(s1.v[0] - s2.v[0]);
    const double e2 = std::abs(s2.u[0] - s3.u[0]) + std::abs(s2.v[0] - s3.v[0]);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("spatial order: halving dx quarters the error") {
    // Smooth profile, tiny fixed dt so the spatial error dominates.
    const double T = 0.5, dt = 1e-4;
    auto run = [&](int n) {
        Grid g{-20, 20, n};
        StatePair s;
        s.u.resize(g.n);
        s.v.resize(g.n);
        for (int i = 0; i < g.n; ++i) {
            const double x = g.x(i);
            s.u[i] = 0.5 * (1.0 - std::tanh(x / 4.0));
            s.v[i] = 0.5 * (1.0 + std::tanh(x / 4.0));
        }
        auto cfg = basic_config(g, dt, T, T);
        return integrate(s, kRef, cfg).snapshots.back();
    };
    auto c1 = run(101), c2 = run(201), c3 = run(401);
    double e1 = 0, e2 = 0;
    for (int i = 0; i < 101; ++i) {
        e1 = std::max(e1, std::abs(c1.u[i] - c2.u[2 * i]));
        e2 = std::max(e2, std::abs(c2.u[2 * i] - c3.u[4 * i]));
    }
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.20));
}

TEST_CASE("config validation errors") {
    Grid g{0, 10, 101};
    auto s = homogeneous(g, 0.5, 0.5);
    auto cfg = basic_config(g, 0.004, 1.0, 0.0333);  // not a multiple of dt
    CHECK_THROWS_AS(integrate(s, kRef, cfg), ConfigError);
    auto bad = basic_config(Grid{0, 10, 51}, 0.004, 1.0, 0.1);
    CHECK_THROWS_AS(integrate(s, kRef, bad), GridMismatch);
}
