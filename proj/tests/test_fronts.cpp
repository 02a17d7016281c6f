#include "doctest.h"

#include <cmath>

#include "terrace/fronts.hpp"
#include "terrace/seeds.hpp"

using namespace terrace;
using namespace terrace::fronts;

namespace {
const ModelParams kRef{1.0, 1.21, 0.5, 1.1};
}

TEST_CASE("level_position: constant field has no crossing") {
    Grid g{0, 10, 11};
    std::vector<double> ones(11, 1.0);
    CHECK_FALSE(level_position(g, ones, 0.5).has_value());
}

TEST_CASE("level_position: linear ramp interpolates exactly") {
    Grid g{0, 10, 11};
    std::vector<double> f(11);
    for (int i = 0; i <= 10; ++i) f[i] = 1.0 - g.x(i) / 10.0;
    auto pos = level_position(g, f, 0.5);
    REQUIRE(pos.has_value());
    CHECK(*pos == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("level_position: translation covariance by whole nodes") {
    Grid g{0, 40, 401};
    auto f = seeds::heaviside_like(g, 10.0);
    auto shifted = f;
    const int k = 30;  // shift right by 30 nodes = 3.0
    for (int i = g.n - 1; i >= k; --i) shifted[i] = f[i - k];
    for (int i = 0; i < k; ++i) shifted[i] = 1.0;
    auto p0 = level_position(g, f, 0.5);
    auto p1 = level_position(g, shifted, 0.5);
    REQUIRE(p0);
    REQUIRE(p1);
    CHECK(*p1 - *p0 == doctest::Approx(k * g.dx()).epsilon(1e-12));
}

TEST_CASE("level_position: monotone fields order their level sets") {
    Grid g{0, 40, 401};
    auto f = seeds::heaviside_like(g, 20.0);
    auto lo = level_position(g, f, 0.2);
    auto hi = level_position(g, f, 0.8);
    REQUIRE(lo);
    REQUIRE(hi);
    CHECK(*lo >= *hi);
}

TEST_CASE("fit_speed: exact linear track") {
    FrontTrack track;
    for (int i = 0; i <= 40; ++i) {
        track.times.push_back(i * 0.5);
        track.positions.push_back(2.0 * (i * 0.5) + 5.0);
    }
    auto rep = fit_speed(track, 0.5);
    CHECK(std::abs(rep.fitted_speed - 2.0) < 1e-12);
    CHECK(rep.rms_residual < 1e-12);
    CHECK(std::abs(rep.intercept - 5.0) < 1e-10);
}

TEST_CASE("fit_speed: logarithmic drift stays inside the fit window bound") {
    // positions = c t - 1.5 ln t with c = 2.2, samples on [100, 200]
    FrontTrack track;
    for (int i = 0; i <= 100; ++i) {
        const double t = 100.0 + i;
        track.times.push_back(t);
        track.positions.push_back(2.2 * t - 1.5 * std::log(t));
    }
    auto rep = fit_speed(track, 1.0, 2.2);
    CHECK(rep.fitted_speed > 2.17);
    CHECK(rep.fitted_speed < 2.20);
    REQUIRE(rep.relative_error.has_value());
    CHECK(*rep.relative_error < 0.03);
}

TEST_CASE("fit_speed: rejects unordered or sparse tracks") {
    FrontTrack bad;
    bad.times = {2.0, 1.0, 3.0};
    bad.positions = {0.0, 1.0, 2.0};
    CHECK_THROWS_AS(fit_speed(bad, 0.5), TooFewSamples);
    FrontTrack sparse;
    for (int i = 0; i < 5; ++i) {
        sparse.times.push_back(i);
        sparse.positions.push_back(i);
    }
    CHECK_THROWS_AS(fit_speed(sparse, 0.5), TooFewSamples);
}

TEST_CASE("plateau_extent: exact constant state covers the right half") {
    Grid g{-10, 10, 201};
    StatePair s;
    s.u.assign(g.n, 1.0);
    s.v.assign(g.n, 0.0);
    auto ext = plateau_extent(g, s, 1.0, 0.0, 0.1);
    REQUIRE(ext);
    CHECK(ext->second == doctest::Approx(10.0));
    CHECK_FALSE(plateau_extent(g, s, 0.0, 1.0, 0.1).has_value());
}

TEST_CASE("wedge_check: degenerate geometry raises EmptyWedge") {
    Grid g{0, 10, 11};
    Trajectory traj;
    traj.config.grid = g;
    StatePair s;
    s.t = 10.0;
    s.u.assign(g.n, 0.0);
    s.v.assign(g.n, 1.0);
    traj.snapshots.push_back(s);
    CHECK(wedge_check(traj, 0.0, 0.8, 0.1, 0.05));
    CHECK_FALSE(wedge_check(traj, 0.0, 0.8, 0.1, 0.0));  // strict zero unattainable
    CHECK_THROWS_AS(wedge_check(traj, 2.0, 1.0, 0.5, 0.05), EmptyWedge);
}

TEST_CASE("simulated KPP front: v alone spreads at 2 sqrt(rd)") {
    // u == 0 decouples v into the scalar KPP equation with speed 2.2.
    Grid g{-40, 230, 2701};
    SolverConfig cfg;
    cfg.grid = g;
    cfg.dt = 0.005;
    cfg.t_end = 80.0;
    cfg.snapshot_every = 1.0;
    StatePair s;
    s.u.assign(g.n, 0.0);
    s.v = seeds::bump(g, 0.0, 5.0, 1.0);
    auto traj = integrate(s, kRef, cfg);
    auto track = track_front(traj, Field::v, 0.5);
    auto rep = fit_speed(track, 0.5, kRef.kpp_v_speed());
    CHECK(*rep.relative_error < 0.02);
    // position/T lands in the Bramson-shifted window
    const double final_pos = track.positions.back();
    CHECK(final_pos / 80.0 > 2.2 * 0.95);
    CHECK(final_pos / 80.0 < 2.2 * 1.02);
}

TEST_CASE("track_front guards the truncated boundary") {
    Grid g{0, 10, 101};
    Trajectory traj;
    traj.config.grid = g;
    StatePair s;
    s.t = 0.0;
    s.u = seeds::heaviside_like(g, 9.9);  // front well inside the guard band
    s.v.assign(g.n, 0.0);
    traj.snapshots.push_back(s);
    CHECK_THROWS_AS(track_front(traj, Field::u, 0.5), DomainEscape);
    CHECK_NOTHROW(track_front(traj, Field::u, 0.5, false));
}
