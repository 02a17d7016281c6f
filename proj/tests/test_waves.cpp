#include "doctest.h"

#include <cmath>
#include <vector>

#include "terrace/fronts.hpp"
#include "terrace/waves.hpp"

using namespace terrace;

namespace {
const ModelParams kRef{1.0, 1.21, 0.5, 1.1};

// Linear interpolation on the profile's xi grid; clamps to the end values.
double interp(const std::vector<double>& xs, const std::vector<double>& ys,
              double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    std::size_t lo = 0, hi = xs.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (xs[mid] <= x ? lo : hi) = mid;
    }
    const double w = (x - xs[lo]) / (xs[lo + 1] - xs[lo]);
    return (1.0 - w) * ys[lo] + w * ys[lo + 1];
}
}  // namespace

TEST_CASE("uniqueness_condition: d <= 2 + r/(1-a), non-strict") {
    CHECK(waves::uniqueness_condition(kRef));
    CHECK(waves::uniqueness_condition({4.0, 1.0, 0.5, 1.1}));        // equality
    CHECK_FALSE(waves::uniqueness_condition({4.01, 1.0, 0.5, 1.1}));
}

TEST_CASE("solve_profile: connection, anchor, monotonicity, decay rates") {
    auto w = waves::solve_profile(1.8, kRef, 0.0, 150.0, 6000);
    CHECK(w.residual <= 1e-10);
    CHECK(w.phi_decreasing);
    CHECK(w.psi_increasing);
    CHECK(w.phi.front() == 1.0);
    CHECK(w.psi.front() == 0.0);
    CHECK(w.phi.back() == 0.0);
    CHECK(w.psi.back() == 1.0);
    for (std::size_t i = 0; i < w.phi.size(); ++i) {
        CHECK(w.phi[i] >= -1e-12);
        CHECK(w.phi[i] <= 1.0 + 1e-12);
        CHECK(w.psi[i] >= -1e-12);
        CHECK(w.psi[i] <= 1.0 + 1e-12);
    }
    // Re-anchored: psi(0) = 1/2.
    CHECK(interp(w.xi, w.psi, 0.0) == doctest::Approx(0.5).epsilon(1e-6));
    // Tail decay matches the characteristic roots: the slow root of
    // lambda^2 - c lambda + (1-a) at +infty, and the v rate behind the wave
    // at -infty.
    CHECK(std::abs(w.measured_decay_plus - 0.3432235637169978) <
          0.02 * 0.3432235637169978);
    CHECK(std::abs(w.measured_decay_minus - 0.06488341264631559) <
          0.05 * 0.06488341264631559);
}

TEST_CASE("solve_profile: independence from the initial guess") {
    const int mesh = 4000;
    const double X = 100.0;
    auto w1 = waves::solve_profile(1.8, kRef, 0.0, X, mesh);
    // A ramp centered three units to the right must land on the same
    // discrete solution.
    std::vector<double> phi_g(mesh + 1), psi_g(mesh + 1);
    for (int i = 0; i <= mesh; ++i) {
        const double xi = -X + 2.0 * X * i / mesh;
        phi_g[i] = 0.5 * (1.0 - std::tanh(0.5 * (xi - 3.0)));
        psi_g[i] = 0.5 * (1.0 + std::tanh(0.5 * (xi - 3.0)));
    }
    auto w2 = waves::solve_profile(1.8, kRef, 0.0, X, mesh, &phi_g, &psi_g);
    double diff = 0.0;
    for (double x = -60.0; x <= 60.0; x += 0.5) {
        diff = std::max(diff, std::abs(interp(w1.xi, w1.phi, x) -
                                       interp(w2.xi, w2.phi, x)));
        diff = std::max(diff, std::abs(interp(w1.xi, w1.psi, x) -
                                       interp(w2.xi, w2.psi, x)));
    }
    CHECK(diff < 1e-6);
}

TEST_CASE("solve_profile: delta system endpoints and perturbed decay") {
    const double delta = 0.05;
    auto w = waves::solve_profile(1.8, kRef, delta, 120.0, 4800);
    CHECK(w.phi.front() == doctest::Approx(1.05).epsilon(1e-14));
    CHECK(w.psi.back() == doctest::Approx(0.90).epsilon(1e-14));
    CHECK(w.phi_decreasing);
    CHECK(w.psi_increasing);
    // The phi tail of the delta system linearizes about (0, 1-2delta) with
    // reaction 1 + delta - a (1-2delta); the decay rate is the smaller root
    // of lambda^2 - c lambda + (1 + delta - a (1-2delta)).
    const double react = 1.0 + delta - kRef.a * (1.0 - 2.0 * delta);
    const double expected = (1.8 - std::sqrt(1.8 * 1.8 - 4.0 * react)) / 2.0;
    CHECK(std::abs(w.measured_decay_plus - expected) < 0.02 * expected);
}

TEST_CASE("solve_profile: argument validation") {
    CHECK_THROWS_AS(waves::solve_profile(1.2, kRef, 0.0, 100.0, 2000),
                    SubcriticalSpeed);  // below 2 sqrt(1-a) = 1.4142
    CHECK_THROWS_AS(waves::solve_profile(1.8, kRef, 0.5, 100.0, 2000),
                    DeltaTooLarge);
    CHECK_THROWS_AS(waves::solve_profile(1.8, kRef, 0.0, -1.0, 2000),
                    DomainError);
    CHECK_THROWS_AS(waves::solve_profile(1.8, kRef, 0.0, 100.0, 8),
                    DomainError);
}

TEST_CASE("measure_decay: band validation") {
    auto w = waves::solve_profile(1.8, kRef, 0.0, 100.0, 4000);
    CHECK_THROWS_AS(waves::measure_decay(w, speeds::Side::plus_inf, 30.0, 20.0),
                    BandTooNarrow);
    CHECK_THROWS_AS(
        waves::measure_decay(w, speeds::Side::plus_inf, 50.0, 99.0),
        BandTooNarrow);  // inside the 10% edge margin
    CHECK_THROWS_AS(
        waves::measure_decay(w, speeds::Side::plus_inf, -50.0, -49.8),
        TooFewSamples);
}

TEST_CASE("profile is a traveling wave of the time-dependent system") {
    auto w = waves::solve_profile(1.8, kRef, 0.0, 150.0, 6000);
    Grid g{-40.0, 140.0, 1801};
    SolverConfig cfg;
    cfg.grid = g;
    cfg.dt = 0.004;
    cfg.t_end = 30.0;
    cfg.snapshot_every = 30.0;
    StatePair s0;
    s0.u.resize(g.n);
    s0.v.resize(g.n);
    const double offset = 30.0;
    for (int i = 0; i < g.n; ++i) {
        s0.u[i] = interp(w.xi, w.phi, g.x(i) - offset);
        s0.v[i] = interp(w.xi, w.psi, g.x(i) - offset);
    }
    auto traj = integrate(s0, kRef, cfg);
    const auto& last = traj.snapshots.back();
    auto p0 = fronts::level_position(g, s0.u, 0.5);
    auto p1 = fronts::level_position(g, last.u, 0.5);
    REQUIRE(p0);
    REQUIRE(p1);
    const double speed = (*p1 - *p0) / 30.0;
    CHECK(speed == doctest::Approx(1.8).epsilon(0.01));
    // Shape is preserved: the final state matches the translated profile.
    double diff = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (x < -30.0 || x > 130.0) continue;  // skip the boundary layers
        diff = std::max(diff,
                        std::abs(last.u[i] -
                                 interp(w.xi, w.phi, x - offset - *p1 + *p0)));
        diff = std::max(diff,
                        std::abs(last.v[i] -
                                 interp(w.xi, w.psi, x - offset - *p1 + *p0)));
    }
    CHECK(diff < 5e-3);
}

TEST_CASE("estimate_c_llw: reference parameters give 2 sqrt(1-a)") {
    auto cfg = waves::default_llw_config(kRef, 150.0);
    const double c = waves::estimate_c_llw(kRef, 0.0, cfg);
    CHECK(std::abs(c - 1.4142135623730951) < 0.02 * 1.4142135623730951);
}
