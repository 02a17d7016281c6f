#include "doctest.h"

#include <cmath>

#include "terrace/seeds.hpp"
#include "terrace/speeds.hpp"

using namespace terrace;

namespace {
const ModelParams kRef{1.0, 1.21, 0.5, 1.1};
const Grid kGrid{-50.0, 150.0, 2001};  // dx = 0.1
}  // namespace

TEST_CASE("bump: peak, support, range") {
    auto f = seeds::bump(kGrid, 0.0, 5.0, 1.0);
    double peak = 0.0, integral = 0.0;
    for (int i = 0; i < kGrid.n; ++i) {
        const double x = kGrid.x(i);
        peak = std::max(peak, f[i]);
        integral += f[i] * kGrid.dx();
        if (std::abs(x) >= 5.0) CHECK(f[i] == 0.0);
        CHECK(f[i] >= 0.0);
        CHECK(f[i] <= 1.0);
    }
    CHECK(peak == 1.0);  // node at the center (grid hits 0 exactly)
    CHECK(integral > 0.0);
    CHECK_THROWS_AS(seeds::bump(kGrid, -48.0, 5.0, 1.0), SupportOutsideGrid);
    CHECK_THROWS_AS(seeds::bump(kGrid, 0.0, 5.0, 1.5), DomainError);
}

TEST_CASE("heaviside_like: monotone, plateau, exact zero") {
    auto f = seeds::heaviside_like(kGrid, 0.0);
    for (int i = 1; i < kGrid.n; ++i) CHECK(f[i] <= f[i - 1]);
    for (int i = 0; i < kGrid.n; ++i) {
        const double x = kGrid.x(i);
        if (x <= -1.0) CHECK(f[i] == 1.0);
        if (x >= 0.0) CHECK(f[i] == 0.0);
    }
}

TEST_CASE("exp_tail: values and the weighted-boundedness hypothesis") {
    const double rate = 1.0, anchor = 10.0;  // anchor + 1/rate lands on a node
    auto f = seeds::exp_tail(kGrid, rate, anchor);
    for (int i = 0; i < kGrid.n; ++i) {
        const double x = kGrid.x(i);
        if (x <= anchor) CHECK(f[i] == 1.0);
        // weighted bound: f(x) e^{rate x} <= e^{rate anchor}
        CHECK(f[i] * std::exp(rate * x) <= std::exp(rate * anchor) * (1 + 1e-12));
    }
    // value e^{-1} one decay length past the anchor
    const int i = static_cast<int>(std::lround((anchor + 1.0 / rate - kGrid.x_min) / kGrid.dx()));
    CHECK(f[i] == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("terrace_pair: node-exact decay rates and ordering") {
    auto [u0, v0] = seeds::terrace_pair(kGrid, kRef, 3.0, 1.8);
    const double lam = speeds::big_lambda(1.8, 3.0, kRef.a);
    const double lam_v = speeds::lambda_v(3.0, kRef.r, kRef.d);
    for (int i = 0; i + 1 < kGrid.n; ++i) {
        const double x = kGrid.x(i);
        if (x > 1.0 && kGrid.x(i + 1) < 140.0) {
            // measured log-slope equals the constructed rate exactly
            if (u0[i + 1] > 0 && u0[i] < 1.0) {
                const double slope = -std::log(u0[i + 1] / u0[i]) / kGrid.dx();
                CHECK(slope == doctest::Approx(lam).epsilon(1e-10));
            }
            if (x > 21.0 && v0[i] < 1.0 && v0[i + 1] > 0) {
                const double slope = -std::log(v0[i + 1] / v0[i]) / kGrid.dx();
                CHECK(slope == doctest::Approx(lam_v).epsilon(1e-10));
            }
        }
        CHECK(u0[i] <= 1.0);
        CHECK(v0[i] <= 1.0);
    }
    // u0 never exceeds the v-free KPP super-solution min(1, e^{-Lambda x}).
    for (int i = 0; i < kGrid.n; ++i)
        CHECK(u0[i] <= std::min(1.0, std::exp(-lam * kGrid.x(i))) * (1 + 1e-12));
    CHECK_THROWS_AS(seeds::terrace_pair(kGrid, kRef, 2.3, 1.5), NotAdmissible);
}

TEST_CASE("llw_background: v is identically one, u compact") {
    auto [u0, v0] = seeds::llw_background(kGrid, kRef);
    for (int i = 0; i < kGrid.n; ++i) CHECK(v0[i] == 1.0);
    int support = 0;
    for (int i = 0; i < kGrid.n; ++i)
        if (u0[i] > 0.0) ++support;
    CHECK(support > 0);
    CHECK(support < kGrid.n / 4);          // compact, near the left end
    CHECK(u0[kGrid.n - 1] == 0.0);
}
