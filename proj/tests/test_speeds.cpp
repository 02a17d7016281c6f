#include "doctest.h"

#include <cmath>
#include <vector>

#include "terrace/speeds.hpp"

using namespace terrace;
using namespace terrace::speeds;

namespace {
const ModelParams kRef{1.0, 1.21, 0.5, 1.1};   // accelerated regime
const ModelParams kLlw{1.0, 9.0, 0.5, 1.1};    // linearly determined regime
const ModelParams kExt{1.0, 0.25, 0.5, 1.1};   // extinction regime
const double kCllwRef = 2.0 * std::sqrt(0.5);  // 1.41421356...

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
        out.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
    return out;
}
}  // namespace

TEST_CASE("f: anchor values") {
    CHECK(f_of(2.0, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
    // At the left endpoint the discriminant vanishes.
    CHECK(f_of(2.0 * std::sqrt(0.5), 0.5) ==
          doctest::Approx(2.8284271247461903).epsilon(1e-7));
    CHECK(f_of(3.0, 0.5) == doctest::Approx(1.7684622513085044).epsilon(1e-13));
    CHECK_THROWS_AS(f_of(1.0, 0.5), DomainError);
}

TEST_CASE("f is strictly decreasing onto its range") {
    const double lo = 2.0 * std::sqrt(0.5);
    double prev = f_of(lo, 0.5);
    for (double c : log_spaced(lo * 1.0001, 50.0, 60)) {
        const double val = f_of(c, 0.5);
        CHECK(val < prev);
        CHECK(val > 2.0 * std::sqrt(0.5));          // > 2 sqrt(a)
        CHECK(val <= 2.8284271247461903 * (1 + 1e-12));
        prev = val;
    }
}

TEST_CASE("f_inverse: anchors and round trips") {
    CHECK(f_inverse(2.0, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f_inverse(2.8284271247461903, 0.5) ==
          doctest::Approx(2.0 * std::sqrt(0.5)).epsilon(1e-13));
    CHECK(f_inverse(2.2, 0.5) ==
          doctest::Approx(1.6655036280997533).epsilon(1e-13));
    for (double c : log_spaced(2.0 * std::sqrt(0.5) * 1.0001, 30.0, 50)) {
        const double rt = f_inverse(f_of(c, 0.5), 0.5);
        CHECK(std::abs(rt - c) / c < 1e-12);
    }
    for (double a : {0.1, 0.5, 0.9})
        for (double ct : {2.0 * std::sqrt(a) * 1.01, 2.0 * std::sqrt(a) + 0.3}) {
            const double c = f_inverse(ct, a);
            CHECK(std::abs(f_of(c, a) - ct) / ct < 1e-12);
        }
    CHECK_THROWS_AS(f_inverse(1.0, 0.5), DomainError);   // below 2 sqrt(a)
    CHECK_THROWS_AS(f_inverse(3.0, 0.5), DomainError);   // above the sup
}

TEST_CASE("a_delta: value and monotone decrease") {
    CHECK(a_delta(0.5, 0.0) == 0.5);
    CHECK(a_delta(0.5, 0.1) == doctest::Approx(0.36363636363636365).epsilon(1e-14));
    double prev = a_delta(0.7, 0.0);
    for (double d = 0.05; d < 0.5; d += 0.05) {
        const double val = a_delta(0.7, d);
        CHECK(val < prev);
        prev = val;
    }
    CHECK_THROWS_AS(a_delta(0.5, 0.5), DomainError);
}

TEST_CASE("lambda_u: double root, reference value, quadratic residual") {
    CHECK(lambda_u(2.0 * std::sqrt(0.5), 0.5) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-7));
    CHECK(lambda_u(1.8, 0.5) == doctest::Approx(0.3432235637169978).epsilon(1e-13));
    // delta increases lambda at fixed c.
    CHECK(lambda_u(1.8, 0.5, 0.05) > lambda_u(1.8, 0.5, 0.0));
    for (double c : log_spaced(1.5, 40.0, 50)) {
        const double l = lambda_u(c, 0.5);
        CHECK(std::abs(l * l - c * l + 0.5) < 1e-12);
        CHECK(l <= 0.5 * c);  // smaller root
    }
    CHECK_THROWS_AS(lambda_u(1.0, 0.5), DomainError);
}

TEST_CASE("lambda_u_inverse: endpoint and round trips") {
    CHECK(lambda_u_inverse(std::sqrt(0.5), 0.5) ==
          doctest::Approx(2.0 * std::sqrt(0.5)).epsilon(1e-14));
    CHECK(lambda_u_inverse(lambda_u(1.8, 0.5), 0.5) ==
          doctest::Approx(1.8).epsilon(1e-12));
    // (lambda_delta^{-1} o lambda)(c) > c: the perturbed speed moves right.
    CHECK(lambda_u_inverse(lambda_u(1.8, 0.5), 0.5, 0.05) > 1.8);
    CHECK_THROWS_AS(lambda_u_inverse(0.8, 0.5), DomainError);  // above sqrt(1-a)
}

TEST_CASE("lambda_v: double root, value, monotone decrease, residual") {
    CHECK(lambda_v(2.2, 1.21, 1.0) == doctest::Approx(1.1).epsilon(1e-7));
    CHECK(lambda_v(3.0, 1.21, 1.0) ==
          doctest::Approx(0.48019609728144297).epsilon(1e-13));
    CHECK(lambda_v(3.0, 1.21, 1.0) > lambda_v(3.5, 1.21, 1.0));
    for (double c : log_spaced(2.3, 40.0, 50)) {
        const double l = lambda_v(c, 1.21, 1.0);
        CHECK(std::abs(l * l - c * l + 1.21) < 1e-12);
    }
    CHECK_THROWS_AS(lambda_v(2.0, 1.21, 1.0), DomainError);
}

TEST_CASE("big_lambda: vanishing discriminant at ct=f(c), value, residual") {
    const double fc = f_of(1.8, 0.5);
    CHECK(big_lambda(1.8, fc, 0.5) == doctest::Approx(0.5 * fc).epsilon(1e-7));
    CHECK(big_lambda(1.8, 3.0, 0.5) ==
          doctest::Approx(0.5845046567351625).epsilon(1e-13));
    for (double c : {1.8, 2.0, 2.5}) {
        const double l = lambda_u(c, 0.5);
        for (double ct : {f_of(c, 0.5) + 0.05, 3.0, 5.0, 9.0}) {
            if (ct < c) continue;
            const double L = big_lambda(c, ct, 0.5);
            const double q = l * (ct - c) + 1.0;
            CHECK(std::abs(L * L - ct * L + q) < 1e-12);
            CHECK(L <= 0.5 * ct);
            CHECK(L > l);  // Lambda dominates lambda on the admissible set
        }
    }
    CHECK_THROWS_AS(big_lambda(1.8, 1.9, 0.5), DomainError);  // ct < f(c)
}

TEST_CASE("f_delta: reduction, ordering, sign identity") {
    for (double c : {1.5, 1.8, 2.4})
        CHECK(f_delta(c, 0.5, 0.0) == f_of(c, 0.5));
    // delta -> f_delta(c) is increasing: the limit delta -> 0 is from above.
    CHECK(f_delta(1.8, 0.5, 0.05) > f_of(1.8, 0.5));
    CHECK(f_delta(1.8, 0.5, 0.02) < f_delta(1.8, 0.5, 0.05));
    // (ct - f_d(c))(ct - f_d(c) + 4 sqrt(a_d)) = ct^2 - 4 (l_d(c)(ct-c) + 1)
    const double c = 1.8, ct = 2.5, delta = 0.05;
    const double fd = f_delta(c, 0.5, delta);
    const double ad = a_delta(0.5, delta);
    const double lhs = (ct - fd) * (ct - fd + 4.0 * std::sqrt(ad));
    const double rhs =
        ct * ct - 4.0 * (lambda_u(c, 0.5, delta) * (ct - c) + 1.0);
    CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("heuristic consistency: ct >= f(c) iff the w-discriminant is >= 0") {
    for (double c : {1.6, 1.8, 2.2, 3.0}) {
        const double fc = f_of(c, 0.5);
        const double l = lambda_u(c, 0.5);
        for (double dt : {-1.0, -0.3, -0.05, 0.05, 0.5, 2.0}) {
            const double ct = fc + dt;
            if (ct - fc <= -4.0 * std::sqrt(0.5)) continue;
            const double disc = ct * ct - 4.0 * (l * (ct - c) + 1.0);
            CHECK((ct >= fc) == (disc >= -1e-12));
        }
    }
}

TEST_CASE("c_acc matches f_inverse and exceeds 2 sqrt(1-a)") {
    CHECK(c_acc(1.21, 1.0, 0.5) ==
          doctest::Approx(1.6655036280997533).epsilon(1e-13));
    CHECK(std::abs(c_acc(1.21, 1.0, 0.5) - f_inverse(2.2, 0.5)) < 1e-12);
    for (double a : {0.2, 0.5, 0.8}) {
        // pick rd so that 2 < 2 sqrt(rd) < f(2 sqrt(1-a))
        const double cv = 0.5 * (2.0 + f_of(2.0 * std::sqrt(1.0 - a), a));
        const double rd = cv * cv / 4.0;
        CHECK(c_acc(rd, 1.0, a) > 2.0 * std::sqrt(1.0 - a));
        CHECK(c_acc(rd, 1.0, a) < 2.0);
    }
    // rd = 1 puts 2 sqrt(rd) = 2 = f(2): the boundary of the range at c = 2.
    CHECK(c_acc(1.0, 1.0, 0.5) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lambda_minus_inf: c=0 reduction, value, positivity") {
    const ModelParams& p = kRef;
    CHECK(lambda_minus_inf(0.0, p) ==
          doctest::Approx(std::sqrt(p.r * (p.b - 1.0) / p.d)).epsilon(1e-13));
    CHECK(lambda_minus_inf(1.8, p) ==
          doctest::Approx(0.06488341264631559).epsilon(1e-13));
    for (double c : log_spaced(0.1, 20.0, 30))
        for (double b : {1.01, 1.5, 4.0}) {
            ModelParams q = p;
            q.b = b;
            CHECK(lambda_minus_inf(c, q) > 0.0);
        }
}

TEST_CASE("decay_classify: reference branch at +inf") {
    const auto cls = decay_classify(1.8, kRef, Side::plus_inf, kCllwRef);
    CHECK(cls.case_label == "2a-i");
    REQUIRE(cls.rates.size() == 3);
    CHECK(cls.rates[0].second == doctest::Approx(2.3212670403551896).epsilon(1e-13));
    CHECK(cls.rates[2].second == doctest::Approx(0.3432235637169978).epsilon(1e-13));
    // Super-critical waves keep the slow decay.
    CHECK(cls.phi_rate == doctest::Approx(0.3432235637169978).epsilon(1e-13));
    CHECK(cls.psi_rate == doctest::Approx(0.3432235637169978).epsilon(1e-13));
}

TEST_CASE("decay_classify: c = 2 sqrt(1-a) selects the degenerate branches") {
    const auto cls =
        decay_classify(2.0 * std::sqrt(0.5), kRef, Side::plus_inf, kCllwRef);
    CHECK(cls.case_label.substr(0, 2) == "2b");
}

TEST_CASE("decay_classify: minus side reproduces lambda_minus_inf") {
    const auto cls = decay_classify(1.8, kRef, Side::minus_inf, kCllwRef);
    CHECK(cls.psi_rate ==
          doctest::Approx(lambda_minus_inf(1.8, kRef)).epsilon(1e-14));
    // l2m = 0.0649 < l1m = 0.4454: the v tail drags the u tail (case 1b).
    CHECK(cls.case_label == "1b");
    // Determinism: recomputing reproduces the class.
    const auto again = decay_classify(1.8, kRef, Side::minus_inf, kCllwRef);
    CHECK(again.case_label == cls.case_label);
    CHECK(again.phi_rate == cls.phi_rate);
}

TEST_CASE("linear determinacy: reference params and boundary instances") {
    const auto ld = linear_determinacy(kRef);
    CHECK(ld.llw_condition);
    REQUIRE(ld.c_llw_if_determined.has_value());
    CHECK(*ld.c_llw_if_determined == doctest::Approx(kCllwRef).epsilon(1e-14));

    // d=2 with ab <= 1 keeps the LLW left side nonpositive.
    const auto ld2 = linear_determinacy({2.0, 3.0, 0.4, 2.0});
    CHECK(ld2.llw_condition);

    // Huang-true / LLW-false instance (d > 2 kills the LLW condition).
    const auto ld3 = linear_determinacy({2.2, 1.0, 0.2, 1.5});
    CHECK_FALSE(ld3.llw_condition);
    CHECK(ld3.huang_condition);
    REQUIRE(ld3.c_llw_if_determined.has_value());
    CHECK(*ld3.c_llw_if_determined ==
          doctest::Approx(2.0 * std::sqrt(0.8)).epsilon(1e-14));

    // d = 1 uses the continuous limit: the max reduces to a.
    const auto ld4 = linear_determinacy({1.0, 50.0, 0.5, 1.05});
    CHECK(ld4.huang_condition ==
          (((2.0 - 1.0) * 0.5 + 50.0) / (50.0 * 1.05) >= 0.5));
}

TEST_CASE("predict_trichotomy: the three regimes") {
    const auto acc = predict_trichotomy(kRef, kCllwRef);
    CHECK(acc.case_id == TrichotomyCase::accelerated);
    CHECK(acc.c1_star == doctest::Approx(2.2).epsilon(1e-13));
    CHECK(acc.c2_star == doctest::Approx(1.6655036280997533).epsilon(1e-13));
    CHECK(acc.linearly_determined);

    const auto llw = predict_trichotomy(kLlw, kCllwRef);
    CHECK(llw.case_id == TrichotomyCase::llw);
    CHECK(llw.c1_star == doctest::Approx(6.0).epsilon(1e-13));
    CHECK(llw.c2_star == doctest::Approx(kCllwRef).epsilon(1e-13));

    const auto ext = predict_trichotomy(kExt, kCllwRef);
    CHECK(ext.case_id == TrichotomyCase::extinction);
    CHECK(ext.c2_star == 2.0);
    CHECK(std::isnan(ext.c1_star));
}

TEST_CASE("predict_trichotomy: boundary equalities are flagged, not classified") {
    CHECK_THROWS_AS(predict_trichotomy({1.0, 1.0, 0.5, 1.1}, kCllwRef),
                    BoundaryCase);  // 2 sqrt(rd) = 2
    const double rd = std::pow(0.5 * f_of(kCllwRef, 0.5), 2);
    CHECK_THROWS_AS(predict_trichotomy({1.0, rd, 0.5, 1.1}, kCllwRef),
                    BoundaryCase);  // 2 sqrt(rd) = f(c_llw)
}

TEST_CASE("admissible: interior, violated, diagonal") {
    CHECK(admissible(3.0, 1.8, kRef, kCllwRef) == Admissibility::interior);
    CHECK(admissible(2.3, 1.5, kRef, kCllwRef) ==
          Admissibility::lower_bound_violated);  // f(1.5)=2.414... > 2.3
    for (double c : {2.2, 2.5, 4.0})
        CHECK(admissible(c, c, kRef, kCllwRef) == Admissibility::boundary);
    CHECK_THROWS_AS(admissible(2.0, 1.8, kRef, kCllwRef), DomainError);
    CHECK_THROWS_AS(admissible(3.0, 1.2, kRef, kCllwRef), DomainError);
}

TEST_CASE("Estimate_speed_w inequality on sampled admissible pairs") {
    // (Lambda(c2,c1)^2 + 1) / Lambda(c2,c1) < c1
    for (double c2 : {1.5, 1.8, 2.0, 2.6}) {
        for (double c1 : {3.0, 3.5, 4.0, 6.0, 10.0}) {
            if (!(c1 > c2 && c1 > f_of(c2, 0.5))) continue;
            const double L = big_lambda(c2, c1, 0.5);
            CHECK((L * L + 1.0) / L < c1);
        }
    }
}

TEST_CASE("perturbed terrace speed: identity at delta=0, bounds, convergence") {
    CHECK(perturbed_speeds_terrace(1.8, 3.0, 0.5, 0.0) == 1.8);
    const double c2d = perturbed_speeds_terrace(1.8, 3.0, 0.5, 0.02);
    CHECK(c2d > 1.8);
    CHECK(c2d < 3.0);
    CHECK(big_lambda(c2d, 3.0, 0.5, 0.02) < big_lambda(1.8, 3.0, 0.5, 0.0));
    double prev = perturbed_speeds_terrace(1.8, 3.0, 0.5, 0.1);
    for (double d : {0.05, 0.01}) {
        const double cur = perturbed_speeds_terrace(1.8, 3.0, 0.5, d);
        CHECK(cur < prev);
        CHECK(cur > 1.8);
        prev = cur;
    }
    CHECK(perturbed_speeds_terrace(1.8, 3.0, 0.5, 0.001) ==
          doctest::Approx(1.8).epsilon(1e-2));
}

TEST_CASE("perturbed compact speeds: root residual, ordering, convergence") {
    const double c2 = 1.8;  // inside (f^{-1}(2.2), 2) = (1.6655, 2)
    const double target = big_lambda(c2, 2.2, 0.5, 0.0);
    double prev_gap = 1e9;
    for (double delta : {0.05, 0.02, 0.01}) {
        const auto [c1d, c2d] = perturbed_speeds_compact(c2, kRef, delta);
        CHECK(c2 < c2d);
        CHECK(c2d < c1d);
        CHECK(c1d < 2.2);
        // Residual of the defining equation Lambda_delta(c2d, c1d) = target.
        const double q =
            lambda_u(c2d, 0.5, delta) * (c1d - c2d) + 1.0;
        const double L = 0.5 * (c1d - std::sqrt(c1d * c1d - 4.0 * q));
        CHECK(std::abs(L - target) < 1e-10);
        const double gap = std::abs(c2d - c2) + std::abs(c1d - 2.2);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK_THROWS_AS(perturbed_speeds_compact(1.8, kRef, 0.4), DeltaTooLarge);
}
