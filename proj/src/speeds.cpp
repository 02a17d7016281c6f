#include "terrace/speeds.hpp"

#include <cmath>
#include <limits>

namespace terrace {
namespace speeds {

namespace {

constexpr double kRelTol = 1e-12;

// Guarded square root: clamps tiny negative arguments (roundoff at double
// roots) to zero, throws for genuinely negative discriminants.
double sqrt_disc(double disc, double scale, const char* what) {
    if (disc < 0.0) {
        if (disc > -kRelTol * std::max(1.0, scale)) return 0.0;
        throw DomainError(what);
    }
    return std::sqrt(disc);
}

}  // namespace

double f_of(double c, double a) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("f requires a in (0,1)");
    const double disc = c * c - 4.0 * (1.0 - a);
    return c - sqrt_disc(disc, c * c, "f requires c >= 2 sqrt(1-a)") +
           2.0 * std::sqrt(a);
}

double f_inverse(double ct, double a) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("f_inverse requires a in (0,1)");
    const double lo = 2.0 * std::sqrt(a);
    const double hi = 2.0 * (std::sqrt(1.0 - a) + std::sqrt(a));
    if (!(ct > lo) || ct > hi * (1.0 + kRelTol))
        throw DomainError("f_inverse requires ct in (2 sqrt(a), 2(sqrt(1-a)+sqrt(a))]");
    return 0.5 * ct - std::sqrt(a) + 2.0 * (1.0 - a) / (ct - lo);
}

double a_delta(double a, double delta) {
    if (!(delta >= 0.0 && delta < 0.5))
        throw DomainError("a_delta requires delta in [0, 1/2)");
    return (1.0 - 2.0 * delta) * a / (1.0 + delta);
}

double lambda_u(double c, double a, double delta) {
    const double ad = a_delta(a, delta);
    const double disc = c * c - 4.0 * (1.0 - ad);
    return 0.5 * (c - sqrt_disc(disc, c * c,
                                "lambda_u requires c >= 2 sqrt(1-a_delta)"));
}

double lambda_u_inverse(double l, double a, double delta) {
    const double ad = a_delta(a, delta);
    const double top = std::sqrt(1.0 - ad);
    if (!(l > 0.0) || l > top * (1.0 + kRelTol))
        throw DomainError("lambda_u_inverse requires l in (0, sqrt(1-a_delta)]");
    return l + (1.0 - ad) / l;
}

double lambda_v(double c, double r, double d) {
    const double disc = c * c - 4.0 * r * d;
    return (c - sqrt_disc(disc, c * c, "lambda_v requires c >= 2 sqrt(rd)")) /
           (2.0 * d);
}

double f_delta(double c, double a, double delta) {
    const double ad = a_delta(a, delta);
    const double disc = c * c - 4.0 * (1.0 - ad);
    return c - sqrt_disc(disc, c * c, "f_delta requires c >= 2 sqrt(1-a_delta)") +
           2.0 * std::sqrt(ad);
}

namespace {

// Lambda_delta without the ct >= max(c, f_delta(c)) guard, for internal
// root-finding where c may exceed ct; only the discriminant must be real.
double big_lambda_raw(double lam_delta_c, double c, double ct) {
    const double q = lam_delta_c * (ct - c) + 1.0;
    const double disc = ct * ct - 4.0 * q;
    return 0.5 * (ct - sqrt_disc(disc, ct * ct,
                                 "Lambda: negative discriminant"));
}

}  // namespace

double big_lambda(double c, double ct, double a, double delta) {
    if (ct < c * (1.0 - kRelTol))
        throw DomainError("Lambda requires ct >= c");
    const double fd = f_delta(c, a, delta);
    if (ct < fd * (1.0 - kRelTol))
        throw DomainError("Lambda requires ct >= f_delta(c)");
    return big_lambda_raw(lambda_u(c, a, delta), c, ct);
}

double c_acc(double r, double d, double a) {
    const double s = std::sqrt(r * d);
    // c_acc = f_inverse(2 sqrt(rd)); the closed form below is the same number.
    f_inverse(2.0 * s, a);  // range check
    return s - std::sqrt(a) + (1.0 - a) / (s - std::sqrt(a));
}

double lambda_minus_inf(double c, const ModelParams& p) {
    if (!(c >= 0.0)) throw DomainError("lambda_minus_inf requires c >= 0");
    return (std::sqrt(c * c + 4.0 * p.r * p.d * (p.b - 1.0)) - c) / (2.0 * p.d);
}

DecayClass decay_classify(double c, const ModelParams& p, Side side,
                          double c_llw) {
    validate_params(p);
    if (c < c_llw * (1.0 - 1e-9))
        throw DomainError("decay_classify requires c >= c_llw");
    DecayClass out;
    out.side = side;
    const double eq_tol = 1e-9 * std::max(1.0, c);

    if (side == Side::minus_inf) {
        const double l1m = 0.5 * (std::sqrt(c * c + 4.0) - c);
        const double l2m = lambda_minus_inf(c, p);
        out.rates = {{"lambda1_minus", l1m}, {"lambda2_minus", l2m}};
        if (std::abs(l2m - l1m) <= eq_tol) {
            out.case_label = "1c";
            out.phi_rate = l2m;
        } else if (l2m > l1m) {
            out.case_label = "1a";
            out.phi_rate = l1m;
        } else {
            out.case_label = "1b";
            out.phi_rate = l2m;
        }
        out.psi_rate = l2m;
        return out;
    }

    const double crit = 2.0 * std::sqrt(1.0 - p.a);
    if (c < crit * (1.0 - kRelTol))
        throw DomainError("decay_classify (+inf) requires c >= 2 sqrt(1-a)");
    const double l1p = (c + std::sqrt(c * c + 4.0 * p.r * p.d)) / (2.0 * p.d);
    const double disc = std::max(0.0, c * c - 4.0 * (1.0 - p.a));
    const double l2p = 0.5 * (c + std::sqrt(disc));
    const double l3p = 0.5 * (c - std::sqrt(disc));
    out.rates = {{"lambda1_plus", l1p}, {"lambda2_plus", l2p},
                 {"lambda3_plus", l3p}};

    const bool degenerate = std::abs(c - crit) <= eq_tol;  // l2p == l3p
    if (degenerate) {
        if (std::abs(l1p - l2p) <= eq_tol) out.case_label = "2b-ii";
        else if (l1p > l2p) out.case_label = "2b-i";
        else out.case_label = "2b-iii";
    } else {
        if (std::abs(l1p - l2p) <= eq_tol) out.case_label = "2a-ii";
        else if (l1p > l2p) out.case_label = "2a-i";
        else if (std::abs(l1p - l3p) <= eq_tol) out.case_label = "2a-iv";
        else if (l1p > l3p) out.case_label = "2a-iii";
        else out.case_label = "2a-v";
    }

    // Super-critical profiles cannot have the fast decay: phi follows the
    // slow rate l3p, and psi approaches 1 at the slower of l1p and l3p.
    out.phi_rate = l3p;
    out.psi_rate = std::min(l1p, l3p);
    return out;
}

LinearDeterminacy linear_determinacy(const ModelParams& p) {
    validate_params(p);
    LinearDeterminacy out;
    out.llw_condition =
        p.d <= 2.0 && (p.a * p.b - 1.0) / (1.0 - p.a) <= (2.0 - p.d) / p.r;
    const double lhs = ((2.0 - p.d) * (1.0 - p.a) + p.r) / (p.r * p.b);
    const double second =
        (p.d == 1.0) ? -std::numeric_limits<double>::infinity()
                     : (p.d - 2.0) / (2.0 * std::abs(p.d - 1.0));
    out.huang_condition = lhs >= std::max(p.a, second);
    if (out.llw_condition || out.huang_condition)
        out.c_llw_if_determined = 2.0 * std::sqrt(1.0 - p.a);
    return out;
}

const char* to_string(TrichotomyCase c) {
    switch (c) {
        case TrichotomyCase::extinction: return "extinction";
        case TrichotomyCase::accelerated: return "accelerated";
        case TrichotomyCase::llw: return "llw";
    }
    return "?";
}

SpeedPrediction predict_trichotomy(const ModelParams& p, double c_llw) {
    validate_params(p);
    const double lo = 2.0 * std::sqrt(1.0 - p.a);
    if (c_llw < lo * (1.0 - 1e-9) || c_llw > 2.0 * (1.0 + 1e-9))
        throw DomainError("c_llw must lie in [2 sqrt(1-a), 2]");
    const double cv = p.kpp_v_speed();
    if (std::abs(cv - 2.0) <= 1e-9 * 2.0)
        throw BoundaryCase("2 sqrt(rd) = 2 within tolerance");
    SpeedPrediction out;
    out.c_llw_used = c_llw;
    out.linearly_determined = linear_determinacy(p).c_llw_if_determined.has_value();
    if (cv < 2.0) {
        out.case_id = TrichotomyCase::extinction;
        out.c1_star = std::numeric_limits<double>::quiet_NaN();  // v goes extinct
        out.c2_star = 2.0;
        return out;
    }
    const double fc = f_of(c_llw, p.a);
    if (std::abs(cv - fc) <= 1e-9 * fc)
        throw BoundaryCase("2 sqrt(rd) = f(c_llw) within tolerance");
    out.c1_star = cv;
    if (cv < fc) {
        out.case_id = TrichotomyCase::accelerated;
        out.c2_star = c_acc(p.r, p.d, p.a);
    } else {
        out.case_id = TrichotomyCase::llw;
        out.c2_star = c_llw;
    }
    return out;
}

const char* to_string(Admissibility a) {
    switch (a) {
        case Admissibility::interior: return "interior";
        case Admissibility::lower_bound_violated: return "lower_bound_violated";
        case Admissibility::boundary: return "boundary";
    }
    return "?";
}

Admissibility admissible(double c1, double c2, const ModelParams& p,
                         double c_llw) {
    validate_params(p);
    const double cv = p.kpp_v_speed();
    if (c1 < cv * (1.0 - 1e-9))
        throw DomainError("admissible requires c1 >= 2 sqrt(rd)");
    if (c2 < c_llw * (1.0 - 1e-9))
        throw DomainError("admissible requires c2 >= c_llw");
    const double fc2 = f_of(c2, p.a);
    if (c1 > cv && c2 > c_llw && c1 > std::max(c2, fc2))
        return Admissibility::interior;
    if (c2 < c1 && c1 < fc2) return Admissibility::lower_bound_violated;
    return Admissibility::boundary;
}

double perturbed_speeds_terrace(double c2, double c1, double a, double delta) {
    if (delta == 0.0) return c2;
    const double ad = a_delta(a, delta);
    const double lam = lambda_u(c2, a, 0.0);
    if (!(lam < std::sqrt(1.0 - ad)))
        throw DeltaTooLarge("lambda(c2) >= sqrt(1-a_delta)");
    const double c2d = lambda_u_inverse(lam, a, delta);
    if (!(c2 < c2d && c2d < c1))
        throw DeltaTooLarge("c2 < c2_delta < c1 fails");
    const double fd = f_delta(c2d, a, delta);
    if (!(fd < c1)) throw DeltaTooLarge("f_delta(c2_delta) >= c1");
    const double lam_d = big_lambda(c2d, c1, a, delta);
    const double lam_0 = big_lambda(c2, c1, a, 0.0);
    if (!(lam_d <= lam_0 * (1.0 + kRelTol)))
        throw DeltaTooLarge("Lambda_delta exceeds Lambda");
    return c2d;
}

std::pair<double, double> perturbed_speeds_compact(double c2,
                                                   const ModelParams& p,
                                                   double delta) {
    validate_params(p);
    if (!(delta > 0.0 && delta < 0.5))
        throw DomainError("perturbed_speeds_compact requires delta in (0, 1/2)");
    const double cv = p.kpp_v_speed();
    const double target = big_lambda(c2, cv, p.a, 0.0);
    const double c1d = 2.0 * std::sqrt(p.r * (1.0 - 2.0 * delta) * p.d) - delta;
    const double ad = a_delta(p.a, delta);

    // The target must lie in the range of c -> Lambda_delta(c, c1d), i.e. the
    // quadratic constant q = Lambda (c1d - Lambda) must lie strictly above its
    // c -> infinity limit a_delta and at most the value at c = 2 sqrt(1-a_delta).
    const double q_target = target * (c1d - target);
    const double q_hi = c1d * std::sqrt(1.0 - ad) + 2.0 * ad - 1.0;
    if (!(q_target > ad && q_target <= q_hi * (1.0 + kRelTol)))
        throw DeltaTooLarge("target Lambda outside the perturbed range");

    // g(c) = lambda_delta(c)(c1d - c) + 1 - q_target is strictly decreasing.
    auto g = [&](double c) {
        return lambda_u(c, p.a, delta) * (c1d - c) + 1.0 - q_target;
    };
    double lo = 2.0 * std::sqrt(1.0 - ad);
    double hi = std::max(c1d, lo + 1.0);
    while (g(hi) > 0.0) hi += (hi - lo);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    const double c2d = 0.5 * (lo + hi);
    if (!(c2 < c2d && c2d < c1d && c1d < cv))
        throw DeltaTooLarge("ordering c2 < c2_delta < c1_delta < 2 sqrt(rd) fails");
    return {c1d, c2d};
}

}  // namespace speeds
}  // namespace terrace
