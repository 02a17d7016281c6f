#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "terrace/model.hpp"

namespace terrace {
namespace speeds {

// ---------------------------------------------------------------------------
// Closed-form speed calculus.
//
// The central object is the decreasing bijection
//   f : [2 sqrt(1-a), +inf) -> (2 sqrt(a), 2(sqrt(1-a)+sqrt(a))],
//   f(c) = c - sqrt(c^2 - 4(1-a)) + 2 sqrt(a),
// which links the first-front speed of v to the fastest speed the tail of u
// can sustain behind it. All quadratic-root helpers select the SMALLER root.
// ---------------------------------------------------------------------------

double f_of(double c, double a);
double f_inverse(double ct, double a);

// a_delta = (1 - 2 delta) a / (1 + delta); decreasing in delta, a_0 = a.
double a_delta(double a, double delta);

// Smaller root of  lambda^2 - c lambda + (1 - a_delta) = 0, in (0, sqrt(1-a_delta)].
double lambda_u(double c, double a, double delta = 0.0);

// Inverse on the decreasing branch: returns l + (1 - a_delta)/l.
double lambda_u_inverse(double l, double a, double delta = 0.0);

// Smaller root of  d lambda^2 - c lambda + r = 0, in (0, sqrt(r/d)].
double lambda_v(double c, double r, double d);

// f with a replaced by a_delta.
double f_delta(double c, double a, double delta);

// Smaller root of  L^2 - ct L + lambda_delta(c)(ct - c) + 1 = 0;
// requires ct >= max(c, f_delta(c)).
double big_lambda(double c, double ct, double a, double delta = 0.0);

// Accelerated second-front speed  c_acc = f^{-1}(2 sqrt(rd)).
double c_acc(double r, double d, double a);

// Decay rate of the v-profile at -infty behind a wave of speed c:
//   (sqrt(c^2 + 4 r d (b-1)) - c) / (2 d).
double lambda_minus_inf(double c, const ModelParams& p);

// ---------------------------------------------------------------------------
// Decay classification of traveling-wave tails.
//
// Characteristic rates at the two equilibria:
//   -infty (near (1,0)):  l1m = (sqrt(c^2+4) - c)/2,
//                         l2m = (sqrt(c^2+4rd(b-1)) - c)/(2d);
//   +infty (near (0,1)):  l1p = (c + sqrt(c^2+4rd))/(2d),
//                         l2p = (c + sqrt(c^2-4(1-a)))/2,
//                         l3p = (c - sqrt(c^2-4(1-a)))/2.
// The branch labels order the +infty cases by decreasing l1p:
//   2a-i:   l1p > l2p          2b-i:   l1p > l2p  (c = 2 sqrt(1-a))
//   2a-ii:  l1p = l2p          2b-ii:  l1p = l2p
//   2a-iii: l1p in (l3p, l2p)  2b-iii: l1p < l2p
//   2a-iv:  l1p = l3p
//   2a-v:   l1p < l3p
// and at -infty:
//   1a: l2m > l1m,  1b: l2m < l1m,  1c: l2m = l1m.
// ---------------------------------------------------------------------------

enum class Side { minus_inf, plus_inf };

struct DecayClass {
    Side side;
    std::string case_label;
    std::vector<std::pair<std::string, double>> rates;
    // Leading exponential rate of phi and of the gap between psi and its limit.
    double phi_rate = 0.0;
    double psi_rate = 0.0;
};

// Classifies the tail behavior of a profile at speed c >= c_llw. For
// c > c_llw on the plus side, the phi tail follows the slow rate l3p
// (fast-decay profiles cannot travel at super-critical speeds).
DecayClass decay_classify(double c, const ModelParams& p, Side side,
                          double c_llw);

// ---------------------------------------------------------------------------
// Linear determinacy and the trichotomy predictor.
// ---------------------------------------------------------------------------

struct LinearDeterminacy {
    bool llw_condition = false;
    bool huang_condition = false;
    std::optional<double> c_llw_if_determined;
};

// llw_condition:   d <= 2 and (ab-1)/(1-a) <= (2-d)/r.
// huang_condition: ((2-d)(1-a)+r)/(rb) >= max(a, (d-2)/(2|d-1|)),
//                  where the second argument is -inf at d = 1.
// Either condition pins c_llw = 2 sqrt(1-a).
LinearDeterminacy linear_determinacy(const ModelParams& p);

enum class TrichotomyCase { extinction, accelerated, llw };

struct SpeedPrediction {
    TrichotomyCase case_id;
    double c1_star;  // first-front (v) speed; NaN in the extinction case
    double c2_star;  // second-front (u) speed
    double c_llw_used;
    bool linearly_determined;
};

const char* to_string(TrichotomyCase c);

// Theorem-level prediction from compactly supported v seeds:
//   extinction  if 2 sqrt(rd) < 2            (u wins outright, u speed 2);
//   accelerated if 2 < 2 sqrt(rd) < f(c_llw) (u chases at c_acc > c_llw);
//   llw         if 2 sqrt(rd) >= f(c_llw)    (u invades at c_llw).
// Equalities within 1e-9 relative raise BoundaryCase instead of classifying.
SpeedPrediction predict_trichotomy(const ModelParams& p, double c_llw);

enum class Admissibility { interior, lower_bound_violated, boundary };

const char* to_string(Admissibility a);

// Classification of a candidate terrace speed pair (c1, c2):
//   interior             iff c1 > 2 sqrt(rd), c2 > c_llw, c1 > max(c2, f(c2));
//   lower_bound_violated iff c2 < c1 and c1 < f(c2);
//   boundary             otherwise.
Admissibility admissible(double c1, double c2, const ModelParams& p,
                         double c_llw);

// Perturbed second-front speed for the terrace barriers:
//   c2_delta = (lambda_delta^{-1} o lambda)(c2).
// Checks the construction's conditions (c2 < c2_delta < c1, f_delta(c2_delta)
// close enough to c1 that Lambda_delta(c2_delta, c1) exists and does not
// exceed Lambda(c2, c1)); raises DeltaTooLarge when one fails. The c_LLW
// ordering condition is delegated to the caller, which owns the estimate.
double perturbed_speeds_terrace(double c2, double c1, double a, double delta);

// Perturbed speed pair for the compactly supported super-solution:
//   c1_delta = 2 sqrt(r (1-2 delta) d) - delta,
//   c2_delta = unique root of Lambda_delta(., c1_delta) = Lambda(c2, 2 sqrt(rd)),
// which exists iff the target lies in the range of Lambda_delta(., c1_delta).
std::pair<double, double> perturbed_speeds_compact(double c2,
                                                   const ModelParams& p,
                                                   double delta);

}  // namespace speeds
}  // namespace terrace
