#pragma once

#include <utility>
#include <vector>

#include "terrace/model.hpp"

namespace terrace {
namespace seeds {

// Initial-data generators. Every field lies in [0,1] and satisfies its
// declared support/decay property exactly at the grid nodes. Smoothed edges
// use a cosine taper of fixed width 1.0 space units, independent of dx.

// Compactly supported bump: plateau at `amplitude` with cosine tapers,
// exactly zero outside [center - halfwidth, center + halfwidth].
std::vector<double> bump(const Grid& g, double center, double halfwidth,
                         double amplitude);

// 1 for x <= edge - 1, cosine drop, exactly 0 for x >= edge.
std::vector<double> heaviside_like(const Grid& g, double edge);

// min(1, exp(-rate (x - anchor))): the weighted-tail datum of the lower-bound
// theorem; x -> field(x) e^{rate x} is bounded by e^{rate anchor}.
std::vector<double> exp_tail(const Grid& g, double rate, double anchor);

// Canonical terrace datum for an interior admissible pair (c1, c2):
//   u0 = min(1, e^{-Lambda(c2,c1) x}),
//   v0 = min(1, e^{-lambda_v(c1) (x - x_v)}),
// with the v edge x_v placed ahead of the u edge so the two fronts start in
// terrace order. Pass the c_LLW estimate used for admissibility; a negative
// value defaults to 2 sqrt(1-a) (linear determinacy).
std::pair<std::vector<double>, std::vector<double>> terrace_pair(
    const Grid& g, const ModelParams& p, double c1, double c2,
    double c_llw = -1.0, double x_v = 20.0);

// The c_LLW measurement setup: a compact u bump on the left against v == 1.
std::pair<std::vector<double>, std::vector<double>> llw_background(
    const Grid& g, const ModelParams& p);

}  // namespace seeds
}  // namespace terrace
