#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "terrace/errors.hpp"

namespace terrace {

// The quadruple (d, r, a, b) of the competition-diffusion system
//
//   du/dt - u_xx   = u (1 - u - a v)
//   dv/dt - d v_xx = r v (1 - v - b u)
//
// restricted to the monostable regime d > 0, r > 0, a in (0,1), b > 1,
// where (1,0) is stable and (0,1) unstable.
struct ModelParams {
    double d = 1.0;  // diffusivity of v
    double r = 1.0;  // growth rate of v
    double a = 0.5;  // competition felt by u
    double b = 2.0;  // competition felt by v

    // Linear invasion speeds into empty space; recomputed, never cached.
    double kpp_u_speed() const { return 2.0; }
    double kpp_v_speed() const { return 2.0 * std::sqrt(r * d); }
};

// Returns p unchanged if the monostable range constraints hold, otherwise
// throws OutOfRegime naming the offending field.
ModelParams validate_params(const ModelParams& p);

// Kinetics of the delta-perturbed system
//   F_delta(u,v) = ( u (1 + delta - u - a v),  r v (1 - 2 delta - v - b u) );
// delta = 0 recovers the true kinetics. (u,v) may leave [0,1]^2: barrier
// verification evaluates the reaction on barrier values too.
std::pair<double, double> reaction(const ModelParams& p, double u, double v,
                                   double delta = 0.0);

// Uniform 1D grid; node i sits at x_min + i*dx with dx = (x_max-x_min)/(n-1).
struct Grid {
    double x_min = 0.0;
    double x_max = 1.0;
    int n = 2;

    double dx() const { return (x_max - x_min) / (n - 1); }
    double x(int i) const { return x_min + i * dx(); }

    bool operator==(const Grid&) const = default;
};

// Validates n >= 3 and dx > 0.
Grid validate_grid(const Grid& g);

// A discretized (u, v) pair at one time instant.
struct StatePair {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;
};

// Competitive partial order: s1 <= s2 iff u1 <= u2 and v1 >= v2 nodewise.
// `tol` loosens each comparison, for discretization slack in monitors.
bool competitive_leq(const StatePair& s1, const StatePair& s2, double tol = 0.0);

}  // namespace terrace
