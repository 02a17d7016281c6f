#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "terrace/solver.hpp"

namespace terrace {
namespace fronts {

enum class Field { u, v };

struct FrontTrack {
    double level = 0.5;
    std::vector<double> times;
    std::vector<double> positions;  // rightmost crossing of the level
};

struct SpeedReport {
    double fitted_speed = 0.0;
    double intercept = 0.0;
    double t0 = 0.0, t1 = 0.0;  // fit window
    double rms_residual = 0.0;
    std::optional<double> predicted;
    std::optional<double> relative_error;
};

// Rightmost x where the field crosses `level`, linearly interpolated between
// nodes; empty if the level is never crossed (e.g. a constant field).
std::optional<double> level_position(const Grid& g,
                                     const std::vector<double>& field,
                                     double level);

// Tracks the rightmost level crossing across a trajectory's snapshots.
// Snapshots where the level is not attained are skipped. If `guard_boundary`
// and a position comes within 10 dx of the right boundary, DomainEscape is
// raised (the truncated domain was too small).
FrontTrack track_front(const Trajectory& traj, Field which, double level = 0.5,
                       bool guard_boundary = true);

// Least-squares line through (t, position) over the last `window_fraction`
// of the time range. At least 10 samples must land in the window.
SpeedReport fit_speed(const FrontTrack& track, double window_fraction = 0.5,
                      std::optional<double> predicted = std::nullopt);

// Maximal interval [0, X] of x >= 0 where |u - u*| + |v - v*| < eps;
// empty if the first node at x >= 0 already violates the bound.
std::optional<std::pair<double, double>> plateau_extent(
    const Grid& g, const StatePair& s, double u_star, double v_star,
    double eps);

// Hair-trigger wedge: true iff at the final snapshot (time T),
//   sup { |u| + |v-1| : (c_lo+eps_geom) T <= x <= (c_hi-eps_geom) T } < eps_val.
// Raises EmptyWedge if the geometric wedge is empty at the final time
// (including degenerate speed orderings c_hi <= c_lo).
bool wedge_check(const Trajectory& traj, double c_lo, double c_hi,
                 double eps_geom, double eps_val);

}  // namespace fronts
}  // namespace terrace
