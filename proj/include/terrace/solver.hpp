#pragma once

#include <functional>
#include <vector>

#include "terrace/model.hpp"

namespace terrace {

enum class BcKind { neumann_zero, dirichlet };

struct BoundaryCondition {
    BcKind kind = BcKind::neumann_zero;
    double u_val = 0.0;  // used by dirichlet only
    double v_val = 0.0;

    static BoundaryCondition neumann() { return {}; }
    static BoundaryCondition dirichlet(double u, double v) {
        return {BcKind::dirichlet, u, v};
    }
};

struct SolverConfig {
    Grid grid;
    double dt = 0.0;
    double t_end = 0.0;
    BoundaryCondition left_bc;
    BoundaryCondition right_bc;
    double snapshot_every = 0.0;  // must be an integer multiple of dt
    double delta = 0.0;           // 0 for the true system, >0 for F_delta runs
};

struct Trajectory {
    std::vector<StatePair> snapshots;
    SolverConfig config;
    ModelParams params;
};

// Largest stable explicit time step:
//   min( dx^2 / (2 max(1,d)),  1 / (4 max(1, r(b+1))) ).
// Any dt below this bound keeps [0,1]^2 invariant for the discrete scheme
// without clamping (both update maps are monotone in the off-diagonal
// argument after the v -> 1-v flip, and contractive on the diagonal).
double cfl_limit(const Grid& g, const ModelParams& p);

// One forward-Euler step with second-order central differences. Neumann
// closure mirrors the first interior node; Dirichlet closure pins the
// boundary nodes.
StatePair step(const StatePair& s, const ModelParams& p,
               const SolverConfig& cfg);

using Monitor = std::function<void(const StatePair&)>;

// Repeated stepping to t_end with snapshots (and monitor calls) every
// cfg.snapshot_every time units. Time is reconstructed as step_index * dt,
// never accumulated. Deterministic: fixed iteration order, no reductions.
Trajectory integrate(const StatePair& s0, const ModelParams& p,
                     const SolverConfig& cfg,
                     const std::vector<Monitor>& monitors = {});

// True iff sub <= super in the competitive order at every common snapshot,
// within `tol` of discretization slack. A violation at the initial snapshot
// reports false immediately.
bool comparison_monitor(const Trajectory& sub, const Trajectory& super_,
                        double tol = 1e-9);

}  // namespace terrace
