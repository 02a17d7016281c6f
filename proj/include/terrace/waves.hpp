#pragma once

#include <vector>

#include "terrace/solver.hpp"
#include "terrace/speeds.hpp"

namespace terrace {
namespace waves {

// A traveling-wave profile (phi, psi)(xi), xi = x - c t, of the delta-
// perturbed system, connecting (1+delta, 0) at -infty to (0, 1-2delta) at
// +infty, re-anchored so that psi(0) = (1-2delta)/2.
struct WaveProfile {
    double c = 0.0;
    double delta = 0.0;
    std::vector<double> xi;
    std::vector<double> phi;
    std::vector<double> psi;
    bool phi_decreasing = false;
    bool psi_increasing = false;
    double residual = 0.0;          // final sup-norm collocation residual
    double truncation_error = 0.0;  // wall-error model at the chosen anchor
    double measured_decay_plus = 0.0;   // phi log-slope near +infty
    double measured_decay_minus = 0.0;  // psi log-slope near -infty
};

// Default numerics for the c_LLW measurement: dx=0.1 grid sized from the
// upper bound c_LLW <= 2 plus margin, dt just under the CFL limit dividing
// the snapshot cadence of one time unit.
SolverConfig default_llw_config(const ModelParams& p, double t_end,
                                double delta = 0.0);

// Spreading-speed estimate of u invading v == 1: simulates the delta-system
// from the llw_background seed and fits the u-front speed over the second
// half of the run.
double estimate_c_llw(const ModelParams& p, double delta,
                      const SolverConfig& numerics);

// Solves the traveling-wave boundary value problem
//   -phi'' - c phi' = phi (1 + delta - phi - a psi)
//   -d psi'' - c psi' = r psi (1 - 2 delta - psi - b phi)
// on [-truncation, truncation] with Dirichlet values at the asymptotic
// states, by central-difference collocation and damped Newton (optionally
// from a caller-supplied guess). The front is anchored off-center so the
// slow psi tail gets the longer arm; the iteration enforces the exact
// discrete tail ratios at the walls (which removes the competing
// quasi-minimal-speed branch) and is unfolded by a forcing amplitude along
// the translation mode plus an integral phase condition. A final exact
// linear wall correction restores the Dirichlet data, and the reported
// residual is the sup norm of the Dirichlet collocation system. The
// profile is re-anchored so psi(0) = (1-2delta)/2; note xi is therefore
// asymmetric about 0.
WaveProfile solve_profile(double c, const ModelParams& p, double delta,
                          double truncation, int mesh,
                          const std::vector<double>* phi_guess = nullptr,
                          const std::vector<double>* psi_guess = nullptr);

// Log-linear decay-rate fit over xi in [band_lo, band_hi]: the phi tail on
// the plus side, the psi tail on the minus side. The band must stay at
// least 10% of the truncation length away from both edges.
double measure_decay(const WaveProfile& w, speeds::Side side, double band_lo,
                     double band_hi);

// d <= 2 + r/(1-a): profiles at every admissible speed are unique up to
// translation.
bool uniqueness_condition(const ModelParams& p);

}  // namespace waves
}  // namespace terrace
