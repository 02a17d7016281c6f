#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "terrace/model.hpp"
#include "terrace/speeds.hpp"
#include "terrace/waves.hpp"

namespace terrace {
namespace barriers {

// ---------------------------------------------------------------------------
// Building blocks.
//
// Each block is a scalar field (t,x) -> value together with analytic first
// and second space derivatives and a first time derivative. Profile-backed
// kinds (chi, pi, omega, alpha and the wave pair) store a solved profile and
// evaluate it in the moving frame xi = x - speed t - shift; their second
// derivative is defined through the profile's own ODE, so that every
// certified residual reduces to its exact algebraic margin and the
// interpolation error is confined to the block's identity residual.
// ---------------------------------------------------------------------------

enum class BlockKind {
    chi,       // decreasing KPP wave of u_t - u_xx = u((1-a)/2 - u), chi(0)=(1-a)/4
    pi,        // decreasing KPP wave of v_t - d v_xx = r v(1-delta-v), pi(0)=(1-delta)/2
    pi_h,      // pi(xi) + h xi
    omega,     // Dirichlet drift-logistic bump on (-R, R), zero outside
    alpha,     // -alpha'' = alpha(1-a-alpha) on (0,l), zero outside
    theta,     // A e^{l+ (xi-xi_theta)} - e^{l- (xi-xi_theta)}, increasing, theta(0)=0
    beta,      // max(0, e^{-lv(xi+xi_b)} - K_b e^{-(lv+eta)(xi+xi_b)}), positive on (0,inf)
    wbar,      // e^{-l_d(c)(ct-c)t} e^{-L_d(c,ct)(x-ct t)}; solves w_t - w_xx = w exactly
    wunder,    // e^{-l(c)(ct-c)t} max(0, e^{-L(..)} - K_w e^{-(L+eta)(..)}), kinked at ct t
    z,         // e^{-l(c)(ct-c)t} e^{-(ct/2)(x-ct t)} sin(pi (x-ct t)/(2 R_z)) on [0,2R_z]
    eigenpair, // cos(pi x/(8R)) on (-4R,4R) with lambda = d pi^2/(64 R^2)
    wave_phi,  // u component of the delta-perturbed wave pair (waves module)
    wave_psi,  // v component of the delta-perturbed wave pair (waves module)
};

const char* to_string(BlockKind k);

// Parameters for build_block. Only the fields relevant to the requested kind
// are read; ranges are validated per kind and violations raise DomainError.
struct BlockSpec {
    ModelParams p{};
    double delta = 0.0;
    double c = 0.0;    // own wave speed (chi, pi, theta, beta) or 'c' (wbar, wunder, z)
    double ct = 0.0;   // the faster speed c-tilde (wbar, wunder, z)
    double A = 1.0;    // theta amplitude, or the competition constant of wunder
    double B = 0.0;    // beta competition constant
    double eta = 0.0;  // secondary rate of beta / wunder
    double h = 0.0;    // linear tilt of pi_h
    double lam = 0.0;  // u-decay rate entering wbar / wunder; 0 = closed form
    double scale = 1.0;  // wunder amplitude factor in (0, 1]
    double R = 0.0;    // half-width (omega, eigenpair)
    double l = 0.0;    // interval length (alpha)
    int mesh = 0;      // profile resolution override; 0 = kind default
};

// Solved 1D profile with nodal values and first derivatives (cubic Hermite
// between nodes) plus exponential extensions beyond the stored window.
struct ProfileData;

struct BuildingBlock {
    BlockKind kind{};
    BlockSpec spec{};
    double speed = 0.0;  // frame speed; profile kinds evaluate at x - speed t - shift
    double shift = 0.0;  // translation, adjustable by the assembler
    // Sup-norm residual of the defining ODE/identity measured on samples
    // (solver residual for profile kinds, exact-arithmetic check otherwise).
    double residual = 0.0;
    // Named constants of the block (xi_theta, K_beta, xi_beta, K_w, x_w, X_w,
    // R_z, X_z, max_value, argmax, left/right decay rates, ...).
    std::map<std::string, double> constants;
    std::shared_ptr<const ProfileData> profile;  // profile kinds only

    double value(double t, double x) const;
    double dx(double t, double x) const;
    double dxx(double t, double x) const;
    double dt(double t, double x) const;
};

BuildingBlock build_block(BlockKind kind, const BlockSpec& spec);

// Convenience: the delta-perturbed wave pair at speed c as two blocks
// sharing one solved profile (phi first, psi second).
std::pair<BuildingBlock, BuildingBlock> wave_pair_blocks(
    double c, const ModelParams& p, double delta, double truncation = 120.0,
    int mesh = 4800);

// ---------------------------------------------------------------------------
// Existence thresholds of the compact blocks.
// ---------------------------------------------------------------------------

// (R_omega, R_delta): minimal half-width for existence of the omega bump
// (bisection on solvability of the linearized threshold) and minimal
// half-width at which max omega >= 1 - 2 delta.
std::pair<double, double> min_radius_omega(const ModelParams& p, double delta);

// Minimal interval length for existence of the alpha bump; matches
// pi / sqrt(1-a) within 1%.
double min_length_alpha(double a);

// ---------------------------------------------------------------------------
// Interface curves.
// ---------------------------------------------------------------------------

enum class InterfaceId { x0, xi1, x2, x3_small, x3_large, xi4, x0_ne, x1_ne };

const char* to_string(InterfaceId id);

// Solves blockA(t,x) = blockB(t,x) for x at time t inside the bracket the
// corresponding lemma provides, to 1e-11, and checks that the sign of
// blockA - blockB on each side matches the lemma's orientation. Raises
// NoBracket when no sign change exists in the bracket.
double find_interface(const BuildingBlock& blockA, const BuildingBlock& blockB,
                      InterfaceId id, double t);

struct InterfaceCurve {
    InterfaceId id{};
    std::string label;
    int block_a = -1, block_b = -1;  // indices into BarrierAssembly::blocks
    double speed = 0.0;              // asymptotic drift (bracket metadata)
    bool constant_offset = false;    // true if x(t) = offset + speed t exactly
    double offset = 0.0;             // the constant offset when applicable
};

// ---------------------------------------------------------------------------
// Assemblies.
// ---------------------------------------------------------------------------

enum class AssemblyKind { terrace_super, terrace_sub, compact_super, nonexistence_sub };

const char* to_string(AssemblyKind k);

// Optional knobs; negative values mean "use the construction's default".
struct AssemblyAux {
    double kappa = -1.0;   // junction level of the theta piece (default delta/2)
    double zeta = -1.0;    // nonexistence translation (default max(L, chi^{-1}(kappa)) + 5)
    double h = -1.0;       // pi tilt (default h_star / 2)
    double eta = -1.0;     // beta rate override
    double zeta6 = 0.0;    // terrace_sub: v-bar amplitude translation
    double zeta7 = 0.0;    // terrace_sub: extra right shift of the u support
    double amp = -1.0;     // terrace_sub: wunder amplitude scale (default 1)
    double c_llw = -1.0;   // measured c_LLW (default 2 sqrt(1-a))
    double t_horizon = 50.0;  // horizon on which interface orderings are enforced
};

struct AssemblyPoint {
    double u = 0.0, ut = 0.0, ux = 0.0, uxx = 0.0;
    double v = 0.0, vt = 0.0, vx = 0.0, vxx = 0.0;
    const char* u_piece = "";
    const char* v_piece = "";
};

struct AssemblyImpl;

struct BarrierAssembly {
    AssemblyKind which{};
    ModelParams p{};
    double delta = 0.0;
    bool is_super = false;
    // Speeds as used: c1/c2 are the requested pair; the perturbed and
    // auxiliary speeds appear in constants (c2_delta, c1_delta, c_ne, ct_ne).
    double c1 = 0.0, c2 = 0.0;
    std::vector<BuildingBlock> blocks;
    std::vector<InterfaceCurve> interfaces;
    // Every fixed constant of the construction (zetas, kappa, h, eta_beta,
    // eta_w, A, B, C_delta, K_w, x_w, R_delta, L, ...), for the certificate.
    std::map<std::string, double> constants;
    std::shared_ptr<AssemblyImpl> impl;

    double u(double t, double x) const;
    double v(double t, double x) const;
    AssemblyPoint eval(double t, double x) const;
    // Positions of all interface curves at time t (same order as `interfaces`).
    std::vector<double> interface_positions(double t) const;
    // Positions of every non-smooth point at time t: interfaces plus clamp
    // and support edges; certification excludes bands around these.
    std::vector<double> kink_positions(double t) const;
};

// Builds one of the four barrier assemblies at the requested speeds.
// (c1, c2) are the terrace speeds; compact_super ignores c1 (it is pinned to
// 2 sqrt(rd)); nonexistence_sub expects a pair with c2 <= c1 < f(c2).
// Raises NotAdmissible for a speed pair outside the proposition's range and
// HypothesisViolated (naming the condition) when a lemma precondition fails.
BarrierAssembly assemble(AssemblyKind which, const ModelParams& p, double c1,
                         double c2, double delta, const AssemblyAux& aux = {});

// Builds the terrace super- and sub-solutions and computes the translations
// (zeta6, zeta7) that order them initially (sub <= super competitively).
std::pair<BarrierAssembly, BarrierAssembly> ordered_terrace_pair(
    const ModelParams& p, double c1, double c2, double delta,
    const AssemblyAux& aux = {});

// Largest delta in {0.1, 0.05, 0.02, 0.01} for which every lemma
// precondition of the requested assembly passes; 0 if none does.
double empirical_delta_star(AssemblyKind which, const ModelParams& p,
                            double c1, double c2);

// ---------------------------------------------------------------------------
// Certification.
// ---------------------------------------------------------------------------

struct Lattice {
    double t0 = 0.0, t1 = 40.0;
    int nt = 200;
    double x0 = 0.0, x1 = 1.0;
    int nx = 400;
};

struct PieceMargin {
    std::string piece;        // e.g. "(wbar,psi)"
    double worst_u = 0.0;     // most adverse u-component margin (>= -slack required)
    double worst_v = 0.0;     // most adverse v-component margin
    double t_u = 0.0, x_u = 0.0, t_v = 0.0, x_v = 0.0;
    long points = 0;
};

struct ResidualReport {
    bool certified = false;
    double slack = 1e-8;
    double interface_margin = 0.0;
    double t_horizon = 0.0;      // certification covers [t0, t1] only
    long sampled = 0, excluded = 0;
    std::vector<PieceMargin> pieces;
    // Sup of |closed-form identity| over the sampled wbar / z points.
    std::map<std::string, double> identity_residuals;
    std::string failure;  // empty when certified

    std::string to_json() const;
};

// Signed-margin sweep over the lattice minus interface_margin bands around
// every kink curve (default margin: 3 lattice spacings). At each regular
// point the residual P(pair) - F(pair) is formed from the active pieces'
// analytic derivatives and its components must have the competitive signs
// (u >= -slack and v <= slack for super-solutions, reversed for
// sub-solutions) with slack 1e-8. Throws CertificationFailed naming the
// piece, point and value on the first wrong sign; use try_certify to obtain
// the report regardless.
ResidualReport certify_residuals(const BarrierAssembly& assembly,
                                 const Lattice& lattice,
                                 double interface_margin = -1.0);
ResidualReport try_certify(const BarrierAssembly& assembly,
                           const Lattice& lattice,
                           double interface_margin = -1.0);

// Interface curves sampled at the lattice times, as CSV "t,x,interface_id".
std::string interfaces_csv(const BarrierAssembly& assembly,
                           const std::vector<double>& times);

// True iff the state lies on the correct side of the assembly's
// time-evaluation in the competitive order (state <= super, sub <= state).
bool sandwiched_by(const StatePair& s, const Grid& g,
                   const BarrierAssembly& assembly, double tol = 0.0);

}  // namespace barriers
}  // namespace terrace
