#include "terrace/waves.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <vector>

#include "terrace/errors.hpp"
#include "terrace/fronts.hpp"
#include "terrace/seeds.hpp"

namespace terrace {
namespace waves {

SolverConfig default_llw_config(const ModelParams& p, double t_end,
                                double delta) {
    if (t_end <= 0) throw DomainError("t_end must be positive");
    // The u front travels no faster than the KPP bound ~2; leave headroom
    // for the boundary guard band and the seed offset.
    const double x_min = -30.0;
    const double x_max = x_min + 2.5 * t_end + 60.0;
    const int n = static_cast<int>(std::lround((x_max - x_min) / 0.1)) + 1;
    SolverConfig cfg;
    cfg.grid = Grid{x_min, x_max, n};
    const double limit = cfl_limit(cfg.grid, p);
    // dt divides the one-time-unit snapshot cadence exactly.
    cfg.dt = 1.0 / std::ceil(1.0 / (0.9 * limit));
    cfg.t_end = std::ceil(t_end);
    cfg.snapshot_every = 1.0;
    cfg.delta = delta;
    return cfg;
}

double estimate_c_llw(const ModelParams& p, double delta,
                      const SolverConfig& numerics) {
    validate_params(p);
    if (delta < 0) throw DomainError("delta must be non-negative");
    StatePair s0;
    std::tie(s0.u, s0.v) = seeds::llw_background(numerics.grid, p);
    auto traj = integrate(s0, p, numerics);
    auto track = fronts::track_front(traj, fronts::Field::u, 0.5);
    auto rep = fronts::fit_speed(track, 0.5);
    return rep.fitted_speed;
}

namespace {

// Root of the discrete characteristic symbol
//   2 dd (cosh(kh) - 1)/h^2 + c sinh(kh)/h + react = 0
// nearest the continuum root k0 of dd k^2 + c k + react = 0; this is the
// exact growth exponent of solutions v_i = e^{k i h} of the linearized
// three-point scheme.
double discrete_root(double dd, double c, double react, double h, double k0) {
    double k = k0;
    for (int it = 0; it < 50; ++it) {
        const double g =
            2.0 * dd * (std::cosh(k * h) - 1.0) / (h * h) +
            c * std::sinh(k * h) / h + react;
        const double gp = 2.0 * dd * std::sinh(k * h) / h + c * std::cosh(k * h);
        const double kn = k - g / gp;
        const bool done = std::abs(kn - k) < 1e-15 * std::max(1.0, std::abs(k));
        k = kn;
        if (done) break;
    }
    return k;
}

}  // namespace

WaveProfile solve_profile(double c, const ModelParams& p, double delta,
                          double truncation, int mesh,
                          const std::vector<double>* phi_guess,
                          const std::vector<double>* psi_guess) {
    validate_params(p);
    if (delta < 0 || delta >= 0.5) throw DeltaTooLarge("delta outside [0, 1/2)");
    if (truncation <= 0) throw DomainError("truncation must be positive");
    if (mesh < 16) throw DomainError("mesh too coarse");
    const double ad = speeds::a_delta(p.a, delta);
    if (c < 2.0 * std::sqrt(1.0 - ad) - 1e-12)
        throw SubcriticalSpeed("speed below the linear threshold of the phi tail");

    const int m = mesh;  // m intervals, m+1 nodes
    const double X = truncation;
    const double h = 2.0 * X / m;
    const double phiL = 1.0 + delta;
    const double psiR = 1.0 - 2.0 * delta;

    // Tail linearizations. Left state (phiL, 0): the psi equation has
    // reaction r (1 - 2 delta - b phiL) < 0, giving one slow positive root
    // (the wave's decay toward -infty) and one fast negative root (used to
    // absorb the Dirichlet wall). The pure-phi deficit decays with the fast
    // root of k^2 + c k - (1 + delta). Right state (0, psiR): the phi
    // equation has reaction rpR = 1 + delta - a psiR > 0 and the wave decays
    // with the slow negative root, which requires c^2 >= 4 rpR.
    const double rmL = p.r * (1.0 - 2.0 * delta - p.b * phiL);
    const double rpR = 1.0 + delta - p.a * psiR;
    if (c * c - 4.0 * rpR < 1e-12)
        throw SubcriticalSpeed(
            "speed at or below the critical value of the delta system");
    const double km_cont = (-c + std::sqrt(c * c - 4.0 * p.d * rmL)) / (2.0 * p.d);
    const double kf_cont = (-c - std::sqrt(c * c - 4.0 * p.d * rmL)) / (2.0 * p.d);
    const double kp_cont = (-c + std::sqrt(c * c - 4.0 * rpR)) / 2.0;
    const double kpf_cont = (-c - std::sqrt(c * c + 4.0 * (1.0 + delta))) / 2.0;
    const double km = discrete_root(p.d, c, rmL, h, km_cont);
    const double kf = discrete_root(p.d, c, rmL, h, kf_cont);
    const double kp = discrete_root(1.0, c, rpR, h, kp_cont);
    const double kpf = discrete_root(1.0, c, -(1.0 + delta), h, kpf_cont);

    // Anchor placement. A symmetric front cannot satisfy both Dirichlet
    // walls to high accuracy: the slow psi tail (rate km) needs a much
    // longer arm than the phi tail (rate -kp). Place the anchor so the two
    // wall error terms - the quadratic remainder of the linearized left
    // tail, r (psi_wall)^2, and the right clamp jump, phiL e^{kp R}/h^2 -
    // are balanced in the log.
    const double c_left = std::log(0.25 * p.r * psiR * psiR);
    const double c_right = std::log(phiL / (h * h));
    double sT = ((kp + 2.0 * km) * X + c_right - c_left) / (kp - 2.0 * km);
    sT = std::clamp(sT, -0.8 * X, 0.8 * X);
    sT = std::round(sT / h) * h;

    std::vector<double> xi(m + 1), phi(m + 1), psi(m + 1);
    for (int i = 0; i <= m; ++i) xi[i] = -X + i * h;

    // Reference profile: a generalized logistic with the exact tail rates
    // on both sides, anchored (psi = psiR/2) at sT. It seeds the iteration
    // and provides the phase/unfolding direction.
    std::vector<double> phig(m + 1), psig(m + 1);
    const double zstar = std::log(std::pow(2.0, km / (-kp)) - 1.0) / km;
    for (int i = 0; i <= m; ++i) {
        const double E = std::exp(std::min(km * (xi[i] - sT + zstar), 700.0));
        const double core = std::pow(1.0 + E, kp / km);
        phig[i] = phiL * core;
        psig[i] = psiR * (1.0 - core);
    }
    if (phi_guess && psi_guess) {
        if (static_cast<int>(phi_guess->size()) != m + 1 ||
            static_cast<int>(psi_guess->size()) != m + 1)
            throw GridMismatch("guess size does not match the mesh");
        // Translate the caller's guess so its own half-level crossing sits
        // at the internal anchor; a far-off-phase start defeats the
        // unfolded iteration, and the converged profile does not depend on
        // the starting translate.
        int offset = 0;
        for (int i = 0; i < m; ++i) {
            const double lo = (*psi_guess)[i] - 0.5 * psiR;
            const double hi = (*psi_guess)[i + 1] - 0.5 * psiR;
            if (lo * hi <= 0.0 && lo != hi) {
                offset = static_cast<int>(std::lround((sT + X) / h)) - i;
                break;
            }
        }
        for (int i = 0; i <= m; ++i) {
            const int j = i - offset;
            if (j < 0) {
                phi[i] = phiL;
                psi[i] = 0.0;
            } else if (j > m) {
                phi[i] = 0.0;
                psi[i] = psiR;
            } else {
                phi[i] = (*phi_guess)[j];
                psi[i] = (*psi_guess)[j];
            }
        }
    } else {
        phi = phig;
        psi = psig;
    }
    std::vector<double> dphig(m + 1, 0.0), dpsig(m + 1, 0.0);
    for (int i = 1; i < m; ++i) {
        dphig[i] = (phig[i + 1] - phig[i - 1]) / (2.0 * h);
        dpsig[i] = (psig[i + 1] - psig[i - 1]) / (2.0 * h);
    }

    // Collocation with tail-rate (Robin) boundary relations. A Dirichlet
    // box at prescribed supercritical c has no interior front: its only
    // exact steady states are quasi-minimal-speed fronts, and Newton slides
    // toward them. Enforcing the exact discrete tail ratios at the walls
    // removes that branch. Translation is nearly free here, so the system
    // is unfolded with a forcing amplitude eps along the reference
    // translation mode plus an integral phase condition; at the solution
    // eps collapses to the (tiny) genuine truncation drift.
    const double rhoM = std::exp(km * h), rhoP = std::exp(kp * h);
    const int nu = 2 * (m + 1) + 1;  // all nodes plus eps
    const double inv_h2 = 1.0 / (h * h), inv_2h = 1.0 / (2.0 * h);
    double eps = 0.0;

    auto col_phi = [](int i) { return 2 * i; };
    auto col_psi = [](int i) { return 2 * i + 1; };

    auto residual_robin = [&](const std::vector<double>& f,
                              const std::vector<double>& s, double ep,
                              Eigen::VectorXd& F) {
        F[0] = (phiL - f[1]) - rhoM * (phiL - f[0]);
        F[1] = s[1] - rhoM * s[0];
        for (int i = 1; i < m; ++i) {
            F[2 + 2 * (i - 1)] =
                (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv_h2 +
                c * (f[i + 1] - f[i - 1]) * inv_2h +
                f[i] * (1.0 + delta - f[i] - p.a * s[i]) + ep * dphig[i];
            F[2 + 2 * (i - 1) + 1] =
                p.d * (s[i - 1] - 2.0 * s[i] + s[i + 1]) * inv_h2 +
                c * (s[i + 1] - s[i - 1]) * inv_2h +
                p.r * s[i] * (1.0 - 2.0 * delta - s[i] - p.b * f[i]) +
                ep * dpsig[i];
        }
        F[2 * m] = f[m] - rhoP * f[m - 1];
        F[2 * m + 1] = (psiR - s[m]) - rhoP * (psiR - s[m - 1]);
        double phase = 0.0;
        for (int i = 1; i < m; ++i)
            phase += (f[i] - phig[i]) * dphig[i] + (s[i] - psig[i]) * dpsig[i];
        F[2 * m + 2] = phase * h;
    };

    Eigen::VectorXd F(nu), Fnew(nu);
    residual_robin(phi, psi, eps, F);
    double merit = F.norm();

    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    Eigen::SparseMatrix<double> J(nu, nu);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

    const int max_newton = 50;
    bool converged = false;
    for (int it = 0; it < max_newton; ++it) {
        if (merit < 1e-11) {
            converged = true;
            break;
        }
        trips.clear();
        trips.emplace_back(0, col_phi(1), -1.0);
        trips.emplace_back(0, col_phi(0), rhoM);
        trips.emplace_back(1, col_psi(1), 1.0);
        trips.emplace_back(1, col_psi(0), -rhoM);
        for (int i = 1; i < m; ++i) {
            const int rp = 2 + 2 * (i - 1), rs = rp + 1;
            trips.emplace_back(rp, col_phi(i),
                               -2.0 * inv_h2 + (1.0 + delta - 2.0 * phi[i] -
                                                p.a * psi[i]));
            trips.emplace_back(rp, col_phi(i - 1), inv_h2 - c * inv_2h);
            trips.emplace_back(rp, col_phi(i + 1), inv_h2 + c * inv_2h);
            trips.emplace_back(rp, col_psi(i), -p.a * phi[i]);
            trips.emplace_back(rp, nu - 1, dphig[i]);
            trips.emplace_back(rs, col_psi(i),
                               -2.0 * p.d * inv_h2 +
                                   p.r * (1.0 - 2.0 * delta - 2.0 * psi[i] -
                                          p.b * phi[i]));
            trips.emplace_back(rs, col_psi(i - 1), p.d * inv_h2 - c * inv_2h);
            trips.emplace_back(rs, col_psi(i + 1), p.d * inv_h2 + c * inv_2h);
            trips.emplace_back(rs, col_phi(i), -p.r * p.b * psi[i]);
            trips.emplace_back(rs, nu - 1, dpsig[i]);
            trips.emplace_back(2 * m + 2, col_phi(i), dphig[i] * h);
            trips.emplace_back(2 * m + 2, col_psi(i), dpsig[i] * h);
        }
        trips.emplace_back(2 * m, col_phi(m), 1.0);
        trips.emplace_back(2 * m, col_phi(m - 1), -rhoP);
        trips.emplace_back(2 * m + 1, col_psi(m), -1.0);
        trips.emplace_back(2 * m + 1, col_psi(m - 1), rhoP);
        J.setFromTriplets(trips.begin(), trips.end());
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw NoConvergence("singular collocation Jacobian", merit);
        Eigen::VectorXd dx = lu.solve(-F);

        // Backtracking (Armijo) line search on the l2 merit.
        double alpha = 1.0;
        std::vector<double> phi_new = phi, psi_new = psi;
        double eps_new = eps, merit_new = merit;
        bool accepted = false;
        for (int half = 0; half < 45; ++half) {
            for (int i = 0; i <= m; ++i) {
                phi_new[i] = phi[i] + alpha * dx[col_phi(i)];
                psi_new[i] = psi[i] + alpha * dx[col_psi(i)];
            }
            eps_new = eps + alpha * dx[nu - 1];
            residual_robin(phi_new, psi_new, eps_new, Fnew);
            merit_new = Fnew.norm();
            if (std::isfinite(merit_new) &&
                merit_new < merit * (1.0 - 1e-4 * alpha)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // descent exhausted; accept what we have
        phi.swap(phi_new);
        psi.swap(psi_new);
        eps = eps_new;
        F.swap(Fnew);
        merit = merit_new;
    }
    converged = converged || merit < 1e-11;
    if (!converged && merit > 1e-8)
        throw NoConvergence("Newton iteration stalled", merit);

    // Wall surgery: subtract exact fast-decaying discrete modes of the left
    // linearization so the left endpoint meets the Dirichlet data exactly;
    // the right tail is already at round-off and is clamped. The psi fast
    // mode carries a slaved phi deficit K_f per unit psi.
    {
        const double symphi_kf =
            2.0 * (std::cosh(kf * h) - 1.0) / (h * h) +
            c * std::sinh(kf * h) / h - (1.0 + delta);
        const double Kf = -p.a * phiL / symphi_kf;
        const double rho_f = std::exp(kf * h), rho_pf = std::exp(kpf * h);
        double layer = psi[0];
        for (int i = 0; i <= m && std::abs(layer) > 1e-300; ++i) {
            psi[i] -= layer;
            phi[i] += Kf * layer;
            layer *= rho_f;
        }
        layer = phiL - phi[0];
        for (int i = 0; i <= m && std::abs(layer) > 1e-300; ++i) {
            phi[i] += layer;
            layer *= rho_pf;
        }
        phi[0] = phiL;
        psi[0] = 0.0;
        phi[m] = 0.0;
        psi[m] = psiR;
    }

    // The reported residual is the honest sup norm of the Dirichlet
    // collocation system on the final profile.
    double norm = 0.0;
    for (int i = 1; i < m; ++i) {
        const double fphi =
            (phi[i - 1] - 2.0 * phi[i] + phi[i + 1]) * inv_h2 +
            c * (phi[i + 1] - phi[i - 1]) * inv_2h +
            phi[i] * (1.0 + delta - phi[i] - p.a * psi[i]);
        const double fpsi =
            p.d * (psi[i - 1] - 2.0 * psi[i] + psi[i + 1]) * inv_h2 +
            c * (psi[i + 1] - psi[i - 1]) * inv_2h +
            p.r * psi[i] * (1.0 - 2.0 * delta - psi[i] - p.b * phi[i]);
        norm = std::max(norm, std::max(std::abs(fphi), std::abs(fpsi)));
    }

    // Re-anchor: shift xi so the interpolated psi = psiR / 2 crossing sits
    // at xi = 0.
    const double half = 0.5 * psiR;
    double shift = 0.0;
    bool found = false;
    for (int i = 0; i < m; ++i) {
        if ((psi[i] - half) * (psi[i + 1] - half) <= 0.0 && psi[i] != psi[i + 1]) {
            const double frac = (half - psi[i]) / (psi[i + 1] - psi[i]);
            shift = xi[i] + frac * h;
            found = true;
            break;
        }
    }
    if (!found) throw NoConvergence("psi never crosses its half level", norm);
    for (auto& z : xi) z -= shift;

    WaveProfile w;
    w.c = c;
    w.delta = delta;
    w.xi = std::move(xi);
    w.phi = std::move(phi);
    w.psi = std::move(psi);
    w.residual = norm;

    const double slack = 1e-8;
    w.phi_decreasing = true;
    w.psi_increasing = true;
    for (int i = 0; i < m; ++i) {
        if (w.phi[i + 1] > w.phi[i] + slack) w.phi_decreasing = false;
        if (w.psi[i + 1] < w.psi[i] - slack) w.psi_increasing = false;
    }

    // Wall-error model at the chosen anchor: quadratic remainder of the
    // linearized left tail plus the right clamp jump.
    const double L_arm = X + shift, R_arm = X - shift;
    w.truncation_error = std::exp(c_left - 2.0 * km * L_arm) +
                         std::exp(c_right + kp * R_arm);

    // Default decay measurements: bands clear of both the transition layer
    // (whose sub-leading corrections relax on the slow psi scale) and the
    // walls.
    const double hi_edge = w.xi.back(), lo_edge = w.xi.front();
    w.measured_decay_plus = measure_decay(w, speeds::Side::plus_inf,
                                          0.20 * hi_edge, 0.55 * hi_edge);
    w.measured_decay_minus = measure_decay(w, speeds::Side::minus_inf,
                                           0.75 * lo_edge, 0.35 * lo_edge);
    return w;
}

double measure_decay(const WaveProfile& w, speeds::Side side, double band_lo,
                     double band_hi) {
    if (!(band_lo < band_hi)) throw BandTooNarrow("empty fit band");
    const double lo_edge = w.xi.front(), hi_edge = w.xi.back();
    const double margin = 0.1 * 0.5 * (hi_edge - lo_edge);
    if (band_lo < lo_edge + margin || band_hi > hi_edge - margin)
        throw BandTooNarrow("fit band reaches into the boundary margin");

    const std::vector<double>& field =
        (side == speeds::Side::plus_inf) ? w.phi : w.psi;
    // The tail value decreases toward the matching infinity; on the minus
    // side the decaying quantity is psi(xi) ~ e^{+rate xi}.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t i = 0; i < w.xi.size(); ++i) {
        const double x = w.xi[i];
        if (x < band_lo || x > band_hi) continue;
        const double v = field[i];
        if (v <= 0.0) throw BandTooNarrow("non-positive tail value in the band");
        const double y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 10) throw TooFewSamples("fewer than 10 nodes in the fit band");
    const double det = count * sxx - sx * sx;
    const double slope = (count * sxy - sx * sy) / det;
    return (side == speeds::Side::plus_inf) ? -slope : slope;
}

bool uniqueness_condition(const ModelParams& p) {
    validate_params(p);
    return p.d <= 2.0 + p.r / (1.0 - p.a);
}

}  // namespace waves
}  // namespace terrace
