#include "terrace/solver.hpp"

#include <cmath>

namespace terrace {

namespace {

void check_config(const StatePair& s, const ModelParams& p,
                  const SolverConfig& cfg) {
    validate_grid(cfg.grid);
    if (s.u.size() != static_cast<std::size_t>(cfg.grid.n) ||
        s.v.size() != static_cast<std::size_t>(cfg.grid.n))
        throw GridMismatch("state size does not match grid");
    const double limit = cfl_limit(cfg.grid, p);
    if (!(cfg.dt > 0.0) || cfg.dt > limit * (1.0 + 1e-12))
        throw CflViolation("dt " + std::to_string(cfg.dt) + " exceeds limit " +
                           std::to_string(limit));
}

// In-place Euler update of (un, vn) from (u, v).
void euler_step(const std::vector<double>& u, const std::vector<double>& v,
                std::vector<double>& un, std::vector<double>& vn,
                const ModelParams& p, const SolverConfig& cfg) {
    const int n = cfg.grid.n;
    const double dx = cfg.grid.dx();
    const double mu_u = cfg.dt / (dx * dx);
    const double mu_v = p.d * cfg.dt / (dx * dx);
    const double dt = cfg.dt;
    const double a = p.a, b = p.b, r = p.r, delta = cfg.delta;

    for (int i = 0; i < n; ++i) {
        const double ul = u[i > 0 ? i - 1 : 1];
        const double ur = u[i < n - 1 ? i + 1 : n - 2];
        const double vl = v[i > 0 ? i - 1 : 1];
        const double vr = v[i < n - 1 ? i + 1 : n - 2];
        const double ui = u[i], vi = v[i];
        un[i] = ui + mu_u * (ul - 2.0 * ui + ur) +
                dt * ui * (1.0 + delta - ui - a * vi);
        vn[i] = vi + mu_v * (vl - 2.0 * vi + vr) +
                dt * r * vi * (1.0 - 2.0 * delta - vi - b * ui);
    }
    if (cfg.left_bc.kind == BcKind::dirichlet) {
        un[0] = cfg.left_bc.u_val;
        vn[0] = cfg.left_bc.v_val;
    }
    if (cfg.right_bc.kind == BcKind::dirichlet) {
        un[n - 1] = cfg.right_bc.u_val;
        vn[n - 1] = cfg.right_bc.v_val;
    }
}

}  // namespace

double cfl_limit(const Grid& g, const ModelParams& p) {
    const double dx = g.dx();
    const double diffusion = dx * dx / (2.0 * std::max(1.0, p.d));
    const double reaction = 1.0 / (4.0 * std::max(1.0, p.r * (p.b + 1.0)));
    return std::min(diffusion, reaction);
}

StatePair step(const StatePair& s, const ModelParams& p,
               const SolverConfig& cfg) {
    check_config(s, p, cfg);
    StatePair out;
    out.t = s.t + cfg.dt;
    out.u.resize(s.u.size());
    out.v.resize(s.v.size());
    euler_step(s.u, s.v, out.u, out.v, p, cfg);
    return out;
}

Trajectory integrate(const StatePair& s0, const ModelParams& p,
                     const SolverConfig& cfg,
                     const std::vector<Monitor>& monitors) {
    check_config(s0, p, cfg);
    if (cfg.t_end < 0.0) throw ConfigError("t_end must be nonnegative");

    Trajectory traj;
    traj.config = cfg;
    traj.params = p;

    const long total_steps = std::lround(cfg.t_end / cfg.dt);
    if (std::abs(total_steps * cfg.dt - cfg.t_end) > 1e-9 * std::max(1.0, cfg.t_end))
        throw ConfigError("t_end is not an integer multiple of dt");
    long stride = 0;
    if (total_steps > 0) {
        if (!(cfg.snapshot_every > 0.0))
            throw ConfigError("snapshot_every must be positive");
        stride = std::lround(cfg.snapshot_every / cfg.dt);
        if (stride <= 0 ||
            std::abs(stride * cfg.dt - cfg.snapshot_every) > 1e-12 * stride)
            throw ConfigError("snapshot_every must be an integer multiple of dt");
    }

    StatePair cur = s0;
    const double t0 = s0.t;
    auto emit = [&](const StatePair& s) {
        traj.snapshots.push_back(s);
        for (const auto& m : monitors) m(s);
    };
    emit(cur);
    if (total_steps == 0) return traj;

    std::vector<double> un(cur.u.size()), vn(cur.v.size());
    for (long k = 1; k <= total_steps; ++k) {
        euler_step(cur.u, cur.v, un, vn, p, cfg);
        cur.u.swap(un);
        cur.v.swap(vn);
        cur.t = t0 + k * cfg.dt;
        if (k % stride == 0 || k == total_steps) emit(cur);
    }
    return traj;
}

bool comparison_monitor(const Trajectory& sub, const Trajectory& super_,
                        double tol) {
    if (sub.snapshots.size() != super_.snapshots.size())
        throw GridMismatch("trajectories have different snapshot counts");
    for (std::size_t k = 0; k < sub.snapshots.size(); ++k) {
        const auto& a = sub.snapshots[k];
        const auto& b = super_.snapshots[k];
        if (std::abs(a.t - b.t) > 1e-9)
            throw GridMismatch("snapshot times differ");
        if (!competitive_leq(a, b, tol)) return false;
    }
    return true;
}

}  // namespace terrace
