#include "terrace/fronts.hpp"

#include <algorithm>
#include <cmath>

namespace terrace {
namespace fronts {

std::optional<double> level_position(const Grid& g,
                                     const std::vector<double>& field,
                                     double level) {
    if (!(level > 0.0 && level < 1.0))
        throw DomainError("level must lie in (0,1)");
    if (field.size() != static_cast<std::size_t>(g.n))
        throw GridMismatch("field size does not match grid");
    for (int i = g.n - 2; i >= 0; --i) {
        const double a = field[i] - level;
        const double b = field[i + 1] - level;
        if (a == 0.0 && b == 0.0) continue;  // flat at the level: keep scanning
        if (a * b <= 0.0) {
            // Crossing in [x_i, x_{i+1}]; interpolate.
            const double frac = a / (a - b);
            return g.x(i) + frac * g.dx();
        }
    }
    return std::nullopt;
}

FrontTrack track_front(const Trajectory& traj, Field which, double level,
                       bool guard_boundary) {
    FrontTrack track;
    track.level = level;
    const Grid& g = traj.config.grid;
    const double guard = g.x_max - 10.0 * g.dx();
    for (const auto& s : traj.snapshots) {
        const auto& f = (which == Field::u) ? s.u : s.v;
        const auto pos = level_position(g, f, level);
        if (!pos) continue;
        if (guard_boundary && *pos > guard)
            throw DomainEscape("front reached within 10 dx of x_max at t=" +
                               std::to_string(s.t));
        track.times.push_back(s.t);
        track.positions.push_back(*pos);
    }
    return track;
}

SpeedReport fit_speed(const FrontTrack& track, double window_fraction,
                      std::optional<double> predicted) {
    if (!(window_fraction > 0.0 && window_fraction <= 1.0))
        throw DomainError("window_fraction must lie in (0,1]");
    const std::size_t n = track.times.size();
    if (n < 2) throw TooFewSamples("need at least 2 samples to fit");
    for (std::size_t i = 1; i < n; ++i)
        if (!(track.times[i] > track.times[i - 1]))
            throw TooFewSamples("track times must be strictly increasing");

    const double t_lo =
        track.times.back() - window_fraction * (track.times.back() - track.times.front());
    std::vector<double> ts, xs;
    for (std::size_t i = 0; i < n; ++i) {
        if (track.times[i] >= t_lo - 1e-12) {
            ts.push_back(track.times[i]);
            xs.push_back(track.positions[i]);
        }
    }
    if (ts.size() < 10) throw TooFewSamples("fewer than 10 samples in window");

    const std::size_t m = ts.size();
    double st = 0, sx = 0, stt = 0, stx = 0;
    for (std::size_t i = 0; i < m; ++i) {
        st += ts[i];
        sx += xs[i];
        stt += ts[i] * ts[i];
        stx += ts[i] * xs[i];
    }
    const double denom = m * stt - st * st;
    SpeedReport rep;
    rep.fitted_speed = (m * stx - st * sx) / denom;
    rep.intercept = (sx - rep.fitted_speed * st) / m;
    rep.t0 = ts.front();
    rep.t1 = ts.back();
    double ss = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double res = xs[i] - (rep.fitted_speed * ts[i] + rep.intercept);
        ss += res * res;
    }
    rep.rms_residual = std::sqrt(ss / m);
    if (predicted) {
        rep.predicted = predicted;
        rep.relative_error =
            std::abs(rep.fitted_speed - *predicted) / std::abs(*predicted);
    }
    return rep;
}

std::optional<std::pair<double, double>> plateau_extent(
    const Grid& g, const StatePair& s, double u_star, double v_star,
    double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw DomainError("eps must lie in (0, 0.5)");
    double hi = -1.0;
    bool started = false;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (x < 0.0) continue;
        const double dev = std::abs(s.u[i] - u_star) + std::abs(s.v[i] - v_star);
        if (dev >= eps) break;
        hi = x;
        started = true;
    }
    if (!started) return std::nullopt;
    return std::make_pair(0.0, hi);
}

bool wedge_check(const Trajectory& traj, double c_lo, double c_hi,
                 double eps_geom, double eps_val) {
    if (traj.snapshots.empty()) throw DomainError("empty trajectory");
    const auto& s = traj.snapshots.back();
    const double t = s.t;
    const double x_lo = (c_lo + eps_geom) * t;
    const double x_hi = (c_hi - eps_geom) * t;
    if (!(x_lo < x_hi)) throw EmptyWedge("geometric wedge empty at final time");
    const Grid& g = traj.config.grid;
    double worst = 0.0;
    bool any = false;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (x < x_lo || x > x_hi) continue;
        any = true;
        worst = std::max(worst, std::abs(s.u[i]) + std::abs(s.v[i] - 1.0));
    }
    if (!any) throw EmptyWedge("no grid nodes inside the wedge");
    return worst < eps_val;
}

}  // namespace fronts
}  // namespace terrace
