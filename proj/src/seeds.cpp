#include "terrace/seeds.hpp"

#include <cmath>

#include "terrace/speeds.hpp"

namespace terrace {
namespace seeds {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::vector<double> bump(const Grid& g, double center, double halfwidth,
                         double amplitude) {
    validate_grid(g);
    if (!(amplitude > 0.0 && amplitude <= 1.0))
        throw DomainError("bump amplitude must lie in (0,1]");
    if (!(halfwidth > 0.0)) throw DomainError("bump halfwidth must be positive");
    if (center - halfwidth < g.x_min || center + halfwidth > g.x_max)
        throw SupportOutsideGrid("bump support exceeds the grid");
    const double taper = std::min(1.0, halfwidth);
    std::vector<double> f(g.n, 0.0);
    for (int i = 0; i < g.n; ++i) {
        const double s = std::abs(g.x(i) - center);
        if (s >= halfwidth) continue;
        if (s <= halfwidth - taper) {
            f[i] = amplitude;
        } else {
            f[i] = amplitude * 0.5 *
                   (1.0 + std::cos(kPi * (s - (halfwidth - taper)) / taper));
        }
    }
    return f;
}

std::vector<double> heaviside_like(const Grid& g, double edge) {
    validate_grid(g);
    if (edge <= g.x_min || edge > g.x_max)
        throw SupportOutsideGrid("heaviside edge outside the grid");
    std::vector<double> f(g.n, 0.0);
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (x <= edge - 1.0) f[i] = 1.0;
        else if (x < edge) f[i] = 0.5 * (1.0 + std::cos(kPi * (x - edge + 1.0)));
    }
    return f;
}

std::vector<double> exp_tail(const Grid& g, double rate, double anchor) {
    validate_grid(g);
    if (!(rate > 0.0)) throw DomainError("exp_tail rate must be positive");
    std::vector<double> f(g.n);
    for (int i = 0; i < g.n; ++i)
        f[i] = std::min(1.0, std::exp(-rate * (g.x(i) - anchor)));
    return f;
}

std::pair<std::vector<double>, std::vector<double>> terrace_pair(
    const Grid& g, const ModelParams& p, double c1, double c2, double c_llw,
    double x_v) {
    validate_grid(g);
    validate_params(p);
    if (c_llw < 0.0) c_llw = 2.0 * std::sqrt(1.0 - p.a);
    if (speeds::admissible(c1, c2, p, c_llw) != speeds::Admissibility::interior)
        throw NotAdmissible("terrace_pair needs an interior speed pair");
    const double lam = speeds::big_lambda(c2, c1, p.a, 0.0);
    const double lam_v = speeds::lambda_v(c1, p.r, p.d);
    std::vector<double> u0(g.n), v0(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        u0[i] = std::min(1.0, std::exp(-lam * x));
        v0[i] = std::min(1.0, std::exp(-lam_v * (x - x_v)));
    }
    return {u0, v0};
}

std::pair<std::vector<double>, std::vector<double>> llw_background(
    const Grid& g, const ModelParams& p) {
    validate_grid(g);
    validate_params(p);
    const double halfwidth = 5.0;
    const double center = g.x_min + halfwidth + 2.0;
    auto u0 = bump(g, center, halfwidth, 1.0);
    std::vector<double> v0(g.n, 1.0);
    return {u0, v0};
}

}  // namespace seeds
}  // namespace terrace
