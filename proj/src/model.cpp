#include "terrace/model.hpp"

namespace terrace {

ModelParams validate_params(const ModelParams& p) {
    if (!(p.d > 0.0) || !std::isfinite(p.d)) throw OutOfRegime("d", "requires d > 0");
    if (!(p.r > 0.0) || !std::isfinite(p.r)) throw OutOfRegime("r", "requires r > 0");
    if (!(p.a > 0.0 && p.a < 1.0)) throw OutOfRegime("a", "requires 0 < a < 1");
    if (!(p.b > 1.0) || !std::isfinite(p.b)) throw OutOfRegime("b", "requires b > 1");
    return p;
}

std::pair<double, double> reaction(const ModelParams& p, double u, double v,
                                   double delta) {
    return {u * (1.0 + delta - u - p.a * v),
            p.r * v * (1.0 - 2.0 * delta - v - p.b * u)};
}

Grid validate_grid(const Grid& g) {
    if (g.n < 3) throw DomainError("grid needs n >= 3");
    if (!(g.dx() > 0.0)) throw DomainError("grid needs x_max > x_min");
    return g;
}

bool competitive_leq(const StatePair& s1, const StatePair& s2, double tol) {
    if (s1.u.size() != s2.u.size() || s1.v.size() != s2.v.size())
        throw GridMismatch("states have different sizes");
    for (std::size_t i = 0; i < s1.u.size(); ++i) {
        if (s1.u[i] > s2.u[i] + tol) return false;
        if (s1.v[i] < s2.v[i] - tol) return false;
    }
    return true;
}

}  // namespace terrace
