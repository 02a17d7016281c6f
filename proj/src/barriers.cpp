#include "terrace/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "terrace/errors.hpp"

namespace terrace {
namespace barriers {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double sqr(double x) { return x * x; }

}  // namespace

// ---------------------------------------------------------------------------
// ProfileData: uniform-grid cubic Hermite data with exponential extensions.
// ---------------------------------------------------------------------------

struct ProfileData {
    double x0 = 0.0, dx = 0.0;
    int n = 0;
    std::vector<double> w, wp;    // component 0
    std::vector<double> w2, w2p;  // component 1 (wave pair: psi)
    bool has2 = false;

    // f(x) = limit + coef * exp(rate * (x - xa)) outside [trim_lo, trim_hi].
    struct Ext {
        double limit = 0.0, coef = 0.0, rate = 0.0, xa = 0.0;
    };
    Ext lo_ext[2], hi_ext[2];
    double trim_lo = 0.0, trim_hi = 0.0;

    double xmax() const { return x0 + dx * (n - 1); }

    double eval(double x, int comp, int deriv) const {
        if (x < trim_lo || x > trim_hi) {
            const Ext& e = (x < trim_lo) ? lo_ext[comp] : hi_ext[comp];
            const double g = e.coef * std::exp(e.rate * (x - e.xa));
            return deriv == 0 ? e.limit + g : e.rate * g;
        }
        int i = static_cast<int>(std::floor((x - x0) / dx));
        i = std::min(std::max(i, 0), n - 2);
        const double t = (x - (x0 + i * dx)) / dx;
        const std::vector<double>& W = comp == 0 ? w : w2;
        const std::vector<double>& Wp = comp == 0 ? wp : w2p;
        if (deriv == 0) {
            const double h00 = (1.0 + 2.0 * t) * sqr(1.0 - t);
            const double h10 = t * sqr(1.0 - t);
            const double h01 = sqr(t) * (3.0 - 2.0 * t);
            const double h11 = sqr(t) * (t - 1.0);
            return h00 * W[i] + h10 * dx * Wp[i] + h01 * W[i + 1] +
                   h11 * dx * Wp[i + 1];
        }
        const double g00 = 6.0 * t * (t - 1.0) / dx;
        const double g10 = (3.0 * t - 1.0) * (t - 1.0);
        const double g01 = -6.0 * t * (t - 1.0) / dx;
        const double g11 = t * (3.0 * t - 2.0);
        return g00 * W[i] + g10 * Wp[i] + g01 * W[i + 1] + g11 * Wp[i + 1];
    }

    // Sets one extension from the log-slope at the trim node.
    void set_ext(bool high, int comp, double limit) {
        const std::vector<double>& W = comp == 0 ? w : w2;
        const std::vector<double>& Wp = comp == 0 ? wp : w2p;
        Ext e;
        const double xa = high ? trim_hi : trim_lo;
        int i = static_cast<int>(std::round((xa - x0) / dx));
        i = std::min(std::max(i, 0), n - 1);
        e.limit = limit;
        e.xa = x0 + i * dx;
        e.coef = W[i] - limit;
        e.rate = (std::abs(e.coef) > 0.0) ? Wp[i] / e.coef : 0.0;
        (high ? hi_ext[comp] : lo_ext[comp]) = e;
    }
};

namespace {

// ---------------------------------------------------------------------------
// Scalar KPP wave  D w'' + c w' + q w (M - w) = 0, decreasing from M to 0,
// integrated by RK4 along the unstable manifold of the saddle (M, 0) and
// re-anchored so w(0) = M/2.
// ---------------------------------------------------------------------------

struct KppRaw {
    std::vector<double> x, w, wp;
};

KppRaw kpp_integrate(double D, double c, double q, double M, double step) {
    const double mu = (-c + std::sqrt(c * c + 4.0 * D * q * M)) / (2.0 * D);
    const double eps = 1e-8;
    double W = M * (1.0 - eps), P = -eps * M * mu, x = 0.0;
    KppRaw out;
    out.x.reserve(1 << 16);
    auto fP = [&](double Wv, double Pv) { return (-c * Pv - q * Wv * (M - Wv)) / D; };
    const double floor_w = 1e-13 * M;
    const long max_steps = 4000000;
    for (long s = 0; s < max_steps && W > floor_w; ++s) {
        out.x.push_back(x);
        out.w.push_back(W);
        out.wp.push_back(P);
        const double k1w = P, k1p = fP(W, P);
        const double k2w = P + 0.5 * step * k1p,
                     k2p = fP(W + 0.5 * step * k1w, P + 0.5 * step * k1p);
        const double k3w = P + 0.5 * step * k2p,
                     k3p = fP(W + 0.5 * step * k2w, P + 0.5 * step * k2p);
        const double k4w = P + step * k3p,
                     k4p = fP(W + step * k3w, P + step * k3p);
        W += step / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        P += step / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        x += step;
        if (W > 1.5 * M || W < -0.5 * M)
            throw NoConvergence("KPP phase-plane integration left the wave window",
                                W);
    }
    out.x.push_back(x);
    out.w.push_back(W);
    out.wp.push_back(P);
    return out;
}

std::shared_ptr<ProfileData> solve_kpp(double D, double c, double q, double M,
                                       double step, double* residual_out) {
    if (c < 2.0 * std::sqrt(D * q * M) - 1e-12)
        throw SubcriticalSpeed("KPP block speed below 2 sqrt(D q M) = " +
                               std::to_string(2.0 * std::sqrt(D * q * M)));
    KppRaw raw = kpp_integrate(D, c, q, M, step);
    // Anchor: first downward crossing of M/2.
    std::size_t k = 0;
    while (k + 1 < raw.w.size() && raw.w[k] > 0.5 * M) ++k;
    if (k == 0 || k + 1 >= raw.w.size())
        throw NoConvergence("KPP wave never crossed its anchor level", raw.w.back());
    const double t = (raw.w[k - 1] - 0.5 * M) / (raw.w[k - 1] - raw.w[k]);
    const double xc = raw.x[k - 1] + t * step;

    auto pd = std::make_shared<ProfileData>();
    pd->n = static_cast<int>(raw.x.size());
    pd->x0 = raw.x.front() - xc;
    pd->dx = step;
    pd->w = std::move(raw.w);
    pd->wp = std::move(raw.wp);
    pd->trim_lo = pd->x0;
    pd->trim_hi = pd->x0 + step * (pd->n - 1);
    pd->set_ext(false, 0, M);
    pd->set_ext(true, 0, 0.0);

    if (residual_out) {
        // Consistency against a half-step integration.
        KppRaw fine = kpp_integrate(D, c, q, M, 0.5 * step);
        std::size_t kf = 0;
        while (kf + 1 < fine.w.size() && fine.w[kf] > 0.5 * M) ++kf;
        const double tf =
            (fine.w[kf - 1] - 0.5 * M) / (fine.w[kf - 1] - fine.w[kf]);
        const double xcf = fine.x[kf - 1] + tf * 0.5 * step;
        double worst = 0.0;
        for (int s = 1; s < 80; ++s) {
            const double xi =
                pd->trim_lo + s * (pd->trim_hi - pd->trim_lo) / 80.0;
            // value from the fine run at the same anchored coordinate
            const double xf = xi + xcf;
            if (xf < fine.x.front() || xf > fine.x.back()) continue;
            const std::size_t j = static_cast<std::size_t>(xf / (0.5 * step));
            if (j + 1 >= fine.w.size()) continue;
            const double u = (xf - fine.x[j]) / (0.5 * step);
            const double vf = (1.0 - u) * fine.w[j] + u * fine.w[j + 1];
            worst = std::max(worst, std::abs(pd->eval(xi, 0, 0) - vf));
        }
        *residual_out = worst;
    }
    return pd;
}

// ---------------------------------------------------------------------------
// Dirichlet bump  -D w'' - s w' = q w (M - w)  on (0, len), zero boundary.
// Damped Newton on central-difference collocation.
// ---------------------------------------------------------------------------

void thomas(std::vector<double>& a, std::vector<double>& b,
            std::vector<double>& c, std::vector<double>& rhs) {
    const std::size_t m = b.size();
    for (std::size_t i = 1; i < m; ++i) {
        const double f = a[i] / b[i - 1];
        b[i] -= f * c[i - 1];
        rhs[i] -= f * rhs[i - 1];
    }
    rhs[m - 1] /= b[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - c[i] * rhs[i + 1]) / b[i];
}

struct Bump {
    std::vector<double> x, w, wp;
    double residual = 0.0, maxval = 0.0, argmax = 0.0;
};

bool solve_bump_from(double D, double s, double q, double M, double len, int n,
                     std::vector<double>& W, double* res_out) {
    const double h = len / (n - 1);
    std::vector<double> F(n - 2), da(n - 2), db(n - 2), dc(n - 2), step(n - 2);
    auto residual = [&](const std::vector<double>& V) {
        double worst = 0.0;
        for (int i = 1; i + 1 < n; ++i) {
            const double f = -D * (V[i + 1] - 2.0 * V[i] + V[i - 1]) / (h * h) -
                             s * (V[i + 1] - V[i - 1]) / (2.0 * h) -
                             q * V[i] * (M - V[i]);
            F[i - 1] = f;
            worst = std::max(worst, std::abs(f));
        }
        return worst;
    };
    double rn = residual(W);
    const double tol = 1e-10 * q * M * M + 256.0 * 2.2e-16 * D * M / (h * h);
    // Iterate to a stall rather than stopping at the tolerance: a trajectory
    // collapsing onto the trivial solution then reaches it exactly and is
    // rejected by the caller's amplitude filter instead of being mistaken
    // for a small genuine bump.
    for (int it = 0; it < 80 && rn > 1e-16 * q * M * M; ++it) {
        for (int i = 1; i + 1 < n; ++i) {
            db[i - 1] = 2.0 * D / (h * h) - q * (M - 2.0 * W[i]);
            da[i - 1] = -D / (h * h) + s / (2.0 * h);
            dc[i - 1] = -D / (h * h) - s / (2.0 * h);
        }
        residual(W);
        step = F;
        thomas(da, db, dc, step);
        double damp = 1.0;
        bool ok = false;
        for (int ls = 0; ls < 30; ++ls) {
            std::vector<double> T = W;
            for (int i = 1; i + 1 < n; ++i) T[i] -= damp * step[i - 1];
            const double rt = residual(T);
            if (rt < rn * (1.0 - 1e-4 * damp) || rt < 1e-13) {
                W = T;
                rn = rt;
                ok = true;
                break;
            }
            damp *= 0.5;
        }
        if (!ok) break;
    }
    if (res_out) *res_out = rn;
    return rn < tol;
}

bool solve_bump(double D, double s, double q, double M, double len, int n,
                Bump& out) {
    const double h = len / (n - 1);
    const double amps[] = {0.95, 0.6, 0.3, 0.1, 0.02, 0.003};
    for (double amp : amps) {
        std::vector<double> W(n, 0.0);
        for (int i = 0; i < n; ++i)
            W[i] = amp * M * std::sin(kPi * i / (n - 1.0));
        double res = 0.0;
        if (!solve_bump_from(D, s, q, M, len, n, W, &res)) continue;
        double mx = 0.0, mn = 0.0;
        int im = 0;
        for (int i = 0; i < n; ++i) {
            if (W[i] > mx) { mx = W[i]; im = i; }
            mn = std::min(mn, W[i]);
        }
        if (mx < 1e-7 * M || mn < -1e-9) continue;
        out.x.resize(n);
        out.wp.resize(n);
        out.w = W;
        for (int i = 0; i < n; ++i) out.x[i] = i * h;
        // Fourth-order one-sided/central first derivatives.
        for (int i = 0; i < n; ++i) {
            if (i >= 2 && i + 2 < n)
                out.wp[i] = (-W[i + 2] + 8.0 * W[i + 1] - 8.0 * W[i - 1] + W[i - 2]) /
                            (12.0 * h);
            else if (i == 0)
                out.wp[i] = (-3.0 * W[0] + 4.0 * W[1] - W[2]) / (2.0 * h);
            else if (i == n - 1)
                out.wp[i] = (3.0 * W[n - 1] - 4.0 * W[n - 2] + W[n - 3]) / (2.0 * h);
            else
                out.wp[i] = (W[i + 1] - W[i - 1]) / (2.0 * h);
        }
        out.residual = res;
        out.maxval = mx;
        // Refine the argmax through the quadratic fit of the three nodes.
        if (im > 0 && im + 1 < n) {
            const double den = W[im - 1] - 2.0 * W[im] + W[im + 1];
            const double off = (den != 0.0)
                                   ? 0.5 * (W[im - 1] - W[im + 1]) / den
                                   : 0.0;
            out.argmax = out.x[im] + off * h;
        } else {
            out.argmax = out.x[im];
        }
        return true;
    }
    return false;
}

// Existence thresholds (principal-eigenvalue condition, exact in the
// continuum because the drift is constant): q M - s^2/(4D) > D (pi/len)^2.
double bump_threshold_len(double D, double s, double q, double M) {
    const double gap = q * M - s * s / (4.0 * D);
    if (gap <= 0.0) return std::numeric_limits<double>::infinity();
    return kPi * std::sqrt(D / gap);
}

}  // namespace

// ---------------------------------------------------------------------------
// Closed-form parameter kits and block construction.
// ---------------------------------------------------------------------------

namespace {

double cget(const BuildingBlock& b, const char* k) {
    auto it = b.constants.find(k);
    if (it == b.constants.end())
        throw DomainError(std::string("missing block constant ") + k);
    return it->second;
}

// Window half-width of the tilted pi sub-solution.
double pi_window(double ct, double r, double h) { return std::sqrt(ct / (r * h)); }

}  // namespace

const char* to_string(BlockKind k) {
    switch (k) {
        case BlockKind::chi: return "chi";
        case BlockKind::pi: return "pi";
        case BlockKind::pi_h: return "pi_h";
        case BlockKind::omega: return "omega";
        case BlockKind::alpha: return "alpha";
        case BlockKind::theta: return "theta";
        case BlockKind::beta: return "beta";
        case BlockKind::wbar: return "wbar";
        case BlockKind::wunder: return "wunder";
        case BlockKind::z: return "z";
        case BlockKind::eigenpair: return "eigenpair";
        case BlockKind::wave_phi: return "wave_phi";
        case BlockKind::wave_psi: return "wave_psi";
    }
    return "?";
}

namespace {

// Frame value/dx/dxx of a block at y = x - speed t - shift; the t-decay
// factor exp(-lamDt * t) multiplies wbar / wunder / z.
void frame_eval(const BuildingBlock& b, double y, double& v, double& d1,
                double& d2) {
    const ModelParams& p = b.spec.p;
    switch (b.kind) {
        case BlockKind::chi:
        case BlockKind::pi: {
            const double D = cget(b, "D"), q = cget(b, "q"), M = cget(b, "M");
            v = b.profile->eval(y, 0, 0);
            d1 = b.profile->eval(y, 0, 1);
            d2 = (-b.spec.c * d1 - q * v * (M - v)) / D;
            return;
        }
        case BlockKind::pi_h: {
            const double D = cget(b, "D"), q = cget(b, "q"), M = cget(b, "M");
            const double pv = b.profile->eval(y, 0, 0);
            const double pd = b.profile->eval(y, 0, 1);
            v = pv + b.spec.h * y;
            d1 = pd + b.spec.h;
            d2 = (-b.spec.c * pd - q * pv * (M - pv)) / D;
            return;
        }
        case BlockKind::omega: {
            const double R = b.spec.R;
            if (y <= -R || y >= R) { v = d1 = d2 = 0.0; return; }
            const double drift = cget(b, "drift");
            v = b.profile->eval(y + R, 0, 0);
            d1 = b.profile->eval(y + R, 0, 1);
            d2 = (-drift * d1 - p.r * v * (1.0 - b.spec.delta - v)) / p.d;
            return;
        }
        case BlockKind::alpha: {
            const double l = b.spec.l;
            if (y <= 0.0 || y >= l) { v = d1 = d2 = 0.0; return; }
            v = b.profile->eval(y, 0, 0);
            d1 = b.profile->eval(y, 0, 1);
            d2 = -v * (1.0 - p.a - v);
            return;
        }
        case BlockKind::theta: {
            const double lp = cget(b, "lam_plus"), lm = cget(b, "lam_minus");
            const double s = y - cget(b, "xi_theta");
            const double e1 = b.spec.A * std::exp(lp * s), e2 = std::exp(lm * s);
            v = e1 - e2;
            d1 = lp * e1 - lm * e2;
            d2 = lp * lp * e1 - lm * lm * e2;
            return;
        }
        case BlockKind::beta: {
            if (y <= 0.0) { v = d1 = d2 = 0.0; return; }
            const double lv = cget(b, "lam_v"), eta = b.spec.eta;
            const double s = y + cget(b, "xi_beta");
            const double e1 = std::exp(-lv * s);
            const double e2 = cget(b, "K_beta") * std::exp(-(lv + eta) * s);
            v = e1 - e2;
            d1 = -lv * e1 + (lv + eta) * e2;
            d2 = lv * lv * e1 - sqr(lv + eta) * e2;
            return;
        }
        case BlockKind::wbar: {
            const double L = cget(b, "Lam");
            v = std::exp(-L * y);
            d1 = -L * v;
            d2 = L * L * v;
            return;
        }
        case BlockKind::wunder: {
            if (y <= 0.0) { v = d1 = d2 = 0.0; return; }
            const double L = cget(b, "Lam"), eta = b.spec.eta;
            const double s = y + cget(b, "x_w");
            const double m1 = b.spec.scale * std::exp(-L * s);
            const double m2 =
                b.spec.scale * cget(b, "K_w") * std::exp(-(L + eta) * s);
            v = m1 - m2;
            d1 = -L * m1 + (L + eta) * m2;
            d2 = L * L * m1 - sqr(L + eta) * m2;
            return;
        }
        case BlockKind::z: {
            const double Rz = cget(b, "R_z");
            if (y <= 0.0 || y >= 2.0 * Rz) { v = d1 = d2 = 0.0; return; }
            const double k = cget(b, "k"), m = cget(b, "m"), A = b.spec.A;
            const double e = A * std::exp(-m * y);
            const double sn = std::sin(k * y), cn = std::cos(k * y);
            v = e * sn;
            d1 = e * (-m * sn + k * cn);
            d2 = e * ((m * m - k * k) * sn - 2.0 * m * k * cn);
            return;
        }
        case BlockKind::eigenpair: {
            const double R = b.spec.R;
            if (y <= -4.0 * R || y >= 4.0 * R) { v = d1 = d2 = 0.0; return; }
            const double k = kPi / (8.0 * R);
            v = std::cos(k * y);
            d1 = -k * std::sin(k * y);
            d2 = -k * k * v;
            return;
        }
        case BlockKind::wave_phi: {
            const double dl = b.spec.delta;
            v = b.profile->eval(y, 0, 0);
            d1 = b.profile->eval(y, 0, 1);
            const double psi = b.profile->eval(y, 1, 0);
            d2 = -b.spec.c * d1 - v * (1.0 + dl - v - p.a * psi);
            return;
        }
        case BlockKind::wave_psi: {
            const double dl = b.spec.delta;
            v = b.profile->eval(y, 1, 0);
            d1 = b.profile->eval(y, 1, 1);
            const double phi = b.profile->eval(y, 0, 0);
            d2 = (-b.spec.c * d1 - p.r * v * (1.0 - 2.0 * dl - v - p.b * phi)) / p.d;
            return;
        }
    }
    v = d1 = d2 = 0.0;
}

double decay_factor(const BuildingBlock& b, double t) {
    auto it = b.constants.find("lamDt");
    return (it == b.constants.end() || it->second == 0.0)
               ? 1.0
               : std::exp(-it->second * t);
}

}  // namespace

double BuildingBlock::value(double t, double x) const {
    double v, d1, d2;
    frame_eval(*this, x - speed * t - shift, v, d1, d2);
    return decay_factor(*this, t) * v;
}

double BuildingBlock::dx(double t, double x) const {
    double v, d1, d2;
    frame_eval(*this, x - speed * t - shift, v, d1, d2);
    return decay_factor(*this, t) * d1;
}

double BuildingBlock::dxx(double t, double x) const {
    double v, d1, d2;
    frame_eval(*this, x - speed * t - shift, v, d1, d2);
    return decay_factor(*this, t) * d2;
}

double BuildingBlock::dt(double t, double x) const {
    double v, d1, d2;
    frame_eval(*this, x - speed * t - shift, v, d1, d2);
    const double f = decay_factor(*this, t);
    double lamDt = 0.0;
    auto it = constants.find("lamDt");
    if (it != constants.end()) lamDt = it->second;
    return f * (-lamDt * v - speed * d1);
}

namespace {

// Identity residual of the closed-form kinds on a sample sweep.
double closed_form_residual(const BuildingBlock& b) {
    const ModelParams& p = b.spec.p;
    double worst = 0.0;
    const double ts[] = {0.0, 1.0, 5.0};
    for (double t : ts) {
        for (int i = 1; i < 120; ++i) {
            const double y = -10.0 + 40.0 * i / 120.0;
            const double x = y + b.speed * t + b.shift;
            double v, d1, d2;
            frame_eval(b, y, v, d1, d2);
            if (v == 0.0 && d1 == 0.0 && d2 == 0.0) continue;
            const double f = decay_factor(b, t);
            const double val = f * v, vx = f * d1, vxx = f * d2;
            const double vt = b.dt(t, x);
            double res = 0.0;
            switch (b.kind) {
                case BlockKind::theta:
                    res = -p.d * vxx - b.spec.c * vx -
                          p.r * (1.0 - b.spec.delta - p.b) * val;
                    break;
                case BlockKind::beta: {
                    const double lv = cget(b, "lam_v"), eta = b.spec.eta;
                    const double Db =
                        eta * (std::sqrt(sqr(b.spec.c) - 4.0 * p.r * p.d) -
                               p.d * eta);
                    const double e2 = cget(b, "K_beta") *
                                      std::exp(-(lv + eta) * (y + cget(b, "xi_beta")));
                    res = (-b.spec.c * vx - p.d * vxx - p.r * val) + Db * e2;
                    break;
                }
                case BlockKind::wbar:
                    res = vt - vxx - val;
                    break;
                case BlockKind::wunder: {
                    const double eta = b.spec.eta, L = cget(b, "Lam");
                    const double Dw = eta * (b.spec.ct - eta - 2.0 * L);
                    const double e2 = b.spec.scale * f * cget(b, "K_w") *
                                      std::exp(-(L + eta) * (y + cget(b, "x_w")));
                    res = (vt - vxx - val) + Dw * e2;
                    break;
                }
                case BlockKind::z:
                    res = vt - vxx - (1.0 - b.spec.delta) * val;
                    break;
                case BlockKind::eigenpair:
                    res = -p.d * vxx - cget(b, "lambda") * val;
                    break;
                default:
                    return 0.0;
            }
            // Relative to the local magnitude: the identities are exact in
            // real arithmetic, so only rounding on large exponentials remains.
            worst = std::max(worst, std::abs(res) / std::max(1.0, std::abs(val)));
        }
    }
    return worst;
}

}  // namespace

BuildingBlock build_block(BlockKind kind, const BlockSpec& spec_in) {
    BlockSpec spec = spec_in;
    validate_params(spec.p);
    if (spec.delta < 0.0 || spec.delta >= 0.5)
        throw DomainError("block delta must lie in [0, 1/2)");
    const ModelParams& p = spec.p;
    BuildingBlock b;
    b.kind = kind;
    b.spec = spec;
    b.speed = spec.c;

    switch (kind) {
        case BlockKind::chi: {
            const double M = 0.5 * (1.0 - p.a);
            if (spec.c < 2.0 * std::sqrt(M) - 1e-12)
                throw SubcriticalSpeed("chi speed below 2 sqrt((1-a)/2)");
            b.constants["D"] = 1.0;
            b.constants["q"] = 1.0;
            b.constants["M"] = M;
            double res = 0.0;
            b.profile = solve_kpp(1.0, spec.c, 1.0, M, 0.004, &res);
            b.residual = res;
            b.constants["rate_right"] = -b.profile->hi_ext[0].rate;
            break;
        }
        case BlockKind::pi:
        case BlockKind::pi_h: {
            const double M = 1.0 - spec.delta;
            if (spec.c < 2.0 * std::sqrt(p.r * p.d * M) - 1e-12)
                throw SubcriticalSpeed("pi speed below 2 sqrt(r d (1-delta))");
            if (kind == BlockKind::pi_h && !(spec.h > 0.0))
                throw DomainError("pi_h requires h > 0");
            b.constants["D"] = p.d;
            b.constants["q"] = p.r;
            b.constants["M"] = M;
            double res = 0.0;
            b.profile = solve_kpp(p.d, spec.c, p.r, M, 0.004, &res);
            b.residual = res;
            if (kind == BlockKind::pi_h) {
                const double W = pi_window(spec.c, p.r, spec.h);
                b.constants["W"] = W;
                // Argmax of pi + h y on (-W, 0): the single zero of pi' + h.
                double lo = -W, hi = 0.0;
                for (int i = 0; i < 80; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    (b.profile->eval(mid, 0, 1) + spec.h > 0.0 ? lo : hi) = mid;
                }
                b.constants["argmax"] = 0.5 * (lo + hi);
                b.constants["maxval"] =
                    b.profile->eval(0.5 * (lo + hi), 0, 0) +
                    spec.h * 0.5 * (lo + hi);
            }
            break;
        }
        case BlockKind::omega: {
            const double M = 1.0 - spec.delta;
            const double drift =
                2.0 * std::sqrt(p.r * M * p.d) - spec.delta;
            const double Rmin = 0.5 * bump_threshold_len(p.d, drift, p.r, M);
            if (!(spec.R > Rmin))
                throw DomainError("omega radius below the minimal radius " +
                                  std::to_string(Rmin));
            Bump bump;
            const int n = spec.mesh > 0
                              ? spec.mesh
                              : std::min(4001, std::max(1201, int(2.0 * spec.R / 0.01)));
            if (!solve_bump(p.d, drift, p.r, M, 2.0 * spec.R, n, bump))
                throw NoConvergence("omega bump solve failed", 1.0);
            auto pd = std::make_shared<ProfileData>();
            pd->n = n;
            pd->x0 = 0.0;
            pd->dx = 2.0 * spec.R / (n - 1);
            pd->w = bump.w;
            pd->wp = bump.wp;
            pd->trim_lo = -1e300;
            pd->trim_hi = 1e300;
            b.profile = pd;
            b.residual = bump.residual;
            b.constants["drift"] = drift;
            b.constants["R"] = spec.R;
            b.constants["argmax"] = bump.argmax - spec.R;  // in the frame y
            b.constants["maxval"] = bump.maxval;
            break;
        }
        case BlockKind::alpha: {
            const double Lmin = kPi / std::sqrt(1.0 - p.a);
            if (!(spec.l > Lmin))
                throw DomainError("alpha length below the minimal length " +
                                  std::to_string(Lmin));
            Bump bump;
            const int n = spec.mesh > 0
                              ? spec.mesh
                              : std::min(4001, std::max(1201, int(spec.l / 0.01)));
            if (!solve_bump(1.0, 0.0, 1.0, 1.0 - p.a, spec.l, n, bump))
                throw NoConvergence("alpha bump solve failed", 1.0);
            auto pd = std::make_shared<ProfileData>();
            pd->n = n;
            pd->x0 = 0.0;
            pd->dx = spec.l / (n - 1);
            pd->w = bump.w;
            pd->wp = bump.wp;
            pd->trim_lo = -1e300;
            pd->trim_hi = 1e300;
            b.profile = pd;
            b.residual = bump.residual;
            b.speed = 0.0;
            b.constants["argmax"] = bump.argmax;
            b.constants["maxval"] = bump.maxval;
            break;
        }
        case BlockKind::theta: {
            if (!(spec.A > 0.0)) throw DomainError("theta requires A > 0");
            const double root =
                std::sqrt(sqr(spec.c) + 4.0 * p.r * p.d * (p.b - 1.0 + spec.delta));
            b.constants["lam_plus"] = (root - spec.c) / (2.0 * p.d);
            b.constants["lam_minus"] = (-root - spec.c) / (2.0 * p.d);
            b.constants["xi_theta"] = p.d * std::log(spec.A) / root;
            b.residual = closed_form_residual(b);
            break;
        }
        case BlockKind::beta: {
            if (sqr(spec.c) <= 4.0 * p.r * p.d)
                throw DomainError("beta requires c^2 > 4 r d");
            const double lv = speeds::lambda_v(spec.c, p.r, p.d);
            const double root = std::sqrt(sqr(spec.c) - 4.0 * p.r * p.d);
            if (!(spec.eta > 0.0) || spec.eta >= std::min(lv, root / p.d))
                throw DomainError("beta eta outside (0, min(lambda_v, sqrt(c^2-4rd)/d))");
            if (spec.B < 0.0) throw DomainError("beta requires B >= 0");
            const double K = p.r * (1.0 + p.b * spec.B) /
                             (spec.eta * (root - p.d * spec.eta));
            b.constants["lam_v"] = lv;
            b.constants["K_beta"] = K;
            b.constants["xi_beta"] = std::log(K) / spec.eta;
            b.residual = closed_form_residual(b);
            break;
        }
        case BlockKind::wbar: {
            // The time exponent must match the decay rate of the profile this
            // envelope is junctioned with, or the junction picks up a linear
            // drift error; callers pass the measured rate through spec.lam.
            // Lambda is recomputed from the defining quadratic so that
            // w_t - w_xx = w stays exact for any rate.
            const double lam = spec.lam > 0.0
                                   ? spec.lam
                                   : speeds::lambda_u(spec.c, p.a, spec.delta);
            const double wdisc =
                sqr(spec.ct) - 4.0 * (lam * (spec.ct - spec.c) + 1.0);
            if (!(wdisc > 0.0))
                throw DomainError("wbar needs ct^2 > 4 (lam (ct - c) + 1)");
            const double Lam = 0.5 * (spec.ct - std::sqrt(wdisc));
            b.speed = spec.ct;
            b.constants["Lam"] = Lam;
            b.constants["lam"] = lam;
            b.constants["lamDt"] = lam * (spec.ct - spec.c);
            b.residual = closed_form_residual(b);
            break;
        }
        case BlockKind::wunder: {
            const double lam = spec.lam > 0.0
                                   ? spec.lam
                                   : speeds::lambda_u(spec.c, p.a, spec.delta);
            const double wdisc =
                sqr(spec.ct) - 4.0 * (lam * (spec.ct - spec.c) + 1.0);
            if (!(wdisc > 0.0))
                throw DomainError("wunder needs ct^2 > 4 (lam (ct - c) + 1)");
            const double Lam = 0.5 * (spec.ct - std::sqrt(wdisc));
            const double sdisc = spec.ct - 2.0 * Lam;
            if (!(spec.eta > 0.0) || spec.eta > std::min(Lam, sdisc))
                throw DomainError("wunder eta outside (0, min(Lambda, ct - 2 Lambda)]");
            if (!(spec.scale > 0.0 && spec.scale <= 1.0))
                throw DomainError("wunder scale outside (0, 1]");
            const double Dw = spec.eta * (spec.ct - spec.eta - 2.0 * Lam);
            const double Kw = std::max(1.0, (1.0 + p.a * spec.A) / Dw);
            b.speed = spec.ct;
            b.constants["Lam"] = Lam;
            b.constants["lam"] = lam;
            b.constants["lamDt"] = lam * (spec.ct - spec.c);
            b.constants["K_w"] = Kw;
            b.constants["x_w"] = std::log(Kw) / spec.eta;
            b.constants["X_w"] = std::log((Lam + spec.eta) / Lam) / spec.eta;
            b.residual = closed_form_residual(b);
            break;
        }
        case BlockKind::z: {
            const double lam = speeds::lambda_u(spec.c, p.a, 0.0);
            const double q = 4.0 * (lam * (spec.ct - spec.c) + 1.0 - spec.delta) -
                             sqr(spec.ct);
            if (!(q > 0.0))
                throw DomainError("z block needs ct^2 < 4 (lambda(c)(ct-c) + 1 - delta)");
            const double Rz = kPi / std::sqrt(q);
            b.speed = spec.ct;
            b.constants["lamDt"] = lam * (spec.ct - spec.c);
            b.constants["R_z"] = Rz;
            b.constants["k"] = 0.5 * std::sqrt(q);
            b.constants["m"] = 0.5 * spec.ct;
            b.constants["argmax"] =
                std::atan(std::sqrt(q) / spec.ct) / (0.5 * std::sqrt(q));
            b.residual = closed_form_residual(b);
            break;
        }
        case BlockKind::eigenpair: {
            if (!(spec.R > 0.0)) throw DomainError("eigenpair requires R > 0");
            b.speed = 0.0;
            b.constants["lambda"] = p.d * kPi * kPi / (64.0 * sqr(spec.R));
            b.residual = closed_form_residual(b);
            break;
        }
        case BlockKind::wave_phi:
        case BlockKind::wave_psi:
            throw DomainError("wave blocks are built through wave_pair_blocks");
    }
    if (b.residual > 1e-9 &&
        (kind == BlockKind::theta || kind == BlockKind::beta ||
         kind == BlockKind::wbar || kind == BlockKind::wunder ||
         kind == BlockKind::z || kind == BlockKind::eigenpair))
        throw NoConvergence("closed-form identity residual above 1e-9", b.residual);
    return b;
}

std::pair<BuildingBlock, BuildingBlock> wave_pair_blocks(double c,
                                                         const ModelParams& p,
                                                         double delta,
                                                         double truncation,
                                                         int mesh) {
    waves::WaveProfile w = waves::solve_profile(c, p, delta, truncation, mesh);
    auto pd = std::make_shared<ProfileData>();
    pd->n = static_cast<int>(w.xi.size());
    pd->x0 = w.xi.front();
    pd->dx = w.xi[1] - w.xi[0];
    pd->w = w.phi;
    pd->w2 = w.psi;
    pd->has2 = true;
    const double span = w.xi.back() - w.xi.front();
    pd->trim_lo = w.xi.front() + 0.02 * span;
    pd->trim_hi = w.xi.back() - 0.02 * span;
    const double h = pd->dx;
    auto fd = [&](const std::vector<double>& W, std::vector<double>& Wp) {
        const int n = pd->n;
        Wp.resize(n);
        for (int i = 0; i < n; ++i) {
            if (i >= 2 && i + 2 < n)
                Wp[i] = (-W[i + 2] + 8.0 * W[i + 1] - 8.0 * W[i - 1] + W[i - 2]) /
                        (12.0 * h);
            else if (i < 2)
                Wp[i] = (W[std::min(i + 1, n - 1)] - W[std::max(i - 1, 0)]) /
                        ((std::min(i + 1, n - 1) - std::max(i - 1, 0)) * h);
            else
                Wp[i] = (W[i] - W[i - 1]) / h;
        }
    };
    fd(pd->w, pd->wp);
    fd(pd->w2, pd->w2p);
    pd->set_ext(false, 0, 1.0 + delta);
    pd->set_ext(true, 0, 0.0);
    pd->set_ext(false, 1, 0.0);
    pd->set_ext(true, 1, 1.0 - 2.0 * delta);

    BuildingBlock phi, psi;
    phi.kind = BlockKind::wave_phi;
    psi.kind = BlockKind::wave_psi;
    phi.spec.p = psi.spec.p = p;
    phi.spec.delta = psi.spec.delta = delta;
    phi.spec.c = psi.spec.c = c;
    phi.speed = psi.speed = c;
    phi.profile = psi.profile = pd;
    phi.residual = psi.residual = w.residual;
    phi.constants["decay_plus"] = w.measured_decay_plus;
    psi.constants["decay_plus"] = w.measured_decay_plus;
    phi.constants["decay_minus"] = w.measured_decay_minus;
    psi.constants["decay_minus"] = w.measured_decay_minus;
    // Tail rate of psi near -infty as the profile extension actually uses it.
    psi.constants["tail_rate_minus"] = pd->lo_ext[1].rate;
    return {phi, psi};
}

std::pair<double, double> min_radius_omega(const ModelParams& p, double delta) {
    validate_params(p);
    if (delta <= 0.0 || delta >= 0.5)
        throw DomainError("omega thresholds need delta in (0, 1/2)");
    const double M = 1.0 - delta;
    const double drift = 2.0 * std::sqrt(p.r * M * p.d) - delta;
    // Existence radius by bisection on solvability of the nonlinear problem.
    const double Rform = 0.5 * bump_threshold_len(p.d, drift, p.r, M);
    double lo = 0.5 * Rform, hi = 2.0 * Rform;
    auto solvable = [&](double R) {
        Bump bump;
        return solve_bump(p.d, drift, p.r, M, 2.0 * R, 1501, bump);
    };
    while (solvable(lo) && lo > 1e-3) lo *= 0.7;
    while (!solvable(hi)) hi *= 1.4;
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        (solvable(mid) ? hi : lo) = mid;
    }
    const double R_omega = 0.5 * (lo + hi);
    // Minimal radius with max >= 1 - 2 delta (monotone in R).
    auto big_enough = [&](double R) {
        Bump bump;
        return solve_bump(p.d, drift, p.r, M, 2.0 * R, 1501, bump) &&
               bump.maxval >= 1.0 - 2.0 * delta;
    };
    double lo2 = R_omega * 1.0001, hi2 = 8.0 * R_omega;
    int guard = 0;
    while (!big_enough(hi2) && ++guard < 8) hi2 *= 1.5;
    if (guard >= 8) throw NoConvergence("R_delta search failed", hi2);
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo2 + hi2);
        (big_enough(mid) ? hi2 : lo2) = mid;
    }
    return {R_omega, 0.5 * (lo2 + hi2)};
}

double min_length_alpha(double a) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("alpha threshold needs a in (0,1)");
    const double Lform = kPi / std::sqrt(1.0 - a);
    auto solvable = [&](double l) {
        Bump bump;
        return solve_bump(1.0, 0.0, 1.0, 1.0 - a, l, 1501, bump);
    };
    double lo = 0.5 * Lform, hi = 2.0 * Lform;
    while (solvable(lo) && lo > 1e-3) lo *= 0.7;
    while (!solvable(hi)) hi *= 1.4;
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        (solvable(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Interface roots.
// ---------------------------------------------------------------------------

const char* to_string(InterfaceId id) {
    switch (id) {
        case InterfaceId::x0: return "x0";
        case InterfaceId::xi1: return "xi1";
        case InterfaceId::x2: return "x2";
        case InterfaceId::x3_small: return "x3_small";
        case InterfaceId::x3_large: return "x3_large";
        case InterfaceId::xi4: return "xi4";
        case InterfaceId::x0_ne: return "x0_ne";
        case InterfaceId::x1_ne: return "x1_ne";
    }
    return "?";
}

namespace {

double bisect_root(const std::function<double(double)>& g, double lo, double hi,
                   double glo) {
    for (int i = 0; i < 80 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm > 0.0) == (glo > 0.0)) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Scan for the last +to- crossing (or first, when `first`), then bisect.
double scan_root(const std::function<double(double)>& g, double lo, double hi,
                 bool first, const char* what) {
    const int n = 4000;
    double found_lo = 0.0, found_hi = 0.0;
    bool found = false;
    double xp = lo, gp = g(lo);
    for (int i = 1; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double gx = g(x);
        if (gp > 0.0 && gx <= 0.0) {
            found_lo = xp;
            found_hi = x;
            found = true;
            if (first) break;
        }
        xp = x;
        gp = gx;
    }
    if (!found) throw NoBracket(what);
    return bisect_root(g, found_lo, found_hi, 1.0);
}

}  // namespace

double find_interface(const BuildingBlock& blockA, const BuildingBlock& blockB,
                      InterfaceId id, double t) {
    auto g = [&](double x) { return blockA.value(t, x) - blockB.value(t, x); };
    auto need = [&](bool cond, const char* what) {
        if (!cond) throw DomainError(std::string("find_interface ") +
                                     to_string(id) + ": " + what);
    };
    switch (id) {
        case InterfaceId::x0: {
            need(blockB.kind == BlockKind::wunder, "expects wunder as blockB");
            // wunder vanishes exactly at its support edge, so the edge is a
            // guaranteed positive endpoint for chi - wunder; the crossing may
            // sit arbitrarily close to it at times where chi is far below
            // the peak.
            const double lo = blockB.speed * t + blockB.shift;
            const double hi = lo + cget(blockB, "X_w");
            const double glo = g(lo);
            if (!(glo > 0.0) || !(g(hi) < 0.0))
                throw NoBracket("x0: chi does not cross the wunder peak window");
            return bisect_root(g, lo, hi, glo);
        }
        case InterfaceId::xi1: {
            need(blockA.kind == BlockKind::theta, "expects theta as blockA");
            const double zero = blockA.speed * t + blockA.shift;
            return scan_root(g, zero + 1e-7, zero + 250.0, /*first=*/false,
                             "xi1: theta does not cross psi from above");
        }
        case InterfaceId::x2: {
            need(blockB.kind == BlockKind::wbar, "expects wbar as blockB");
            const double Lam = cget(blockB, "Lam");
            const double lamDt = cget(blockB, "lamDt");
            const double delta = blockA.spec.delta;
            double lo = blockB.speed * t + blockB.shift -
                        (std::log(1.0 + 2.0 * delta) + lamDt * t) / Lam;
            if (!(g(lo) < 0.0))
                throw NoBracket("x2: wbar does not dominate phi at the window edge");
            double hi = lo + 2.0, step = 2.0;
            while (g(hi) < 0.0) {
                hi += step;
                step *= 1.6;
                if (hi > lo + 400.0)
                    throw NoBracket("x2: phi never re-crosses wbar");
            }
            return bisect_root(g, lo, hi, g(lo));
        }
        case InterfaceId::x3_small: {
            need(blockB.kind == BlockKind::omega, "expects omega as blockB");
            const double ctr = blockB.speed * t + blockB.shift;
            const double lo = ctr - blockB.spec.R + 1e-7;
            const double hi = ctr + cget(blockB, "argmax");
            const double glo = g(lo);
            if (!(glo > 0.0) || !(g(hi) < 0.0))
                throw NoBracket("x3_small: psi/omega bracket failed");
            return bisect_root(g, lo, hi, glo);
        }
        case InterfaceId::x3_large: {
            need(blockB.kind == BlockKind::pi_h, "expects pi_h as blockB");
            const double ctr = blockB.speed * t + blockB.shift;
            const double lo = ctr - cget(blockB, "W") + 1e-7;
            const double hi = ctr + cget(blockB, "argmax");
            const double glo = g(lo);
            if (!(glo > 0.0) || !(g(hi) < 0.0))
                throw NoBracket("x3_large: psi/pi_h bracket failed");
            return bisect_root(g, lo, hi, glo);
        }
        case InterfaceId::xi4: {
            need(blockA.kind == BlockKind::pi_h && blockB.kind == BlockKind::beta,
                 "expects pi_h and beta");
            const double zero = blockB.speed * t + blockB.shift;
            const double W = cget(blockA, "W");
            return scan_root(g, zero + 1e-7, zero + W, /*first=*/true,
                             "xi4: pi_h does not cross beta inside the window");
        }
        case InterfaceId::x0_ne: {
            need(blockA.kind == BlockKind::alpha, "expects alpha as blockA");
            const double lo = blockA.shift + cget(blockA, "argmax");
            const double hi = blockA.shift + blockA.spec.l - 1e-7;
            const double glo = g(lo);
            if (!(glo > 0.0) || !(g(hi) < 0.0))
                throw NoBracket("x0_ne: alpha/chi bracket failed");
            return bisect_root(g, lo, hi, glo);
        }
        case InterfaceId::x1_ne: {
            need(blockB.kind == BlockKind::z, "expects z as blockB");
            const double zero = blockB.speed * t + blockB.shift;
            // z vanishes exactly at its support edge, so the edge itself is a
            // guaranteed positive endpoint for chi - z; the crossing can sit
            // arbitrarily close to it when the z amplitude dwarfs chi's tail.
            const double hi = zero + cget(blockB, "argmax");
            const double glo = g(zero);
            if (!(glo > 0.0) || !(g(hi) < 0.0))
                throw NoBracket("x1_ne: chi/z bracket failed");
            return bisect_root(g, zero, hi, glo);
        }
    }
    throw DomainError("unknown interface id");
}

// ---------------------------------------------------------------------------
// Assemblies.
// ---------------------------------------------------------------------------

const char* to_string(AssemblyKind k) {
    switch (k) {
        case AssemblyKind::terrace_super: return "terrace_super";
        case AssemblyKind::terrace_sub: return "terrace_sub";
        case AssemblyKind::compact_super: return "compact_super";
        case AssemblyKind::nonexistence_sub: return "nonexistence_sub";
    }
    return "?";
}

struct AssemblyImpl {
    AssemblyKind which{};
    ModelParams p{};
    double delta = 0.0;
    bool is_super = false;
    std::vector<BuildingBlock> blocks;
    std::vector<InterfaceCurve> ifaces;
    // v component of the sub pairs: min(1, exp(-lam (x - xref - c t))).
    bool has_vbar = false;
    double vbar_lam = 0.0, vbar_c = 0.0, vbar_xref = 0.0;

    mutable std::mutex mu;
    mutable std::map<std::pair<int, double>, double> cache;

    double iface_pos(int k, double t) const {
        {
            std::lock_guard<std::mutex> lock(mu);
            auto it = cache.find({k, t});
            if (it != cache.end()) return it->second;
        }
        const InterfaceCurve& c = ifaces[k];
        const double x = c.constant_offset
                             ? c.offset + c.speed * t
                             : find_interface(blocks[c.block_a],
                                              blocks[c.block_b], c.id, t);
        std::lock_guard<std::mutex> lock(mu);
        cache[{k, t}] = x;
        return x;
    }

    int iface_index(InterfaceId id) const {
        for (std::size_t i = 0; i < ifaces.size(); ++i)
            if (ifaces[i].id == id) return static_cast<int>(i);
        throw DomainError("assembly has no such interface");
    }

    void put_block(AssemblyPoint& pt, const BuildingBlock& b, double t, double x,
                   bool ucomp, const char* label) const {
        double v, d1, d2;
        frame_eval(b, x - b.speed * t - b.shift, v, d1, d2);
        const double f = decay_factor(b, t);
        double lamDt = 0.0;
        auto it = b.constants.find("lamDt");
        if (it != b.constants.end()) lamDt = it->second;
        const double val = f * v;
        const double dxv = f * d1, dxxv = f * d2;
        const double dtv = f * (-lamDt * v - b.speed * d1);
        if (ucomp) {
            pt.u = val; pt.ut = dtv; pt.ux = dxv; pt.uxx = dxxv; pt.u_piece = label;
        } else {
            pt.v = val; pt.vt = dtv; pt.vx = dxv; pt.vxx = dxxv; pt.v_piece = label;
        }
    }

    void put_const(AssemblyPoint& pt, double value, bool ucomp,
                   const char* label) const {
        if (ucomp) {
            pt.u = value; pt.ut = pt.ux = pt.uxx = 0.0; pt.u_piece = label;
        } else {
            pt.v = value; pt.vt = pt.vx = pt.vxx = 0.0; pt.v_piece = label;
        }
    }

    void put_vbar(AssemblyPoint& pt, double t, double x) const {
        const double e = std::exp(-vbar_lam * (x - vbar_xref - vbar_c * t));
        if (e >= 1.0) {
            put_const(pt, 1.0, false, "one");
        } else {
            pt.v = e;
            pt.vt = vbar_lam * vbar_c * e;
            pt.vx = -vbar_lam * e;
            pt.vxx = sqr(vbar_lam) * e;
            pt.v_piece = "vexp";
        }
    }

    AssemblyPoint eval(double t, double x) const {
        AssemblyPoint pt;
        switch (which) {
            case AssemblyKind::terrace_super:
            case AssemblyKind::compact_super: {
                const BuildingBlock& phi = blocks[0];
                const BuildingBlock& psi = blocks[1];
                const BuildingBlock& theta = blocks[2];
                const BuildingBlock& wbar = blocks[3];
                const double x2 = iface_pos(iface_index(InterfaceId::x2), t);
                if (x < x2) {
                    const double pv = phi.value(t, x);
                    if (pv >= 1.0) put_const(pt, 1.0, true, "one");
                    else put_block(pt, phi, t, x, true, "phi");
                } else {
                    put_block(pt, wbar, t, x, true, "wbar");
                }
                const double x1 = iface_pos(iface_index(InterfaceId::xi1), t);
                if (x < x1) {
                    const double tv = theta.value(t, x);
                    if (tv <= 0.0) put_const(pt, 0.0, false, "zero");
                    else put_block(pt, theta, t, x, false, "theta");
                    return pt;
                }
                if (which == AssemblyKind::terrace_super) {
                    const double x3 =
                        iface_pos(iface_index(InterfaceId::x3_large), t);
                    if (x < x3) { put_block(pt, psi, t, x, false, "psi"); return pt; }
                    const double x4 = iface_pos(iface_index(InterfaceId::xi4), t);
                    if (x < x4) put_block(pt, blocks[4], t, x, false, "pi_h");
                    else put_block(pt, blocks[5], t, x, false, "beta");
                } else {
                    const double x3 =
                        iface_pos(iface_index(InterfaceId::x3_small), t);
                    if (x < x3) { put_block(pt, psi, t, x, false, "psi"); return pt; }
                    const BuildingBlock& om = blocks[4];
                    const double y = x - om.speed * t - om.shift;
                    if (y <= -om.spec.R || y >= om.spec.R)
                        put_const(pt, 0.0, false, "zero");
                    else
                        put_block(pt, om, t, x, false, "omega");
                }
                return pt;
            }
            case AssemblyKind::terrace_sub: {
                const BuildingBlock& chi = blocks[0];
                const BuildingBlock& wu = blocks[1];
                const double x0 = iface_pos(iface_index(InterfaceId::x0), t);
                if (x < x0) put_block(pt, chi, t, x, true, "chi");
                else put_block(pt, wu, t, x, true, "wunder");
                put_vbar(pt, t, x);
                return pt;
            }
            case AssemblyKind::nonexistence_sub: {
                const BuildingBlock& al = blocks[0];
                const BuildingBlock& chi = blocks[1];
                const BuildingBlock& zb = blocks[2];
                const double x0 = iface_pos(iface_index(InterfaceId::x0_ne), t);
                if (x < x0) {
                    const double y = x - al.shift;
                    if (y <= 0.0 || y >= al.spec.l) put_const(pt, 0.0, true, "zero");
                    else put_block(pt, al, t, x, true, "alpha");
                } else {
                    const double x1 =
                        iface_pos(iface_index(InterfaceId::x1_ne), t);
                    if (x < x1) {
                        put_block(pt, chi, t, x, true, "chi");
                    } else {
                        const double y = x - zb.speed * t - zb.shift;
                        if (y <= 0.0 || y >= 2.0 * cget(zb, "R_z"))
                            put_const(pt, 0.0, true, "zero");
                        else
                            put_block(pt, zb, t, x, true, "z");
                    }
                }
                put_vbar(pt, t, x);
                return pt;
            }
        }
        return pt;
    }

    std::vector<double> kinks(double t) const {
        std::vector<double> out;
        for (std::size_t i = 0; i < ifaces.size(); ++i)
            out.push_back(iface_pos(static_cast<int>(i), t));
        switch (which) {
            case AssemblyKind::terrace_super:
            case AssemblyKind::compact_super: {
                const BuildingBlock& phi = blocks[0];
                // phi = 1 clamp curve and the theta support edge.
                auto it = phi.constants.find("xi_one");
                if (it != phi.constants.end())
                    out.push_back(it->second + phi.speed * t + phi.shift);
                out.push_back(blocks[2].speed * t + blocks[2].shift);
                if (which == AssemblyKind::compact_super) {
                    const BuildingBlock& om = blocks[4];
                    out.push_back(om.speed * t + om.shift - om.spec.R);
                    out.push_back(om.speed * t + om.shift + om.spec.R);
                }
                break;
            }
            case AssemblyKind::terrace_sub:
                out.push_back(vbar_xref + vbar_c * t);
                out.push_back(blocks[1].speed * t + blocks[1].shift);
                break;
            case AssemblyKind::nonexistence_sub: {
                out.push_back(vbar_xref + vbar_c * t);
                out.push_back(blocks[0].shift);
                out.push_back(blocks[0].shift + blocks[0].spec.l);
                const BuildingBlock& zb = blocks[2];
                out.push_back(zb.speed * t + zb.shift);
                out.push_back(zb.speed * t + zb.shift + 2.0 * cget(zb, "R_z"));
                break;
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

double BarrierAssembly::u(double t, double x) const { return impl->eval(t, x).u; }
double BarrierAssembly::v(double t, double x) const { return impl->eval(t, x).v; }
AssemblyPoint BarrierAssembly::eval(double t, double x) const {
    return impl->eval(t, x);
}
std::vector<double> BarrierAssembly::interface_positions(double t) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < impl->ifaces.size(); ++i)
        out.push_back(impl->iface_pos(static_cast<int>(i), t));
    return out;
}
std::vector<double> BarrierAssembly::kink_positions(double t) const {
    return impl->kinks(t);
}

namespace {

// Inverse of a monotone profile component (extensions included).
double frame_inverse(const ProfileData& pd, int comp, double target,
                     bool increasing) {
    double lo = pd.trim_lo - 800.0, hi = pd.trim_hi + 800.0;
    auto g = [&](double x) { return pd.eval(x, comp, 0) - target; };
    double glo = g(lo), ghi = g(hi);
    if ((glo > 0.0) == (ghi > 0.0))
        throw DomainError("profile inverse: target outside range");
    for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((g(mid) > 0.0) == (glo > 0.0)) lo = mid; else hi = mid;
    }
    (void)increasing;
    return 0.5 * (lo + hi);
}

// Largest admissible tilt of the pi sub-solution: the max of pi + h y over
// [-W, 0], W = sqrt(ct/(r h)), must reach 1 - 2 delta and exceed both
// endpoint values.
bool pi_tilt_ok(const ProfileData& pi, double ct, double r, double delta,
                double h) {
    const double W = pi_window(ct, r, h);
    double mx = -1e300;
    const int n = 2000;
    for (int i = 0; i <= n; ++i) {
        const double y = -W + W * i / n;
        mx = std::max(mx, pi.eval(y, 0, 0) + h * y);
    }
    const double e0 = pi.eval(0.0, 0, 0);
    const double e1 = pi.eval(-W, 0, 0) - h * W;
    return mx >= 1.0 - 2.0 * delta && mx > e0 && mx > e1;
}

double pi_h_star(const ProfileData& pi, double ct, double r, double delta) {
    double h = 1e-3;
    while (!pi_tilt_ok(pi, ct, r, delta, h)) {
        h *= 0.5;
        if (h < 1e-9)
            throw HypothesisViolated("no admissible tilt h for the pi block");
    }
    double lo = h, hi = h;
    while (pi_tilt_ok(pi, ct, r, delta, hi) && hi < 1e3) hi *= 2.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (pi_tilt_ok(pi, ct, r, delta, mid) ? lo : hi) = mid;
    }
    return lo;
}

struct ThetaKit {
    double kappa = 0.0, kappa_tilde = 0.0, xi1 = 0.0, zeta_kappa = 0.0;
    double A = 0.0, lam_minus_used = 0.0;
};

// Constructive junction of the theta tail with the psi wave tail.
ThetaKit make_theta_kit(const BuildingBlock& psi, const ModelParams& p,
                        double delta, double c, double kappa_req) {
    ThetaKit kit;
    const double root =
        std::sqrt(sqr(c) + 4.0 * p.r * p.d * (p.b - 1.0 + delta));
    const double lam_p = (root - c) / (2.0 * p.d);
    const double lam_m_theta = (-root - c) / (2.0 * p.d);
    const double lam_inf = cget(psi, "tail_rate_minus");
    const double lam_inf_formula =
        (std::sqrt(sqr(c) +
                   4.0 * p.r * p.d * (p.b - 1.0 + (p.b + 2.0) * delta)) -
         c) /
        (2.0 * p.d);
    if (std::abs(lam_inf - lam_inf_formula) > 0.2 * lam_inf_formula)
        throw HypothesisViolated(
            "measured psi tail rate far from its characteristic value");
    if (lam_p >= lam_inf)
        throw HypothesisViolated(
            "theta growth rate is not below the psi tail rate");
    kit.lam_minus_used = lam_inf;
    kit.kappa = kappa_req;
    kit.kappa_tilde = std::min(kappa_req, 0.5 * (1.0 - lam_p / lam_inf));
    const double gap = (1.0 - kit.kappa_tilde) * lam_inf - lam_p;
    if (gap <= 0.0)
        throw HypothesisViolated("theta/psi junction rate gap closed");
    kit.xi1 = std::log(1.0 + (lam_p - lam_m_theta) / gap) / (lam_p - lam_m_theta);
    // zeta_kappa: on (-inf, -zeta_kappa] psi stays below kappa and its
    // log-slope stays within (1 +- kappa_tilde/2) of the tail rate.
    const ProfileData& pd = *psi.profile;
    double xi_ok = frame_inverse(pd, 1, kit.kappa, true);
    const double tolr = 0.5 * kit.kappa_tilde * lam_inf;
    double x = pd.trim_lo - 20.0;
    double xi_slope = xi_ok;
    while (x < xi_ok) {
        const double v = pd.eval(x, 1, 0);
        const double s = pd.eval(x, 1, 1);
        if (v > 0.0 && std::abs(s / v - lam_inf) > tolr) {
            xi_slope = x - 0.25;
            break;
        }
        x += 0.25;
    }
    const double xi_join = std::min(xi_ok, xi_slope);
    kit.zeta_kappa = -xi_join;
    const double vmatch = pd.eval(xi_join, 1, 0);
    const double denom =
        std::exp(lam_p * kit.xi1) - std::exp(lam_m_theta * kit.xi1);
    kit.A = std::pow(vmatch / denom, (lam_p - lam_m_theta) / (-lam_m_theta));
    if (!(kit.A > 0.0) || !std::isfinite(kit.A))
        throw HypothesisViolated("theta amplitude solve failed");
    return kit;
}

void record_phi_one_crossing(BuildingBlock& phi) {
    // Frame coordinate where phi crosses 1 (clamp kink of min(1, phi)).
    phi.constants["xi_one"] = frame_inverse(*phi.profile, 0, 1.0, false);
}

BarrierAssembly finish(AssemblyKind which, const ModelParams& p, double delta,
                       bool is_super, double c1, double c2,
                       std::shared_ptr<AssemblyImpl> impl,
                       std::map<std::string, double> constants) {
    impl->which = which;
    impl->p = p;
    impl->delta = delta;
    impl->is_super = is_super;
    BarrierAssembly out;
    out.which = which;
    out.p = p;
    out.delta = delta;
    out.is_super = is_super;
    out.c1 = c1;
    out.c2 = c2;
    out.blocks = impl->blocks;
    out.interfaces = impl->ifaces;
    out.constants = std::move(constants);
    out.impl = std::move(impl);
    return out;
}

// Continuity audit at the root interfaces.
void audit_continuity(const AssemblyImpl& impl, double t_hi) {
    const double ts[] = {0.0, 0.5 * t_hi, t_hi};
    for (double t : ts) {
        for (std::size_t i = 0; i < impl.ifaces.size(); ++i) {
            const InterfaceCurve& c = impl.ifaces[i];
            if (c.constant_offset) continue;
            const double x = impl.iface_pos(static_cast<int>(i), t);
            const double a = impl.blocks[c.block_a].value(t, x);
            const double b = impl.blocks[c.block_b].value(t, x);
            if (std::abs(a - b) > 1e-8)
                throw HypothesisViolated(std::string("continuity at ") +
                                         to_string(c.id));
        }
    }
}

}  // namespace

static BarrierAssembly assemble_super(AssemblyKind which, const ModelParams& p,
                                      double c1_req, double c2,  double delta,
                                      const AssemblyAux& aux) {
    const bool compact = which == AssemblyKind::compact_super;
    const double c_llw =
        aux.c_llw > 0.0 ? aux.c_llw : 2.0 * std::sqrt(1.0 - p.a);
    double c1 = c1_req, c1_shift_speed = 0.0, c2d = 0.0, c1d = 0.0;
    if (compact) {
        if (!(p.r * p.d > 1.0))
            throw NotAdmissible("compact super-solution needs 2 sqrt(rd) > 2");
        const double lo = std::max(c_llw, speeds::c_acc(p.r, p.d, p.a));
        if (!(c2 > lo && c2 < 2.0))
            throw NotAdmissible(
                "compact super-solution needs c2 in (max(c_llw, c_acc), 2)");
        c1 = 2.0 * std::sqrt(p.r * p.d);
        try {
            auto pr = speeds::perturbed_speeds_compact(c2, p, delta);
            c1d = pr.first;
            c2d = pr.second;
        } catch (const DeltaTooLarge& e) {
            throw HypothesisViolated(e.what());
        }
        c1_shift_speed = c1d;
    } else {
        if (speeds::admissible(c1, c2, p, c_llw) != speeds::Admissibility::interior)
            throw NotAdmissible("terrace barriers need an interior speed pair");
        try {
            c2d = speeds::perturbed_speeds_terrace(c2, c1, p.a, delta);
        } catch (const DeltaTooLarge& e) {
            throw HypothesisViolated(e.what());
        }
        c1_shift_speed = c1;
    }
    const double ct = c1_shift_speed;  // speed of the first (v) front pieces

    auto impl = std::make_shared<AssemblyImpl>();
    auto [phi, psi] = wave_pair_blocks(c2d, p, delta);
    record_phi_one_crossing(phi);

    const double kappa_req =
        aux.kappa > 0.0 ? std::min(aux.kappa, delta) : 0.5 * delta;
    ThetaKit tk = make_theta_kit(psi, p, delta, c2d, kappa_req);
    const double zeta1 = tk.xi1 + tk.zeta_kappa;
    phi.shift = psi.shift = zeta1;

    BlockSpec ts;
    ts.p = p;
    ts.delta = delta;
    ts.c = c2d;
    ts.A = tk.A;
    BuildingBlock theta = build_block(BlockKind::theta, ts);

    // wbar: carries the measured tail rate of phi in its time exponent (so
    // the crossing with phi drifts at exactly ct) and is anchored so that the
    // crossing happens at value delta/(2b) at t = 0.
    BlockSpec ws;
    ws.p = p;
    ws.delta = delta;
    ws.c = c2d;
    ws.ct = ct;
    ws.lam = cget(phi, "decay_plus");
    BuildingBlock wbar = build_block(BlockKind::wbar, ws);
    const double Lam_d = cget(wbar, "Lam");
    const double xi_star =
        frame_inverse(*phi.profile, 0, delta / (2.0 * p.b), false);
    double s_w = (xi_star + zeta1) +
                 std::log(phi.profile->eval(xi_star, 0, 0)) / Lam_d;
    wbar.shift = s_w;

    const double horizon = aux.t_horizon > 0.0 ? aux.t_horizon : 50.0;

    // Make sure the theta junction stays left of x2 over the guarded span.
    for (int rep = 0; rep < 6; ++rep) {
        double need = 0.0;
        for (double t = 0.0; t <= 2.0 * horizon; t += 2.5) {
            const double i1 = tk.xi1 + c2d * t;
            const double x2 = find_interface(phi, wbar, InterfaceId::x2, t);
            need = std::max(need, i1 + 4.0 - x2);
        }
        if (need <= 0.0) break;
        wbar.shift += need;
        if (rep == 5)
            throw HypothesisViolated("could not order xi1 before x2");
    }
    s_w = wbar.shift;

    // Band of x2 relative to the fast frame, for placing the right pieces.
    double band2 = -1e300;
    for (double t = 0.0; t <= 2.0 * horizon; t += 2.5)
        band2 = std::max(band2,
                         find_interface(phi, wbar, InterfaceId::x2, t) - ct * t);

    impl->blocks.clear();

    std::map<std::string, double> cons;
    cons["c2_delta"] = c2d;
    cons["kappa"] = tk.kappa;
    cons["kappa_tilde"] = tk.kappa_tilde;
    cons["xi1"] = tk.xi1;
    cons["zeta_kappa"] = tk.zeta_kappa;
    cons["zeta1"] = zeta1;
    cons["A_theta"] = tk.A;
    cons["lambda_minus_inf"] = tk.lam_minus_used;
    cons["s_w"] = s_w;
    cons["Lambda_delta"] = Lam_d;

    if (!compact) {
        // pi_h and beta, sharing the fast frame shift s_pi.
        double res_pi = 0.0;
        auto pi_pd = solve_kpp(p.d, c1, p.r, 1.0 - delta, 0.004, &res_pi);
        double h = aux.h > 0.0 ? aux.h : 0.5 * pi_h_star(*pi_pd, c1, p.r, delta);
        const double root1 = std::sqrt(sqr(c1) - 4.0 * p.r * p.d);
        double eta_b = aux.eta > 0.0
                           ? aux.eta
                           : 0.5 * std::min({root1 / p.d, Lam_d,
                                             speeds::lambda_v(c1, p.r, p.d)});

        BuildingBlock pih, beta;
        double s_pi = 0.0, B = 0.0, xi4_rel = 0.0, zeta4 = 0.0;
        bool placed = false;
        for (int rep = 0; rep < 24 && !placed; ++rep) {
            const double W = pi_window(c1, p.r, h);
            s_pi = band2 + W + 6.0;
            // beta is translated so that its support edge sits just left of
            // the interior minimum of pi_h on (0, W); the junction then lands
            // on beta's steep rising flank.
            double y_min = 0.0, v_min = 1e300;
            for (int i = 1; i <= 4000; ++i) {
                const double y = W * i / 4000.0;
                const double v = pi_pd->eval(y, 0, 0) + h * y;
                if (v < v_min) { v_min = v; y_min = y; }
            }
            zeta4 = y_min - 1.0;
            // B through the domination fixed point against wbar:
            // B = 2 exp(Lambda_delta xi_beta) wbar(0, s_pi + zeta4).
            B = 0.0;
            double K = 0.0, xi_b = 0.0;
            for (int it = 0; it < 300; ++it) {
                K = p.r * (1.0 + p.b * B) / (eta_b * (root1 - p.d * eta_b));
                xi_b = std::log(K) / eta_b;
                const double Bn = 2.0 * std::exp(
                    Lam_d * (xi_b - s_pi - zeta4 + s_w));
                if (!std::isfinite(Bn) || Bn > 1e8)
                    throw HypothesisViolated("beta domination constant diverged");
                if (std::abs(Bn - B) <= 1e-13 * (1.0 + Bn)) { B = Bn; break; }
                B = Bn;
            }
            BlockSpec ps;
            ps.p = p;
            ps.delta = delta;
            ps.c = c1;
            ps.h = h;
            pih = build_block(BlockKind::pi_h, ps);
            pih.shift = s_pi;
            BlockSpec bs;
            bs.p = p;
            bs.delta = delta;
            bs.c = c1;
            bs.B = B;
            bs.eta = eta_b;
            beta = build_block(BlockKind::beta, bs);
            beta.shift = s_pi + zeta4;
            try {
                const double x4 = find_interface(pih, beta, InterfaceId::xi4, 0.0);
                xi4_rel = x4 - s_pi;
                if (xi4_rel >= cget(pih, "W"))
                    throw NoBracket("xi4 outside the pi window");
                placed = true;
            } catch (const NoBracket&) {
                h *= 0.5;  // smaller tilt lowers the pi_h dip below beta's peak
                if (h < 1e-8)
                    throw HypothesisViolated(
                        "no tilt h places the pi/beta junction");
            }
        }

        impl->blocks = {phi, psi, theta, wbar, pih, beta};
        impl->ifaces.push_back({InterfaceId::xi1, "xi1", 2, 1, c2d, true, tk.xi1});
        impl->ifaces.push_back({InterfaceId::x2, "x2", 0, 3, ct, false, 0.0});
        impl->ifaces.push_back({InterfaceId::x3_large, "x3", 1, 4, c1, false, 0.0});
        impl->ifaces.push_back({InterfaceId::xi4, "xi4", 4, 5, c1, true,
                                s_pi + xi4_rel});
        cons["h"] = h;
        cons["eta_beta"] = eta_b;
        cons["B"] = B;
        cons["s_pi"] = s_pi;
        cons["zeta4"] = zeta4;
        cons["xi4"] = xi4_rel;
        // Interface ordering over the guarded horizon.
        for (double t = 0.0; t <= horizon; t += 2.5) {
            const double i1 = impl->iface_pos(0, t);
            const double x2 = impl->iface_pos(1, t);
            const double x3 = impl->iface_pos(2, t);
            const double i4 = impl->iface_pos(3, t);
            if (!(i1 < x2 && x2 < x3 && x3 < i4))
                throw HypothesisViolated("terrace interface ordering failed");
        }
    } else {
        auto rr = min_radius_omega(p, delta);
        const double R_used = rr.second + 0.5;
        BlockSpec os;
        os.p = p;
        os.delta = delta;
        os.c = c1d;
        os.R = R_used;
        BuildingBlock om = build_block(BlockKind::omega, os);
        om.shift = band2 + R_used + 6.0;
        impl->blocks = {phi, psi, theta, wbar, om};
        impl->ifaces.push_back({InterfaceId::xi1, "xi1", 2, 1, c2d, true, tk.xi1});
        impl->ifaces.push_back({InterfaceId::x2, "x2", 0, 3, ct, false, 0.0});
        impl->ifaces.push_back({InterfaceId::x3_small, "x3", 1, 4, c1d, false, 0.0});
        cons["c1_delta"] = c1d;
        cons["R_omega"] = rr.first;
        cons["R_delta"] = rr.second;
        cons["R_used"] = R_used;
        cons["s_omega"] = om.shift;
        for (double t = 0.0; t <= horizon; t += 2.5) {
            const double i1 = impl->iface_pos(0, t);
            const double x2 = impl->iface_pos(1, t);
            const double x3 = impl->iface_pos(2, t);
            if (!(i1 < x2 && x2 < x3))
                throw HypothesisViolated("compact interface ordering failed");
        }
    }

    audit_continuity(*impl, horizon);
    return finish(which, p, delta, /*is_super=*/true, c1, c2, impl,
                  std::move(cons));
}

static BarrierAssembly assemble_terrace_sub(const ModelParams& p, double c1,
                                            double c2, double delta,
                                            const AssemblyAux& aux) {
    const double c_llw =
        aux.c_llw > 0.0 ? aux.c_llw : 2.0 * std::sqrt(1.0 - p.a);
    if (speeds::admissible(c1, c2, p, c_llw) != speeds::Admissibility::interior)
        throw NotAdmissible("terrace barriers need an interior speed pair");
    if (c2 < 2.0 * std::sqrt(0.5 * (1.0 - p.a)))
        throw HypothesisViolated("chi block needs c2 >= 2 sqrt((1-a)/2)");
    BlockSpec cs;
    cs.p = p;
    cs.c = c2;
    BuildingBlock chi = build_block(BlockKind::chi, cs);
    // The wunder envelope keeps the closed-form rate: its spatial tail must
    // decay at least as fast as the super pair's right tail so the pair can
    // be ordered, which rules out matching chi's (slower) measured rate. The
    // chi/wunder junction is instead held on the guarded horizon by the
    // chi translation computed below.
    const double lam = speeds::lambda_u(c2, p.a, 0.0);
    const double wdisc = sqr(c1) - 4.0 * (lam * (c1 - c2) + 1.0);
    if (!(wdisc > 0.0))
        throw HypothesisViolated("wunder needs c1^2 > 4 (lam (c1 - c2) + 1)");
    const double Lam = 0.5 * (c1 - std::sqrt(wdisc));
    const double sdisc = c1 - 2.0 * Lam;
    const double lv = speeds::lambda_v(c1, p.r, p.d);
    const double S6 = aux.zeta6;

    // Secondary rate of the u bump: the competition condition below compares
    // it against the envelope rate lambda_v, so it must stay at or below
    // lambda_v while remaining strictly inside (0, min(Lambda, c1 - 2 Lambda)).
    const double eta_w = std::min({0.98 * lv, 0.98 * Lam, 0.5 * sdisc});
    const double Dw = eta_w * (c1 - eta_w - 2.0 * Lam);
    // Support edge of the u bump. Writing C_loc for the envelope value
    // exp(-lv (x - c1 t - zeta6)) at the edge, the bump is a sub-solution
    // against v = min(1, envelope) as soon as
    //     amp K_w^(-Lambda/eta) + a C_loc <= Dw,
    // the worst point being the edge itself (every term decays faster than
    // exp(-eta_w s) beyond it). The edge is placed far enough right of the
    // envelope's clamp corner that a C_loc <= Dw / 4, which keeps the
    // condition solvable with a factor-2 margin for every amp <= 1.
    const double pad =
        std::max(0.0, std::log(4.0 * p.a / Dw) / lv) + 0.5;
    const double S7 = S6 + pad + std::max(0.0, aux.zeta7);
    const double C_loc = std::exp(lv * (S6 - S7));
    if (!(p.a * C_loc < 0.5 * Dw))
        throw HypothesisViolated(
            "wunder envelope condition failed: a C_loc >= Dw / 2");
    const double amp =
        aux.amp > 0.0 ? std::min(aux.amp, 1.0) : 1.0;
    const double Kw_target = std::max(
        1.0, std::pow(2.0 * amp / (Dw - p.a * C_loc), eta_w / Lam));
    const double A =
        std::max(C_loc, (Kw_target * Dw - 1.0) / p.a);

    BlockSpec wsp;
    wsp.p = p;
    wsp.delta = 0.0;
    wsp.c = c2;
    wsp.ct = c1;
    wsp.A = A;
    wsp.eta = eta_w;
    wsp.lam = lam;
    wsp.scale = amp;
    BuildingBlock wu = build_block(BlockKind::wunder, wsp);
    wu.shift = S7;

    // Keep the chi tail at or below half the wunder peak over the guarded
    // span, so the crossing always sits inside the peak window.
    const double horizon = aux.t_horizon > 0.0 ? aux.t_horizon : 50.0;
    const double Xw = cget(wu, "X_w");
    double shift_need = 1e300;
    for (double t = 0.0; t <= 2.0 * horizon; t += 2.5) {
        const double xpk = c1 * t + S7 + Xw;
        const double peak = wu.value(t, xpk);
        const double xi_half = frame_inverse(*chi.profile, 0, 0.5 * peak, false);
        shift_need = std::min(shift_need, (xpk - c2 * t) - xi_half);
    }
    chi.shift = shift_need;

    auto impl = std::make_shared<AssemblyImpl>();
    impl->blocks = {chi, wu};
    impl->ifaces.push_back({InterfaceId::x0, "x0", 0, 1, c1, false, 0.0});
    impl->has_vbar = true;
    impl->vbar_lam = lv;
    impl->vbar_c = c1;
    impl->vbar_xref = S6;

    for (double t = 0.0; t <= horizon; t += 5.0) impl->iface_pos(0, t);
    audit_continuity(*impl, horizon);

    std::map<std::string, double> cons;
    cons["A"] = A;
    cons["eta_w"] = eta_w;
    cons["D_w"] = Dw;
    cons["C_loc"] = C_loc;
    cons["amp"] = amp;
    cons["K_w"] = cget(wu, "K_w");
    cons["x_w"] = cget(wu, "x_w");
    cons["X_w"] = Xw;
    cons["Lambda"] = Lam;
    cons["lambda"] = lam;
    cons["lambda_v"] = lv;
    cons["zeta6"] = S6;
    cons["zeta7"] = S7;
    cons["chi_shift"] = chi.shift;
    return finish(AssemblyKind::terrace_sub, p, delta, /*is_super=*/false, c1,
                  c2, impl, std::move(cons));
}

static BarrierAssembly assemble_nonexistence(const ModelParams& p, double c1,
                                             double c2, double delta,
                                             const AssemblyAux& aux) {
    const double c_llw =
        aux.c_llw > 0.0 ? aux.c_llw : 2.0 * std::sqrt(1.0 - p.a);
    const double fc2 = speeds::f_of(c2, p.a);
    if (!(c2 >= c_llw - 1e-12 && c1 >= 2.0 * std::sqrt(p.r * p.d) - 1e-12 &&
          c2 <= c1 && c1 < fc2))
        throw NotAdmissible(
            "nonexistence barriers need c2 <= c1 < f(c2) with admissible fronts");
    // Auxiliary speeds close to the optimum of the z-window.
    const double c = c2 + 0.05 * (speeds::f_inverse(c1, p.a) - c2);
    const double fc = speeds::f_of(c, p.a);
    const double lo_ct = std::max(c1, fc - 4.0 * std::sqrt(p.a));
    const double ctil = lo_ct + 0.05 * (fc - lo_ct);
    const double lam = speeds::lambda_u(c, p.a, 0.0);
    const double q = 4.0 * (lam * (ctil - c) + 1.0) - sqr(ctil);
    if (!(delta < 0.225 * q))  // delta < (90% of) q/4
        throw HypothesisViolated(
            "delta too large for the z block: needs delta < " +
            std::to_string(0.225 * q));

    const double kappa =
        aux.kappa > 0.0 ? aux.kappa : 0.25 * std::min(1.0 - p.a, delta);

    // alpha just long enough that its max clears (1-a)/2.
    const double Lmin = kPi / std::sqrt(1.0 - p.a);
    auto alpha_max = [&](double l) {
        Bump bump;
        if (!solve_bump(1.0, 0.0, 1.0, 1.0 - p.a, l, 1501, bump)) return 0.0;
        return bump.maxval;
    };
    double loL = Lmin * 1.0001, hiL = 4.0 * Lmin;
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (loL + hiL);
        (alpha_max(mid) >= 0.5 * (1.0 - p.a) ? hiL : loL) = mid;
    }
    const double L_used = 1.05 * hiL;
    BlockSpec as;
    as.p = p;
    as.l = L_used;
    BuildingBlock al = build_block(BlockKind::alpha, as);
    if (cget(al, "maxval") < 0.5 * (1.0 - p.a))
        throw HypothesisViolated("alpha bump too low");

    BlockSpec cs;
    cs.p = p;
    cs.c = c;
    BuildingBlock chi = build_block(BlockKind::chi, cs);
    const double chi_inv_kappa = frame_inverse(*chi.profile, 0, kappa, false);
    const double chi_inv_half_delta =
        frame_inverse(*chi.profile, 0, 0.5 * delta, false);
    // The z block decays in time at rate lam(c)(ct - c) while chi, evaluated
    // along the moving junction window, decays at only rate_right(chi)(ct - c).
    // Tying the z peak to chi(zeta) would therefore let the chi/z crossing
    // vanish after a short time; instead the peak is pinned just below kappa
    // and zeta is pushed far enough into chi's tail that the amplitude gap
    // covers the rate deficit over the whole working horizon.
    const double horizon = aux.t_horizon > 0.0 ? aux.t_horizon : 50.0;
    const double lam_chi = cget(chi, "rate_right");
    const double rate_gap = std::max(0.0, (lam - lam_chi) * (ctil - c));
    const double zeta_pad =
        (rate_gap * (horizon + 15.0) + std::log(4.0)) / lam_chi;
    const double zeta =
        aux.zeta > 0.0
            ? aux.zeta
            : std::max({L_used, chi_inv_kappa, chi_inv_half_delta}) + 5.0 +
                  zeta_pad;
    // alpha-side crossing level kappa: zeta0 aligns the chi level with the
    // right flank of alpha.
    double loA = cget(al, "argmax"), hiA = L_used;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (loA + hiA);
        (al.profile->eval(mid, 0, 0) > kappa ? loA : hiA) = mid;
    }
    const double alpha_right_inv = 0.5 * (loA + hiA);
    const double zeta0 = alpha_right_inv - chi_inv_kappa;
    chi.shift = zeta0;

    BlockSpec zs;
    zs.p = p;
    zs.delta = delta;
    zs.c = c;
    zs.ct = ctil;
    zs.A = 1.0;
    BuildingBlock zb = build_block(BlockKind::z, zs);
    const double ystar = cget(zb, "argmax");
    const double zmax_unit =
        std::exp(-cget(zb, "m") * ystar) * std::sin(cget(zb, "k") * ystar);
    // Peak amplitude: below both kappa (the cap on u beyond L) and delta/2
    // (the room the residual of the z piece leaves once a v-bar <= delta/2).
    const double rho = 0.98 * std::min(kappa, 0.5 * delta) / zmax_unit;
    zs.A = rho;
    zb = build_block(BlockKind::z, zs);
    zb.shift = zeta0 + zeta;

    const double lvt = speeds::lambda_v(ctil, p.r, p.d);
    const double C_delta = delta / (2.0 * p.a);

    auto impl = std::make_shared<AssemblyImpl>();
    impl->blocks = {al, chi, zb};
    impl->ifaces.push_back({InterfaceId::x0_ne, "x0", 0, 1, 0.0, false, 0.0});
    impl->ifaces.push_back({InterfaceId::x1_ne, "x1", 1, 2, ctil, false, 0.0});
    impl->has_vbar = true;
    impl->vbar_lam = lvt;
    impl->vbar_c = ctil;
    impl->vbar_xref = zeta0 + zeta + std::log(C_delta) / lvt;

    for (double t = 0.0; t <= horizon; t += 5.0) {
        const double x0 = impl->iface_pos(0, t);
        const double x1 = impl->iface_pos(1, t);
        if (!(x0 < x1))
            throw HypothesisViolated("nonexistence interface ordering failed");
    }
    audit_continuity(*impl, horizon);

    std::map<std::string, double> cons;
    cons["c_ne"] = c;
    cons["ct_ne"] = ctil;
    cons["delta_max"] = 0.25 * q;
    cons["kappa"] = kappa;
    cons["zeta"] = zeta;
    cons["zeta0"] = zeta0;
    cons["L"] = L_used;
    cons["R_z"] = cget(zb, "R_z");
    cons["rho"] = rho;
    cons["z_peak"] = rho * zmax_unit;
    cons["lambda_chi"] = lam_chi;
    cons["C_delta"] = C_delta;
    cons["lambda_v_tilde"] = lvt;
    return finish(AssemblyKind::nonexistence_sub, p, delta, /*is_super=*/false,
                  c1, c2, impl, std::move(cons));
}

BarrierAssembly assemble(AssemblyKind which, const ModelParams& p, double c1,
                         double c2, double delta, const AssemblyAux& aux) {
    validate_params(p);
    if (!(delta > 0.0 && delta < 0.5))
        throw HypothesisViolated("delta must lie in (0, 1/2)");
    switch (which) {
        case AssemblyKind::terrace_super:
        case AssemblyKind::compact_super:
            return assemble_super(which, p, c1, c2, delta, aux);
        case AssemblyKind::terrace_sub:
            return assemble_terrace_sub(p, c1, c2, delta, aux);
        case AssemblyKind::nonexistence_sub:
            return assemble_nonexistence(p, c1, c2, delta, aux);
    }
    throw DomainError("unknown assembly kind");
}

// ---------------------------------------------------------------------------
// Ordered pair and empirical delta threshold.
// ---------------------------------------------------------------------------

std::pair<BarrierAssembly, BarrierAssembly> ordered_terrace_pair(
    const ModelParams& p, double c1, double c2, double delta,
    const AssemblyAux& aux) {
    BarrierAssembly sup =
        assemble(AssemblyKind::terrace_super, p, c1, c2, delta, aux);
    const double lv = speeds::lambda_v(c1, p.r, p.d);
    const double s_pi = sup.constants.at("s_pi");

    // zeta6: smallest translation of exp(-lv x) that dominates the super
    // pair's v component at t = 0 (log-space scan plus the analytic tail).
    double xlo = 1e300;
    for (double k : sup.kink_positions(0.0)) xlo = std::min(xlo, k);
    xlo -= 50.0;
    const double xhi = s_pi + 400.0;
    double maxlog = -1e300;
    for (double x = xlo; x <= xhi; x += 0.05) {
        const double vv = sup.v(0.0, x);
        if (vv > 0.0) maxlog = std::max(maxlog, std::log(vv) + lv * x);
    }
    // beta tail: v ~ exp(-lv (x - s_pi - xi_beta_shift)); its weighted sup is
    // attained in the limit x -> +inf.
    const BuildingBlock& beta = sup.impl ? sup.blocks.back() : sup.blocks.back();
    maxlog = std::max(maxlog,
                      lv * (beta.shift - cget(beta, "xi_beta")));
    double S6 = maxlog / lv + 1e-9;

    // The sub pair's u tail must decay at least as fast as the super pair's,
    // otherwise no translation can order the pair at +infinity.
    const double Lam_sub =
        0.5 * (c1 - std::sqrt(sqr(c1) -
                              4.0 * (speeds::lambda_u(c2, p.a, 0.0) *
                                         (c1 - c2) +
                                     1.0)));
    if (Lam_sub < sup.constants.at("Lambda_delta") - 1e-9)
        throw HypothesisViolated(
            "sub u tail decays slower than the super u tail");

    // Probe build at unit amplitude fixes the geometry (zeta7, the bump
    // window); the amplitude is then chosen so the bump stays below half the
    // super's u along the moving peak over the guarded span, which by the
    // rate comparison above orders the whole u components.
    AssemblyAux a2 = aux;
    a2.zeta6 = S6;
    a2.zeta7 = std::max(0.0, aux.zeta7);
    a2.amp = 1.0;
    BarrierAssembly sub =
        assemble(AssemblyKind::terrace_sub, p, c1, c2, delta, a2);
    const double S7 = sub.constants.at("zeta7");
    const double Xw = sub.constants.at("X_w");
    const double horizon = aux.t_horizon > 0.0 ? aux.t_horizon : 50.0;
    double amp = 1.0;
    for (double t = 0.0; t <= 2.0 * horizon; t += 2.5) {
        const double xpk = c1 * t + S7 + Xw;
        const double wpk = sub.blocks[1].value(t, xpk);
        if (wpk > 0.0)
            amp = std::min(amp, 0.5 * sup.u(t, xpk) / wpk);
    }
    if (!(amp > 0.0 && std::isfinite(amp)))
        throw HypothesisViolated("could not order the terrace pair");
    a2.amp = amp;
    sub = assemble(AssemblyKind::terrace_sub, p, c1, c2, delta, a2);

    // Verified competitive ordering over the guarded horizon.
    for (double t = 0.0; t <= horizon; t += 5.0)
        for (double x = xlo; x <= xhi; x += 0.1) {
            if (sub.u(t, x) > sup.u(t, x) + 1e-12)
                throw HypothesisViolated("terrace pair u ordering failed");
            if (sub.v(t, x) < sup.v(t, x) - 1e-12)
                throw HypothesisViolated("terrace pair v ordering failed");
        }
    return {sup, sub};
}

double empirical_delta_star(AssemblyKind which, const ModelParams& p,
                            double c1, double c2) {
    for (double d : {0.1, 0.05, 0.02, 0.01}) {
        try {
            assemble(which, p, c1, c2, d);
            return d;
        } catch (const NotAdmissible&) {
            throw;
        } catch (const Error&) {
            continue;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Certification.
// ---------------------------------------------------------------------------

namespace {

struct RowHit {
    bool bad = false;
    std::string piece;
    double t = 0.0, x = 0.0, value = 0.0;
};

}  // namespace

static ResidualReport certify_impl(const BarrierAssembly& a,
                                   const Lattice& lat, double margin) {
    ResidualReport rep;
    rep.slack = 1e-8;
    const double dxl = (lat.x1 - lat.x0) / std::max(1, lat.nx - 1);
    rep.interface_margin = margin > 0.0 ? margin : 3.0 * dxl;
    rep.t_horizon = lat.t1;
    const ModelParams& p = a.p;
    const bool sup = a.is_super;

    struct Acc {
        double wu = 1e300, wv = 1e300;
        double tu = 0, xu = 0, tv = 0, xv = 0;
        long pts = 0;
    };

    struct RowOut {
        std::map<std::string, Acc> acc;
        std::map<std::string, double> ident;
        long sampled = 0, excluded = 0;
        RowHit hit;
    };

    std::vector<RowOut> rows(lat.nt);
    const char* env = std::getenv("TERRACE_LAB_THREADS");
    unsigned nthreads = std::thread::hardware_concurrency();
    if (env && std::atoi(env) > 0) nthreads = std::atoi(env);
    nthreads = std::max(1u, std::min(nthreads, 16u));

    auto work = [&](unsigned tid) {
        for (int it = tid; it < lat.nt; it += nthreads) {
            RowOut& row = rows[it];
            const double t =
                lat.t0 + (lat.t1 - lat.t0) * it / std::max(1, lat.nt - 1);
            const auto kinks = a.kink_positions(t);
            for (int ix = 0; ix < lat.nx; ++ix) {
                const double x =
                    lat.x0 + (lat.x1 - lat.x0) * ix / std::max(1, lat.nx - 1);
                bool near = false;
                for (double k : kinks)
                    if (std::abs(x - k) < rep.interface_margin) { near = true; break; }
                if (near) { ++row.excluded; continue; }
                const AssemblyPoint pt = a.eval(t, x);
                ++row.sampled;
                const double ru =
                    pt.ut - pt.uxx - pt.u * (1.0 - pt.u - p.a * pt.v);
                const double rv = pt.vt - p.d * pt.vxx -
                                  p.r * pt.v * (1.0 - pt.v - p.b * pt.u);
                const double mu = sup ? ru : -ru;  // must be >= -slack
                const double mv = sup ? -rv : rv;
                const std::string key =
                    std::string("(") + pt.u_piece + "," + pt.v_piece + ")";
                Acc& acc = row.acc[key];
                ++acc.pts;
                if (mu < acc.wu) { acc.wu = mu; acc.tu = t; acc.xu = x; }
                if (mv < acc.wv) { acc.wv = mv; acc.tv = t; acc.xv = x; }
                if ((mu < -rep.slack || mv < -rep.slack) && !row.hit.bad) {
                    row.hit.bad = true;
                    row.hit.piece = key;
                    row.hit.t = t;
                    row.hit.x = x;
                    row.hit.value = std::min(mu, mv);
                }
                if (std::string(pt.u_piece) == "wbar") {
                    double& id = row.ident["wbar"];
                    id = std::max(id, std::abs(pt.ut - pt.uxx - pt.u));
                }
                const char* up = pt.u_piece;
                if (std::string(up) == "wbar") {
                    // handled above
                } else if (std::string(up) == "z") {
                    double& id = row.ident["z"];
                    id = std::max(
                        id, std::abs(pt.ut - pt.uxx - (1.0 - a.delta) * pt.u));
                }
                // The wbar / z blocks can also sit in the v slot.
                if (std::string(pt.v_piece) == "wbar") {
                    double& id = row.ident["wbar"];
                    id = std::max(id, std::abs(pt.vt - pt.vxx - pt.v));
                }
            }
        }
    };

    std::vector<std::thread> pool;
    for (unsigned tthread = 1; tthread < nthreads; ++tthread)
        pool.emplace_back(work, tthread);
    work(0);
    for (auto& th : pool) th.join();

    std::map<std::string, Acc> merged;
    for (const RowOut& row : rows) {
        rep.sampled += row.sampled;
        rep.excluded += row.excluded;
        for (const auto& kv : row.acc) {
            Acc& acc = merged[kv.first];
            acc.pts += kv.second.pts;
            if (kv.second.wu < acc.wu) {
                acc.wu = kv.second.wu;
                acc.tu = kv.second.tu;
                acc.xu = kv.second.xu;
            }
            if (kv.second.wv < acc.wv) {
                acc.wv = kv.second.wv;
                acc.tv = kv.second.tv;
                acc.xv = kv.second.xv;
            }
        }
        for (const auto& kv : row.ident) {
            double& id = rep.identity_residuals[kv.first];
            id = std::max(id, kv.second);
        }
        if (row.hit.bad && rep.failure.empty()) {
            std::ostringstream os;
            os << "piece " << row.hit.piece << " at (t,x) = (" << row.hit.t
               << ", " << row.hit.x << "): margin " << row.hit.value;
            rep.failure = os.str();
        }
    }
    for (const auto& kv : merged) {
        PieceMargin pm;
        pm.piece = kv.first;
        pm.worst_u = kv.second.wu;
        pm.worst_v = kv.second.wv;
        pm.t_u = kv.second.tu;
        pm.x_u = kv.second.xu;
        pm.t_v = kv.second.tv;
        pm.x_v = kv.second.xv;
        pm.points = kv.second.pts;
        rep.pieces.push_back(pm);
    }
    rep.certified = rep.failure.empty() && rep.sampled > 0;
    if (rep.sampled == 0) rep.failure = "empty lattice after exclusions";
    return rep;
}

ResidualReport try_certify(const BarrierAssembly& assembly, const Lattice& lat,
                           double interface_margin) {
    return certify_impl(assembly, lat, interface_margin);
}

ResidualReport certify_residuals(const BarrierAssembly& assembly,
                                 const Lattice& lat, double interface_margin) {
    ResidualReport rep = certify_impl(assembly, lat, interface_margin);
    if (!rep.certified) throw CertificationFailed(rep.failure);
    return rep;
}

std::string ResidualReport::to_json() const {
    std::ostringstream os;
    os << "{\n  \"certified\": " << (certified ? "true" : "false")
       << ",\n  \"slack\": " << fmt17(slack)
       << ",\n  \"interface_margin\": " << fmt17(interface_margin)
       << ",\n  \"t_horizon\": " << fmt17(t_horizon)
       << ",\n  \"sampled\": " << sampled << ",\n  \"excluded\": " << excluded
       << ",\n  \"pieces\": [";
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const PieceMargin& pm = pieces[i];
        os << (i ? "," : "") << "\n    {\"piece\": \"" << pm.piece
           << "\", \"worst_u\": " << fmt17(pm.worst_u)
           << ", \"worst_v\": " << fmt17(pm.worst_v)
           << ", \"at_u\": [" << fmt17(pm.t_u) << ", " << fmt17(pm.x_u)
           << "], \"at_v\": [" << fmt17(pm.t_v) << ", " << fmt17(pm.x_v)
           << "], \"points\": " << pm.points << "}";
    }
    os << "\n  ],\n  \"identity_residuals\": {";
    std::size_t k = 0;
    for (const auto& kv : identity_residuals)
        os << (k++ ? ", " : "") << "\"" << kv.first
           << "\": " << fmt17(kv.second);
    os << "},\n  \"failure\": \"" << failure << "\"\n}\n";
    return os.str();
}

std::string interfaces_csv(const BarrierAssembly& assembly,
                           const std::vector<double>& times) {
    std::ostringstream os;
    os << "t,x,interface_id\n";
    for (double t : times) {
        const auto pos = assembly.interface_positions(t);
        for (std::size_t i = 0; i < pos.size(); ++i)
            os << fmt17(t) << "," << fmt17(pos[i]) << ","
               << assembly.interfaces[i].label << "\n";
    }
    return os.str();
}

bool sandwiched_by(const StatePair& s, const Grid& g,
                   const BarrierAssembly& assembly, double tol) {
    if (static_cast<int>(s.u.size()) != g.n ||
        static_cast<int>(s.v.size()) != g.n)
        throw GridMismatch("state does not match the grid");
    for (int i = 0; i < g.n; ++i) {
        const AssemblyPoint pt = assembly.eval(s.t, g.x(i));
        if (assembly.is_super) {
            if (s.u[i] > pt.u + tol || s.v[i] < pt.v - tol) return false;
        } else {
            if (s.u[i] < pt.u - tol || s.v[i] > pt.v + tol) return false;
        }
    }
    return true;
}

}  // namespace barriers
}  // namespace terrace
