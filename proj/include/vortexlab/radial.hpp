#pragma once

// Radial limiting profiles on R^2: Delta w + e^w (1 - e^w) = 4 pi m delta_0,
// shot as w = 2m ln r + v with v(0) = s, v'(0) = 0. Integration runs in
// t = ln r with an embedded Dormand-Prince 5(4) pair; the flux
//   beta = integral_0^inf e^w (1 - e^w) r dr
// and the absolute integrals of e^w, e^{2w} accumulate as extra quadrature
// states, with closed-form power-law tail corrections past r_max.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vortexlab {

enum class BoundaryClass { decays_to_zero, log_divergent };

struct RadialProfile {
    int m = 0;
    double s = 0.0;
    double r_max = 0.0;
    double tol = 1e-10;

    std::vector<double> r_grid;  // accepted integration nodes
    std::vector<double> w_grid;  // w = 2m ln r + v at those nodes

    double beta = 0.0;       // integral_0^inf e^w (1-e^w) r dr, tail-corrected
    double slope_at_end = 0.0;  // -dw/dlog r at r_max
    double int_ew = 0.0;     // integral_0^inf e^w r dr, tail-corrected
    double int_e2w = 0.0;    // integral_0^inf e^{2w} r dr, tail-corrected
    BoundaryClass boundary_class = BoundaryClass::decays_to_zero;
    bool partial = false;        // r_max too small for a trustworthy tail
    bool non_physical = false;   // e^w overflowed upward (w --> +inf)
};

struct ShootOptions {
    double r_max = 0.0;  // 0: automatic, max(1000, 120 exp(-s)) capped at 1e12
    double tol = 1e-10;  // relative tolerance; absolute = tol * 1e-2
};

namespace detail {

struct RadialState {
    double V, dV, B, A1, A2;
};

// y' at time t for the 5-state system; m enters through the source exponents
inline RadialState radial_rhs(int m, double t, const RadialState& y) {
    const double w = 2.0 * m * t + y.V;
    const double E1 = std::exp((2.0 * m + 2.0) * t + y.V);      // r^2 e^w
    const double E2 = std::exp((4.0 * m + 2.0) * t + 2.0 * y.V);  // r^2 e^{2w}
    (void)w;
    return {y.dV, -(E1 - E2), E1 - E2, E1, E2};
}

inline RadialState axpy(const RadialState& y, double h, const RadialState& k) {
    return {y.V + h * k.V, y.dV + h * k.dV, y.B + h * k.B, y.A1 + h * k.A1, y.A2 + h * k.A2};
}

}  // namespace detail

inline RadialProfile shoot(int m, double s, ShootOptions opts = {}) {
    if (m < 0) throw std::invalid_argument("shoot: m must be >= 0");
    if (m == 0 && s > 0.0)
        throw std::invalid_argument("shoot: m = 0 requires s <= 0 (e^w would overflow)");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("shoot: tol must be positive");

    double r_max = opts.r_max;
    // Far field carries w ~ -beta ln r + c with c close to -s + ln 64 for deep
    // m = 0 wells, so the leftover tail scales like e^{-s}/r_max^2.  Growing
    // r_max like e^{-s} keeps that tail (and the slope-fit window) in the
    // settled power-law regime; the log-time integration cost barely moves.
    if (r_max == 0.0)
        r_max = std::min(1e12, std::max(1000.0, 120.0 * std::exp(std::min(600.0, -s))));
    if (r_max < 50.0) throw std::invalid_argument("shoot: r_max must be >= 50");

    RadialProfile prof;
    prof.m = m;
    prof.s = s;
    prof.r_max = r_max;
    prof.tol = opts.tol;

    const double r0 = 1e-4;
    const double t0 = std::log(r0), T = std::log(r_max);

    // series start: v = s + c2 r^2 + c4 r^4 (m = 0), v = s - e^s r^{2m+2}/(2m+2)^2 (m >= 1)
    detail::RadialState y{};
    const double es = std::exp(s);
    if (m == 0) {
        const double c2 = -es * (1.0 - es) / 4.0;
        const double c4 = -c2 * es * (1.0 - 2.0 * es) / 16.0;
        y.V = s + c2 * r0 * r0 + c4 * r0 * r0 * r0 * r0;
        y.dV = 2.0 * c2 * r0 * r0 + 4.0 * c4 * r0 * r0 * r0 * r0;
        y.B = (es - es * es) * r0 * r0 / 2.0;
        y.A1 = es * r0 * r0 / 2.0;
        y.A2 = es * es * r0 * r0 / 2.0;
    } else {
        const double p = 2.0 * m + 2.0;
        const double rp = std::pow(r0, p);
        y.V = s - es * rp / (p * p);
        y.dV = -es * rp / p;
        y.B = es * rp / p - es * es * std::pow(r0, 2.0 * p - 2.0) / (2.0 * p - 2.0);
        y.A1 = es * rp / p;
        y.A2 = es * es * std::pow(r0, 2.0 * p - 2.0) / (2.0 * p - 2.0);
    }

    prof.r_grid.push_back(r0);
    prof.w_grid.push_back(2.0 * m * t0 + y.V);

    // Dormand-Prince 5(4)
    static const double A[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double C[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double E[7] = {35.0 / 384 - 5179.0 / 57600, 0.0,
                                500.0 / 1113 - 7571.0 / 16695, 125.0 / 192 - 393.0 / 640,
                                -2187.0 / 6784 + 92097.0 / 339200, 11.0 / 84 - 187.0 / 2100,
                                -1.0 / 40};

    const double rtol = opts.tol, atol = opts.tol * 1e-2;
    const double dt_max = 0.025;  // keeps >= 16 samples per octave for slope fits
    double t = t0, dt = 1e-3;
    while (t < T) {
        if (t + dt > T) dt = T - t;
        detail::RadialState k[7];
        k[0] = detail::radial_rhs(m, t, y);
        for (int st = 1; st < 7; ++st) {
            detail::RadialState z = y;
            for (int j = 0; j < st; ++j) z = detail::axpy(z, dt * A[st][j], k[j]);
            k[st] = detail::radial_rhs(m, t + C[st] * dt, z);
        }
        detail::RadialState y5 = y;
        for (int j = 0; j < 6; ++j) y5 = detail::axpy(y5, dt * A[6][j], k[j]);

        double errsq = 0.0;
        const double yv[5] = {y.V, y.dV, y.B, y.A1, y.A2};
        const double y5v[5] = {y5.V, y5.dV, y5.B, y5.A1, y5.A2};
        double errv[5] = {0, 0, 0, 0, 0};
        for (int j = 0; j < 7; ++j) {
            const double kv[5] = {k[j].V, k[j].dV, k[j].B, k[j].A1, k[j].A2};
            for (int c = 0; c < 5; ++c) errv[c] += E[j] * kv[c];
        }
        for (int c = 0; c < 5; ++c) {
            const double sc = atol + rtol * std::max(std::abs(yv[c]), std::abs(y5v[c]));
            const double e = dt * errv[c] / sc;
            errsq += e * e;
        }
        const double err = std::sqrt(errsq / 5.0);

        if (err <= 1.0 || dt <= 1e-12) {
            t += dt;
            y = y5;
            const double w = 2.0 * m * t + y.V;
            prof.r_grid.push_back(std::exp(t));
            prof.w_grid.push_back(w);
            if (w > 20.0) {  // e^w blowing up; not a vortex profile
                prof.non_physical = true;
                prof.partial = true;
                return prof;
            }
        }
        double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        fac = std::min(5.0, std::max(0.2, fac));
        dt = std::min(dt * fac, dt_max);
        if (dt < 1e-13) throw std::runtime_error("shoot: step size underflow");
    }

    const double wT = 2.0 * m * T + y.V;
    const double dwdtT = 2.0 * m + y.dV;
    prof.slope_at_end = -dwdtT;

    // classification at r_max: either w settled near 0 or it diverges like -beta ln r
    if (std::abs(wT) < 0.01 && std::abs(dwdtT) < 0.01) {
        prof.boundary_class = BoundaryClass::decays_to_zero;
        prof.beta = y.B;
        prof.int_ew = y.A1;   // divergent in truth; raw partial value, flagged
        prof.int_e2w = y.A2;
        prof.partial = std::abs(wT) > 0.0;
        return prof;
    }
    prof.boundary_class = BoundaryClass::log_divergent;

    // power-law tail w ~ -beta_slope ln r + c beyond r_max; two fixed-point passes
    const double ew = std::exp(wT), rm2 = r_max * r_max;
    double beta_slope = prof.slope_at_end;
    double beta_mass = y.B;
    for (int pass = 0; pass < 2; ++pass) {
        if (beta_slope <= 2.2) {
            prof.partial = true;
            break;
        }
        const double tailB = ew * rm2 / (beta_slope - 2.0) - ew * ew * rm2 / (2.0 * beta_slope - 2.0);
        beta_mass = y.B + tailB;
        beta_slope = beta_mass - 2.0 * m;
    }
    prof.beta = beta_mass;
    if (beta_slope > 2.2) {
        prof.int_ew = y.A1 + ew * rm2 / (beta_slope - 2.0);
        prof.int_e2w = y.A2 + ew * ew * rm2 / (2.0 * beta_slope - 2.0);
    } else {
        prof.int_ew = y.A1;
        prof.int_e2w = y.A2;
        prof.partial = true;
    }
    // tail must be a small correction, else r_max was too small
    if (ew * rm2 > 0.05 * std::max(1.0, y.B)) prof.partial = true;
    return prof;
}

inline double beta_of_s(int m, double s, ShootOptions opts = {}) {
    return shoot(m, s, opts).beta;
}

// w at arbitrary radius by linear interpolation in log r; constant (m = 0) or
// 2m log r (m >= 1) continuation below the first node, far-field slope above
// the last.
inline double sample_w(const RadialProfile& p, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("sample_w: r must be positive");
    const auto& rg = p.r_grid;
    const auto& wg = p.w_grid;
    if (rg.size() < 2) throw std::invalid_argument("sample_w: profile has no grid");
    const double t = std::log(r);
    if (r <= rg.front())
        return wg.front() + 2.0 * p.m * (t - std::log(rg.front()));
    if (r >= rg.back())
        return wg.back() - p.slope_at_end * (t - std::log(rg.back()));
    std::size_t hi = std::lower_bound(rg.begin(), rg.end(), r) - rg.begin();
    const double t0 = std::log(rg[hi - 1]), t1 = std::log(rg[hi]);
    const double a = (t - t0) / (t1 - t0);
    return (1.0 - a) * wg[hi - 1] + a * wg[hi];
}

// Inverse of s -> beta(s) by bracketed bisection (beta increases with s).
inline double invert_beta(double target_beta, int m = 0, double tol = 1e-6) {
    if (!(target_beta > 4.0))
        throw std::invalid_argument("invert_beta: target must exceed 4");
    ShootOptions opts;
    opts.tol = 1e-10;

    double s_hi = -0.05;  // wants beta(s_hi) > target
    double b_hi = beta_of_s(m, s_hi, opts);
    int guard = 0;
    while (b_hi <= target_beta) {
        s_hi *= 0.5;
        if (++guard > 60)
            throw std::runtime_error("invert_beta: no upper bracket; beta(s->0-) grows too slowly");
        b_hi = beta_of_s(m, s_hi, opts);
    }
    double s_lo = -1.0;
    double b_lo = beta_of_s(m, s_lo, opts);
    guard = 0;
    while (b_lo >= target_beta) {
        s_lo *= 2.0;
        if (++guard > 40 || s_lo < -550.0)
            throw std::runtime_error("invert_beta: no lower bracket; target too close to 4");
        b_lo = beta_of_s(m, s_lo, opts);
    }
    if (s_lo > s_hi) throw std::runtime_error("invert_beta: bracket collapsed");

    for (int it = 0; it < 200; ++it) {
        const double s_mid = 0.5 * (s_lo + s_hi);
        const double b = beta_of_s(m, s_mid, opts);
        if (b < target_beta)
            s_lo = s_mid;
        else
            s_hi = s_mid;
        // both the flux and the root itself must have settled
        if (std::abs(b - target_beta) < tol &&
            s_hi - s_lo < 1e-7 * std::max(1.0, std::abs(s_lo)))
            return 0.5 * (s_lo + s_hi);
        if (s_hi - s_lo < 1e-13 * std::max(1.0, std::abs(s_lo))) break;
    }
    return 0.5 * (s_lo + s_hi);
}

// Quadratic flux identities satisfied by log-divergent profiles, with
// beta_id = beta - 2m the far-field log slope:
//   integral e^{2w} dx = pi (beta_id^2 - 4 beta_id - 4 m^2 - 8 m)
//   integral e^{w}  dx = pi (beta_id^2 - 2 beta_id - 4 m^2 - 4 m)
struct FluxIdentities {
    double lhs_e2w, rhs_e2w, rel_e2w;
    double lhs_ew, rhs_ew, rel_ew;
};

inline FluxIdentities flux_identities(const RadialProfile& p) {
    if (p.boundary_class != BoundaryClass::log_divergent || p.partial || p.non_physical)
        throw std::invalid_argument(
            "flux_identities: requires a complete log-divergent profile");
    const double b = p.beta - 2.0 * p.m;
    FluxIdentities out{};
    out.lhs_e2w = 2.0 * M_PI * p.int_e2w;
    out.rhs_e2w = M_PI * (b * b - 4.0 * b - 4.0 * p.m * p.m - 8.0 * p.m);
    out.rel_e2w = std::abs(out.lhs_e2w - out.rhs_e2w) / std::abs(out.rhs_e2w);
    out.lhs_ew = 2.0 * M_PI * p.int_ew;
    out.rhs_ew = M_PI * (b * b - 2.0 * b - 4.0 * p.m * p.m - 4.0 * p.m);
    out.rel_ew = std::abs(out.lhs_ew - out.rhs_ew) / std::abs(out.rhs_ew);
    return out;
}

// Least-squares slope of w against -ln r over the window r in
// [lo_frac r_max, hi_frac r_max] (default [r_max/4, r_max/2]).
inline double far_field_slope(const RadialProfile& p, double lo_frac = 0.25,
                              double hi_frac = 0.5) {
    if (!(lo_frac > 0.0 && lo_frac < hi_frac && hi_frac <= 1.0))
        throw std::invalid_argument("far_field_slope: need 0 < lo_frac < hi_frac <= 1");
    const double rlo = p.r_max * lo_frac, rhi = p.r_max * hi_frac;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < p.r_grid.size(); ++i) {
        const double r = p.r_grid[i];
        if (r < rlo || r > rhi) continue;
        const double x = -std::log(r), y = p.w_grid[i];
        sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
        ++n;
    }
    if (n < 16)
        throw std::invalid_argument("far_field_slope: fewer than 16 samples in window");
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    if (vy < 1e-20)
        throw std::invalid_argument("far_field_slope: zero-variance response, no slope to fit");
    return (sxy - sx * sy / n) / vx;
}

}  // namespace vortexlab
