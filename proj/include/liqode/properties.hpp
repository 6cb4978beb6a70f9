#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "liqode/core.hpp"
#include "liqode/errors.hpp"
#include "liqode/grid_solution.hpp"

namespace liqode {

// classification dead-band: exact-constant traces (u=x, u=c/b) sit at zero
// in some derivative and are boundary cases, not violations
inline double sign_dead_band(double v) { return 1e-10 * (1.0 + std::abs(v)); }

inline int classify_sign(double v) {
    if (std::abs(v) <= sign_dead_band(v)) return 0;
    return v > 0.0 ? 1 : -1;
}

struct sign_interval {
    double x_lo = 0.0, x_hi = 0.0;
    int sign = 0; // -1, 0 (boundary band), +1
};

struct sign_violation {
    int which = 0; // 0: u, 1: u', 2: u'', 3: u'''
    double x = 0.0;
    double value = 0.0;
};

struct sign_profile_report {
    std::array<std::vector<sign_interval>, 4> intervals; // u, u', u'', u'''
    std::vector<sign_violation> violations;              // against (+,+,-,+)
    bool clean() const { return violations.empty(); }
};

// sign intervals of u, u', u'', u''' along the trace; u''' from the
// differentiated equation. expected pattern for nonconstant solutions is
// (+, +, -, +); band-zero points are boundary, not violations.
inline sign_profile_report sign_profile(const grid_solution& sol) {
    if (sol.size() < 2)
        throw argument_error("sign_profile: need at least two grid points");
    static constexpr int expected[4] = {1, 1, -1, 1};
    sign_profile_report rep;
    std::vector<double> vals(4);
    std::array<int, 4> cur{9, 9, 9, 9};
    std::array<double, 4> start{};
    for (size_t i = 0; i < sol.size(); ++i) {
        const double x = sol.xs[i];
        vals[0] = sol.u[i];
        vals[1] = sol.du[i];
        vals[2] = sol.ddu[i];
        vals[3] = forced_dddu(sol.params, x, sol.u[i], sol.du[i], sol.ddu[i]);
        for (int q = 0; q < 4; ++q) {
            const int s = classify_sign(vals[q]);
            if (s != 0 && s != expected[q])
                rep.violations.push_back({q, x, vals[q]});
            if (s != cur[q]) {
                if (cur[q] != 9)
                    rep.intervals[q].push_back({start[q], x, cur[q]});
                cur[q] = s;
                start[q] = x;
            }
        }
    }
    for (int q = 0; q < 4; ++q)
        rep.intervals[q].push_back({start[q], sol.x_max(), cur[q]});
    return rep;
}

struct fit_report {
    std::string model;
    double k_hat = 0.0;      // from (u'-1) ~ -k sqrt(x) + gamma x
    double aux1_coeff = 0.0; // from (u-x) ~ aux1 x^{3/2} + d2 x^2; should be -(2/3)k
    double x_lo = 0.0, x_hi = 0.0;
    double residual_norm = 0.0;
    size_t n_points = 0;
};

namespace detail {

// least squares for y ~ c0 f0 + c1 f1 (no intercept)
struct two_term_fit {
    double c0 = 0.0, c1 = 0.0, rms = 0.0;
};

inline two_term_fit fit2(const std::vector<double>& f0, const std::vector<double>& f1,
                         const std::vector<double>& y) {
    double a00 = 0, a01 = 0, a11 = 0, b0 = 0, b1 = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        a00 += f0[i] * f0[i];
        a01 += f0[i] * f1[i];
        a11 += f1[i] * f1[i];
        b0 += f0[i] * y[i];
        b1 += f1[i] * y[i];
    }
    const double det = a00 * a11 - a01 * a01;
    two_term_fit r;
    if (det != 0.0) {
        r.c0 = (a11 * b0 - a01 * b1) / det;
        r.c1 = (a00 * b1 - a01 * b0) / det;
    } else if (a00 > 0.0) {
        r.c0 = b0 / a00;
    }
    double ss = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - r.c0 * f0[i] - r.c1 * f1[i];
        ss += e * e;
    }
    r.rms = y.empty() ? 0.0 : std::sqrt(ss / y.size());
    return r;
}

} // namespace detail

// boundary-layer coefficient from the trace: fit (u'-1) against {sqrt x, x}
// over the small-x window, and (u-x) against {x^{3/2}, x^2} as a cross-check
inline fit_report asymptote_fit(const grid_solution& sol, double x_lo = 0.0,
                                double x_hi = 0.0) {
    if (x_lo <= 0.0) x_lo = 10.0 * sol.x_min();
    if (x_hi <= 0.0) x_hi = 1e-2;
    if (!(x_lo < x_hi))
        throw argument_error("asymptote_fit: empty range");
    std::vector<double> sx, xx, du1, s3, x2, uxx;
    for (size_t i = 0; i < sol.size(); ++i) {
        const double x = sol.xs[i];
        if (x < x_lo || x > x_hi) continue;
        const double s = std::sqrt(x);
        sx.push_back(s);
        xx.push_back(x);
        du1.push_back(sol.du[i] - 1.0);
        s3.push_back(x * s);
        x2.push_back(x * x);
        uxx.push_back(sol.u[i] - x);
    }
    if (sx.size() < 8)
        throw argument_error("asymptote_fit: fewer than 8 points in range");
    const auto f1 = detail::fit2(sx, xx, du1);
    const auto f2 = detail::fit2(s3, x2, uxx);
    fit_report rep;
    rep.model = "layer_asymptote";
    rep.k_hat = -f1.c0;
    rep.aux1_coeff = f2.c0;
    rep.x_lo = x_lo;
    rep.x_hi = x_hi;
    rep.residual_norm = f1.rms;
    rep.n_points = sx.size();
    return rep;
}

// minimum over the grid of 1 + u'(x) - 2 u(x)/x
inline double attack_inequality(const grid_solution& sol) {
    if (sol.size() == 0)
        throw argument_error("attack_inequality: empty trace");
    double m = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < sol.size(); ++i)
        m = std::min(m, 1.0 + sol.du[i] - 2.0 * sol.u[i] / sol.xs[i]);
    return m;
}

struct dichotomy_report {
    bool identical = false; // no resolvable difference anywhere
    int sign = 0;           // sign of w'' on the resolvable set
    bool one_signed = false;
    double max_abs_w = 0.0;
    double x_lo = 0.0, x_hi = 0.0; // resolvable window
    size_t n_resolvable = 0;
    std::vector<double> flip_xs; // resolvable points disagreeing with the majority sign
};

// w = v - u: w'' keeps one sign over the common domain. evaluated on the union
// grid via the dense interpolants; points are used only where both w and w''
// clear the combined interpolation noise floor.
inline dichotomy_report difference_dichotomy(const grid_solution& u, const grid_solution& v) {
    if (u.params.a != v.params.a || u.params.b != v.params.b || u.params.c != v.params.c)
        throw argument_error("difference_dichotomy: parameter mismatch");
    const double lo = std::max(u.x_min(), v.x_min());
    const double hi = std::min(u.x_max(), v.x_max());
    if (!(lo < hi))
        throw domain_error("difference_dichotomy: traces do not overlap");
    const double T = std::max(u.tol, v.tol);
    std::vector<double> xs;
    for (double x : u.xs)
        if (x >= lo && x <= hi) xs.push_back(x);
    for (double x : v.xs)
        if (x >= lo && x <= hi) xs.push_back(x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    dichotomy_report rep;
    int plus = 0, minus = 0;
    std::vector<std::pair<double, int>> marks;
    for (double x : xs) {
        const double uu = u.eval_u(x), vv = v.eval_u(x);
        const double w = vv - uu;
        rep.max_abs_w = std::max(rep.max_abs_w, std::abs(w));
        if (std::abs(w) <= 10.0 * T * (1.0 + std::abs(uu))) continue;
        const double wdd = v.eval_ddu(x) - u.eval_ddu(x);
        if (std::abs(wdd) <= 10.0 * T * (1.0 + std::abs(u.eval_ddu(x)))) continue;
        const int s = wdd > 0.0 ? 1 : -1;
        marks.emplace_back(x, s);
        if (s > 0) ++plus; else ++minus;
        if (rep.n_resolvable == 0) rep.x_lo = x;
        rep.x_hi = x;
        ++rep.n_resolvable;
    }
    if (rep.n_resolvable == 0) {
        rep.identical = true;
        return rep;
    }
    rep.sign = plus >= minus ? 1 : -1;
    for (const auto& [x, s] : marks)
        if (s != rep.sign) rep.flip_xs.push_back(x);
    rep.one_signed = rep.flip_xs.empty();
    return rep;
}

struct decay_report {
    double slope = 0.0;    // s in ln|v-u| = C + s (-1/sqrt x)
    double beta_ref = 0.0; // 4ck
    std::array<double, 3> poly_ratios{}; // sup-decay of |v-u|/x^p across the window, p=2,3,4
    bool superpoly = false;
    double x_lo = 0.0, x_hi = 0.0;
    size_t n_points = 0;
};

// two family members collapse onto each other faster than any x^p; the fitted
// exponential rate is reported against 4ck for orientation only
inline decay_report separation_decay(const grid_solution& u, const grid_solution& v) {
    if (u.params.a != v.params.a || u.params.b != v.params.b || u.params.c != v.params.c)
        throw argument_error("separation_decay: parameter mismatch");
    const double lo = std::max(u.x_min(), v.x_min());
    const double hi = std::min(u.x_max(), v.x_max());
    if (!(lo < hi))
        throw domain_error("separation_decay: traces do not overlap");
    const double T = std::max(u.tol, v.tol);
    std::vector<double> xs, lw;
    for (double x : u.xs) {
        if (x < lo || x > hi) continue;
        const double uu = u.eval_u(x);
        const double w = std::abs(v.eval_u(x) - uu);
        if (w <= 10.0 * T * (1.0 + std::abs(uu))) continue;
        xs.push_back(x);
        lw.push_back(std::log(w));
    }
    if (xs.size() < 8)
        throw insufficient_separation_error(
            "separation_decay: difference below noise floor over the overlap");
    decay_report rep;
    rep.beta_ref = 4.0 * u.params.c * layer_k(u.params);
    rep.x_lo = xs.front();
    rep.x_hi = xs.back();
    rep.n_points = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double t = -1.0 / std::sqrt(xs[i]);
        sx += t; sy += lw[i]; sxx += t * t; sxy += t * lw[i];
    }
    const double n = double(xs.size());
    rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.superpoly = true;
    for (int pi = 0; pi < 3; ++pi) {
        const double p = 2.0 + pi;
        const double r_first = std::exp(lw.front()) / std::pow(xs.front(), p);
        const double r_last = std::exp(lw.back()) / std::pow(xs.back(), p);
        rep.poly_ratios[pi] = r_first / r_last;
        if (!(rep.poly_ratios[pi] < 1e-3)) rep.superpoly = false;
    }
    return rep;
}

// at most one sign change of a sampled quantity outside the dead band
inline int count_sign_changes(const std::vector<double>& vals) {
    int changes = 0, last = 0;
    for (double v : vals) {
        const int s = classify_sign(v);
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

// tail monotonicity over the last quarter of the grid
inline bool eventually_monotone(const grid_solution& sol) {
    if (sol.size() < 8) return false;
    const size_t start = sol.size() - sol.size() / 4;
    int dir = 0;
    for (size_t i = start; i + 1 < sol.size(); ++i) {
        const double d = sol.u[i + 1] - sol.u[i];
        if (d == 0.0) continue;
        const int s = d > 0.0 ? 1 : -1;
        if (dir != 0 && s != dir) return false;
        dir = s;
    }
    return true;
}

// |u'(min x) - 1| against the layer width at the left edge
inline double du_limit_defect(const grid_solution& sol) {
    return std::abs(sol.du.front() - 1.0);
}

inline bool du_limit_ok(const grid_solution& sol) {
    const double k = layer_k(sol.params);
    return du_limit_defect(sol) < 5.0 * std::max(k, 1e-3) * std::sqrt(sol.x_min());
}

} // namespace liqode
