#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "liqode/core.hpp"
#include "liqode/detail/dd.hpp"
#include "liqode/errors.hpp"
#include "liqode/grid_solution.hpp"
#include "liqode/series.hpp"

namespace liqode {

enum class envelope_side { sub, super };

// exponential perturbation of an anchor solution: value = u - eps x^alpha e^{-beta/sqrt x}.
// sub and super sides differ only in alpha; both lie below the anchor for x < 1.
struct envelope_spec {
    grid_solution anchor;
    double eps = 1.0;
    double alpha = 0.0;
    double beta = 0.0; // 4ck exactly
    envelope_side side = envelope_side::sub;
    double x_valid = 0.0;

    double value(double x) const {
        return anchor.eval_u(x) - eps * std::pow(x, alpha) * std::exp(-beta / std::sqrt(x));
    }
};

struct trivial_envelopes {
    double lower_residual;    // E 0 = -c
    double upper_slope_coeff; // E x = (a+b) x
    static double lower(double) { return 0.0; }
    static double upper(double x) { return x; }
};

inline trivial_envelopes trivial_envelope(const model_params& p) {
    if (regime(p) != regime_kind::rich)
        throw regime_error("trivial_envelope: 0 and x bracket solutions only for a+b > 0");
    return {-p.c, p.a + p.b};
}

struct l_estimate {
    double l = 0.0;                // inflated estimate
    std::vector<double> ladder;    // sup over [tau_j, cap] for shrinking tau_j
    bool diverging = false;        // each lower-end refinement doubles the sup
    double x_cap = 0.0;
};

// sharpened layer bound |(u'-1)/sqrt(x) + k| <= l sqrt(x): grid sup of the
// quotient over (0, min(1, x_max)], inflated by 1.5
inline l_estimate estimate_l_report(const grid_solution& sol) {
    if (sol.size() == 0)
        throw argument_error("estimate_l: empty trace");
    if (!(sol.x_min() <= 1e-4))
        throw coverage_error("estimate_l: grid must reach x <= 1e-4");
    const double k = layer_k(sol.params);
    const double cap = std::min(1.0, sol.x_max());
    l_estimate rep;
    rep.x_cap = cap;
    const double xmin = sol.x_min();
    for (int j = 0; j <= 4; ++j) {
        const double tau = std::pow(xmin, j / 4.0) * std::pow(cap, 1.0 - j / 4.0);
        double sup = 0.0;
        for (size_t i = 0; i < sol.size(); ++i) {
            const double x = sol.xs[i];
            if (x < tau || x > cap) continue;
            const double s = std::sqrt(x);
            sup = std::max(sup, std::abs((sol.du[i] - 1.0) / s + k) / s);
        }
        rep.ladder.push_back(sup);
    }
    rep.l = 1.5 * rep.ladder.back();
    const auto& L = rep.ladder;
    rep.diverging = L[4] > 2.0 * L[3] && L[3] > 2.0 * L[2] && L[2] > 0.0;
    return rep;
}

inline double estimate_l(const grid_solution& sol) { return estimate_l_report(sol).l; }

inline envelope_spec make_envelope(const grid_solution& anchor, envelope_side side,
                                   double l, double eps = 1.0,
                                   std::optional<double> alpha = std::nullopt) {
    if (!(eps > 0.0) || !(eps <= 1.0))
        throw argument_error("make_envelope: eps in (0,1]");
    if (!(l >= 0.0))
        throw argument_error("make_envelope: l >= 0");
    const model_params& p = anchor.params;
    const double k = layer_k(p);
    envelope_spec env;
    env.anchor = anchor;
    env.eps = eps;
    env.beta = 4.0 * p.c * k;
    env.side = side;
    const double lo_thresh = 1.5 + p.a - 2.0 * p.c * l;
    const double hi_thresh = 1.5 + p.a + 2.0 * p.c * l;
    env.alpha = alpha ? *alpha : (side == envelope_side::sub ? lo_thresh - 1.0 : hi_thresh + 1.0);
    if (side == envelope_side::sub && !(env.alpha < lo_thresh))
        throw argument_error("make_envelope: sub side needs alpha < 3/2 + a - 2cl");
    if (side == envelope_side::super && !(env.alpha > hi_thresh))
        throw argument_error("make_envelope: super side needs alpha > 3/2 + a + 2cl");
    env.x_valid = std::min(1.0, anchor.x_max());
    return env;
}

namespace detail {

// E v for v = u - eps x^alpha e^{-beta/sqrt x} along an exact solution u, grouped so that
// the anchor enters only through (u'-1)/sqrt(x). evaluated in double-double: with
// beta = 4ck the leading brackets cancel to many digits below their own size.
inline dd perturbation_expansion(const model_params& p, double x, double du, double eps,
                                 double alpha, double beta) {
    const dd X(x);
    const dd sx = sqrt(X);
    const dd E = exp(dd(-beta) / sx);
    if (E.hi == 0.0) return dd(0.0);
    const dd al(alpha), be(beta), a(p.a), b(p.b), c(p.c), ep(eps);
    const dd xa = pow(X, al);           // x^alpha
    const dd xm1 = xa / X;              // x^{alpha-1}
    const dd xmh = xa / sx;             // x^{alpha-1/2}
    const dd phi = (dd(du) - dd(1.0)) / sx;
    dd sum = (be * be / dd(4.0)) * xm1;
    sum += ((al - dd(1.5)) * be / dd(2.0) + al * be / dd(2.0) - a * be / dd(2.0)) * xmh;
    sum += (al * (al - dd(1.0)) - a * al - b) * xa;
    sum += dd(2.0) * c * phi * ((be / dd(2.0)) * xm1 + al * xmh);
    const dd dphi = (be / dd(2.0)) * (xa / (X * sx)) + al * xm1; // phi' of the bump
    sum -= ep * c * dphi * dphi * E;
    return ep * E * sum;
}

// direct route: assemble v, v', v'' and apply the operator, all in double-double;
// u'' is re-forced from (u, u') inside dd so that E u vanishes identically
inline dd perturbation_direct(const model_params& p, double x, double u, double du,
                              double eps, double alpha, double beta) {
    const dd X(x), a(p.a), b(p.b), c(p.c);
    const dd sx = sqrt(X);
    const dd E = exp(dd(-beta) / sx);
    const dd al(alpha), be(beta), ep(eps);
    const dd U(u), DU(du);
    const dd ddu_f = (a * X * DU + b * U - c * (DU - dd(1.0)) * (DU - dd(1.0))) / (X * X);
    const dd xa = pow(X, al);
    dd phi0(0.0), phi1(0.0), phi2(0.0);
    if (E.hi != 0.0) {
        phi0 = xa * E;
        phi1 = E * (al * xa / X + (be / dd(2.0)) * xa / (X * sx));
        phi2 = E * ((be * be / dd(4.0)) * xa / (X * X * X) +
                    (be / dd(2.0)) * (dd(2.0) * al - dd(1.5)) * xa / (X * X * sx) +
                    al * (al - dd(1.0)) * xa / (X * X));
    }
    const dd V = U - ep * phi0;
    const dd DV = DU - ep * phi1;
    const dd DDV = ddu_f - ep * phi2;
    return -X * X * DDV + a * X * DV + b * V - c * (DV - dd(1.0)) * (DV - dd(1.0));
}

} // namespace detail

// E of the perturbed function at x, asserted two ways: the direct operator and
// the expanded bracket form must agree to 1e-9 relative
inline double perturbation_residual(const envelope_spec& env, double x) {
    if (!(x > 0.0) || !(x < env.x_valid))
        throw argument_error("perturbation_residual: x outside (0, x_valid)");
    const model_params& p = env.anchor.params;
    const double u = env.anchor.eval_u(x);
    const double du = env.anchor.eval_du(x);
    const detail::dd A = detail::perturbation_direct(p, x, u, du, env.eps, env.alpha, env.beta);
    const detail::dd B =
        detail::perturbation_expansion(p, x, du, env.eps, env.alpha, env.beta);
    const double da = detail::to_double(A), db = detail::to_double(B);
    const double scale = std::max({std::abs(da), std::abs(db), 1e-300});
    if (std::abs(da - db) / scale > 1e-9) {
        std::ostringstream os;
        os << "perturbation_residual: routes disagree at x=" << x << ": direct=" << da
           << " expanded=" << db;
        throw consistency_error(os.str());
    }
    return da;
}

struct envelope_report {
    double x_hat = 0.0;       // largest grid prefix (0, x_hat] with the expected sign
    double min_abs = 0.0;     // smallest |E v| over the verified prefix
    size_t n_checked = 0;
    size_t n_indeterminate = 0; // bump underflowed; sign unverifiable there
    std::vector<std::pair<double, double>> violations; // (x, E v) beyond the prefix
};

// empirical validity prefix: expected sign is negative for sub, positive for super.
// confirmed on the grid and once more on midpoints of the accepted prefix.
inline envelope_report verify_envelope(envelope_spec& env, const std::vector<double>& grid) {
    if (grid.empty())
        throw argument_error("verify_envelope: empty grid");
    for (size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !(grid[i] < env.x_valid))
            throw argument_error("verify_envelope: grid must lie in (0, x_valid)");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw argument_error("verify_envelope: grid must increase");
    }
    const double want = env.side == envelope_side::sub ? -1.0 : 1.0;
    envelope_report rep;
    auto ok_at = [&](double x) -> int {
        const double r = perturbation_residual(env, x);
        if (r == 0.0) return 0; // underflowed bump
        return r * want > 0.0 ? 1 : -1;
    };
    size_t prefix = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
        const double r = perturbation_residual(env, grid[i]);
        ++rep.n_checked;
        if (r == 0.0) {
            ++rep.n_indeterminate;
            prefix = i + 1;
            continue;
        }
        if (r * want > 0.0) {
            prefix = i + 1;
            if (rep.min_abs == 0.0 || std::abs(r) < rep.min_abs) rep.min_abs = std::abs(r);
        } else {
            for (size_t j = i; j < grid.size(); ++j) {
                const double rj = perturbation_residual(env, grid[j]);
                if (rj * want <= 0.0 && rj != 0.0) rep.violations.emplace_back(grid[j], rj);
            }
            break;
        }
    }
    // refinement pass: midpoints inside the accepted prefix must agree
    while (prefix > 1) {
        bool clean = true;
        for (size_t i = 0; i + 1 < prefix; ++i) {
            const double xm = 0.5 * (grid[i] + grid[i + 1]);
            ++rep.n_checked;
            const int s = ok_at(xm);
            if (s == 0) { ++rep.n_indeterminate; continue; }
            if (s < 0) {
                rep.violations.emplace_back(xm, perturbation_residual(env, xm));
                prefix = i + 1;
                clean = false;
                break;
            }
        }
        if (clean) break;
    }
    if (prefix == 0)
        throw envelope_error("verify_envelope: no uniform-sign prefix on the grid");
    rep.x_hat = grid[prefix - 1];
    env.x_valid = rep.x_hat;
    return rep;
}

} // namespace liqode
