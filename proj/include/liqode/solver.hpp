#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "liqode/core.hpp"
#include "liqode/errors.hpp"
#include "liqode/grid_solution.hpp"
#include "liqode/ode.hpp"
#include "liqode/series.hpp"

namespace liqode {

struct state_point {
    double x;
    double u;
    double du;
};

struct transformed_state {
    double t;  // ln x
    double ut; // u(e^t)
    double vt; // du/dt = x u'(x)
};

inline transformed_state to_transformed(const state_point& s) {
    return {std::log(s.x), s.u, s.x * s.du};
}

inline state_point from_transformed(const transformed_state& s) {
    const double x = std::exp(s.t);
    return {x, s.ut, s.vt / x};
}

struct shooting_result {
    grid_solution solution;
    double bracket_low = 0.0;
    double bracket_high = 0.0;
    int n_bisections = 0;
    std::vector<std::string> classification_history;
    bool signs_ok = false;
    double du_at_xmax = 0.0;
};

inline constexpr double x_switch = 10.0; // above this, integrate in t = ln x

namespace detail {

// raw trace in x; x-form below x_switch (state (u, u'-1)), t-form above.
// direction free; nodes are every accepted step, ddu forced afterwards.
struct raw_trace {
    std::vector<double> xs, u, du;
    bool hit_event = false;
    int event_which = -1;
    double end_x = 0.0, end_u = 0.0, end_du = 0.0;
};

// events are specified on (x, u, du) regardless of the working variable
struct xevent {
    std::function<double(double, double, double)> g;
};

inline raw_trace integrate_raw(const model_params& p, state_point start, double x_end,
                               double rtol, const std::vector<xevent>& evs,
                               bool keep_nodes) {
    raw_trace tr;
    const double atol = 1e-30;
    double x = start.x, u = start.u, du = start.du;
    auto push = [&](double xx, double uu, double duu) {
        if (keep_nodes) {
            tr.xs.push_back(xx);
            tr.u.push_back(uu);
            tr.du.push_back(duu);
        }
    };
    push(x, u, du);

    // split the path at x_switch into x-form and t-form segments
    struct segment { bool tform; double from, to; };
    std::vector<segment> segs;
    const bool fwd = x_end > x;
    auto add = [&](bool tf, double a, double b) {
        if (a != b) segs.push_back({tf, a, b});
    };
    if (fwd) {
        add(x < x_switch ? false : true, x, std::clamp(x_switch, x, x_end));
        if (x < x_switch && x_end > x_switch) add(true, x_switch, x_end);
        if (x >= x_switch) { segs.clear(); add(true, x, x_end); }
        else if (x_end <= x_switch) { segs.clear(); add(false, x, x_end); }
    } else {
        if (x > x_switch && x_end < x_switch) {
            add(true, x, x_switch);
            add(false, x_switch, x_end);
        } else {
            add(x > x_switch, x, x_end);
        }
    }

    for (const auto& sg : segs) {
        if (!sg.tform) {
            auto rhs = [&p](double xx, const state2& y) { return rhs_x(p, xx, {y[0], y[1]}); };
            std::vector<event_fn> efs;
            for (const auto& e : evs)
                efs.push_back([&e](double xx, const state2& y) { return e.g(xx, y[0], y[1] + 1.0); });
            auto r = integrate_dp45(rhs, sg.from, sg.to, {u, du - 1.0}, rtol, atol, efs);
            for (size_t i = 1; i < r.steps.size(); ++i)
                push(r.steps[i].t, r.steps[i].y[0], r.steps[i].y[1] + 1.0);
            const auto& last = r.steps.back();
            x = last.t; u = last.y[0]; du = last.y[1] + 1.0;
            if (r.event.fired) {
                tr.hit_event = true;
                tr.event_which = r.event.which;
                break;
            }
        } else {
            auto rhs = [&p](double tt, const state2& y) { return rhs_t(p, tt, {y[0], y[1]}); };
            std::vector<event_fn> efs;
            for (const auto& e : evs)
                efs.push_back([&e](double tt, const state2& y) {
                    const double xx = std::exp(tt);
                    return e.g(xx, y[0], y[1] / xx);
                });
            auto r = integrate_dp45(rhs, std::log(x), std::log(sg.to), {u, x * du}, rtol, atol, efs);
            for (size_t i = 1; i < r.steps.size(); ++i) {
                const double xx = std::exp(r.steps[i].t);
                push(xx, r.steps[i].y[0], r.steps[i].y[1] / xx);
            }
            const auto& last = r.steps.back();
            x = std::exp(last.t); u = last.y[0]; du = last.y[1] / x;
            if (r.event.fired) {
                tr.hit_event = true;
                tr.event_which = r.event.which;
                break;
            }
        }
    }
    tr.end_x = x; tr.end_u = u; tr.end_du = du;
    return tr;
}

inline grid_solution to_solution(const model_params& p, raw_trace&& tr,
                                 const std::string& method, double tol) {
    grid_solution g;
    g.params = p;
    g.method = method;
    g.tol = tol;
    if (tr.xs.size() >= 2 && tr.xs.front() > tr.xs.back()) {
        std::reverse(tr.xs.begin(), tr.xs.end());
        std::reverse(tr.u.begin(), tr.u.end());
        std::reverse(tr.du.begin(), tr.du.end());
    }
    g.xs = std::move(tr.xs);
    g.u = std::move(tr.u);
    g.du = std::move(tr.du);
    g.ddu.resize(g.xs.size());
    for (size_t i = 0; i < g.xs.size(); ++i)
        g.ddu[i] = forced_ddu(p, g.xs[i], g.u[i], g.du[i]);
    return g;
}

} // namespace detail

inline grid_solution integrate(const model_params& p, state_point start, double x_end,
                               double tol) {
    if (!(start.x > 0.0) || !(x_end > 0.0))
        throw argument_error("integrate: need positive x");
    if (!(tol > 0.0))
        throw argument_error("integrate: need tol > 0");
    auto tr = detail::integrate_raw(p, start, x_end, tol, {}, true);
    return detail::to_solution(p, std::move(tr), "raw_ivp", tol);
}

// series seed (f_n(x_s), f_n'(x_s)); refuses x_s too large for 1e-3 relative truncation
inline state_point series_start(const model_params& p, int n, double x_s) {
    const auto coeffs = coefficients(p, n);
    const double last_rel =
        std::abs(coeffs.ks[static_cast<size_t>(n)]) * std::pow(x_s, 0.5 * n);
    if (last_rel > 1e-3) {
        std::ostringstream os;
        os << "series_start: x_s too large for n=" << n << " (last term " << last_rel
           << " relative); try x_s <= "
           << std::pow(1e-3 / std::abs(coeffs.ks[static_cast<size_t>(n)]), 2.0 / n);
        throw precision_error(os.str());
    }
    return {x_s, eval_partial<double>(coeffs, n, x_s, 0), eval_partial<double>(coeffs, n, x_s, 1)};
}

// x_s with the n-th series term at the requested relative size
inline double auto_x_s(const model_params& p, int n = 3, double rel = 1e-10) {
    const auto coeffs = coefficients(p, n);
    return std::pow(rel / std::abs(coeffs.ks[static_cast<size_t>(n)]), 2.0 / n);
}

namespace detail {

enum class shot_class { above, below };

struct shoot_diag {
    std::vector<std::string> history;
    double bracket_low = 0.0, bracket_high = 0.0;
    int n_bisections = 0;
};

// backward shot from (x0, u0, sigma) to x_target; classify against u_target.
// escape guards fire on u < -1e-12 and u - x > 1e-12 per the sign portrait.
inline shot_class classify_backward(const model_params& p, double x0, double u0,
                                    double sigma, double x_target, double u_target,
                                    double rtol) {
    std::vector<xevent> evs;
    evs.push_back({[](double, double u, double) { return u + 1e-12; }});          // below
    evs.push_back({[](double x, double u, double) { return u - x - 1e-12; }});    // above
    auto tr = integrate_raw(p, {x0, u0, sigma}, x_target, rtol, evs, false);
    if (tr.hit_event)
        return tr.event_which == 0 ? shot_class::below : shot_class::above;
    return tr.end_u > u_target ? shot_class::above : shot_class::below;
}

// generic slope bisection: cls must be monotone above -> below in sigma
// (smaller sigma leaves more of u0 at the far end)
inline double bisect_slope_on(const std::function<shot_class(double)>& cls,
                              double scan_lo, double scan_hi, int nscan,
                              std::optional<double> hint, shoot_diag* diag) {
    double lo, hi; // lo classifies above, hi classifies below
    bool have = false;
    if (hint) {
        double w = 0.05;
        double a = *hint - w, b = *hint + w;
        for (int i = 0; i < 40 && !have; ++i) {
            const bool ca = cls(a) == shot_class::above;
            const bool cb = cls(b) == shot_class::below;
            if (ca && cb) { lo = a; hi = b; have = true; }
            else if (!ca) a -= (w *= 2.0);
            else b += (w *= 2.0);
        }
    }
    if (!have) {
        shot_class prev = cls(scan_lo);
        double sprev = scan_lo;
        for (int i = 1; i <= nscan; ++i) {
            const double s = scan_lo + (scan_hi - scan_lo) * i / nscan;
            const shot_class c = cls(s);
            if (prev == shot_class::above && c == shot_class::below) {
                lo = sprev; hi = s; have = true;
                break;
            }
            prev = c; sprev = s;
        }
    }
    if (!have) {
        std::ostringstream os;
        os << "bisect_slope: no bracketing slope in [" << scan_lo << "," << scan_hi
           << "]; endpoint classes "
           << (cls(scan_lo) == shot_class::above ? "above" : "below") << "/"
           << (cls(scan_hi) == shot_class::above ? "above" : "below");
        throw bracket_error(os.str());
    }
    int nb = 0;
    while (hi - lo > 4e-16 * std::max(1.0, std::abs(lo)) && nb < 90) {
        const double mid = 0.5 * (lo + hi);
        if (cls(mid) == shot_class::above) lo = mid;
        else hi = mid;
        ++nb;
    }
    if (diag) {
        diag->bracket_low = lo;
        diag->bracket_high = hi;
        diag->n_bisections = nb;
    }
    return 0.5 * (lo + hi);
}

// bisect sigma so the backward trace lands on u_target at x_target,
// staying inside the 0 <= u <= x corridor
inline double bisect_slope(const model_params& p, double x0, double u0, double x_target,
                           double u_target, double rtol, std::optional<double> hint,
                           shoot_diag* diag) {
    auto cls = [&](double s) {
        return classify_backward(p, x0, u0, s, x_target, u_target, rtol);
    };
    return bisect_slope_on(cls, -2.0, 4.0, 25, hint, diag);
}

} // namespace detail

// eps-regularized local problem: trace on [eps, x0] with u(eps) = 0, u(x0) = u0,
// inside the trivial envelopes. shot backward from (x0, u0): the boundary-layer
// mode e^{-4ck/sqrt(x)} decays in that direction, so the slope window at x0 is
// resolvable while the equivalent window at eps is far below one ulp.
inline grid_solution solve_local(const model_params& p, double eps, double x0, double u0,
                                 double tol, detail::shoot_diag* diag = nullptr) {
    if (regime(p) != regime_kind::rich)
        throw regime_error("solve_local: local continuum exists only for a+b > 0");
    if (!(eps > 0.0) || !(eps < x0))
        throw argument_error("solve_local: need 0 < eps < x0");
    if (!(u0 >= 0.0) || !(u0 <= x0))
        throw argument_error("solve_local: need u0 in [0, x0]");
    const double rtol = std::min(tol, 1e-9);
    const double sigma =
        detail::bisect_slope(p, x0, u0, eps, 0.0, rtol, std::nullopt, diag);
    auto tr = detail::integrate_raw(p, {x0, u0, sigma}, eps, rtol, {}, true);
    return detail::to_solution(p, std::move(tr), "local_bvp", tol);
}

struct continuation_result {
    grid_solution trace; // the finest (last eps) trace
    std::vector<double> eps_used;
    std::vector<double> sup_diffs; // consecutive sup-norm differences on common domain
};

inline continuation_result continue_to_zero(const model_params& p, double x0, double u0,
                                            const std::vector<double>& eps_seq, double tol) {
    if (regime(p) != regime_kind::rich)
        throw regime_error("continue_to_zero: requires a+b > 0");
    if (eps_seq.empty())
        throw argument_error("continue_to_zero: empty eps sequence");
    for (size_t i = 0; i < eps_seq.size(); ++i) {
        if (eps_seq[i] < 1e-8)
            throw argument_error("continue_to_zero: eps below 1e-8 floor");
        if (i > 0 && !(eps_seq[i] < eps_seq[i - 1]))
            throw argument_error("continue_to_zero: eps sequence must strictly decrease");
    }
    continuation_result res;
    std::optional<grid_solution> prev;
    for (double eps : eps_seq) {
        grid_solution cur = solve_local(p, eps, x0, u0, tol);
        if (prev)
            res.sup_diffs.push_back(sup_diff_on_common(*prev, cur));
        res.eps_used.push_back(eps);
        prev = std::move(cur);
    }
    if (!res.sup_diffs.empty() && !(res.sup_diffs.back() < tol)) {
        std::ostringstream os;
        os << "continue_to_zero: not Cauchy at tol=" << tol << "; diffs";
        for (double d : res.sup_diffs) os << " " << d;
        throw convergence_error(os.str());
    }
    res.trace = std::move(*prev);
    return res;
}

namespace detail {

// forward classification for the global bisection; never trusts a mere
// "reached the end": anchor error is amplified ~X^gamma+, so the close-out
// is asymptotic (b > 0: against c/b; b <= 0: convexity at the far end).
inline shot_class classify_forward(const model_params& p, double x_m, double m,
                                   double sigma, double X_max, double rtol,
                                   std::string* why = nullptr) {
    std::vector<xevent> evs;
    evs.push_back({[](double, double u, double) { return u + 1e-12; }});        // below
    evs.push_back({[](double, double, double du) { return du + 1e-9; }});       // below
    evs.push_back({[](double x, double u, double) { return u - x - 1e-12; }});  // above
    evs.push_back({[](double, double, double du) { return 1.0 + 1e-9 - du; }}); // above
    auto tr = integrate_raw(p, {x_m, m, sigma}, X_max, rtol, evs, false);
    if (tr.hit_event) {
        if (why) *why = tr.event_which <= 1 ? "event_below" : "event_above";
        return tr.event_which <= 1 ? shot_class::below : shot_class::above;
    }
    if (p.b > 0.0) {
        if (why) *why = "asymptote_vs_c_over_b";
        return tr.end_u > p.c / p.b ? shot_class::above : shot_class::below;
    }
    const double dd = forced_ddu(p, tr.end_x, tr.end_u, tr.end_du);
    if (why) *why = "convexity_at_end";
    return dd > 0.0 ? shot_class::above : shot_class::below;
}

} // namespace detail

// the separating solution on [x_s, X_max]: outer bisection on the anchor
// m = u(1), inner backward shot pinning the local-family member through
// (1, m) against the series at x_s, forward leg classified by escape events.
inline shooting_result solve_global(const model_params& p, double x_s = 0.0,
                                    double X_max = 1e4, double tol = 1e-10) {
    const regime_kind rg = regime(p);
    if (rg == regime_kind::no_solution)
        throw regime_error("solve_global: no solution exists for a+b < 0");
    shooting_result out;
    if (rg == regime_kind::linear_exact) {
        // u = x solves the equation exactly; no shooting required
        grid_solution g;
        g.params = p;
        g.method = "global_shoot";
        g.tol = tol;
        const double lo = x_s > 0.0 ? x_s : 1e-6;
        const int npts = 400;
        for (int i = 0; i < npts; ++i) {
            const double x = lo * std::pow(X_max / lo, double(i) / (npts - 1));
            g.xs.push_back(x);
            g.u.push_back(x);
            g.du.push_back(1.0);
            g.ddu.push_back(0.0);
        }
        out.solution = std::move(g);
        out.signs_ok = true;
        out.du_at_xmax = 1.0;
        out.classification_history.push_back("linear_exact_short_circuit");
        return out;
    }
    if (!(X_max > 1.0))
        throw argument_error("solve_global: need X_max > 1");
    const int nser = 3;
    if (x_s <= 0.0) x_s = auto_x_s(p, nser, 1e-10);
    const auto coeffs = coefficients(p, nser);
    const double f_s = eval_partial<double>(coeffs, nser, x_s, 0);
    const double x_m = 1.0;
    const double rtol = std::min(tol, 1e-12);

    // inner: slope of the family member through (x_m, m); bracket errors mean
    // no family member reaches that anchor, which places m above the separator
    std::optional<double> sigma_hint;
    auto family_sigma = [&](double m) -> std::optional<double> {
        try {
            const double s =
                detail::bisect_slope(p, x_m, m, x_s, f_s, rtol, sigma_hint, nullptr);
            return s;
        } catch (const bracket_error&) {
            return std::nullopt;
        }
    };

    double m_lo = 0.0, m_hi = 0.9 * x_m; // below at 0 (dives), above once past the separator
    auto classify_m = [&](double m, std::string* why) -> detail::shot_class {
        auto s = family_sigma(m);
        if (!s) {
            if (why) *why = "no_family_member";
            return detail::shot_class::above;
        }
        sigma_hint = *s;
        return detail::classify_forward(p, x_m, m, *s, X_max, rtol, why);
    };
    {
        std::string why;
        int guard = 0;
        while (classify_m(m_hi, &why) == detail::shot_class::below && ++guard < 20) {
            m_lo = m_hi;
            m_hi = 0.5 * (m_hi + x_m);
            out.classification_history.push_back("raise_hi");
        }
        if (guard >= 20)
            throw bracket_error("solve_global: separator anchor not bracketed below x_m");
    }
    int nb = 0;
    while (m_hi - m_lo > 4e-16 * std::max(1.0, m_hi) && nb < 90) {
        const double mid = 0.5 * (m_lo + m_hi);
        std::string why;
        const auto c = classify_m(mid, &why);
        {
            std::ostringstream os;
            os << "m=" << mid << ": "
               << (c == detail::shot_class::above ? "escape_above" : "escape_below") << " ("
               << why << ")";
            out.classification_history.push_back(os.str());
        }
        if (c == detail::shot_class::above) m_hi = mid;
        else m_lo = mid;
        ++nb;
    }
    const double m_star = 0.5 * (m_lo + m_hi);

    grid_solution g;
    g.params = p;
    g.method = "global_shoot";
    g.tol = tol;
    if (p.b > 0.0) {
        // assemble the returned trace by one backward pass from deep in the tail:
        // forward integration along the separator amplifies local error like
        // X^gamma+, while backward every parasitic mode contracts. the tail
        // constant is pinned against the bisected anchor m*.
        const double gm =
            0.5 * ((1.0 + p.a) - std::sqrt((1.0 + p.a) * (1.0 + p.a) + 4.0 * p.b));
        const double X0 = std::max(1e8, 100.0 * X_max);
        auto tail_cls = [&](double C) {
            const double u0 = p.c / p.b - C * std::pow(X0, gm);
            const double du0 = -C * gm * std::pow(X0, gm - 1.0);
            std::vector<detail::xevent> evs;
            evs.push_back({[](double, double u, double) { return u + 1e-12; }});
            auto tr = detail::integrate_raw(p, {X0, u0, du0}, x_m, rtol, evs, false);
            if (tr.hit_event) return detail::shot_class::below;
            return tr.end_u > m_star ? detail::shot_class::above : detail::shot_class::below;
        };
        double clo = 0.0, chi = 4.0 * p.c / p.b;
        int guard = 0;
        while (tail_cls(chi) == detail::shot_class::above && ++guard < 40) chi *= 2.0;
        if (guard >= 40)
            throw bracket_error("solve_global: tail constant not bracketed");
        for (int i = 0; i < 90 && chi - clo > 4e-16 * chi; ++i) {
            const double mid = 0.5 * (clo + chi);
            if (tail_cls(mid) == detail::shot_class::above) clo = mid;
            else chi = mid;
        }
        const double C = 0.5 * (clo + chi);
        const double u0 = p.c / p.b - C * std::pow(X0, gm);
        const double du0 = -C * gm * std::pow(X0, gm - 1.0);
        auto run_in = detail::integrate_raw(p, {X0, u0, du0}, X_max, rtol, {}, false);
        auto tr = detail::integrate_raw(p, {run_in.end_x, run_in.end_u, run_in.end_du}, x_s,
                                        rtol, {}, true);
        g = detail::to_solution(p, std::move(tr), "global_shoot", tol);
    } else {
        const double sigma_star =
            detail::bisect_slope(p, x_m, m_star, x_s, f_s, rtol, sigma_hint, nullptr);
        auto back = detail::integrate_raw(p, {x_m, m_star, sigma_star}, x_s, rtol, {}, true);
        auto fwd = detail::integrate_raw(p, {x_m, m_star, sigma_star}, X_max, rtol, {}, true);
        for (size_t i = back.xs.size(); i-- > 0;) {
            g.xs.push_back(back.xs[i]);
            g.u.push_back(back.u[i]);
            g.du.push_back(back.du[i]);
        }
        for (size_t i = 1; i < fwd.xs.size(); ++i) {
            g.xs.push_back(fwd.xs[i]);
            g.u.push_back(fwd.u[i]);
            g.du.push_back(fwd.du[i]);
        }
        g.ddu.resize(g.xs.size());
        for (size_t i = 0; i < g.xs.size(); ++i)
            g.ddu[i] = forced_ddu(p, g.xs[i], g.u[i], g.du[i]);
    }

    out.bracket_low = m_lo;
    out.bracket_high = m_hi;
    out.n_bisections = nb;
    out.du_at_xmax = g.du.back();
    out.signs_ok = true;
    for (size_t i = 0; i < g.size(); ++i) {
        const double x = g.xs[i];
        const double d3 = forced_dddu(p, x, g.u[i], g.du[i], g.ddu[i]);
        if (!(g.u[i] > 0.0) || !(g.u[i] < x) || !(g.du[i] > 0.0) || !(g.ddu[i] < 0.0) ||
            !(d3 > 0.0)) {
            out.signs_ok = false;
            break;
        }
    }
    out.solution = std::move(g);
    return out;
}

// independent separator construction for b > 0, used as a cross-check oracle:
// u -> c/b - C x^{gamma_-} with C free; every forward-growing mode dies in the
// backward direction, so bisecting C against the series at x_s is enough.
inline grid_solution solve_global_tail(const model_params& p, double x_s = 0.0,
                                       double X_max = 1e4, double tol = 1e-10) {
    if (regime(p) != regime_kind::rich || !(p.b > 0.0))
        throw argument_error("solve_global_tail: needs a+b > 0 and b > 0");
    const int nser = 3;
    if (x_s <= 0.0) x_s = auto_x_s(p, nser, 1e-10);
    const auto coeffs = coefficients(p, nser);
    const double f_s = eval_partial<double>(coeffs, nser, x_s, 0);
    const double gm = 0.5 * ((1.0 + p.a) - std::sqrt((1.0 + p.a) * (1.0 + p.a) + 4.0 * p.b));
    const double X0 = std::max(1e8, 100.0 * X_max);
    const double rtol = std::min(tol, 1e-12);
    auto cls = [&](double C) {
        const double u0 = p.c / p.b - C * std::pow(X0, gm);
        const double du0 = -C * gm * std::pow(X0, gm - 1.0);
        std::vector<detail::xevent> evs;
        evs.push_back({[](double, double u, double) { return u + 1e-12; }});
        auto tr = detail::integrate_raw(p, {X0, u0, du0}, x_s, rtol, evs, false);
        if (tr.hit_event) return detail::shot_class::below;
        return tr.end_u > f_s ? detail::shot_class::above : detail::shot_class::below;
    };
    double lo = 0.0, hi = 4.0 * p.c / p.b; // C = 0 stays at the stationary level
    int guard = 0;
    while (cls(hi) == detail::shot_class::above && ++guard < 40) hi *= 2.0;
    if (guard >= 40)
        throw bracket_error("solve_global_tail: tail constant not bracketed");
    for (int i = 0; i < 90 && hi - lo > 4e-16 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cls(mid) == detail::shot_class::above) lo = mid;
        else hi = mid;
    }
    const double C = 0.5 * (lo + hi);
    const double u0 = p.c / p.b - C * std::pow(X0, gm);
    const double du0 = -C * gm * std::pow(X0, gm - 1.0);
    auto tr = detail::integrate_raw(p, {X0, u0, du0}, x_s, rtol, {}, true);
    auto g = detail::to_solution(p, std::move(tr), "global_shoot", tol);
    // keep [x_s, X_max]; the start-up stretch above X_max is scaffolding
    size_t cut = g.size();
    while (cut > 0 && g.xs[cut - 1] > X_max) --cut;
    g.xs.resize(cut); g.u.resize(cut); g.du.resize(cut); g.ddu.resize(cut);
    return g;
}

struct probe_point {
    double eps = 0.0;
    double du_eps = 0.0;
    bool ok = false;
};

struct probe_report {
    std::vector<probe_point> points;
    double delta = 0.0;      // -(a+b)/2
    double delta_hat = 0.0;  // fitted slope of u'(eps) against ln(xbar/eps)
    double intercept = 0.0;
    bool pass = false;
    double xbar = 0.0, ubar = 0.0;
};

// nonexistence witness for a+b < 0: the regularized problems exist but their
// initial slopes blow up logarithmically, so no C^1 solution through 0 survives
inline probe_report nonexistence_probe(const model_params& p, double xbar,
                                       const std::vector<double>& eps_seq,
                                       double tol = 1e-10) {
    if (!(p.a + p.b < 0.0))
        throw argument_error("nonexistence_probe: requires a+b < 0");
    if (!(xbar > 0.0) || eps_seq.empty())
        throw argument_error("nonexistence_probe: need xbar > 0 and a nonempty eps grid");
    probe_report rep;
    rep.xbar = xbar;
    rep.ubar = 0.05 * xbar; // small positive anchor leaves room to return to zero at eps
    rep.delta = -(p.a + p.b) / 2.0;
    const double rtol = std::min(tol, 1e-10);
    // the regularized slopes exceed 1 near eps by design, so the u <= x guard
    // of the rich-regime shots must not apply here; only the u >= 0 side and a
    // large-u cutoff classify. step underflow past the cutoff counts as above.
    for (double eps : eps_seq) {
        probe_point pt;
        pt.eps = eps;
        auto cls = [&](double s) -> detail::shot_class {
            std::vector<detail::xevent> evs;
            evs.push_back({[](double, double u, double) { return u + 1e-12; }});   // below
            evs.push_back({[](double, double u, double) { return 1e6 - u; }});     // above
            try {
                auto tr = detail::integrate_raw(p, {xbar, rep.ubar, s}, eps, rtol, evs, false);
                if (tr.hit_event)
                    return tr.event_which == 0 ? detail::shot_class::below
                                               : detail::shot_class::above;
                return tr.end_u > 0.0 ? detail::shot_class::above : detail::shot_class::below;
            } catch (const blow_up_error&) {
                return detail::shot_class::above;
            }
        };
        try {
            const double sigma = detail::bisect_slope_on(cls, -8.0, 8.0, 64, std::nullopt, nullptr);
            auto tr = detail::integrate_raw(p, {xbar, rep.ubar, sigma}, eps, rtol, {}, false);
            pt.du_eps = tr.end_du;
            pt.ok = std::isfinite(pt.du_eps) && std::abs(tr.end_x - eps) < 0.5 * eps;
        } catch (const error&) {
            pt.ok = false;
        }
        rep.points.push_back(pt);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (const auto& pt : rep.points) {
        if (!pt.ok) continue;
        const double lx = std::log(xbar / pt.eps);
        sx += lx; sy += pt.du_eps; sxx += lx * lx; sxy += lx * pt.du_eps;
        n += 1.0;
    }
    if (n >= 3.0) {
        rep.delta_hat = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        rep.intercept = (sy - rep.delta_hat * sx) / n;
        rep.pass = rep.delta_hat >= 0.9 * rep.delta;
    }
    return rep;
}

} // namespace liqode
