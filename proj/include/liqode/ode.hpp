#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "liqode/errors.hpp"

namespace liqode {

using state2 = std::array<double, 2>;

struct step_record {
    double t;
    state2 y;
    state2 f; // derivative at t, for Hermite evaluation between nodes
};

struct event_hit {
    bool fired = false;
    int which = -1;
    double t = 0.0;
    state2 y{};
};

struct ivp_result {
    std::vector<step_record> steps; // every accepted step, endpoints included
    event_hit event;                // first event, if any fired
    bool reached_end = false;
};

// event g(t, y): integration stops when g crosses zero from the sign at start
using event_fn = std::function<double(double, const state2&)>;

namespace detail {

inline state2 hermite2(double t, const step_record& a, const step_record& b) {
    const double h = b.t - a.t;
    const double s = (t - a.t) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    state2 out;
    for (int i = 0; i < 2; ++i)
        out[i] = h00 * a.y[i] + h10 * h * a.f[i] + h01 * b.y[i] + h11 * h * b.f[i];
    return out;
}

} // namespace detail

// Dormand-Prince 5(4) with FSAL, PI step control and event localization by
// bisection on the Hermite interpolant. Pure double arithmetic, no state
// shared between calls; identical inputs give identical traces.
template <typename RHS>
ivp_result integrate_dp45(RHS&& rhs, double t0, double t1, state2 y0, double rtol,
                          double atol, const std::vector<event_fn>& events = {},
                          double max_step = 0.0) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    if (!(span > 0.0)) throw argument_error("integrate_dp45: empty span");
    double h = dir * std::min(span / 100.0, max_step > 0.0 ? max_step : span / 100.0);
    if (h == 0.0) h = dir * span * 1e-3;

    ivp_result res;
    double t = t0;
    state2 y = y0;
    state2 k1;
    {
        k1 = rhs(t, y);
        if (!std::isfinite(k1[0]) || !std::isfinite(k1[1]))
            throw numeric_error("integrate_dp45: rhs not finite at start");
    }
    res.steps.push_back({t, y, k1});
    std::vector<double> ev0(events.size());
    for (size_t i = 0; i < events.size(); ++i) ev0[i] = events[i](t, y);

    double err_prev = 1.0;
    const int max_steps = 80'000'000;
    for (int n = 0; n < max_steps; ++n) {
        if (dir * (t - t1) >= 0.0) {
            res.reached_end = true;
            return res;
        }
        if (dir * (t + h - t1) > 0.0) h = t1 - t;
        if (max_step > 0.0 && std::abs(h) > max_step) h = dir * max_step;
        if (std::abs(h) < std::abs(t) * 1e-15 + 1e-300)
            throw blow_up_error("integrate_dp45: step size underflow", t);

        const state2 k2v = rhs(t + c2 * h, {y[0] + h * a21 * k1[0], y[1] + h * a21 * k1[1]});
        const state2 k3v = rhs(t + c3 * h, {y[0] + h * (a31 * k1[0] + a32 * k2v[0]),
                                            y[1] + h * (a31 * k1[1] + a32 * k2v[1])});
        const state2 k4v = rhs(t + c4 * h, {y[0] + h * (a41 * k1[0] + a42 * k2v[0] + a43 * k3v[0]),
                                            y[1] + h * (a41 * k1[1] + a42 * k2v[1] + a43 * k3v[1])});
        const state2 k5v = rhs(t + c5 * h,
                               {y[0] + h * (a51 * k1[0] + a52 * k2v[0] + a53 * k3v[0] + a54 * k4v[0]),
                                y[1] + h * (a51 * k1[1] + a52 * k2v[1] + a53 * k3v[1] + a54 * k4v[1])});
        const state2 k6v = rhs(t + h,
                               {y[0] + h * (a61 * k1[0] + a62 * k2v[0] + a63 * k3v[0] + a64 * k4v[0] + a65 * k5v[0]),
                                y[1] + h * (a61 * k1[1] + a62 * k2v[1] + a63 * k3v[1] + a64 * k4v[1] + a65 * k5v[1])});
        state2 ynew;
        for (int i = 0; i < 2; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3v[i] + b4 * k4v[i] + b5 * k5v[i] + b6 * k6v[i]);
        const state2 k7v = rhs(t + h, ynew);

        bool finite = true;
        for (int i = 0; i < 2; ++i)
            if (!std::isfinite(ynew[i]) || !std::isfinite(k7v[i])) finite = false;
        double err = 0.0;
        if (finite) {
            for (int i = 0; i < 2; ++i) {
                const double ei = h * (e1 * k1[i] + e3 * k3v[i] + e4 * k4v[i] + e5 * k5v[i] +
                                       e6 * k6v[i] + e7 * k7v[i]);
                const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                err = std::max(err, std::abs(ei) / sc);
            }
        } else {
            err = 1e10;
        }

        if (err <= 1.0) {
            const step_record prev = res.steps.back();
            t += h;
            y = ynew;
            k1 = k7v; // FSAL
            res.steps.push_back({t, y, k1});
            // events: sign change against the value at the start of integration
            for (size_t i = 0; i < events.size(); ++i) {
                const double g = events[i](t, y);
                const bool sign0 = std::signbit(ev0[i]) && ev0[i] != 0.0;
                if (g == 0.0 || std::signbit(g) == sign0)
                    continue;
                // bisect the crossing on the interpolant
                double lo = prev.t, hi = t;
                const step_record& la = prev;
                const step_record lb = res.steps.back();
                for (int it = 0; it < 80 && (hi - lo) * dir > 1e-14 * std::abs(hi) + 1e-300; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const state2 ym = detail::hermite2(mid, la, lb);
                    const double gm = events[i](mid, ym);
                    if (gm != 0.0 && std::signbit(gm) == sign0)
                        lo = mid;
                    else
                        hi = mid;
                }
                res.event.fired = true;
                res.event.which = static_cast<int>(i);
                res.event.t = hi;
                res.event.y = detail::hermite2(hi, la, lb);
                // truncate the trace at the event
                res.steps.back() = {res.event.t, res.event.y, rhs(res.event.t, res.event.y)};
                return res;
            }
            const double fac = 0.9 * std::pow(err > 1e-30 ? err : 1e-30, -0.7 / 5.0) *
                               std::pow(err_prev, 0.4 / 5.0);
            err_prev = err > 1e-30 ? err : 1e-30;
            h *= std::min(5.0, std::max(0.2, fac));
        } else {
            h *= std::min(1.0, std::max(0.1, 0.9 * std::pow(err, -1.0 / 5.0)));
        }
    }
    throw numeric_error("integrate_dp45: step budget exhausted");
}

} // namespace liqode
