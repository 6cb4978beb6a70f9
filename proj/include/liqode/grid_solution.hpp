#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "liqode/core.hpp"
#include "liqode/errors.hpp"

namespace liqode {

// a computed trace on a strictly increasing grid; ddu is always the value
// forced by the equation from (x, u, du), so the residual invariant holds
// by construction and ddu carries no independent discretization error.
struct grid_solution {
    std::vector<double> xs;
    std::vector<double> u;
    std::vector<double> du;
    std::vector<double> ddu;
    model_params params;
    std::string method; // local_bvp | global_shoot | raw_ivp
    double tol = 0.0;

    double x_min() const { return xs.front(); }
    double x_max() const { return xs.back(); }
    size_t size() const { return xs.size(); }

    bool contains(double x) const { return x >= xs.front() && x <= xs.back(); }

    // cubic Hermite for u, linear-in-segment for du's own Hermite pair;
    // derivatives at the nodes are exact trace values
    double eval_u(double x) const { return eval(x, u, du); }
    double eval_du(double x) const { return eval(x, du, ddu); }
    double eval_ddu(double x) const {
        const double xu = eval_u(x), xdu = eval_du(x);
        return forced_ddu(params, x, xu, xdu);
    }

private:
    double eval(double x, const std::vector<double>& f, const std::vector<double>& df) const {
        if (!contains(x))
            throw domain_error("grid_solution: x outside trace domain");
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        size_t i = (it == xs.begin()) ? 0 : static_cast<size_t>(it - xs.begin()) - 1;
        if (i + 1 >= xs.size()) i = xs.size() - 2;
        const double h = xs[i + 1] - xs[i];
        const double s = (x - xs[i]) / h;
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * f[i] + (s3 - 2 * s2 + s) * h * df[i] +
               (-2 * s3 + 3 * s2) * f[i + 1] + (s3 - s2) * h * df[i + 1];
    }
};

// residual invariant: |E(x,u,du,ddu)| <= tol * (1 + x^2 |ddu|) at every node
inline bool check_residual_invariant(const grid_solution& g, double tol) {
    for (size_t i = 0; i < g.size(); ++i) {
        const double r = residual(g.params, g.xs[i], g.u[i], g.du[i], g.ddu[i]);
        if (std::abs(r) > tol * (1.0 + g.xs[i] * g.xs[i] * std::abs(g.ddu[i])))
            return false;
    }
    return true;
}

inline double sup_diff_on_common(const grid_solution& f, const grid_solution& g) {
    const double lo = std::max(f.x_min(), g.x_min());
    const double hi = std::min(f.x_max(), g.x_max());
    if (!(hi > lo))
        throw domain_error("sup_diff_on_common: traces do not overlap");
    double sup = 0.0;
    for (size_t i = 0; i < f.size(); ++i)
        if (f.xs[i] >= lo && f.xs[i] <= hi)
            sup = std::max(sup, std::abs(f.u[i] - g.eval_u(f.xs[i])));
    for (size_t i = 0; i < g.size(); ++i)
        if (g.xs[i] >= lo && g.xs[i] <= hi)
            sup = std::max(sup, std::abs(g.u[i] - f.eval_u(g.xs[i])));
    return sup;
}

} // namespace liqode
