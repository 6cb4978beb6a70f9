#pragma once

#include <array>
#include <cmath>
#include <string>

#include "liqode/errors.hpp"

namespace liqode {

// x^2 u'' = a x u' + b u - c (u'-1)^2 on x > 0, with u(0) = 0.
struct model_params {
    double a = 0.0;
    double b = 0.0;
    double c = 1.0;

    model_params() = default;
    model_params(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
        if (!(c > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
            throw argument_error("model_params: need finite a, b and c > 0");
    }
};

enum class regime_kind { no_solution, linear_exact, rich };

// the trichotomy is exact in a+b; no tolerance here by design
inline regime_kind regime(const model_params& p) {
    const double s = p.a + p.b;
    if (s < 0.0) return regime_kind::no_solution;
    if (s == 0.0) return regime_kind::linear_exact;
    return regime_kind::rich;
}

inline std::string regime_name(regime_kind r) {
    switch (r) {
        case regime_kind::no_solution: return "no_solution";
        case regime_kind::linear_exact: return "linear_exact";
        default: return "rich";
    }
}

// boundary-layer coefficient: u' ~ 1 - k sqrt(x) near 0
inline double layer_k(const model_params& p) {
    const double s = p.a + p.b;
    if (s < 0.0)
        throw regime_error("layer_k: undefined for a+b < 0");
    return std::sqrt(s / p.c);
}

// E u = -x^2 u'' + a x u' + b u - c (u'-1)^2; zero exactly on solutions
template <typename T>
T residual(const model_params& p, const T& x, const T& u, const T& du, const T& ddu) {
    const T one(1.0);
    return -(x * x) * ddu + T(p.a) * x * du + T(p.b) * u - T(p.c) * (du - one) * (du - one);
}

// the four addends of E, for term-by-term assembly checks
template <typename T>
std::array<T, 4> residual_terms(const model_params& p, const T& x, const T& u,
                                const T& du, const T& ddu) {
    const T one(1.0);
    return {-(x * x) * ddu, T(p.a) * x * du, T(p.b) * u,
            -T(p.c) * (du - one) * (du - one)};
}

// u'' forced by the equation from (x, u, u')
template <typename T>
T forced_ddu(const model_params& p, const T& x, const T& u, const T& du) {
    const T one(1.0);
    return (T(p.a) * x * du + T(p.b) * u - T(p.c) * (du - one) * (du - one)) / (x * x);
}

// u''' from the differentiated equation; never finite-difference the trace
template <typename T>
T forced_dddu(const model_params& p, const T& x, const T& /*u*/, const T& du, const T& ddu) {
    const T one(1.0);
    return ((T(p.a) - T(2.0)) * x * ddu + T(p.a + p.b) * du
            - T(2.0 * p.c) * (du - one) * ddu) / (x * x);
}

// first-order form in x: state (u, v) with v = u' - 1, so v stays O(sqrt(x)) near 0
inline std::array<double, 2> rhs_x(const model_params& p, double x,
                                   const std::array<double, 2>& y) {
    const double u = y[0], v = y[1];
    return {v + 1.0, (p.a * x * (v + 1.0) + p.b * u - p.c * v * v) / (x * x)};
}

// first-order form in t = ln x: state (u, w) with w = du/dt = x u'
inline std::array<double, 2> rhs_t(const model_params& p, double t,
                                   const std::array<double, 2>& y) {
    const double u = y[0], w = y[1];
    const double q = std::exp(-t) * w - 1.0;
    return {w, (p.a + 1.0) * w + p.b * u - p.c * q * q};
}

} // namespace liqode
