#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "liqode/core.hpp"
#include "liqode/detail/dd.hpp"
#include "liqode/errors.hpp"

namespace liqode {

// k_0 .. k_n of the formal expansion u = sum k_i x^{1+i/2}
struct series_coefficients {
    model_params params;
    std::vector<double> ks;
    int n = 0;
};

namespace detail {

// Neumaier compensated sum; the recursion convolutions alternate in sign
struct comp_sum {
    double s = 0.0, comp = 0.0;
    void add(double v) {
        const double t = s + v;
        if (std::abs(s) >= std::abs(v))
            comp += (s - t) + v;
        else
            comp += (v - t) + s;
        s = t;
    }
    double value() const { return s + comp; }
};

} // namespace detail

inline constexpr int series_n_cap = 40;

inline series_coefficients coefficients(const model_params& p, int n) {
    if (regime(p) != regime_kind::rich)
        throw regime_error("coefficients: series defined only for a+b > 0");
    if (n < 1)
        throw argument_error("coefficients: need n >= 1");
    if (n > series_n_cap)
        throw argument_error("coefficients: n exceeds cap 40; growth overflows double");
    const double a = p.a, b = p.b, c = p.c;
    const double k1 = -(2.0 / 3.0) * layer_k(p);
    std::vector<double> k(static_cast<size_t>(n) + 1, 0.0);
    k[0] = 1.0;
    if (n >= 1) k[1] = k1;
    for (int m = 2; m <= n; ++m) {
        if (m % 2 == 0) {
            const int i = m / 2;
            detail::comp_sum s;
            s.add(2.0 * (k[m - 1] / c) * (a + b + (i - 0.5) * a - (double(i) * i - 0.25)));
            for (int j = 1; j <= i - 1; ++j)
                s.add(-double(3 + j) * double(2 + 2 * i - j) * k[j + 1] * k[2 * i - j]);
            k[m] = s.value() / (6.0 * (i + 1) * k1);
        } else {
            const int i = (m - 1) / 2;
            detail::comp_sum s;
            s.add(2.0 * (k[m - 1] / c) * (a + b + i * a - double(i) * (1 + i)));
            s.add(-0.5 * double(3 + i) * double(3 + i) * k[i + 1] * k[i + 1]);
            for (int j = 1; j <= i - 1; ++j)
                s.add(-double(3 + j) * double(3 + 2 * i - j) * k[j + 1] * k[2 * i - j + 1]);
            k[m] = s.value() / (3.0 * (2 * i + 3) * k1);
        }
    }
    return {p, std::move(k), n};
}

// scalar-extraction shim so the guards below work for double, dd and wider types
inline double to_plain(double x) { return x; }
inline double to_plain(const detail::dd& x) { return x.hi; }
template <typename T>
double to_plain(const T& x) { return static_cast<double>(x); }

// f_m, f_m' or f_m'' by termwise differentiation; powers built from s = sqrt(x)
template <typename T>
T eval_partial(const series_coefficients& coeffs, int m, const T& x, int deriv = 0) {
    if (m < 1 || m > coeffs.n)
        throw argument_error("eval_partial: need 1 <= m <= n");
    if (deriv < 0 || deriv > 2)
        throw argument_error("eval_partial: deriv must be 0, 1 or 2");
    if (!(to_plain(x) > 0.0))
        throw domain_error("eval_partial: need x > 0");
    using std::sqrt;
    const T s = sqrt(x);
    T acc(0.0);
    if (deriv == 0) {
        T sp(1.0); // s^i
        for (int i = 0; i <= m; ++i) {
            acc += T(coeffs.ks[static_cast<size_t>(i)]) * x * sp;
            sp *= s;
        }
    } else if (deriv == 1) {
        T sp(1.0);
        for (int i = 0; i <= m; ++i) {
            acc += T(coeffs.ks[static_cast<size_t>(i)] * (1.0 + 0.5 * i)) * sp;
            sp *= s;
        }
    } else {
        T sp = T(1.0) / s; // s^{i-2}, from i = 1
        for (int i = 1; i <= m; ++i) {
            acc += T(coeffs.ks[static_cast<size_t>(i)] * (1.0 + 0.5 * i) * (0.5 * i)) * sp;
            sp *= s;
        }
    }
    return acc;
}

struct order_report {
    std::vector<double> xs;
    std::vector<double> ratios; // |E f_m(x)| / x^{(m+2)/2}
    double sup = 0.0;
    bool bounded = false;
};

// certificate that E f_m = O(x^{(m+2)/2}): the ratio must not grow as x -> 0.
// evaluated in double-double; in plain double the residual drowns in rounding
// noise of the cancelling O(x) terms once x^{m/2} < 1e-16.
inline order_report residual_order(const series_coefficients& coeffs, int m,
                                   const std::vector<double>& xs) {
    if (xs.empty())
        throw argument_error("residual_order: empty grid");
    using detail::dd;
    order_report rep;
    rep.xs = xs;
    for (double xv : xs) {
        const dd x(xv);
        const dd u = eval_partial<dd>(coeffs, m, x, 0);
        const dd du = eval_partial<dd>(coeffs, m, x, 1);
        const dd ddu = eval_partial<dd>(coeffs, m, x, 2);
        const dd r = residual<dd>(coeffs.params, x, u, du, ddu);
        dd sp(1.0);
        const dd s = detail::sqrt(x);
        for (int i = 0; i < m + 2; ++i) sp *= s;
        rep.ratios.push_back(std::abs(to_double(detail::abs(r) / sp)));
    }
    for (double r : rep.ratios) rep.sup = std::max(rep.sup, r);
    // grid is descending in x; bounded = the small-x tail does not outgrow the head
    double head = 0.0;
    const size_t half = rep.ratios.size() / 2;
    for (size_t i = 0; i <= half; ++i) head = std::max(head, rep.ratios[i]);
    rep.bounded = rep.ratios.back() <= 8.0 * head + 1e-300;
    return rep;
}

struct divergence_info {
    std::vector<double> ratios;        // k_{i+1}/k_i for i = 2 .. n-1 (index aligned below)
    std::vector<double> easy_bound;    // -2(i-1)/(3 k_1 c)
    int first_ratio_index = 2;
    bool all_positive = false;         // k_2 .. k_n > 0
    bool easy_bound_holds_from_10 = false;
    double linear_slope = 0.0;         // LS slope of ratio vs i over the back half
    bool zero_radius = false;          // ratios grow without bound
    bool in_proven_window = false;     // a < 3/2 and b in (-a, 3/4 - 3a/2]
};

inline divergence_info divergence_report(const series_coefficients& coeffs) {
    if (coeffs.n < 5)
        throw argument_error("divergence_report: need n >= 5");
    const auto& k = coeffs.ks;
    const model_params& p = coeffs.params;
    divergence_info d;
    d.all_positive = true;
    for (int i = 2; i <= coeffs.n; ++i)
        if (!(k[static_cast<size_t>(i)] > 0.0)) d.all_positive = false;
    for (int i = 2; i + 1 <= coeffs.n; ++i) {
        d.ratios.push_back(k[static_cast<size_t>(i) + 1] / k[static_cast<size_t>(i)]);
        d.easy_bound.push_back(-2.0 * (i - 1) / (3.0 * k[1] * p.c));
    }
    d.easy_bound_holds_from_10 = true;
    for (size_t idx = 0; idx < d.ratios.size(); ++idx) {
        const int i = d.first_ratio_index + static_cast<int>(idx);
        if (i >= 10 && !(d.ratios[idx] >= d.easy_bound[idx]))
            d.easy_bound_holds_from_10 = false;
    }
    // slope of ratio vs i over the back half: linear growth of successive ratios
    const size_t nr = d.ratios.size();
    if (nr >= 4) {
        size_t lo = nr / 2;
        double si = 0, sr = 0, sii = 0, sir = 0;
        const double cnt = double(nr - lo);
        for (size_t idx = lo; idx < nr; ++idx) {
            const double iv = double(d.first_ratio_index + static_cast<int>(idx));
            si += iv; sr += d.ratios[idx]; sii += iv * iv; sir += iv * d.ratios[idx];
        }
        d.linear_slope = (cnt * sir - si * sr) / (cnt * sii - si * si);
    }
    if (nr >= 4)
        d.zero_radius = d.ratios.back() > 2.0 * std::abs(d.ratios[nr / 2]) &&
                        std::abs(d.ratios.back()) > 1.0;
    d.in_proven_window = p.a < 1.5 && p.b > -p.a && p.b <= 0.75 - 1.5 * p.a;
    return d;
}

} // namespace liqode
