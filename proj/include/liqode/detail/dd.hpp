#pragma once

#include <cmath>
#include <limits>

namespace liqode::detail {

// double-double value hi + lo with |lo| <= ulp(hi)/2; ~31 significant digits.
// used where a residual sits many orders below the terms that cancel to form it.
struct dd {
    double hi = 0.0;
    double lo = 0.0;

    dd() = default;
    dd(double h) : hi(h), lo(0.0) {}
    dd(double h, double l) : hi(h), lo(l) {}

    explicit operator double() const { return hi + lo; }
};

inline dd quick_two_sum(double a, double b) {
    const double s = a + b;
    return {s, b - (s - a)};
}

inline dd two_sum(double a, double b) {
    const double s = a + b;
    const double v = s - a;
    return {s, (a - (s - v)) + (b - v)};
}

inline dd two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline dd operator+(const dd& a, const dd& b) {
    dd s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline dd operator-(const dd& a) { return {-a.hi, -a.lo}; }
inline dd operator-(const dd& a, const dd& b) { return a + (-b); }

inline dd operator*(const dd& a, const dd& b) {
    dd p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline dd operator/(const dd& a, const dd& b) {
    const double q1 = a.hi / b.hi;
    dd r = a - dd(q1) * b;
    const double q2 = r.hi / b.hi;
    r = r - dd(q2) * b;
    const double q3 = r.hi / b.hi;
    dd q = quick_two_sum(q1, q2);
    return q + dd(q3);
}

inline dd& operator+=(dd& a, const dd& b) { a = a + b; return a; }
inline dd& operator-=(dd& a, const dd& b) { a = a - b; return a; }
inline dd& operator*=(dd& a, const dd& b) { a = a * b; return a; }

inline bool operator<(const dd& a, const dd& b) {
    return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}
inline bool operator>(const dd& a, const dd& b) { return b < a; }

inline dd abs(const dd& a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }

inline dd sqrt(const dd& a) {
    if (a.hi == 0.0) return {0.0, 0.0};
    const double s0 = std::sqrt(a.hi);
    // one Newton step in dd doubles the seed's 16 digits
    dd s(s0);
    s = dd(0.5) * (s + a / s);
    return s;
}

inline dd ldexp(const dd& a, int n) {
    return {std::ldexp(a.hi, n), std::ldexp(a.lo, n)};
}

inline dd exp(const dd& a) {
    // range-reduce against ln 2, Taylor on |r| <= ln2/2, rescale
    static const dd LN2(6.93147180559945286e-01, 2.31904681384629956e-17);
    if (a.hi > 709.0) return {std::numeric_limits<double>::infinity(), 0.0};
    if (a.hi < -740.0) return {0.0, 0.0};
    const int n = static_cast<int>(std::lround(a.hi / LN2.hi));
    const dd r = a - dd(static_cast<double>(n)) * LN2;
    dd term(1.0), sum(1.0);
    for (int i = 1; i <= 24; ++i) {
        term = term * r / dd(static_cast<double>(i));
        sum += term;
        if (std::abs(term.hi) < 1e-35 * std::abs(sum.hi)) break;
    }
    return ldexp(sum, n);
}

inline dd log(const dd& a) {
    // Newton from the double seed: y += a e^{-y} - 1, twice
    dd y(std::log(a.hi));
    for (int i = 0; i < 2; ++i)
        y = y + a * exp(-y) - dd(1.0);
    return y;
}

inline dd pow(const dd& a, const dd& e) { return exp(e * log(a)); }
inline dd pow(const dd& a, double e) { return exp(dd(e) * log(a)); }

inline double to_double(const dd& a) { return a.hi + a.lo; }

} // namespace liqode::detail
