#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "liqode/core.hpp"
#include "liqode/errors.hpp"
#include "liqode/grid_solution.hpp"
#include "liqode/series.hpp"

namespace liqode {

struct market_params {
    double lambda = 0.0; // price drift per unit time
    double sigma = 0.0;  // volatility per sqrt(time)
    double rstar = 0.0;  // inventory growth rate
    double rho = 0.0;    // discount rate
    double eta = 0.0;    // price impact, price per unit rate

    market_params() = default;
    market_params(double lambda_, double sigma_, double rstar_, double rho_, double eta_)
        : lambda(lambda_), sigma(sigma_), rstar(rstar_), rho(rho_), eta(eta_) {
        if (!(sigma > 0.0) || !(eta > 0.0) || !(rho > 0.0) || !std::isfinite(lambda) ||
            !std::isfinite(rstar))
            throw argument_error("market_params: need sigma > 0, eta > 0, rho > 0");
    }
};

// reduction to the one-dimensional problem; eta cancels out of the coefficients
inline model_params map_market(const market_params& m) {
    const double s2 = m.sigma * m.sigma;
    return model_params(2.0 * (s2 + m.lambda - m.rstar) / s2,
                        2.0 * (m.rho - s2 - 2.0 * m.lambda) / s2, 1.0 / (2.0 * s2));
}

// w(y, z) = (y^2 / eta) u(eta z / y)
inline double value(const grid_solution& u_sol, const market_params& m, double y, double z) {
    if (!(y > 0.0) || !(z >= 0.0))
        throw argument_error("value: need y > 0, z >= 0");
    if (z == 0.0) return 0.0;
    const double x = m.eta * z / y;
    if (!u_sol.contains(x))
        throw domain_error("value: scaled point outside the solved range");
    return (y * y / m.eta) * u_sol.eval_u(x);
}

// f* = (y - w_z) / (2 eta) = y (1 - u'(x)) / (2 eta)
inline double policy(const grid_solution& u_sol, const market_params& m, double y, double z) {
    if (!(y > 0.0) || !(z > 0.0))
        throw argument_error("policy: need y > 0, z > 0");
    const double x = m.eta * z / y;
    if (!u_sol.contains(x))
        throw domain_error("policy: scaled point outside the solved range");
    return y * (1.0 - u_sol.eval_du(x)) / (2.0 * m.eta);
}

// sup over points of the HJB residual
//   1/2 y^2 s^2 w_yy + lambda y w_y + rstar z w_z - rho w + (y - w_z)^2 / (4 eta)
// with the partials of the scaling written through u, u', u''
inline double pde_residual(const grid_solution& u_sol, const market_params& m,
                           const std::vector<std::pair<double, double>>& points) {
    double sup = 0.0;
    for (const auto& [y, z] : points) {
        if (!(y > 0.0) || !(z > 0.0))
            throw argument_error("pde_residual: need y > 0, z > 0");
        const double x = m.eta * z / y;
        if (!u_sol.contains(x))
            throw domain_error("pde_residual: scaled point outside the solved range");
        const double u = u_sol.eval_u(x);
        const double du = u_sol.eval_du(x);
        const double ddu = u_sol.eval_ddu(x);
        const double w = (y * y / m.eta) * u;
        const double wy = (2.0 * y / m.eta) * u - z * du;
        const double wz = y * du;
        const double wyy = (2.0 / m.eta) * u - 2.0 * z * du / y + m.eta * z * z * ddu / (y * y);
        const double r = 0.5 * y * y * m.sigma * m.sigma * wyy + m.lambda * y * wy +
                         m.rstar * z * wz - m.rho * w +
                         (y - wz) * (y - wz) / (4.0 * m.eta);
        sup = std::max(sup, std::abs(r));
    }
    return sup;
}

struct mc_config {
    long n_paths = 100000; // total paths; rounded up to a whole number of antithetic pairs
    double dt = 1e-3;
    double horizon = 200.0;
    std::uint64_t seed = 1;
    int threads = 0; // 0 = hardware concurrency
};

struct mc_estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long n_paths = 0;
    double dt = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    double tail_bound = 0.0;   // mean of e^{-rho T} y_T z_T over truncated paths
    double mean_exit_time = 0.0;
    long n_truncated = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// sell-rate policy extended beyond the trace: the two-term layer expansion
// below the seeded end, the flat tail above the far end
struct extended_policy {
    const grid_solution* sol;
    double eta;
    double k1, k2;
    double du_lo, du_hi;

    explicit extended_policy(const grid_solution& s, const market_params& m)
        : sol(&s), eta(m.eta) {
        const model_params& p = s.params;
        const double k = layer_k(p);
        k1 = -(2.0 / 3.0) * k;
        k2 = (p.a + p.b + 0.5 * p.a - 0.75) / (6.0 * p.c);
        du_lo = s.du.front();
        du_hi = s.du.back();
    }

    double du_at(double x) const {
        if (x < sol->x_min())
            return 1.0 + 1.5 * k1 * std::sqrt(x) + 2.0 * k2 * x;
        if (x > sol->x_max()) return du_hi;
        return sol->eval_du(x);
    }

    double operator()(double y, double z) const {
        const double x = eta * z / y;
        const double f = y * (1.0 - du_at(x)) / (2.0 * eta);
        return std::max(f, 0.0);
    }
};

struct pair_outcome {
    double mean_revenue = 0.0; // average of the antithetic pair
    double tail = 0.0;
    double exit_time = 0.0;
    int truncated = 0;
};

template <class Policy>
pair_outcome run_pair(const market_params& m, double y0, double z0, const mc_config& cfg,
                      const Policy& pol, std::uint64_t stream) {
    std::mt19937_64 gen(stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    const long nsteps = static_cast<long>(std::ceil(cfg.horizon / cfg.dt));
    const double sqdt = std::sqrt(cfg.dt);
    pair_outcome out;
    double rev[2] = {0.0, 0.0};
    double y[2] = {y0, y0}, z[2] = {z0, z0};
    bool alive[2] = {z0 > 0.0, z0 > 0.0};
    double s = 0.0;
    for (long n = 0; n < nsteps && (alive[0] || alive[1]); ++n) {
        const double xi = normal(gen);
        const double disc = std::exp(-m.rho * s);
        for (int j = 0; j < 2; ++j) {
            if (!alive[j]) continue;
            const double f = pol(y[j], z[j]);
            rev[j] += disc * f * (y[j] - m.eta * f) * cfg.dt;
            const double dw = (j == 0 ? xi : -xi) * sqdt;
            y[j] += m.lambda * y[j] * cfg.dt + m.sigma * y[j] * dw;
            z[j] += (m.rstar * z[j] - f) * cfg.dt;
            if (y[j] <= 0.0) y[j] = 1e-300;
            if (z[j] <= 0.0) {
                z[j] = 0.0;
                alive[j] = false;
                out.exit_time += 0.5 * (s + cfg.dt);
            }
        }
        s += cfg.dt;
    }
    for (int j = 0; j < 2; ++j) {
        if (alive[j]) {
            out.tail += 0.5 * std::exp(-m.rho * s) * y[j] * z[j];
            out.exit_time += 0.5 * s;
            ++out.truncated;
        }
    }
    out.mean_revenue = 0.5 * (rev[0] + rev[1]);
    return out;
}

template <class Policy>
mc_estimate simulate_core(const market_params& m, double y0, double z0, const mc_config& cfg,
                          const Policy& pol) {
    if (!(cfg.dt > 0.0) || !(cfg.horizon > 0.0) || cfg.n_paths <= 0)
        throw argument_error("simulate_revenue: need positive n_paths, dt, horizon");
    if (!(y0 > 0.0) || !(z0 >= 0.0))
        throw argument_error("simulate_revenue: need y0 > 0, z0 >= 0");
    const long npairs = (cfg.n_paths + 1) / 2;
    std::vector<pair_outcome> outcomes(static_cast<size_t>(npairs));
    int nthreads = cfg.threads > 0 ? cfg.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    if (nthreads < 1) nthreads = 1;
    nthreads = static_cast<int>(std::min<long>(nthreads, npairs));
    auto work = [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i)
            outcomes[static_cast<size_t>(i)] =
                run_pair(m, y0, z0, cfg, pol,
                         splitmix64(cfg.seed + 0x9E3779B97F4A7C15ULL * (std::uint64_t(i) + 1)));
    };
    if (nthreads == 1) {
        work(0, npairs);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (npairs + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const long lo = t * chunk, hi = std::min<long>(npairs, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    mc_estimate est;
    est.n_paths = 2 * npairs;
    est.dt = cfg.dt;
    est.horizon = cfg.horizon;
    est.seed = cfg.seed;
    double sum = 0.0;
    for (const auto& o : outcomes) sum += o.mean_revenue;
    est.mean = sum / npairs;
    double ss = 0.0;
    for (const auto& o : outcomes) {
        const double d = o.mean_revenue - est.mean;
        ss += d * d;
        est.tail_bound += o.tail;
        est.mean_exit_time += o.exit_time;
        est.n_truncated += o.truncated;
    }
    est.stderr_ = npairs > 1 ? std::sqrt(ss / (npairs - 1.0) / npairs) : 0.0;
    est.tail_bound /= npairs;
    est.mean_exit_time /= npairs;
    return est;
}

} // namespace detail

// discounted-revenue Monte Carlo under the feedback policy of u_sol:
// Euler-Maruyama price, explicit Euler inventory, antithetic pairs with
// per-pair RNG streams so thread count never changes the estimate
inline mc_estimate simulate_revenue(const grid_solution& u_sol, const market_params& m,
                                    double y0, double z0, const mc_config& cfg) {
    if (regime(u_sol.params) != regime_kind::rich)
        throw regime_error("simulate_revenue: needs a rich-regime solution");
    detail::extended_policy pol(u_sol, m);
    return detail::simulate_core(m, y0, z0, cfg, pol);
}

// same engine under an arbitrary feedback rule f(y, z); used for dominance checks
inline mc_estimate simulate_revenue_with_policy(const market_params& m, double y0, double z0,
                                                const mc_config& cfg,
                                                const std::function<double(double, double)>& f) {
    return detail::simulate_core(m, y0, z0, cfg, f);
}

// weak-error allowance for acceptance bands: shift of the estimate under dt -> dt/2
inline double mc_dt_allowance(const grid_solution& u_sol, const market_params& m, double y0,
                              double z0, const mc_config& cfg) {
    mc_config half = cfg;
    half.dt = 0.5 * cfg.dt;
    const auto e1 = simulate_revenue(u_sol, m, y0, z0, cfg);
    const auto e2 = simulate_revenue(u_sol, m, y0, z0, half);
    return std::abs(e1.mean - e2.mean);
}

} // namespace liqode
