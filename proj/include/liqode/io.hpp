#pragma once

#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "liqode/bounds.hpp"
#include "liqode/errors.hpp"
#include "liqode/finance.hpp"
#include "liqode/grid_solution.hpp"
#include "liqode/properties.hpp"
#include "liqode/series.hpp"
#include "liqode/solver.hpp"

namespace liqode {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* schema_version = "1";

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline void write_trace_csv(const std::string& path, const grid_solution& sol) {
    std::ofstream f(path);
    if (!f) throw argument_error("write_trace_csv: cannot open " + path);
    f << "x,u,du,ddu\n";
    for (size_t i = 0; i < sol.size(); ++i)
        f << detail::fmt17(sol.xs[i]) << ',' << detail::fmt17(sol.u[i]) << ','
          << detail::fmt17(sol.du[i]) << ',' << detail::fmt17(sol.ddu[i]) << '\n';
}

inline void write_envelope_csv(const std::string& path, const envelope_spec& sub,
                               const envelope_spec& sup, const std::vector<double>& grid) {
    std::ofstream f(path);
    if (!f) throw argument_error("write_envelope_csv: cannot open " + path);
    f << "x,u,sub,super\n";
    for (double x : grid)
        f << detail::fmt17(x) << ',' << detail::fmt17(sub.anchor.eval_u(x)) << ','
          << detail::fmt17(sub.value(x)) << ',' << detail::fmt17(sup.value(x)) << '\n';
}

inline void write_coefficients_csv(const std::string& path, const series_coefficients& c) {
    std::ofstream f(path);
    if (!f) throw argument_error("write_coefficients_csv: cannot open " + path);
    f << "i,k\n";
    for (size_t i = 0; i < c.ks.size(); ++i)
        f << i << ',' << detail::fmt17(to_plain(c.ks[i])) << '\n';
}

inline ordered_json params_json(const model_params& p) {
    return ordered_json{{"a", p.a}, {"b", p.b}, {"c", p.c}, {"regime", regime_name(regime(p))}};
}

inline ordered_json solution_meta_json(const grid_solution& sol) {
    ordered_json j;
    j["schema_version"] = schema_version;
    j["params"] = params_json(sol.params);
    j["method"] = sol.method;
    j["tol"] = sol.tol;
    j["n_points"] = sol.size();
    j["x_min"] = sol.x_min();
    j["x_max"] = sol.x_max();
    j["u_at_xmax"] = sol.u.back();
    j["du_at_xmax"] = sol.du.back();
    return j;
}

inline ordered_json shooting_json(const shooting_result& r) {
    ordered_json j = solution_meta_json(r.solution);
    j["bracket_low"] = r.bracket_low;
    j["bracket_high"] = r.bracket_high;
    j["n_bisections"] = r.n_bisections;
    j["signs_ok"] = r.signs_ok;
    j["classification_history"] = r.classification_history;
    return j;
}

inline ordered_json sign_profile_json(const sign_profile_report& rep) {
    static constexpr const char* names[4] = {"u", "du", "ddu", "dddu"};
    ordered_json j;
    j["schema_version"] = schema_version;
    for (int q = 0; q < 4; ++q) {
        ordered_json arr = ordered_json::array();
        for (const auto& iv : rep.intervals[q])
            arr.push_back(ordered_json{{"x_lo", iv.x_lo}, {"x_hi", iv.x_hi}, {"sign", iv.sign}});
        j[names[q]] = arr;
    }
    ordered_json viol = ordered_json::array();
    for (const auto& v : rep.violations)
        viol.push_back(
            ordered_json{{"which", names[v.which]}, {"x", v.x}, {"value", v.value}});
    j["violations"] = viol;
    return j;
}

inline ordered_json fit_json(const fit_report& rep) {
    return ordered_json{{"schema_version", schema_version}, {"model", rep.model},
                        {"k_hat", rep.k_hat},              {"aux1_coeff", rep.aux1_coeff},
                        {"x_lo", rep.x_lo},                {"x_hi", rep.x_hi},
                        {"residual_norm", rep.residual_norm}, {"n_points", rep.n_points}};
}

inline ordered_json mc_json(const mc_estimate& est) {
    return ordered_json{{"schema_version", schema_version},
                        {"mean", est.mean},
                        {"stderr", est.stderr_},
                        {"n_paths", est.n_paths},
                        {"dt", est.dt},
                        {"horizon", est.horizon},
                        {"seed", est.seed},
                        {"tail_bound", est.tail_bound},
                        {"mean_exit_time", est.mean_exit_time},
                        {"n_truncated", est.n_truncated}};
}

inline ordered_json probe_json(const probe_report& rep) {
    ordered_json pts = ordered_json::array();
    for (const auto& p : rep.points)
        pts.push_back(ordered_json{{"eps", p.eps}, {"du_eps", p.du_eps}, {"ok", p.ok}});
    return ordered_json{{"schema_version", schema_version},
                        {"xbar", rep.xbar},
                        {"ubar", rep.ubar},
                        {"delta", rep.delta},
                        {"delta_hat", rep.delta_hat},
                        {"intercept", rep.intercept},
                        {"pass", rep.pass},
                        {"points", pts}};
}

inline ordered_json order_json(const order_report& rep) {
    return ordered_json{{"schema_version", schema_version},
                        {"xs", rep.xs},
                        {"ratios", rep.ratios},
                        {"sup", rep.sup},
                        {"bounded", rep.bounded}};
}

inline ordered_json divergence_json(const divergence_info& d) {
    return ordered_json{{"schema_version", schema_version},
                        {"ratios", d.ratios},
                        {"easy_bound", d.easy_bound},
                        {"all_positive", d.all_positive},
                        {"easy_bound_holds_from_10", d.easy_bound_holds_from_10},
                        {"linear_slope", d.linear_slope},
                        {"zero_radius", d.zero_radius},
                        {"in_proven_window", d.in_proven_window}};
}

inline void write_json(const std::string& path, const ordered_json& j) {
    std::ofstream f(path);
    if (!f) throw argument_error("write_json: cannot open " + path);
    f << j.dump(2) << '\n';
}

// config files reject unknown keys so typos never silently change a run
inline void validate_keys(const ordered_json& j, const std::set<std::string>& allowed,
                          const std::string& where) {
    if (!j.is_object())
        throw argument_error(where + ": config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            throw argument_error(where + ": unknown key '" + it.key() + "'");
    }
}

inline ordered_json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw argument_error("load_config: cannot open " + path);
    ordered_json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw argument_error(std::string("load_config: parse failure: ") + e.what());
    }
    return j;
}

} // namespace liqode
