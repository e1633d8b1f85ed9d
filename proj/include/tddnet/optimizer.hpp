#pragma once

// Optimizers for the UL/DL configuration, relative small-cell density, small
// cell bias, bandwidth split, and the two sensing thresholds.
//
// The density/bias/configuration results are closed forms for the
// fully-loaded network without D2D activity. Each comes with a grid search
// of the same analytic objective as an oracle.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "analytics.hpp"
#include "params.hpp"
#include "special_fns.hpp"

namespace tddnet {

struct GridCheck
{
    double argmax = 0.0;          // grid point with the largest objective
    double objective = 0.0;       // objective there
    double step = 0.0;            // multiplicative (log grid) or additive (linear grid) spacing
    bool agrees = false;          // closed form within one grid step of argmax
    std::optional<double> printed;  // value of the formula as printed, when it differs
    bool printed_agrees = false;
    std::string note;
};

struct OptimizationResult
{
    std::string target;
    std::string method;  // closed-form | grid | two-stage
    std::vector<std::pair<std::string, double>> arguments;
    double objective = 0.0;
    std::string objective_name;
    std::optional<double> grid_step;
    std::optional<double> q_bar;
    std::string regime;  // governing case, or "degenerate" / "indifferent"
    std::optional<GridCheck> check;
    std::vector<std::string> warnings;

    double argument(const std::string& name) const
    {
        for (const auto& [k, v] : arguments)
            if (k == name)
                return v;
        throw std::out_of_range("OptimizationResult: no argument " + name);
    }
};

// ---------------------------------------------------------------------------
// Objectives in the fully-loaded, no-D2D regime

namespace opt_detail {

inline AnalysisOptions loaded() { return AnalysisOptions{.fully_loaded = true, .suppress_d2d = true}; }

/// Per-tier coverage with every cell active and no D2D interference.
inline std::optional<double> tier_coverage_no_d2d(const NetworkConfig& c, Tier t, Mode m)
{
    const auto d = derive(c, loaded());
    if (t == Tier::macro) {
        auto mac = coverage_macro(c, d);
        return m == Mode::downlink ? mac.dl : mac.ul;
    }
    auto s = detail::small_closed_form(c, d, 0.0, 0.0);
    return m == Mode::downlink ? s.dl : s.ul;
}

inline double overall_no_d2d(const NetworkConfig& c, Mode m)
{
    const auto d = derive(c, loaded());
    auto mac = coverage_macro(c, d);
    auto s = detail::small_closed_form(c, d, 0.0, 0.0);
    if (m == Mode::downlink)
        return detail::mix(mac.dl, d.a_d_m, s.dl, d.a_d_s).value_or(0.0);
    return detail::mix(mac.ul, d.a_u_m, s.ul, d.a_u_s).value_or(0.0);
}

inline std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return g;
}

inline std::pair<std::size_t, double> argmax(const std::vector<double>& xs, const std::function<double(double)>& f)
{
    std::size_t best = 0;
    double fb = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = f(xs[i]);
        if (v > fb) {
            fb = v;
            best = i;
        }
    }
    return {best, fb};
}

// Within one step of a log grid, or pinned to the edge the optimum lies beyond.
inline bool within_one_step(double x, double argmax, double ratio, double lo, double hi)
{
    if (x <= lo)
        return argmax <= lo * ratio * (1.0 + 1e-12);
    if (x >= hi)
        return argmax >= hi / ratio * (1.0 - 1e-12);
    return std::abs(std::log(x / argmax)) <= std::log(ratio) * (1.0 + 1e-9);
}

inline void flag_assumptions(const NetworkConfig& c, OptimizationResult& r)
{
    const auto d = derive(c);
    if (!d.fully_loaded)
        r.warnings.push_back("network is not fully loaded; the closed form assumes every cell is active");
    if (c.rho_s > 0.0 && c.zeta > 0.0)
        r.warnings.push_back("closed form assumes rho_s -> 0 (no active D2D transmitters)");
}

}  // namespace opt_detail

// ---------------------------------------------------------------------------
// UL/DL configuration

/// Optimal DL probability q_{D,i} for the tier-i coverage of mode m. UL
/// coverage always prefers q = 0. For DL, compares delta/(C gamma^{2/a})
/// against (Q/P)^{2/a} and, in the second case, q_{D,k} against q_bar.
inline OptimizationResult optimal_uldl_config(const NetworkConfig& c, Tier tier, Mode mode)
{
    require_valid(c);
    OptimizationResult r;
    r.target = "uldl";
    r.method = "closed-form";
    r.objective_name = std::string("coverage_") + to_string(tier) + "_" + to_string(mode);
    opt_detail::flag_assumptions(c, r);
    const std::string arg = tier == Tier::macro ? "q_dm" : "q_ds";
    const double e = 2.0 / c.alpha;
    const Tier other = tier == Tier::macro ? Tier::small : Tier::macro;

    double q_star = 0.0;
    if (mode == Mode::uplink) {
        r.regime = "uplink: coverage decreases with q";
        if (c.power_dl(tier) <= c.power_ul(tier))
            r.warnings.push_back("P <= Q for this tier; q* = 0 is derived for P > Q");
    } else {
        const double g = c.gamma(tier, Mode::downlink);
        const double ratio = delta_fn(g, c.alpha) / (c_alpha(c.alpha) * std::pow(g, e));
        const double qp = std::pow(c.power_ul(tier) / c.power_dl(tier), e);
        if (ratio <= qp) {
            q_star = 1.0;
            r.regime = "i: UL interference dominates, coverage increases with q";
        } else {
            const double lam_hat = c.density(tier) / c.density(other);
            const double pb = (c.power_dl(tier) / c.power_dl(other)) * (c.bias_dl(tier) / c.bias_dl(other));
            const double q_bar = lam_hat * std::pow(pb, e) / (ratio / qp - 1.0);
            r.q_bar = q_bar;
            const double qk = c.q_dl(other);
            if (qk < q_bar) {
                q_star = 1.0;
                r.regime = "ii: q_other < q_bar, coverage increases with q";
            } else if (qk > q_bar) {
                q_star = 0.0;
                r.regime = "ii: q_other > q_bar, DL interference dominates, coverage decreases with q";
            } else {
                q_star = 1.0;
                r.regime = "indifferent";
            }
        }
    }
    r.arguments.push_back({arg, q_star});

    // Objective at q* and the grid oracle. DL coverage is undefined at
    // q = 0 exactly (no DL cells), so the grid starts at 0.05 and q* = 0
    // is read as the limit.
    auto at = [&](double q) {
        NetworkConfig x = c;
        (tier == Tier::macro ? x.q_dm : x.q_ds) = q;
        return opt_detail::tier_coverage_no_d2d(x, tier, mode).value_or(0.0);
    };
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i)
        grid.push_back(0.05 * i);
    if (mode == Mode::uplink)
        grid.insert(grid.begin(), 0.0);
    const auto [bi, fb] = opt_detail::argmax(grid, at);
    GridCheck chk;
    chk.argmax = grid[bi];
    chk.objective = fb;
    chk.step = 0.05;
    chk.agrees = std::abs(chk.argmax - std::max(q_star, grid.front())) <= 0.05 + 1e-12;
    std::string mono = "non-increasing";
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (at(grid[i]) > at(grid[i - 1]) + 1e-15)
            mono = "not monotone";
    chk.note = "grid over q in [" + std::to_string(grid.front()) + ", 1] step 0.05; objective " + mono;
    r.check = chk;
    r.grid_step = 0.05;
    r.objective = at(std::max(q_star, grid.front()));
    return r;
}

// ---------------------------------------------------------------------------
// Density and bias

namespace opt_detail {

struct DlTerms
{
    double macro_printed, macro_consistent, small;
};

// Numerator and denominator pieces of the DL density/bias closed form. The
// stationarity condition of the fully-loaded overall coverage puts C(alpha)
// on both UL-interference terms; the printed numerator has it only on the
// small tier.
inline DlTerms dl_terms(const NetworkConfig& c)
{
    const double e = 2.0 / c.alpha;
    const double ca = c_alpha(c.alpha);
    const double dm = delta_fn(c.gamma_m_d, c.alpha);
    const double ds = delta_fn(c.gamma_s_d, c.alpha);
    const double ul_m = (1.0 - c.q_dm) * std::pow(c.q_m * c.gamma_m_d, e);
    return DlTerms{
        c.q_dm * std::pow(c.p_m, e) * dm + ul_m,
        c.q_dm * std::pow(c.p_m, e) * dm + ca * ul_m,
        c.q_ds * std::pow(c.p_s, e) * ds + (1.0 - c.q_ds) * ca * std::pow(c.q_s * c.gamma_s_d, e),
    };
}

inline double ul_ratio(const NetworkConfig& c)
{
    const double e = 2.0 / c.alpha;
    return std::pow(c.gamma_m_u / c.gamma_s_u, e)
         * (c.q_dm * std::pow(c.p_m, e) + (1.0 - c.q_dm) * std::pow(c.q_m, e))
         / (c.q_ds * std::pow(c.p_s, e) + (1.0 - c.q_ds) * std::pow(c.q_s, e));
}

}  // namespace opt_detail

/// Closed-form relative density lambda_s / lambda_m maximizing the overall
/// coverage of mode m in the fully-loaded network without D2D, with a
/// 50-point log grid over [grid_lo, grid_hi] as oracle.
inline OptimizationResult optimal_density(const NetworkConfig& c, Mode mode, double grid_lo = 1.0,
                                          double grid_hi = 100.0, int grid_points = 50)
{
    require_valid(c);
    OptimizationResult r;
    r.target = "density";
    r.method = "closed-form";
    r.objective_name = std::string("overall_coverage_") + to_string(mode);
    opt_detail::flag_assumptions(c, r);
    const double e = 2.0 / c.alpha;
    double value = 0.0;
    std::optional<double> printed;
    if (mode == Mode::downlink) {
        const auto t = opt_detail::dl_terms(c);
        const double b = std::pow(c.b_ds / c.b_dm, e);
        value = t.macro_consistent / (b * t.small);
        printed = t.macro_printed / (b * t.small);
    } else {
        value = opt_detail::ul_ratio(c) / std::pow(c.b_us / c.b_um, e);
    }
    r.arguments.push_back({"lambda_s_over_lambda_m", value});

    auto at = [&](double lam_hat) {
        NetworkConfig x = c;
        x.lambda_s = lam_hat * c.lambda_m;
        return opt_detail::overall_no_d2d(x, mode);
    };
    r.objective = at(value);
    const auto grid = opt_detail::log_grid(grid_lo, grid_hi, grid_points);
    const auto [bi, fb] = opt_detail::argmax(grid, at);
    GridCheck chk;
    chk.argmax = grid[bi];
    chk.objective = fb;
    chk.step = grid[1] / grid[0];
    chk.agrees = opt_detail::within_one_step(value, chk.argmax, chk.step, grid_lo, grid_hi);
    if (printed) {
        chk.printed = printed;
        chk.printed_agrees = opt_detail::within_one_step(*printed, chk.argmax, chk.step, grid_lo, grid_hi);
        chk.note = "printed numerator omits C(alpha) on the macro UL term; printed/consistent = "
                 + std::to_string(*printed / value);
    }
    r.check = chk;
    r.grid_step = chk.step;
    return r;
}

/// Closed-form relative small-cell bias B_s / B_m for mode m, with a log
/// grid over [grid_lo, grid_hi] as oracle.
inline OptimizationResult optimal_bias(const NetworkConfig& c, Mode mode, double grid_lo = 0.01,
                                       double grid_hi = 100.0, int grid_points = 50)
{
    require_valid(c);
    OptimizationResult r;
    r.target = "bias";
    r.method = "closed-form";
    r.objective_name = std::string("overall_coverage_") + to_string(mode);
    opt_detail::flag_assumptions(c, r);
    const double h = c.alpha / 2.0;
    const double lam_hat = c.lambda_s / c.lambda_m;
    double value = 0.0;
    std::optional<double> printed;
    if (mode == Mode::downlink) {
        const auto t = opt_detail::dl_terms(c);
        value = std::pow(t.macro_consistent / (lam_hat * t.small), h);
        printed = std::pow(t.macro_printed / (lam_hat * t.small), h);
    } else {
        value = std::pow(opt_detail::ul_ratio(c) / lam_hat, h);
    }
    const std::string arg = mode == Mode::downlink ? "b_ds_over_b_dm" : "b_us_over_b_um";
    r.arguments.push_back({arg, value});

    auto at = [&](double b_hat) {
        NetworkConfig x = c;
        if (mode == Mode::downlink)
            x.b_ds = b_hat * c.b_dm;
        else
            x.b_us = b_hat * c.b_um;
        return opt_detail::overall_no_d2d(x, mode);
    };
    r.objective = at(value);
    const auto grid = opt_detail::log_grid(grid_lo, grid_hi, grid_points);
    const auto [bi, fb] = opt_detail::argmax(grid, at);
    GridCheck chk;
    chk.argmax = grid[bi];
    chk.objective = fb;
    chk.step = grid[1] / grid[0];
    chk.agrees = opt_detail::within_one_step(value, chk.argmax, chk.step, grid_lo, grid_hi);
    if (printed) {
        chk.printed = printed;
        chk.printed_agrees = opt_detail::within_one_step(*printed, chk.argmax, chk.step, grid_lo, grid_hi);
        chk.note = "printed numerator omits C(alpha) on the macro UL term; printed/consistent = "
                 + std::to_string(*printed / value);
    }
    r.check = chk;
    r.grid_step = chk.step;
    return r;
}

// ---------------------------------------------------------------------------
// Bandwidth

/// Total DL throughput is affine in eta, so the optimum sits at an end:
/// eta = 1 if the macro tier carries more than small cells plus half the D2D
/// throughput, eta = 0 if less.
inline OptimizationResult optimal_bandwidth(const NetworkConfig& c, const AnalysisOptions& opt = {})
{
    require_valid(c);
    OptimizationResult r;
    r.target = "bandwidth";
    r.method = "closed-form";
    r.objective_name = "total_dl_throughput";
    const auto t = throughput(c, opt);
    const double macro = t.t_m_d;
    const double small = t.t_s_d + 0.5 * t.t_d2d;
    double eta = 0.0;
    if (macro > small) {
        eta = 1.0;
        r.regime = "macro dominant";
    } else if (macro < small) {
        eta = 0.0;
        r.regime = "small cells dominant";
    } else {
        eta = c.eta;
        r.regime = "indifferent";
    }
    r.arguments.push_back({"eta", eta});
    r.objective = eta * macro + (1.0 - eta) * small;
    return r;
}

// ---------------------------------------------------------------------------
// Sensing thresholds

enum class SensingObjective { dl_throughput, ul_throughput };

struct SensingSettings
{
    int grid_points = 25;
    double rel_tol = 0.01;  // golden-section stop: bracket ratio below 1 + rel_tol
    double flat_tol = 1e-9;  // relative spread below which the objective counts as flat
};

namespace opt_detail {

struct LineSearch
{
    double x = 0.0, f = 0.0;
    std::vector<double> grid, values;
    bool flat = false;
};

// Log-spaced grid on [lo, hi], then golden-section in log(x) inside the
// bracket around the best grid point.
inline LineSearch grid_then_golden(const std::function<double(double)>& f, double lo, double hi,
                                   const SensingSettings& s)
{
    LineSearch out;
    out.grid = log_grid(lo, hi, s.grid_points);
    out.values.resize(out.grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < out.grid.size(); ++i) {
        out.values[i] = f(out.grid[i]);
        if (out.values[i] > out.values[best])
            best = i;
    }
    const auto [mn, mx] = std::minmax_element(out.values.begin(), out.values.end());
    if (*mx - *mn <= s.flat_tol * std::max(std::abs(*mx), 1e-300)) {
        out.flat = true;
        out.x = hi;
        out.f = out.values.back();
        return out;
    }
    out.x = out.grid[best];
    out.f = out.values[best];

    double a = std::log(out.grid[best == 0 ? 0 : best - 1]);
    double b = std::log(out.grid[std::min(best + 1, out.grid.size() - 1)]);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
    while (b - a > std::log1p(s.rel_tol)) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(std::exp(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(std::exp(x2));
        }
    }
    const double xr = std::exp(f1 >= f2 ? x1 : x2);
    const double fr = std::max(f1, f2);
    if (fr > out.f) {
        out.x = xr;
        out.f = fr;
    }
    return out;
}

inline double sensing_objective(const NetworkConfig& c, SensingObjective obj)
{
    const auto t = throughput(c);
    return obj == SensingObjective::dl_throughput ? t.total_d : t.total_u;
}

}  // namespace opt_detail

/// Two-stage search: rho_s at the configured rho_d, then rho_d at the found
/// rho_s, both over [rho_min, Q_d].
inline OptimizationResult optimal_sensing(const NetworkConfig& c, SensingObjective obj = SensingObjective::dl_throughput,
                                          const SensingSettings& s = {})
{
    require_valid(c);
    if (!is_set(c.rho_min))
        throw std::invalid_argument("rho_min: required for the sensing search (lower end of the domain)");
    if (!(c.rho_min > 0.0 && c.rho_min < c.q_d))
        throw std::invalid_argument("rho_min: must lie in (0, Q_d)");
    OptimizationResult r;
    r.target = "sensing";
    r.method = "two-stage";
    r.objective_name = obj == SensingObjective::dl_throughput ? "total_dl_throughput" : "total_ul_throughput";

    NetworkConfig x = c;
    auto stage1 = opt_detail::grid_then_golden(
        [&](double rho) {
            x.rho_s = rho;
            return opt_detail::sensing_objective(x, obj);
        },
        c.rho_min, c.q_d, s);
    x.rho_s = stage1.x;
    auto stage2 = opt_detail::grid_then_golden(
        [&](double rho) {
            x.rho_d = rho;
            return opt_detail::sensing_objective(x, obj);
        },
        c.rho_min, c.q_d, s);
    x.rho_d = stage2.x;

    r.arguments.push_back({"rho_s", stage1.x});
    r.arguments.push_back({"rho_d", stage2.x});
    r.objective = opt_detail::sensing_objective(x, obj);
    r.grid_step = stage1.grid[1] / stage1.grid[0];
    if (stage1.flat && stage2.flat)
        r.regime = "degenerate";
    else if (stage1.flat || stage2.flat)
        r.regime = stage1.flat ? "rho_s has no effect" : "rho_d has no effect";
    else
        r.regime = "interior search";
    return r;
}

/// Number of sign changes in the discrete differences of a sequence,
/// ignoring differences below tol relative to the largest value.
inline int sign_changes(const std::vector<double>& v, double tol = 1e-9)
{
    double scale = 0.0;
    for (double x : v)
        scale = std::max(scale, std::abs(x));
    int changes = 0, last = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double d = v[i] - v[i - 1];
        if (std::abs(d) <= tol * scale)
            continue;
        const int sg = d > 0 ? 1 : -1;
        if (last != 0 && sg != last)
            ++changes;
        last = sg;
    }
    return changes;
}

}  // namespace tddnet
