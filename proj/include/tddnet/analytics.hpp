#pragma once

// Closed-form and quadrature-backed results for the load-aware two-tier
// dynamic-TDD network: association, cell load, CSMA retention, coverage and
// throughput. All functions are pure in the configuration.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "params.hpp"
#include "quadrature.hpp"
#include "special_fns.hpp"

namespace tddnet {

struct AnalysisOptions
{
    bool fully_loaded = false;  // force void probabilities to zero
    bool suppress_d2d = false;  // force the active D2D density to zero
    QuadratureSettings outer{1e-6, 1e-14, 400, true};
    QuadratureSettings inner{1e-8, 1e-14, 400, true};
};

struct DerivedQuantities
{
    double a_d_m = 0, a_d_s = 0, a_u_m = 0, a_u_s = 0;
    double pe_d_m = 1, pe_d_s = 1, pe_u_m = 1, pe_u_s = 1;
    double lam_d_m = 0, lam_d_s = 0, lam_u_m = 0, lam_u_s = 0;
    double iota_s = 0, iota_d = 0;
    double k_os = 0, k_od = 0;
    double beta_ret = 0;
    double lambda_d2d = 0;
    bool fully_loaded = false;  // every non-empty mode has void probability < 1e-4

    double assoc(Tier t, Mode m) const
    {
        if (m == Mode::downlink)
            return t == Tier::macro ? a_d_m : a_d_s;
        return t == Tier::macro ? a_u_m : a_u_s;
    }
    double void_prob(Tier t, Mode m) const
    {
        if (m == Mode::downlink)
            return t == Tier::macro ? pe_d_m : pe_d_s;
        return t == Tier::macro ? pe_u_m : pe_u_s;
    }
    double active(Tier t, Mode m) const
    {
        if (m == Mode::downlink)
            return t == Tier::macro ? lam_d_m : lam_d_s;
        return t == Tier::macro ? lam_u_m : lam_u_s;
    }
    // UL transmitting users seen as interferers; equal to the active UL cell density
    double lam_t(Tier t) const { return active(t, Mode::uplink); }
};

inline void require_valid(const NetworkConfig& cfg)
{
    auto v = validate(cfg);
    if (!v.ok()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : v.errors)
            msg += " " + e + ";";
        throw std::invalid_argument(msg);
    }
}

// ---------------------------------------------------------------------------
// Association

struct AssociationProbabilities
{
    double a_d_m, a_d_s, a_u_m, a_u_s;
};

inline AssociationProbabilities association_probabilities(const NetworkConfig& c)
{
    const double e = 2.0 / c.alpha;
    auto pair = [&](Mode m) {
        double w[2];
        for (Tier t : {Tier::macro, Tier::small}) {
            const double mass = c.mode_prob(t, m) * c.density(t);
            w[static_cast<int>(t)] = mass * std::pow(c.link_power(t, m) * c.bias(t, m), e);
        }
        const double sum = w[0] + w[1];
        if (sum == 0.0)
            return std::pair{0.0, 0.0};
        return std::pair{w[0] / sum, w[1] / sum};
    };
    auto [dm, ds] = pair(Mode::downlink);
    auto [um, us] = pair(Mode::uplink);
    return {dm, ds, um, us};
}

// ---------------------------------------------------------------------------
// Cell load

namespace detail {

inline double association_of(const AssociationProbabilities& a, Tier t, Mode m)
{
    if (m == Mode::downlink)
        return t == Tier::macro ? a.a_d_m : a.a_d_s;
    return t == Tier::macro ? a.a_u_m : a.a_u_s;
}

/// Users of the mode's role per base station of that mode (the load ratio).
inline double load_ratio(const NetworkConfig& c, const AssociationProbabilities& a, Tier t, Mode m)
{
    const double mass = c.mode_prob(t, m) * c.density(t);
    if (mass == 0.0)
        return 0.0;
    const double role = m == Mode::downlink ? 1.0 - c.mu : c.mu;
    return role * (1.0 - c.zeta) * c.lambda_u * association_of(a, t, m) / mass;
}

inline constexpr double kShape = 3.5;

inline double void_from_ratio(double x) { return std::pow(1.0 + x / kShape, -kShape); }

}  // namespace detail

struct VoidProbabilities
{
    double pe_d_m, pe_d_s, pe_u_m, pe_u_s;
};

inline VoidProbabilities void_probabilities(const NetworkConfig& c)
{
    auto a = association_probabilities(c);
    auto pe = [&](Tier t, Mode m) {
        if (c.mode_prob(t, m) * c.density(t) == 0.0)
            return 1.0;
        return detail::void_from_ratio(detail::load_ratio(c, a, t, m));
    };
    return {pe(Tier::macro, Mode::downlink), pe(Tier::small, Mode::downlink),
            pe(Tier::macro, Mode::uplink), pe(Tier::small, Mode::uplink)};
}

inline double void_probability(const NetworkConfig& c, Tier t, Mode m)
{
    auto v = void_probabilities(c);
    if (m == Mode::downlink)
        return t == Tier::macro ? v.pe_d_m : v.pe_d_s;
    return t == Tier::macro ? v.pe_u_m : v.pe_u_s;
}

/// Probability that a tier-t cell in mode m carries n users of the matching role.
inline double load_pmf(const NetworkConfig& c, Tier t, Mode m, long n)
{
    if (n < 0)
        throw std::domain_error("load_pmf: n must be >= 0");
    if (n == 0)
        return void_probability(c, t, m);
    if (c.mode_prob(t, m) * c.density(t) == 0.0)
        return 0.0;
    const double x = detail::load_ratio(c, association_probabilities(c), t, m);
    if (x == 0.0)
        return 0.0;
    const double k = detail::kShape;
    const double nn = static_cast<double>(n);
    const double log_p = k * std::log(k) + std::lgamma(nn + k) - std::lgamma(k) - std::lgamma(nn + 1.0)
                       + nn * std::log(x) - (nn + k) * std::log(k + x);
    return std::exp(log_p);
}

/// Mean number of users per cell implied by the load distribution.
inline double load_mean(const NetworkConfig& c, Tier t, Mode m)
{
    return detail::load_ratio(c, association_probabilities(c), t, m);
}

// ---------------------------------------------------------------------------
// Densities, exclusion radii and retention

struct ActiveDensities
{
    double lam_d_m, lam_d_s, lam_u_m, lam_u_s;
};

inline ActiveDensities active_densities(const NetworkConfig& c, bool fully_loaded = false)
{
    auto pe = void_probabilities(c);
    auto busy = [&](double p) { return fully_loaded ? 1.0 : 1.0 - p; };
    return {c.lambda_m * c.q_dm * busy(pe.pe_d_m), c.lambda_s * c.q_ds * busy(pe.pe_d_s),
            c.lambda_m * (1.0 - c.q_dm) * busy(pe.pe_u_m), c.lambda_s * (1.0 - c.q_ds) * busy(pe.pe_u_s)};
}

inline std::pair<double, double> exclusion_radii(const NetworkConfig& c)
{
    return {exclusion_radius(c.rho_s, c.q_d, c.epsilon, c.alpha),
            exclusion_radius(c.rho_d, c.q_d, c.epsilon, c.alpha)};
}

/// Area factor of the sensing region for threshold rho; +inf when rho == 0.
inline double sensing_area(double rho, double q_d, double alpha)
{
    if (rho <= 0.0)
        return std::numeric_limits<double>::infinity();
    if (std::isinf(rho))
        return 0.0;
    return 2.0 * std::numbers::pi * std::tgamma(2.0 / alpha) / (alpha * std::pow(rho / q_d, 2.0 / alpha));
}

struct Retention
{
    double beta_ret, lambda_d2d, k_os, k_od;
};

inline Retention retaining_probability(const NetworkConfig& c, bool fully_loaded = false)
{
    const auto dens = active_densities(c, fully_loaded);
    Retention r{};
    r.k_os = sensing_area(c.rho_s, c.q_d, c.alpha);
    r.k_od = sensing_area(c.rho_d, c.q_d, c.alpha);
    if (c.rho_s == 0.0 || c.rho_d == 0.0)
        return r;  // everyone silenced

    const double blockers = dens.lam_d_s + dens.lam_u_s;
    const double php = blockers == 0.0 ? 1.0 : std::exp(-blockers * r.k_os);
    const double x = c.zeta * c.lambda_u * r.k_od;
    const double mhp = x == 0.0 ? 1.0 : -std::expm1(-x) / x;
    r.beta_ret = php * mhp;
    r.lambda_d2d = r.beta_ret * c.zeta * c.lambda_u;
    return r;
}

inline DerivedQuantities derive(const NetworkConfig& c, const AnalysisOptions& opt = {})
{
    require_valid(c);
    DerivedQuantities d;
    auto a = association_probabilities(c);
    d.a_d_m = a.a_d_m;
    d.a_d_s = a.a_d_s;
    d.a_u_m = a.a_u_m;
    d.a_u_s = a.a_u_s;

    auto pe = void_probabilities(c);
    d.pe_d_m = pe.pe_d_m;
    d.pe_d_s = pe.pe_d_s;
    d.pe_u_m = pe.pe_u_m;
    d.pe_u_s = pe.pe_u_s;

    d.fully_loaded = true;
    for (Tier t : {Tier::macro, Tier::small})
        for (Mode m : {Mode::downlink, Mode::uplink})
            if (c.mode_prob(t, m) * c.density(t) > 0.0 && d.void_prob(t, m) >= 1e-4)
                d.fully_loaded = false;

    auto act = active_densities(c, opt.fully_loaded);
    d.lam_d_m = act.lam_d_m;
    d.lam_d_s = act.lam_d_s;
    d.lam_u_m = act.lam_u_m;
    d.lam_u_s = act.lam_u_s;

    std::tie(d.iota_s, d.iota_d) = exclusion_radii(c);
    auto ret = retaining_probability(c, opt.fully_loaded);
    d.beta_ret = ret.beta_ret;
    d.lambda_d2d = opt.suppress_d2d ? 0.0 : ret.lambda_d2d;
    d.k_os = ret.k_os;
    d.k_od = ret.k_od;
    return d;
}

// ---------------------------------------------------------------------------
// Serving distance

inline double distance_pdf(const NetworkConfig& c, Tier t, Mode m, double y)
{
    if (y < 0.0)
        return 0.0;
    const double a = detail::association_of(association_probabilities(c), t, m);
    const double mass = c.mode_prob(t, m) * c.density(t);
    if (a == 0.0 || mass == 0.0)
        throw std::domain_error("distance_pdf: tier has no base stations in this mode");
    const double rate = std::numbers::pi * mass / a;
    return 2.0 * rate * y * std::exp(-rate * y * y);
}

// ---------------------------------------------------------------------------
// Coverage

struct CoverageCi
{
    std::optional<double> p_m_d, p_m_u, p_s_d, p_s_u, p_d2d, overall_d, overall_u;
};

struct CoverageReport
{
    enum class Source { analytic, simulated };
    Source source = Source::analytic;
    std::optional<double> p_m_d, p_m_u, p_s_d, p_s_u, p_d2d, overall_d, overall_u;
    CoverageCi ci;  // 95% half-widths, simulated reports only
    std::vector<std::string> warnings;
    bool quadrature_converged = true;
    double quadrature_error = 0.0;

    static constexpr const char* kFieldNames[7] = {"p_m_d", "p_m_u", "p_s_d", "p_s_u",
                                                   "p_d2d", "overall_d", "overall_u"};

    std::optional<double> field(int i) const
    {
        const std::optional<double>* f[7] = {&p_m_d, &p_m_u, &p_s_d, &p_s_u, &p_d2d, &overall_d, &overall_u};
        return *f[i];
    }
    std::optional<double> ci_field(int i) const
    {
        const std::optional<double>* f[7] = {&ci.p_m_d, &ci.p_m_u, &ci.p_s_d,   &ci.p_s_u,
                                             &ci.p_d2d, &ci.overall_d, &ci.overall_u};
        return *f[i];
    }
};

struct TierCoverage
{
    std::optional<double> dl, ul;
    bool converged = true;
    double error = 0.0;
};

inline TierCoverage coverage_macro(const NetworkConfig& c, const DerivedQuantities& d)
{
    const double e = 2.0 / c.alpha;
    const double ca = c_alpha(c.alpha);
    TierCoverage out;
    const double mass_d = c.q_dm * c.lambda_m;
    if (mass_d > 0.0) {
        const double g = c.gamma_m_d;
        const double den = d.lam_d_m * d.a_d_m * delta_fn(g, c.alpha)
                         + d.lam_t(Tier::macro) * d.a_d_m * ca * std::pow(c.q_m / c.p_m * g, e) + mass_d;
        out.dl = mass_d / den;
    }
    const double mass_u = (1.0 - c.q_dm) * c.lambda_m;
    if (mass_u > 0.0) {
        const double g = c.gamma_m_u;
        const double den = ca * std::pow(g, e) * d.a_u_m
                               * (d.lam_d_m * std::pow(c.p_m / c.q_m, e) + d.lam_t(Tier::macro))
                         + mass_u;
        out.ul = mass_u / den;
    }
    return out;
}

inline TierCoverage coverage_macro(const NetworkConfig& c, const AnalysisOptions& opt = {})
{
    return coverage_macro(c, derive(c, opt));
}

/// Laplace exponent of the D2D interference at a receiver whose serving
/// transmitter (with exclusion ball radius iota) sits at distance r.
inline QuadratureResult d2d_exponent(const NetworkConfig& c, double s, double r, double iota, double q_pow,
                                     const QuadratureSettings& q)
{
    return ball_exclusion_exponent(s, q_pow, r, iota, c.alpha, q);
}

namespace detail {

// (mass/A) / K * int_0^inf e^{-t} L(t) dt, split at the exclusion radius.
template <class Laplace>
QuadratureResult small_cell_integral(double k, double iota, Laplace&& lap, const QuadratureSettings& q)
{
    auto f = [&](double t) {
        if (t > 745.0)
            return 0.0;
        return std::exp(-t) * lap(t);
    };
    const double t0 = std::numbers::pi * iota * iota * k;
    if (!std::isfinite(t0) || t0 <= 0.0)
        return integrate_1d(f, 0.0, std::numeric_limits<double>::infinity(), q);
    auto a = integrate_1d(f, 0.0, t0, q);
    auto b = integrate_1d(f, t0, std::numeric_limits<double>::infinity(), q);
    a.value += b.value;
    a.error += b.error;
    a.converged = a.converged && b.converged;
    a.evaluations += b.evaluations;
    return a;
}

}  // namespace detail

inline TierCoverage coverage_small(const NetworkConfig& c, const DerivedQuantities& d,
                                   const AnalysisOptions& opt = {})
{
    const double e = 2.0 / c.alpha;
    const double ca = c_alpha(c.alpha);
    const double pi = std::numbers::pi;
    const double lam_t = d.lam_t(Tier::small);
    TierCoverage out;
    bool inner_ok = true;

    auto run = [&](double mass, double assoc, double k, double gamma, double p_serv) -> std::optional<double> {
        if (mass == 0.0 || assoc == 0.0)
            return std::nullopt;
        auto lap = [&](double t) {
            if (d.lambda_d2d == 0.0)
                return 1.0;
            const double v = t / (pi * k);
            const double r = std::sqrt(v);
            const double s = gamma * std::pow(r, c.alpha) / p_serv;
            auto ex = d2d_exponent(c, s, r, d.iota_s, c.q_d, opt.inner);
            inner_ok = inner_ok && ex.converged;
            return std::exp(-d.lambda_d2d * ex.value);
        };
        auto res = detail::small_cell_integral(k, d.iota_s, lap, opt.outer);
        out.converged = out.converged && res.converged;
        const double scale = mass / (assoc * k);
        out.error += scale * res.error;
        return std::clamp(scale * res.value, 0.0, 1.0);
    };

    {
        const double mass = c.q_ds * c.lambda_s;
        const double g = c.gamma_s_d;
        const double f = d.lam_d_s * delta_fn(g, c.alpha) + lam_t * ca * std::pow(c.q_s / c.p_s * g, e)
                       + (d.a_d_s > 0.0 ? mass / d.a_d_s : 0.0);
        out.dl = run(mass, d.a_d_s, f, g, c.p_s);
    }
    {
        const double mass = (1.0 - c.q_ds) * c.lambda_s;
        const double g = c.gamma_s_u;
        const double gg = ca * std::pow(g, e) * (d.lam_d_s * std::pow(c.p_s / c.q_s, e) + lam_t)
                        + (d.a_u_s > 0.0 ? mass / d.a_u_s : 0.0);
        out.ul = run(mass, d.a_u_s, gg, g, c.q_s);
    }
    out.converged = out.converged && inner_ok;
    return out;
}

inline TierCoverage coverage_small(const NetworkConfig& c, const AnalysisOptions& opt = {})
{
    return coverage_small(c, derive(c, opt), opt);
}

struct D2dCoverage
{
    std::optional<double> value;
    bool converged = true;
    double error = 0.0;
    std::vector<std::string> warnings;
};

inline D2dCoverage coverage_d2d(const NetworkConfig& c, const DerivedQuantities& d,
                                const AnalysisOptions& opt = {})
{
    D2dCoverage out;
    if (d.lambda_d2d == 0.0)
        return out;
    if (c.r_d > d.iota_s || c.r_d > d.iota_d)
        out.warnings.push_back("r_d exceeds an exclusion radius; D2D coverage is outside its approximation regime");
    const double s = c.gamma_d * std::pow(c.r_d, c.alpha) / c.q_d;
    auto i1 = d2d_exponent(c, s, c.r_d, d.iota_s, c.p_s, opt.inner);
    auto i2 = d2d_exponent(c, s, c.r_d, d.iota_s, c.q_s, opt.inner);
    auto i3 = d2d_exponent(c, s, c.r_d, d.iota_d, c.q_d, opt.inner);
    const double expo = d.lam_d_s * i1.value + d.lam_t(Tier::small) * i2.value + d.lambda_d2d * i3.value;
    out.value = std::exp(-expo);
    out.converged = i1.converged && i2.converged && i3.converged;
    out.error = *out.value
              * (d.lam_d_s * i1.error + d.lam_t(Tier::small) * i2.error + d.lambda_d2d * i3.error);
    return out;
}

inline D2dCoverage coverage_d2d(const NetworkConfig& c, const AnalysisOptions& opt = {})
{
    return coverage_d2d(c, derive(c, opt), opt);
}

namespace detail {

inline std::optional<double> mix(std::optional<double> p1, double a1, std::optional<double> p2, double a2)
{
    if (a1 + a2 == 0.0)
        return std::nullopt;
    return (a1 > 0.0 ? p1.value_or(0.0) * a1 : 0.0) + (a2 > 0.0 ? p2.value_or(0.0) * a2 : 0.0);
}

}  // namespace detail

inline CoverageReport coverage_overall(const NetworkConfig& c, const DerivedQuantities& d,
                                       const AnalysisOptions& opt = {})
{
    CoverageReport rep;
    auto mac = coverage_macro(c, d);
    auto sml = coverage_small(c, d, opt);
    auto dd = coverage_d2d(c, d, opt);
    rep.p_m_d = mac.dl;
    rep.p_m_u = mac.ul;
    rep.p_s_d = sml.dl;
    rep.p_s_u = sml.ul;
    rep.p_d2d = dd.value;
    rep.overall_d = detail::mix(mac.dl, d.a_d_m, sml.dl, d.a_d_s);
    rep.overall_u = detail::mix(mac.ul, d.a_u_m, sml.ul, d.a_u_s);
    rep.quadrature_converged = sml.converged && dd.converged;
    rep.quadrature_error = sml.error + dd.error;
    rep.warnings = validate(c).warnings;
    for (auto& w : dd.warnings)
        rep.warnings.push_back(w);
    if (!rep.quadrature_converged)
        rep.warnings.push_back("quadrature did not reach its tolerance");
    return rep;
}

inline CoverageReport coverage_overall(const NetworkConfig& c, const AnalysisOptions& opt = {})
{
    return coverage_overall(c, derive(c, opt), opt);
}

// ---------------------------------------------------------------------------
// Asymptotic closed forms for the small tier

struct AsymptoticCoverage
{
    std::optional<double> dl, ul;
    std::vector<std::string> warnings;
};

namespace detail {

inline AsymptoticCoverage small_closed_form(const NetworkConfig& c, const DerivedQuantities& d,
                                            double extra_dl, double extra_ul)
{
    const double e = 2.0 / c.alpha;
    const double ca = c_alpha(c.alpha);
    const double lam_t = d.lam_t(Tier::small);
    AsymptoticCoverage out;
    const double mass_d = c.q_ds * c.lambda_s;
    if (mass_d > 0.0 && d.a_d_s > 0.0) {
        const double g = c.gamma_s_d;
        const double den = d.lam_d_s * d.a_d_s * delta_fn(g, c.alpha)
                         + ca * std::pow(g, e) * d.a_d_s * (lam_t * std::pow(c.q_s / c.p_s, e) + extra_dl)
                         + mass_d;
        out.dl = mass_d / den;
    }
    const double mass_u = (1.0 - c.q_ds) * c.lambda_s;
    if (mass_u > 0.0 && d.a_u_s > 0.0) {
        const double g = c.gamma_s_u;
        const double den =
            ca * std::pow(g, e) * d.a_u_s * (d.lam_d_s * std::pow(c.p_s / c.q_s, e) + lam_t + extra_ul)
            + mass_u;
        out.ul = mass_u / den;
    }
    return out;
}

}  // namespace detail

/// Small-tier coverage in the limit where no D2D transmitter is active.
inline AsymptoticCoverage asymptotic_no_d2d(const NetworkConfig& c, const AnalysisOptions& opt = {})
{
    return detail::small_closed_form(c, derive(c, opt), 0.0, 0.0);
}

/// Small-tier coverage when D2D transmitters ignore the small cells and only
/// contend among themselves.
inline AsymptoticCoverage asymptotic_no_sensing(const NetworkConfig& c, const AnalysisOptions& opt = {})
{
    const auto d = derive(c, opt);
    const double e = 2.0 / c.alpha;
    const double norm = c.alpha / (2.0 * std::numbers::pi * std::tgamma(2.0 / c.alpha));
    const double extra_dl = norm * std::pow(c.rho_d / c.p_s, e);
    const double extra_ul = norm * std::pow(c.rho_d / c.q_s, e);
    auto out = detail::small_closed_form(c, d, extra_dl, extra_ul);
    const double x = c.zeta * c.lambda_u * d.k_od;
    if (x < 10.0)
        out.warnings.push_back("zeta*lambda_u*K_od = " + std::to_string(x)
                               + " < 10; the saturated-contention approximation is loose");
    return out;
}

// ---------------------------------------------------------------------------
// Throughput

struct ThroughputReport
{
    double t_m_d = 0, t_m_u = 0, t_s_d = 0, t_s_u = 0, t_d2d = 0;
    double total_d = 0, total_u = 0;
};

inline ThroughputReport throughput_from(const NetworkConfig& c, const DerivedQuantities& d,
                                        const CoverageReport& cov)
{
    ThroughputReport t;
    auto rate = [](double g) { return std::log2(1.0 + g); };
    t.t_m_d = d.lam_d_m * cov.p_m_d.value_or(0.0) * rate(c.gamma_m_d);
    t.t_m_u = d.lam_t(Tier::macro) * cov.p_m_u.value_or(0.0) * rate(c.gamma_m_u);
    t.t_s_d = d.lam_d_s * cov.p_s_d.value_or(0.0) * rate(c.gamma_s_d);
    t.t_s_u = d.lam_t(Tier::small) * cov.p_s_u.value_or(0.0) * rate(c.gamma_s_u);
    t.t_d2d = d.lambda_d2d * cov.p_d2d.value_or(0.0) * rate(c.gamma_d);
    t.total_d = c.eta * t.t_m_d + (1.0 - c.eta) * (t.t_s_d + 0.5 * t.t_d2d);
    t.total_u = c.eta * t.t_m_u + (1.0 - c.eta) * (t.t_s_u + 0.5 * t.t_d2d);
    return t;
}

inline ThroughputReport throughput(const NetworkConfig& c, const AnalysisOptions& opt = {})
{
    const auto d = derive(c, opt);
    return throughput_from(c, d, coverage_overall(c, d, opt));
}

}  // namespace tddnet
