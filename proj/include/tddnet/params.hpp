#pragma once

// Network configuration for the two-tier dynamic-TDD network with a
// CSMA-controlled D2D underlay. Everything in this header is in linear
// units: mW, meters, points per m^2. dBm/dB only appear at the I/O boundary.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace tddnet {

enum class Tier { macro, small };
enum class Mode { downlink, uplink };

inline const char* to_string(Tier t) { return t == Tier::macro ? "macro" : "small"; }
inline const char* to_string(Mode m) { return m == Mode::downlink ? "DL" : "UL"; }

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

inline bool is_set(double v) { return !std::isnan(v); }

// ---------------------------------------------------------------------------
// Unit conversions

inline void require_finite(double x, const char* what)
{
    if (!std::isfinite(x))
        throw std::domain_error(std::string(what) + ": non-finite input");
}

inline double db_to_linear(double x_db)
{
    require_finite(x_db, "db_to_linear");
    return std::pow(10.0, x_db / 10.0);
}

/// Zero maps to -inf dB (an "off" threshold).
inline double linear_to_db(double x)
{
    require_finite(x, "linear_to_db");
    if (x < 0.0)
        throw std::domain_error("linear_to_db: negative input");
    return 10.0 * std::log10(x);
}

inline double dbm_to_mw(double x_dbm) { return db_to_linear(x_dbm); }
inline double mw_to_dbm(double x_mw) { return linear_to_db(x_mw); }

// ---------------------------------------------------------------------------

struct NetworkConfig
{
    // densities, per m^2
    double lambda_m = 1.0 / (std::numbers::pi * 500.0 * 500.0);
    double lambda_s = kUnset;
    double lambda_u = kUnset;

    double alpha = 4.0;

    // transmit powers, mW
    double p_m = 0.0;  // MBS DL
    double p_s = 0.0;  // SAP DL
    double q_m = 0.0;  // macro user UL
    double q_s = 0.0;  // small-cell user UL
    double q_d = 0.0;  // D2D

    // UL/DL configuration: probability that a cell is in DL mode
    double q_dm = 0.5;
    double q_ds = 0.5;

    double b_dm = 1.0, b_ds = 1.0, b_um = 1.0, b_us = 1.0;

    // linear SIR thresholds
    double gamma_m_d = 1.0, gamma_m_u = 1.0, gamma_s_d = 1.0, gamma_s_u = 1.0;
    double gamma_d = 1.0;

    double r_d = 20.0;  // D2D link length, m

    double rho_s = 0.0;  // protection threshold, mW
    double rho_d = 0.0;  // contention threshold, mW
    double epsilon = 1e-5;

    double eta = kUnset;   // macro share of the bandwidth
    double zeta = kUnset;  // potential-D2D fraction of users
    double mu = 0.5;       // transmitting fraction of cellular users

    double rho_min = kUnset;  // receiver sensitivity, mW; no default

    double power_dl(Tier t) const { return t == Tier::macro ? p_m : p_s; }
    double power_ul(Tier t) const { return t == Tier::macro ? q_m : q_s; }
    double density(Tier t) const { return t == Tier::macro ? lambda_m : lambda_s; }
    double q_dl(Tier t) const { return t == Tier::macro ? q_dm : q_ds; }
    double bias_dl(Tier t) const { return t == Tier::macro ? b_dm : b_ds; }
    double bias_ul(Tier t) const { return t == Tier::macro ? b_um : b_us; }

    double gamma(Tier t, Mode m) const
    {
        if (t == Tier::macro)
            return m == Mode::downlink ? gamma_m_d : gamma_m_u;
        return m == Mode::downlink ? gamma_s_d : gamma_s_u;
    }

    /// Probability that a tier-t cell operates in mode m.
    double mode_prob(Tier t, Mode m) const
    {
        return m == Mode::downlink ? q_dl(t) : 1.0 - q_dl(t);
    }

    /// Transmit power of the serving transmitter on a tier-t link in mode m.
    double link_power(Tier t, Mode m) const
    {
        return m == Mode::downlink ? power_dl(t) : power_ul(t);
    }

    double bias(Tier t, Mode m) const { return m == Mode::downlink ? bias_dl(t) : bias_ul(t); }
};

/// Table I values. Scenario-dependent fields (lambda_s, lambda_u, eta, zeta)
/// stay unset and must be provided by the caller.
inline NetworkConfig default_config()
{
    NetworkConfig c;
    c.alpha = 4.0;
    c.lambda_m = 1.0 / (std::numbers::pi * 500.0 * 500.0);
    c.p_m = dbm_to_mw(46.0);
    c.q_m = dbm_to_mw(20.0);
    c.p_s = dbm_to_mw(26.0);
    c.q_s = dbm_to_mw(10.0);
    c.q_d = dbm_to_mw(0.0);
    c.gamma_m_d = c.gamma_m_u = c.gamma_s_d = c.gamma_s_u = c.gamma_d = db_to_linear(0.0);
    c.r_d = 20.0;
    c.rho_s = dbm_to_mw(-60.0);
    c.rho_d = dbm_to_mw(-60.0);
    c.mu = 0.5;
    c.epsilon = 1e-5;
    return c;
}

// ---------------------------------------------------------------------------

/// Parameters of tier k normalized by those of the serving tier i.
struct HatParams
{
    double lambda_hat, q_d_hat, q_u_hat, p_hat, q_hat, b_d_hat, b_u_hat;
};

inline HatParams hat_params(const NetworkConfig& c, Tier k, Tier i)
{
    auto ratio = [](double num, double den) {
        if (den == 0.0)
            throw std::domain_error("hat_params: serving-tier parameter is zero");
        return num / den;
    };
    return HatParams{
        ratio(c.density(k), c.density(i)),
        ratio(c.q_dl(k), c.q_dl(i)),
        ratio(1.0 - c.q_dl(k), 1.0 - c.q_dl(i)),
        ratio(c.power_dl(k), c.power_dl(i)),
        ratio(c.power_ul(k), c.power_ul(i)),
        ratio(c.bias_dl(k), c.bias_dl(i)),
        ratio(c.bias_ul(k), c.bias_ul(i)),
    };
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationOutcome
{
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }
};

/// Exclusion radius for a sensing threshold rho (mW); +inf when rho == 0.
inline double exclusion_radius(double rho, double q_d, double epsilon, double alpha)
{
    if (rho <= 0.0)
        return std::numeric_limits<double>::infinity();
    if (std::isinf(rho))
        return 0.0;
    return std::pow(-std::log(epsilon) / (rho / q_d), 1.0 / alpha);
}

inline ValidationOutcome validate(const NetworkConfig& c)
{
    ValidationOutcome out;
    auto err = [&](std::string s) { out.errors.push_back(std::move(s)); };
    auto warn = [&](std::string s) { out.warnings.push_back(std::move(s)); };

    auto required = [&](double v, const char* name) {
        if (!is_set(v)) {
            err(std::string(name) + ": required scenario parameter is not set");
            return false;
        }
        return true;
    };
    auto nonneg = [&](double v, const char* name) {
        if (required(v, name) && !(v >= 0.0 && std::isfinite(v)))
            err(std::string(name) + " must be a finite value >= 0");
    };
    auto positive = [&](double v, const char* name) {
        if (required(v, name) && !(v > 0.0 && std::isfinite(v)))
            err(std::string(name) + " must be > 0");
    };
    auto prob = [&](double v, const char* name) {
        if (required(v, name) && !(v >= 0.0 && v <= 1.0))
            err(std::string(name) + " must lie in [0,1]");
    };

    if (!(c.alpha > 2.0))
        err("alpha must exceed 2");

    nonneg(c.lambda_m, "lambda_m");
    nonneg(c.lambda_s, "lambda_s");
    nonneg(c.lambda_u, "lambda_u");

    positive(c.p_m, "p_m");
    positive(c.p_s, "p_s");
    positive(c.q_m, "q_m");
    positive(c.q_s, "q_s");
    positive(c.q_d, "q_d");

    prob(c.q_dm, "q_dm");
    prob(c.q_ds, "q_ds");
    prob(c.eta, "eta");
    prob(c.zeta, "zeta");
    prob(c.mu, "mu");

    positive(c.b_dm, "b_dm");
    positive(c.b_ds, "b_ds");
    positive(c.b_um, "b_um");
    positive(c.b_us, "b_us");

    positive(c.gamma_m_d, "gamma_m_d");
    positive(c.gamma_m_u, "gamma_m_u");
    positive(c.gamma_s_d, "gamma_s_d");
    positive(c.gamma_s_u, "gamma_s_u");
    positive(c.gamma_d, "gamma_d");

    if (!(c.r_d > 0.0 && std::isfinite(c.r_d)))
        err("r_d must be > 0");
    if (!(c.rho_s >= 0.0))
        err("rho_s must be >= 0");
    if (!(c.rho_d >= 0.0))
        err("rho_d must be >= 0");
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0))
        err("epsilon must lie in (0,1)");
    if (is_set(c.rho_min) && !(c.rho_min >= 0.0))
        err("rho_min must be >= 0");

    if (!out.ok())
        return out;

    // Degenerate but legal regimes.
    if (c.q_dm == 1.0)
        warn("macro UL mode empty (q_dm = 1)");
    if (c.q_dm == 0.0)
        warn("macro DL mode empty (q_dm = 0)");
    if (c.q_ds == 1.0)
        warn("small-cell UL mode empty (q_ds = 1)");
    if (c.q_ds == 0.0)
        warn("small-cell DL mode empty (q_ds = 0)");
    if (c.rho_s == 0.0)
        warn("rho_s = 0: every potential D2D transmitter is silenced");
    if (c.rho_d == 0.0)
        warn("rho_d = 0: D2D contention admits no transmitter");

    const double iota_s = exclusion_radius(c.rho_s, c.q_d, c.epsilon, c.alpha);
    const double iota_d = exclusion_radius(c.rho_d, c.q_d, c.epsilon, c.alpha);
    if (c.r_d > iota_s)
        warn("r_d exceeds the small-cell exclusion radius iota_s; D2D coverage leaves its approximation regime");
    if (c.r_d > iota_d)
        warn("r_d exceeds the D2D exclusion radius iota_d; D2D coverage leaves its approximation regime");
    return out;
}

}  // namespace tddnet
