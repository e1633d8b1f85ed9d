#pragma once

// JSON configuration files. Keys mirror NetworkConfig. Powers and sensing
// thresholds are in dBm, SIR thresholds in dB, densities either per m^2 or
// as a multiple of lambda_m written "5x". Everything else is linear.

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "params.hpp"

namespace tddnet {

using json = nlohmann::json;

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class FieldUnit { linear, dbm, db, density };

struct FieldInfo
{
    const char* name;
    FieldUnit unit;
    double NetworkConfig::*member;
};

inline const std::vector<FieldInfo>& config_fields()
{
    static const std::vector<FieldInfo> f = {
        {"lambda_m", FieldUnit::density, &NetworkConfig::lambda_m},
        {"lambda_s", FieldUnit::density, &NetworkConfig::lambda_s},
        {"lambda_u", FieldUnit::density, &NetworkConfig::lambda_u},
        {"alpha", FieldUnit::linear, &NetworkConfig::alpha},
        {"p_m", FieldUnit::dbm, &NetworkConfig::p_m},
        {"p_s", FieldUnit::dbm, &NetworkConfig::p_s},
        {"q_m", FieldUnit::dbm, &NetworkConfig::q_m},
        {"q_s", FieldUnit::dbm, &NetworkConfig::q_s},
        {"q_d", FieldUnit::dbm, &NetworkConfig::q_d},
        {"q_dm", FieldUnit::linear, &NetworkConfig::q_dm},
        {"q_ds", FieldUnit::linear, &NetworkConfig::q_ds},
        {"b_dm", FieldUnit::linear, &NetworkConfig::b_dm},
        {"b_ds", FieldUnit::linear, &NetworkConfig::b_ds},
        {"b_um", FieldUnit::linear, &NetworkConfig::b_um},
        {"b_us", FieldUnit::linear, &NetworkConfig::b_us},
        {"gamma_m_d", FieldUnit::db, &NetworkConfig::gamma_m_d},
        {"gamma_m_u", FieldUnit::db, &NetworkConfig::gamma_m_u},
        {"gamma_s_d", FieldUnit::db, &NetworkConfig::gamma_s_d},
        {"gamma_s_u", FieldUnit::db, &NetworkConfig::gamma_s_u},
        {"gamma_d", FieldUnit::db, &NetworkConfig::gamma_d},
        {"r_d", FieldUnit::linear, &NetworkConfig::r_d},
        {"rho_s", FieldUnit::dbm, &NetworkConfig::rho_s},
        {"rho_d", FieldUnit::dbm, &NetworkConfig::rho_d},
        {"rho_min", FieldUnit::dbm, &NetworkConfig::rho_min},
        {"epsilon", FieldUnit::linear, &NetworkConfig::epsilon},
        {"eta", FieldUnit::linear, &NetworkConfig::eta},
        {"zeta", FieldUnit::linear, &NetworkConfig::zeta},
        {"mu", FieldUnit::linear, &NetworkConfig::mu},
    };
    return f;
}

inline const FieldInfo* find_field(const std::string& name)
{
    for (const auto& f : config_fields())
        if (name == f.name)
            return &f;
    return nullptr;
}

/// Converts one value given in file units to the internal linear value.
/// dBm fields accept "off" (0 mW) and "inf"; densities accept "<k>x".
inline double field_from_json(const FieldInfo& f, const json& v, double lambda_m)
{
    const std::string key = f.name;
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (f.unit == FieldUnit::density && !s.empty() && s.back() == 'x') {
            try {
                std::size_t used = 0;
                const double k = std::stod(s.substr(0, s.size() - 1), &used);
                if (used != s.size() - 1)
                    throw std::invalid_argument(s);
                return k * lambda_m;
            } catch (const std::exception&) {
                throw ConfigError(key + ": cannot parse density \"" + s + "\"");
            }
        }
        if (f.unit == FieldUnit::dbm && s == "off")
            return 0.0;
        if (f.unit == FieldUnit::dbm && s == "inf")
            return std::numeric_limits<double>::infinity();
        throw ConfigError(key + ": unexpected string \"" + s + "\"");
    }
    if (!v.is_number())
        throw ConfigError(key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        throw ConfigError(key + ": value must be finite");
    switch (f.unit) {
    case FieldUnit::dbm: return dbm_to_mw(x);
    case FieldUnit::db: return db_to_linear(x);
    default: return x;
    }
}

inline json field_to_json(const FieldInfo& f, double v)
{
    if (!is_set(v))
        return nullptr;
    switch (f.unit) {
    case FieldUnit::dbm:
        if (v == 0.0)
            return "off";
        if (std::isinf(v))
            return "inf";
        return mw_to_dbm(v);
    case FieldUnit::db: return linear_to_db(v);
    default: return v;
    }
}

/// Applies a flat JSON object on top of base. lambda_m is read first so
/// "5x" densities refer to the file's own macro density.
inline NetworkConfig config_from_json(const json& j, NetworkConfig base = default_config())
{
    if (!j.is_object())
        throw ConfigError("config: expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!find_field(it.key()))
            throw ConfigError(it.key() + ": unknown configuration field");
    if (j.contains("lambda_m")) {
        const auto* f = find_field("lambda_m");
        if (j["lambda_m"].is_string())
            throw ConfigError("lambda_m: must be an absolute density");
        base.lambda_m = field_from_json(*f, j["lambda_m"], base.lambda_m);
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "lambda_m")
            continue;
        const auto* f = find_field(it.key());
        base.*(f->member) = field_from_json(*f, it.value(), base.lambda_m);
    }
    return base;
}

inline json config_to_json(const NetworkConfig& c)
{
    json j = json::object();
    for (const auto& f : config_fields())
        j[f.name] = field_to_json(f, c.*(f.member));
    return j;
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline NetworkConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

/// Sets one field from a value in file units (used by sweeps).
inline void set_field(NetworkConfig& c, const std::string& name, const json& v)
{
    const auto* f = find_field(name);
    if (!f)
        throw ConfigError(name + ": unknown configuration field");
    c.*(f->member) = field_from_json(*f, v, c.lambda_m);
}

}  // namespace tddnet
