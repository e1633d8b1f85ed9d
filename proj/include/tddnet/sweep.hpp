#pragma once

// One-parameter sweeps over a configuration, evaluated analytically, by
// simulation, or both, written as CSV.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "analytics.hpp"
#include "config_io.hpp"
#include "simulator.hpp"

namespace tddnet {

enum class Engine { analytic, simulate, both };

struct SweepSpec
{
    std::string param;
    std::vector<json> values;  // in file units, as a config would hold them
    Engine engine = Engine::analytic;
    std::vector<std::string> outputs;
    NetworkConfig base;
    SimSettings sim;
};

inline const std::vector<std::string>& sweep_outputs()
{
    static const std::vector<std::string> v = {"p_m_d",  "p_m_u",  "p_s_d",  "p_s_u",   "p_d2d",   "overall_d",
                                               "overall_u", "t_m_d", "t_m_u", "t_s_d",  "t_s_u",   "t_d2d",
                                               "total_d", "total_u", "beta",  "lambda_d"};
    return v;
}

// Outputs the simulator can estimate.
inline bool simulated_output(const std::string& name)
{
    for (const char* k : {"p_m_d", "p_m_u", "p_s_d", "p_s_u", "p_d2d", "overall_d", "overall_u", "beta", "lambda_d"})
        if (name == k)
            return true;
    return false;
}

inline bool has_ci(const std::string& name) { return name.rfind("p_", 0) == 0 || name.rfind("overall_", 0) == 0; }

inline SimSettings sim_settings_from_json(const json& j, SimSettings s = {})
{
    if (!j.is_object())
        throw ConfigError("simulation: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        const auto& v = it.value();
        if (k == "iterations")
            s.iterations = v.get<long>();
        else if (k == "window")
            s.window = v.get<double>();
        else if (k == "seed")
            s.seed = v.get<std::uint64_t>();
        else if (k == "workers")
            s.workers = v.get<int>();
        else if (k == "image_rings")
            s.image_rings = v.get<int>();
        else if (k == "max_probes")
            s.max_probes = v.get<int>();
        else if (k == "toroidal")
            s.toroidal = v.get<bool>();
        else
            throw ConfigError("simulation." + k + ": unknown setting");
    }
    if (s.iterations < 1 || s.window <= 0.0 || s.workers < 1 || s.image_rings < 0 || s.max_probes < 1)
        throw ConfigError("simulation: settings out of range");
    return s;
}

inline json sim_settings_to_json(const SimSettings& s)
{
    return json{{"iterations", s.iterations}, {"window", s.window},         {"seed", s.seed},
                {"workers", s.workers},       {"image_rings", s.image_rings}, {"max_probes", s.max_probes},
                {"toroidal", s.toroidal}};
}

/// Parses a sweep file. "config" is an inline object or a path resolved
/// against base_dir. Values come as a list or as a range
/// {"start", "stop", "count", "scale": "lin" | "log"}; "relative": true
/// reads density values as multiples of lambda_m.
inline SweepSpec sweep_from_json(const json& j, const std::string& base_dir = ".")
{
    SweepSpec s;
    if (!j.is_object())
        throw ConfigError("sweep: expected a JSON object");
    try {
        if (!j.contains("param"))
            throw ConfigError("sweep.param: missing");
        s.param = j.at("param").get<std::string>();
        const auto* f = find_field(s.param);
        if (!f)
            throw ConfigError("sweep.param: " + s.param + " is not a configuration field");

        json cfg = json::object();
        if (j.contains("config")) {
            if (j["config"].is_string()) {
                std::string p = j["config"].get<std::string>();
                if (!p.empty() && p[0] != '/')
                    p = base_dir + "/" + p;
                cfg = read_json_file(p);
            } else {
                cfg = j["config"];
            }
        }
        s.base = config_from_json(cfg);

        const bool relative = j.value("relative", false);
        if (relative && f->unit != FieldUnit::density)
            throw ConfigError("sweep.relative: only applies to densities");
        auto wrap = [&](double v) -> json {
            if (relative) {
                std::ostringstream os;
                os.precision(17);
                os << v << "x";
                return os.str();
            }
            return v;
        };
        if (j.contains("values")) {
            for (const auto& v : j["values"])
                s.values.push_back(v.is_number() ? wrap(v.get<double>()) : v);
        } else if (j.contains("range")) {
            const auto& r = j["range"];
            const double a = r.at("start").get<double>(), b = r.at("stop").get<double>();
            const int n = r.at("count").get<int>();
            const std::string scale = r.value("scale", "lin");
            if (n < 2)
                throw ConfigError("sweep.range.count: must be >= 2");
            if (scale != "lin" && scale != "log")
                throw ConfigError("sweep.range.scale: lin or log");
            if (scale == "log" && !(a > 0.0 && b > 0.0))
                throw ConfigError("sweep.range: log scale needs positive bounds");
            for (int i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / (n - 1);
                s.values.push_back(wrap(scale == "lin" ? a + t * (b - a) : a * std::pow(b / a, t)));
            }
        } else {
            throw ConfigError("sweep: needs values or range");
        }
        if (s.values.size() < 2)
            throw ConfigError("sweep.values: need at least two points");

        const std::string engine = j.value("engine", "analytic");
        if (engine == "analytic")
            s.engine = Engine::analytic;
        else if (engine == "simulate")
            s.engine = Engine::simulate;
        else if (engine == "both")
            s.engine = Engine::both;
        else
            throw ConfigError("sweep.engine: analytic, simulate or both");

        if (j.contains("outputs")) {
            for (const auto& o : j["outputs"]) {
                const auto name = o.get<std::string>();
                bool known = false;
                for (const auto& k : sweep_outputs())
                    known = known || k == name;
                if (!known)
                    throw ConfigError("sweep.outputs: unknown output " + name);
                if (s.engine == Engine::simulate && !simulated_output(name))
                    throw ConfigError("sweep.outputs: " + name + " has no simulated estimate");
                s.outputs.push_back(name);
            }
        } else {
            s.outputs = {"p_m_d", "p_m_u", "p_s_d", "p_s_u", "p_d2d", "overall_d", "overall_u"};
        }
        if (j.contains("simulation"))
            s.sim = sim_settings_from_json(j["simulation"]);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("sweep: ") + e.what());
    }
    return s;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_quote(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + "\"";
}

inline std::string csv_number(double v)
{
    if (std::isnan(v))
        return "";
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

inline std::string csv_line(const std::vector<std::string>& cells)
{
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            out += ',';
        out += csv_quote(cells[i]);
    }
    return out + "\r\n";
}

inline std::string json_scalar_text(const json& v)
{
    if (v.is_string())
        return v.get<std::string>();
    std::ostringstream os;
    os.precision(10);
    os << v.get<double>();
    return os.str();
}

// ---------------------------------------------------------------------------

struct PointValues
{
    std::map<std::string, double> analytic, simulated, ci;
};

inline double analytic_output(const std::string& name, const CoverageReport& cov, const ThroughputReport& t,
                              const DerivedQuantities& d)
{
    for (int i = 0; i < 7; ++i)
        if (name == CoverageReport::kFieldNames[i])
            return cov.field(i).value_or(std::numeric_limits<double>::quiet_NaN());
    if (name == "t_m_d") return t.t_m_d;
    if (name == "t_m_u") return t.t_m_u;
    if (name == "t_s_d") return t.t_s_d;
    if (name == "t_s_u") return t.t_s_u;
    if (name == "t_d2d") return t.t_d2d;
    if (name == "total_d") return t.total_d;
    if (name == "total_u") return t.total_u;
    if (name == "beta") return d.beta_ret;
    if (name == "lambda_d") return d.lambda_d2d;
    return std::numeric_limits<double>::quiet_NaN();
}

/// Header of the sweep CSV: depends only on the sweep definition.
inline std::vector<std::string> sweep_header(const SweepSpec& s)
{
    std::vector<std::string> h = {"swept_param", "value"};
    for (const auto& o : s.outputs) {
        if (s.engine != Engine::simulate)
            h.push_back(o);
        if (s.engine != Engine::analytic && simulated_output(o))
            h.push_back(s.engine == Engine::both ? "sim_" + o : o);
    }
    if (s.engine != Engine::analytic)
        for (const auto& o : s.outputs)
            if (simulated_output(o) && has_ci(o))
                h.push_back("ci_half_" + o);
    h.push_back("status");
    return h;
}

/// Runs the sweep, writing one CSV row per value. Failed points keep their
/// row with empty cells and a status message. Returns the number of
/// failed points.
inline int run_sweep(const SweepSpec& s, std::ostream& out)
{
    out << csv_line(sweep_header(s));
    int failures = 0;
    for (const auto& v : s.values) {
        std::vector<std::string> row = {s.param, json_scalar_text(v)};
        PointValues pv;
        std::string status = "ok";
        try {
            NetworkConfig c = s.base;
            set_field(c, s.param, v);
            require_valid(c);
            if (s.engine != Engine::simulate) {
                const auto d = derive(c);
                const auto cov = coverage_overall(c, d);
                const auto t = throughput_from(c, d, cov);
                for (const auto& o : s.outputs)
                    pv.analytic[o] = analytic_output(o, cov, t, d);
                if (!cov.quadrature_converged)
                    status = "quadrature not converged";
            }
            if (s.engine != Engine::analytic) {
                const auto res = simulate(c, s.sim);
                const auto rep = coverage_report(res);
                for (const auto& o : s.outputs) {
                    if (!simulated_output(o))
                        continue;
                    double val = std::numeric_limits<double>::quiet_NaN();
                    if (o == "beta")
                        val = retention_fraction(res);
                    else if (o == "lambda_d")
                        val = static_cast<double>(res.retained_d2d) / res.area();
                    else
                        for (int i = 0; i < 7; ++i)
                            if (o == CoverageReport::kFieldNames[i]) {
                                val = rep.field(i).value_or(val);
                                pv.ci[o] = rep.ci_field(i).value_or(std::numeric_limits<double>::quiet_NaN());
                            }
                    pv.simulated[o] = val;
                }
                if (has_insufficient_samples(rep) && status == "ok")
                    status = "insufficient samples";
            }
        } catch (const std::exception& e) {
            status = std::string("error: ") + e.what();
            ++failures;
        }
        auto get = [](const std::map<std::string, double>& m, const std::string& k) {
            auto it = m.find(k);
            return csv_number(it == m.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
        };
        for (const auto& o : s.outputs) {
            if (s.engine != Engine::simulate)
                row.push_back(get(pv.analytic, o));
            if (s.engine != Engine::analytic && simulated_output(o))
                row.push_back(get(pv.simulated, o));
        }
        if (s.engine != Engine::analytic)
            for (const auto& o : s.outputs)
                if (simulated_output(o) && has_ci(o))
                    row.push_back(get(pv.ci, o));
        row.push_back(status);
        out << csv_line(row);
    }
    return failures;
}

}  // namespace tddnet
