#pragma once

// Data behind the coverage/throughput figures: each figure is a table with
// one swept parameter and named series, plus the parameters used.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "analytics.hpp"
#include "config_io.hpp"
#include "simulator.hpp"
#include "sweep.hpp"

namespace tddnet {

struct FigureOptions
{
    long iterations = 1000;
    int workers = 1;
    std::uint64_t seed = 1;
    bool simulate = true;
};

struct FigureTable
{
    std::string name, title, x_name, x_unit;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  // NaN for cells not computed
    json parameters = json::object();
    json notes = json::array();

    void write_csv(std::ostream& out) const
    {
        std::vector<std::string> head = {x_name};
        head.insert(head.end(), columns.begin(), columns.end());
        out << csv_line(head);
        for (const auto& r : rows) {
            std::vector<std::string> cells;
            for (double v : r)
                cells.push_back(csv_number(v));
            out << csv_line(cells);
        }
    }
};

namespace fig_detail {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

inline NetworkConfig caption_base(double lambda_s_x, double lambda_u_x, double zeta)
{
    auto c = default_config();
    c.lambda_s = lambda_s_x * c.lambda_m;
    c.lambda_u = lambda_u_x * c.lambda_m;
    c.zeta = zeta;
    c.eta = 0.5;
    return c;
}

inline double get(const std::optional<double>& v) { return v.value_or(nan); }

inline std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v;
    for (int i = 0; i < n; ++i)
        v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

inline json assumptions()
{
    return json::array({"eta = 0.5 where the caption gives none",
                        "zeta = 0.1 where the caption gives none"});
}

}  // namespace fig_detail

inline SimSettings figure_sim_settings(const FigureOptions& o, double window = 5000.0)
{
    SimSettings s;
    s.iterations = o.iterations;
    s.workers = o.workers;
    s.seed = o.seed;
    s.window = window;
    return s;
}

/// Small-cell and D2D coverage against the protection threshold rho_s.
inline FigureTable figure3(const FigureOptions& o)
{
    using namespace fig_detail;
    FigureTable t{"fig3", "coverage vs protection threshold", "rho_s_dbm", "dBm", {}, {}, {}, {}};
    auto c = caption_base(5, 100, 0.1);
    c.rho_d = dbm_to_mw(-60);
    t.columns = {"p_m_d", "p_m_u", "p_s_d", "p_s_u", "p_d2d", "beta"};
    if (o.simulate)
        for (const char* k : {"sim_p_s_d", "sim_p_s_u", "sim_p_d2d", "ci_half_p_s_d", "ci_half_p_s_u",
                              "ci_half_p_d2d", "sim_beta"})
            t.columns.push_back(k);
    const auto s = figure_sim_settings(o);
    for (double r = -100; r <= -20 + 1e-9; r += 5) {
        c.rho_s = dbm_to_mw(r);
        const auto d = derive(c);
        const auto cov = coverage_overall(c, d);
        std::vector<double> row = {r, get(cov.p_m_d), get(cov.p_m_u), get(cov.p_s_d), get(cov.p_s_u),
                                   get(cov.p_d2d), d.beta_ret};
        if (o.simulate) {
            if (std::fmod(std::abs(r), 20.0) == 0.0 || r == -30.0) {
                const auto res = simulate(c, s);
                const auto rep = coverage_report(res);
                for (double v : {get(rep.p_s_d), get(rep.p_s_u), get(rep.p_d2d), get(rep.ci.p_s_d),
                                 get(rep.ci.p_s_u), get(rep.ci.p_d2d), retention_fraction(res)})
                    row.push_back(v);
            } else {
                row.insert(row.end(), 7, nan);
            }
        }
        t.rows.push_back(row);
    }
    c.rho_s = kUnset;
    t.parameters = config_to_json(c);
    t.parameters["rho_s"] = "swept";
    if (o.simulate)
        t.parameters["simulation"] = sim_settings_to_json(s);
    t.notes = assumptions();
    return t;
}

/// Per-tier coverage against the small-cell UL/DL configuration.
inline FigureTable figure4(const FigureOptions&)
{
    using namespace fig_detail;
    FigureTable t{"fig4", "coverage vs small-cell DL probability", "q_ds", "", {}, {}, {}, {}};
    auto c = caption_base(5, 100, 0.1);
    c.rho_s = c.rho_d = dbm_to_mw(-60);
    t.columns = {"p_m_d", "p_m_u", "p_s_d", "p_s_u", "p_d2d", "overall_d", "overall_u"};
    for (double q : linspace(0.1, 0.9, 17)) {
        c.q_ds = q;
        const auto cov = coverage_overall(c);
        t.rows.push_back({q, get(cov.p_m_d), get(cov.p_m_u), get(cov.p_s_d), get(cov.p_s_u), get(cov.p_d2d),
                          get(cov.overall_d), get(cov.overall_u)});
    }
    t.parameters = config_to_json(c);
    t.parameters["q_ds"] = "swept";
    t.notes = json::array({"eta = 0.5 where the caption gives none"});
    return t;
}

/// DL coverage against small-cell density: per tier (a) and overall (b).
inline std::vector<FigureTable> figure5(const FigureOptions&)
{
    using namespace fig_detail;
    FigureTable a{"fig5a", "DL coverage per tier vs small-cell density", "lambda_s_over_lambda_m", "", {}, {}, {}, {}};
    FigureTable b{"fig5b", "overall DL coverage vs small-cell density", "lambda_s_over_lambda_m", "", {}, {}, {}, {}};
    auto c = caption_base(1, 1000, 0.1);
    c.rho_s = c.rho_d = dbm_to_mw(-60);
    a.columns = {"p_m_d", "p_s_d", "p_d2d"};
    b.columns = {"overall_d", "a_d_s", "pe_d_s"};
    for (int i = 0; i < 40; ++i) {
        const double x = std::pow(10.0, 3.0 * i / 39.0);
        c.lambda_s = x * c.lambda_m;
        const auto d = derive(c);
        const auto cov = coverage_overall(c, d);
        a.rows.push_back({x, get(cov.p_m_d), get(cov.p_s_d), get(cov.p_d2d)});
        b.rows.push_back({x, get(cov.overall_d), d.a_d_s, d.pe_d_s});
    }
    c.lambda_s = kUnset;
    for (auto* t : {&a, &b}) {
        t->parameters = config_to_json(c);
        t->parameters["lambda_s"] = "swept";
        t->notes = assumptions();
    }
    return {a, b};
}

/// Overall DL coverage against the small-cell DL bias, for two densities.
inline FigureTable figure6(const FigureOptions&)
{
    using namespace fig_detail;
    FigureTable t{"fig6", "overall DL coverage vs small-cell bias", "b_ds", "", {}, {}, {}, {}};
    auto c = caption_base(5, 1000, 0.01);
    c.rho_s = c.rho_d = dbm_to_mw(-60);
    const std::vector<double> dens = {5, 20};
    for (double ls : dens)
        t.columns.push_back("overall_d_ls" + std::to_string(static_cast<int>(ls)) + "x");
    for (int i = 0; i < 41; ++i) {
        const double b = std::pow(10.0, -2.0 + 4.0 * i / 40.0);
        std::vector<double> row = {b};
        for (double ls : dens) {
            NetworkConfig x = c;
            x.lambda_s = ls * c.lambda_m;
            x.b_ds = b;
            row.push_back(get(coverage_overall(x).overall_d));
        }
        t.rows.push_back(row);
    }
    c.lambda_s = kUnset;
    c.b_ds = kUnset;
    t.parameters = config_to_json(c);
    t.parameters["lambda_s"] = json::array({"5x", "20x"});
    t.parameters["b_ds"] = "swept";
    t.notes = json::array({"eta = 0.5 where the caption gives none"});
    return t;
}

inline NetworkConfig figure7_config()
{
    auto c = fig_detail::caption_base(100, 1e4, 0.1);
    c.rho_s = c.rho_d = dbm_to_mw(-20);
    return c;
}

/// Total throughput against rho_s (a, rho_d = -20 dBm) and rho_d (b, rho_s = -20 dBm).
inline std::vector<FigureTable> figure7(const FigureOptions&)
{
    using namespace fig_detail;
    FigureTable a{"fig7a", "throughput vs protection threshold", "rho_s_dbm", "dBm", {}, {}, {}, {}};
    FigureTable b{"fig7b", "throughput vs contention threshold", "rho_d_dbm", "dBm", {}, {}, {}, {}};
    const auto base = figure7_config();
    for (auto* t : {&a, &b})
        t->columns = {"total_d", "total_u", "t_s_d", "t_d2d", "beta"};
    for (int i = 0; i <= 40; ++i) {
        const double r = -100.0 + 2.5 * i;
        for (int which = 0; which < 2; ++which) {
            NetworkConfig c = base;
            (which == 0 ? c.rho_s : c.rho_d) = dbm_to_mw(r);
            const auto d = derive(c);
            const auto th = throughput_from(c, d, coverage_overall(c, d));
            (which == 0 ? a : b).rows.push_back({r, th.total_d, th.total_u, th.t_s_d, th.t_d2d, d.beta_ret});
        }
    }
    a.parameters = config_to_json(base);
    a.parameters["rho_s"] = "swept";
    b.parameters = config_to_json(base);
    b.parameters["rho_d"] = "swept";
    a.notes = b.notes = json::array({"eta = 0.5 where the caption gives none"});
    return {a, b};
}

// ---------------------------------------------------------------------------
// CSMA against ALOHA at matched activity

struct CsmaAlohaPoint
{
    double rho_s_dbm = 0.0;
    double beta_analytic = 0.0;
    double activity = 0.0;  // simulated CSMA retention, used as the ALOHA access probability
    CoverageReport csma, aloha;
    double t_d_csma = 0.0, t_d_aloha = 0.0;
};

inline constexpr double kFigure8Window = 1500.0;

inline std::vector<double> figure8_rho_grid() { return {-85, -80, -75, -70, -65, -60, -55, -50}; }

inline std::vector<CsmaAlohaPoint> csma_vs_aloha(const FigureOptions& o)
{
    std::vector<CsmaAlohaPoint> out;
    const auto s = figure_sim_settings(o, kFigure8Window);
    for (double r : figure8_rho_grid()) {
        auto c = figure7_config();
        c.rho_s = dbm_to_mw(r);
        CsmaAlohaPoint p;
        p.rho_s_dbm = r;
        const auto d = derive(c);
        p.beta_analytic = d.beta_ret;
        const auto cs = simulate(c, s);
        p.activity = retention_fraction(cs);
        p.csma = coverage_report(cs);
        p.aloha = coverage_report(simulate(c, s, std::clamp(p.activity, 1e-12, 1.0)));
        // DL throughput from simulated coverage and the simulated D2D activity
        auto tp = [&](const CoverageReport& rep) {
            CoverageReport x = rep;
            DerivedQuantities dq = d;
            dq.lambda_d2d = p.activity * c.zeta * c.lambda_u;
            return throughput_from(c, dq, x).total_d;
        };
        p.t_d_csma = tp(p.csma);
        p.t_d_aloha = tp(p.aloha);
        out.push_back(p);
    }
    return out;
}

inline FigureTable figure8(const FigureOptions& o)
{
    using namespace fig_detail;
    FigureTable t{"fig8", "CSMA vs ALOHA at matched D2D activity", "rho_s_dbm", "dBm", {}, {}, {}, {}};
    t.columns = {"beta_analytic", "activity", "csma_p_s_d", "aloha_p_s_d", "csma_p_s_u", "aloha_p_s_u",
                 "csma_p_d2d", "aloha_p_d2d", "ci_csma_p_s_d", "ci_aloha_p_s_d", "ci_csma_p_s_u",
                 "ci_aloha_p_s_u", "ci_csma_p_d2d", "ci_aloha_p_d2d", "csma_total_d", "aloha_total_d"};
    if (o.simulate)
        for (const auto& p : csma_vs_aloha(o))
            t.rows.push_back({p.rho_s_dbm, p.beta_analytic, p.activity, get(p.csma.p_s_d), get(p.aloha.p_s_d),
                              get(p.csma.p_s_u), get(p.aloha.p_s_u), get(p.csma.p_d2d), get(p.aloha.p_d2d),
                              get(p.csma.ci.p_s_d), get(p.aloha.ci.p_s_d), get(p.csma.ci.p_s_u),
                              get(p.aloha.ci.p_s_u), get(p.csma.ci.p_d2d), get(p.aloha.ci.p_d2d), p.t_d_csma,
                              p.t_d_aloha});
    auto c = figure7_config();
    c.rho_s = kUnset;
    t.parameters = config_to_json(c);
    t.parameters["rho_s"] = "swept";
    t.parameters["simulation"] = sim_settings_to_json(figure_sim_settings(o, kFigure8Window));
    t.notes = json::array({"eta = 0.5 where the caption gives none",
                           "ALOHA access probability set to the simulated CSMA retention fraction",
                           "window reduced to 1500 m to keep 10^4 users per macro area tractable"});
    return t;
}

inline const std::vector<std::string>& figure_names()
{
    static const std::vector<std::string> n = {"fig3", "fig4", "fig5", "fig6", "fig7", "fig8"};
    return n;
}

inline std::vector<FigureTable> make_figure(const std::string& name, const FigureOptions& o)
{
    if (name == "fig3")
        return {figure3(o)};
    if (name == "fig4")
        return {figure4(o)};
    if (name == "fig5")
        return figure5(o);
    if (name == "fig6")
        return {figure6(o)};
    if (name == "fig7")
        return figure7(o);
    if (name == "fig8")
        return {figure8(o)};
    throw std::invalid_argument("unknown figure " + name);
}

}  // namespace tddnet
