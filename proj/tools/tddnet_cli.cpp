// Command-line front end: coverage reports, sweeps, optimizers and figure data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tddnet/analytics.hpp"
#include "tddnet/config_io.hpp"
#include "tddnet/figures.hpp"
#include "tddnet/optimizer.hpp"
#include "tddnet/simulator.hpp"
#include "tddnet/sweep.hpp"

using namespace tddnet;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;
constexpr int kExitValidation = 2;
constexpr int kExitQuadrature = 3;
constexpr int kExitSamples = 4;

struct Failure
{
    int code;
    std::string message;
};

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json coverage_json(const CoverageReport& r, bool with_ci)
{
    json cov = json::object(), ci = json::object();
    for (int i = 0; i < 7; ++i) {
        cov[CoverageReport::kFieldNames[i]] = opt_json(r.field(i));
        ci[CoverageReport::kFieldNames[i]] = opt_json(r.ci_field(i));
    }
    json j{{"coverage", cov}, {"warnings", r.warnings}};
    if (with_ci)
        j["ci_half"] = ci;
    return j;
}

json throughput_json(const ThroughputReport& t)
{
    return json{{"t_m_d", t.t_m_d}, {"t_m_u", t.t_m_u},     {"t_s_d", t.t_s_d},    {"t_s_u", t.t_s_u},
                {"t_d2d", t.t_d2d}, {"total_d", t.total_d}, {"total_u", t.total_u}};
}

json derived_json(const DerivedQuantities& d)
{
    return json{{"a_d_m", d.a_d_m},   {"a_d_s", d.a_d_s},       {"a_u_m", d.a_u_m},   {"a_u_s", d.a_u_s},
                {"pe_d_m", d.pe_d_m}, {"pe_d_s", d.pe_d_s},     {"pe_u_m", d.pe_u_m}, {"pe_u_s", d.pe_u_s},
                {"iota_s", d.iota_s}, {"iota_d", d.iota_d},     {"beta", d.beta_ret}, {"lambda_d", d.lambda_d2d},
                {"fully_loaded", d.fully_loaded}};
}

NetworkConfig load_valid_config(const std::string& path)
{
    NetworkConfig c;
    try {
        c = load_config(path);
    } catch (const ConfigError& e) {
        throw Failure{kExitValidation, e.what()};
    }
    const auto v = validate(c);
    if (!v.ok()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : v.errors)
            msg += "\n  " + e;
        throw Failure{kExitValidation, msg};
    }
    for (const auto& w : v.warnings)
        std::cerr << "warning: " << w << "\n";
    return c;
}

void emit(const std::string& out_path, const std::string& text)
{
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f)
        throw Failure{1, "cannot write " + out_path};
    f << text;
}

struct Common
{
    std::string config, out;
    bool simulate = false;
    std::uint64_t seed = 1;
    long iterations = 0;  // 0 keeps the command's default
    int workers = 1;
};

SimSettings sim_from(const Common& o, long default_iterations)
{
    SimSettings s;
    s.seed = o.seed;
    s.workers = o.workers;
    s.iterations = o.iterations > 0 ? o.iterations : default_iterations;
    return s;
}

int cmd_coverage(const Common& o, double window)
{
    const auto c = load_valid_config(o.config);
    const auto d = derive(c);
    const auto an = coverage_overall(c, d);
    json j{{"schema_version", kSchemaVersion}, {"command", "coverage"}, {"config", config_to_json(c)}};
    j["analytic"] = coverage_json(an, false);
    j["analytic"]["throughput"] = throughput_json(throughput_from(c, d, an));
    j["analytic"]["derived"] = derived_json(d);
    j["analytic"]["quadrature"] = {{"converged", an.quadrature_converged}, {"error_estimate", an.quadrature_error}};

    int code = 0;
    if (o.simulate) {
        auto s = sim_from(o, 1000);
        s.window = window;
        const auto res = simulate(c, s);
        const auto rep = coverage_report(res);
        j["simulated"] = coverage_json(rep, true);
        j["simulated"]["beta"] = retention_fraction(res);
        j["simulated"]["settings"] = sim_settings_to_json(s);
        json probes = json::object();
        for (int k = 0; k < kProbeKinds; ++k)
            probes[to_string(static_cast<ProbeKind>(k))] = res.probes[static_cast<std::size_t>(k)].probes;
        j["simulated"]["probes"] = probes;
        json rel = json::object();
        for (int i = 0; i < 7; ++i) {
            const auto a = an.field(i), b = rep.field(i);
            rel[CoverageReport::kFieldNames[i]] =
                (a && b && *a != 0.0) ? json(std::abs(*b - *a) / std::abs(*a)) : json(nullptr);
        }
        j["relative_error"] = rel;
        if (has_insufficient_samples(rep)) {
            std::cerr << "error: insufficient simulation samples\n";
            code = kExitSamples;
        }
    }
    if (!an.quadrature_converged) {
        std::cerr << "error: quadrature did not converge (error estimate " << an.quadrature_error << ")\n";
        code = kExitQuadrature;
    }
    emit(o.out, j.dump(2) + "\n");
    return code;
}

int cmd_sweep(const Common& o, const std::string& sweep_path)
{
    SweepSpec spec;
    try {
        spec = sweep_from_json(read_json_file(sweep_path), fs::path(sweep_path).parent_path().string().empty()
                                                               ? std::string(".")
                                                               : fs::path(sweep_path).parent_path().string());
    } catch (const ConfigError& e) {
        throw Failure{kExitValidation, e.what()};
    }
    if (o.simulate && spec.engine == Engine::analytic)
        spec.engine = Engine::both;
    spec.sim.seed = o.seed;
    spec.sim.workers = o.workers;
    if (o.iterations > 0)
        spec.sim.iterations = o.iterations;
    else if (spec.engine != Engine::analytic && spec.sim.iterations == SimSettings{}.iterations)
        spec.sim.iterations = 1000;
    std::ostringstream csv;
    const int failed = run_sweep(spec, csv);
    emit(o.out, csv.str());
    if (failed > 0)
        std::cerr << failed << " sweep point(s) failed; see the status column\n";
    return 0;
}

json grid_check_json(const std::optional<GridCheck>& g)
{
    if (!g)
        return nullptr;
    json j{{"grid_argmax", g->argmax}, {"grid_objective", g->objective}, {"grid_step", g->step},
           {"within_one_step", g->agrees}, {"note", g->note}};
    if (g->printed) {
        j["printed_formula_value"] = *g->printed;
        j["printed_formula_within_one_step"] = g->printed_agrees;
    }
    return j;
}

int cmd_optimize(const Common& o, const std::string& target, const std::string& tier_s, const std::string& mode_s)
{
    auto c = load_valid_config(o.config);
    const Tier tier = tier_s == "macro" ? Tier::macro : Tier::small;
    const Mode mode = mode_s == "ul" ? Mode::uplink : Mode::downlink;
    OptimizationResult r;
    try {
        if (target == "uldl")
            r = optimal_uldl_config(c, tier, mode);
        else if (target == "density")
            r = optimal_density(c, mode);
        else if (target == "bias")
            r = optimal_bias(c, mode);
        else if (target == "bandwidth")
            r = optimal_bandwidth(c);
        else
            r = optimal_sensing(c, mode == Mode::uplink ? SensingObjective::ul_throughput
                                                        : SensingObjective::dl_throughput);
    } catch (const std::invalid_argument& e) {
        throw Failure{kExitValidation, e.what()};
    }
    json args = json::object();
    for (const auto& [k, v] : r.arguments) {
        args[k] = v;
        if (k == "rho_s" || k == "rho_d")
            args[k + "_dbm"] = mw_to_dbm(v);
    }
    json j{{"schema_version", kSchemaVersion},
           {"command", "optimize"},
           {"target", r.target},
           {"method", r.method},
           {"arguments", args},
           {"objective", {{"name", r.objective_name}, {"value", r.objective}}},
           {"regime", r.regime},
           {"grid_step", opt_json(r.grid_step)},
           {"q_bar", opt_json(r.q_bar)},
           {"check", grid_check_json(r.check)},
           {"warnings", r.warnings}};
    if (target == "sensing") {
        // boundary check: the optimum is no worse than either end of the domain
        bool ok = true;
        for (const char* which : {"rho_s", "rho_d"})
            for (double e : {c.rho_min, c.q_d}) {
                NetworkConfig x = c;
                x.rho_s = r.argument("rho_s");
                x.rho_d = r.argument("rho_d");
                (std::string(which) == "rho_s" ? x.rho_s : x.rho_d) = e;
                const auto t = throughput(x);
                const double v = mode == Mode::uplink ? t.total_u : t.total_d;
                ok = ok && r.objective >= v * (1.0 - 1e-9);
            }
        j["check"] = {{"boundary_check_passed", ok}};
    }
    emit(o.out, j.dump(2) + "\n");
    return 0;
}

int cmd_figures(const Common& o, bool full, const std::vector<std::string>& only)
{
    const fs::path dir = o.out.empty() ? fs::path("figures") : fs::path(o.out);
    fs::create_directories(dir);
    FigureOptions fo;
    fo.iterations = o.iterations > 0 ? o.iterations : (full ? 10000 : 1000);
    fo.workers = o.workers;
    fo.seed = o.seed;
    json manifest{{"schema_version", kSchemaVersion}, {"iterations", fo.iterations}, {"seed", fo.seed},
                  {"figures", json::array()}};
    int failures = 0;
    for (const auto& name : figure_names()) {
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end())
            continue;
        std::cerr << "generating " << name << "\n";
        try {
            for (const auto& t : make_figure(name, fo)) {
                std::ofstream f(dir / (t.name + ".csv"), std::ios::binary);
                t.write_csv(f);
                manifest["figures"].push_back({{"name", t.name},
                                               {"file", t.name + ".csv"},
                                               {"title", t.title},
                                               {"x", t.x_name},
                                               {"columns", t.columns},
                                               {"parameters", t.parameters},
                                               {"notes", t.notes}});
            }
        } catch (const std::exception& e) {
            std::cerr << name << " failed: " << e.what() << "\n";
            manifest["figures"].push_back({{"name", name}, {"error", e.what()}});
            ++failures;
        }
    }
    std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Coverage, throughput and optimizers for two-tier dynamic-TDD networks with D2D underlay"};
    app.require_subcommand(1);
    Common o;
    auto add_common = [&](CLI::App* sc, bool needs_config) {
        auto* opt = sc->add_option("--config", o.config, "network configuration (JSON)");
        if (needs_config)
            opt->required()->check(CLI::ExistingFile);
        sc->add_option("--out", o.out, "output file (default stdout)");
        sc->add_option("--seed", o.seed, "simulation seed");
        sc->add_option("--iterations", o.iterations, "simulation iterations")->check(CLI::PositiveNumber);
        sc->add_option("--workers", o.workers, "simulation threads")->check(CLI::PositiveNumber);
    };

    auto* cov = app.add_subcommand("coverage", "analytic coverage report, optionally with simulation");
    add_common(cov, true);
    double window = 5000.0;
    cov->add_flag("--simulate", o.simulate, "also run the Monte Carlo simulator");
    cov->add_option("--window", window, "simulation window side in meters")->check(CLI::PositiveNumber);

    auto* sw = app.add_subcommand("sweep", "one-parameter sweep to CSV");
    add_common(sw, false);
    std::string sweep_path;
    sw->add_option("--sweep", sweep_path, "sweep specification (JSON)")->required()->check(CLI::ExistingFile);
    sw->add_flag("--simulate", o.simulate, "add simulated columns");

    auto* op = app.add_subcommand("optimize", "closed-form and numerical optimizers");
    add_common(op, true);
    std::string target, tier = "small", mode = "dl";
    op->add_option("--target", target, "uldl | density | bias | bandwidth | sensing")
        ->required()
        ->check(CLI::IsMember({"uldl", "density", "bias", "bandwidth", "sensing"}));
    op->add_option("--tier", tier, "tier for uldl")->check(CLI::IsMember({"macro", "small"}));
    op->add_option("--mode", mode, "dl or ul")->check(CLI::IsMember({"dl", "ul"}));

    auto* fg = app.add_subcommand("figures", "CSV data for the coverage and throughput figures");
    add_common(fg, false);
    bool full = false;
    std::vector<std::string> only;
    fg->add_flag("--full", full, "10^4 iterations instead of 10^3");
    fg->add_option("--only", only, "subset of figures")->delimiter(',')->check(CLI::IsMember(figure_names()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*cov)
            return cmd_coverage(o, window);
        if (*sw)
            return cmd_sweep(o, sweep_path);
        if (*op)
            return cmd_optimize(o, target, tier, mode);
        if (*fg)
            return cmd_figures(o, full, only);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
