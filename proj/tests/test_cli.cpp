#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tddnet/analytics.hpp"
#include "tddnet/config_io.hpp"
#include "tddnet/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run
{
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr folded into the captured text when asked.
Run run_cli(const std::string& args, bool with_stderr = false)
{
    const std::string cmd = std::string(TDDNET_CLI_PATH) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p)
        return r;
    char buf[4096];
    size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0)
        r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string config(const std::string& name) { return std::string(TDDNET_SOURCE_DIR) + "/configs/" + name; }

fs::path scratch(const std::string& name)
{
    auto d = fs::temp_directory_path() / ("tddnet_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::vector<std::string> split_lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty())
            out.push_back(line);
    }
    return out;
}

}  // namespace

TEST(Cli, MissingScenarioParameterExitsWithValidationCode)
{
    const auto dir = scratch("missing");
    std::ofstream(dir / "bad.json") << R"({"lambda_u": "100x", "eta": 0.5, "zeta": 0.1})";
    const auto r = run_cli("coverage --config " + (dir / "bad.json").string(), true);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("lambda_s"), std::string::npos) << r.out;
}

TEST(Cli, UnknownFieldRejected)
{
    const auto dir = scratch("unknown");
    std::ofstream(dir / "bad.json") << R"({"lambda_s": "5x", "lambda_u": "100x", "eta": 0.5, "zeta": 0.1, "lamda_s": 1})";
    const auto r = run_cli("coverage --config " + (dir / "bad.json").string(), true);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("lamda_s"), std::string::npos);
}

TEST(Cli, CoverageMatchesLibrary)
{
    const auto r = run_cli("coverage --config " + config("fig3.json"));
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["schema_version"], 1);
    const auto c = tddnet::load_config(config("fig3.json"));
    const auto cov = tddnet::coverage_overall(c);
    EXPECT_NEAR(j["analytic"]["coverage"]["p_s_d"].get<double>(), *cov.p_s_d, 1e-12);
    EXPECT_NEAR(j["analytic"]["coverage"]["p_d2d"].get<double>(), *cov.p_d2d, 1e-12);
}

TEST(Cli, SeededSimulationIsDeterministic)
{
    const std::string args =
        "coverage --simulate --iterations 20 --window 1000 --seed 42 --config " + config("fig3.json");
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    ASSERT_TRUE(a.code == 0 || a.code == 4) << a.code;
    EXPECT_EQ(a.code, b.code);
    const auto ja = json::parse(a.out), jb = json::parse(b.out);
    EXPECT_EQ(ja["simulated"], jb["simulated"]);
    EXPECT_EQ(ja["simulated"]["settings"]["seed"], 42);
}

TEST(Cli, SweepHeaderAndStatus)
{
    const auto r = run_cli("sweep --sweep " + config("sweep_rho_s.json"));
    ASSERT_EQ(r.code, 0);
    const auto lines = split_lines(r.out);
    ASSERT_EQ(lines.size(), 18u);
    EXPECT_EQ(lines[0], "swept_param,value,p_s_d,p_s_u,p_d2d,beta,lambda_d,status");
    for (size_t i = 1; i < lines.size(); ++i) {
        EXPECT_EQ(lines[i].rfind("rho_s,", 0), 0u);
        EXPECT_EQ(lines[i].substr(lines[i].size() - 3), ",ok") << lines[i];
    }
    EXPECT_NE(r.out.find("\r\n"), std::string::npos);
}

TEST(Cli, BandwidthSweepEndpoints)
{
    const auto r = run_cli("sweep --sweep " + config("sweep_eta.json"));
    ASSERT_EQ(r.code, 0);
    const auto lines = split_lines(r.out);
    ASSERT_EQ(lines.size(), 3u);
    auto cells = [](const std::string& s) {
        std::vector<std::string> v;
        std::stringstream in(s);
        std::string c;
        while (std::getline(in, c, ','))
            v.push_back(c);
        return v;
    };
    const auto at0 = cells(lines[1]), at1 = cells(lines[2]);
    const double t_m_d = std::stod(at0[2]), t_s_d = std::stod(at0[3]), t_d2d = std::stod(at0[4]);
    EXPECT_NEAR(std::stod(at0[5]), t_s_d + 0.5 * t_d2d, 1e-8 * (t_s_d + t_d2d));
    EXPECT_NEAR(std::stod(at1[5]), t_m_d, 1e-8 * t_m_d);
}

TEST(Cli, SweepBadValueKeepsRow)
{
    const auto dir = scratch("badsweep");
    json s{{"config", config("fig3.json")}, {"param", "q_ds"}, {"values", {0.5, 1.5}}, {"outputs", {"p_s_d"}}};
    std::ofstream(dir / "s.json") << s.dump();
    const auto r = run_cli("sweep --sweep " + (dir / "s.json").string());
    EXPECT_EQ(r.code, 0);
    const auto lines = split_lines(r.out);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_NE(lines[2].find("error"), std::string::npos);
}

TEST(Cli, BandwidthOptimumForMacroDominantNetwork)
{
    const auto dir = scratch("macro");
    std::ofstream(dir / "c.json") << R"({"lambda_s": "0.01x", "lambda_u": "100x", "zeta": 0, "eta": 0.5})";
    const auto r = run_cli("optimize --target bandwidth --config " + (dir / "c.json").string());
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["arguments"]["eta"].get<double>(), 1.0);
    EXPECT_EQ(j["regime"], "macro dominant");
}

TEST(Cli, DensityOptimumOfSymmetricNetwork)
{
    for (const char* mode : {"ul", "dl"}) {
        const auto r = run_cli(std::string("optimize --target density --mode ") + mode + " --config "
                               + config("symmetric.json"));
        ASSERT_EQ(r.code, 0);
        const auto j = json::parse(r.out);
        EXPECT_NEAR(j["arguments"]["lambda_s_over_lambda_m"].get<double>(), 1.0, 1e-9) << mode;
    }
}

TEST(Cli, SensingOptimizerReportsBoundaryCheck)
{
    const auto r = run_cli("optimize --target sensing --config " + config("fig7.json"));
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    EXPECT_TRUE(j["check"]["boundary_check_passed"].get<bool>());
    EXPECT_GT(j["arguments"]["rho_d_dbm"].get<double>(), j["arguments"]["rho_s_dbm"].get<double>());
}

TEST(Cli, FiguresWriteCsvAndManifest)
{
    const auto dir = scratch("figures");
    const auto r = run_cli("figures --only fig5,fig7 --out " + dir.string());
    ASSERT_EQ(r.code, 0);
    for (const char* f : {"fig5a.csv", "fig5b.csv", "fig7a.csv", "fig7b.csv", "manifest.json"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    std::ifstream in(dir / "manifest.json");
    const auto m = json::parse(in);
    EXPECT_EQ(m["figures"].size(), 4u);
    for (const auto& f : m["figures"])
        EXPECT_FALSE(f.contains("error"));
}

TEST(Csv, Quoting)
{
    using tddnet::csv_line;
    using tddnet::csv_quote;
    EXPECT_EQ(csv_quote("plain"), "plain");
    EXPECT_EQ(csv_quote("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_quote("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(csv_quote("two\nlines"), "\"two\nlines\"");
    EXPECT_EQ(csv_line({"x", "error: a, b", ""}), "x,\"error: a, b\",\r\n");
    EXPECT_EQ(tddnet::csv_number(std::nan("")), "");
}
