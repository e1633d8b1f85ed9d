// Acceptance run: one PASS/FAIL line per criterion, with the numbers behind it.
// Exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "tddnet/analytics.hpp"
#include "tddnet/figures.hpp"
#include "tddnet/optimizer.hpp"
#include "tddnet/simulator.hpp"

using namespace tddnet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail)
{
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

NetworkConfig fig3(double rho_s_dbm = -60.0)
{
    auto c = default_config();
    c.lambda_s = 5 * c.lambda_m;
    c.lambda_u = 100 * c.lambda_m;
    c.q_dm = c.q_ds = 0.5;
    c.rho_s = dbm_to_mw(rho_s_dbm);
    c.rho_d = dbm_to_mw(-60);
    c.eta = 0.5;
    c.zeta = 0.1;
    return c;
}

NetworkConfig single_tier(double users_per_bs)
{
    auto c = default_config();
    c.lambda_s = 0.0;
    c.lambda_u = users_per_bs * c.lambda_m;
    c.q_dm = 1.0;
    c.eta = 1.0;
    c.zeta = 0.0;
    return c;
}

double rel(double sim, double an) { return std::abs(sim - an) / an; }

// ---------------------------------------------------------------------------

void criterion1()
{
    const auto t0 = Clock::now();
    auto c = single_tier(100.0);
    c.gamma_m_d = 1.0;
    AnalysisOptions opt;
    opt.fully_loaded = true;
    const double exact = 1.0 / (1.0 + std::numbers::pi / 4.0);
    const double an = *coverage_macro(c, opt).dl;

    SimSettings s;
    s.iterations = 10000;
    s.window = 5000.0;
    s.image_rings = 3;
    s.seed = 1;
    const auto rep = coverage_report(simulate(c, s));
    const double sim = *rep.p_m_d, ci = *rep.ci.p_m_d;
    const double secs = seconds_since(t0);
    const bool pass = std::abs(an - exact) <= 1e-6 && std::abs(sim - exact) <= ci && secs < 120.0;
    report(1, pass,
           fmt("analytic %.8f exact %.8f | simulated %.4f +- %.4f | %.0f s", an, exact, sim, ci, secs));
}

void criterion2()
{
    const auto t0 = Clock::now();
    SimSettings s;
    s.iterations = 1000;
    s.window = 5000.0;
    s.image_rings = 3;
    bool pass = true;
    std::string detail;
    for (double r : {-100.0, -60.0, -30.0}) {
        const auto c = fig3(r);
        const auto an = coverage_overall(c);
        const auto sim = coverage_report(simulate(c, s));
        const double e_sd = rel(*sim.p_s_d, *an.p_s_d), e_su = rel(*sim.p_s_u, *an.p_s_u),
                     e_d = rel(*sim.p_d2d, *an.p_d2d);
        const double small_bound = r <= -60.0 ? 0.05 : 0.10;
        const bool ok = e_sd <= small_bound && e_su <= small_bound && e_d <= 0.10;
        pass = pass && ok;
        detail += fmt("\n    rho_s %4.0f: p_s_d %.4f/%.4f (%.1f%%) p_s_u %.4f/%.4f (%.1f%%) p_d2d %.4f/%.4f (%.1f%%)"
                      " bound %.0f%%%s",
                      r, *sim.p_s_d, *an.p_s_d, 100 * e_sd, *sim.p_s_u, *an.p_s_u, 100 * e_su, *sim.p_d2d,
                      *an.p_d2d, 100 * e_d, 100 * small_bound, ok ? "" : " <- over");
    }
    const double secs = seconds_since(t0);
    pass = pass && secs < 600.0;
    report(2, pass, fmt("simulated/analytic (relative error), %.0f s", secs) + detail);
}

void criterion3()
{
    // small-tier coverage with no active D2D against the closed form
    double worst = 0.0;
    int n = 0;
    for (double rs : {-90.0, -50.0})
        for (double q : {0.3, 0.7})
            for (double g_db : {-5.0, 5.0})
                for (double ls : {3.0, 20.0})
                    for (double b : {1.0, 4.0}) {
                        if (n == 20)
                            break;
                        if (b == 4.0 && (n % 4) != 1)
                            continue;
                        auto c = fig3(rs);
                        c.q_ds = q;
                        c.gamma_s_d = c.gamma_s_u = db_to_linear(g_db);
                        c.lambda_s = ls * c.lambda_m;
                        c.b_ds = b;
                        AnalysisOptions opt;
                        opt.suppress_d2d = true;
                        const auto s = coverage_small(c, opt);
                        const auto a = asymptotic_no_d2d(c, opt);
                        worst = std::max({worst, std::abs(*s.dl - *a.dl), std::abs(*s.ul - *a.ul)});
                        ++n;
                    }
    while (n < 20) {
        auto c = fig3(-70);
        c.b_ds = c.b_us = 0.5 * (n + 1);
        AnalysisOptions opt;
        opt.suppress_d2d = true;
        const auto s = coverage_small(c, opt);
        const auto a = asymptotic_no_d2d(c, opt);
        worst = std::max({worst, std::abs(*s.dl - *a.dl), std::abs(*s.ul - *a.ul)});
        ++n;
    }

    // protection off, saturated contention
    auto c = figure7_config();
    c.rho_s = dbm_to_mw(40);
    c.rho_d = dbm_to_mw(-80);
    const auto d = derive(c);
    const double x = c.zeta * c.lambda_u * d.k_od;
    const auto s = coverage_small(c, d);
    const auto a = asymptotic_no_sensing(c);
    const double e_dl = rel(*s.dl, *a.dl), e_ul = rel(*s.ul, *a.ul);
    const bool pass = n == 20 && worst <= 1e-6 && x > 10.0 && e_dl <= 0.02 && e_ul <= 0.02;
    report(3, pass,
           fmt("no-D2D grid: %d points, max |diff| %.2e | no sensing (x = %.0f): DL %.4f/%.4f (%.2f%%) UL %.4f/%.4f "
               "(%.2f%%)",
               n, worst, x, *s.dl, *a.dl, 100 * e_dl, *s.ul, *a.ul, 100 * e_ul));
}

void criterion4()
{
    const auto c = fig3(-60);
    SimSettings s;
    s.iterations = 1000;
    s.window = 5000.0;
    s.measure = false;
    const double sim = retention_fraction(simulate(c, s));
    const double beta = retaining_probability(c).beta_ret;
    const double e = rel(sim, beta);
    report(4, e <= 0.05, fmt("beta %.4f simulated retention %.4f (%.2f%%)", beta, sim, 100 * e));
}

NetworkConfig equal_power()
{
    auto c = fig3();
    c.p_s = c.p_m;
    c.q_s = c.q_m;
    c.zeta = 0.0;
    return c;
}

struct LoadCheck
{
    double tv, void_an, void_sim;
};

LoadCheck load_check(const NetworkConfig& c, Tier t, Mode m, long iterations)
{
    SimSettings s;
    s.iterations = iterations;
    s.window = 5000.0;
    s.measure = false;
    const auto res = simulate(c, s);
    const auto h = load_histogram(res, t, m);
    double tv = 0.0, mass = 0.0;
    const std::size_t top = std::max<std::size_t>(h.size(), 400);
    for (std::size_t n = 0; n < top; ++n) {
        const double p = load_pmf(c, t, m, static_cast<long>(n));
        mass += p;
        tv += std::abs(p - (n < h.size() ? h[n] : 0.0));
    }
    tv = 0.5 * (tv + std::max(0.0, 1.0 - mass));
    return {tv, void_probability(c, t, m), empty_cell_fraction(res, t, m)};
}

void criterion5()
{
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;
    struct Case
    {
        const char* name;
        NetworkConfig c;
        Tier t;
        Mode m;
        bool voronoi;
    };
    // the last two cells are biased-power tessellations, reported for information
    const std::vector<Case> cases = {
        {"single tier, 3 DL users/BS", single_tier(6.0), Tier::macro, Mode::downlink, true},
        {"equal-power two tiers, small DL", equal_power(), Tier::small, Mode::downlink, true},
        {"equal-power two tiers, macro UL", equal_power(), Tier::macro, Mode::uplink, true},
        {"weighted cells, small DL", fig3(), Tier::small, Mode::downlink, false},
        {"weighted cells, small UL", fig3(), Tier::small, Mode::uplink, false}};
    for (const auto& k : cases) {
        const auto r = load_check(k.c, k.t, k.m, k.voronoi ? 2000 : 300);
        const bool ok = r.tv < 0.02 && std::abs(r.void_an - r.void_sim) <= 0.02;
        if (k.voronoi)
            pass = pass && ok;
        detail += fmt("\n    %s: TV %.4f | void %.4f empty %.4f%s", k.name, r.tv, r.void_an, r.void_sim,
                      k.voronoi ? (ok ? "" : " <- over") : " (not gated)");
    }
    report(5, pass, fmt("load PMF and void probability on Voronoi cells, %.0f s", seconds_since(t0)) + detail);
}

void criterion6()
{
    bool pass = true;
    std::string detail;
    struct Point
    {
        const char* name;
        NetworkConfig c;
    };
    auto unequal = fig3();
    unequal.b_ds = 10.0;
    unequal.b_us = 0.25;
    auto dense = fig3();
    dense.lambda_s = 20 * dense.lambda_m;
    for (const auto& p : std::vector<Point>{{"baseline", fig3()}, {"b_ds 10, b_us 0.25", unequal},
                                            {"lambda_s 20x", dense}}) {
        SimSettings s;
        s.iterations = 1000;
        s.window = 5000.0;
        s.measure = false;
        const auto res = simulate(p.c, s);
        const auto a = association_probabilities(p.c);
        double worst = 0.0;
        for (Tier t : {Tier::macro, Tier::small})
            for (Mode m : {Mode::downlink, Mode::uplink})
                worst = std::max(worst, std::abs(association_fraction(res, t, m) - detail::association_of(a, t, m)));
        pass = pass && worst <= 0.02;
        detail += fmt("\n    %s: A_s^D %.4f/%.4f A_s^U %.4f/%.4f max |diff| %.4f", p.name,
                      association_fraction(res, Tier::small, Mode::downlink), a.a_d_s,
                      association_fraction(res, Tier::small, Mode::uplink), a.a_u_s, worst);
    }
    report(6, pass, "empirical/analytic" + detail);
}

void criterion7()
{
    auto c = default_config();
    c.lambda_s = 5 * c.lambda_m;
    c.lambda_u = 1e3 * c.lambda_m;
    c.eta = 0.5;
    c.zeta = 0.1;
    c.rho_s = 0.0;
    bool pass = true;
    std::string detail;
    for (Mode m : {Mode::downlink, Mode::uplink}) {
        const auto d = optimal_density(c, m);
        const auto b = optimal_bias(c, m);
        pass = pass && d.check->agrees && b.check->agrees;
        detail += fmt("\n    %s density %.4f grid %.4f (step x%.3f) %s | bias %.4f grid %.4f (step x%.3f) %s",
                      to_string(m), d.arguments[0].second, d.check->argmax, d.check->step,
                      d.check->agrees ? "ok" : "off", b.arguments[0].second, b.check->argmax, b.check->step,
                      b.check->agrees ? "ok" : "off");
        for (const auto* r : {&d, &b})
            if (r->check->printed)
                detail += fmt("\n      printed formula gives %.4f (%s one grid step): %s", *r->check->printed,
                              r->check->printed_agrees ? "within" : "outside", r->check->note.c_str());
    }
    for (Tier t : {Tier::macro, Tier::small}) {
        const auto u = optimal_uldl_config(c, t, Mode::uplink);
        pass = pass && u.arguments[0].second == 0.0 && u.check->agrees;
        detail += fmt("\n    UL q* (%s) = %g, %s", t == Tier::macro ? "macro" : "small", u.arguments[0].second,
                      u.check->note.c_str());
    }
    // eta rule against the sign of the slope, over a sweep of rho_s
    int agree = 0, total = 0;
    for (double r = -100.0; r <= 0.0; r += 10.0) {
        auto x = c;
        x.rho_s = dbm_to_mw(r);
        x.rho_d = dbm_to_mw(-60);
        const auto t = throughput(x);
        const double slope = t.t_m_d - (t.t_s_d + 0.5 * t.t_d2d);
        const double want = slope > 0 ? 1.0 : 0.0;
        agree += optimal_bandwidth(x).arguments[0].second == want;
        ++total;
        auto y = x;
        y.eta = 1.0;
        const double at1 = throughput(y).total_d;
        y.eta = 0.0;
        const double at0 = throughput(y).total_d;
        agree += (at1 > at0) == (want == 1.0);
        ++total;
    }
    pass = pass && agree == total;
    detail += fmt("\n    eta rule vs sign test: %d/%d", agree, total);
    report(7, pass, "closed forms vs 50-point grids" + detail);
}

void criterion8()
{
    const auto base = figure7_config();
    std::vector<double> grid, tp;
    for (int i = 0; i <= 40; ++i) {
        auto c = base;
        c.rho_s = dbm_to_mw(-100.0 + 2.5 * i);
        grid.push_back(-100.0 + 2.5 * i);
        tp.push_back(throughput(c).total_d);
    }
    const int changes = sign_changes(tp);
    const auto imax = static_cast<std::size_t>(std::max_element(tp.begin(), tp.end()) - tp.begin());
    const bool interior = imax > 0 && imax + 1 < tp.size();

    auto c = base;
    c.rho_min = dbm_to_mw(-100);
    const auto r = optimal_sensing(c);
    const double rs = mw_to_dbm(r.argument("rho_s")), rd = mw_to_dbm(r.argument("rho_d"));
    const bool pass = changes == 1 && interior && rd > rs;
    report(8, pass,
           fmt("sign changes %d, grid max at rho_s = %.1f dBm | rho_s* %.2f dBm, rho_d* %.2f dBm", changes,
               grid[imax], rs, rd));
}

void criterion9()
{
    const auto t0 = Clock::now();
    FigureOptions o;
    o.iterations = 200;
    const auto pts = csma_vs_aloha(o);
    bool every = true;
    int separated = 0, compared = 0;
    std::string detail;
    for (const auto& p : pts) {
        std::string line = fmt("\n    rho_s %3.0f beta %.3f activity %.3f:", p.rho_s_dbm, p.beta_analytic, p.activity);
        const std::optional<double> CoverageReport::*fields[3] = {&CoverageReport::p_s_d, &CoverageReport::p_s_u,
                                                                  &CoverageReport::p_d2d};
        const char* names[3] = {"p_s_d", "p_s_u", "p_d2d"};
        for (int i = 0; i < 3; ++i) {
            const double a = *(p.csma.*fields[i]), b = *(p.aloha.*fields[i]);
            const double ca = *p.csma.ci_field(2 + i), cb = *p.aloha.ci_field(2 + i);
            const bool ge = a >= b;
            const bool apart = a - ca > b + cb;
            every = every && ge;
            separated += apart;
            ++compared;
            line += fmt(" %s %.4f%s%.4f%s", names[i], a, ge ? ">=" : "<", b, apart ? "*" : "");
        }
        detail += line;
    }
    const bool pass = every && 2 * separated >= compared;
    report(9, pass,
           fmt("CSMA vs ALOHA, %ld iterations, L = %.0f m; %d/%d comparisons with disjoint CIs (*), %.0f s",
               o.iterations, kFigure8Window, separated, compared, seconds_since(t0))
               + detail);
}

void criterion10()
{
    const auto t0 = Clock::now();
    std::vector<std::string> broken;

    // coverage falls as the threshold rises
    for (double r : {-90.0, -60.0}) {
        const int kinds = 7;
        std::vector<double> prev(kinds, 2.0);
        for (double g_db = -10.0; g_db <= 20.0; g_db += 5.0) {
            auto c = fig3(r);
            c.gamma_m_d = c.gamma_m_u = c.gamma_s_d = c.gamma_s_u = c.gamma_d = db_to_linear(g_db);
            const auto cov = coverage_overall(c);
            for (int i = 0; i < kinds; ++i) {
                const double v = *cov.field(i);
                if (v > prev[i] + 1e-12)
                    broken.push_back(fmt("%s rises at gamma %.0f dB", CoverageReport::kFieldNames[i], g_db));
                prev[i] = v;
            }
        }
    }
    // retention grows with either sensing threshold
    for (int which = 0; which < 2; ++which) {
        double prev = -1.0;
        for (double r = -100.0; r <= 0.0; r += 5.0) {
            auto c = fig3();
            (which == 0 ? c.rho_s : c.rho_d) = dbm_to_mw(r);
            const double b = retaining_probability(c).beta_ret;
            if (b < prev - 1e-12)
                broken.push_back(fmt("beta falls in %s at %.0f dBm", which == 0 ? "rho_s" : "rho_d", r));
            prev = b;
        }
    }
    // association normalization
    for (double b : {0.01, 1.0, 100.0})
        for (double ls : {1.0, 5.0, 50.0}) {
            auto c = fig3();
            c.b_ds = b;
            c.b_us = 1.0 / b;
            c.lambda_s = ls * c.lambda_m;
            const auto a = association_probabilities(c);
            if (std::abs(a.a_d_m + a.a_d_s - 1.0) > 1e-12 || std::abs(a.a_u_m + a.a_u_s - 1.0) > 1e-12)
                broken.push_back(fmt("association does not sum to one (b %.2f, lambda_s %.0fx)", b, ls));
        }
    // throughput is affine in eta
    {
        auto c = fig3();
        auto at = [&](double eta) {
            auto x = c;
            x.eta = eta;
            return throughput(x);
        };
        const auto t0e = at(0.0), t1e = at(1.0);
        for (double eta : {0.1, 0.37, 0.5, 0.9}) {
            const auto t = at(eta);
            const double want_d = eta * t1e.total_d + (1 - eta) * t0e.total_d;
            const double want_u = eta * t1e.total_u + (1 - eta) * t0e.total_u;
            if (std::abs(t.total_d - want_d) > 1e-9 * want_d || std::abs(t.total_u - want_u) > 1e-9 * want_u)
                broken.push_back(fmt("throughput not affine at eta %.2f", eta));
        }
    }
    // deterministic replay, independent of the number of workers
    {
        const auto c = fig3();
        SimSettings s;
        s.iterations = 24;
        s.window = 2000.0;
        s.seed = 99;
        const auto a = simulate(c, s);
        const auto b = simulate(c, s);
        s.workers = 3;
        const auto w = simulate(c, s);
        bool same = true;
        for (int k = 0; k < 5; ++k)
            same = same && a.probes[k].covered == b.probes[k].covered && a.probes[k].total == b.probes[k].total
                && a.probes[k].covered == w.probes[k].covered && a.probes[k].total == w.probes[k].total;
        same = same && a.retained_d2d == b.retained_d2d && a.retained_d2d == w.retained_d2d
            && a.assoc == w.assoc;
        if (!same)
            broken.push_back("replay differs");
    }
    const double secs = seconds_since(t0);
    std::string detail = fmt("invariants, %.0f s", secs);
    for (const auto& b : broken)
        detail += "\n    " + b;
    report(10, broken.empty() && secs < 300.0, detail);
}

}  // namespace

int main(int argc, char** argv)
{
    // optional list of criterion numbers to run
    std::vector<int> only;
    for (int i = 1; i < argc; ++i)
        only.push_back(std::atoi(argv[i]));
    const std::vector<std::function<void()>> all = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                    criterion6, criterion7, criterion8, criterion9, criterion10};
    for (int i = 0; i < 10; ++i)
        if (only.empty() || std::find(only.begin(), only.end(), i + 1) != only.end())
            all[static_cast<std::size_t>(i)]();
    std::printf("%d criterion(s) failed\n", failures);
    return failures ? 1 : 0;
}
