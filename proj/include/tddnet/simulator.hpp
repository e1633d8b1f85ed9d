#pragma once

// Monte Carlo model of the two-tier dynamic-TDD network with a CSMA D2D
// underlay. Each iteration is an independent snapshot: Poisson base
// stations and users, biased association, one served user per active cell,
// literal timer-based carrier sensing, and SIR measured on actual links.
//
// Every random draw of iteration i comes from generators seeded by
// (seed, i, stream), so results do not depend on the number of workers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "analytics.hpp"
#include "geometry.hpp"
#include "params.hpp"

namespace tddnet {

struct SimSettings
{
    long iterations = 10000;
    double window = 5000.0;  // side L, meters
    std::uint64_t seed = 1;
    int workers = 1;
    bool toroidal = true;
    int image_rings = 1;  // interference summed over (2k+1)^2 periodic copies
    int max_probes = 64;  // per probe kind per iteration
    bool collect_distances = false;
    bool measure = true;  // false skips SIR probes (association and load statistics only)
};

enum class ProbeKind { macro_dl, macro_ul, small_dl, small_ul, d2d };
inline constexpr int kProbeKinds = 5;

inline const char* to_string(ProbeKind k)
{
    switch (k) {
    case ProbeKind::macro_dl: return "macro_dl";
    case ProbeKind::macro_ul: return "macro_ul";
    case ProbeKind::small_dl: return "small_dl";
    case ProbeKind::small_ul: return "small_ul";
    case ProbeKind::d2d: return "d2d";
    }
    return "?";
}

struct BaseStation
{
    Vec2 pos;
    Mode mode = Mode::downlink;
    int n_users = 0;  // associated users of the matching role
    int served = -1;  // index into users, -1 when void
};

struct CellularUser
{
    Vec2 pos;
    bool transmitter = false;
    Tier tier = Tier::macro;
    int bs = -1;  // serving base station within its tier, -1 if none
};

struct D2dPair
{
    Vec2 tx, rx;
    double timer = 0.0;
    bool retained = false;
};

struct NetworkRealization
{
    double window = 0.0;
    bool toroidal = true;
    std::uint64_t seed = 0;
    std::uint64_t iteration = 0;
    std::vector<BaseStation> mbs, sap;
    std::vector<CellularUser> users;
    std::vector<D2dPair> d2d;

    std::vector<BaseStation>& tier(Tier t) { return t == Tier::macro ? mbs : sap; }
    const std::vector<BaseStation>& tier(Tier t) const { return t == Tier::macro ? mbs : sap; }
};

namespace sim_detail {

enum Stream : std::uint32_t { geometry = 0, marks = 1, serving = 2, sensing = 3, measure = 4, aloha = 5 };

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t iteration, std::uint32_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(iteration >> 32),
                      stream};
    return std::mt19937_64(seq);
}

inline long poisson(std::mt19937_64& g, double mean)
{
    if (!(mean > 0.0))
        return 0;
    return std::poisson_distribution<long>(mean)(g);
}

inline double exp1(std::mt19937_64& g) { return std::exponential_distribution<double>(1.0)(g); }

inline double path_gain(double d2, double alpha)
{
    if (alpha == 4.0)
        return 1.0 / (d2 * d2);
    return std::pow(d2, -0.5 * alpha);
}

// Beyond this sensing distance a violation needs h > 50, probability e^{-50}.
inline constexpr double kSensingTail = 50.0;

inline double sensing_radius(double rho, double power, double alpha)
{
    if (rho <= 0.0)
        return std::numeric_limits<double>::infinity();
    if (std::isinf(rho))
        return 0.0;
    return std::pow(kSensingTail * power / rho, 1.0 / alpha);
}

}  // namespace sim_detail

// ---------------------------------------------------------------------------

inline NetworkRealization sample_realization(const NetworkConfig& c, const SimSettings& s, std::uint64_t iteration)
{
    if (!(s.window > 0.0))
        throw std::invalid_argument("SimSettings: window must be > 0");
    NetworkRealization r;
    r.window = s.window;
    r.toroidal = s.toroidal;
    r.seed = s.seed;
    r.iteration = iteration;
    const double L = s.window;
    const double area = L * L;

    auto geo = sim_detail::make_rng(s.seed, iteration, sim_detail::geometry);
    auto mk = sim_detail::make_rng(s.seed, iteration, sim_detail::marks);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto point = [&] { return Vec2{L * u01(geo), L * u01(geo)}; };

    auto place_bs = [&](std::vector<BaseStation>& out, double lambda, double q_dl) {
        const long n = sim_detail::poisson(geo, lambda * area);
        out.resize(static_cast<std::size_t>(n));
        for (auto& b : out)
            b.pos = point();
        for (auto& b : out)
            b.mode = u01(mk) < q_dl ? Mode::downlink : Mode::uplink;
    };
    place_bs(r.mbs, c.lambda_m, c.q_dm);
    place_bs(r.sap, c.lambda_s, c.q_ds);

    const long n_users = sim_detail::poisson(geo, c.lambda_u * area);
    std::vector<Vec2> pos(static_cast<std::size_t>(n_users));
    for (auto& p : pos)
        p = point();
    r.users.reserve(static_cast<std::size_t>(n_users));
    for (const auto& p : pos) {
        if (u01(mk) < c.zeta) {
            D2dPair d;
            d.tx = p;
            const double phi = 2.0 * std::numbers::pi * u01(mk);
            d.rx = Vec2{p.x + c.r_d * std::cos(phi), p.y + c.r_d * std::sin(phi)};
            if (s.toroidal)
                d.rx = wrap(d.rx, L);
            d.timer = u01(mk);
            r.d2d.push_back(d);
        } else {
            CellularUser u;
            u.pos = p;
            u.transmitter = u01(mk) < c.mu;
            r.users.push_back(u);
        }
    }
    return r;
}

/// Biased association (DL receivers over DL base stations, UL transmitters
/// over UL base stations), then one uniformly chosen served user per cell.
inline void associate(NetworkRealization& r, const NetworkConfig& c)
{
    const double L = r.window;
    const double e = 2.0 / c.alpha;
    std::array<std::vector<int>, 4> members;  // tier*2 + mode -> BS indices
    std::array<GridIndex, 4> grids{GridIndex(L, r.toroidal), GridIndex(L, r.toroidal), GridIndex(L, r.toroidal),
                                   GridIndex(L, r.toroidal)};
    for (Tier t : {Tier::macro, Tier::small})
        for (Mode m : {Mode::downlink, Mode::uplink}) {
            const int k = static_cast<int>(t) * 2 + static_cast<int>(m);
            std::vector<Vec2> pts;
            const auto& list = r.tier(t);
            for (std::size_t i = 0; i < list.size(); ++i)
                if (list[i].mode == m) {
                    members[static_cast<std::size_t>(k)].push_back(static_cast<int>(i));
                    pts.push_back(list[i].pos);
                }
            grids[static_cast<std::size_t>(k)].build(pts);
        }

    for (auto& b : r.mbs) {
        b.n_users = 0;
        b.served = -1;
    }
    for (auto& b : r.sap) {
        b.n_users = 0;
        b.served = -1;
    }

    for (auto& u : r.users) {
        const Mode m = u.transmitter ? Mode::uplink : Mode::downlink;
        u.bs = -1;
        double best = -1.0;
        for (Tier t : {Tier::macro, Tier::small}) {
            const int k = static_cast<int>(t) * 2 + static_cast<int>(m);
            auto [idx, d2] = grids[static_cast<std::size_t>(k)].nearest(u.pos);
            if (idx < 0)
                continue;
            // compare (P B)^{2/alpha} / d^2, equivalent to P B d^{-alpha}
            const double score = std::pow(c.link_power(t, m) * c.bias(t, m), e) / d2;
            if (score > best) {
                best = score;
                u.tier = t;
                u.bs = members[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx)];
            }
        }
        if (u.bs >= 0)
            ++r.tier(u.tier)[static_cast<std::size_t>(u.bs)].n_users;
    }

    // served user: uniform among the cell's users, by reservoir sampling in user order
    auto g = sim_detail::make_rng(r.seed, r.iteration, sim_detail::serving);
    std::array<std::vector<int>, 2> seen{std::vector<int>(r.mbs.size(), 0), std::vector<int>(r.sap.size(), 0)};
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t i = 0; i < r.users.size(); ++i) {
        const auto& u = r.users[i];
        if (u.bs < 0)
            continue;
        auto& b = r.tier(u.tier)[static_cast<std::size_t>(u.bs)];
        int& cnt = seen[static_cast<std::size_t>(u.tier)][static_cast<std::size_t>(u.bs)];
        ++cnt;
        if (u01(g) * cnt < 1.0)
            b.served = static_cast<int>(i);
    }
}

/// Positions of the active small-cell transmitters: DL SAPs with users and
/// the served UL users of small cells.
inline std::vector<Vec2> small_cell_transmitters(const NetworkRealization& r)
{
    std::vector<Vec2> out;
    for (const auto& b : r.sap) {
        if (b.served < 0)
            continue;
        out.push_back(b.mode == Mode::downlink ? b.pos : r.users[static_cast<std::size_t>(b.served)].pos);
    }
    return out;
}

/// Literal carrier sensing: a potential D2D transmitter keeps the channel if
/// its would-be interference at every active small-cell transmitter is below
/// rho_s and no potential D2D transmitter with an earlier timer is heard above
/// rho_d. fade() gives the gain of each sensing link.
template <class Fade>
void run_csma(NetworkRealization& r, const NetworkConfig& c, Fade&& fade)
{
    GridIndex small(r.window, r.toroidal);
    small.build(small_cell_transmitters(r));
    std::vector<Vec2> tx(r.d2d.size());
    for (std::size_t i = 0; i < r.d2d.size(); ++i)
        tx[i] = r.d2d[i].tx;
    GridIndex d2d(r.window, r.toroidal);
    d2d.build(tx);

    const double rs = sim_detail::sensing_radius(c.rho_s, c.q_d, c.alpha);
    const double rd = sim_detail::sensing_radius(c.rho_d, c.q_d, c.alpha);
    for (std::size_t i = 0; i < r.d2d.size(); ++i) {
        bool ok = true;
        small.for_each_within(tx[i], rs, [&](int, double d2) {
            const double h = fade();
            if (!(c.q_d * h * sim_detail::path_gain(d2, c.alpha) < c.rho_s))
                ok = false;
        });
        const double ti = r.d2d[i].timer;
        d2d.for_each_within(tx[i], rd, [&](int k, double d2) {
            if (static_cast<std::size_t>(k) == i)
                return;
            const double tk = r.d2d[static_cast<std::size_t>(k)].timer;
            const bool earlier = tk < ti || (tk == ti && static_cast<std::size_t>(k) < i);
            if (!earlier)
                return;
            const double h = fade();
            if (!(c.q_d * h * sim_detail::path_gain(d2, c.alpha) < c.rho_d))
                ok = false;
        });
        r.d2d[i].retained = ok;
    }
}

/// Carrier sensing with exp(1) fades drawn per sensing link.
inline void run_csma(NetworkRealization& r, const NetworkConfig& c)
{
    auto g = sim_detail::make_rng(r.seed, r.iteration, sim_detail::sensing);
    run_csma(r, c, [&] { return sim_detail::exp1(g); });
}

/// Independent thinning with probability p instead of carrier sensing.
inline void run_aloha(NetworkRealization& r, double p_access)
{
    if (!(p_access > 0.0 && p_access <= 1.0))
        throw std::invalid_argument("run_aloha: access probability must lie in (0, 1]");
    auto g = sim_detail::make_rng(r.seed, r.iteration, sim_detail::aloha);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (auto& d : r.d2d)
        d.retained = u01(g) < p_access;
}

// ---------------------------------------------------------------------------
// SIR measurement

struct Emitter
{
    Vec2 pos;
    double power;
    std::int64_t id;
};

namespace sim_detail {

inline constexpr std::int64_t kUserTag = 1'000'000'000'000LL;
inline constexpr std::int64_t kD2dTag = 2'000'000'000'000LL;

}  // namespace sim_detail

/// Active transmitters sharing the band of a tier: base stations in DL, served
/// users in UL, and retained D2D transmitters in the small-cell band.
inline std::vector<Emitter> band_emitters(const NetworkRealization& r, const NetworkConfig& c, Tier t)
{
    std::vector<Emitter> out;
    const auto& list = r.tier(t);
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& b = list[i];
        if (b.served < 0)
            continue;
        if (b.mode == Mode::downlink)
            out.push_back({b.pos, c.power_dl(t), static_cast<std::int64_t>(i)});
        else
            out.push_back({r.users[static_cast<std::size_t>(b.served)].pos, c.power_ul(t),
                           sim_detail::kUserTag + b.served});
    }
    if (t == Tier::small)
        for (std::size_t i = 0; i < r.d2d.size(); ++i)
            if (r.d2d[i].retained)
                out.push_back({r.d2d[i].tx, c.q_d, sim_detail::kD2dTag + static_cast<std::int64_t>(i)});
    return out;
}

struct Link
{
    Vec2 tx, rx;
    double power;
    std::int64_t tx_id;
};

/// The measured link of a probe: a cell's served user (DL or UL) or a D2D pair.
inline std::optional<Link> probe_link(const NetworkRealization& r, const NetworkConfig& c, ProbeKind k, int index)
{
    const auto i = static_cast<std::size_t>(index);
    if (k == ProbeKind::d2d) {
        if (i >= r.d2d.size() || !r.d2d[i].retained)
            return std::nullopt;
        return Link{r.d2d[i].tx, r.d2d[i].rx, c.q_d, sim_detail::kD2dTag + index};
    }
    const Tier t = (k == ProbeKind::macro_dl || k == ProbeKind::macro_ul) ? Tier::macro : Tier::small;
    const Mode m = (k == ProbeKind::macro_dl || k == ProbeKind::small_dl) ? Mode::downlink : Mode::uplink;
    const auto& list = r.tier(t);
    if (i >= list.size() || list[i].mode != m || list[i].served < 0)
        return std::nullopt;
    const Vec2 user = r.users[static_cast<std::size_t>(list[i].served)].pos;
    if (m == Mode::downlink)
        return Link{list[i].pos, user, c.power_dl(t), static_cast<std::int64_t>(index)};
    return Link{user, list[i].pos, c.power_ul(t), sim_detail::kUserTag + list[i].served};
}

/// SIR of a link against a set of emitters. fade() supplies exp(1) gains,
/// first for the signal and then per interferer image.
template <class Fade>
double compute_sir(const Link& link, const std::vector<Emitter>& emitters, const NetworkConfig& c, double L,
                   bool toroidal, int image_rings, Fade&& fade)
{
    const double d2s = distance_sq(link.rx, link.tx, L, toroidal);
    const double signal = link.power * fade() * sim_detail::path_gain(d2s, c.alpha);
    const int k = toroidal ? image_rings : 0;
    double interference = 0.0;
    for (const auto& e : emitters) {
        const Vec2 d = displacement(link.rx, e.pos, L, toroidal);
        for (int a = -k; a <= k; ++a)
            for (int b = -k; b <= k; ++b) {
                if (e.id == link.tx_id && a == 0 && b == 0)
                    continue;
                const double dx = d.x + a * L, dy = d.y + b * L;
                const double d2 = dx * dx + dy * dy;
                if (d2 == 0.0)
                    return 0.0;
                interference += e.power * fade() * sim_detail::path_gain(d2, c.alpha);
            }
    }
    if (interference == 0.0)
        return std::numeric_limits<double>::infinity();
    return signal / interference;
}

/// SIR of one probe with fresh exp(1) fades from g; nullopt if the probe does
/// not exist in this realization.
inline std::optional<double> measure_sir(const NetworkRealization& r, const NetworkConfig& c, ProbeKind k, int index,
                                         std::mt19937_64& g, int image_rings = 1)
{
    auto link = probe_link(r, c, k, index);
    if (!link)
        return std::nullopt;
    const Tier band = (k == ProbeKind::macro_dl || k == ProbeKind::macro_ul) ? Tier::macro : Tier::small;
    auto em = band_emitters(r, c, band);
    return compute_sir(*link, em, c, r.window, r.toroidal, image_rings, [&] { return sim_detail::exp1(g); });
}

// ---------------------------------------------------------------------------
// Aggregation

struct ProbeSeries
{
    // Per-iteration Horvitz-Thompson sums: covered weight and total weight.
    std::vector<double> covered, total;
    long probes = 0;
    long empty_iterations = 0;  // iterations without any probe of this kind
};

struct SimulationResult
{
    SimSettings settings;
    std::array<ProbeSeries, kProbeKinds> probes;
    std::array<long, 4> assoc{};  // tier*2 + mode: users associated
    long unassociated = 0;
    std::array<std::vector<long>, 4> load_hist;  // users per cell
    std::array<long, 4> cells{}, empty_cells{};
    long potential_d2d = 0, retained_d2d = 0;
    std::array<std::vector<double>, 4> serving_distances;  // only if collect_distances

    double area() const { return settings.window * settings.window * static_cast<double>(settings.iterations); }
};

namespace sim_detail {

inline int slot(Tier t, Mode m) { return static_cast<int>(t) * 2 + static_cast<int>(m); }

struct IterationOutput
{
    std::array<double, kProbeKinds> covered{}, total{};
    std::array<long, kProbeKinds> probes{};
    std::array<long, 4> assoc{};
    long unassociated = 0;
    std::array<std::vector<long>, 4> load_hist;
    std::array<long, 4> cells{}, empty_cells{};
    long potential_d2d = 0, retained_d2d = 0;
    std::array<std::vector<double>, 4> distances;
};

inline ProbeKind kind_of(Tier t, Mode m)
{
    if (t == Tier::macro)
        return m == Mode::downlink ? ProbeKind::macro_dl : ProbeKind::macro_ul;
    return m == Mode::downlink ? ProbeKind::small_dl : ProbeKind::small_ul;
}

// d2d_access < 0 selects carrier sensing, otherwise ALOHA with that probability.
inline IterationOutput run_iteration(const NetworkConfig& c, const SimSettings& s, std::uint64_t it,
                                     double d2d_access)
{
    IterationOutput out;
    auto r = sample_realization(c, s, it);
    associate(r, c);
    if (d2d_access < 0.0)
        run_csma(r, c);
    else
        run_aloha(r, d2d_access);

    for (const auto& u : r.users) {
        if (u.bs < 0) {
            ++out.unassociated;
            continue;
        }
        const Mode m = u.transmitter ? Mode::uplink : Mode::downlink;
        ++out.assoc[static_cast<std::size_t>(slot(u.tier, m))];
        if (s.collect_distances) {
            const auto& b = r.tier(u.tier)[static_cast<std::size_t>(u.bs)];
            out.distances[static_cast<std::size_t>(slot(u.tier, m))].push_back(
                std::sqrt(distance_sq(u.pos, b.pos, r.window, r.toroidal)));
        }
    }
    for (Tier t : {Tier::macro, Tier::small})
        for (const auto& b : r.tier(t)) {
            const auto k = static_cast<std::size_t>(slot(t, b.mode));
            ++out.cells[k];
            if (b.n_users == 0)
                ++out.empty_cells[k];
            auto& h = out.load_hist[k];
            if (h.size() <= static_cast<std::size_t>(b.n_users))
                h.resize(static_cast<std::size_t>(b.n_users) + 1, 0);
            ++h[static_cast<std::size_t>(b.n_users)];
        }
    out.potential_d2d = static_cast<long>(r.d2d.size());
    for (const auto& d : r.d2d)
        out.retained_d2d += d.retained ? 1 : 0;

    if (!s.measure)
        return out;
    auto g = make_rng(s.seed, it, measure);
    auto fade = [&] { return exp1(g); };
    const std::array<std::vector<Emitter>, 2> em{band_emitters(r, c, Tier::macro), band_emitters(r, c, Tier::small)};

    auto run_probes = [&](ProbeKind kind, std::vector<int> cand, std::vector<double> weight, Tier band,
                          double gamma) {
        const auto k = static_cast<std::size_t>(kind);
        const std::size_t n = cand.size();
        const std::size_t take = std::min(n, static_cast<std::size_t>(std::max(s.max_probes, 1)));
        // partial Fisher-Yates
        for (std::size_t i = 0; i < take; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            const std::size_t j = pick(g);
            std::swap(cand[i], cand[j]);
            std::swap(weight[i], weight[j]);
        }
        const double scale = take ? static_cast<double>(n) / static_cast<double>(take) : 0.0;
        for (std::size_t i = 0; i < take; ++i) {
            auto link = probe_link(r, c, kind, cand[i]);
            const double sir = compute_sir(*link, em[static_cast<std::size_t>(band)], c, r.window, r.toroidal,
                                           s.image_rings, fade);
            const double w = weight[i] * scale;
            out.total[k] += w;
            if (sir > gamma)
                out.covered[k] += w;
        }
        out.probes[k] = static_cast<long>(take);
    };

    for (Tier t : {Tier::macro, Tier::small})
        for (Mode m : {Mode::downlink, Mode::uplink}) {
            std::vector<int> cand;
            std::vector<double> w;
            const auto& list = r.tier(t);
            for (std::size_t i = 0; i < list.size(); ++i)
                if (list[i].mode == m && list[i].served >= 0) {
                    cand.push_back(static_cast<int>(i));
                    w.push_back(list[i].n_users);
                }
            run_probes(kind_of(t, m), std::move(cand), std::move(w), t, c.gamma(t, m));
        }
    {
        std::vector<int> cand;
        for (std::size_t i = 0; i < r.d2d.size(); ++i)
            if (r.d2d[i].retained)
                cand.push_back(static_cast<int>(i));
        std::vector<double> w(cand.size(), 1.0);
        run_probes(ProbeKind::d2d, std::move(cand), std::move(w), Tier::small, c.gamma_d);
    }
    return out;
}

}  // namespace sim_detail

/// Runs all iterations. d2d_access < 0 means carrier sensing; otherwise ALOHA.
inline SimulationResult simulate(const NetworkConfig& c, const SimSettings& s, double d2d_access = -1.0)
{
    require_valid(c);
    if (s.iterations < 1)
        throw std::invalid_argument("SimSettings: iterations must be >= 1");
    const auto n = static_cast<std::size_t>(s.iterations);
    std::vector<sim_detail::IterationOutput> outs(n);
    const int workers = std::max(1, s.workers);
    auto work = [&](int w) {
        for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(workers))
            outs[i] = sim_detail::run_iteration(c, s, i, d2d_access);
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(work, w);
        for (auto& t : pool)
            t.join();
    }

    SimulationResult res;
    res.settings = s;
    for (auto& p : res.probes) {
        p.covered.reserve(n);
        p.total.reserve(n);
    }
    for (auto& o : outs) {
        for (int k = 0; k < kProbeKinds; ++k) {
            auto& p = res.probes[static_cast<std::size_t>(k)];
            p.covered.push_back(o.covered[static_cast<std::size_t>(k)]);
            p.total.push_back(o.total[static_cast<std::size_t>(k)]);
            p.probes += o.probes[static_cast<std::size_t>(k)];
            if (o.probes[static_cast<std::size_t>(k)] == 0)
                ++p.empty_iterations;
        }
        for (std::size_t k = 0; k < 4; ++k) {
            res.assoc[k] += o.assoc[k];
            res.cells[k] += o.cells[k];
            res.empty_cells[k] += o.empty_cells[k];
            auto& h = res.load_hist[k];
            if (h.size() < o.load_hist[k].size())
                h.resize(o.load_hist[k].size(), 0);
            for (std::size_t j = 0; j < o.load_hist[k].size(); ++j)
                h[j] += o.load_hist[k][j];
            auto& d = res.serving_distances[k];
            d.insert(d.end(), o.distances[k].begin(), o.distances[k].end());
        }
        res.unassociated += o.unassociated;
        res.potential_d2d += o.potential_d2d;
        res.retained_d2d += o.retained_d2d;
        o = {};
    }
    return res;
}

// ---------------------------------------------------------------------------
// Estimators

struct Proportion
{
    double value = std::numeric_limits<double>::quiet_NaN();
    double ci_half = std::numeric_limits<double>::quiet_NaN();
    double effective_n = 0.0;
    long probes = 0;
};

/// Ratio estimate over iterations with a Wilson 95% interval. Iterations are
/// treated as clusters; the effective sample size comes from the
/// linearized variance of the ratio.
inline Proportion ratio_estimate(const std::vector<double>& covered, const std::vector<double>& total, long probes)
{
    Proportion p;
    p.probes = probes;
    double sy = 0.0, sw = 0.0;
    long m = 0;
    for (std::size_t i = 0; i < covered.size(); ++i) {
        sy += covered[i];
        sw += total[i];
        if (total[i] > 0.0)
            ++m;
    }
    if (sw == 0.0)
        return p;
    const double ph = sy / sw;
    double var = 0.0;
    for (std::size_t i = 0; i < covered.size(); ++i) {
        const double e = covered[i] - ph * total[i];
        var += e * e;
    }
    var = m > 1 ? var / (sw * sw) * static_cast<double>(m) / static_cast<double>(m - 1) : 0.0;
    double n_eff = static_cast<double>(probes);
    if (var > 0.0 && ph > 0.0 && ph < 1.0)
        n_eff = std::min(n_eff, ph * (1.0 - ph) / var);
    n_eff = std::max(n_eff, 1.0);
    constexpr double z = 1.959963984540054;
    const double z2n = z * z / n_eff;
    p.value = ph;
    p.ci_half = z / (1.0 + z2n) * std::sqrt(ph * (1.0 - ph) / n_eff + z2n / (4.0 * n_eff));
    p.effective_n = n_eff;
    return p;
}

inline Proportion probe_estimate(const SimulationResult& r, ProbeKind k)
{
    const auto& p = r.probes[static_cast<std::size_t>(k)];
    return ratio_estimate(p.covered, p.total, p.probes);
}

inline constexpr long kMinProbes = 100;

inline CoverageReport coverage_report(const SimulationResult& r)
{
    CoverageReport rep;
    rep.source = CoverageReport::Source::simulated;
    auto fill = [&](ProbeKind k, std::optional<double>& v, std::optional<double>& ci) {
        auto e = probe_estimate(r, k);
        if (e.probes == 0)
            return;
        v = e.value;
        ci = e.ci_half;
        if (e.probes < kMinProbes)
            rep.warnings.push_back(std::string("insufficient samples for ") + to_string(k) + " ("
                                   + std::to_string(e.probes) + " probes)");
    };
    fill(ProbeKind::macro_dl, rep.p_m_d, rep.ci.p_m_d);
    fill(ProbeKind::macro_ul, rep.p_m_u, rep.ci.p_m_u);
    fill(ProbeKind::small_dl, rep.p_s_d, rep.ci.p_s_d);
    fill(ProbeKind::small_ul, rep.p_s_u, rep.ci.p_s_u);
    fill(ProbeKind::d2d, rep.p_d2d, rep.ci.p_d2d);

    auto overall = [&](ProbeKind a, ProbeKind b, std::optional<double>& v, std::optional<double>& ci) {
        const auto& pa = r.probes[static_cast<std::size_t>(a)];
        const auto& pb = r.probes[static_cast<std::size_t>(b)];
        std::vector<double> cov(pa.covered.size()), tot(pa.total.size());
        for (std::size_t i = 0; i < cov.size(); ++i) {
            cov[i] = pa.covered[i] + pb.covered[i];
            tot[i] = pa.total[i] + pb.total[i];
        }
        auto e = ratio_estimate(cov, tot, pa.probes + pb.probes);
        if (e.probes == 0)
            return;
        v = e.value;
        ci = e.ci_half;
    };
    overall(ProbeKind::macro_dl, ProbeKind::small_dl, rep.overall_d, rep.ci.overall_d);
    overall(ProbeKind::macro_ul, ProbeKind::small_ul, rep.overall_u, rep.ci.overall_u);
    return rep;
}

inline bool has_insufficient_samples(const CoverageReport& rep)
{
    for (const auto& w : rep.warnings)
        if (w.rfind("insufficient samples", 0) == 0)
            return true;
    return false;
}

inline CoverageReport estimate_coverage(const NetworkConfig& c, const SimSettings& s)
{
    return coverage_report(simulate(c, s));
}

inline CoverageReport estimate_aloha_coverage(const NetworkConfig& c, const SimSettings& s, double p_access)
{
    if (!(p_access > 0.0 && p_access <= 1.0))
        throw std::invalid_argument("estimate_aloha_coverage: p_access must lie in (0, 1]");
    return coverage_report(simulate(c, s, p_access));
}

/// Empirical distribution of users per cell for one tier and mode.
inline std::vector<double> load_histogram(const SimulationResult& r, Tier t, Mode m)
{
    const auto& h = r.load_hist[static_cast<std::size_t>(sim_detail::slot(t, m))];
    long total = 0;
    for (long v : h)
        total += v;
    std::vector<double> out(h.size(), 0.0);
    if (total == 0)
        return out;
    for (std::size_t i = 0; i < h.size(); ++i)
        out[i] = static_cast<double>(h[i]) / static_cast<double>(total);
    return out;
}

inline std::vector<double> estimate_load_histogram(const NetworkConfig& c, const SimSettings& s, Tier t, Mode m)
{
    return load_histogram(simulate(c, s), t, m);
}

/// Fraction of associated users of a mode that picked tier t.
inline double association_fraction(const SimulationResult& r, Tier t, Mode m)
{
    const double mine = static_cast<double>(r.assoc[static_cast<std::size_t>(sim_detail::slot(t, m))]);
    const double other = static_cast<double>(
        r.assoc[static_cast<std::size_t>(sim_detail::slot(t == Tier::macro ? Tier::small : Tier::macro, m))]);
    return mine + other > 0.0 ? mine / (mine + other) : std::numeric_limits<double>::quiet_NaN();
}

inline double empty_cell_fraction(const SimulationResult& r, Tier t, Mode m)
{
    const auto k = static_cast<std::size_t>(sim_detail::slot(t, m));
    return r.cells[k] ? static_cast<double>(r.empty_cells[k]) / static_cast<double>(r.cells[k])
                      : std::numeric_limits<double>::quiet_NaN();
}

/// Active (non-void) cells of a tier and mode per m^2.
inline double active_density(const SimulationResult& r, Tier t, Mode m)
{
    const auto k = static_cast<std::size_t>(sim_detail::slot(t, m));
    return static_cast<double>(r.cells[k] - r.empty_cells[k]) / r.area();
}

inline double retention_fraction(const SimulationResult& r)
{
    return r.potential_d2d ? static_cast<double>(r.retained_d2d) / static_cast<double>(r.potential_d2d)
                           : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace tddnet
