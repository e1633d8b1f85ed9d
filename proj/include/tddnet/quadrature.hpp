#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature. Infinite upper limits are
// mapped onto a finite interval with x = a + t/(1-t).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tddnet {

struct QuadratureSettings
{
    double rel_tol = 1e-8;
    double abs_tol = 1e-14;
    int max_subdivisions = 400;
    bool transform_infinite = true;
};

struct QuadratureResult
{
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (0.949.., 0.741.., 0.405.., 0).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment
{
    double a, b, value, error;
};

template <class F>
Segment gk15(F& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kKronrodNodes[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        kron += kKronrodWeights[j] * (f1 + f2);
        if (j % 2 == 1)
            gauss += kGaussWeights[j / 2] * (f1 + f2);
    }
    kron *= h;
    gauss *= h;
    return Segment{a, b, kron, std::abs(kron - gauss)};
}

template <class F>
QuadratureResult adaptive(F& f, double a, double b, const QuadratureSettings& s)
{
    if (!(s.rel_tol > 0.0) || s.max_subdivisions < 1)
        throw std::invalid_argument("QuadratureSettings: rel_tol > 0 and max_subdivisions >= 1 required");

    QuadratureResult out;
    std::vector<Segment> segs;
    segs.reserve(static_cast<std::size_t>(s.max_subdivisions) + 1);
    segs.push_back(gk15(f, a, b));
    out.evaluations = 15;

    auto by_error = [](const Segment& x, const Segment& y) { return x.error < y.error; };
    double total = segs.front().value;
    double err = segs.front().error;

    int splits = 0;
    while (err > std::max(s.abs_tol, s.rel_tol * std::abs(total))) {
        if (splits >= s.max_subdivisions) {
            out.converged = false;
            break;
        }
        std::pop_heap(segs.begin(), segs.end(), by_error);
        Segment worst = segs.back();
        segs.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // interval can't be split further in double precision
            segs.push_back(worst);
            std::push_heap(segs.begin(), segs.end(), by_error);
            out.converged = false;
            break;
        }
        Segment left = gk15(f, worst.a, mid);
        Segment right = gk15(f, mid, worst.b);
        out.evaluations += 30;
        segs.push_back(left);
        std::push_heap(segs.begin(), segs.end(), by_error);
        segs.push_back(right);
        std::push_heap(segs.begin(), segs.end(), by_error);
        ++splits;

        // re-sum to avoid drift from repeated subtraction
        total = 0.0;
        err = 0.0;
        for (const auto& sg : segs) {
            total += sg.value;
            err += sg.error;
        }
    }
    out.value = total;
    out.error = err;
    return out;
}

}  // namespace detail

/// Integrate f over [a, b]; b may be +infinity.
template <class F>
QuadratureResult integrate_1d(F&& f, double a, double b, const QuadratureSettings& s = {})
{
    if (std::isnan(a) || std::isnan(b))
        throw std::invalid_argument("integrate_1d: NaN limit");
    if (a == b)
        return {};
    if (b < a) {
        auto r = integrate_1d(f, b, a, s);
        r.value = -r.value;
        return r;
    }
    if (std::isinf(a))
        throw std::invalid_argument("integrate_1d: lower limit must be finite");

    if (std::isinf(b)) {
        if (!s.transform_infinite)
            throw std::invalid_argument("integrate_1d: infinite limit with transform disabled");
        auto g = [&](double t) {
            const double one_minus = 1.0 - t;
            const double x = a + t / one_minus;
            const double fx = f(x);
            if (fx == 0.0)
                return 0.0;
            return fx / (one_minus * one_minus);
        };
        return detail::adaptive(g, 0.0, 1.0, s);
    }
    auto g = [&](double x) { return f(x); };
    return detail::adaptive(g, a, b, s);
}

/// Integrate f(x, y) over x in [a, b], y in [lo(x), hi(x)].
template <class F, class Lo, class Hi>
QuadratureResult integrate_2d(F&& f, double a, double b, Lo&& lo, Hi&& hi,
                              const QuadratureSettings& outer = {},
                              const QuadratureSettings& inner = {})
{
    bool all_inner = true;
    int evals = 0;
    auto row = [&](double x) {
        auto r = integrate_1d([&](double y) { return f(x, y); }, lo(x), hi(x), inner);
        all_inner = all_inner && r.converged;
        evals += r.evaluations;
        return r.value;
    };
    auto r = integrate_1d(row, a, b, outer);
    r.converged = r.converged && all_inner;
    r.evaluations = evals;
    return r;
}

}  // namespace tddnet
