#pragma once

// Independent numerical oracles shared by the test suites. They use plain
// Simpson rules and different parametrizations from the library code.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace tddnet_test {

constexpr double pi = std::numbers::pi;

// Plain composite Simpson rule, used as an oracle independent of the
// adaptive Gauss-Kronrod code.
template <class F>
double simpson(F&& f, double a, double b, int n)
{
    if (n % 2)
        ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Oracle for the excluded-ball exponent that integrates radius-first around
// the receiver: the circle of radius y loses the arc inside the ball, whose
// angular measure follows from the law of cosines. Independent of the chord
// parametrization used by the library.
inline double ball_oracle(double s, double q, double r, double iota, double alpha, int n = 200000)
{
    const double k = s * q;
    auto outside_angle = [&](double y) {
        if (y == 0.0)
            return r >= iota ? 2.0 * pi : 0.0;
        const double c = (y * y + r * r - iota * iota) / (2.0 * y * r);
        if (c >= 1.0)
            return 2.0 * pi;
        if (c <= -1.0)
            return 0.0;
        return 2.0 * pi - 2.0 * std::acos(c);
    };
    // y = exp(t), dy = y dt
    auto g = [&](double t) {
        const double y = std::exp(t);
        return outside_angle(y) * y * y / (1.0 + std::pow(y, alpha) / k);
    };
    const double scale = std::pow(k, 1.0 / alpha);
    std::vector<double> cuts = {std::log(scale) - 40.0};
    for (double b : {std::abs(r - iota), r + iota})
        if (b > 0.0 && std::log(b) > cuts.back())
            cuts.push_back(std::log(b));
    const double top = std::log(std::max(scale, r + iota)) + 40.0 / (alpha - 2.0);
    cuts.push_back(top);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += simpson(g, cuts[i], cuts[i + 1], n);
    return total;
}

// int_lo^inf du / (1 + u^{a}) via u = exp(t), tail past t_max in closed form.
inline double tail_oracle(double lo, double a)
{
    auto g = [&](double t) {
        const double u = std::exp(t);
        return u / (1.0 + std::pow(u, a));
    };
    const double t0 = std::log(lo);
    const double t1 = std::max(t0, 0.0) + 60.0 / (a - 1.0);
    const double u1 = std::exp(t1);
    return simpson(g, t0, t1, 400000) + std::pow(u1, 1.0 - a) / (a - 1.0);
}

}  // namespace tddnet_test
