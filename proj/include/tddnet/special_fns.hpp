#pragma once

// Scalar special functions used by the coverage expressions.
//
//   C(alpha)        = (2 pi / alpha) / sin(2 pi / alpha) = int_0^inf du / (1 + u^{alpha/2})
//   delta(beta, a)  = beta^{2/a} int_{beta^{-2/a}}^inf du / (1 + u^{a/2})
//   Z               = (sQ)^{2/a} int_theta int_{kl^2/(sQ)^{2/a}}^{ku^2/(sQ)^{2/a}} du / (1 + u^{a/2}) dtheta

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "quadrature.hpp"

namespace tddnet {

inline void require_alpha(double alpha)
{
    if (!(alpha > 2.0) || std::isnan(alpha))
        throw std::domain_error("alpha must exceed 2");
}

inline double c_alpha(double alpha)
{
    require_alpha(alpha);
    if (std::isinf(alpha))
        return 1.0;
    const double x = 2.0 * std::numbers::pi / alpha;
    return x / std::sin(x);
}

inline double gamma_fn(double x) { return std::tgamma(x); }

namespace detail {

inline bool is_alpha4(double alpha) { return alpha == 4.0; }

// Series for int_x^inf du/(1+u^a), valid for x > 1. Terms alternate and
// shrink by x^{-a}, so for x >= 2 it converges quickly.
inline double tail_series(double x, double a)
{
    const double ratio = std::pow(x, -a);
    double term_pow = std::pow(x, 1.0 - a);  // x^{1 - a(k+1)}
    double sum = 0.0;
    for (int k = 0; k < 400; ++k) {
        const double denom = a * (k + 1) - 1.0;
        const double t = term_pow / denom;
        sum += (k % 2 == 0) ? t : -t;
        if (std::abs(t) < 1e-17 * std::abs(sum))
            break;
        term_pow *= ratio;
    }
    return sum;
}

inline double head_quad(double x, double a)
{
    QuadratureSettings s;
    s.rel_tol = 1e-13;
    s.abs_tol = 1e-16;
    auto r = integrate_1d([a](double u) { return 1.0 / (1.0 + std::pow(u, a)); }, 0.0, x, s);
    return r.value;
}

inline constexpr double kSplit = 2.0;

}  // namespace detail

/// int_0^x du / (1 + u^{alpha/2}).
inline double head_integral(double x, double alpha)
{
    require_alpha(alpha);
    if (x <= 0.0)
        return 0.0;
    if (std::isinf(x))
        return c_alpha(alpha);
    if (detail::is_alpha4(alpha))
        return std::atan(x);
    const double a = alpha / 2.0;
    if (x <= detail::kSplit)
        return detail::head_quad(x, a);
    return c_alpha(alpha) - detail::tail_series(x, a);
}

/// int_x^inf du / (1 + u^{alpha/2}).
inline double tail_integral(double x, double alpha)
{
    require_alpha(alpha);
    if (std::isinf(x))
        return 0.0;
    if (x <= 0.0)
        return c_alpha(alpha);
    if (detail::is_alpha4(alpha))
        return x > 1.0 ? std::atan(1.0 / x) : std::numbers::pi / 2.0 - std::atan(x);
    const double a = alpha / 2.0;
    if (x >= detail::kSplit)
        return detail::tail_series(x, a);
    return c_alpha(alpha) - detail::head_quad(x, a);
}

/// int_lo^hi du / (1 + u^{alpha/2}); hi may be +inf.
inline double band_integral(double lo, double hi, double alpha)
{
    require_alpha(alpha);
    lo = std::max(lo, 0.0);
    if (!(hi > lo))
        return 0.0;
    if (detail::is_alpha4(alpha)) {
        if (std::isinf(hi))
            return tail_integral(lo, alpha);
        // arctan difference in the well-conditioned form
        return std::atan((hi - lo) / (1.0 + lo * hi));
    }
    if (lo >= detail::kSplit)
        return detail::tail_series(lo, alpha / 2.0) - tail_integral(hi, alpha);
    if (hi <= detail::kSplit)
        return detail::head_quad(hi, alpha / 2.0) - detail::head_quad(lo, alpha / 2.0);
    return head_integral(detail::kSplit, alpha) - head_integral(lo, alpha)
         + tail_integral(detail::kSplit, alpha) - tail_integral(hi, alpha);
}

inline double delta_fn(double beta, double alpha)
{
    require_alpha(alpha);
    if (!(beta >= 0.0))
        throw std::domain_error("delta_fn: beta must be >= 0");
    if (beta == 0.0)
        return 0.0;
    if (std::isinf(beta))
        return std::numeric_limits<double>::infinity();
    const double b2a = std::pow(beta, 2.0 / alpha);
    return b2a * tail_integral(1.0 / b2a, alpha);
}

// ---------------------------------------------------------------------------
// Z function

/// Z with constant radial bounds. kappa_u may be +inf.
inline double z_fn(double theta_l, double theta_u, double kappa_l, double kappa_u, double s,
                   double q_pow, double alpha)
{
    require_alpha(alpha);
    if (theta_u < theta_l || theta_l < 0.0 || theta_u > std::numbers::pi + 1e-12)
        throw std::domain_error("z_fn: angular bounds must satisfy 0 <= theta_l <= theta_u <= pi");
    if (kappa_l < 0.0 || kappa_u < kappa_l)
        throw std::domain_error("z_fn: radial bounds must satisfy 0 <= kappa_l <= kappa_u");
    if (!(s >= 0.0) || !(q_pow > 0.0))
        throw std::domain_error("z_fn: s >= 0 and Q > 0 required");
    if (s == 0.0 || theta_l == theta_u || kappa_l == kappa_u)
        return 0.0;
    const double k = std::pow(s * q_pow, 2.0 / alpha);
    const double hi = std::isinf(kappa_u) ? kappa_u : kappa_u * kappa_u / k;
    return k * (theta_u - theta_l) * band_integral(kappa_l * kappa_l / k, hi, alpha);
}

/// Z with angle-dependent radial bounds kl(theta), ku(theta).
template <class Lo, class Hi>
QuadratureResult z_fn_curved(double theta_l, double theta_u, Lo&& kappa_l, Hi&& kappa_u, double s,
                             double q_pow, double alpha, const QuadratureSettings& settings = {})
{
    require_alpha(alpha);
    if (theta_u < theta_l)
        throw std::domain_error("z_fn_curved: inverted angular bounds");
    if (s == 0.0 || theta_l == theta_u)
        return {};
    const double k = std::pow(s * q_pow, 2.0 / alpha);
    auto integrand = [&](double th) {
        const double lo = kappa_l(th);
        const double hi = kappa_u(th);
        if (!(hi > lo))
            return 0.0;
        return band_integral(lo * lo / k, hi * hi / k, alpha);
    };
    auto r = integrate_1d(integrand, theta_l, theta_u, settings);
    r.value *= k;
    r.error *= k;
    return r;
}

// ---------------------------------------------------------------------------
// Chord geometry: a ray from the origin at angle theta (measured from the
// direction of the ball center, at distance r) against a circle of radius iota.

struct Chord
{
    double near;  // first crossing (negative when the origin is inside the ball)
    double far;   // second crossing
};

inline Chord chord_lengths(double r, double iota, double theta)
{
    if (r < 0.0 || iota < 0.0)
        throw std::domain_error("chord_lengths: r and iota must be >= 0");
    const double rs = r * std::sin(theta);
    double disc = iota * iota - rs * rs;
    if (disc < 0.0) {
        // allow rounding at the tangent angle
        if (disc < -1e-9 * iota * iota)
            throw std::domain_error("chord_lengths: ray misses the circle");
        disc = 0.0;
    }
    const double root = std::sqrt(disc);
    const double rc = r * std::cos(theta);
    return Chord{rc - root, rc + root};
}

/// Exponent of the Laplace transform of a unit-density PPP of interferers with
/// power q_pow, restricted to the plane minus the ball b(c, iota) with |c| = r:
///   int_{R^2 \ b(c, iota)} dx / (1 + |x|^alpha / (s q_pow)).
/// The typical receiver sits at the origin.
inline QuadratureResult ball_exclusion_exponent(double s, double q_pow, double r, double iota,
                                                double alpha, const QuadratureSettings& settings = {})
{
    require_alpha(alpha);
    if (s == 0.0)
        return {};
    if (std::isinf(iota))
        return {};
    const double pi = std::numbers::pi;
    const double outer_r = iota + r;
    QuadratureResult out;
    out.value = pi * outer_r * outer_r * delta_fn(s * q_pow / std::pow(outer_r, alpha), alpha);

    if (iota == 0.0) {
        // nothing excluded; add the inner disk b(0, r)
        out.value += z_fn(0.0, pi, 0.0, r, s, q_pow, alpha);
        return out;
    }

    // theta runs over [0, pi] only; the mirror half-plane is folded into Z
    if (r <= iota) {
        auto far = [&](double th) { return chord_lengths(r, iota, th).far; };
        auto upper = [&](double) { return outer_r; };
        auto z = z_fn_curved(0.0, pi, far, upper, s, q_pow, alpha, settings);
        out.value += z.value;
        out.error += z.error;
        out.converged = z.converged;
        return out;
    }

    const double big_theta = std::asin(iota / r);
    auto zero = [](double) { return 0.0; };
    auto near = [&](double th) { return std::max(0.0, chord_lengths(r, iota, th).near); };
    auto far = [&](double th) { return chord_lengths(r, iota, th).far; };
    auto upper = [&](double) { return outer_r; };
    auto z1 = z_fn_curved(0.0, big_theta, zero, near, s, q_pow, alpha, settings);
    auto z2 = z_fn_curved(0.0, big_theta, far, upper, s, q_pow, alpha, settings);
    const double z3 = z_fn(big_theta, pi, 0.0, outer_r, s, q_pow, alpha);
    out.value += z1.value + z2.value + z3;
    out.error += z1.error + z2.error;
    out.converged = z1.converged && z2.converged;
    return out;
}

}  // namespace tddnet
