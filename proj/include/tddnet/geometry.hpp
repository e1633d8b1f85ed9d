#pragma once

// Points in a square window [0, L)^2, optionally with a wrap-around metric,
// and a uniform bucket grid for nearest-neighbour and radius queries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace tddnet {

struct Vec2
{
    double x = 0.0, y = 0.0;
};

/// Displacement b - a, reduced to the nearest image on a torus of side L.
inline Vec2 displacement(Vec2 a, Vec2 b, double L, bool toroidal)
{
    double dx = b.x - a.x;
    double dy = b.y - a.y;
    if (toroidal) {
        dx -= L * std::round(dx / L);
        dy -= L * std::round(dy / L);
    }
    return {dx, dy};
}

inline double distance_sq(Vec2 a, Vec2 b, double L, bool toroidal)
{
    const Vec2 d = displacement(a, b, L, toroidal);
    return d.x * d.x + d.y * d.y;
}

inline Vec2 wrap(Vec2 p, double L)
{
    p.x -= L * std::floor(p.x / L);
    p.y -= L * std::floor(p.y / L);
    // floor can land exactly on L for tiny negative inputs
    if (p.x >= L)
        p.x = 0.0;
    if (p.y >= L)
        p.y = 0.0;
    return p;
}

class GridIndex
{
public:
    GridIndex(double L, bool toroidal) : L_(L), toroidal_(toroidal) {}

    /// Build over pts; target_per_cell sets the bucket size.
    void build(const std::vector<Vec2>& pts, double target_per_cell = 2.0)
    {
        pts_ = pts;
        const double n = static_cast<double>(std::max<std::size_t>(pts.size(), 1));
        n_ = std::clamp(static_cast<int>(std::sqrt(n / target_per_cell)), 1, 1024);
        cell_ = L_ / n_;
        start_.assign(static_cast<std::size_t>(n_) * n_ + 1, 0);
        std::vector<int> cell_of(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cell_of[i] = cell_id(pts[i]);
            ++start_[static_cast<std::size_t>(cell_of[i]) + 1];
        }
        for (std::size_t c = 1; c < start_.size(); ++c)
            start_[c] += start_[c - 1];
        items_.assign(pts.size(), 0);
        std::vector<int> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < pts.size(); ++i)
            items_[static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_of[i])]++)] = static_cast<int>(i);
    }

    std::size_t size() const { return pts_.size(); }
    const Vec2& point(int i) const { return pts_[static_cast<std::size_t>(i)]; }

    /// Index and squared distance of the nearest point; (-1, inf) when empty.
    std::pair<int, double> nearest(Vec2 p) const
    {
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        if (pts_.empty())
            return {best, best_d2};
        const int cx = coord(p.x), cy = coord(p.y);
        for (int k = 0;; ++k) {
            if (2 * k + 1 > n_) {
                // rings would wrap onto themselves; finish with a full scan
                for (std::size_t i = 0; i < pts_.size(); ++i) {
                    const double d2 = distance_sq(p, pts_[i], L_, toroidal_);
                    if (d2 < best_d2 || (d2 == best_d2 && static_cast<int>(i) < best)) {
                        best_d2 = d2;
                        best = static_cast<int>(i);
                    }
                }
                return {best, best_d2};
            }
            for (int dy = -k; dy <= k; ++dy)
                for (int dx = -k; dx <= k; ++dx) {
                    if (std::max(std::abs(dx), std::abs(dy)) != k)
                        continue;
                    scan_cell(cx + dx, cy + dy, [&](int i) {
                        const double d2 = distance_sq(p, pts_[static_cast<std::size_t>(i)], L_, toroidal_);
                        if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
                            best_d2 = d2;
                            best = i;
                        }
                    });
                }
            // everything outside ring k is at least k * cell away
            const double reach = k * cell_;
            if (best >= 0 && best_d2 <= reach * reach)
                return {best, best_d2};
        }
    }

    /// Calls f(index, squared distance) for every point within radius r of p.
    template <class F>
    void for_each_within(Vec2 p, double r, F&& f) const
    {
        if (pts_.empty() || !(r >= 0.0))
            return;
        const double r2 = r * r;
        const int m = std::isfinite(r) ? static_cast<int>(std::ceil(r / cell_)) : n_;
        if (2 * m + 1 > n_) {
            for (std::size_t i = 0; i < pts_.size(); ++i) {
                const double d2 = distance_sq(p, pts_[i], L_, toroidal_);
                if (d2 <= r2)
                    f(static_cast<int>(i), d2);
            }
            return;
        }
        const int cx = coord(p.x), cy = coord(p.y);
        for (int dy = -m; dy <= m; ++dy)
            for (int dx = -m; dx <= m; ++dx)
                scan_cell(cx + dx, cy + dy, [&](int i) {
                    const double d2 = distance_sq(p, pts_[static_cast<std::size_t>(i)], L_, toroidal_);
                    if (d2 <= r2)
                        f(i, d2);
                });
    }

private:
    int coord(double v) const { return std::clamp(static_cast<int>(v / cell_), 0, n_ - 1); }
    int cell_id(Vec2 p) const { return coord(p.y) * n_ + coord(p.x); }

    template <class F>
    void scan_cell(int cx, int cy, F&& f) const
    {
        if (toroidal_) {
            cx = ((cx % n_) + n_) % n_;
            cy = ((cy % n_) + n_) % n_;
        } else if (cx < 0 || cy < 0 || cx >= n_ || cy >= n_) {
            return;
        }
        const std::size_t c = static_cast<std::size_t>(cy) * n_ + cx;
        for (int j = start_[c]; j < start_[c + 1]; ++j)
            f(items_[static_cast<std::size_t>(j)]);
    }

    double L_;
    bool toroidal_;
    int n_ = 1;
    double cell_ = 1.0;
    std::vector<Vec2> pts_;
    std::vector<int> start_;
    std::vector<int> items_;
};

}  // namespace tddnet
