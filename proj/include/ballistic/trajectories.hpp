#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "ballistic/core.hpp"

namespace ballistic {

/// Trapezoid cumulative integral from x_min, scaled so the last entry is exactly 1.
inline std::vector<double> cumulative(const Field& field, const Grid1D& grid) {
    if (field.size() != grid.nx()) throw ValidationError("field", "size does not match grid");
    const auto v = field.values();
    std::vector<double> c(v.size(), 0.0);
    for (std::size_t i = 1; i < v.size(); ++i) {
        c[i] = c[i - 1] + 0.5 * (v[i - 1] + v[i]) * grid.dx();
    }
    const double total = c.back();
    if (!(total > 0.0)) throw ValidationError("field", "zero-mass field has no cumulative");
    for (double& x : c) x /= total;
    c.back() = 1.0;
    return c;
}

/// Position where the piecewise-linear cumulative first reaches q.
inline double invert_cdf(std::span<const double> cdf, const Grid1D& grid, double q) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("q", "quantile must lie in (0, 1)");
    if (cdf.size() != grid.nx()) throw ValidationError("cumulative", "size does not match grid");
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), q);
    if (it == cdf.begin() || it == cdf.end()) {
        throw ValidationError("cumulative", "must be non-decreasing from 0 to 1");
    }
    const auto i = static_cast<std::size_t>(it - cdf.begin());
    const double c0 = cdf[i - 1];
    const double c1 = cdf[i];
    const double w = (q - c0) / (c1 - c0);
    return grid.x(i - 1) + w * grid.dx();
}

/// Flux lines as fixed-quantile paths through a time-ordered snapshot series.
inline TrajectorySet trace_flux_lines(std::span<const Field> snapshots, const Grid1D& grid,
                                      std::span<const double> quantiles) {
    TrajectorySet::validate_quantiles(quantiles);
    for (std::size_t s = 1; s < snapshots.size(); ++s) {
        if (snapshots[s].time() < snapshots[s - 1].time()) {
            throw ValidationError("snapshots", "must be time-ordered");
        }
    }
    std::vector<std::vector<PathPoint>> paths(quantiles.size());
    for (const Field& snap : snapshots) {
        const auto cdf = cumulative(snap, grid);
        for (std::size_t q = 0; q < quantiles.size(); ++q) {
            paths[q].push_back({snap.time(), invert_cdf(cdf, grid, quantiles[q])});
        }
    }
    return TrajectorySet({quantiles.begin(), quantiles.end()}, std::move(paths));
}

/// Fraction of the field's mass between positions a <= b, integrating the piecewise-linear
/// interpolant of the density (not the cumulative used by invert_cdf).
inline double flux_between(const Field& field, const Grid1D& grid, double a, double b) {
    if (field.size() != grid.nx()) throw ValidationError("field", "size does not match grid");
    if (b < a) throw ValidationError("b", "must not lie left of a");
    const auto v = field.values();
    double total = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) total += 0.5 * (v[i - 1] + v[i]) * grid.dx();
    if (!(total > 0.0)) throw ValidationError("field", "zero mass");
    double inside = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double xl = std::max(a, grid.x(i - 1));
        const double xr = std::min(b, grid.x(i));
        if (xr <= xl) continue;
        auto at = [&](double x) {
            const double w = (x - grid.x(i - 1)) / grid.dx();
            return (1.0 - w) * v[i - 1] + w * v[i];
        };
        inside += 0.5 * (at(xl) + at(xr)) * (xr - xl);
    }
    return inside / total;
}

struct VelocitySample {
    double t;
    double v;
};

/// Finite-difference velocity along each flux line.
///
/// Central differences in the interior (non-uniform spacing allowed), one-sided at the ends.
inline std::vector<std::vector<VelocitySample>> velocity_field(std::span<const Field> snapshots,
                                                               const Grid1D& grid,
                                                               std::span<const double> quantiles) {
    if (snapshots.size() < 2) throw ValidationError("snapshots", "need at least 2 snapshots");
    const auto lines = trace_flux_lines(snapshots, grid, quantiles);
    std::vector<std::vector<VelocitySample>> out;
    for (const auto& path : lines.paths()) {
        const std::size_t n = path.size();
        std::vector<VelocitySample> vs;
        if (n == 2) {
            vs.push_back({path[0].t, (path[1].x - path[0].x) / (path[1].t - path[0].t)});
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t a = (k == 0) ? 0 : k - 1;
                const std::size_t b = (k + 1 == n) ? n - 1 : k + 1;
                vs.push_back({path[k].t, (path[b].x - path[a].x) / (path[b].t - path[a].t)});
            }
        }
        out.push_back(std::move(vs));
    }
    return out;
}

}  // namespace ballistic
