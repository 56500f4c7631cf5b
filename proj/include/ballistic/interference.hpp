#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "ballistic/analytic.hpp"
#include "ballistic/core.hpp"
#include "ballistic/grid.hpp"
#include "ballistic/stepper.hpp"

namespace ballistic {

/// Per-snapshot single-beam densities and their composed intensity.
struct IntensityMap {
    std::vector<double> times;
    std::vector<double> x_axis;
    std::vector<std::vector<double>> p1;
    std::vector<std::vector<double>> p2;
    std::vector<std::vector<double>> p_total;
};

/// Relative phase of the two beams at x: m dvx x / hbar.
inline double phase(double x, double dvx, const PhysicalParams& params) {
    return params.mass() * dvx * x / params.hbar();
}

/// Distance between neighbouring fringe maxima, 2 pi hbar / (m dvx).
inline double fringe_spacing(double dvx, const PhysicalParams& params) {
    if (dvx == 0.0) throw ValidationError("dvx", "no fringes without a velocity difference");
    return 2.0 * std::numbers::pi * params.hbar() / (params.mass() * std::abs(dvx));
}

/// Two-wave intensity p1 + p2 + 2 sqrt(p1 p2) cos(phi).
inline double compose_intensity(double p1, double p2, double phi) {
    if (!(p1 >= 0.0)) throw ValidationError("p1", "density must be non-negative");
    if (!(p2 >= 0.0)) throw ValidationError("p2", "density must be non-negative");
    const double r1 = std::sqrt(p1);
    const double r2 = std::sqrt(p2);
    // (r1 - r2)^2 + 2 r1 r2 (1 + cos phi): same value, never rounds below zero.
    const double d = r1 - r2;
    return d * d + 2.0 * r1 * r2 * (1.0 + std::cos(phi));
}

/// Grid holding both beams (including their drift up to t_final) within safety_span widths.
inline Grid1D auto_grid_double_slit(const SlitConfig& slits, const PhysicalParams& params,
                                    double t_final, double dt, double dx, double safety_span,
                                    std::size_t nx_cap = kDefaultNxCap) {
    if (slits.sigma0() / dx < kMinPointsPerSigma0 * (1.0 - 1e-12)) {
        throw ValidationError("dx", "need at least 8 points per sigma0");
    }
    if (!(safety_span >= kMinSafetySpan)) throw ValidationError("safety_span", "must be at least 5");
    const double sigma_end = analytic_sigma(t_final, slits.sigma0(), params.diffusivity());
    const double reach = std::max({std::abs(slits.center1()), std::abs(slits.center2()),
                                   std::abs(slits.center1() + slits.v1() * t_final),
                                   std::abs(slits.center2() + slits.v2() * t_final)});
    return centered_grid(0.0, reach + safety_span * sigma_end, dx, dt, t_final, nx_cap);
}

namespace detail {

/// Samples f(x - shift) by linear interpolation; zero outside the grid.
inline std::vector<double> shift_field(std::span<const double> f, const Grid1D& grid, double shift) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = (grid.x(i) - shift - grid.x_min()) / grid.dx();
        if (s < 0.0 || s > static_cast<double>(n - 1)) continue;
        const auto j = std::min(static_cast<std::size_t>(s), n - 2);
        const double w = s - static_cast<double>(j);
        out[i] = (1.0 - w) * f[j] + w * f[j + 1];
    }
    return out;
}

}  // namespace detail

/// Evolves both slit beams in their co-moving frames, shifts each by v_i t and composes
/// the total intensity cell by cell.
inline IntensityMap simulate_double_slit(const SlitConfig& slits, const Grid1D& grid,
                                         const PhysicalParams& params,
                                         std::span<const double> snapshot_times,
                                         const StepperOptions& options = {}) {
    const GaussianState beam1(slits.sigma0(), slits.center1());
    const GaussianState beam2(slits.sigma0(), slits.center2());
    auto run = [&](const GaussianState& beam) {
        return evolve(sample_gaussian(grid, beam), grid, beam, params, snapshot_times, options);
    };
    auto future1 = std::async(std::launch::async, run, beam1);
    EvolveResult r2 = run(beam2);
    EvolveResult r1 = future1.get();

    IntensityMap map;
    map.x_axis = grid.nodes();
    const double dx = grid.dx();
    for (std::size_t s = 0; s < r1.snapshots.size(); ++s) {
        const double t = r1.snapshots[s].time();
        auto p1 = detail::shift_field(r1.snapshots[s].values(), grid, slits.v1() * t);
        auto p2 = detail::shift_field(r2.snapshots[s].values(), grid, slits.v2() * t);
        for (const auto* p : {&p1, &p2}) {
            const double lost = 1.0 - detail::sum(*p) * dx;
            if (lost > options.leak_threshold || detail::boundary_fraction(*p) > options.leak_threshold) {
                std::ostringstream msg;
                msg << "beam drifted out of the domain at t = " << t << " (lost mass " << lost << ")";
                throw DomainTooSmallError(t, msg.str());
            }
        }
        std::vector<double> total(p1.size());
        for (std::size_t i = 0; i < total.size(); ++i) {
            total[i] = compose_intensity(p1[i], p2[i], phase(map.x_axis[i], slits.dvx(), params));
        }
        map.times.push_back(t);
        map.p1.push_back(std::move(p1));
        map.p2.push_back(std::move(p2));
        map.p_total.push_back(std::move(total));
    }
    return map;
}

struct FringeMaximum {
    long n = 0;
    double x_detected = 0.0;
    double x_analytic = 0.0;
    double error_cells = 0.0;
};

/// Local maxima of the fringe signal (p_tot - p1 - p2) / (2 sqrt(p1 p2)) at one snapshot.
///
/// Only cells where the envelope 2 sqrt(p1 p2) exceeds envelope_floor times its maximum
/// are searched. Each maximum is refined by a parabola through the node and its neighbours.
inline std::vector<FringeMaximum> detect_fringe_maxima(const IntensityMap& map, std::size_t snapshot,
                                                       double dvx, const PhysicalParams& params,
                                                       double envelope_floor = 1e-6) {
    if (snapshot >= map.times.size()) throw ValidationError("snapshot", "index out of range");
    const auto& p1 = map.p1[snapshot];
    const auto& p2 = map.p2[snapshot];
    const auto& pt = map.p_total[snapshot];
    const std::size_t n = pt.size();
    const double dx = map.x_axis[1] - map.x_axis[0];
    const double spacing = fringe_spacing(dvx, params);

    std::vector<double> envelope(n);
    for (std::size_t i = 0; i < n; ++i) envelope[i] = 2.0 * std::sqrt(p1[i] * p2[i]);
    const double env_max = *std::max_element(envelope.begin(), envelope.end());
    if (!(env_max > 0.0)) return {};

    std::vector<double> signal(n, 0.0);
    std::vector<bool> valid(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (envelope[i] > envelope_floor * env_max) {
            signal[i] = (pt[i] - p1[i] - p2[i]) / envelope[i];
            valid[i] = true;
        }
    }

    std::vector<FringeMaximum> out;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!valid[i - 1] || !valid[i] || !valid[i + 1]) continue;
        if (!(signal[i] > signal[i - 1] && signal[i] >= signal[i + 1])) continue;
        const double curv = signal[i - 1] - 2.0 * signal[i] + signal[i + 1];
        double offset = 0.0;
        if (curv < 0.0) offset = 0.5 * (signal[i - 1] - signal[i + 1]) / curv;
        FringeMaximum m;
        m.x_detected = map.x_axis[i] + offset * dx;
        m.n = std::lround(m.x_detected / spacing);
        m.x_analytic = static_cast<double>(m.n) * spacing;
        m.error_cells = std::abs(m.x_detected - m.x_analytic) / dx;
        out.push_back(m);
    }
    return out;
}

/// Mean distance between consecutive detected maxima; 0 when fewer than two were found.
inline double measured_fringe_spacing(std::span<const FringeMaximum> maxima) {
    if (maxima.size() < 2) return 0.0;
    return (maxima.back().x_detected - maxima.front().x_detected) /
           static_cast<double>(maxima.size() - 1);
}

}  // namespace ballistic
