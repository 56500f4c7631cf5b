#pragma once

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <string>

#include "ballistic/analytic.hpp"
#include "ballistic/core.hpp"

namespace ballistic {

inline constexpr std::size_t kDefaultNxCap = std::size_t{1} << 22;
inline constexpr double kMinPointsPerSigma0 = 8.0;
inline constexpr double kMinSafetySpan = 5.0;

/// Number of macro steps of size dt covering [0, t_final]; t_final must be a multiple of dt.
inline std::size_t macro_step_count(double t_final, double dt) {
    detail::require_positive(dt, "dt");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
        throw ValidationError("t_final", "must be non-negative and finite");
    }
    if (t_final == 0.0) return 1;
    const double ratio = t_final / dt;
    const double steps = std::round(ratio);
    if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
        throw ValidationError("dt", "t_final must be an integer multiple of dt");
    }
    return static_cast<std::size_t>(steps);
}

namespace detail {
inline std::string format_count(double n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", n);
    return buf;
}
}  // namespace detail

/// Odd-sized grid centred on `center` whose half-width is at least `min_half_width`.
inline Grid1D centered_grid(double center, double min_half_width, double dx, double dt,
                            double t_final, std::size_t nx_cap = kDefaultNxCap) {
    detail::require_positive(dx, "dx");
    detail::require_positive(min_half_width, "half_width");
    double half_cells = std::ceil(min_half_width / dx);
    if (half_cells * dx < min_half_width) half_cells += 1.0;
    const double nx = 2.0 * half_cells + 1.0;
    if (nx > static_cast<double>(nx_cap)) {
        throw ResourceError("grid needs " + detail::format_count(nx) +
                            " nodes but the cap is " + std::to_string(nx_cap) +
                            "; use a coarser dx, a smaller safety_span or a shorter t_final");
    }
    return Grid1D(center - half_cells * dx, dx, static_cast<std::size_t>(nx), dt,
                  macro_step_count(t_final, dt));
}

/// auto_grid with an explicit spacing instead of points per sigma0.
inline Grid1D auto_grid_with_spacing(const GaussianState& state, const PhysicalParams& params,
                                     double t_final, double dt, double dx, double safety_span,
                                     std::size_t nx_cap = kDefaultNxCap) {
    detail::require_positive(dx, "dx");
    if (state.sigma0() / dx < kMinPointsPerSigma0 * (1.0 - 1e-12)) {
        throw ValidationError("dx", "need at least 8 points per sigma0");
    }
    if (!(safety_span >= kMinSafetySpan)) {
        throw ValidationError("safety_span", "must be at least 5");
    }
    if (!(t_final >= 0.0)) throw ValidationError("t_final", "must be non-negative");
    const double sigma_end = analytic_sigma(t_final, state.sigma0(), params.diffusivity());
    return centered_grid(state.center(), safety_span * sigma_end, dx, dt, t_final, nx_cap);
}

/// Grid sized so the packet stays within safety_span widths of the centre up to t_final.
///
/// dx = sigma0 / points_per_sigma0, nx is odd so the centre is a node.
inline Grid1D auto_grid(const GaussianState& state, const PhysicalParams& params, double t_final,
                        double dt, double points_per_sigma0, double safety_span,
                        std::size_t nx_cap = kDefaultNxCap) {
    if (!(points_per_sigma0 >= kMinPointsPerSigma0)) {
        throw ValidationError("points_per_sigma0", "must be at least 8");
    }
    return auto_grid_with_spacing(state, params, t_final, dt, state.sigma0() / points_per_sigma0,
                                  safety_span, nx_cap);
}

}  // namespace ballistic
