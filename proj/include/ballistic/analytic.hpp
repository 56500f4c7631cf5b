#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "ballistic/core.hpp"

namespace ballistic {

/// Normal density with mean `center` and standard deviation `sigma`.
inline double gaussian_pdf(double x, double center, double sigma) {
    detail::require_positive(sigma, "sigma");
    const double z = (x - center) / sigma;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

/// Packet width under ballistic spreading: sigma0 * sqrt(1 + D^2 t^2 / sigma0^4).
inline double analytic_sigma(double t, double sigma0, double diffusivity) {
    if (!(t >= 0.0)) throw ValidationError("t", "time must be non-negative");
    detail::require_positive(sigma0, "sigma0");
    const double r = diffusivity * t / (sigma0 * sigma0);
    return sigma0 * std::sqrt(1.0 + r * r);
}

/// d(sigma)/dt of analytic_sigma; tends to D / sigma0 for large t.
inline double analytic_sigma_rate(double t, double sigma0, double diffusivity) {
    const double sigma = analytic_sigma(t, sigma0, diffusivity);
    return diffusivity * diffusivity * t / (sigma0 * sigma0 * sigma);
}

/// Time-dependent diffusion coefficient D_t = D^2 t / sigma0^2.
inline double diffusion_coefficient(double t, double sigma0, double diffusivity) {
    if (!(t >= 0.0)) throw ValidationError("t", "time must be non-negative");
    detail::require_positive(sigma0, "sigma0");
    return diffusivity * diffusivity * t / (sigma0 * sigma0);
}

/// Least-squares fit of log D_t against log t over the given sample times.
///
/// Recovers the power law D_t = k t^alpha generated by diffusion_coefficient;
/// the ballistic law gives alpha = 1 and k = D^2 / sigma0^2 up to rounding.
inline GeneralDiffusionLaw verify_ballistic_exponent(double sigma0, double diffusivity,
                                                     std::span<const double> t_samples) {
    detail::require_positive(sigma0, "sigma0");
    detail::require_positive(diffusivity, "diffusivity");
    for (double t : t_samples) {
        if (!(t > 0.0) || !std::isfinite(t)) {
            throw ValidationError("t_samples", "sample times must be positive");
        }
    }
    std::vector<double> distinct(t_samples.begin(), t_samples.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) {
        throw ValidationError("t_samples", "need at least 3 distinct sample times");
    }

    const auto n = static_cast<double>(t_samples.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    std::vector<double> xs;
    std::vector<double> ys;
    for (double t : t_samples) {
        xs.push_back(std::log(t));
        ys.push_back(std::log(diffusion_coefficient(t, sigma0, diffusivity)));
        mean_x += xs.back();
        mean_y += ys.back();
    }
    mean_x /= n;
    mean_y /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    }
    const double slope = sxy / sxx;
    const double intercept = mean_y - slope * mean_x;
    return GeneralDiffusionLaw(std::exp(intercept), slope);
}

inline double standard_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Inverse of standard_normal_cdf by bisection to 1e-12 absolute.
inline double standard_normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("q", "quantile must lie in (0, 1)");
    double lo = -40.0;
    double hi = 40.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (standard_normal_cdf(mid) < q) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Position of the q-quantile of a spreading Gaussian: center + z_q sigma(t).
inline double analytic_flux_line(double q, double t, const GaussianState& state, double diffusivity) {
    const double z = standard_normal_quantile(q);
    return state.center() + z * analytic_sigma(t, state.sigma0(), diffusivity);
}

/// Velocity of the analytic flux line: z_q d(sigma)/dt.
inline double analytic_flux_velocity(double q, double t, const GaussianState& state,
                                     double diffusivity) {
    return standard_normal_quantile(q) * analytic_sigma_rate(t, state.sigma0(), diffusivity);
}

}  // namespace ballistic
