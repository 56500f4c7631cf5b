#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ballistic/errors.hpp"

namespace ballistic {

namespace detail {

inline void require_positive(double value, const char* field) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError(field, "must be positive and finite, got " + std::to_string(value));
    }
}

inline void require_finite(double value, const char* field) {
    if (!std::isfinite(value)) {
        throw ValidationError(field, "must be finite");
    }
}

}  // namespace detail

/// Reduced Planck constant, mass and the derived diffusivity D = hbar / (2 m).
class PhysicalParams {
public:
    PhysicalParams(double hbar, double mass) : hbar_(hbar), mass_(mass) {
        detail::require_positive(hbar, "hbar");
        detail::require_positive(mass, "mass");
        diffusivity_ = hbar_ / (2.0 * mass_);
    }

    double hbar() const noexcept { return hbar_; }
    double mass() const noexcept { return mass_; }
    double diffusivity() const noexcept { return diffusivity_; }

private:
    double hbar_;
    double mass_;
    double diffusivity_;
};

inline PhysicalParams make_physical_params(double hbar, double mass) {
    return PhysicalParams(hbar, mass);
}

/// Power-law diffusion coefficient D_t(t) = k t^alpha.
struct GeneralDiffusionLaw {
    double k = 0.0;
    double alpha = 0.0;

    GeneralDiffusionLaw() = default;
    GeneralDiffusionLaw(double k_, double alpha_) : k(k_), alpha(alpha_) {
        if (!(k >= 0.0) || !(alpha >= 0.0)) {
            throw ValidationError("k/alpha", "both must be non-negative");
        }
    }

    /// alpha = 1, k = D^2 / sigma0^2: the only law compatible with Gaussian spreading.
    static GeneralDiffusionLaw ballistic(double sigma0, double diffusivity) {
        detail::require_positive(sigma0, "sigma0");
        detail::require_positive(diffusivity, "diffusivity");
        return {diffusivity * diffusivity / (sigma0 * sigma0), 1.0};
    }

    double coefficient(double t) const { return k * std::pow(t, alpha); }
};

/// Initial Gaussian packet: width at t = 0 and mean position.
class GaussianState {
public:
    GaussianState(double sigma0, double center) : sigma0_(sigma0), center_(center) {
        detail::require_positive(sigma0, "sigma0");
        detail::require_finite(center, "center");
    }

    double sigma0() const noexcept { return sigma0_; }
    double center() const noexcept { return center_; }

private:
    double sigma0_;
    double center_;
};

/// Uniform 1D mesh plus the macro time step.
class Grid1D {
public:
    Grid1D(double x_min, double dx, std::size_t nx, double dt, std::size_t n_steps)
        : x_min_(x_min), dx_(dx), nx_(nx), dt_(dt), n_steps_(n_steps) {
        detail::require_finite(x_min, "x_min");
        detail::require_positive(dx, "dx");
        detail::require_positive(dt, "dt");
        if (nx < 3) throw ValidationError("nx", "need at least 3 nodes");
        if (n_steps < 1) throw ValidationError("n_steps", "need at least one step");
    }

    double x_min() const noexcept { return x_min_; }
    double dx() const noexcept { return dx_; }
    std::size_t nx() const noexcept { return nx_; }
    double dt() const noexcept { return dt_; }
    std::size_t n_steps() const noexcept { return n_steps_; }

    double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }
    double x_max() const noexcept { return x(nx_ - 1); }
    double t_final() const noexcept { return static_cast<double>(n_steps_) * dt_; }

    std::vector<double> nodes() const {
        std::vector<double> xs(nx_);
        for (std::size_t i = 0; i < nx_; ++i) xs[i] = x(i);
        return xs;
    }

private:
    double x_min_;
    double dx_;
    std::size_t nx_;
    double dt_;
    std::size_t n_steps_;
};

/// Probability density sampled on a grid at one instant.
class Field {
public:
    Field(double time, std::vector<double> values) : time_(time), values_(std::move(values)) {
        detail::require_finite(time, "time");
        for (double v : values_) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw ValidationError("values", "density samples must be finite and non-negative");
            }
        }
    }

    double time() const noexcept { return time_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// Discrete mass sum(values) * dx.
    double mass(double dx) const {
        return std::accumulate(values_.begin(), values_.end(), 0.0) * dx;
    }

    bool operator==(const Field&) const = default;

private:
    double time_;
    std::vector<double> values_;
};

/// Two Gaussian slits at -separation/2 and +separation/2 with transverse drifts v1, v2.
class SlitConfig {
public:
    SlitConfig(double separation, double sigma0, double v1, double v2)
        : separation_(separation), sigma0_(sigma0), v1_(v1), v2_(v2), dvx_(v1 - v2) {
        if (!(separation >= 0.0) || !std::isfinite(separation)) {
            throw ValidationError("separation", "must be non-negative and finite");
        }
        detail::require_positive(sigma0, "sigma0");
        detail::require_finite(v1, "v1");
        detail::require_finite(v2, "v2");
    }

    /// Mirror-symmetric beams: v1 = +dvx/2 (left slit), v2 = -dvx/2 (right slit).
    static SlitConfig symmetric(double separation, double sigma0, double dvx) {
        return SlitConfig(separation, sigma0, 0.5 * dvx, -0.5 * dvx);
    }

    double separation() const noexcept { return separation_; }
    double sigma0() const noexcept { return sigma0_; }
    double v1() const noexcept { return v1_; }
    double v2() const noexcept { return v2_; }
    double dvx() const noexcept { return dvx_; }

    double center1() const noexcept { return -0.5 * separation_; }
    double center2() const noexcept { return 0.5 * separation_; }

private:
    double separation_;
    double sigma0_;
    double v1_;
    double v2_;
    double dvx_;
};

struct PathPoint {
    double t;
    double x;
    bool operator==(const PathPoint&) const = default;
};

/// Flux lines: one path of (t, x) samples per quantile.
class TrajectorySet {
public:
    TrajectorySet(std::vector<double> quantiles, std::vector<std::vector<PathPoint>> paths)
        : quantiles_(std::move(quantiles)), paths_(std::move(paths)) {
        if (quantiles_.size() != paths_.size()) {
            throw ValidationError("paths", "one path per quantile required");
        }
        validate_quantiles(quantiles_);
    }

    static void validate_quantiles(std::span<const double> qs) {
        if (qs.empty()) throw ValidationError("quantiles", "list is empty");
        for (std::size_t i = 0; i < qs.size(); ++i) {
            if (!(qs[i] > 0.0 && qs[i] < 1.0)) {
                throw ValidationError("quantiles", "every quantile must lie strictly inside (0, 1)");
            }
            if (i > 0 && !(qs[i] > qs[i - 1])) {
                throw ValidationError("quantiles", "must be strictly increasing");
            }
        }
    }

    const std::vector<double>& quantiles() const noexcept { return quantiles_; }
    const std::vector<std::vector<PathPoint>>& paths() const noexcept { return paths_; }

    /// True when positions are non-decreasing in quantile index at every shared sample.
    bool non_crossing() const {
        for (std::size_t q = 1; q < paths_.size(); ++q) {
            const auto& lo = paths_[q - 1];
            const auto& hi = paths_[q];
            const std::size_t n = std::min(lo.size(), hi.size());
            for (std::size_t k = 0; k < n; ++k) {
                if (hi[k].x < lo[k].x) return false;
            }
        }
        return true;
    }

private:
    std::vector<double> quantiles_;
    std::vector<std::vector<PathPoint>> paths_;
};

}  // namespace ballistic
