#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "ballistic/analytic.hpp"
#include "ballistic/core.hpp"

namespace ballistic {

/// Von Neumann bound of the explicit three-point stencil.
inline constexpr double kVonNeumannBound = 0.5;

struct StepperOptions {
    /// Largest Courant number evolve lets a substep use.
    double stability_limit = 0.4;
    /// Fraction of mass allowed within 3 cells of either edge at a snapshot.
    double leak_threshold = 1e-6;
    /// Allowed |mass - 1| of the initial field.
    double mass_tolerance = 1e-9;
};

struct StepperReport {
    std::size_t macro_steps = 0;
    std::size_t total_substeps = 0;
    double max_courant = 0.0;
    double mass_drift = 0.0;
    double boundary_leak = 0.0;
};

struct EvolveResult {
    std::vector<Field> snapshots;
    StepperReport report;
};

namespace detail {

/// out[i] = in[i] + nu (in[i+1] + in[i-1] - 2 in[i]); edges pinned to zero.
/// The neighbour sum is formed first so the update commutes exactly with reflection.
inline void fd_kernel(std::span<const double> in, std::span<double> out, double nu) {
    const std::size_t n = in.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out[i] = in[i] + nu * ((in[i + 1] + in[i - 1]) - 2.0 * in[i]);
    }
    out[0] = 0.0;
    out[n - 1] = 0.0;
}

inline double sum(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

/// Mass fraction sitting within 3 cells of either boundary.
inline double boundary_fraction(std::span<const double> v) {
    const double total = sum(v);
    if (total <= 0.0) return 0.0;
    const std::size_t n = v.size();
    const std::size_t band = std::min<std::size_t>(3, n / 2);
    double edge = 0.0;
    for (std::size_t i = 0; i < band; ++i) edge += v[i] + v[n - 1 - i];
    return edge / total;
}

}  // namespace detail

/// One explicit update of the ballistic diffusion stencil with homogeneous Dirichlet edges.
inline Field fd_step(const Field& field, double nu, double stability_limit = kVonNeumannBound) {
    if (field.size() < 3) throw ValidationError("field", "need at least 3 nodes");
    if (!(nu >= 0.0 && nu <= stability_limit)) throw StabilityError(nu, stability_limit);
    std::vector<double> out(field.size());
    detail::fd_kernel(field.values(), out, nu);
    return Field(field.time(), std::move(out));
}

/// nu = D_t(t_next) dt / dx^2, with D_t taken at the end of the step.
inline double courant_number(double t_next, const Grid1D& grid, double sigma0, double diffusivity) {
    return diffusion_coefficient(t_next, sigma0, diffusivity) * grid.dt() / (grid.dx() * grid.dx());
}

/// Grid samples of the initial Gaussian, rescaled to discrete mass exactly 1.
inline Field sample_gaussian(const Grid1D& grid, const GaussianState& state) {
    std::vector<double> v(grid.nx());
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        v[i] = gaussian_pdf(grid.x(i), state.center(), state.sigma0());
    }
    const double mass = detail::sum(v) * grid.dx();
    if (!(mass > 0.0)) throw ValidationError("state", "packet does not overlap the grid");
    for (double& x : v) x /= mass;
    return Field(0.0, std::move(v));
}

/// Standard deviation of the discrete density about its discrete mean.
inline double second_moment_sigma(const Field& field, const Grid1D& grid) {
    if (field.size() != grid.nx()) throw ValidationError("field", "size does not match grid");
    const auto v = field.values();
    const double mass = detail::sum(v);
    if (!(mass > 0.0)) throw ValidationError("field", "zero-mass field has no second moment");
    double mean = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) mean += v[i] * grid.x(i);
    mean /= mass;
    double var = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = grid.x(i) - mean;
        var += v[i] * d * d;
    }
    return std::sqrt(var / mass);
}

/// Integrates dP/dt = D_t(t) d2P/dx2 from t = 0, emitting fields at the requested times.
///
/// Each macro step of size dt is split into the fewest equal substeps that keep every
/// substep's end-time Courant number at or below options.stability_limit. Requested
/// times snap to the nearest macro step; emitted fields carry that step's time.
inline EvolveResult evolve(const Field& initial, const Grid1D& grid, const GaussianState& state,
                           const PhysicalParams& params, std::span<const double> snapshot_times,
                           const StepperOptions& options = {}) {
    if (initial.size() != grid.nx()) throw ValidationError("initial", "size does not match grid");
    if (initial.time() != 0.0) throw ValidationError("initial", "evolution starts at t = 0");
    if (!(options.stability_limit > 0.0 && options.stability_limit <= kVonNeumannBound)) {
        throw ValidationError("stability_limit", "must lie in (0, 0.5]");
    }
    const double dx = grid.dx();
    const double initial_mass = initial.mass(dx);
    if (!(std::abs(initial_mass - 1.0) <= options.mass_tolerance)) {
        throw ValidationError("initial", "field must be normalized to mass 1");
    }

    const double dt = grid.dt();
    std::vector<std::size_t> snap_steps;
    for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
        const double t = snapshot_times[k];
        if (!(t >= 0.0)) throw ValidationError("snapshot_times", "must be non-negative");
        if (k > 0 && t < snapshot_times[k - 1]) {
            throw ValidationError("snapshot_times", "must be sorted");
        }
        if (t > grid.t_final() * (1.0 + 1e-12)) {
            throw ValidationError("snapshot_times", "beyond dt * n_steps");
        }
        snap_steps.push_back(std::min(static_cast<std::size_t>(std::llround(t / dt)), grid.n_steps()));
    }

    EvolveResult result;
    StepperReport& report = result.report;
    std::vector<double> cur(initial.values().begin(), initial.values().end());
    std::vector<double> next(cur.size());
    const double inv_dx2 = 1.0 / (dx * dx);
    const std::size_t last_step = snap_steps.empty() ? 0 : snap_steps.back();
    std::size_t next_snap = 0;

    auto emit = [&](std::size_t step) {
        const double t = static_cast<double>(step) * dt;
        const double leak = detail::boundary_fraction(cur);
        report.boundary_leak = std::max(report.boundary_leak, leak);
        if (leak > options.leak_threshold) {
            std::ostringstream msg;
            msg << "boundary leak " << leak << " exceeds " << options.leak_threshold << " at t = "
                << t << "; enlarge the domain";
            throw DomainTooSmallError(t, msg.str());
        }
        result.snapshots.emplace_back(t, cur);
    };

    for (std::size_t step = 0;; ++step) {
        while (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
            emit(step);
            ++next_snap;
        }
        if (step >= last_step) break;

        const double t0 = static_cast<double>(step) * dt;
        const double t1 = static_cast<double>(step + 1) * dt;
        auto courant = [&](double t, double h) {
            return diffusion_coefficient(t, state.sigma0(), params.diffusivity()) * h * inv_dx2;
        };
        // D_t increases, so the last substep carries the largest Courant number.
        const double nu_end = courant(t1, dt);
        std::size_t substeps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(nu_end / options.stability_limit)));
        while (courant(t1, dt / static_cast<double>(substeps)) > options.stability_limit) ++substeps;
        const double sub_dt = dt / static_cast<double>(substeps);

        for (std::size_t j = 1; j <= substeps; ++j) {
            const double tj = (j == substeps) ? t1 : std::min(t1, t0 + static_cast<double>(j) * sub_dt);
            const double nu = courant(tj, sub_dt);
            report.max_courant = std::max(report.max_courant, nu);
            detail::fd_kernel(cur, next, nu);
            cur.swap(next);
        }
        report.total_substeps += substeps;
        ++report.macro_steps;
    }

    const double final_mass = detail::sum(cur) * dx;
    report.mass_drift = std::abs(final_mass - initial_mass) / initial_mass;
    return result;
}

}  // namespace ballistic
