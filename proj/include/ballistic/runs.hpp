#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ballistic/analytic.hpp"
#include "ballistic/config.hpp"
#include "ballistic/grid.hpp"
#include "ballistic/interference.hpp"
#include "ballistic/stepper.hpp"
#include "ballistic/table.hpp"
#include "ballistic/trajectories.hpp"

namespace ballistic {

/// Scalar results of one run plus every in-config tolerance it violated.
struct RunSummary {
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }

    void set(const std::string& name, double value) {
        for (auto& [k, v] : metrics) {
            if (k == name) {
                v = value;
                return;
            }
        }
        metrics.emplace_back(name, value);
    }

    double get(const std::string& name) const {
        for (const auto& [k, v] : metrics) {
            if (k == name) return v;
        }
        throw Error("no metric named " + name);
    }

    void check(bool passed, const std::string& what) {
        if (!passed) violations.push_back(what);
    }
};

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline std::string numbered(const char* prefix, std::size_t index, const char* ext = ".dat") {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04zu%s", prefix, index, ext);
    return buf;
}

inline std::filesystem::path prepare_dir(const std::filesystem::path& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
    return out;
}

inline Grid1D single_beam_grid(const RunConfig& cfg) {
    return auto_grid_with_spacing(cfg.packet(), cfg.physical(), cfg.t_final, cfg.dt, cfg.spacing(),
                                  cfg.safety_span, cfg.nx_cap);
}

inline Grid1D slit_grid(const RunConfig& cfg) {
    return auto_grid_double_slit(cfg.slit_config(), cfg.physical(), cfg.t_final, cfg.dt, cfg.spacing(),
                                 cfg.safety_span, cfg.nx_cap);
}

inline void write_field(const std::filesystem::path& path, const Field& field, const Grid1D& grid) {
    Table t;
    t.columns = {{"t", "time"}, {"x", "length"}, {"P", "1/length"}};
    for (std::size_t i = 0; i < grid.nx(); ++i) t.add_row({field.time(), grid.x(i), field[i]});
    write_table(path, t);
}

inline void write_report(const std::filesystem::path& path, const StepperReport& r) {
    Table t;
    t.columns = {{"macro_steps", "1"},
                 {"total_substeps", "1"},
                 {"max_courant", "1"},
                 {"mass_drift", "1"},
                 {"boundary_leak", "1"}};
    t.add_row({static_cast<double>(r.macro_steps), static_cast<double>(r.total_substeps), r.max_courant,
               r.mass_drift, r.boundary_leak});
    write_table(path, t);
}

inline std::vector<Field> total_intensity_fields(const IntensityMap& map) {
    std::vector<Field> out;
    for (std::size_t s = 0; s < map.times.size(); ++s) out.emplace_back(map.times[s], map.p_total[s]);
    return out;
}

}  // namespace detail

/// Single Gaussian packet: sigma time series, field snapshots and the stepper report.
inline RunSummary run_spread(const RunConfig& cfg, const std::filesystem::path& out) {
    detail::prepare_dir(out);
    const auto params = cfg.physical();
    const auto packet = cfg.packet();
    const Grid1D grid = detail::single_beam_grid(cfg);
    const auto result = evolve(sample_gaussian(grid, packet), grid, packet, params, cfg.snapshot_times);

    Table series;
    series.columns = {{"t", "time"}, {"sigma_simulated", "length"}, {"sigma_analytic", "length"}, {"rel_error", "1"}};
    double max_rel = 0.0;
    for (std::size_t s = 0; s < result.snapshots.size(); ++s) {
        const Field& f = result.snapshots[s];
        const double sim = second_moment_sigma(f, grid);
        const double exact = analytic_sigma(f.time(), packet.sigma0(), params.diffusivity());
        const double rel = std::abs(sim - exact) / exact;
        max_rel = std::max(max_rel, rel);
        series.add_row({f.time(), sim, exact, rel});
        detail::write_field(out / detail::numbered("field", s), f, grid);
    }
    write_table(out / "sigma_timeseries.dat", series);
    detail::write_report(out / "stepper_report.dat", result.report);

    RunSummary summary;
    summary.set("max_sigma_rel_error", max_rel);
    summary.set("mass_drift", result.report.mass_drift);
    summary.set("boundary_leak", result.report.boundary_leak);
    summary.set("max_courant", result.report.max_courant);
    summary.set("nx", static_cast<double>(grid.nx()));
    summary.check(max_rel <= cfg.tolerances.sigma_rel, "sigma relative error exceeds tolerances.sigma_rel");
    summary.check(result.report.mass_drift <= cfg.tolerances.mass_drift, "mass drift exceeds tolerances.mass_drift");
    return summary;
}

/// Two Gaussian slits: per-snapshot intensity tables and detected fringe maxima.
inline RunSummary run_doubleslit(const RunConfig& cfg, const std::filesystem::path& out) {
    detail::prepare_dir(out);
    const auto params = cfg.physical();
    const auto slits = cfg.slit_config();
    const Grid1D grid = detail::slit_grid(cfg);
    const auto map = simulate_double_slit(slits, grid, params, cfg.snapshot_times);

    double zero_dvx_dev = 0.0;
    for (std::size_t s = 0; s < map.times.size(); ++s) {
        const auto& pt = map.p_total[s];
        double scale = 1.0;
        if (cfg.normalize_total) {
            const double mass = detail::sum(pt) * grid.dx();
            if (mass > 0.0) scale = 1.0 / mass;
        }
        Table t;
        t.columns = {{"t", "time"}, {"x", "length"}, {"p1", "1/length"}, {"p2", "1/length"}, {"p_total", "1/length"}};
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            t.add_row({map.times[s], map.x_axis[i], map.p1[s][i], map.p2[s][i], pt[i] * scale});
            if (slits.dvx() == 0.0) {
                const double coherent = std::pow(std::sqrt(map.p1[s][i]) + std::sqrt(map.p2[s][i]), 2);
                zero_dvx_dev = std::max(zero_dvx_dev, std::abs(pt[i] - coherent));
            }
        }
        write_table(out / detail::numbered("intensity", s), t);
    }

    RunSummary summary;
    summary.set("dvx", slits.dvx());
    Table fringes;
    fringes.columns = {{"n", "1"}, {"x_detected", "length"}, {"x_analytic", "length"}, {"error_cells", "1"}};
    if (slits.dvx() != 0.0) {
        const auto maxima = detect_fringe_maxima(map, map.times.size() - 1, slits.dvx(), params);
        double worst = 0.0;
        for (const auto& m : maxima) {
            fringes.add_row({static_cast<double>(m.n), m.x_detected, m.x_analytic, m.error_cells});
            worst = std::max(worst, m.error_cells);
        }
        const double measured = maxima.size() >= 2 ? measured_fringe_spacing(maxima) : detail::kNaN;
        summary.set("n_fringes", static_cast<double>(maxima.size()));
        summary.set("fringe_spacing", measured);
        summary.set("fringe_spacing_analytic", fringe_spacing(slits.dvx(), params));
        summary.set("max_fringe_error_cells", worst);
        summary.check(!maxima.empty(), "no fringe maxima detected");
        summary.check(worst <= cfg.tolerances.fringe_cells, "fringe maximum off by more than tolerances.fringe_cells");
    } else {
        summary.set("zero_dvx_max_deviation", zero_dvx_dev);
        summary.check(zero_dvx_dev <= 1e-12, "p_total differs from (sqrt(p1) + sqrt(p2))^2 with dvx = 0");
    }
    write_table(out / "fringes.dat", fringes);
    return summary;
}

/// Flux lines (fixed-quantile paths) of a single beam or of the double-slit intensity.
inline RunSummary run_trajectories(const RunConfig& cfg, const std::filesystem::path& out) {
    if (!cfg.trajectories) throw ConfigError("config has no [trajectories] section");
    detail::prepare_dir(out);
    const auto& tc = *cfg.trajectories;
    const auto params = cfg.physical();
    const bool single = tc.source == TrajectorySource::single;

    const Grid1D grid = single ? detail::single_beam_grid(cfg) : detail::slit_grid(cfg);
    std::vector<Field> snapshots;
    if (single) {
        snapshots = evolve(sample_gaussian(grid, cfg.packet()), grid, cfg.packet(), params, cfg.snapshot_times).snapshots;
    } else {
        snapshots = detail::total_intensity_fields(
            simulate_double_slit(cfg.slit_config(), grid, params, cfg.snapshot_times));
    }

    const auto lines = trace_flux_lines(snapshots, grid, tc.quantiles);
    RunSummary summary;
    Table traj;
    traj.columns = {{"quantile", "1"}, {"t", "time"}, {"y_display", "length"}, {"x", "length"}};
    for (std::size_t q = 0; q < tc.quantiles.size(); ++q) {
        for (const auto& p : lines.paths()[q]) traj.add_row({tc.quantiles[q], p.t, tc.v_y * p.t, p.x});
    }
    write_table(out / "trajectories.dat", traj);
    summary.check(lines.non_crossing(), "flux lines cross");

    double max_flux_error = 0.0;
    double flux_bound = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < snapshots.size(); ++s) {
        const auto vals = snapshots[s].values();
        const double total = snapshots[s].mass(grid.dx());
        const double peak = *std::max_element(vals.begin(), vals.end()) / total;
        flux_bound = std::min(flux_bound, grid.dx() * peak);
        for (std::size_t q = 1; q < tc.quantiles.size(); ++q) {
            const double flux = flux_between(snapshots[s], grid, lines.paths()[q - 1][s].x, lines.paths()[q][s].x);
            const double err = std::abs(flux - (tc.quantiles[q] - tc.quantiles[q - 1])) / (grid.dx() * peak);
            max_flux_error = std::max(max_flux_error, err);
        }
    }
    // Flux error as a multiple of dx * max(P); the constant-flux property needs <= 1.
    summary.set("max_flux_error_over_bound", max_flux_error);
    summary.check(max_flux_error <= 1.0, "flux between adjacent lines drifts by more than dx * max(P)");

    const auto velocities = snapshots.size() >= 2 ? velocity_field(snapshots, grid, tc.quantiles)
                                                  : std::vector<std::vector<VelocitySample>>{};
    Table vel;
    vel.columns = {{"quantile", "1"}, {"t", "time"}, {"velocity", "length/time"}};
    if (single) vel.columns.push_back({"velocity_analytic", "length/time"});

    if (single) {
        const auto packet = cfg.packet();
        const double c = packet.center();
        const double s0 = packet.sigma0();
        const double d = params.diffusivity();
        Table hom;
        hom.columns = {{"quantile", "1"},       {"t", "time"},          {"x_simulated", "length"},
                       {"x_homothetic", "length"}, {"x_analytic", "length"}, {"rel_dev", "1"}};
        double max_hom = 0.0;
        double median_drift = 0.0;
        for (std::size_t q = 0; q < tc.quantiles.size(); ++q) {
            const auto& path = lines.paths()[q];
            const double x0 = path.front().x - c;
            if (std::abs(x0) < grid.dx()) {
                for (const auto& p : path) median_drift = std::max(median_drift, std::abs(p.x - c));
                continue;
            }
            for (const auto& p : path) {
                const double ratio = analytic_sigma(p.t, s0, d) / s0;
                const double hom_x = c + x0 * ratio;
                const double rel = std::abs((p.x - c) - x0 * ratio) / std::abs(x0 * ratio);
                max_hom = std::max(max_hom, rel);
                hom.add_row({tc.quantiles[q], p.t, p.x, hom_x, analytic_flux_line(tc.quantiles[q], p.t, packet, d), rel});
            }
        }
        write_table(out / "homothety.dat", hom);
        summary.set("max_homothety_rel_dev", max_hom);
        summary.set("median_line_drift", median_drift);
        summary.check(max_hom <= cfg.tolerances.homothety_rel, "homothety deviation exceeds tolerances.homothety_rel");
        summary.check(median_drift <= grid.dx(), "median flux line leaves the centre by more than dx");

        double max_vel_dev = 0.0;
        for (std::size_t q = 0; q < velocities.size(); ++q) {
            const double z = standard_normal_quantile(tc.quantiles[q]);
            const double asymptote = z * d / s0;
            const double scale = (std::abs(z) > 1e-9 ? std::abs(z) : 1.0) * d / s0;
            for (const auto& v : velocities[q]) {
                vel.add_row({tc.quantiles[q], v.t, v.v, analytic_flux_velocity(tc.quantiles[q], v.t, packet, d)});
                if (d * v.t / (s0 * s0) >= cfg.tolerances.velocity_min_u) {
                    max_vel_dev = std::max(max_vel_dev, std::abs(v.v - asymptote) / scale);
                }
            }
        }
        summary.set("max_velocity_asymptote_dev", max_vel_dev);
        summary.check(max_vel_dev <= cfg.tolerances.velocity_rel,
                      "flux-line velocity misses the ballistic asymptote by more than tolerances.velocity_rel");
    } else {
        for (std::size_t q = 0; q < velocities.size(); ++q) {
            for (const auto& v : velocities[q]) vel.add_row({tc.quantiles[q], v.t, v.v});
        }
    }
    write_table(out / "velocities.dat", vel);
    return summary;
}

/// Grid refinement study: dx halves and dt quarters per level, holding the Courant profile fixed.
inline RunSummary run_convergence(const RunConfig& cfg, std::size_t refinements, const std::filesystem::path& out) {
    if (refinements < 2) throw ValidationError("refinements", "need at least 2 refinements");
    if (!(cfg.t_final > 0.0)) throw ValidationError("t_final", "convergence study needs t_final > 0");
    detail::prepare_dir(out);
    const auto params = cfg.physical();
    const auto packet = cfg.packet();
    const double sigma_end = analytic_sigma(cfg.t_final, packet.sigma0(), params.diffusivity());
    const std::vector<double> final_time{cfg.t_final};

    // Size every level first so a cap violation fails before any work is done.
    std::vector<Grid1D> grids;
    for (std::size_t level = 0; level <= refinements; ++level) {
        const double scale = std::ldexp(1.0, -static_cast<int>(level));
        grids.push_back(auto_grid_with_spacing(packet, params, cfg.t_final, cfg.dt * scale * scale,
                                               cfg.spacing() * scale, cfg.safety_span, cfg.nx_cap));
    }

    Table table;
    table.columns = {{"level", "1"}, {"dx", "length"}, {"dt", "time"}, {"nx", "1"}, {"linf_error", "1/length"}, {"observed_order", "1"}};
    RunSummary summary;
    double prev = 0.0;
    double min_order = std::numeric_limits<double>::infinity();
    double max_order = -std::numeric_limits<double>::infinity();
    for (std::size_t level = 0; level < grids.size(); ++level) {
        const Grid1D& grid = grids[level];
        const auto result = evolve(sample_gaussian(grid, packet), grid, packet, params, final_time);
        const Field& f = result.snapshots.back();
        double err = 0.0;
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            err = std::max(err, std::abs(f[i] - gaussian_pdf(grid.x(i), packet.center(), sigma_end)));
        }
        double order = detail::kNaN;
        if (level > 0) {
            order = std::log2(prev / err);
            min_order = std::min(min_order, order);
            max_order = std::max(max_order, order);
            summary.check(order >= cfg.tolerances.order_min && order <= cfg.tolerances.order_max,
                          "observed order at level " + std::to_string(level) + " outside tolerance band");
        }
        table.add_row({static_cast<double>(level), grid.dx(), grid.dt(), static_cast<double>(grid.nx()), err, order});
        prev = err;
    }
    write_table(out / "convergence.dat", table);
    summary.set("min_order", min_order);
    summary.set("max_order", max_order);
    summary.set("finest_error", prev);
    return summary;
}

/// Dispatches one named subcommand (everything except sweep).
inline RunSummary run_command(const std::string& command, const RunConfig& cfg, const std::filesystem::path& out) {
    if (command == "spread") return run_spread(cfg, out);
    if (command == "doubleslit") return run_doubleslit(cfg, out);
    if (command == "trajectories") return run_trajectories(cfg, out);
    if (command == "convergence") return run_convergence(cfg, cfg.refinements, out);
    throw ConfigError("unknown sweep command '" + command + "'");
}

struct SweepPoint {
    std::vector<std::pair<std::string, std::string>> assignment;
    std::string status;  // ok, tolerance or error
    std::string message;
    RunSummary summary;
};

/// Cartesian-product sweep over the [sweep] keys; one subdirectory per point and a manifest.
inline std::vector<SweepPoint> run_sweep(const RawConfig& raw, const std::filesystem::path& out,
                                         std::size_t workers = 1) {
    const RunConfig base = build_run_config(raw);
    if (!base.sweep) throw ConfigError(raw.source + ": sweep needs a [sweep] section");
    const auto& sweep = *base.sweep;
    if (sweep.command == "sweep") throw ConfigError(raw.source + ": a sweep cannot run sweeps");
    detail::prepare_dir(out);

    std::vector<SweepPoint> points(1);
    for (const auto& [key, values] : sweep.axes) {
        std::vector<SweepPoint> expanded;
        for (const auto& p : points) {
            for (const auto& v : values) {
                SweepPoint q = p;
                q.assignment.emplace_back(key, v);
                expanded.push_back(std::move(q));
            }
        }
        points = std::move(expanded);
    }

    auto subdir = [](std::size_t i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "point_%03zu", i);
        return std::string(buf);
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            SweepPoint& p = points[i];
            try {
                RawConfig point_raw = raw;
                point_raw.erase_section("sweep");
                for (const auto& [key, value] : p.assignment) {
                    const auto dot = key.find('.');
                    point_raw.set(key.substr(0, dot), key.substr(dot + 1), value);
                }
                const RunConfig cfg = build_run_config(point_raw);
                p.summary = run_command(sweep.command, cfg, out / subdir(i));
                p.status = p.summary.ok() ? "ok" : "tolerance";
            } catch (const std::exception& e) {
                p.status = "error";
                p.message = e.what();
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, points.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<std::string> metric_names;
    for (const auto& p : points) {
        for (const auto& [name, value] : p.summary.metrics) {
            if (std::find(metric_names.begin(), metric_names.end(), name) == metric_names.end()) {
                metric_names.push_back(name);
            }
        }
    }
    Table manifest;
    manifest.columns = {{"point", "1"}, {"status", "-"}, {"subdir", "-"}};
    for (const auto& [key, values] : sweep.axes) manifest.columns.push_back({key, "-"});
    for (const auto& name : metric_names) manifest.columns.push_back({name, "-"});
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::vector<Table::Cell> row{static_cast<double>(i), points[i].status, subdir(i)};
        for (const auto& [key, value] : points[i].assignment) {
            char* end = nullptr;
            const double v = std::strtod(value.c_str(), &end);
            if (end == value.c_str() + value.size()) {
                row.emplace_back(v);
            } else {
                row.emplace_back(value);
            }
        }
        for (const auto& name : metric_names) {
            double v = detail::kNaN;
            for (const auto& [k, val] : points[i].summary.metrics) {
                if (k == name) v = val;
            }
            row.emplace_back(v);
        }
        manifest.add_row(std::move(row));
    }
    write_table(out / "manifest.dat", manifest);
    return points;
}

}  // namespace ballistic
