#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ballistic/core.hpp"
#include "ballistic/errors.hpp"
#include "ballistic/grid.hpp"

namespace ballistic {

/// Sectioned key = value text, kept in file order.
struct RawConfig {
    struct Entry {
        std::string section;
        std::string key;
        std::string value;
        int line = 0;
    };

    std::string source = "<memory>";
    std::vector<Entry> entries;

    const Entry* find(const std::string& section, const std::string& key) const {
        for (const auto& e : entries) {
            if (e.section == section && e.key == key) return &e;
        }
        return nullptr;
    }

    bool has_section(const std::string& section) const {
        return std::any_of(entries.begin(), entries.end(),
                           [&](const Entry& e) { return e.section == section; });
    }

    /// Replaces (or appends) section.key.
    void set(const std::string& section, const std::string& key, const std::string& value) {
        for (auto& e : entries) {
            if (e.section == section && e.key == key) {
                e.value = value;
                return;
            }
        }
        entries.push_back({section, key, value, 0});
    }

    void erase_section(const std::string& section) {
        std::erase_if(entries, [&](const Entry& e) { return e.section == section; });
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"physical", {"hbar", "mass"}},
        {"packet", {"sigma0", "center"}},
        {"grid", {"dx", "points_per_sigma0", "dt", "t_final", "safety_span", "nx_cap"}},
        {"slits", {"separation", "v1", "v2", "dvx"}},
        {"trajectories", {"quantiles", "v_y", "source"}},
        {"output", {"directory", "snapshot_times", "snapshot_every", "normalize_total"}},
        {"tolerances",
         {"sigma_rel", "mass_drift", "fringe_cells", "homothety_rel", "velocity_rel", "velocity_min_u",
          "order_min", "order_max"}},
        {"convergence", {"refinements"}},
        {"sweep", {"command"}},
    };
    return schema;
}

inline std::string where(const RawConfig& raw, const RawConfig::Entry& e) {
    std::string s = raw.source;
    if (e.line > 0) s += ":" + std::to_string(e.line);
    return s + ": [" + e.section + "] " + e.key;
}

}  // namespace detail

inline RawConfig parse_config_text(const std::string& text, const std::string& source = "<memory>") {
    RawConfig raw;
    raw.source = source;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string loc = source + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(loc + ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!detail::config_schema().contains(section)) {
                throw ConfigError(loc + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(loc + ": expected key = value");
        if (section.empty()) throw ConfigError(loc + ": key outside any section");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (raw.find(section, key)) throw ConfigError(loc + ": duplicate key " + key);
        const auto& known = detail::config_schema().at(section);
        bool ok = known.contains(key);
        if (!ok && section == "sweep") {
            const auto dot = key.find('.');
            ok = dot != std::string::npos && key.substr(0, dot) != "sweep" &&
                 detail::config_schema().contains(key.substr(0, dot)) &&
                 detail::config_schema().at(key.substr(0, dot)).contains(key.substr(dot + 1));
        }
        if (!ok) throw ConfigError(loc + ": unknown key [" + section + "] " + key);
        raw.entries.push_back({section, key, value, lineno});
    }
    return raw;
}

inline RawConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

struct SlitSection {
    double separation = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;
};

enum class TrajectorySource { single, doubleslit };

struct TrajectorySection {
    std::vector<double> quantiles;
    double v_y = 1.0;
    TrajectorySource source = TrajectorySource::single;
};

/// In-config acceptance tolerances; a run whose results violate one exits nonzero.
struct Tolerances {
    double sigma_rel = 0.005;
    double mass_drift = 1e-9;
    double fringe_cells = 1.0;
    double homothety_rel = 0.01;
    double velocity_rel = 0.02;
    double velocity_min_u = 10.0;
    double order_min = 1.7;
    double order_max = 2.3;
};

struct SweepSection {
    std::string command;
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
};

struct RunConfig {
    double hbar = 1.0;
    double mass = 1.0;
    double sigma0 = 1.0;
    double center = 0.0;
    std::optional<double> dx;
    double points_per_sigma0 = 10.0;
    double dt = 0.01;
    double t_final = 1.0;
    double safety_span = 10.0;
    std::size_t nx_cap = kDefaultNxCap;
    std::optional<SlitSection> slits;
    std::optional<TrajectorySection> trajectories;
    std::filesystem::path directory = "out";
    std::vector<double> snapshot_times;
    bool normalize_total = false;
    Tolerances tolerances;
    std::size_t refinements = 3;
    std::optional<SweepSection> sweep;

    PhysicalParams physical() const { return PhysicalParams(hbar, mass); }
    GaussianState packet() const { return GaussianState(sigma0, center); }
    double spacing() const { return dx ? *dx : sigma0 / points_per_sigma0; }
    SlitConfig slit_config() const {
        if (!slits) throw ConfigError("config has no [slits] section");
        return SlitConfig(slits->separation, sigma0, slits->v1, slits->v2);
    }
};

namespace detail {

inline double parse_double(const RawConfig& raw, const RawConfig::Entry& e, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
        throw ConfigError(where(raw, e) + ": expected a number, got '" + text + "'");
    }
    return v;
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

inline bool parse_bool(const RawConfig& raw, const RawConfig::Entry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw ConfigError(where(raw, e) + ": expected true or false");
}

}  // namespace detail

/// Validates a raw config into a RunConfig; every error names the file, line and key.
inline RunConfig build_run_config(const RawConfig& raw) {
    RunConfig cfg;
    auto num = [&](const char* section, const char* key, double& target) {
        if (const auto* e = raw.find(section, key)) target = detail::parse_double(raw, *e, e->value);
    };
    auto fail = [&](const char* section, const char* key, const std::string& msg) -> ConfigError {
        if (const auto* e = raw.find(section, key)) return ConfigError(detail::where(raw, *e) + ": " + msg);
        return ConfigError(raw.source + ": [" + section + "] " + key + ": " + msg);
    };

    num("physical", "hbar", cfg.hbar);
    num("physical", "mass", cfg.mass);
    num("packet", "sigma0", cfg.sigma0);
    num("packet", "center", cfg.center);
    if (!raw.find("grid", "dt")) throw fail("grid", "dt", "required");
    if (!raw.find("grid", "t_final")) throw fail("grid", "t_final", "required");
    num("grid", "dt", cfg.dt);
    num("grid", "t_final", cfg.t_final);
    num("grid", "safety_span", cfg.safety_span);
    if (raw.find("grid", "dx") && raw.find("grid", "points_per_sigma0")) {
        throw fail("grid", "dx", "give either dx or points_per_sigma0, not both");
    }
    if (const auto* e = raw.find("grid", "dx")) cfg.dx = detail::parse_double(raw, *e, e->value);
    num("grid", "points_per_sigma0", cfg.points_per_sigma0);
    if (const auto* e = raw.find("grid", "nx_cap")) {
        const double cap = detail::parse_double(raw, *e, e->value);
        if (!(cap >= 3.0) || cap != std::floor(cap)) throw fail("grid", "nx_cap", "must be an integer >= 3");
        cfg.nx_cap = static_cast<std::size_t>(cap);
    }

    try {
        (void)cfg.physical();
    } catch (const ValidationError& e) {
        throw fail("physical", e.field().c_str(), e.what());
    }
    try {
        (void)cfg.packet();
    } catch (const ValidationError& e) {
        throw fail("packet", e.field().c_str(), e.what());
    }
    if (!(cfg.t_final >= 0.0)) throw fail("grid", "t_final", "must be non-negative");
    if (!(cfg.dt > 0.0)) throw fail("grid", "dt", "must be positive");
    if (!(cfg.sigma0 / cfg.spacing() >= kMinPointsPerSigma0 * (1.0 - 1e-12))) {
        throw fail("grid", cfg.dx ? "dx" : "points_per_sigma0", "need at least 8 points per sigma0");
    }
    if (!(cfg.safety_span >= kMinSafetySpan)) throw fail("grid", "safety_span", "must be at least 5");
    try {
        (void)macro_step_count(cfg.t_final, cfg.dt);
    } catch (const ValidationError& e) {
        throw fail("grid", "dt", e.what());
    }

    if (raw.has_section("slits")) {
        SlitSection s;
        if (!raw.find("slits", "separation")) throw fail("slits", "separation", "required");
        num("slits", "separation", s.separation);
        const bool has_dvx = raw.find("slits", "dvx") != nullptr;
        const bool has_v = raw.find("slits", "v1") || raw.find("slits", "v2");
        if (has_dvx && has_v) throw fail("slits", "dvx", "give either dvx or v1/v2, not both");
        if (has_dvx) {
            double dvx = 0.0;
            num("slits", "dvx", dvx);
            s.v1 = 0.5 * dvx;
            s.v2 = -0.5 * dvx;
        } else {
            if (!raw.find("slits", "v1") || !raw.find("slits", "v2")) {
                throw fail("slits", "v1", "both v1 and v2 (or dvx) are required");
            }
            num("slits", "v1", s.v1);
            num("slits", "v2", s.v2);
        }
        if (!(s.separation >= 0.0)) throw fail("slits", "separation", "must be non-negative");
        cfg.slits = s;
    }

    if (raw.has_section("trajectories")) {
        TrajectorySection t;
        const auto* q = raw.find("trajectories", "quantiles");
        if (!q) throw fail("trajectories", "quantiles", "required");
        for (const auto& item : detail::split_list(q->value)) {
            t.quantiles.push_back(detail::parse_double(raw, *q, item));
        }
        try {
            TrajectorySet::validate_quantiles(t.quantiles);
        } catch (const ValidationError& e) {
            throw fail("trajectories", "quantiles", e.what());
        }
        num("trajectories", "v_y", t.v_y);
        if (const auto* s = raw.find("trajectories", "source")) {
            if (s->value == "single") {
                t.source = TrajectorySource::single;
            } else if (s->value == "doubleslit") {
                t.source = TrajectorySource::doubleslit;
            } else {
                throw fail("trajectories", "source", "must be 'single' or 'doubleslit'");
            }
        }
        if (t.source == TrajectorySource::doubleslit && !cfg.slits) {
            throw fail("trajectories", "source", "doubleslit source needs a [slits] section");
        }
        cfg.trajectories = t;
    }

    if (const auto* e = raw.find("output", "directory")) cfg.directory = e->value;
    if (const auto* e = raw.find("output", "normalize_total")) cfg.normalize_total = detail::parse_bool(raw, *e);
    const auto* times = raw.find("output", "snapshot_times");
    const auto* every = raw.find("output", "snapshot_every");
    if (times && every) throw fail("output", "snapshot_times", "give either snapshot_times or snapshot_every");
    if (times) {
        for (const auto& item : detail::split_list(times->value)) {
            cfg.snapshot_times.push_back(detail::parse_double(raw, *times, item));
        }
        if (cfg.snapshot_times.empty()) throw fail("output", "snapshot_times", "list is empty");
        for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
            const double t = cfg.snapshot_times[i];
            if (t < 0.0 || t > cfg.t_final * (1.0 + 1e-12) || (i > 0 && t < cfg.snapshot_times[i - 1])) {
                throw fail("output", "snapshot_times", "must be sorted and within [0, t_final]");
            }
        }
    } else if (every) {
        const double step = detail::parse_double(raw, *every, every->value);
        if (!(step > 0.0)) throw fail("output", "snapshot_every", "must be positive");
        const auto count = static_cast<std::size_t>(std::floor(cfg.t_final / step + 1e-9));
        for (std::size_t k = 0; k <= count; ++k) cfg.snapshot_times.push_back(static_cast<double>(k) * step);
        if (cfg.snapshot_times.back() < cfg.t_final * (1.0 - 1e-12)) cfg.snapshot_times.push_back(cfg.t_final);
        cfg.snapshot_times.back() = std::min(cfg.snapshot_times.back(), cfg.t_final);
    } else {
        cfg.snapshot_times = {0.0};
        if (cfg.t_final > 0.0) cfg.snapshot_times.push_back(cfg.t_final);
    }

    auto& tol = cfg.tolerances;
    num("tolerances", "sigma_rel", tol.sigma_rel);
    num("tolerances", "mass_drift", tol.mass_drift);
    num("tolerances", "fringe_cells", tol.fringe_cells);
    num("tolerances", "homothety_rel", tol.homothety_rel);
    num("tolerances", "velocity_rel", tol.velocity_rel);
    num("tolerances", "velocity_min_u", tol.velocity_min_u);
    num("tolerances", "order_min", tol.order_min);
    num("tolerances", "order_max", tol.order_max);

    if (const auto* e = raw.find("convergence", "refinements")) {
        const double r = detail::parse_double(raw, *e, e->value);
        if (r != std::floor(r) || r < 0.0) throw fail("convergence", "refinements", "must be a whole number");
        cfg.refinements = static_cast<std::size_t>(r);
    }

    if (raw.has_section("sweep")) {
        SweepSection s;
        const auto* cmd = raw.find("sweep", "command");
        if (!cmd) throw fail("sweep", "command", "required");
        s.command = cmd->value;
        for (const auto& e : raw.entries) {
            if (e.section != "sweep" || e.key == "command") continue;
            auto values = detail::split_list(e.value);
            if (values.empty()) throw ConfigError(detail::where(raw, e) + ": sweep list is empty");
            s.axes.emplace_back(e.key, std::move(values));
        }
        if (s.axes.empty()) throw fail("sweep", "command", "no sweep keys given");
        cfg.sweep = s;
    }
    return cfg;
}

}  // namespace ballistic
