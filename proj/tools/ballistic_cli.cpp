// Command-line driver: spread, doubleslit, trajectories, convergence, sweep.
//
// Exit status: 0 when every run and in-config tolerance passes, 1 when a tolerance
// is violated, 2 on configuration, resource, stepper or I/O errors.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ballistic/ballistic.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    std::size_t workers = 1;
    bool quiet = false;
    std::optional<std::size_t> refinements;
};

void print_summary(const std::string& command, const ballistic::RunSummary& s) {
    std::cout << command << ": " << (s.ok() ? "ok" : "TOLERANCE VIOLATED") << '\n';
    for (const auto& [name, value] : s.metrics) {
        std::cout << "  " << name << " = " << ballistic::format_number(value) << '\n';
    }
    for (const auto& v : s.violations) std::cout << "  violation: " << v << '\n';
}

int run(const std::string& command, const Options& opt) {
    using namespace ballistic;
    const RawConfig raw = load_config(opt.config);
    const RunConfig cfg = build_run_config(raw);
    const std::filesystem::path out = opt.out.empty() ? cfg.directory : std::filesystem::path(opt.out);

    if (command == "sweep") {
        const auto points = run_sweep(raw, out, opt.workers);
        int status = 0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            if (p.status == "error") status = 2;
            if (p.status == "tolerance" && status == 0) status = 1;
            if (!opt.quiet || p.status == "error") {
                std::cout << "point " << i << ":";
                for (const auto& [k, v] : p.assignment) std::cout << ' ' << k << '=' << v;
                std::cout << " -> " << p.status;
                if (!p.message.empty()) std::cout << " (" << p.message << ")";
                std::cout << '\n';
            }
        }
        return status;
    }

    RunSummary summary;
    if (command == "convergence") {
        summary = run_convergence(cfg, opt.refinements.value_or(cfg.refinements), out);
    } else {
        summary = run_command(command, cfg, out);
    }
    if (!opt.quiet || !summary.ok()) print_summary(command, summary);
    return summary.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ballistic-diffusion simulator for Gaussian spreading and double-slit interference"};
    app.require_subcommand(1);

    Options opt;
    const char* commands[][2] = {
        {"spread", "single Gaussian packet: sigma(t) against the spreading law"},
        {"doubleslit", "two Gaussian slits composed with the two-wave intensity rule"},
        {"trajectories", "flux lines as fixed-quantile paths"},
        {"convergence", "grid refinement study of the explicit scheme"},
        {"sweep", "Cartesian-product parameter sweep over [sweep] keys"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "run configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory (overrides [output] directory)");
        sub->add_option("--workers", opt.workers, "parallel sweep points")->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", opt.quiet, "print only failures");
        if (std::string(name) == "convergence") {
            sub->add_option("--refinements", opt.refinements, "number of dx halvings (>= 2)");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, opt);
    } catch (const ballistic::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
    } catch (const ballistic::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
    } catch (const ballistic::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return 2;
}
