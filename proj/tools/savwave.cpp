#include "savwave/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <thread>

namespace {

using savwave::cli::ExitCode;

int run(int argc, char** argv) {
    CLI::App app{"Energy-consistent SAV integrators for the stochastic wave equation"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool paper_scale = false;
    bool svg = false;
    std::string filter;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::string mutation;

    app.add_option("--config", config_path, "Configuration file (key = value lines)");
    auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides mc.seed)");
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides output.directory)");
    app.add_flag("--paper-scale", paper_scale, "Use full-size Monte Carlo counts and the finest reference step");
    app.add_flag("--svg", svg, "Also write an SVG plot");
    app.add_option("--filter", filter, "Run only the checks of one module");
    app.add_option("--workers", workers, "Worker threads (never changes results)")->check(CLI::PositiveNumber);
    app.add_option("--set", overrides, "Override a configuration key, key=value (repeatable)");
    app.add_option("--mutation", mutation, "Fault injection for testing the checks")
        ->check(CLI::IsMember({"drop-balancing-term"}))
        ->group("");

    auto* simulate = app.add_subcommand("simulate", "One trajectory with per-step diagnostics");
    auto* converge = app.add_subcommand("converge", "Strong error against a fine reference");
    auto* energy = app.add_subcommand("energy", "Monte Carlo mean energy against the predicted law");
    auto* check = app.add_subcommand("check", "Structural invariant suite");
    for (auto* sub : {simulate, converge, energy, check}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::config_error);
    }

    try {
        savwave::cli::RunConfig config;
        if (!config_path.empty()) {
            config = savwave::cli::load_config(config_path);
        }
        for (const auto& o : overrides) {
            savwave::cli::apply_override(config, o);
        }
        if (*seed_opt) config.seed = seed;
        savwave::cli::CommandOptions options;
        options.out_dir = *out_opt ? out_dir : config.directory;
        options.svg = svg;
        options.paper_scale = paper_scale;
        options.workers = workers;
        options.filter = filter;
        options.drop_balancing_term = mutation == "drop-balancing-term";

        ExitCode code = ExitCode::ok;
        if (*simulate) code = savwave::cli::cmd_simulate(config, options, std::cout);
        if (*converge) code = savwave::cli::cmd_converge(config, options, std::cout);
        if (*energy) code = savwave::cli::cmd_energy(config, options, std::cout);
        if (*check) code = savwave::cli::cmd_check(options, config.seed, std::cout);
        return static_cast<int>(code);
    } catch (const savwave::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::config_error);
    } catch (const savwave::NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return static_cast<int>(ExitCode::numerical_abort);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::config_error);
    }
}

}  // namespace

int main(int argc, char** argv) {
    return run(argc, argv);
}
