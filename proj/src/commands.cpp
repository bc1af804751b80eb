#include "savwave/cli.hpp"

#include "savwave/model.hpp"
#include "savwave/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace savwave::cli {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << text;
}

Scheme single_scheme(const RunConfig& config) {
    if (config.variant == "both") {
        throw ConfigError("scheme.variant", "this command runs one scheme; choose exponential or midpoint");
    }
    return scheme_from_name(config.variant);
}

}  // namespace

ExitCode cmd_simulate(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
    const auto disc = make_discretization(config);
    const std::size_t steps = resolved_steps(config);
    SchemeOptions so;
    so.balancing_term = !options.drop_balancing_term;
    const SavStepper stepper(*disc, single_scheme(config), predictor_from_name(config.predictor), config.tau, so);
    RngStream rng(config.seed, 0);
    std::vector<RunRecord> records;
    try {
        records = run_trajectory(stepper, stepper.initial_state(), steps, [&]() {
            return sample_increment(disc->covariance(), config.tau, rng).dW.coeffs();
        });
    } catch (const NumericalAbort& e) {
        log << "numerical abort: " << e.what() << '\n';
        return ExitCode::numerical_abort;
    } catch (const ModelViolation& e) {
        log << "numerical abort: " << e.what() << '\n';
        return ExitCode::numerical_abort;
    }
    const auto path = options.out_dir / "simulate.csv";
    write_file(path, simulate_csv(records));
    log << "wrote " << path.string() << " (" << records.size() << " rows)\n";
    return ExitCode::ok;
}

ExitCode cmd_converge(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
    const auto disc = make_discretization(config);
    ConvergenceConfig cc;
    cc.schemes = resolved_schemes(config);
    cc.predictor = predictor_from_name(config.predictor);
    cc.taus = config.taus;
    cc.tau_ref = config.tau_ref.value_or(options.paper_scale ? std::ldexp(1.0, -14) : std::ldexp(1.0, -13));
    if (config.reference != "self") {
        cc.reference_scheme = scheme_from_name(config.reference);
    }
    cc.T = config.T;
    cc.realizations = config.realizations.value_or(options.paper_scale ? 1000 : 200);
    cc.seed = config.seed;
    cc.workers = options.workers;
    cc.norm = config.norm == "energy" ? ErrorNorm::energy : ErrorNorm::l2;
    ConvergenceResult result;
    try {
        result = strong_convergence(*disc, cc);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("converge.taus", e.what());
    }
    const std::string csv = converge_csv(result);
    const auto path = options.out_dir / "converge.csv";
    write_file(path, csv);
    log << "wrote " << path.string() << '\n';
    for (std::size_t i = 0; i < cc.schemes.size(); ++i) {
        log << name(cc.schemes[i]) << ": slope " << result.fits[i].slope << '\n';
    }
    for (const auto& row : result.rows) {
        if (row.excluded_paths > 0) {
            log << "warning: " << row.excluded_paths << " paths excluded after numerical abort\n";
            break;
        }
    }
    if (options.svg || config.svg) {
        write_file(options.out_dir / "converge.svg", converge_svg(parse_csv(csv)));
    }
    return ExitCode::ok;
}

ExitCode cmd_energy(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
    const auto disc = make_discretization(config);
    EnergyConfig ec;
    ec.scheme = single_scheme(config);
    ec.predictor = predictor_from_name(config.predictor);
    ec.tau = config.tau;
    ec.steps = resolved_steps(config);
    ec.realizations = config.realizations.value_or(options.paper_scale ? 5000 : 1000);
    ec.seed = config.seed;
    ec.workers = options.workers;
    std::vector<EnergyRow> rows;
    try {
        rows = energy_evolution(*disc, ec);
    } catch (const NumericalAbort& e) {
        log << "numerical abort: " << e.what() << '\n';
        return ExitCode::numerical_abort;
    } catch (const ModelViolation& e) {
        log << "numerical abort: " << e.what() << '\n';
        return ExitCode::numerical_abort;
    }
    const std::string csv = energy_csv(rows);
    const auto path = options.out_dir / "energy.csv";
    write_file(path, csv);
    log << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
    if (options.svg || config.svg) {
        write_file(options.out_dir / "energy.svg", energy_svg(parse_csv(csv)));
    }
    return ExitCode::ok;
}

ExitCode cmd_check(const CommandOptions& options, std::uint64_t seed, std::ostream& log) {
    static const std::vector<std::string> modules{"spectral", "noise", "schemes", "fem", "harness"};
    if (!options.filter.empty() &&
        std::find(modules.begin(), modules.end(), options.filter) == modules.end()) {
        throw ConfigError("--filter", "unknown module '" + options.filter + "' (expected spectral|noise|schemes|fem|harness)");
    }
    SuiteOptions so;
    so.seed = seed;
    so.filter = options.filter;
    so.workers = options.workers;
    so.scheme_options.balancing_term = !options.drop_balancing_term;
    const auto checks = invariant_suite(so);
    bool ok = true;
    for (const auto& c : checks) {
        ok = ok && c.passed;
        char line[256];
        std::snprintf(line, sizeof line, "%s %s.%s measured=%.3e threshold=%.1e seed=%llu\n",
                      c.passed ? "PASS" : "FAIL", c.module.c_str(), c.name.c_str(), c.measured, c.threshold,
                      static_cast<unsigned long long>(c.seed));
        log << line;
    }
    write_file(options.out_dir / "check.csv", check_csv(checks));
    log << (ok ? "all checks passed" : "some checks failed") << " (" << checks.size() << " checks)\n";
    return ok ? ExitCode::ok : ExitCode::check_failed;
}

}  // namespace savwave::cli
