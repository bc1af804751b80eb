#pragma once

#include "savwave/discretization.hpp"
#include "savwave/harness.hpp"
#include "savwave/model.hpp"
#include "savwave/schemes.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace savwave::cli {

/// Invalid configuration; `key()` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class ExitCode : int { ok = 0, check_failed = 1, config_error = 2, numerical_abort = 3 };

/// Parses reals such as "0.25", "1e-3", "2^-8" or "1/256".
double parse_real(std::string_view text, const std::string& key = {});

struct RunConfig {
    // problem
    std::string drift = "linear";
    std::string diffusion = "sine";
    double sigma = 1.0;
    double delta0 = 1.0;
    double amplitude = 1.0;
    // space
    std::string backend = "spectral";
    std::size_t modes = 64;
    std::size_t elements = 32;
    // time
    double T = 1.0;
    double tau = 1.0 / 256.0;
    std::optional<std::size_t> steps;
    // scheme
    std::string variant = "exponential";  // exponential | midpoint | both
    std::string predictor = "identity";
    // noise
    double decay = 2.0;
    std::optional<std::size_t> noise_modes;
    // mc
    std::optional<std::size_t> realizations;
    std::uint64_t seed = 1;
    // converge
    std::vector<double> taus{1.0 / 256, 1.0 / 512, 1.0 / 1024, 1.0 / 2048, 1.0 / 4096};
    std::optional<double> tau_ref;
    std::string reference = "self";  // self | exponential | midpoint
    std::string norm = "l2";         // l2 | energy
    // output
    std::string directory = ".";
    bool svg = false;
};

/// Assigns one dotted key; throws ConfigError for unknown keys or bad values.
void set_value(RunConfig& config, std::string_view key, std::string_view value);

/// Applies "key = value" lines; '#' starts a comment.
void apply_config_text(RunConfig& config, std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// "key=value" command-line override.
void apply_override(RunConfig& config, std::string_view assignment);

/// All keys accepted by set_value, in documentation order.
const std::vector<std::string>& config_keys();

/// Checks cross-field invariants (N tau = T, positive sizes, known names).
void validate(const RunConfig& config);

/// Number of steps implied by T and tau (or the explicit time.steps).
std::size_t resolved_steps(const RunConfig& config);

std::unique_ptr<Discretization> make_discretization(const RunConfig& config);
Problem make_problem(const RunConfig& config);
std::vector<Scheme> resolved_schemes(const RunConfig& config);

/// Parsed CSV: header plus string cells; '#' lines kept as comments.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;

    std::size_t column(std::string_view name) const;
    double number(std::size_t row, std::string_view name) const;
};

/// Decimal with 17 significant digits ("%.17g").
std::string format_number(double x);
CsvTable parse_csv(std::string_view text);

std::string simulate_csv(const std::vector<RunRecord>& records);
std::string converge_csv(const ConvergenceResult& result);
std::string energy_csv(const std::vector<EnergyRow>& rows);
std::string check_csv(const std::vector<CheckResult>& checks);

/// Log-log error plot with one polyline per scheme and the fitted slopes.
std::string converge_svg(const CsvTable& table);
/// Mean energy with a 3-standard-error band and the predicted law.
std::string energy_svg(const CsvTable& table);

struct CommandOptions {
    std::filesystem::path out_dir = ".";
    bool svg = false;
    bool paper_scale = false;
    std::size_t workers = 1;
    std::string filter;
    bool drop_balancing_term = false;
};

/// Each command writes its files under options.out_dir and returns an exit code.
ExitCode cmd_simulate(const RunConfig& config, const CommandOptions& options, std::ostream& log);
ExitCode cmd_converge(const RunConfig& config, const CommandOptions& options, std::ostream& log);
ExitCode cmd_energy(const RunConfig& config, const CommandOptions& options, std::ostream& log);
ExitCode cmd_check(const CommandOptions& options, std::uint64_t seed, std::ostream& log);

}  // namespace savwave::cli
