#include "savwave/cli.hpp"

#include "savwave/fem.hpp"
#include "savwave/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace savwave::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_plain(std::string_view text, const std::string& key) {
    text = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError(key, "expected a number, got '" + std::string(text) + "'");
    }
    return value;
}

std::size_t parse_count(std::string_view text, const std::string& key) {
    text = trim(text);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError(key, "expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return value;
}

bool parse_bool(std::string_view text, const std::string& key) {
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(key, "expected true|false, got '" + std::string(text) + "'");
}

std::string parse_choice(std::string_view text, std::initializer_list<std::string_view> choices,
                         const std::string& key) {
    text = trim(text);
    std::string options;
    for (auto c : choices) {
        if (text == c) return std::string(text);
        options += options.empty() ? "" : "|";
        options += c;
    }
    throw ConfigError(key, "expected " + options + ", got '" + std::string(text) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"problem.drift",
         [](RunConfig& c, std::string_view v, const std::string& k) {
             c.drift = parse_choice(v, {"linear", "sine", "cubic", "zero"}, k);
         }},
        {"problem.diffusion",
         [](RunConfig& c, std::string_view v, const std::string& k) {
             c.diffusion = parse_choice(v, {"constant", "sine", "linear", "zero"}, k);
         }},
        {"problem.sigma", [](RunConfig& c, std::string_view v, const std::string& k) { c.sigma = parse_real(v, k); }},
        {"problem.delta0", [](RunConfig& c, std::string_view v, const std::string& k) { c.delta0 = parse_real(v, k); }},
        {"problem.amplitude",
         [](RunConfig& c, std::string_view v, const std::string& k) { c.amplitude = parse_real(v, k); }},
        {"space.backend",
         [](RunConfig& c, std::string_view v, const std::string& k) {
             c.backend = parse_choice(v, {"spectral", "fem"}, k);
         }},
        {"space.modes", [](RunConfig& c, std::string_view v, const std::string& k) { c.modes = parse_count(v, k); }},
        {"space.elements",
         [](RunConfig& c, std::string_view v, const std::string& k) { c.elements = parse_count(v, k); }},
        {"time.T", [](RunConfig& c, std::string_view v, const std::string& k) { c.T = parse_real(v, k); }},
        {"time.tau", [](RunConfig& c, std::string_view v, const std::string& k) { c.tau = parse_real(v, k); }},
        {"time.steps", [](RunConfig& c, std::string_view v, const std::string& k) { c.steps = parse_count(v, k); }},
        {"scheme.variant",
         [](RunConfig& c, std::string_view v, const std::string& k) {
             c.variant = parse_choice(v, {"exponential", "midpoint", "both"}, k);
         }},
        {"scheme.predictor",
         [](RunConfig& c, std::string_view v, const std::string& k) {
             c.predictor = parse_choice(v, {"identity", "extrapolation"}, k);
         }},
        {"noise.decay", [](RunConfig& c, std::string_view v, const std::string& k) { c.decay = parse_real(v, k); }},
        {"noise.modes",
         [](RunConfig& c, std::string_view v, const std::string& k) { c.noise_modes = parse_count(v, k); }},
        {"mc.realizations",
         [](RunConfig& c, std::string_view v, const std::string& k) { c.realizations = parse_count(v, k); }},
        {"mc.seed",
         [](RunConfig& c, std::string_view v, const std::string& k) {
             const auto t = trim(v);
             std::uint64_t seed = 0;
             const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), seed);
             if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
                 throw ConfigError(k, "expected an unsigned 64-bit integer, got '" + std::string(t) + "'");
             }
             c.seed = seed;
         }},
        {"converge.taus",
         [](RunConfig& c, std::string_view v, const std::string& k) {
             std::vector<double> taus;
             std::size_t start = 0;
             while (start <= v.size()) {
                 const auto comma = v.find(',', start);
                 const auto item = v.substr(start, comma == std::string_view::npos ? v.npos : comma - start);
                 taus.push_back(parse_real(item, k));
                 if (comma == std::string_view::npos) break;
                 start = comma + 1;
             }
             c.taus = std::move(taus);
         }},
        {"converge.tau_ref",
         [](RunConfig& c, std::string_view v, const std::string& k) { c.tau_ref = parse_real(v, k); }},
        {"converge.reference",
         [](RunConfig& c, std::string_view v, const std::string& k) {
             c.reference = parse_choice(v, {"self", "exponential", "midpoint"}, k);
         }},
        {"converge.norm",
         [](RunConfig& c, std::string_view v, const std::string& k) {
             c.norm = parse_choice(v, {"l2", "energy"}, k);
         }},
        {"output.directory",
         [](RunConfig& c, std::string_view v, const std::string&) { c.directory = std::string(trim(v)); }},
        {"output.svg", [](RunConfig& c, std::string_view v, const std::string& k) { c.svg = parse_bool(v, k); }},
    };
    return table;
}

}  // namespace

double parse_real(std::string_view text, const std::string& key) {
    text = trim(text);
    if (const auto caret = text.find('^'); caret != std::string_view::npos) {
        const double base = parse_plain(text.substr(0, caret), key);
        const double exponent = parse_plain(text.substr(caret + 1), key);
        return std::pow(base, exponent);
    }
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        const double den = parse_plain(text.substr(slash + 1), key);
        if (den == 0.0) throw ConfigError(key, "division by zero in '" + std::string(text) + "'");
        return parse_plain(text.substr(0, slash), key) / den;
    }
    return parse_plain(text, key);
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [k, _] : setters()) out.push_back(k);
        return out;
    }();
    return keys;
}

void set_value(RunConfig& config, std::string_view key, std::string_view value) {
    const std::string k(trim(key));
    for (const auto& [name, setter] : setters()) {
        if (name == k) {
            setter(config, value, k);
            return;
        }
    }
    throw ConfigError(k, "unknown configuration key");
}

void apply_config_text(RunConfig& config, std::string_view text) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
        start = end == std::string_view::npos ? text.size() : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        set_value(config, line.substr(0, eq), line.substr(eq + 1));
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot read config file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig config;
    apply_config_text(config, buf.str());
    return config;
}

void apply_override(RunConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError(std::string(assignment), "override must look like key=value");
    }
    set_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::size_t resolved_steps(const RunConfig& config) {
    if (config.steps) {
        return *config.steps;
    }
    return static_cast<std::size_t>(std::llround(config.T / config.tau));
}

void validate(const RunConfig& config) {
    if (!(config.tau > 0.0)) throw ConfigError("time.tau", "must be positive");
    if (!(config.T >= 0.0)) throw ConfigError("time.T", "must be non-negative");
    if (config.steps) {
        const double T = static_cast<double>(*config.steps) * config.tau;
        if (std::abs(T - config.T) > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, config.T)) {
            throw ConfigError("time.steps", "steps * tau must equal time.T");
        }
    } else {
        const double n = std::round(config.T / config.tau);
        if (std::abs(n * config.tau - config.T) > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, config.T)) {
            throw ConfigError("time.tau", "time.T is not an integer multiple of tau");
        }
    }
    if (config.modes < 1) throw ConfigError("space.modes", "must be at least 1");
    if (config.backend == "fem" && config.elements < 2) throw ConfigError("space.elements", "must be at least 2");
    if (config.noise_modes && *config.noise_modes < 1) throw ConfigError("noise.modes", "must be at least 1");
    if (config.backend == "spectral" && config.noise_modes && *config.noise_modes != config.modes) {
        throw ConfigError("noise.modes", "the spectral backend needs noise.modes == space.modes");
    }
    if (config.realizations && *config.realizations < 1) {
        throw ConfigError("mc.realizations", "must be at least 1");
    }
    if (!(config.decay > 1.0)) throw ConfigError("noise.decay", "must exceed 1 for a trace-class covariance");
    if (!(config.delta0 > 0.0)) throw ConfigError("problem.delta0", "must be positive");
    if (config.taus.empty()) throw ConfigError("converge.taus", "needs at least one step size");
    for (double t : config.taus) {
        if (!(t > 0.0)) throw ConfigError("converge.taus", "step sizes must be positive");
    }
    if (config.tau_ref && !(*config.tau_ref > 0.0)) throw ConfigError("converge.tau_ref", "must be positive");
}

Problem make_problem(const RunConfig& config) {
    const std::size_t noise = config.noise_modes.value_or(config.modes);
    Problem p = Problem::standard(config.backend == "spectral" ? config.modes : noise,
                                  Drift::from_name(config.drift), Diffusion::from_name(config.diffusion, config.sigma),
                                  config.decay, config.delta0, config.amplitude);
    return p;
}

std::unique_ptr<Discretization> make_discretization(const RunConfig& config) {
    validate(config);
    Problem p = make_problem(config);
    if (config.backend == "fem") {
        return std::make_unique<FemDiscretization>(std::move(p), config.elements);
    }
    return std::make_unique<SpectralDiscretization>(std::move(p));
}

std::vector<Scheme> resolved_schemes(const RunConfig& config) {
    if (config.variant == "both") {
        return {Scheme::exponential, Scheme::midpoint};
    }
    return {scheme_from_name(config.variant)};
}

}  // namespace savwave::cli
