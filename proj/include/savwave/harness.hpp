#pragma once

#include "savwave/discretization.hpp"
#include "savwave/schemes.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace savwave {

struct Statistics {
    double mean = 0.0;
    double stderr_mean = 0.0;  // sample std / sqrt(count)
    std::size_t count = 0;
};

/// Mean and standard error, summed in index order.
Statistics summarize(std::span<const double> samples);

/// Least-squares line y = slope x + intercept.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);
/// Fit of log2(y) against log2(x).
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Evaluates fn(i) for i in [0, n) on `workers` threads and returns the
/// results in index order. The first exception (lowest index) is rethrown.
template <typename Fn>
auto parallel_map(std::size_t n, std::size_t workers, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using Result = decltype(fn(std::size_t{}));
    std::vector<std::optional<Result>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t count = std::max<std::size_t>(1, std::min(workers, n));
    if (count == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(count);
        for (std::size_t t = 0; t < count; ++t) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<Result> out;
    out.reserve(n);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

enum class ErrorNorm { l2, energy };

/// || X_ref - X || in modal coordinates: L2 of u, or the H-norm of (u, v).
double state_distance(const SavState& a, const SavState& b, const Eigen::VectorXd& eigenvalues, ErrorNorm norm);

struct ConvergenceConfig {
    std::vector<Scheme> schemes{Scheme::exponential, Scheme::midpoint};
    Predictor predictor = Predictor::identity;
    std::vector<double> taus;        // coarse ladder; each a power-of-two multiple of tau_ref
    double tau_ref = 0.0;
    std::optional<Scheme> reference_scheme;  // unset: each scheme is its own reference
    double T = 1.0;
    std::size_t realizations = 200;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    ErrorNorm norm = ErrorNorm::l2;
};

struct ConvergenceRow {
    Scheme scheme = Scheme::exponential;
    double tau = 0.0;
    double rms_error = 0.0;
    double stderr_rms = 0.0;
    std::size_t excluded_paths = 0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;      // schemes in config order, taus in ladder order
    std::vector<LineFit> fits;             // one per scheme
    std::uint64_t seed = 0;
};

/// Strong errors at time T against a fine reference driven by the same
/// Brownian paths (coarse increments are sums of reference increments).
ConvergenceResult strong_convergence(const Discretization& disc, const ConvergenceConfig& config);

struct EnergyConfig {
    Scheme scheme = Scheme::exponential;
    Predictor predictor = Predictor::identity;
    double tau = 0.0;
    std::size_t steps = 0;
    std::size_t realizations = 1000;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

struct EnergyRow {
    std::size_t step = 0;
    double time = 0.0;
    double mean_V = 0.0;
    double stderr_V = 0.0;
    double predicted_V = 0.0;
    double mean_V1 = 0.0;
    double mean_V_squared = 0.0;
    double max_denominator_violation = 0.0;  // max(0, 1 - denominator) over paths
};

/// Monte Carlo mean of V per step against V0 + sum_j (tau/2) E[trace term_j].
/// The trace term is exact when g is constant and sampled otherwise.
std::vector<EnergyRow> energy_evolution(const Discretization& disc, const EnergyConfig& config);

struct AuxGapConfig {
    Scheme scheme = Scheme::exponential;
    Predictor predictor = Predictor::identity;
    std::vector<double> taus;  // decreasing, power-of-two ratios
    double T = 1.0;
    std::size_t realizations = 100;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

struct AuxGapRow {
    double tau = 0.0;
    Statistics max_gap;
    double ratio = 0.0;  // previous row's mean / this row's mean (0 for the first row)
};

/// Mean over paths of max_j |sqrt(F(u_hat_j) + delta0) - q_j| per tau, shared paths.
std::vector<AuxGapRow> aux_gap_scaling(const Discretization& disc, const AuxGapConfig& config);

struct IncrementRow {
    double tau = 0.0;
    Statistics mean_increment;  // per path: mean over j of ||u_{j+1} - u_j||_{L2}
};

struct IncrementResult {
    std::vector<IncrementRow> rows;
    LineFit fit;
};

/// One-step increment size against tau on shared paths.
IncrementResult increment_scaling(const Discretization& disc, const AuxGapConfig& config);

struct SpatialConfig {
    Scheme scheme = Scheme::exponential;
    Predictor predictor = Predictor::identity;
    std::vector<std::size_t> elements;  // mesh ladder, increasing
    double tau = 0.0;
    double T = 1.0;
    std::size_t realizations = 100;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::size_t sample_intervals = 4096;  // grid for the L2 distance
};

struct SpatialRow {
    std::size_t elements = 0;
    double h = 0.0;
    double rms_error = 0.0;
    double stderr_rms = 0.0;
};

struct SpatialResult {
    std::vector<SpatialRow> rows;
    LineFit fit;
};

/// Terminal L2 distance between finite-element solutions and a spectral
/// reference driven by identical sine-mode increments.
SpatialResult fem_spatial_convergence(const Discretization& reference,
                                      const std::vector<const Discretization*>& meshes,
                                      const SpatialConfig& config);

struct WeakEnergyRow {
    std::size_t step = 0;
    double fem_mean_energy = 0.0;  // E[V - delta0], equal to E[V1] when q matches its definition
    double reference_mean_V1 = 0.0;
    double error = 0.0;
};

/// |E[V(u_h, v_h, q) - delta0] - E[V1(u_ref, v_ref)]| per step on shared increments.
std::vector<WeakEnergyRow> weak_energy_error(const Discretization& fem, const Discretization& reference,
                                             const EnergyConfig& config);

struct StructureReport {
    double max_scaled_residual = 0.0;  // max |defect| / (1 + scale)
    double min_denominator = 1.0;
    std::size_t samples = 0;
};

/// Pathwise energy identity along one noisy trajectory of `steps` steps:
/// max |V_{n+1} - V_n - <v_n, G_n> - |G_n|^2 / 2| / (1 + V_n).
StructureReport energy_identity_check(const Discretization& disc, Scheme scheme, Predictor predictor, double tau,
                                      std::size_t steps, std::uint64_t seed, SchemeOptions options = {});

/// Relative drift max_n |V_n - V_0| / V_0 of a noise-free trajectory.
StructureReport conservation_check(const Discretization& disc, Scheme scheme, Predictor predictor, double tau,
                                   std::size_t steps);

/// Updates from random states substituted back into the un-eliminated
/// equations: max defect / (1 + |(u, v, q)|).
StructureReport substitution_check(const Discretization& disc, Scheme scheme, double tau, std::size_t samples,
                                   std::uint64_t seed, SchemeOptions options = {});

struct CheckResult {
    std::string name;
    std::string module;
    double measured = 0.0;
    double threshold = 0.0;
    bool passed = false;
    std::uint64_t seed = 0;
};

struct SuiteOptions {
    std::uint64_t seed = 20240601;
    std::string filter;           // module name; empty runs everything
    SchemeOptions scheme_options; // mutation hook
    std::size_t workers = 1;
};

/// Fast structural checks of every module.
std::vector<CheckResult> invariant_suite(const SuiteOptions& options);

}  // namespace savwave
