#pragma once

#include "savwave/discretization.hpp"
#include "savwave/noise.hpp"
#include "savwave/spectral.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace savwave {

/// Non-finite intermediate or energy blow-up during a trajectory.
class NumericalAbort : public std::runtime_error {
public:
    NumericalAbort(const std::string& what, std::size_t step)
        : std::runtime_error(what), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

enum class Scheme { exponential, midpoint };
/// identity: u_hat_n = u_n; extrapolation: u_hat_n = (3 u_n - u_{n-1}) / 2 with u_{-1} = u_0.
enum class Predictor { identity, extrapolation };

std::string_view name(Scheme scheme);
std::string_view name(Predictor predictor);
Scheme scheme_from_name(std::string_view name);
Predictor predictor_from_name(std::string_view name);

/// (u, v, q) in modal coordinates. u_prev is only read by the extrapolating predictor.
struct SavState {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    Eigen::VectorXd u_prev;
    double q = 0.0;
    std::size_t step = 0;
};

/// Precomputed per-mode factors for one step size.
struct SchemeTables {
    SchemeTables(const Eigen::VectorXd& eigenvalues, double tau);

    double tau;
    WaveGroupTable group;
    Eigen::VectorXd midpoint_inverse;   // 1 / (1 + tau^2 lambda / 4)
    Eigen::VectorXd midpoint_explicit;  // 1 - tau^2 lambda / 4
};

/// Explicit inputs of one step: b = f(u_hat)/s, s, and G = g(Theta u_n) dW_n.
struct StepTerms {
    Eigen::VectorXd b;
    double s = 1.0;
    Eigen::VectorXd G;
};

struct SchemeOptions {
    /// Midpoint scheme only: include (tau/2) G in the displacement update.
    /// Switching it off breaks the energy law and exists for mutation testing.
    bool balancing_term = true;
};

struct UpdateResult {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double q = 0.0;
    double denominator = 1.0;  // rank-one solve denominator, always >= 1
};

/// Exponential SAV step solved by eliminating (q_n + q_{n+1})/2:
/// u_{n+1} + (a1 b / 4) <b, u_{n+1}> = Gamma_n, then q from the q-equation,
/// then v from the v-equation.
UpdateResult exponential_update(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double q,
                                const StepTerms& terms, const SchemeTables& tables);

/// Midpoint SAV step: M_tau u_{n+1} + (tau^2/8) b <b, u_{n+1}> = R_n solved by
/// Sherman-Morrison; v from the displacement equation, then q.
UpdateResult midpoint_update(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double q,
                             const StepTerms& terms, const SchemeTables& tables, SchemeOptions options = {});

/// Largest absolute defect of the three un-eliminated exponential-scheme
/// equations at a computed update.
double exponential_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double q, const StepTerms& terms,
                            const SchemeTables& tables, const UpdateResult& next);

/// Largest absolute defect of the three un-eliminated midpoint-scheme equations.
double midpoint_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double q, const StepTerms& terms,
                         const SchemeTables& tables, const UpdateResult& next, SchemeOptions options = {});

/// 1/2 |u|_{H^1}^2 + 1/2 |v|^2 + q^2.
double modified_energy(const SavState& state, const Eigen::VectorXd& eigenvalues);

/// 1/2 |u|_{H^1}^2 + 1/2 |v|^2 (no potential).
double quadratic_energy(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& eigenvalues);

/// V(next) - V(state) - <v_n, G_n> - 1/2 |G_n|^2. Vanishes up to round-off for both schemes.
double pathwise_energy_residual(const SavState& state, const SavState& next, const Eigen::VectorXd& G,
                                const Eigen::VectorXd& eigenvalues);

struct StepDiagnostics {
    double V = 0.0;               // modified energy
    double V1 = 0.0;              // original energy with the potential F(u)
    double energy_residual = 0.0; // of the step that produced this state
    double aux_gap = 0.0;         // |sqrt(F(u_hat)+delta0) - q|
    double trace_term = 0.0;      // sum_k q_k |g(Theta u) e_k|^2
    double denominator = 1.0;     // of the step that produced this state (1 at step 0)
};

struct StepOutcome {
    SavState next;
    StepTerms terms;
    double denominator = 1.0;
    double energy_residual = 0.0;
};

/// One exponential SAV step on `disc`; dW in sine coefficients of the noise.
StepOutcome step_exponential_sav(const Discretization& disc, const SchemeTables& tables, const SavState& state,
                                 const Eigen::VectorXd& dW, Predictor predictor = Predictor::identity);

/// One midpoint SAV step on `disc`.
StepOutcome step_midpoint_sav(const Discretization& disc, const SchemeTables& tables, const SavState& state,
                              const Eigen::VectorXd& dW, Predictor predictor = Predictor::identity,
                              SchemeOptions options = {});

/// Binds a backend, scheme, predictor and step size.
class SavStepper {
public:
    SavStepper(const Discretization& disc, Scheme scheme, Predictor predictor, double tau,
               SchemeOptions options = {});

    const Discretization& discretization() const { return *disc_; }
    const SchemeTables& tables() const { return tables_; }
    Scheme scheme() const { return scheme_; }
    Predictor predictor() const { return predictor_; }
    double tau() const { return tables_.tau; }

    /// State built from the backend's initial data with q_0 = sqrt(F(u_0) + delta0).
    SavState initial_state() const;
    SavState initial_state(Eigen::VectorXd u0, Eigen::VectorXd v0) const;

    /// Advances one step. Throws NumericalAbort on any non-finite result.
    StepOutcome step(const SavState& state, const Eigen::VectorXd& dW) const;

    /// Energies, auxiliary gap and trace term at `state`.
    StepDiagnostics diagnose(const SavState& state) const;

    Eigen::VectorXd predicted(const SavState& state) const;

private:
    const Discretization* disc_;
    Scheme scheme_;
    Predictor predictor_;
    SchemeOptions options_;
    SchemeTables tables_;
};

/// Per-step diagnostics of a trajectory.
struct RunRecord {
    std::size_t step = 0;
    double time = 0.0;
    double q = 0.0;
    StepDiagnostics diag;
};

struct TrajectoryOptions {
    /// Abort once the modified energy exceeds this value.
    double blowup_threshold = 1e12;
};

/// Runs N steps drawing increments from `noise` (called once per step, returns
/// a coefficient vector). Returns N+1 records including step 0; `final_state`
/// receives the terminal state when non-null.
template <typename NoiseFn>
std::vector<RunRecord> run_trajectory(const SavStepper& stepper, SavState state, std::size_t steps, NoiseFn&& noise,
                                      SavState* final_state = nullptr, TrajectoryOptions options = {});

/// Convenience overload sampling fresh increments from `cov` and `rng`.
std::vector<RunRecord> run_trajectory(const SavStepper& stepper, std::size_t steps, const CovarianceSpec& cov,
                                      RngStream& rng, SavState* final_state = nullptr,
                                      TrajectoryOptions options = {});

namespace detail {
void check_energy(double V, std::size_t step, const TrajectoryOptions& options);
}

template <typename NoiseFn>
std::vector<RunRecord> run_trajectory(const SavStepper& stepper, SavState state, std::size_t steps, NoiseFn&& noise,
                                      SavState* final_state, TrajectoryOptions options) {
    std::vector<RunRecord> records;
    records.reserve(steps + 1);
    RunRecord first;
    first.step = state.step;
    first.time = static_cast<double>(state.step) * stepper.tau();
    first.q = state.q;
    first.diag = stepper.diagnose(state);
    detail::check_energy(first.diag.V, state.step, options);
    records.push_back(first);
    for (std::size_t n = 0; n < steps; ++n) {
        StepOutcome out = stepper.step(state, noise());
        state = std::move(out.next);
        RunRecord rec;
        rec.step = state.step;
        rec.time = static_cast<double>(state.step) * stepper.tau();
        rec.q = state.q;
        rec.diag = stepper.diagnose(state);
        rec.diag.energy_residual = out.energy_residual;
        rec.diag.denominator = out.denominator;
        detail::check_energy(rec.diag.V, state.step, options);
        records.push_back(rec);
    }
    if (final_state != nullptr) {
        *final_state = std::move(state);
    }
    return records;
}

}  // namespace savwave
