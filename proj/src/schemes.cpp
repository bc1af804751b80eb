#include "savwave/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace savwave {

std::string_view name(Scheme scheme) {
    return scheme == Scheme::exponential ? "exponential" : "midpoint";
}

std::string_view name(Predictor predictor) {
    return predictor == Predictor::identity ? "identity" : "extrapolation";
}

Scheme scheme_from_name(std::string_view n) {
    if (n == "exponential") return Scheme::exponential;
    if (n == "midpoint") return Scheme::midpoint;
    throw std::invalid_argument("unknown scheme '" + std::string(n) + "' (expected exponential|midpoint)");
}

Predictor predictor_from_name(std::string_view n) {
    if (n == "identity") return Predictor::identity;
    if (n == "extrapolation") return Predictor::extrapolation;
    throw std::invalid_argument("unknown predictor '" + std::string(n) + "' (expected identity|extrapolation)");
}

SchemeTables::SchemeTables(const Eigen::VectorXd& eigenvalues, double tau_)
    : tau(tau_), group(eigenvalues, tau_) {
    const Eigen::VectorXd quarter = (0.25 * tau_ * tau_) * eigenvalues;
    midpoint_inverse = (Eigen::VectorXd::Ones(eigenvalues.size()) + quarter).cwiseInverse();
    midpoint_explicit = Eigen::VectorXd::Ones(eigenvalues.size()) - quarter;
}

namespace {

void require_sizes(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const StepTerms& terms,
                   const SchemeTables& tables) {
    const auto n = tables.group.lambda().size();
    if (u.size() != n || v.size() != n || terms.b.size() != n || terms.G.size() != n) {
        throw ModeMismatch("SAV update: state, terms and tables disagree on dimension");
    }
}

void require_solvable(double denominator) {
    if (!(denominator >= 1.0)) {
        std::ostringstream msg;
        msg << "rank-one denominator " << denominator << " < 1";
        throw std::logic_error(msg.str());
    }
}

}  // namespace

UpdateResult exponential_update(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double q,
                                const StepTerms& terms, const SchemeTables& tables) {
    require_sizes(u, v, terms, tables);
    const auto& g = tables.group;
    const Eigen::VectorXd& b = terms.b;
    const Eigen::VectorXd a1b = g.a1().cwiseProduct(b);
    const Eigen::VectorXd sin_smooth = g.sin().cwiseProduct(g.inv_sqrt_lambda());

    const double bu = b.dot(u);
    const Eigen::VectorXd gamma = g.cos().cwiseProduct(u) + sin_smooth.cwiseProduct(v + terms.G) -
                                  (q - 0.25 * bu) * a1b;

    UpdateResult out;
    out.denominator = 1.0 + 0.25 * b.dot(a1b);
    require_solvable(out.denominator);
    const double bu_next = b.dot(gamma) / out.denominator;
    out.u = gamma - (0.25 * bu_next) * a1b;
    out.q = q + 0.5 * b.dot(out.u - u);
    const double q_mid = 0.5 * (q + out.q);
    out.v = -g.sqrt_lambda().cwiseProduct(g.sin()).cwiseProduct(u) + g.cos().cwiseProduct(v + terms.G) -
            q_mid * sin_smooth.cwiseProduct(b);
    return out;
}

UpdateResult midpoint_update(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double q,
                             const StepTerms& terms, const SchemeTables& tables, SchemeOptions options) {
    require_sizes(u, v, terms, tables);
    const double tau = tables.tau;
    const double balance = options.balancing_term ? 1.0 : 0.0;
    const Eigen::VectorXd& b = terms.b;
    const double coupling = 0.125 * tau * tau;

    const double bu = b.dot(u);
    const Eigen::VectorXd rhs = tables.midpoint_explicit.cwiseProduct(u) + tau * v +
                                (0.5 * tau * (1.0 + balance)) * terms.G -
                                (0.5 * tau * tau * q - coupling * bu) * b;
    const Eigen::VectorXd w = tables.midpoint_inverse.cwiseProduct(b);
    const Eigen::VectorXd r = tables.midpoint_inverse.cwiseProduct(rhs);

    UpdateResult out;
    out.denominator = 1.0 + coupling * b.dot(w);
    require_solvable(out.denominator);
    const double bu_next = b.dot(r) / out.denominator;
    out.u = r - (coupling * bu_next) * w;
    out.v = (2.0 / tau) * (out.u - u) - v - balance * terms.G;
    out.q = q + 0.5 * b.dot(out.u - u);
    return out;
}

double exponential_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double q, const StepTerms& terms,
                            const SchemeTables& tables, const UpdateResult& next) {
    const auto& g = tables.group;
    const Eigen::VectorXd& b = terms.b;
    const double q_mid = 0.5 * (q + next.q);
    const Eigen::VectorXd sin_smooth = g.sin().cwiseProduct(g.inv_sqrt_lambda());
    const Eigen::VectorXd ru = next.u - (g.cos().cwiseProduct(u) + sin_smooth.cwiseProduct(v + terms.G) -
                                         q_mid * g.a1().cwiseProduct(b));
    const Eigen::VectorXd rv = next.v - (-g.sqrt_lambda().cwiseProduct(g.sin()).cwiseProduct(u) +
                                         g.cos().cwiseProduct(v + terms.G) - q_mid * sin_smooth.cwiseProduct(b));
    const double rq = next.q - q - 0.5 * b.dot(next.u - u);
    return std::max({ru.lpNorm<Eigen::Infinity>(), rv.lpNorm<Eigen::Infinity>(), std::abs(rq)});
}

double midpoint_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double q, const StepTerms& terms,
                         const SchemeTables& tables, const UpdateResult& next, SchemeOptions options) {
    const double tau = tables.tau;
    const double balance = options.balancing_term ? 1.0 : 0.0;
    const Eigen::VectorXd& b = terms.b;
    const double q_mid = 0.5 * (q + next.q);
    const Eigen::VectorXd ru = next.u - (u + (0.5 * tau) * (v + next.v) + (0.5 * tau * balance) * terms.G);
    const Eigen::VectorXd rv = next.v - (v - (0.5 * tau) * tables.group.lambda().cwiseProduct(u + next.u) -
                                         (tau * q_mid) * b + terms.G);
    const double rq = next.q - q - 0.5 * b.dot(next.u - u);
    return std::max({ru.lpNorm<Eigen::Infinity>(), rv.lpNorm<Eigen::Infinity>(), std::abs(rq)});
}

double quadratic_energy(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& eigenvalues) {
    return 0.5 * (u.cwiseProduct(eigenvalues).dot(u) + v.dot(v));
}

double modified_energy(const SavState& state, const Eigen::VectorXd& eigenvalues) {
    return quadratic_energy(state.u, state.v, eigenvalues) + state.q * state.q;
}

double pathwise_energy_residual(const SavState& state, const SavState& next, const Eigen::VectorXd& G,
                                const Eigen::VectorXd& eigenvalues) {
    const double dV = modified_energy(next, eigenvalues) - modified_energy(state, eigenvalues);
    return dV - state.v.dot(G) - 0.5 * G.dot(G);
}

namespace {

Eigen::VectorXd predictor_value(const SavState& state, Predictor predictor) {
    if (predictor == Predictor::identity) {
        return state.u;
    }
    return 1.5 * state.u - 0.5 * state.u_prev;
}

StepTerms explicit_terms(const Discretization& disc, const SavState& state, const Eigen::VectorXd& dW,
                         Predictor predictor) {
    if (static_cast<std::size_t>(dW.size()) != disc.noise_modes()) {
        throw ModeMismatch("noise increment has " + std::to_string(dW.size()) + " modes, backend expects " +
                           std::to_string(disc.noise_modes()));
    }
    StepTerms terms;
    ModalDrift drift = disc.drift_direction(predictor_value(state, predictor));
    terms.b = std::move(drift.b);
    terms.s = drift.s;
    terms.G = disc.noise_term(state.u, dW);
    return terms;
}

StepOutcome finish(const Discretization& disc, const SavState& state, StepTerms terms, UpdateResult update) {
    StepOutcome out;
    out.next.u = std::move(update.u);
    out.next.v = std::move(update.v);
    out.next.u_prev = state.u;
    out.next.q = update.q;
    out.next.step = state.step + 1;
    out.denominator = update.denominator;
    if (!out.next.u.allFinite() || !out.next.v.allFinite() || !std::isfinite(out.next.q)) {
        throw NumericalAbort("non-finite state produced at step " + std::to_string(out.next.step),
                             out.next.step);
    }
    out.energy_residual = pathwise_energy_residual(state, out.next, terms.G, disc.eigenvalues());
    out.terms = std::move(terms);
    return out;
}

}  // namespace

StepOutcome step_exponential_sav(const Discretization& disc, const SchemeTables& tables, const SavState& state,
                                 const Eigen::VectorXd& dW, Predictor predictor) {
    StepTerms terms = explicit_terms(disc, state, dW, predictor);
    UpdateResult update = exponential_update(state.u, state.v, state.q, terms, tables);
    return finish(disc, state, std::move(terms), std::move(update));
}

StepOutcome step_midpoint_sav(const Discretization& disc, const SchemeTables& tables, const SavState& state,
                              const Eigen::VectorXd& dW, Predictor predictor, SchemeOptions options) {
    StepTerms terms = explicit_terms(disc, state, dW, predictor);
    UpdateResult update = midpoint_update(state.u, state.v, state.q, terms, tables, options);
    return finish(disc, state, std::move(terms), std::move(update));
}

SavStepper::SavStepper(const Discretization& disc, Scheme scheme, Predictor predictor, double tau,
                       SchemeOptions options)
    : disc_(&disc), scheme_(scheme), predictor_(predictor), options_(options), tables_(disc.eigenvalues(), tau) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("SavStepper: tau must be positive");
    }
}

SavState SavStepper::initial_state() const {
    return initial_state(disc_->initial_displacement(), disc_->initial_velocity());
}

SavState SavStepper::initial_state(Eigen::VectorXd u0, Eigen::VectorXd v0) const {
    if (static_cast<std::size_t>(u0.size()) != disc_->dimension() ||
        static_cast<std::size_t>(v0.size()) != disc_->dimension()) {
        throw ModeMismatch("initial state dimension does not match the backend");
    }
    SavState s;
    s.q = checked_sav_root(disc_->potential(u0), disc_->delta0());
    s.u_prev = u0;
    s.u = std::move(u0);
    s.v = std::move(v0);
    return s;
}

StepOutcome SavStepper::step(const SavState& state, const Eigen::VectorXd& dW) const {
    if (scheme_ == Scheme::exponential) {
        return step_exponential_sav(*disc_, tables_, state, dW, predictor_);
    }
    return step_midpoint_sav(*disc_, tables_, state, dW, predictor_, options_);
}

Eigen::VectorXd SavStepper::predicted(const SavState& state) const {
    return predictor_value(state, predictor_);
}

StepDiagnostics SavStepper::diagnose(const SavState& state) const {
    StepDiagnostics d;
    const double quad = quadratic_energy(state.u, state.v, disc_->eigenvalues());
    const double F = disc_->potential(state.u);
    d.V = quad + state.q * state.q;
    d.V1 = quad + F;
    const double F_hat = predictor_ == Predictor::identity ? F : disc_->potential(predicted(state));
    d.aux_gap = std::abs(std::sqrt(std::max(F_hat + disc_->delta0(), 0.0)) - state.q);
    d.trace_term = disc_->noise_vanishes() ? 0.0 : disc_->noise_trace(state.u);
    if (!std::isfinite(d.V) || !std::isfinite(d.V1) || !std::isfinite(d.aux_gap) || !std::isfinite(d.trace_term)) {
        throw NumericalAbort("non-finite diagnostics at step " + std::to_string(state.step), state.step);
    }
    return d;
}

namespace detail {

void check_energy(double V, std::size_t step, const TrajectoryOptions& options) {
    if (!(V <= options.blowup_threshold)) {
        std::ostringstream msg;
        msg << "modified energy " << V << " exceeded the blow-up guard " << options.blowup_threshold
            << " at step " << step;
        throw NumericalAbort(msg.str(), step);
    }
}

}  // namespace detail

std::vector<RunRecord> run_trajectory(const SavStepper& stepper, std::size_t steps, const CovarianceSpec& cov,
                                      RngStream& rng, SavState* final_state, TrajectoryOptions options) {
    const double tau = stepper.tau();
    return run_trajectory(
        stepper, stepper.initial_state(), steps,
        [&]() { return sample_increment(cov, tau, rng).dW.coeffs(); }, final_state, options);
}

}  // namespace savwave
