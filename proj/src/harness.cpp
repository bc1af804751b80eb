#include "savwave/harness.hpp"

#include "savwave/fem.hpp"
#include "savwave/model.hpp"
#include "savwave/noise.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace savwave {

Statistics summarize(std::span<const double> samples) {
    Statistics s;
    s.count = samples.size();
    if (samples.empty()) {
        return s;
    }
    // Shifted by the first sample so constant data gives zero spread exactly.
    const double shift = samples.front();
    double sum = 0.0;
    for (double x : samples) sum += x - shift;
    const double offset = sum / static_cast<double>(s.count);
    s.mean = shift + offset;
    if (s.count > 1) {
        double ss = 0.0;
        for (double x : samples) ss += (x - shift - offset) * (x - shift - offset);
        const double var = ss / static_cast<double>(s.count - 1);
        s.stderr_mean = std::sqrt(var / static_cast<double>(s.count));
    }
    return s;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fit_line: need at least two matching points");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log2(x[i]));
        ly.push_back(std::log2(y[i]));
    }
    return fit_line(lx, ly);
}

double state_distance(const SavState& a, const SavState& b, const Eigen::VectorXd& eigenvalues, ErrorNorm norm) {
    const Eigen::VectorXd du = a.u - b.u;
    if (norm == ErrorNorm::l2) {
        return du.norm();
    }
    const Eigen::VectorXd dv = a.v - b.v;
    return std::sqrt(du.cwiseProduct(eigenvalues).dot(du) + dv.dot(dv));
}

namespace {

/// Number of steps of size tau covering [0, T]; T must be a multiple of tau.
std::size_t step_count(double T, double tau) {
    if (!(tau > 0.0) || !(T >= 0.0)) {
        throw std::invalid_argument("step size and horizon must be positive");
    }
    const double n = std::round(T / tau);
    if (std::abs(n * tau - T) > 1e-12 * std::max(1.0, T)) {
        std::ostringstream msg;
        msg << "T = " << T << " is not a multiple of tau = " << tau;
        throw std::invalid_argument(msg.str());
    }
    return static_cast<std::size_t>(n);
}

/// tau / fine as an exact power of two.
std::size_t dyadic_multiple(double tau, double fine) {
    const double r = std::round(tau / fine);
    const auto m = static_cast<std::size_t>(r);
    if (r < 1.0 || std::abs(r * fine - tau) > 1e-12 * tau || (m & (m - 1)) != 0) {
        std::ostringstream msg;
        msg << "tau = " << tau << " is not a power-of-two multiple of " << fine;
        throw std::invalid_argument(msg.str());
    }
    return m;
}

bool recoverable(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const NumericalAbort&) {
        return true;
    } catch (const ModelViolation&) {
        return true;
    } catch (...) {
        return false;
    }
}

struct PathErrors {
    bool excluded = false;
    std::vector<double> squared;  // scheme-major, then tau
};

}  // namespace

ConvergenceResult strong_convergence(const Discretization& disc, const ConvergenceConfig& config) {
    if (config.taus.empty() || config.schemes.empty()) {
        throw std::invalid_argument("strong_convergence: empty ladder or scheme list");
    }
    const std::size_t n_ref = step_count(config.T, config.tau_ref);
    std::vector<std::size_t> multiples{1};
    for (double tau : config.taus) {
        multiples.push_back(dyadic_multiple(tau, config.tau_ref));
        step_count(config.T, tau);
    }
    const std::size_t L = config.taus.size();
    const std::size_t S = config.schemes.size();

    // Reference steppers: one per scheme, or a single shared cross-scheme reference.
    std::vector<SavStepper> refs;
    if (config.reference_scheme) {
        refs.emplace_back(disc, *config.reference_scheme, config.predictor, config.tau_ref);
    } else {
        for (Scheme s : config.schemes) refs.emplace_back(disc, s, config.predictor, config.tau_ref);
    }
    std::vector<SavStepper> coarse;
    for (Scheme s : config.schemes) {
        for (double tau : config.taus) coarse.emplace_back(disc, s, config.predictor, tau);
    }
    const CovarianceSpec& cov = disc.covariance();

    auto one_path = [&](std::size_t r) -> PathErrors {
        PathErrors out;
        try {
            RngStream rng(config.seed, r);
            CoupledPath path(cov, config.tau_ref, multiples);
            std::vector<SavState> ref_states;
            for (const auto& st : refs) ref_states.push_back(st.initial_state());
            std::vector<SavState> states;
            for (const auto& st : coarse) states.push_back(st.initial_state());
            for (std::size_t n = 0; n < n_ref; ++n) {
                const Eigen::VectorXd& fine = path.advance(rng);
                for (std::size_t i = 0; i < refs.size(); ++i) {
                    ref_states[i] = refs[i].step(ref_states[i], fine).next;
                }
                for (std::size_t l = 0; l < L; ++l) {
                    if (!path.ready(l + 1)) continue;
                    const Eigen::VectorXd& inc = path.increment(l + 1);
                    for (std::size_t s = 0; s < S; ++s) {
                        const std::size_t idx = s * L + l;
                        states[idx] = coarse[idx].step(states[idx], inc).next;
                    }
                }
            }
            out.squared.resize(S * L);
            for (std::size_t s = 0; s < S; ++s) {
                const SavState& ref = ref_states[config.reference_scheme ? 0 : s];
                for (std::size_t l = 0; l < L; ++l) {
                    const double e = state_distance(ref, states[s * L + l], disc.eigenvalues(), config.norm);
                    out.squared[s * L + l] = e * e;
                }
            }
        } catch (...) {
            if (!recoverable(std::current_exception())) throw;
            out.excluded = true;
        }
        return out;
    };

    const auto paths = parallel_map(config.realizations, config.workers, one_path);

    ConvergenceResult result;
    result.seed = config.seed;
    for (std::size_t s = 0; s < S; ++s) {
        std::vector<double> taus, errs;
        for (std::size_t l = 0; l < L; ++l) {
            std::vector<double> sq;
            std::size_t excluded = 0;
            for (const auto& p : paths) {
                if (p.excluded) {
                    ++excluded;
                } else {
                    sq.push_back(p.squared[s * L + l]);
                }
            }
            const Statistics st = summarize(sq);
            ConvergenceRow row;
            row.scheme = config.schemes[s];
            row.tau = config.taus[l];
            row.rms_error = std::sqrt(st.mean);
            row.stderr_rms = row.rms_error > 0.0 ? st.stderr_mean / (2.0 * row.rms_error) : 0.0;
            row.excluded_paths = excluded;
            result.rows.push_back(row);
            if (row.rms_error > 0.0) {
                taus.push_back(row.tau);
                errs.push_back(row.rms_error);
            }
        }
        result.fits.push_back(taus.size() >= 2 ? fit_loglog(taus, errs) : LineFit{});
    }
    return result;
}

namespace {

struct EnergyPath {
    std::vector<double> V;
    std::vector<double> V1;
    std::vector<double> trace;
    double min_denominator = 1.0;
};

}  // namespace

std::vector<EnergyRow> energy_evolution(const Discretization& disc, const EnergyConfig& config) {
    const SavStepper stepper(disc, config.scheme, config.predictor, config.tau);
    const CovarianceSpec& cov = disc.covariance();

    auto one_path = [&](std::size_t r) {
        RngStream rng(config.seed, r);
        const auto records = run_trajectory(stepper, stepper.initial_state(), config.steps,
                                            [&]() { return sample_increment(cov, config.tau, rng).dW.coeffs(); });
        EnergyPath p;
        for (const auto& rec : records) {
            p.V.push_back(rec.diag.V);
            p.V1.push_back(rec.diag.V1);
            p.trace.push_back(rec.diag.trace_term);
            p.min_denominator = std::min(p.min_denominator, rec.diag.denominator);
        }
        return p;
    };
    const auto paths = parallel_map(config.realizations, config.workers, one_path);

    std::vector<EnergyRow> rows(config.steps + 1);
    double predicted = 0.0;
    double min_den = 1.0;
    for (const auto& p : paths) min_den = std::min(min_den, p.min_denominator);
    std::vector<double> column(paths.size());
    for (std::size_t n = 0; n <= config.steps; ++n) {
        EnergyRow& row = rows[n];
        row.step = n;
        row.time = static_cast<double>(n) * config.tau;
        for (std::size_t r = 0; r < paths.size(); ++r) column[r] = paths[r].V[n];
        const Statistics v = summarize(column);
        row.mean_V = v.mean;
        row.stderr_V = v.stderr_mean;
        for (std::size_t r = 0; r < paths.size(); ++r) column[r] = paths[r].V[n] * paths[r].V[n];
        row.mean_V_squared = summarize(column).mean;
        for (std::size_t r = 0; r < paths.size(); ++r) column[r] = paths[r].V1[n];
        row.mean_V1 = summarize(column).mean;
        if (n == 0) {
            predicted = row.mean_V;
        } else {
            for (std::size_t r = 0; r < paths.size(); ++r) column[r] = paths[r].trace[n - 1];
            predicted += 0.5 * config.tau * summarize(column).mean;
        }
        row.predicted_V = predicted;
        row.max_denominator_violation = std::max(0.0, 1.0 - min_den);
    }
    return rows;
}

namespace {

struct LadderPath {
    std::vector<double> max_gap;
    std::vector<double> mean_increment;
};

/// Runs every tau of a dyadic ladder on one shared path, tracking the
/// auxiliary gap and the one-step increment size.
std::vector<LadderPath> ladder_paths(const Discretization& disc, const AuxGapConfig& config) {
    if (config.taus.empty()) {
        throw std::invalid_argument("empty tau ladder");
    }
    const double fine = *std::min_element(config.taus.begin(), config.taus.end());
    const std::size_t n_fine = step_count(config.T, fine);
    std::vector<std::size_t> multiples;
    std::vector<std::size_t> steps;
    std::vector<SavStepper> steppers;
    for (double tau : config.taus) {
        multiples.push_back(dyadic_multiple(tau, fine));
        steps.push_back(step_count(config.T, tau));
        steppers.emplace_back(disc, config.scheme, config.predictor, tau);
    }
    const CovarianceSpec& cov = disc.covariance();
    const std::size_t L = config.taus.size();

    auto one_path = [&](std::size_t r) {
        RngStream rng(config.seed, r);
        CoupledPath path(cov, fine, multiples);
        std::vector<SavState> states;
        for (const auto& st : steppers) states.push_back(st.initial_state());
        LadderPath out;
        out.max_gap.assign(L, 0.0);
        out.mean_increment.assign(L, 0.0);
        for (std::size_t n = 0; n < n_fine; ++n) {
            path.advance(rng);
            for (std::size_t l = 0; l < L; ++l) {
                if (!path.ready(l)) continue;
                StepOutcome o = steppers[l].step(states[l], path.increment(l));
                out.max_gap[l] = std::max(out.max_gap[l], std::abs(o.terms.s - states[l].q));
                out.mean_increment[l] += (o.next.u - states[l].u).norm();
                states[l] = std::move(o.next);
            }
        }
        for (std::size_t l = 0; l < L; ++l) {
            out.max_gap[l] = std::max(out.max_gap[l], steppers[l].diagnose(states[l]).aux_gap);
            out.mean_increment[l] /= static_cast<double>(steps[l]);
        }
        return out;
    };
    return parallel_map(config.realizations, config.workers, one_path);
}

}  // namespace

std::vector<AuxGapRow> aux_gap_scaling(const Discretization& disc, const AuxGapConfig& config) {
    const auto paths = ladder_paths(disc, config);
    std::vector<AuxGapRow> rows;
    std::vector<double> column(paths.size());
    for (std::size_t l = 0; l < config.taus.size(); ++l) {
        for (std::size_t r = 0; r < paths.size(); ++r) column[r] = paths[r].max_gap[l];
        AuxGapRow row;
        row.tau = config.taus[l];
        row.max_gap = summarize(column);
        if (!rows.empty() && row.max_gap.mean > 0.0) {
            row.ratio = rows.back().max_gap.mean / row.max_gap.mean;
        }
        rows.push_back(row);
    }
    return rows;
}

IncrementResult increment_scaling(const Discretization& disc, const AuxGapConfig& config) {
    const auto paths = ladder_paths(disc, config);
    IncrementResult result;
    std::vector<double> column(paths.size());
    std::vector<double> taus, means;
    for (std::size_t l = 0; l < config.taus.size(); ++l) {
        for (std::size_t r = 0; r < paths.size(); ++r) column[r] = paths[r].mean_increment[l];
        IncrementRow row;
        row.tau = config.taus[l];
        row.mean_increment = summarize(column);
        result.rows.push_back(row);
        taus.push_back(row.tau);
        means.push_back(row.mean_increment.mean);
    }
    if (taus.size() >= 2) {
        result.fit = fit_loglog(taus, means);
    }
    return result;
}

namespace {

/// Trapezoid L2 norm of nodal samples on a uniform grid of (0,1).
double sampled_l2(const Eigen::VectorXd& values) {
    const double h = 1.0 / static_cast<double>(values.size() - 1);
    double sum = 0.5 * (values(0) * values(0) + values(values.size() - 1) * values(values.size() - 1));
    for (Eigen::Index j = 1; j + 1 < values.size(); ++j) sum += values(j) * values(j);
    return std::sqrt(h * sum);
}

}  // namespace

SpatialResult fem_spatial_convergence(const Discretization& reference,
                                      const std::vector<const Discretization*>& meshes,
                                      const SpatialConfig& config) {
    if (meshes.size() != config.elements.size()) {
        throw std::invalid_argument("fem_spatial_convergence: mesh list and element ladder differ");
    }
    for (const auto* m : meshes) {
        if (m->noise_modes() != reference.noise_modes()) {
            throw ModeMismatch("fem_spatial_convergence: meshes must share the reference noise modes");
        }
    }
    const std::size_t N = step_count(config.T, config.tau);
    const SavStepper ref_stepper(reference, config.scheme, config.predictor, config.tau);
    std::vector<SavStepper> steppers;
    std::vector<Eigen::MatrixXd> samplers;
    for (const auto* m : meshes) {
        steppers.emplace_back(*m, config.scheme, config.predictor, config.tau);
        samplers.push_back(m->sampling_matrix(config.sample_intervals));
    }
    const Eigen::MatrixXd ref_sampler = reference.sampling_matrix(config.sample_intervals);
    const CovarianceSpec& cov = reference.covariance();

    auto one_path = [&](std::size_t r) {
        RngStream rng(config.seed, r);
        SavState ref = ref_stepper.initial_state();
        std::vector<SavState> states;
        for (const auto& st : steppers) states.push_back(st.initial_state());
        for (std::size_t n = 0; n < N; ++n) {
            const Eigen::VectorXd dW = sample_increment(cov, config.tau, rng).dW.coeffs();
            ref = ref_stepper.step(ref, dW).next;
            for (std::size_t l = 0; l < steppers.size(); ++l) {
                states[l] = steppers[l].step(states[l], dW).next;
            }
        }
        const Eigen::VectorXd ref_values = ref_sampler * ref.u;
        std::vector<double> sq;
        for (std::size_t l = 0; l < steppers.size(); ++l) {
            const double e = sampled_l2(ref_values - samplers[l] * states[l].u);
            sq.push_back(e * e);
        }
        return sq;
    };
    const auto paths = parallel_map(config.realizations, config.workers, one_path);

    SpatialResult result;
    std::vector<double> hs, errs;
    std::vector<double> column(paths.size());
    for (std::size_t l = 0; l < meshes.size(); ++l) {
        for (std::size_t r = 0; r < paths.size(); ++r) column[r] = paths[r][l];
        const Statistics st = summarize(column);
        SpatialRow row;
        row.elements = config.elements[l];
        row.h = 1.0 / static_cast<double>(row.elements);
        row.rms_error = std::sqrt(st.mean);
        row.stderr_rms = row.rms_error > 0.0 ? st.stderr_mean / (2.0 * row.rms_error) : 0.0;
        result.rows.push_back(row);
        hs.push_back(row.h);
        errs.push_back(row.rms_error);
    }
    if (hs.size() >= 2) {
        result.fit = fit_loglog(hs, errs);
    }
    return result;
}

std::vector<WeakEnergyRow> weak_energy_error(const Discretization& fem, const Discretization& reference,
                                             const EnergyConfig& config) {
    if (fem.noise_modes() != reference.noise_modes()) {
        throw ModeMismatch("weak_energy_error: backends must share the noise modes");
    }
    const SavStepper fs(fem, config.scheme, config.predictor, config.tau);
    const SavStepper rs(reference, config.scheme, config.predictor, config.tau);
    const CovarianceSpec& cov = reference.covariance();

    auto one_path = [&](std::size_t r) {
        RngStream rng(config.seed, r);
        SavState a = fs.initial_state();
        SavState b = rs.initial_state();
        std::vector<std::pair<double, double>> out;
        auto record = [&]() {
            out.emplace_back(modified_energy(a, fem.eigenvalues()) - fem.delta0(),
                             quadratic_energy(b.u, b.v, reference.eigenvalues()) + reference.potential(b.u));
        };
        record();
        for (std::size_t n = 0; n < config.steps; ++n) {
            const Eigen::VectorXd dW = sample_increment(cov, config.tau, rng).dW.coeffs();
            a = fs.step(a, dW).next;
            b = rs.step(b, dW).next;
            record();
        }
        return out;
    };
    const auto paths = parallel_map(config.realizations, config.workers, one_path);

    std::vector<WeakEnergyRow> rows(config.steps + 1);
    std::vector<double> ca(paths.size()), cb(paths.size());
    for (std::size_t n = 0; n <= config.steps; ++n) {
        for (std::size_t r = 0; r < paths.size(); ++r) {
            ca[r] = paths[r][n].first;
            cb[r] = paths[r][n].second;
        }
        WeakEnergyRow& row = rows[n];
        row.step = n;
        row.fem_mean_energy = summarize(ca).mean;
        row.reference_mean_V1 = summarize(cb).mean;
        row.error = std::abs(row.fem_mean_energy - row.reference_mean_V1);
    }
    return rows;
}

}  // namespace savwave

namespace savwave {

StructureReport energy_identity_check(const Discretization& disc, Scheme scheme, Predictor predictor, double tau,
                                      std::size_t steps, std::uint64_t seed, SchemeOptions options) {
    const SavStepper stepper(disc, scheme, predictor, tau, options);
    RngStream rng(seed, 0);
    SavState state = stepper.initial_state();
    StructureReport report;
    for (std::size_t n = 0; n < steps; ++n) {
        const Eigen::VectorXd dW = sample_increment(disc.covariance(), tau, rng).dW.coeffs();
        const double V = modified_energy(state, disc.eigenvalues());
        StepOutcome out = stepper.step(state, dW);
        report.max_scaled_residual = std::max(report.max_scaled_residual, std::abs(out.energy_residual) / (1.0 + V));
        report.min_denominator = std::min(report.min_denominator, out.denominator);
        ++report.samples;
        state = std::move(out.next);
    }
    return report;
}

StructureReport conservation_check(const Discretization& disc, Scheme scheme, Predictor predictor, double tau,
                                   std::size_t steps) {
    const SavStepper stepper(disc, scheme, predictor, tau);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.noise_modes()));
    SavState state = stepper.initial_state();
    const double V0 = modified_energy(state, disc.eigenvalues());
    StructureReport report;
    for (std::size_t n = 0; n < steps; ++n) {
        StepOutcome out = stepper.step(state, zero);
        state = std::move(out.next);
        const double V = modified_energy(state, disc.eigenvalues());
        report.max_scaled_residual = std::max(report.max_scaled_residual, std::abs(V - V0) / V0);
        report.min_denominator = std::min(report.min_denominator, out.denominator);
        ++report.samples;
    }
    return report;
}

StructureReport substitution_check(const Discretization& disc, Scheme scheme, double tau, std::size_t samples,
                                   std::uint64_t seed, SchemeOptions options) {
    const SchemeTables tables(disc.eigenvalues(), tau);
    RngStream rng(seed, 0);
    const auto d = static_cast<Eigen::Index>(disc.dimension());
    StructureReport report;
    for (std::size_t i = 0; i < samples; ++i) {
        Eigen::VectorXd u(d), v(d);
        for (Eigen::Index k = 0; k < d; ++k) {
            u(k) = rng.normal() / static_cast<double>(k + 1);
            v(k) = rng.normal();
        }
        const double q = 1.0 + std::abs(rng.normal());
        const Eigen::VectorXd dW = sample_increment(disc.covariance(), tau, rng).dW.coeffs();
        StepTerms terms;
        ModalDrift drift = disc.drift_direction(u);
        terms.b = std::move(drift.b);
        terms.s = drift.s;
        terms.G = disc.noise_term(u, dW);
        double defect = 0.0;
        UpdateResult next;
        if (scheme == Scheme::exponential) {
            next = exponential_update(u, v, q, terms, tables);
            defect = exponential_residual(u, v, q, terms, tables, next);
        } else {
            next = midpoint_update(u, v, q, terms, tables, options);
            defect = midpoint_residual(u, v, q, terms, tables, next, options);
        }
        const double scale = std::sqrt(u.squaredNorm() + v.squaredNorm() + q * q);
        report.max_scaled_residual = std::max(report.max_scaled_residual, defect / (1.0 + scale));
        report.min_denominator = std::min(report.min_denominator, next.denominator);
        ++report.samples;
    }
    return report;
}

}  // namespace savwave
