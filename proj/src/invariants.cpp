#include "savwave/fem.hpp"
#include "savwave/harness.hpp"
#include "savwave/model.hpp"
#include "savwave/noise.hpp"
#include "savwave/spectral.hpp"

#include <cmath>
#include <functional>

namespace savwave {

namespace {

class Suite {
public:
    explicit Suite(const SuiteOptions& options) : options_(options) {}

    bool wants(std::string_view module) const { return options_.filter.empty() || options_.filter == module; }

    /// Records a check that passes when measured <= threshold.
    void at_most(std::string name, std::string module, double measured, double threshold) {
        add(std::move(name), std::move(module), measured, threshold, measured <= threshold);
    }

    void at_least(std::string name, std::string module, double measured, double threshold) {
        add(std::move(name), std::move(module), measured, threshold, measured >= threshold);
    }

    std::vector<CheckResult> take() { return std::move(results_); }

private:
    void add(std::string name, std::string module, double measured, double threshold, bool passed) {
        CheckResult r;
        r.name = std::move(name);
        r.module = std::move(module);
        r.measured = measured;
        r.threshold = threshold;
        r.passed = passed && std::isfinite(measured);
        r.seed = options_.seed;
        results_.push_back(std::move(r));
    }

    const SuiteOptions& options_;
    std::vector<CheckResult> results_;
};

void spectral_checks(Suite& suite, std::uint64_t seed) {
    const std::size_t K = 64;
    const WaveGroupTable table = WaveGroupTable::spectral(K, 0.37);
    const double trig = (table.cos().array().square() + table.sin().array().square() - 1.0).abs().maxCoeff();
    suite.at_most("trig_identity", "spectral", trig, 1e-14);

    RngStream rng(seed, 1);
    Eigen::VectorXd c(K);
    for (auto& x : c) x = rng.normal();
    const SineTransform t(K, 2 * K);
    const double roundtrip = (t.to_spectral(t.to_nodal(c)) - c).lpNorm<Eigen::Infinity>();
    suite.at_most("transform_roundtrip", "spectral", roundtrip, 1e-12);

    PairState x{SpectralField(c), SpectralField(Eigen::VectorXd(c.reverse()))};
    const auto energy = [&](const PairState& s) {
        return 0.5 * (s.u.coeffs().cwiseProduct(table.lambda()).dot(s.u.coeffs()) + s.v.coeffs().squaredNorm());
    };
    const double e0 = energy(x);
    for (int i = 0; i < 100; ++i) x = group_step(x, table);
    suite.at_most("group_energy", "spectral", std::abs(energy(x) - e0) / e0, 1e-12);
}

void noise_checks(Suite& suite, std::uint64_t seed) {
    const CovarianceSpec cov = CovarianceSpec::power_law(8, 2.0);
    const double tau = 1.0 / 64.0;
    RngStream rng(seed, 2);
    CoupledPath path(cov, tau, {1, 4});
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(8);
    double coupling = 0.0;
    for (int n = 0; n < 64; ++n) {
        const Eigen::VectorXd& fine = path.advance(rng);
        sum = (n % 4 == 0) ? Eigen::VectorXd(fine) : Eigen::VectorXd(sum + fine);
        if (path.ready(1)) {
            coupling = std::max(coupling, (path.increment(1) - sum).lpNorm<Eigen::Infinity>());
        }
    }
    suite.at_most("coupled_increment_sum", "noise", coupling, 0.0);

    RngStream draws(seed, 3);
    const std::size_t n = 20000;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = sample_increment(cov, tau, draws).dW.mode(1);
        ss += x * x;
    }
    const double ratio = ss / static_cast<double>(n) / (cov.weights(0) * tau);
    suite.at_most("increment_variance", "noise", std::abs(ratio - 1.0), 5.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

void scheme_checks(Suite& suite, const SuiteOptions& options) {
    const std::size_t K = 64;
    const SpectralDiscretization noisy(Problem::standard(K, Drift::from_name("sine"), Diffusion::from_name("sine")));
    const SpectralDiscretization quiet(Problem::standard(K, Drift::from_name("sine"), Diffusion::from_name("zero")));
    double min_den = 1.0;
    for (Scheme s : {Scheme::exponential, Scheme::midpoint}) {
        const std::string tag(name(s));
        const auto id = energy_identity_check(noisy, s, Predictor::identity, 1.0 / 128.0, 256, options.seed,
                                              options.scheme_options);
        suite.at_most("energy_identity_" + tag, "schemes", id.max_scaled_residual, 1e-9);
        const auto cons = conservation_check(quiet, s, Predictor::identity, 1.0 / 256.0, 10000);
        suite.at_most("conservation_" + tag, "schemes", cons.max_scaled_residual, 1e-10);
        const auto sub = substitution_check(noisy, s, 1.0 / 256.0, 100, options.seed, options.scheme_options);
        suite.at_most("substitution_" + tag, "schemes", sub.max_scaled_residual, 1e-10);
        min_den = std::min({min_den, id.min_denominator, cons.min_denominator, sub.min_denominator});
    }
    suite.at_least("rank_one_denominator", "schemes", min_den, 1.0);
}

void fem_checks(Suite& suite, const SuiteOptions& options) {
    const FemSystem sys(32);
    double eig = 0.0;
    for (std::size_t k = 1; k <= sys.dimension(); ++k) {
        const double mu = FemSystem::closed_form_eigenvalue(k, sys.h());
        eig = std::max(eig, std::abs(sys.eigenvalues()(static_cast<Eigen::Index>(k - 1)) - mu) / mu);
    }
    suite.at_most("closed_form_eigenvalues", "fem", eig, 1e-10);
    const Eigen::MatrixXd gram = sys.eigenvectors().transpose() * sys.mass() * sys.eigenvectors();
    const double ortho = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).lpNorm<Eigen::Infinity>();
    suite.at_most("mass_orthonormal", "fem", ortho, 1e-12);

    const FemDiscretization fem(Problem::standard(64, Drift::from_name("sine"), Diffusion::from_name("sine")), 32);
    for (Scheme s : {Scheme::exponential, Scheme::midpoint}) {
        const auto id =
            energy_identity_check(fem, s, Predictor::identity, 1.0 / 128.0, 128, options.seed, options.scheme_options);
        suite.at_most("energy_identity_fem_" + std::string(name(s)), "fem", id.max_scaled_residual, 1e-9);
    }
}

void harness_checks(Suite& suite, const SuiteOptions& options) {
    const SpectralDiscretization disc(Problem::standard(16, Drift::from_name("sine"), Diffusion::from_name("sine")));
    ConvergenceConfig c;
    c.taus = {1.0 / 16.0, 1.0 / 32.0};
    c.tau_ref = 1.0 / 128.0;
    c.realizations = 8;
    c.seed = options.seed;
    c.workers = 1;
    const auto a = strong_convergence(disc, c);
    c.workers = std::max<std::size_t>(2, options.workers);
    const auto b = strong_convergence(disc, c);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        diff = std::max(diff, std::abs(a.rows[i].rms_error - b.rows[i].rms_error));
    }
    suite.at_most("worker_count_determinism", "harness", diff, 0.0);
}

}  // namespace

std::vector<CheckResult> invariant_suite(const SuiteOptions& options) {
    Suite suite(options);
    if (suite.wants("spectral")) spectral_checks(suite, options.seed);
    if (suite.wants("noise")) noise_checks(suite, options.seed);
    if (suite.wants("schemes")) scheme_checks(suite, options);
    if (suite.wants("fem")) fem_checks(suite, options);
    if (suite.wants("harness")) harness_checks(suite, options);
    return suite.take();
}

}  // namespace savwave
