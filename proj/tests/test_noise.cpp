#include "savwave/noise.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace savwave;

TEST_CASE("power-law weights and tail") {
    const auto cov = CovarianceSpec::power_law(10, 2.0);
    for (std::size_t k = 1; k <= 10; ++k) {
        CHECK(cov.weights(static_cast<Eigen::Index>(k - 1)) == doctest::Approx(1.0 / double(k * k)));
    }
    double partial = 0.0;
    for (int k = 1; k <= 10; ++k) partial += 1.0 / (k * k);
    CHECK(trace(cov) == doctest::Approx(partial));
    const double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;
    CHECK(cov.truncated_tail() == doctest::Approx(zeta2 - partial).epsilon(1e-10));
    CHECK(std::isnan(CovarianceSpec::from_weights(Eigen::VectorXd::Ones(3)).truncated_tail()));
}

TEST_CASE("non-positive weights are rejected") {
    Eigen::VectorXd w(2);
    w << 1.0, 0.0;
    CHECK_THROWS(CovarianceSpec::from_weights(w));
}

TEST_CASE("streams are a pure function of seed and index") {
    RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 20; ++i) {
        const double x = a.normal();
        CHECK(x == b.normal());
        differs_c = differs_c || x != c.normal();
        differs_d = differs_d || x != d.normal();
    }
    CHECK(differs_c);
    CHECK(differs_d);
    CHECK(a.counter() == 20);
}

TEST_CASE("increment variance per mode is q_k tau") {
    const auto cov = CovarianceSpec::power_law(4, 2.0);
    const double tau = 0.01;
    const int n = 20000;
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(4);
    RngStream rng(5, 0);
    for (int i = 0; i < n; ++i) {
        const auto inc = sample_increment(cov, tau, rng);
        sum_sq += inc.dW.coeffs().cwiseAbs2();
    }
    for (Eigen::Index k = 0; k < 4; ++k) {
        const double expected = cov.weights(k) * tau;
        // Var of the sample second moment of a normal: 2 sigma^4 / n.
        const double sd = std::sqrt(2.0 / n) * expected;
        CHECK(std::abs(sum_sq(k) / n - expected) < 5.0 * sd);
    }
    CHECK_THROWS(sample_increment(cov, 0.0, rng));
}

TEST_CASE("coarse increments are sums of fine increments") {
    const auto cov = CovarianceSpec::power_law(6, 2.0);
    CoupledPath path(cov, 1.0 / 64, {1, 2, 8});
    RngStream rng(9, 3);
    Eigen::VectorXd acc2 = Eigen::VectorXd::Zero(6), acc8 = Eigen::VectorXd::Zero(6);
    int completed8 = 0;
    for (int n = 1; n <= 32; ++n) {
        const Eigen::VectorXd fine = path.advance(rng);
        CHECK(path.ready(0));
        CHECK((path.increment(0) - fine).norm() == 0.0);
        acc2 += fine;
        acc8 += fine;
        CHECK(path.ready(1) == (n % 2 == 0));
        CHECK(path.ready(2) == (n % 8 == 0));
        if (n % 2 == 0) {
            CHECK((path.increment(1) - acc2).cwiseAbs().maxCoeff() < 1e-15);
            acc2.setZero();
        }
        if (n % 8 == 0) {
            CHECK((path.increment(2) - acc8).cwiseAbs().maxCoeff() < 1e-15);
            acc8.setZero();
            ++completed8;
        }
    }
    CHECK(completed8 == 4);
    CHECK(path.level_tau(2) == doctest::Approx(8.0 / 64));
}

TEST_CASE("materialized coupled path") {
    const auto cov = CovarianceSpec::power_law(3, 2.0);
    RngStream rng(1, 0);
    const auto levels = coupled_path(cov, 0.125, {1, 4}, 8, rng);
    REQUIRE(levels.size() == 2);
    CHECK(levels[0].size() == 8);
    CHECK(levels[1].size() == 2);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < 4; ++i) s += levels[0][static_cast<std::size_t>(i)].dW.coeffs();
    CHECK((s - levels[1][0].dW.coeffs()).norm() < 1e-15);
    CHECK(levels[1][0].tau == doctest::Approx(0.5));
}

TEST_CASE("noise intensity matches the direct sum") {
    const auto cov = CovarianceSpec::power_law(5, 2.0);
    QuadratureGrid grid(12);
    const auto w = noise_intensity(cov, grid);
    for (std::size_t j = 0; j <= 12; ++j) {
        const double x = grid.node(j);
        double ref = 0.0;
        for (int k = 1; k <= 5; ++k) {
            const double e = std::sqrt(2.0) * std::sin(k * std::numbers::pi * x);
            ref += e * e / (k * k);
        }
        CHECK(w(static_cast<Eigen::Index>(j)) == doctest::Approx(ref).epsilon(1e-13));
    }
}

TEST_CASE("Hilbert-Schmidt norm with unit g equals the trace") {
    // int e_k^2 = 1 and the trapezoid rule is exact for modes below M.
    const auto cov = CovarianceSpec::power_law(8, 2.0);
    QuadratureGrid grid(16);
    std::vector<double> u(17, 0.3);
    const double hs = hs_norm_sq_of_g(u, [](double) { return 1.0; }, cov, grid);
    CHECK(hs == doctest::Approx(trace(cov)).epsilon(1e-13));
}
