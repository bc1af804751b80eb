#include "savwave/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace savwave;

namespace {

constexpr double pi = std::numbers::pi;

/// sqrt(2) sum_k c_k sin(k pi x), evaluated term by term.
double naive_series(const Eigen::VectorXd& c, double x) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        s += c(k) * std::sqrt(2.0) * std::sin(static_cast<double>(k + 1) * pi * x);
    }
    return s;
}

Eigen::VectorXd random_coeffs(std::size_t n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::VectorXd c(static_cast<Eigen::Index>(n));
    for (auto& x : c) x = d(gen);
    return c;
}

}  // namespace

TEST_CASE("eigenvalues are (k pi)^2") {
    CHECK(eigenvalue(1) == doctest::Approx(pi * pi).epsilon(1e-15));
    CHECK(eigenvalue(7) == doctest::Approx(49.0 * pi * pi).epsilon(1e-15));
    const auto lam = eigenvalues(5);
    REQUIRE(lam.size() == 5);
    CHECK(lam(4) == doctest::Approx(25.0 * pi * pi));
}

TEST_CASE("synthesis matches term-by-term evaluation") {
    const std::size_t K = 16, M = 40;
    const auto c = random_coeffs(K, 3);
    SineTransform t(K, M);
    const auto nodal = t.to_nodal(c);
    REQUIRE(nodal.size() == static_cast<Eigen::Index>(M + 1));
    CHECK(nodal(0) == 0.0);
    CHECK(nodal(static_cast<Eigen::Index>(M)) == 0.0);
    for (std::size_t j = 0; j <= M; ++j) {
        CHECK(std::abs(nodal(static_cast<Eigen::Index>(j)) - naive_series(c, double(j) / M)) < 1e-13);
    }
}

TEST_CASE("derivative synthesis matches the differentiated series") {
    const std::size_t K = 8, M = 16;
    const auto c = random_coeffs(K, 5);
    SineTransform t(K, M);
    const auto d = t.derivative_to_nodal(c);
    for (std::size_t j = 0; j <= M; ++j) {
        const double x = double(j) / M;
        double ref = 0.0;
        for (std::size_t k = 1; k <= K; ++k) {
            ref += c(static_cast<Eigen::Index>(k - 1)) * std::sqrt(2.0) * k * pi * std::cos(k * pi * x);
        }
        CHECK(std::abs(d(static_cast<Eigen::Index>(j)) - ref) < 1e-11);
    }
}

TEST_CASE("round trip through the grid with M = 2K") {
    const std::size_t K = 32;
    const auto c = random_coeffs(K, 11);
    SineTransform t(K, 2 * K);
    const auto back = t.to_spectral(t.to_nodal(c));
    CHECK((back - c).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("sin(pi x) has coefficient 1/sqrt(2) on mode 1 only") {
    const std::size_t K = 8, M = 16;
    std::vector<double> values(M + 1);
    for (std::size_t j = 0; j <= M; ++j) values[j] = std::sin(pi * double(j) / M);
    values[M] = 0.0;
    const auto f = to_spectral(values, K);
    CHECK(f.mode(1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    for (std::size_t k = 2; k <= K; ++k) CHECK(std::abs(f.mode(k)) < 1e-14);
}

TEST_CASE("analysis rejects nonzero endpoint values") {
    SineTransform t(4, 8);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(9);
    v(0) = 1.0;
    CHECK_THROWS_AS(t.to_spectral(v), std::invalid_argument);
    CHECK_NOTHROW(t.project_interior(v));
}

TEST_CASE("projection of a higher sine polynomial keeps the low modes exactly") {
    // Discrete orthogonality: modes below M do not alias onto each other.
    const std::size_t K = 8, M = 16;
    const auto c = random_coeffs(M - 1, 17);
    SineTransform wide(M - 1, M), narrow(K, M);
    const auto nodal = wide.to_nodal(c);
    const auto low = narrow.to_spectral(nodal);
    CHECK((low - c.head(static_cast<Eigen::Index>(K))).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("field arithmetic and mode mismatch") {
    SpectralField a = SpectralField::eigenmode(4, 2, 3.0);
    SpectralField b = SpectralField::eigenmode(4, 2, 1.0);
    CHECK(inner(a, b) == doctest::Approx(3.0));
    CHECK((a - b).mode(2) == doctest::Approx(2.0));
    CHECK((2.0 * b).mode(2) == doctest::Approx(2.0));
    SpectralField c(5);
    CHECK_THROWS_AS(inner(a, c), ModeMismatch);
    CHECK_THROWS_AS(a += c, ModeMismatch);
}

TEST_CASE("fractional powers act diagonally") {
    const auto e3 = SpectralField::eigenmode(6, 3);
    CHECK(sobolev_norm_sq(e3, 1.0) == doctest::Approx(9.0 * pi * pi));
    CHECK(sobolev_norm_sq(e3, 0.0) == doctest::Approx(1.0));
    const auto g = fractional_laplacian(e3, 0.5);
    CHECK(g.mode(3) == doctest::Approx(3.0 * pi));
}

TEST_CASE("wave group table entries") {
    const double tau = 0.01;
    const auto table = WaveGroupTable::spectral(20, tau);
    for (std::size_t k = 1; k <= 20; ++k) {
        const auto i = static_cast<Eigen::Index>(k - 1);
        const double w = k * pi;
        CHECK(table.cos()(i) == doctest::Approx(std::cos(w * tau)).epsilon(1e-14));
        CHECK(table.sin()(i) == doctest::Approx(std::sin(w * tau)).epsilon(1e-14));
        CHECK(table.cos()(i) * table.cos()(i) + table.sin()(i) * table.sin()(i) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(table.a1()(i) == doctest::Approx((1.0 - std::cos(w * tau)) / (w * w)).epsilon(1e-9));
    }
}

TEST_CASE("a1 stays accurate where 1 - cos cancels") {
    const double tau = 1e-7;
    const auto table = WaveGroupTable::spectral(1, tau);
    // (1 - cos(x)) / x^2 * tau^2 with x = pi tau: series 1/2 - x^2/24
    const double x = pi * tau;
    CHECK(table.a1()(0) == doctest::Approx(tau * tau * (0.5 - x * x / 24.0)).epsilon(1e-12));
}

TEST_CASE("zero step is the identity") {
    const auto table = WaveGroupTable::spectral(10, 0.0);
    PairState x{SpectralField(random_coeffs(10, 1)), SpectralField(random_coeffs(10, 2))};
    const auto y = group_step(x, table);
    CHECK((y.u.coeffs() - x.u.coeffs()).norm() < 1e-15);
    CHECK((y.v.coeffs() - x.v.coeffs()).norm() < 1e-15);
}

TEST_CASE("group step conserves the quadratic energy") {
    const auto table = WaveGroupTable::spectral(32, 1.0 / 64);
    PairState x{SpectralField(random_coeffs(32, 8)), SpectralField(random_coeffs(32, 9))};
    const double e0 = 0.5 * sobolev_norm_sq(x.u, 1.0) + 0.5 * inner(x.v, x.v);
    for (int n = 0; n < 1000; ++n) x = group_step(x, table);
    const double e1 = 0.5 * sobolev_norm_sq(x.u, 1.0) + 0.5 * inner(x.v, x.v);
    CHECK(std::abs(e1 - e0) / e0 < 1e-12);
}

TEST_CASE("half period flips a single mode") {
    // tau sqrt(lambda_1) = pi gives C = -1, S = 0.
    const auto table = WaveGroupTable::spectral(1, 1.0);
    PairState x{SpectralField::eigenmode(1, 1, 0.7), SpectralField::eigenmode(1, 1, -0.2)};
    const auto y = group_step(x, table);
    CHECK(y.u.mode(1) == doctest::Approx(-0.7).epsilon(1e-14));
    CHECK(y.v.mode(1) == doctest::Approx(0.2).epsilon(1e-14));
}
