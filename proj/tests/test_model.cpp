#include "savwave/model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace savwave;

namespace {

constexpr double pi = std::numbers::pi;

/// Composite Simpson rule on [0, 1].
template <typename F>
double simpson(F&& f, int n = 20000) {
    const double h = 1.0 / n;
    double s = f(0.0) + f(1.0);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return s * h / 3.0;
}

Problem problem(std::size_t K, const char* drift, const char* diffusion, double amplitude = 1.0) {
    return Problem::standard(K, Drift::from_name(drift), Diffusion::from_name(diffusion, 1.0), 2.0, 1.0, amplitude);
}

}  // namespace

TEST_CASE("antiderivatives vanish at zero and differentiate to the drift") {
    for (const char* n : {"linear", "sine", "cubic", "zero"}) {
        const Drift f = Drift::from_name(n);
        CHECK(f.antiderivative(0.0) == 0.0);
        for (double u : {-1.3, -0.2, 0.4, 2.1}) {
            const double e = 1e-5;
            const double d = (f.antiderivative(u + e) - f.antiderivative(u - e)) / (2 * e);
            CHECK(d == doctest::Approx(f(u)).epsilon(1e-8));
        }
    }
    CHECK_THROWS_AS(Drift::from_name("quartic"), std::invalid_argument);
    CHECK_THROWS_AS(Diffusion::from_name("exp"), std::invalid_argument);
}

TEST_CASE("potential of sin(pi x) for each drift") {
    const std::size_t K = 32;
    NodalGrid grid(K);
    {
        const auto p = problem(K, "linear", "constant");
        CHECK(eval_F(p.u0, p, grid) == doctest::Approx(0.25).epsilon(1e-14));
    }
    {
        // int (1 - cos(sin(pi x))) dx = 1 - J0(1)
        const auto p = problem(K, "sine", "constant");
        CHECK(eval_F(p.u0, p, grid) == doctest::Approx(1.0 - std::cyl_bessel_j(0.0, 1.0)).epsilon(1e-13));
    }
    {
        // int sin^4/4 + sin^2/2 = 3/32 + 1/4
        const auto p = problem(K, "cubic", "constant");
        CHECK(eval_F(p.u0, p, grid) == doctest::Approx(11.0 / 32.0).epsilon(1e-14));
    }
    {
        const auto p = problem(K, "linear", "constant");
        CHECK(sav_value(p.u0, p, grid) == doctest::Approx(std::sqrt(1.25)));
    }
}

TEST_CASE("radicand floor raises a model violation") {
    CHECK_THROWS_AS(checked_sav_root(0.0, 1e-10), ModelViolation);
    CHECK_THROWS_AS(checked_sav_root(std::nan(""), 1.0), ModelViolation);
    CHECK(checked_sav_root(3.0, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("linear drift direction is u / s") {
    const std::size_t K = 16;
    const auto p = problem(K, "linear", "constant");
    NodalGrid grid(K);
    SpectralField u(K);
    u.coeffs() << 0.3, -0.1, 0.05, 0, 0, 0.02, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0.01;
    const auto d = drift_direction(u, p, grid);
    const double s = std::sqrt(0.5 * u.coeffs().squaredNorm() + 1.0);
    CHECK(d.s == doctest::Approx(s).epsilon(1e-14));
    CHECK((d.b.coeffs() - u.coeffs() / s).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("zero drift gives b = 0 and s = sqrt(delta0)") {
    const auto p = Problem::standard(8, Drift::from_name("zero"), Diffusion::from_name("constant"), 2.0, 4.0);
    SpectralDiscretization disc(p);
    const auto d = disc.drift_direction(disc.initial_displacement());
    CHECK(d.b.norm() == 0.0);
    CHECK(d.s == doctest::Approx(2.0));
    CHECK(disc.drift_vanishes());
}

TEST_CASE("sine drift direction against quadrature of the projection integral") {
    const std::size_t K = 16;
    const auto p = problem(K, "sine", "constant", 1.5);
    NodalGrid grid(K);
    const auto d = drift_direction(p.u0, p, grid);
    const double F = simpson([](double x) { return 1.0 - std::cos(1.5 * std::sin(pi * x)); });
    const double s = std::sqrt(F + 1.0);
    CHECK(d.s == doctest::Approx(s).epsilon(1e-12));
    for (std::size_t k = 1; k <= K; ++k) {
        const double ck = simpson([k](double x) {
            return std::sin(1.5 * std::sin(pi * x)) * std::sqrt(2.0) * std::sin(k * pi * x);
        }) / s;
        CHECK(std::abs(d.b.mode(k) - ck) < 1e-12);
    }
}

TEST_CASE("noise term for constant g is sigma dW") {
    auto p = Problem::standard(8, Drift::from_name("linear"), Diffusion::from_name("constant", 0.5));
    SpectralDiscretization disc(p);
    Eigen::VectorXd dW = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
    CHECK((disc.noise_term(disc.initial_displacement(), dW) - 0.5 * dW).norm() == 0.0);
    CHECK(disc.noise_trace(disc.initial_displacement()) == doctest::Approx(0.25 * trace(p.noise)));
}

TEST_CASE("custom constant g through the nodal route equals the shortcut") {
    auto p = problem(12, "linear", "constant");
    p.diffusion.kind = DiffusionKind::custom;
    p.diffusion.custom = [](double, double) { return 1.0; };
    SpectralDiscretization disc(p);
    Eigen::VectorXd dW = Eigen::VectorXd::LinSpaced(12, 0.3, -0.7);
    CHECK((disc.noise_term(disc.initial_displacement(), dW) - dW).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(disc.noise_trace(disc.initial_displacement()) == doctest::Approx(trace(p.noise)).epsilon(1e-13));
}

TEST_CASE("multiplicative noise term is the grid projection of the product") {
    const std::size_t K = 16, M = 32;
    const auto p = problem(K, "linear", "sine", 1.2);
    NodalGrid grid(K, M);
    NoiseIncrement inc{SpectralField::eigenmode(K, 1), 0.1};
    const auto G = apply_g(p.u0, inc, p, grid);
    for (std::size_t k = 1; k <= K; ++k) {
        double ref = 0.0;
        for (std::size_t j = 1; j < M; ++j) {
            const double x = double(j) / M;
            ref += std::sin(1.2 * std::sin(pi * x)) * 2.0 * std::sin(pi * x) * std::sin(k * pi * x);
        }
        CHECK(std::abs(G.mode(k) - ref / M) < 1e-14);
    }
}

TEST_CASE("multiplicative noise term approaches the exact projection at fourth order") {
    // g odd in u makes the integrand odd-periodic, so the trapezoid defect is O(M^-4).
    const std::size_t K = 8;
    const auto p = problem(K, "linear", "sine", 1.2);
    NoiseIncrement inc{SpectralField::eigenmode(K, 1), 0.1};
    auto defect = [&](std::size_t M) {
        const auto G = apply_g(p.u0, inc, p, NodalGrid(K, M));
        double worst = 0.0;
        for (std::size_t k = 1; k <= K; ++k) {
            const double exact = simpson([k](double x) {
                return std::sin(1.2 * std::sin(pi * x)) * 2.0 * std::sin(pi * x) * std::sin(k * pi * x);
            });
            worst = std::max(worst, std::abs(G.mode(k) - exact));
        }
        return worst;
    };
    const double d32 = defect(32), d64 = defect(64);
    CHECK(d32 < 1e-5);
    CHECK(d32 / d64 == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("multiplicative noise trace against quadrature") {
    const std::size_t K = 16;
    const auto p = problem(K, "linear", "sine", 0.8);
    SpectralDiscretization disc(p);
    double ref = 0.0;
    for (std::size_t k = 1; k <= K; ++k) {
        ref += simpson([k](double x) {
                   const double g = std::sin(0.8 * std::sin(pi * x));
                   const double e = std::sqrt(2.0) * std::sin(k * pi * x);
                   return g * g * e * e;
               }) / double(k * k);
    }
    CHECK(disc.noise_trace(disc.initial_displacement()) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("gradient-dependent g reads u_x") {
    auto p = problem(8, "linear", "constant");
    p.diffusion.kind = DiffusionKind::custom;
    p.diffusion.custom_uses_gradient = true;
    p.diffusion.custom = [](double, double ux) { return ux; };
    SpectralDiscretization disc(p);
    // u = sin(pi x), so g = u_x = pi cos(pi x)
    double ref = 0.0;
    for (std::size_t k = 1; k <= 8; ++k) {
        ref += simpson([k](double x) {
                   const double ux = pi * std::cos(pi * x);
                   const double e = std::sqrt(2.0) * std::sin(k * pi * x);
                   return ux * ux * e * e;
               }) / double(k * k);
    }
    CHECK(disc.noise_trace(disc.initial_displacement()) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("sampling matrix evaluates the series") {
    const auto p = problem(6, "linear", "sine", 2.0);
    SpectralDiscretization disc(p);
    const auto S = disc.sampling_matrix(10);
    const Eigen::VectorXd vals = S * disc.initial_displacement();
    for (int j = 0; j <= 10; ++j) {
        CHECK(std::abs(vals(j) - 2.0 * std::sin(pi * j / 10.0)) < 1e-14);
    }
}

TEST_CASE("mode mismatch between field and grid") {
    const auto p = problem(8, "linear", "sine");
    NodalGrid grid(4);
    CHECK_THROWS_AS(eval_F(p.u0, p, grid), ModeMismatch);
}
