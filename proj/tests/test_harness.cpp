#include "savwave/fem.hpp"
#include "savwave/harness.hpp"
#include "savwave/model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace savwave;

namespace {

SpectralDiscretization make(std::size_t K, const char* drift, const char* diffusion) {
    return SpectralDiscretization(Problem::standard(K, Drift::from_name(drift), Diffusion::from_name(diffusion)));
}

}  // namespace

TEST_CASE("summary statistics") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const auto s = summarize(x);
    CHECK(s.mean == doctest::Approx(2.5));
    // sample variance 5/3, stderr sqrt(5/3 / 4)
    CHECK(s.stderr_mean == doctest::Approx(std::sqrt(5.0 / 12.0)));
    CHECK(s.count == 4);
    const std::vector<double> c(7, 0.1 + 0.2);
    CHECK(summarize(c).stderr_mean == 0.0);
    CHECK(summarize(c).mean == 0.1 + 0.2);
    CHECK(summarize(std::vector<double>{}).count == 0);
}

TEST_CASE("line fits") {
    const std::vector<double> x{1.0, 2.0, 3.0};
    const std::vector<double> y{1.0, 3.0, 5.0};
    const auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(-1.0));
    const std::vector<double> t{0.25, 0.5, 1.0};
    const std::vector<double> e{0.0625, 0.25, 1.0};
    CHECK(fit_loglog(t, e).slope == doctest::Approx(2.0));
    CHECK_THROWS_AS(fit_line(std::vector<double>{1.0}, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("parallel map keeps index order and reports the first failure") {
    const auto out = parallel_map(50, 4, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < 50; ++i) CHECK(out[i] == i * i);
    try {
        parallel_map(20, 3, [](std::size_t i) -> int {
            if (i == 7 || i == 13) throw std::runtime_error(std::to_string(i));
            return 0;
        });
        FAIL("expected a rethrow");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "7");
    }
}

TEST_CASE("state distance norms") {
    Eigen::VectorXd lam(2);
    lam << 1.0, 4.0;
    SavState a{Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(0.0, 0.0), {}, 1.0, 0};
    SavState b{Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(0.0, 2.0), {}, 1.0, 0};
    CHECK(state_distance(a, b, lam, ErrorNorm::l2) == doctest::Approx(1.0));
    CHECK(state_distance(a, b, lam, ErrorNorm::energy) == doctest::Approx(std::sqrt(1.0 + 4.0)));
}

TEST_CASE("strong error vanishes when the ladder equals the reference step") {
    const auto disc = make(8, "sine", "sine");
    ConvergenceConfig cc;
    cc.taus = {1.0 / 32};
    cc.tau_ref = 1.0 / 32;
    cc.T = 0.25;
    cc.realizations = 5;
    cc.seed = 3;
    const auto res = strong_convergence(disc, cc);
    REQUIRE(res.rows.size() == 2);
    for (const auto& row : res.rows) CHECK(row.rms_error == 0.0);
}

TEST_CASE("strong convergence is deterministic across worker counts") {
    const auto disc = make(8, "linear", "sine");
    ConvergenceConfig cc;
    cc.taus = {1.0 / 16, 1.0 / 32};
    cc.tau_ref = 1.0 / 128;
    cc.T = 0.5;
    cc.realizations = 12;
    cc.seed = 99;
    cc.workers = 1;
    const auto a = strong_convergence(disc, cc);
    cc.workers = 3;
    const auto b = strong_convergence(disc, cc);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].rms_error == b.rows[i].rms_error);
        CHECK(a.rows[i].stderr_rms == b.rows[i].stderr_rms);
        CHECK(a.rows[i].rms_error > 0.0);
    }
    CHECK(a.fits[0].slope == b.fits[0].slope);
}

TEST_CASE("ladder validation") {
    const auto disc = make(4, "linear", "sine");
    ConvergenceConfig cc;
    cc.taus = {3.0 / 64};
    cc.tau_ref = 1.0 / 64;
    cc.T = 3.0 / 64;
    cc.realizations = 1;
    CHECK_THROWS_AS(strong_convergence(disc, cc), std::invalid_argument);
    cc.taus = {1.0 / 32};
    cc.T = 0.3;
    CHECK_THROWS_AS(strong_convergence(disc, cc), std::invalid_argument);
}

TEST_CASE("noise-free energy curve is flat with zero band") {
    const auto disc = make(16, "sine", "zero");
    EnergyConfig ec;
    ec.tau = 1.0 / 64;
    ec.steps = 64;
    ec.realizations = 8;
    const auto rows = energy_evolution(disc, ec);
    REQUIRE(rows.size() == 65);
    const double V0 = rows[0].mean_V;
    for (const auto& r : rows) {
        CHECK(r.stderr_V == 0.0);
        CHECK(r.predicted_V == V0);
        CHECK(std::abs(r.mean_V - V0) < 1e-12);
        CHECK(r.max_denominator_violation == 0.0);
    }
}

TEST_CASE("energy rows track the predicted law with additive noise") {
    const auto disc = make(16, "linear", "constant");
    EnergyConfig ec;
    ec.tau = 1.0 / 32;
    ec.steps = 32;
    ec.realizations = 400;
    ec.seed = 5;
    const auto rows = energy_evolution(disc, ec);
    // Constant g: the trace term is sum q_k exactly, so the prediction is linear in time.
    const double slope = 0.5 * trace(disc.covariance());
    for (const auto& r : rows) {
        CHECK(r.predicted_V == doctest::Approx(rows[0].mean_V + slope * r.time).epsilon(1e-12));
    }
    CHECK(rows.back().mean_V > rows.front().mean_V);
}

TEST_CASE("auxiliary gap is zero without drift and shrinks with tau otherwise") {
    {
        const auto disc = make(8, "zero", "sine");
        AuxGapConfig ac;
        ac.taus = {1.0 / 16, 1.0 / 32};
        ac.T = 0.5;
        ac.realizations = 4;
        for (const auto& row : aux_gap_scaling(disc, ac)) CHECK(row.max_gap.mean == 0.0);
    }
    {
        const auto disc = make(16, "sine", "zero");
        AuxGapConfig ac;
        ac.taus = {1.0 / 64, 1.0 / 128, 1.0 / 256};
        ac.T = 1.0;
        ac.realizations = 1;
        const auto rows = aux_gap_scaling(disc, ac);
        CHECK(rows[0].ratio == 0.0);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].ratio > 1.5);
            CHECK(rows[i].ratio < 2.7);
        }
    }
}

TEST_CASE("one-step increments scale like tau without noise") {
    const auto disc = make(16, "linear", "zero");
    AuxGapConfig ac;
    ac.taus = {1.0 / 32, 1.0 / 64, 1.0 / 128};
    ac.T = 0.5;
    ac.realizations = 1;
    const auto res = increment_scaling(disc, ac);
    CHECK(res.fit.slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("FEM spatial error decreases under refinement") {
    const auto p = Problem::standard(64, Drift::from_name("sine"), Diffusion::from_name("sine"));
    SpectralDiscretization ref(p);
    FemDiscretization m8(p, 8), m16(p, 16), m32(p, 32);
    SpatialConfig sc;
    sc.elements = {8, 16, 32};
    sc.tau = 1.0 / 64;
    sc.T = 0.25;
    sc.realizations = 4;
    sc.sample_intervals = 1024;
    const auto res = fem_spatial_convergence(ref, {&m8, &m16, &m32}, sc);
    REQUIRE(res.rows.size() == 3);
    CHECK(res.rows[0].rms_error > res.rows[1].rms_error);
    CHECK(res.rows[1].rms_error > res.rows[2].rms_error);
    CHECK(res.fit.slope > 0.6);
}

TEST_CASE("weak energy error starts at zero for identical backends") {
    const auto disc = make(16, "sine", "sine");
    EnergyConfig ec;
    ec.tau = 1.0 / 32;
    ec.steps = 16;
    ec.realizations = 10;
    const auto rows = weak_energy_error(disc, disc, ec);
    REQUIRE(rows.size() == 17);
    CHECK(rows[0].error < 1e-14);
    // Afterwards only the auxiliary-variable defect remains, which is O(tau).
    for (const auto& r : rows) CHECK(r.error < 0.05);
}

TEST_CASE("structure checks on the spectral backend") {
    const auto disc = make(16, "cubic", "sine");
    for (Scheme s : {Scheme::exponential, Scheme::midpoint}) {
        const auto e = energy_identity_check(disc, s, Predictor::identity, 1.0 / 128, 100, 1);
        CHECK(e.samples == 100);
        CHECK(e.max_scaled_residual < 1e-10);
        CHECK(e.min_denominator >= 1.0);
        const auto c = conservation_check(make(16, "sine", "zero"), s, Predictor::identity, 1.0 / 128, 500);
        CHECK(c.max_scaled_residual < 1e-12);
        const auto sub = substitution_check(disc, s, 1.0 / 64, 100, 2);
        CHECK(sub.max_scaled_residual < 1e-10);
        CHECK(sub.min_denominator >= 1.0);
    }
}

TEST_CASE("invariant suite passes and detects the dropped balancing term") {
    SuiteOptions so;
    so.filter = "schemes";
    const auto ok = invariant_suite(so);
    REQUIRE(!ok.empty());
    for (const auto& c : ok) {
        CHECK_MESSAGE(c.passed, (c.module + "." + c.name));
        CHECK(c.module == "schemes");
    }
    so.scheme_options.balancing_term = false;
    const auto bad = invariant_suite(so);
    bool caught = false;
    for (const auto& c : bad) {
        if (!c.passed && c.name.find("energy_identity_midpoint") != std::string::npos) caught = true;
    }
    CHECK(caught);
}
