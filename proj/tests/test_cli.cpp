#include "savwave/cli.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace savwave;
using namespace savwave::cli;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("savwave_unit_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(SAVWAVE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("real number syntax") {
    CHECK(parse_real("2^-8") == 1.0 / 256);
    CHECK(parse_real("1/256") == 1.0 / 256);
    CHECK(parse_real(" 1e-3 ") == 1e-3);
    CHECK(parse_real("0.25") == 0.25);
    try {
        parse_real("abc", "time.tau");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "time.tau");
    }
    CHECK_THROWS_AS(parse_real("1/0", "k"), ConfigError);
}

TEST_CASE("configuration text, overrides and key errors") {
    RunConfig c;
    apply_config_text(c, "# comment\nproblem.drift = cubic\n\ntime.tau = 2^-6  # trailing\nconverge.taus = 2^-4, 2^-5\n");
    CHECK(c.drift == "cubic");
    CHECK(c.tau == 1.0 / 64);
    REQUIRE(c.taus.size() == 2);
    CHECK(c.taus[1] == 1.0 / 32);
    apply_override(c, "space.modes=16");
    CHECK(c.modes == 16);
    try {
        set_value(c, "problem.drfit", "linear");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "problem.drfit");
    }
    try {
        set_value(c, "problem.drift", "quintic");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "problem.drift");
        CHECK(std::string(e.what()).find("quintic") != std::string::npos);
    }
    CHECK_THROWS_AS(apply_config_text(c, "no equals sign\n"), ConfigError);
    CHECK(config_keys().size() == 23);
}

TEST_CASE("cross-field validation names the key") {
    RunConfig c;
    c.T = 1.0;
    c.tau = 0.3;
    try {
        validate(c);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "time.tau");
    }
    c.tau = 0.25;
    c.steps = 3;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c.steps = 4;
    CHECK_NOTHROW(validate(c));
    c.decay = 1.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("numbers print with enough digits to round-trip") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23}) {
        CHECK(std::stod(format_number(x)) == x);
    }
}

TEST_CASE("CSV parsing") {
    const auto t = parse_csv("a,b\n1,2\n# note\n3,4\n");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.comments.size() == 1);
    CHECK(t.number(1, "b") == 4.0);
    CHECK_THROWS(t.column("c"));
}

TEST_CASE("simulate writes N+1 rows and replays byte for byte") {
    const auto dir = scratch_dir("simulate");
    RunConfig c;
    c.modes = 16;
    c.tau = 1.0 / 8;
    c.T = 0.25;
    CommandOptions o;
    o.out_dir = dir;
    std::ostringstream log;
    REQUIRE(cmd_simulate(c, o, log) == ExitCode::ok);
    const std::string first = slurp(dir / "simulate.csv");
    const auto t = parse_csv(first);
    CHECK(t.rows.size() == 3);
    CHECK(t.header.front() == "step");
    REQUIRE(cmd_simulate(c, o, log) == ExitCode::ok);
    CHECK(slurp(dir / "simulate.csv") == first);
}

TEST_CASE("noise-free simulation keeps V constant") {
    const auto dir = scratch_dir("flat");
    RunConfig c;
    c.modes = 16;
    c.diffusion = "zero";
    c.drift = "sine";
    c.tau = 1.0 / 64;
    CommandOptions o;
    o.out_dir = dir;
    std::ostringstream log;
    REQUIRE(cmd_simulate(c, o, log) == ExitCode::ok);
    const auto t = parse_csv(slurp(dir / "simulate.csv"));
    const double V0 = t.number(0, "V");
    for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(std::abs(t.number(i, "V") - V0) < 1e-10 * V0);
}

TEST_CASE("converge output carries fitted slopes and seed") {
    const auto dir = scratch_dir("converge");
    RunConfig c;
    c.modes = 8;
    c.variant = "both";
    c.T = 0.25;
    c.taus = {1.0 / 16, 1.0 / 32};
    c.tau_ref = 1.0 / 128;
    c.realizations = 6;
    c.seed = 77;
    CommandOptions o;
    o.out_dir = dir;
    o.svg = true;
    std::ostringstream log;
    REQUIRE(cmd_converge(c, o, log) == ExitCode::ok);
    const std::string csv = slurp(dir / "converge.csv");
    const auto t = parse_csv(csv);
    CHECK(t.rows.size() == 4);
    REQUIRE(t.comments.size() == 2);
    CHECK(t.comments[0].find("scheme=exponential slope=") != std::string::npos);
    CHECK(t.comments[1].find("seed=77") != std::string::npos);
    const std::string svg = slurp(dir / "converge.svg");
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    // The plot is a pure function of the table.
    CHECK(converge_svg(parse_csv(csv)) == svg);
}

TEST_CASE("energy command with zero noise gives mean equal to prediction") {
    const auto dir = scratch_dir("energy");
    RunConfig c;
    c.modes = 8;
    c.diffusion = "zero";
    c.tau = 1.0 / 16;
    c.T = 0.5;
    c.realizations = 3;
    CommandOptions o;
    o.out_dir = dir;
    std::ostringstream log;
    REQUIRE(cmd_energy(c, o, log) == ExitCode::ok);
    const auto t = parse_csv(slurp(dir / "energy.csv"));
    CHECK(t.rows.size() == 9);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(std::abs(t.number(i, "mean_V") - t.number(i, "predicted_V")) < 1e-12);
        CHECK(t.number(i, "stderr_V") == 0.0);
    }
    c.variant = "both";
    CHECK_THROWS_AS(cmd_energy(c, o, log), ConfigError);
}

TEST_CASE("check command filters by module") {
    const auto dir = scratch_dir("check");
    CommandOptions o;
    o.out_dir = dir;
    o.filter = "spectral";
    std::ostringstream log;
    CHECK(cmd_check(o, 1, log) == ExitCode::ok);
    std::istringstream lines(log.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("PASS", 0) == 0 || line.rfind("FAIL", 0) == 0) {
            CHECK(line.find(" spectral.") != std::string::npos);
            ++count;
        }
    }
    CHECK(count >= 3);
    o.filter = "nonsense";
    CHECK_THROWS_AS(cmd_check(o, 1, log), ConfigError);
}

TEST_CASE("executable exit codes") {
    const auto dir = scratch_dir("exit");
    const auto log = dir / "log.txt";
    CHECK(run_cli("simulate --out " + dir.string() + " --set space.modes=8 --set time.steps=2 --set time.T=2^-7", log) == 0);
    CHECK(run_cli("simulate --out " + dir.string() + " --set problem.drift=quartic", log) == 2);
    CHECK(slurp(log).find("problem.drift") != std::string::npos);
    CHECK(run_cli("check --filter fem --out " + dir.string(), log) == 0);
    CHECK(run_cli("check --filter schemes --mutation drop-balancing-term --out " + dir.string(), log) == 1);
    CHECK(slurp(log).find("FAIL schemes.energy_identity_midpoint") != std::string::npos);
    CHECK(run_cli("simulate --out " + dir.string() +
                      " --set problem.drift=cubic --set problem.amplitude=1e7 --set space.modes=16",
                  log) == 3);
}
