#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "lsr/config.hpp"
#include "lsr/errors.hpp"

using namespace lsr;

namespace {

RunConfig from_text(const std::string& text) {
    ConfigBuilder b;
    b.load_text(text);
    return b.build();
}

std::string error_key(const std::string& text) {
    try {
        from_text(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<none>";
}

}  // namespace

TEST_CASE("minimal configuration receives documented defaults") {
    const auto rc = from_text("gate = AND\nD = 0.02\ntau = 0.01\nA = 0\n");
    const auto& ex = rc.experiment;
    CHECK(ex.gate == Gate::And);
    CHECK(ex.params.a == 1.0);
    CHECK(ex.params.b == 2.0);
    CHECK(ex.params.x_l == -1.5);
    CHECK(ex.params.x_u == 0.5);
    CHECK(ex.sim.dt == 0.01);
    CHECK(ex.sim.segment_duration == 250.0);
    CHECK(ex.n_runs == 1000);
    const auto& noise = std::get<DichotomousSettings>(ex.noise);
    CHECK(noise.intensity == 0.02);
    CHECK(noise.tau == 0.01);
    CHECK(noise.mode == MeanMode::zero_mean);

    CHECK(rc.defaulted.count("params.a") == 1);
    CHECK(rc.defaulted.count("noise.D") == 0);
    const std::string echo = rc.echo();
    CHECK(echo.find("noise.D = 0.02\n") != std::string::npos);
    CHECK(echo.find("run.n_runs = 1000  # default\n") != std::string::npos);
}

TEST_CASE("default grids") {
    const auto rc = from_text("");
    CHECK(rc.d_grid.size() == 20);
    CHECK(rc.d_grid.front() == doctest::Approx(1e-4));
    CHECK(rc.d_grid.back() == doctest::Approx(0.2));
    CHECK(rc.tau_grid.size() == 20);
    CHECK(rc.x_l_grid.size() == 8);
    CHECK(rc.x_u_grid.size() == 8);
    CHECK(rc.x_l_grid.front() == doctest::Approx(-2.0));
    CHECK(rc.x_u_grid.back() == doctest::Approx(2.0));
    CHECK(rc.rate_inputs == std::vector<double>{-0.8, 0.0, 0.8});
    CHECK(rc.pairs.size() == 4);
}

TEST_CASE("threshold order is enforced") {
    try {
        from_text("params.x_l = 0.5\nparams.x_u = -0.5\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("x_l < x_u") != std::string::npos);
    }
}

TEST_CASE("malformed input") {
    CHECK(error_key("nosuch.key = 1\n") == "nosuch.key");
    CHECK(error_key("sim.dt = fast\n") == "sim.dt");
    CHECK(error_key("noise.A = 1\n") == "noise.A");
    CHECK(error_key("noise.kind = pink\n") == "noise.kind");
    CHECK(error_key("sim.decode = vote\n") == "sim.decode");
    CHECK(error_key("run.n_runs = 0\n") == "run.n_runs");
    CHECK(error_key("trajectory.pairs = 02\n") == "trajectory.pairs");
    CHECK_THROWS_AS(from_text("just words\n"), ConfigError);
}

TEST_CASE("comments, whitespace and aliases") {
    const auto rc = from_text("# header\n\n  noise.tau=0.001   # trailing\nD = 0.3\n");
    const auto& noise = std::get<DichotomousSettings>(rc.experiment.noise);
    CHECK(noise.tau == 0.001);
    CHECK(noise.intensity == 0.3);
}

TEST_CASE("white noise defaults to D = 0.5") {
    const auto rc = from_text("noise.kind = gwn\n");
    CHECK(std::get<WhiteNoiseSettings>(rc.experiment.noise).intensity == 0.5);
    const auto explicit_d = from_text("noise.kind = gwn\nD = 0.2\n");
    CHECK(std::get<WhiteNoiseSettings>(explicit_d.experiment.noise).intensity == 0.2);
}

TEST_CASE("files") {
    CHECK_THROWS_AS(parse_config("/nonexistent/lsr.conf"), ConfigError);

    const auto path = std::filesystem::temp_directory_path() / "lsr_test_config.conf";
    {
        std::ofstream f(path);
        f << "gate = OR\nparams.x_l = -0.5\nparams.x_u = 1.5\n";
    }
    const auto before = std::filesystem::last_write_time(path);
    const auto rc = parse_config(path);
    CHECK(rc.experiment.gate == Gate::Or);
    CHECK(rc.experiment.params.x_u == 1.5);
    CHECK(std::filesystem::last_write_time(path) == before);
    std::filesystem::remove(path);
}

TEST_CASE("later assignments win") {
    ConfigBuilder b;
    b.load_text("run.seed = 3\n");
    b.set("run.seed=9");
    CHECK(b.build().experiment.master_seed == 9);
}
