#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "lsr/errors.hpp"
#include "lsr/simulate.hpp"

using namespace lsr;

namespace {

const PotentialParams canonical{};

Trajectory step_trajectory(std::initializer_list<double> states, double dt) {
    Trajectory t;
    t.dt = dt;
    const auto n = static_cast<Eigen::Index>(states.size());
    t.states = Eigen::Map<const Eigen::VectorXd>(states.begin(), n);
    t.times = Eigen::VectorXd::LinSpaced(n, dt, dt * n);
    t.inputs = Eigen::VectorXd::Zero(n);
    t.noise = Eigen::VectorXd::Zero(n);
    return t;
}

}  // namespace

TEST_CASE("gates and truth tables") {
    CHECK(parse_gate("AND") == Gate::And);
    CHECK(parse_gate("or") == Gate::Or);
    CHECK_THROWS_AS(parse_gate("XOR"), InvalidArgument);
    CHECK(expected_output(Gate::And, true, true) == 1);
    CHECK(expected_output(Gate::And, true, false) == 0);
    CHECK(expected_output(Gate::Or, false, true) == 1);
    CHECK(expected_output(Gate::Or, false, false) == 0);
    CHECK(expected_output(Gate::Nand, true, true) == 0);
    CHECK(expected_output(Gate::Nor, false, false) == 1);
}

TEST_CASE("input encoding") {
    const auto s = encode_inputs(all_input_pairs, 0.4, 250.0);
    REQUIRE(s.levels.size() == 4);
    CHECK(s.levels[0] == doctest::Approx(-0.8));
    CHECK(s.levels[1] == doctest::Approx(0.0));
    CHECK(s.levels[2] == doctest::Approx(0.0));
    CHECK(s.levels[3] == doctest::Approx(0.8));
    CHECK(s.duration() == doctest::Approx(1000.0));
    CHECK_THROWS_AS(encode_inputs(all_input_pairs, 0.0, 250.0), InvalidArgument);
}

TEST_CASE("segment length in steps") {
    CHECK(steps_per_segment(250.0, 0.01) == 25000);
    CHECK(steps_per_segment(1.0, 0.001) == 1000);
    CHECK_THROWS_AS(steps_per_segment(1.0, 0.3), InvalidArgument);
}

TEST_CASE("noiseless integration follows the Euler recurrence") {
    // Left piece: x_{n+1} = x_n + (-x_n - 3 + I) dt, so x_n = x* + (x0 - x*)(1 - dt)^n.
    const InputPair pair{false, false};
    const auto signal = encode_inputs(std::span(&pair, 1), 0.4, 2.0);
    const double dt = 0.01;
    const auto traj = integrate(canonical, WhiteNoiseDrive{0.0}, signal, dt, -2.0, 1);
    REQUIRE(traj.states.size() == 200);
    const double target = -3.8;
    for (Eigen::Index k = 0; k < traj.states.size(); k += 37) {
        const double exact = target + (-2.0 - target) * std::pow(1.0 - dt, double(k + 1));
        CHECK(traj.states[k] == doctest::Approx(exact).epsilon(1e-12));
        CHECK(traj.times[k] == doctest::Approx(dt * double(k + 1)));
        CHECK(traj.inputs[k] == doctest::Approx(-0.8));
    }
}

TEST_CASE("dichotomous integration") {
    const auto spec = DichotomousNoiseSpec::from_statistics(0.05, 0.01, 0.2);
    const auto signal = encode_inputs(all_input_pairs, 0.4, 5.0);
    const auto a = integrate(canonical, DichotomousDrive{spec}, signal, 0.01, -3.0, 77);
    const auto b = integrate(canonical, DichotomousDrive{spec}, signal, 0.01, -3.0, 77);
    CHECK(a.states == b.states);
    CHECK(a.noise == b.noise);
    for (Eigen::Index i = 0; i < a.noise.size(); ++i)
        CHECK((a.noise[i] == spec.delta1() || a.noise[i] == spec.delta2()));

    // The first state is one explicit step from x0 with the recorded drive.
    const double first = -3.0 + (drift(-3.0, canonical) + a.inputs[0] + a.noise[0]) * 0.01;
    CHECK(a.states[0] == doctest::Approx(first));

    const auto c = integrate(canonical, DichotomousDrive{spec}, signal, 0.01, -3.0, 78);
    CHECK(c.states != a.states);
}

TEST_CASE("blow-up is reported") {
    const auto signal = encode_inputs(all_input_pairs, 0.4, 50.0);
    CHECK_THROWS_AS(integrate(canonical, WhiteNoiseDrive{0.0}, signal, 5.0, -3.5, 1), NumericalBlowup);
}

TEST_CASE("dt resolution check") {
    const auto spec = DichotomousNoiseSpec::from_statistics(0.05, 0.01, 0.0);
    CHECK(dt_resolves_noise(DichotomousDrive{spec}, 0.005));
    CHECK_FALSE(dt_resolves_noise(DichotomousDrive{spec}, 0.01));
}

TEST_CASE("decoding") {
    const WellStructure wells{-3.0, 0.0, 1.0};
    LogicSignal signal;
    signal.pairs = {{false, false}, {true, true}};
    signal.levels = {-0.8, 0.8};
    signal.segment_duration = 0.04;
    // Segment 0 ends right of the barrier but spends most time left of it;
    // segment 1 is the reverse.
    const auto traj = step_trajectory({-3, -2, -1, 0.5, 1, 1, 0.8, -0.2}, 0.01);

    const auto final_bits = decode_output(traj, signal, wells, 0.0, DecodeMode::final_sample);
    CHECK(final_bits == std::vector<int>{1, 0});
    const auto majority = decode_output(traj, signal, wells, 0.0, DecodeMode::majority);
    CHECK(majority == std::vector<int>{0, 1});
    const auto late = decode_output(traj, signal, wells, 0.5, DecodeMode::majority);
    CHECK(late == std::vector<int>{0, 0});

    CHECK_THROWS_AS(decode_output(traj, signal, wells, 1.0, DecodeMode::majority), InvalidArgument);
    CHECK(parse_decode_mode("majority") == DecodeMode::majority);
    CHECK(parse_decode_mode("final") == DecodeMode::final_sample);
}

TEST_CASE("scoring") {
    const std::vector<InputPair> pairs(all_input_pairs.begin(), all_input_pairs.end());
    CHECK(score_run(std::vector<int>{0, 0, 0, 1}, pairs, Gate::And).success);
    CHECK_FALSE(score_run(std::vector<int>{0, 1, 0, 1}, pairs, Gate::And).success);
    CHECK(score_run(std::vector<int>{0, 1, 1, 1}, pairs, Gate::Or).success);
}

TEST_CASE("trajectory csv") {
    const auto signal = encode_inputs(all_input_pairs, 0.4, 1.0);
    const auto traj = integrate(canonical, WhiteNoiseDrive{0.1}, signal, 0.01, -3.0, 2);
    std::ostringstream out;
    write_trajectory_csv(out, traj, 10);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "time,x,I,Q");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 40);
}
