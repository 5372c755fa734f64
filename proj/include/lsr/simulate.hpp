#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "lsr/errors.hpp"
#include "lsr/model.hpp"
#include "lsr/noise.hpp"
#include "lsr/random.hpp"

namespace lsr {

enum class Gate { And, Or, Nand, Nor };

Gate parse_gate(std::string_view name);
std::string_view to_string(Gate gate) noexcept;

/// Truth table lookup: (0,0), (0,1)/(1,0), (1,1).
int expected_output(Gate gate, bool first, bool second) noexcept;

struct InputPair {
    bool first;
    bool second;

    friend bool operator==(const InputPair&, const InputPair&) = default;
};

inline constexpr std::array<InputPair, 4> all_input_pairs{
    {{false, false}, {false, true}, {true, false}, {true, true}}};

/// Piecewise-constant drive I(t): one segment per input pair.
struct LogicSignal {
    std::vector<InputPair> pairs;
    std::vector<double> levels;
    double amplitude = 0.4;
    double segment_duration = 250.0;

    std::size_t segment_count() const noexcept { return pairs.size(); }
    double duration() const noexcept {
        return segment_duration * static_cast<double>(pairs.size());
    }
};

/// Bit 1 maps to +amplitude and bit 0 to -amplitude; the two inputs are summed.
LogicSignal encode_inputs(std::span<const InputPair> pairs, double amplitude,
                          double segment_duration);

/// Dichotomous drive; the process adds prefactor * Q(t).
struct DichotomousDrive {
    DichotomousNoiseSpec spec;
    double prefactor = 1.0;
};

/// Gaussian white noise with <xi(t) xi(s)> = 2 D delta(t - s).
struct WhiteNoiseDrive {
    double intensity = 0.0;
};

using NoiseDrive = std::variant<DichotomousDrive, WhiteNoiseDrive>;

/// True when dt resolves the noise correlation time (dt <= tau / 2).
bool dt_resolves_noise(const NoiseDrive& noise, double dt) noexcept;

/// Samples are the states after each Euler step: times[k] = (k + 1) dt.
/// inputs[k] and noise[k] are the drive values used by that step; for white
/// noise, noise[k] is increment / dt.
struct Trajectory {
    Eigen::VectorXd times;
    Eigen::VectorXd states;
    Eigen::VectorXd inputs;
    Eigen::VectorXd noise;
    double dt = 0.0;
    double x0 = 0.0;
    std::uint64_t seed = 0;
};

inline constexpr double blowup_limit = 1e3;

/// Number of Euler steps per segment; throws if segment_duration / dt is not
/// (close to) a whole number.
std::size_t steps_per_segment(double segment_duration, double dt);

Trajectory integrate(const PotentialParams& params, const NoiseDrive& noise,
                     const LogicSignal& signal, double dt, double x0, std::uint64_t seed);

enum class DecodeMode {
    final_sample,  ///< well occupied at the end of the segment
    majority,      ///< well occupied by most post-transient samples
};

DecodeMode parse_decode_mode(std::string_view name);
std::string_view to_string(DecodeMode mode) noexcept;

/// One bit per segment: 1 when x sits right of wells.x_top.
std::vector<int> decode_output(const Trajectory& traj, const LogicSignal& signal,
                               const WellStructure& wells, double transient_fraction,
                               DecodeMode mode = DecodeMode::final_sample);

struct DecodedRun {
    std::vector<int> decoded;
    std::vector<int> expected;
    bool success = false;
};

DecodedRun score_run(std::span<const int> decoded, std::span<const InputPair> pairs, Gate gate);

/// CSV with header time,x,I,Q; keeps every `decimation`-th sample.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t decimation = 1);

namespace detail {

/// Explicit Euler over consecutive constant-input segments. The observer is
/// called after every step as obs(segment, step, x, input, noise_value).
/// Noise state is carried across segments; the first draw from `rng` selects
/// the initial dichotomous level.
template <class Observer>
double run_segments(const PotentialParams& params, const NoiseDrive& noise,
                    std::span<const double> levels, std::size_t steps, double dt, double x0,
                    Rng& rng, Observer&& observe) {
    double x = x0;
    auto check = [](double value) {
        if (!(std::abs(value) <= blowup_limit))
            throw NumericalBlowup("|x| exceeded 1e3; reduce dt");
    };

    if (const auto* dich = std::get_if<DichotomousDrive>(&noise)) {
        const NoiseStepper stepper(dich->spec, dt);
        const double scaled_lower = dich->prefactor * stepper.level(false);
        const double scaled_upper = dich->prefactor * stepper.level(true);
        bool upper = stepper.initial_upper(rng);
        for (std::size_t s = 0; s < levels.size(); ++s) {
            const double input = levels[s];
            for (std::size_t k = 0; k < steps; ++k) {
                const double q = upper ? scaled_upper : scaled_lower;
                x += (drift(x, params) + input + q) * dt;
                check(x);
                observe(s, k, x, input, q);
                upper = stepper.next_upper(upper, rng);
            }
        }
    } else {
        const double intensity = std::get<WhiteNoiseDrive>(noise).intensity;
        const double scale = std::sqrt(2.0 * intensity * dt);
        for (std::size_t s = 0; s < levels.size(); ++s) {
            const double input = levels[s];
            for (std::size_t k = 0; k < steps; ++k) {
                const double kick = intensity > 0.0 ? scale * rng.normal() : 0.0;
                x += (drift(x, params) + input) * dt + kick;
                check(x);
                observe(s, k, x, input, kick / dt);
            }
        }
    }
    return x;
}

/// Per-segment bit extraction without storing the trajectory.
class SegmentDecoder {
public:
    SegmentDecoder(std::size_t segments, std::size_t steps, double threshold,
                   double transient_fraction, DecodeMode mode);

    void operator()(std::size_t segment, std::size_t step, double x, double, double) {
        if (step >= skip_ && x > threshold_) ++above_[segment];
        if (step + 1 == steps_) last_[segment] = x;
    }

    std::vector<int> bits() const;

private:
    std::size_t steps_;
    std::size_t skip_;
    double threshold_;
    DecodeMode mode_;
    std::vector<std::size_t> above_;
    std::vector<double> last_;
};

std::size_t transient_steps(std::size_t steps, double transient_fraction);

}  // namespace detail

}  // namespace lsr
