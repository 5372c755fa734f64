#include "lsr/simulate.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace lsr {

Gate parse_gate(std::string_view name) {
    std::string upper(name);
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "AND") return Gate::And;
    if (upper == "OR") return Gate::Or;
    if (upper == "NAND") return Gate::Nand;
    if (upper == "NOR") return Gate::Nor;
    throw InvalidArgument("unknown gate '" + std::string(name) + "'");
}

std::string_view to_string(Gate gate) noexcept {
    switch (gate) {
        case Gate::And: return "AND";
        case Gate::Or: return "OR";
        case Gate::Nand: return "NAND";
        case Gate::Nor: return "NOR";
    }
    return "?";
}

int expected_output(Gate gate, bool first, bool second) noexcept {
    switch (gate) {
        case Gate::And: return first && second;
        case Gate::Or: return first || second;
        case Gate::Nand: return !(first && second);
        case Gate::Nor: return !(first || second);
    }
    return 0;
}

LogicSignal encode_inputs(std::span<const InputPair> pairs, double amplitude,
                          double segment_duration) {
    if (!(amplitude > 0.0)) throw InvalidArgument("input amplitude must be positive");
    if (!(segment_duration > 0.0)) throw InvalidArgument("segment duration must be positive");
    LogicSignal signal;
    signal.amplitude = amplitude;
    signal.segment_duration = segment_duration;
    signal.pairs.assign(pairs.begin(), pairs.end());
    signal.levels.reserve(pairs.size());
    for (const auto& pair : pairs) {
        const double first = pair.first ? amplitude : -amplitude;
        const double second = pair.second ? amplitude : -amplitude;
        signal.levels.push_back(first + second);
    }
    return signal;
}

bool dt_resolves_noise(const NoiseDrive& noise, double dt) noexcept {
    if (const auto* dich = std::get_if<DichotomousDrive>(&noise))
        return dt <= 0.5 * dich->spec.tau();
    return true;
}

std::size_t steps_per_segment(double segment_duration, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (!(segment_duration > 0.0)) throw InvalidArgument("segment duration must be positive");
    const double ratio = segment_duration / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * ratio)
        throw InvalidArgument("segment duration must be a whole number of steps");
    return static_cast<std::size_t>(rounded);
}

Trajectory integrate(const PotentialParams& params, const NoiseDrive& noise,
                     const LogicSignal& signal, double dt, double x0, std::uint64_t seed) {
    validate(params);
    if (!std::isfinite(x0)) throw InvalidArgument("x0 must be finite");
    const std::size_t steps = steps_per_segment(signal.segment_duration, dt);
    const auto total = static_cast<Eigen::Index>(steps * signal.segment_count());

    Trajectory traj;
    traj.dt = dt;
    traj.x0 = x0;
    traj.seed = seed;
    traj.times.resize(total);
    traj.states.resize(total);
    traj.inputs.resize(total);
    traj.noise.resize(total);

    Rng rng(seed);
    Eigen::Index i = 0;
    detail::run_segments(params, noise, signal.levels, steps, dt, x0, rng,
                         [&](std::size_t, std::size_t, double x, double input, double q) {
                             traj.times[i] = static_cast<double>(i + 1) * dt;
                             traj.states[i] = x;
                             traj.inputs[i] = input;
                             traj.noise[i] = q;
                             ++i;
                         });
    return traj;
}

DecodeMode parse_decode_mode(std::string_view name) {
    if (name == "final" || name == "final-sample") return DecodeMode::final_sample;
    if (name == "majority") return DecodeMode::majority;
    throw InvalidArgument("unknown decode mode '" + std::string(name) + "'");
}

std::string_view to_string(DecodeMode mode) noexcept {
    return mode == DecodeMode::majority ? "majority" : "final";
}

namespace detail {

std::size_t transient_steps(std::size_t steps, double transient_fraction) {
    if (!(transient_fraction >= 0.0 && transient_fraction < 1.0))
        throw InvalidArgument("transient fraction must lie in [0, 1)");
    return static_cast<std::size_t>(std::floor(transient_fraction * static_cast<double>(steps)));
}

SegmentDecoder::SegmentDecoder(std::size_t segments, std::size_t steps, double threshold,
                               double transient_fraction, DecodeMode mode)
    : steps_(steps),
      skip_(transient_steps(steps, transient_fraction)),
      threshold_(threshold),
      mode_(mode),
      above_(segments, 0),
      last_(segments, 0.0) {
    if (mode == DecodeMode::majority && skip_ >= steps)
        throw EmptySegment("no samples remain after the transient");
}

std::vector<int> SegmentDecoder::bits() const {
    std::vector<int> out(above_.size());
    const std::size_t kept = steps_ - skip_;
    for (std::size_t s = 0; s < out.size(); ++s) {
        out[s] = mode_ == DecodeMode::majority ? (2 * above_[s] > kept ? 1 : 0)
                                               : (last_[s] > threshold_ ? 1 : 0);
    }
    return out;
}

}  // namespace detail

std::vector<int> decode_output(const Trajectory& traj, const LogicSignal& signal,
                               const WellStructure& wells, double transient_fraction,
                               DecodeMode mode) {
    const std::size_t segments = signal.segment_count();
    if (segments == 0) return {};
    const auto total = static_cast<std::size_t>(traj.states.size());
    if (total % segments != 0)
        throw InvalidArgument("trajectory length is not a whole number of segments");
    const std::size_t steps = total / segments;
    if (steps == 0 || detail::transient_steps(steps, transient_fraction) >= steps)
        throw EmptySegment("a segment holds no post-transient samples");

    detail::SegmentDecoder decoder(segments, steps, wells.x_top, transient_fraction, mode);
    for (std::size_t i = 0; i < total; ++i)
        decoder(i / steps, i % steps, traj.states[static_cast<Eigen::Index>(i)], 0.0, 0.0);
    return decoder.bits();
}

DecodedRun score_run(std::span<const int> decoded, std::span<const InputPair> pairs, Gate gate) {
    if (decoded.size() != pairs.size())
        throw InvalidArgument("decoded bits and input pairs differ in length");
    DecodedRun run;
    run.decoded.assign(decoded.begin(), decoded.end());
    run.expected.reserve(pairs.size());
    for (const auto& pair : pairs) run.expected.push_back(expected_output(gate, pair.first, pair.second));
    run.success = run.decoded == run.expected;
    return run;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t decimation) {
    if (decimation == 0) throw InvalidArgument("decimation must be at least 1");
    out << "time,x,I,Q\n";
    char line[160];
    for (Eigen::Index i = 0; i < traj.states.size(); i += static_cast<Eigen::Index>(decimation)) {
        std::snprintf(line, sizeof line, "%.10g,%.12g,%.10g,%.12g\n", traj.times[i],
                      traj.states[i], traj.inputs[i], traj.noise[i]);
        out << line;
    }
}

}  // namespace lsr
