#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "lsr/model.hpp"
#include "lsr/noise.hpp"
#include "lsr/simulate.hpp"
#include "lsr/theory.hpp"

namespace lsr {

/// Dichotomous noise given by its statistics; levels and rates are derived per use.
struct DichotomousSettings {
    double intensity = 0.02;
    double tau = 0.01;
    double asymmetry = 0.0;
    MeanMode mode = MeanMode::zero_mean;
    /// Multiply Q(t) by D in the equation of motion as well.
    bool literal_prefactor = false;
};

struct WhiteNoiseSettings {
    double intensity = 0.5;
};

using NoiseSettings = std::variant<DichotomousSettings, WhiteNoiseSettings>;

NoiseDrive make_drive(const NoiseSettings& noise);
double intensity_of(const NoiseSettings& noise) noexcept;
NoiseSettings with_intensity(NoiseSettings noise, double intensity) noexcept;

struct SimulationSettings {
    double dt = 0.01;
    double segment_duration = 250.0;
    double transient_fraction = 0.25;
    double amplitude = 0.4;
    DecodeMode decode = DecodeMode::final_sample;
};

struct ExperimentConfig {
    Gate gate = Gate::And;
    PotentialParams params;
    NoiseSettings noise = DichotomousSettings{};
    SimulationSettings sim;
    std::size_t n_runs = 1000;
    std::uint64_t master_seed = 1;
};

/// Throws InvalidArgument (or a more specific error) on any violated invariant.
void validate(const ExperimentConfig& cfg);

/// Worker count (0: LSR_THREADS or hardware) and an optional progress sink.
struct Execution {
    unsigned threads = 0;
    std::function<void(const std::string&)> progress;
};

struct Estimate {
    double p = 0.0;
    double stderr_ = 0.0;  ///< sqrt(p (1 - p) / runs)
    std::size_t successes = 0;
    std::size_t runs = 0;
};

/// Outcome of one run: the four input pairs in a fresh random order, each
/// held for one segment, starting from the left well.
DecodedRun simulate_run(const ExperimentConfig& cfg, std::uint64_t seed);

/// Fraction of runs whose four decoded bits all match the truth table. Run r
/// of cell c uses the stream derive_seed(master_seed, c, r).
Estimate success_probability(const ExperimentConfig& cfg, std::uint64_t cell = 0,
                             const Execution& exec = {});

struct SweepPoint {
    double axis = 0.0;
    double family = 0.0;
    Estimate estimate;
    std::string error;  ///< non-empty when the cell failed
};

struct SweepResult {
    std::string axis_name;
    std::string family_name;
    std::vector<SweepPoint> points;
};

enum class Family { asymmetry, correlation_time };

Family parse_family(std::string_view name);
std::string_view to_string(Family f) noexcept;

/// P versus D, one curve per asymmetry or correlation-time value. The base
/// noise must be dichotomous unless the family is empty, in which case the
/// base noise (either kind) is swept in D alone.
SweepResult sweep_over_intensity(const ExperimentConfig& base, std::span<const double> d_grid,
                                 Family family, std::span<const double> family_values,
                                 const Execution& exec = {});

/// P versus tau, one curve per intensity.
SweepResult sweep_over_correlation_time(const ExperimentConfig& base,
                                        std::span<const double> tau_grid,
                                        std::span<const double> d_values,
                                        const Execution& exec = {});

struct ThresholdMap {
    Eigen::VectorXd x_l;
    Eigen::VectorXd x_u;
    Eigen::MatrixXd p;       ///< rows follow x_l, columns x_u
    Eigen::MatrixXd stderr_;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> degenerate;
};

/// P(gate) over a threshold grid; cells without two wells score 0 and are flagged.
ThresholdMap threshold_map(const ExperimentConfig& base, std::span<const double> x_l_grid,
                           std::span<const double> x_u_grid, const Execution& exec = {});

struct RateCurveOptions {
    double tau = 0.01;
    double asymmetry = 0.0;
    MeanMode mode = MeanMode::zero_mean;
    QuadratureOptions quadrature;
    bool monte_carlo = false;
    MonteCarloOptions mc;
};

/// Forward and backward quadrature rates for every (D, I); a direction whose
/// source well the input removes is reported as +inf. With monte_carlo set,
/// oracle rows follow each quadrature row.
std::vector<RateRow> rate_curves(const PotentialParams& params, std::span<const double> inputs,
                                 std::span<const double> d_grid, const RateCurveOptions& options,
                                 const Execution& exec = {});

/// n points from lo to hi, geometric or arithmetic.
std::vector<double> log_grid(double lo, double hi, std::size_t n);
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

/// Header axis,family,P,stderr.
void write_sweep_csv(std::ostream& out, const SweepResult& result);
/// Header x_l,x_u,P,stderr,degenerate.
void write_map_csv(std::ostream& out, const ThresholdMap& map);

}  // namespace lsr
