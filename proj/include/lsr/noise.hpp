#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "lsr/random.hpp"

namespace lsr {

/// How the switching rates accompany asymmetric levels.
enum class MeanMode {
    zero_mean,    ///< alpha * delta1 + beta * delta2 = 0
    equal_rates,  ///< alpha = beta = 1 / (2 tau)
};

struct NoiseLevels {
    double delta1;  ///< lower level, < 0
    double delta2;  ///< upper level, > 0
};

struct SwitchRates {
    double alpha;  ///< rate delta2 -> delta1
    double beta;   ///< rate delta1 -> delta2
};

/// Asymmetric dichotomous (telegraph) noise.
class DichotomousNoiseSpec {
public:
    /// Throws InvalidArgument unless delta1 < 0 < delta2 and both rates are positive.
    DichotomousNoiseSpec(double delta1, double delta2, double alpha, double beta);

    /// Levels and rates reproducing intensity D, correlation time tau and asymmetry A.
    static DichotomousNoiseSpec from_statistics(double intensity, double tau, double asymmetry,
                                                MeanMode mode = MeanMode::zero_mean);

    double delta1() const noexcept { return delta1_; }
    double delta2() const noexcept { return delta2_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

    double gamma() const noexcept { return alpha_ + beta_; }
    double tau() const noexcept { return 1.0 / gamma(); }
    /// tau * |delta1| * delta2
    double intensity() const noexcept { return tau() * -delta1_ * delta2_; }
    double asymmetry() const noexcept { return (delta2_ + delta1_) / (delta2_ - delta1_); }
    double mean() const noexcept { return (alpha_ * delta1_ + beta_ * delta2_) / gamma(); }
    double variance() const noexcept;
    /// Stationary probability of the lower level, alpha / gamma.
    double lower_occupancy() const noexcept { return alpha_ / gamma(); }

private:
    double delta1_;
    double delta2_;
    double alpha_;
    double beta_;
};

/// |delta1| = sqrt(D/tau (1-A)/(1+A)), delta2 = sqrt(D/tau (1+A)/(1-A)).
NoiseLevels derive_amplitudes(double intensity, double tau, double asymmetry);

SwitchRates derive_rates(double delta1, double delta2, double tau, MeanMode mode);

/// Probability that the noise still sits on `level` after dt.
double stay_probability(double level, double dt, const DichotomousNoiseSpec& spec);

/// One acceptance-rejection step: switch when a uniform draw exceeds the stay probability.
double step_noise(double current, double dt, const DichotomousNoiseSpec& spec, Rng& rng);

/// step_noise with the stay probabilities for a fixed dt precomputed.
class NoiseStepper {
public:
    NoiseStepper(const DichotomousNoiseSpec& spec, double dt);

    /// Draws the initial level from the stationary distribution.
    bool initial_upper(Rng& rng) const { return !(rng.uniform() < lower_occupancy_); }

    bool next_upper(bool upper, Rng& rng) const {
        const double stay = upper ? stay_upper_ : stay_lower_;
        return rng.uniform() > stay ? !upper : upper;
    }

    double level(bool upper) const noexcept { return upper ? delta2_ : delta1_; }

private:
    double delta1_;
    double delta2_;
    double stay_lower_;
    double stay_upper_;
    double lower_occupancy_;
};

struct NoisePath {
    Eigen::VectorXd values;
    double dt = 0.0;
    std::uint64_t seed = 0;
};

/// n samples spaced by dt, starting from a stationary draw.
NoisePath generate_noise_path(const DichotomousNoiseSpec& spec, double dt, std::size_t n,
                              std::uint64_t seed);

struct NoiseStatistics {
    double mean;
    double variance;       ///< autocovariance at lag 0
    double tau_hat;        ///< fitted correlation time
    double intensity_hat;  ///< tau_hat * variance
    std::size_t max_lag;   ///< last lag used by the fit
};

/// Fits C exp(-t / tau) to the sample autocovariance over lags up to five
/// correlation times. Requires at least 1e5 samples.
NoiseStatistics estimate_statistics(const NoisePath& path);

/// Normal increment with variance 2 D dt.
double gwn_increment(double intensity, double dt, Rng& rng);

}  // namespace lsr
