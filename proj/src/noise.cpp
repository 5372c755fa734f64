#include "lsr/noise.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lsr/errors.hpp"

namespace lsr {

DichotomousNoiseSpec::DichotomousNoiseSpec(double delta1, double delta2, double alpha, double beta)
    : delta1_(delta1), delta2_(delta2), alpha_(alpha), beta_(beta) {
    if (!(delta1 < 0.0 && delta2 > 0.0))
        throw InvalidArgument("noise levels need delta1 < 0 < delta2");
    if (!(alpha > 0.0 && beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw InvalidArgument("switching rates must be positive and finite");
}

DichotomousNoiseSpec DichotomousNoiseSpec::from_statistics(double intensity, double tau,
                                                           double asymmetry, MeanMode mode) {
    const auto levels = derive_amplitudes(intensity, tau, asymmetry);
    const auto rates = derive_rates(levels.delta1, levels.delta2, tau, mode);
    return {levels.delta1, levels.delta2, rates.alpha, rates.beta};
}

double DichotomousNoiseSpec::variance() const noexcept {
    const double g = gamma();
    const double spread = delta2_ - delta1_;
    return alpha_ * beta_ / (g * g) * spread * spread;
}

NoiseLevels derive_amplitudes(double intensity, double tau, double asymmetry) {
    if (!(std::abs(asymmetry) < 1.0))
        throw InvalidAsymmetry("asymmetry must satisfy |A| < 1, got " + std::to_string(asymmetry));
    if (!(intensity > 0.0)) throw InvalidArgument("noise intensity must be positive");
    if (!(tau > 0.0)) throw InvalidArgument("correlation time must be positive");
    const double scale = intensity / tau;
    const double ratio = (1.0 + asymmetry) / (1.0 - asymmetry);
    return {-std::sqrt(scale / ratio), std::sqrt(scale * ratio)};
}

SwitchRates derive_rates(double delta1, double delta2, double tau, MeanMode mode) {
    if (!(delta1 < 0.0 && delta2 > 0.0))
        throw InvalidArgument("noise levels need delta1 < 0 < delta2");
    if (!(tau > 0.0)) throw InvalidArgument("correlation time must be positive");
    const double gamma = 1.0 / tau;
    if (mode == MeanMode::equal_rates) return {0.5 * gamma, 0.5 * gamma};
    const double spread = delta2 - delta1;
    return {gamma * delta2 / spread, gamma * -delta1 / spread};
}

double stay_probability(double level, double dt, const DichotomousNoiseSpec& spec) {
    if (!(dt >= 0.0)) throw InvalidArgument("dt must be non-negative");
    const double g = spec.gamma();
    const double decay = std::exp(-g * dt);
    if (level == spec.delta1()) return spec.alpha() / g + spec.beta() / g * decay;
    if (level == spec.delta2()) return spec.beta() / g + spec.alpha() / g * decay;
    throw InvalidArgument("level is neither delta1 nor delta2");
}

double step_noise(double current, double dt, const DichotomousNoiseSpec& spec, Rng& rng) {
    const double stay = stay_probability(current, dt, spec);
    if (rng.uniform() > stay) return current == spec.delta1() ? spec.delta2() : spec.delta1();
    return current;
}

NoiseStepper::NoiseStepper(const DichotomousNoiseSpec& spec, double dt)
    : delta1_(spec.delta1()),
      delta2_(spec.delta2()),
      stay_lower_(stay_probability(spec.delta1(), dt, spec)),
      stay_upper_(stay_probability(spec.delta2(), dt, spec)),
      lower_occupancy_(spec.lower_occupancy()) {}

NoisePath generate_noise_path(const DichotomousNoiseSpec& spec, double dt, std::size_t n,
                              std::uint64_t seed) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    NoiseStepper stepper(spec, dt);
    Rng rng(seed);
    NoisePath path{Eigen::VectorXd(static_cast<Eigen::Index>(n)), dt, seed};
    bool upper = stepper.initial_upper(rng);
    for (std::size_t i = 0; i < n; ++i) {
        path.values[static_cast<Eigen::Index>(i)] = stepper.level(upper);
        upper = stepper.next_upper(upper, rng);
    }
    return path;
}

namespace {

double autocovariance(const Eigen::VectorXd& centered, Eigen::Index lag) {
    const Eigen::Index n = centered.size() - lag;
    return centered.head(n).dot(centered.tail(n)) / static_cast<double>(centered.size());
}

}  // namespace

NoiseStatistics estimate_statistics(const NoisePath& path) {
    constexpr Eigen::Index min_samples = 100000;
    if (path.values.size() < min_samples)
        throw InvalidArgument("statistics need at least 1e5 samples");
    if (!(path.dt > 0.0)) throw InvalidArgument("path dt must be positive");

    const double mean = path.values.mean();
    const Eigen::VectorXd centered = path.values.array() - mean;
    const double c0 = autocovariance(centered, 0);
    if (!(c0 > 0.0)) throw FitFailed("autocovariance at lag 0 is not positive");

    // Coarse tau from the first 1/e crossing, then fit over five of those.
    const Eigen::Index scan_limit = path.values.size() / 10;
    Eigen::Index crossing = -1;
    double previous = c0;
    double tau_guess = 0.0;
    for (Eigen::Index k = 1; k < scan_limit; ++k) {
        const double c = autocovariance(centered, k);
        if (c < c0 * std::exp(-1.0)) {
            crossing = k;
            const double target = c0 * std::exp(-1.0);
            tau_guess = (static_cast<double>(k - 1) + (previous - target) / (previous - c)) * path.dt;
            break;
        }
        previous = c;
    }
    if (crossing < 0) throw FitFailed("autocovariance never decorrelates; tau is unbounded");
    tau_guess = std::max(tau_guess, 0.5 * path.dt);

    const auto max_lag = std::max<Eigen::Index>(
        3, static_cast<Eigen::Index>(std::ceil(5.0 * tau_guess / path.dt)));
    Eigen::VectorXd lags(max_lag + 1), cov(max_lag + 1);
    for (Eigen::Index k = 0; k <= max_lag; ++k) {
        lags[k] = static_cast<double>(k) * path.dt;
        cov[k] = autocovariance(centered, k);
    }

    // Gauss-Newton on C exp(-lambda t).
    double amplitude = c0;
    double lambda = 1.0 / tau_guess;
    for (int iter = 0; iter < 50; ++iter) {
        const Eigen::ArrayXd model = amplitude * (-lambda * lags.array()).exp();
        const Eigen::VectorXd residual = (cov.array() - model).matrix();
        Eigen::MatrixXd jac(lags.size(), 2);
        jac.col(0) = (model / amplitude).matrix();
        jac.col(1) = (-lags.array() * model).matrix();
        const Eigen::Vector2d step = jac.colPivHouseholderQr().solve(residual);
        amplitude += step[0];
        lambda += step[1];
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw FitFailed("exponential fit diverged");
        if (std::abs(step[1]) < 1e-12 * lambda) break;
    }

    const double tau_hat = 1.0 / lambda;
    return {mean, c0, tau_hat, tau_hat * c0, static_cast<std::size_t>(max_lag)};
}

double gwn_increment(double intensity, double dt, Rng& rng) {
    if (!(intensity >= 0.0)) throw InvalidArgument("noise intensity must be non-negative");
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (intensity == 0.0) return 0.0;
    return std::sqrt(2.0 * intensity * dt) * rng.normal();
}

}  // namespace lsr
