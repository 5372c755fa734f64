#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "lsr/model.hpp"
#include "lsr/noise.hpp"
#include "lsr/simulate.hpp"

namespace lsr {

enum class Well { left, right };
enum class Direction { forward, backward };
enum class RateMethod { quadrature, steepest_descent, monte_carlo };

std::string_view to_string(Direction d) noexcept;
std::string_view to_string(RateMethod m) noexcept;

/// Stationary density of one metastable well under constant input.
struct DensityTable {
    double s_lo = 0.0;
    double s_hi = 0.0;
    Eigen::VectorXd grid;  ///< cell midpoints, strictly increasing
    Eigen::VectorXd p;
    double log_normalization = 0.0;  ///< log N

    double normalization() const;
    /// Linear interpolation on the grid, 0 outside the support.
    double operator()(double x) const;
};

/// Density p ∝ exp(-Φ) / |(F + Δ1)(F + Δ2)| with F = f + I and
/// Φ' = β / (F + Δ1) + α / (F + Δ2), reducing to the familiar form
/// γ F / ((F + Δ1)(F + Δ2)) for zero-mean noise. Throws NoMetastableState
/// when the chosen well is not bracketed by the two level flows.
DensityTable stationary_density(const PotentialParams& params, double input,
                                const DichotomousNoiseSpec& spec, Well well,
                                std::size_t grid_size = 4000);

struct RateResult {
    double rate = 0.0;
    double log_rate = 0.0;  ///< -inf when the rate is exactly zero
    RateMethod method = RateMethod::quadrature;
    Direction direction = Direction::forward;
    double stderr_ = 0.0;   ///< Monte-Carlo standard error, else 0
    std::size_t escaped = 0;
    std::size_t censored = 0;
};

/// first_passage: 1 / mean first-passage time from the well bottom to the
/// barrier, computed exactly from the two-state backward equations.
/// literal: 1 / ∫ p dx over [x_in, x_out] with p normalized on its support.
/// literal_support: the same over the whole support, which is identically 1.
enum class QuadratureForm { first_passage, literal, literal_support };

QuadratureForm parse_quadrature_form(std::string_view name);
std::string_view to_string(QuadratureForm form) noexcept;

struct QuadratureOptions {
    std::size_t grid_size = 20000;
    QuadratureForm form = QuadratureForm::first_passage;
};

RateResult escape_rate_quadrature(const PotentialParams& params, double input,
                                  const DichotomousNoiseSpec& spec, Direction direction,
                                  const QuadratureOptions& options = {});

/// sqrt(-f'(x_in) f'(x_top)) / (2π (1 + τ f'(x_top))) exp(-Δφ / τ) with
/// Δφ = τ ∫ Φ' dx over [x_in(I), x_top(I)]. Throws DivergentAction when a
/// level flow vanishes inside the range.
RateResult escape_rate_steepest_descent(const PotentialParams& params, double input,
                                        const DichotomousNoiseSpec& spec,
                                        Direction direction = Direction::forward);

/// Δφ of the steepest-descent formula.
double action(const PotentialParams& params, double input, const DichotomousNoiseSpec& spec,
              Direction direction = Direction::forward);

struct MonteCarloOptions {
    std::size_t n_paths = 1000;
    double dt = 1e-3;
    double max_time = 1000.0;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

/// Euler first-passage oracle from the source well bottom to x_top. Without
/// censoring k = 1 / mean FPT; with censoring the exponential maximum
/// likelihood k = escapes / total observed time. Throws AllCensored when no
/// path escapes.
RateResult escape_rate_monte_carlo(const PotentialParams& params, double input,
                                   const NoiseDrive& noise, Direction direction,
                                   const MonteCarloOptions& options = {});

struct RateRow {
    double intensity;
    double input;
    double tau;
    double asymmetry;
    RateMethod method;
    double k_f;
    double k_b;
    double stderr_;
    bool bound = false;  ///< Monte-Carlo value is an upper bound (all censored)
};

/// Header D,I,tau,A,method,k_f,k_b,stderr.
void write_rate_csv(std::ostream& out, std::span<const RateRow> rows);

}  // namespace lsr
