#pragma once

#include <array>
#include <optional>

namespace lsr {

/// Coefficients of the thresholded drift  f(x) = -a x + b g(x),  where g clamps
/// x to [x_l, x_u].
struct PotentialParams {
    double a = 1.0;
    double b = 2.0;
    double x_l = -1.5;
    double x_u = 0.5;
};

/// Throws InvalidArgument unless x_l < x_u, a > 0 and b > a.
void validate(const PotentialParams& p);

/// Stable, unstable, stable fixed points of the noiseless, undriven flow.
struct WellStructure {
    double x_in;
    double x_top;
    double x_out;
};

enum class Stability { stable, unstable };

/// One linear piece  v(x) = slope * x + intercept  on [lo, hi].
struct LinearPiece {
    double lo;
    double hi;
    double slope;
    double intercept;

    double operator()(double x) const noexcept { return slope * x + intercept; }
};

/// The three linear pieces of f(x) + shift, ordered left to right; the outer
/// pieces extend to -inf / +inf.
using PiecewiseFlow = std::array<LinearPiece, 3>;

inline double clamp_to_thresholds(double x, const PotentialParams& p) noexcept {
    return x < p.x_l ? p.x_l : (x > p.x_u ? p.x_u : x);
}

inline double drift(double x, const PotentialParams& p) noexcept {
    return -p.a * x + p.b * clamp_to_thresholds(x, p);
}

/// d drift / dx; on a threshold the slope of the middle piece is returned.
double drift_slope(double x, const PotentialParams& p) noexcept;

/// U with U' = -drift and the gauge U(0) = 0.
double potential(double x, const PotentialParams& p) noexcept;

/// Closed-form fixed points; throws DegenerateWells when the flow is not bistable.
WellStructure fixed_points(const PotentialParams& p);

Stability classify(double x, const PotentialParams& p) noexcept;

PiecewiseFlow piecewise_flow(const PotentialParams& p, double shift = 0.0) noexcept;

/// Fixed points of drift(x) + input. A well that the tilt has removed is empty.
struct TiltedWells {
    std::optional<double> left;
    std::optional<double> top;
    std::optional<double> right;
};

TiltedWells tilted_fixed_points(const PotentialParams& p, double input) noexcept;

/// Parameters of the reflected system y = -x: f~(y) = -f(-y).
PotentialParams mirrored(const PotentialParams& p) noexcept;

}  // namespace lsr
