#include "lsr/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lsr/errors.hpp"

namespace lsr {

void validate(const PotentialParams& p) {
    if (!(std::isfinite(p.a) && std::isfinite(p.b) && std::isfinite(p.x_l) && std::isfinite(p.x_u)))
        throw InvalidArgument("potential parameters must be finite");
    if (!(p.x_l < p.x_u)) throw InvalidArgument("thresholds require x_l < x_u");
    if (!(p.a > 0.0)) throw InvalidArgument("coefficient a must be positive");
    if (!(p.b > p.a)) throw InvalidArgument("coefficient b must exceed a");
}

double drift_slope(double x, const PotentialParams& p) noexcept {
    if (x < p.x_l || x > p.x_u) return -p.a;
    return p.b - p.a;
}

namespace {

// Antiderivative of the clamp g with G(0) = 0.
double clamp_antiderivative(double x, const PotentialParams& p) noexcept {
    auto raw = [&](double s) {
        if (s < p.x_l) return p.x_l * s - 0.5 * p.x_l * p.x_l;
        if (s > p.x_u) return p.x_u * s - 0.5 * p.x_u * p.x_u;
        return 0.5 * s * s;
    };
    return raw(x) - raw(0.0);
}

}  // namespace

double potential(double x, const PotentialParams& p) noexcept {
    return 0.5 * p.a * x * x - p.b * clamp_antiderivative(x, p);
}

WellStructure fixed_points(const PotentialParams& p) {
    if (!(p.x_l < p.x_u)) throw DegenerateWells("x_l must be below x_u");
    if (!(p.a > 0.0) || !(p.b > p.a))
        throw DegenerateWells("bistability needs a > 0 and b > a");

    const double x_in = p.b * p.x_l / p.a;
    const double x_out = p.b * p.x_u / p.a;
    // The middle piece (b - a) x vanishes only at the origin.
    const double x_top = 0.0;

    if (!(x_in < p.x_l))
        throw DegenerateWells("left fixed point " + std::to_string(x_in) +
                              " is not below x_l");
    if (!(x_out > p.x_u))
        throw DegenerateWells("right fixed point " + std::to_string(x_out) +
                              " is not above x_u");
    if (!(p.x_l <= x_top && x_top <= p.x_u))
        throw DegenerateWells("barrier at 0 lies outside [x_l, x_u]");
    return {x_in, x_top, x_out};
}

Stability classify(double x, const PotentialParams& p) noexcept {
    return drift_slope(x, p) < 0.0 ? Stability::stable : Stability::unstable;
}

PiecewiseFlow piecewise_flow(const PotentialParams& p, double shift) noexcept {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {{
        {-inf, p.x_l, -p.a, p.b * p.x_l + shift},
        {p.x_l, p.x_u, p.b - p.a, shift},
        {p.x_u, inf, -p.a, p.b * p.x_u + shift},
    }};
}

TiltedWells tilted_fixed_points(const PotentialParams& p, double input) noexcept {
    TiltedWells w;
    const double left = (p.b * p.x_l + input) / p.a;
    if (left < p.x_l) w.left = left;
    const double top = -input / (p.b - p.a);
    if (p.x_l <= top && top <= p.x_u) w.top = top;
    const double right = (p.b * p.x_u + input) / p.a;
    if (right > p.x_u) w.right = right;
    return w;
}

PotentialParams mirrored(const PotentialParams& p) noexcept {
    return {p.a, p.b, -p.x_u, -p.x_l};
}

}  // namespace lsr
