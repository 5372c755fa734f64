#include "lsr/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lsr/errors.hpp"
#include "lsr/parallel.hpp"
#include "lsr/random.hpp"

namespace lsr {

std::string_view to_string(Direction d) noexcept {
    return d == Direction::forward ? "forward" : "backward";
}

std::string_view to_string(RateMethod m) noexcept {
    switch (m) {
        case RateMethod::quadrature: return "quadrature";
        case RateMethod::steepest_descent: return "steepest-descent";
        case RateMethod::monte_carlo: return "monte-carlo";
    }
    return "?";
}

QuadratureForm parse_quadrature_form(std::string_view name) {
    if (name == "first-passage") return QuadratureForm::first_passage;
    if (name == "literal") return QuadratureForm::literal;
    if (name == "literal-support") return QuadratureForm::literal_support;
    throw InvalidArgument("unknown quadrature form '" + std::string(name) + "'");
}

std::string_view to_string(QuadratureForm form) noexcept {
    switch (form) {
        case QuadratureForm::first_passage: return "first-passage";
        case QuadratureForm::literal: return "literal";
        case QuadratureForm::literal_support: return "literal-support";
    }
    return "?";
}

double DensityTable::normalization() const { return std::exp(log_normalization); }

double DensityTable::operator()(double x) const {
    const Eigen::Index n = grid.size();
    if (n == 0 || x < s_lo || x > s_hi) return 0.0;
    if (x <= grid[0]) return p[0];
    if (x >= grid[n - 1]) return p[n - 1];
    const auto* begin = grid.data();
    const auto it = std::upper_bound(begin, begin + n, x);
    const Eigen::Index j = it - begin;
    const double w = (x - grid[j - 1]) / (grid[j] - grid[j - 1]);
    return (1.0 - w) * p[j - 1] + w * p[j];
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double log_add(double a, double b) noexcept {
    if (a == -inf) return b;
    if (b == -inf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

// The escape problem seen from a source well on the left. The right well is
// handled by reflecting x -> -x, which swaps and negates the levels and swaps
// the rates.
struct Frame {
    PiecewiseFlow flow;  // F = f + I
    double d1, d2;       // lower and upper level
    double alpha, beta;  // rates d2 -> d1 and d1 -> d2
    double x0;           // tilted well bottom
    std::optional<double> top;  // tilted barrier
    WellStructure wells;        // of the untilted flow
    double tau;

    int piece(double x) const noexcept {
        if (x < flow[0].hi) return 0;
        if (x <= flow[1].hi) return 1;
        return 2;
    }
    double F(double x) const noexcept { return flow[piece(x)](x); }
    double lower(double x) const noexcept { return F(x) + d1; }
    double upper(double x) const noexcept { return F(x) + d2; }

    // Antiderivative of β / (F + d1) + α / (F + d2) on piece k.
    double phi_piece(int k, double y) const noexcept {
        const auto& pc = flow[k];
        const double v = pc(y);
        return (beta * std::log(std::abs(v + d1)) + alpha * std::log(std::abs(v + d2))) /
               pc.slope;
    }

    // Φ(x) - Φ(x0)
    double phi(double x) const noexcept {
        const double lo = std::min(x, x0);
        const double hi = std::max(x, x0);
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double a = std::max(lo, flow[k].lo);
            const double b = std::min(hi, flow[k].hi);
            if (a < b) sum += phi_piece(k, b) - phi_piece(k, a);
        }
        return x >= x0 ? sum : -sum;
    }

    // Smallest zero of F + c strictly right of `from`.
    std::optional<double> zero_right(double c, double from) const noexcept {
        for (const auto& pc : flow) {
            const double r = -(pc.intercept + c) / pc.slope;
            if (r > from && r >= pc.lo && r <= pc.hi) return r;
        }
        return std::nullopt;
    }

    // Largest zero of F + c strictly left of `from`.
    std::optional<double> zero_left(double c, double from) const noexcept {
        for (int k = 2; k >= 0; --k) {
            const auto& pc = flow[k];
            const double r = -(pc.intercept + c) / pc.slope;
            if (r < from && r >= pc.lo && r <= pc.hi) return r;
        }
        return std::nullopt;
    }
};

Frame make_frame(const PotentialParams& params, double input, const DichotomousNoiseSpec& spec,
                 Well source) {
    const bool left = source == Well::left;
    const PotentialParams p = left ? params : mirrored(params);
    const double shift = left ? input : -input;
    Frame fr{
        piecewise_flow(p, shift),
        left ? spec.delta1() : -spec.delta2(),
        left ? spec.delta2() : -spec.delta1(),
        left ? spec.alpha() : spec.beta(),
        left ? spec.beta() : spec.alpha(),
        0.0,
        std::nullopt,
        fixed_points(p),
        spec.tau(),
    };
    const TiltedWells tilted = tilted_fixed_points(p, shift);
    if (!tilted.left)
        throw NoMetastableState("input " + std::to_string(input) + " removes the source well");
    fr.x0 = *tilted.left;
    fr.top = tilted.top;
    if (!(fr.lower(fr.x0) < 0.0 && fr.upper(fr.x0) > 0.0))
        throw NoMetastableState("noise levels do not bracket the source well");
    return fr;
}

Well source_well(Direction d) noexcept { return d == Direction::forward ? Well::left : Well::right; }

// log of exp(-Φ) / |(F + d1)(F + d2)|
double log_kernel(const Frame& fr, double x) noexcept {
    return -fr.phi(x) - std::log(-fr.lower(x) * fr.upper(x));
}

// Mean exit time of both noise states from [c, b], where the lower-level flow
// vanishes at c and both flows point right. Backward implicit Euler from
// T(b) = 0; the regular solution at c is an attractor of the backward sweep.
std::pair<double, double> passage_time(const Frame& fr, double c, double b, std::size_t n) {
    Eigen::Vector2d y = Eigen::Vector2d::Zero();
    const double h = (b - c) / static_cast<double>(n);
    for (std::size_t i = n; i-- > 0;) {
        // Node i sits at c + i h; the last node is nudged off the singular point.
        const double x = i == 0 ? c + 1e-9 * (b - c) : c + static_cast<double>(i) * h;
        const double vp = fr.upper(x);
        const double vm = fr.lower(x);
        Eigen::Matrix2d m;
        m << 1.0 + h * fr.alpha / vp, -h * fr.alpha / vp, -h * fr.beta / vm,
            1.0 + h * fr.beta / vm;
        const Eigen::Vector2d rhs = y + h * Eigen::Vector2d(1.0 / vp, 1.0 / vm);
        y = m.partialPivLu().solve(rhs);
    }
    return {y[0], y[1]};
}

struct Cell {
    double mid;
    double width;
};

// Midpoint cells over [lo, hi] with every breakpoint as a cell edge; each
// sub-interval gets a share of `total` proportional to its length.
std::vector<Cell> make_cells(std::vector<double> edges, std::size_t total) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    const double span = edges.back() - edges.front();
    std::vector<Cell> cells;
    cells.reserve(total + 16 * edges.size());
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double len = edges[s + 1] - edges[s];
        const auto n = std::max<std::size_t>(
            16, static_cast<std::size_t>(std::llround(static_cast<double>(total) * len / span)));
        const double h = len / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j)
            cells.push_back({edges[s] + (static_cast<double>(j) + 0.5) * h, h});
    }
    return cells;
}

RateResult zero_rate(RateMethod method, Direction direction) {
    RateResult r;
    r.rate = 0.0;
    r.log_rate = -inf;
    r.method = method;
    r.direction = direction;
    return r;
}

RateResult first_passage_rate(const Frame& fr, Direction direction, std::size_t grid_size) {
    const double b = fr.wells.x_top;
    if (!(fr.x0 < b)) throw NoMetastableState("source well lies beyond the barrier");

    // The upper flow must carry the particle all the way to the barrier.
    if (const auto z = fr.zero_right(fr.d2, fr.x0); z && *z <= b)
        return zero_rate(RateMethod::quadrature, direction);

    const auto c = fr.zero_right(fr.d1, fr.x0);
    const double b_eff = (c && *c < b) ? *c : b;
    const auto s_lo = fr.zero_left(fr.d1, fr.x0);
    if (!s_lo) throw NoMetastableState("lower-level flow has no fixed point left of the well");

    std::vector<double> edges{*s_lo, fr.x0, b_eff};
    for (double kink : {fr.flow[0].hi, fr.flow[1].hi})
        if (kink > *s_lo && kink < b_eff) edges.push_back(kink);
    const auto cells = make_cells(edges, grid_size);

    const double spread = fr.d2 - fr.d1;
    const double log_coupling = std::log(fr.alpha * spread);
    double log_c = -inf;
    double log_c_x0 = -inf;
    double log_tp = -inf;
    for (const auto& cell : cells) {
        const double lk = log_kernel(fr, cell.mid);
        if (cell.mid > fr.x0) {
            if (log_c_x0 == -inf) log_c_x0 = log_c;
            const double log_c_mid = log_add(log_c, lk + std::log(0.5 * cell.width));
            const double term = std::log(cell.width) - std::log(fr.upper(cell.mid)) +
                                log_add(0.0, log_coupling + fr.phi(cell.mid) + log_c_mid);
            log_tp = log_add(log_tp, term);
        }
        log_c = log_add(log_c, lk + std::log(cell.width));
    }

    double log_tm;
    if (b_eff < b) {
        const auto [tp_c, tm_c] = passage_time(fr, b_eff, b, std::max<std::size_t>(grid_size, 1000));
        (void)tm_c;
        log_tp = log_add(log_tp, std::log(tp_c));
    }
    log_tm = log_add(log_tp, std::log(spread) + log_c_x0);

    const double gamma = fr.alpha + fr.beta;
    const double log_t = log_add(std::log(fr.beta / gamma) + log_tp,
                                 std::log(fr.alpha / gamma) + log_tm);
    RateResult r;
    r.log_rate = -log_t;
    r.rate = std::exp(r.log_rate);
    r.method = RateMethod::quadrature;
    r.direction = direction;
    return r;
}

DensityTable left_density(const Frame& fr, std::size_t grid_size) {
    const auto s_lo = fr.zero_left(fr.d1, fr.x0);
    const auto s_hi = fr.zero_right(fr.d2, fr.x0);
    if (!s_lo || !s_hi) throw NoMetastableState("level flows do not confine the well");
    if (const auto c = fr.zero_right(fr.d1, fr.x0); c && *c < *s_hi)
        throw NoMetastableState("lower-level flow crosses zero inside the support at " +
                                std::to_string(*c));

    DensityTable t;
    t.s_lo = *s_lo;
    t.s_hi = *s_hi;
    const auto n = static_cast<Eigen::Index>(grid_size);
    const double h = (t.s_hi - t.s_lo) / static_cast<double>(grid_size);
    t.grid.resize(n);
    Eigen::VectorXd lp(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        t.grid[j] = t.s_lo + (static_cast<double>(j) + 0.5) * h;
        lp[j] = log_kernel(fr, t.grid[j]);
    }
    const double top = lp.maxCoeff();
    const Eigen::VectorXd w = (lp.array() - top).exp();
    const double trapz = h * (w.sum() - 0.5 * (w[0] + w[n - 1]));
    if (!std::isfinite(top) || !(trapz > 0.0) || !std::isfinite(trapz))
        throw SingularDensity("normalization integral is not finite");
    t.log_normalization = -top - std::log(trapz);
    t.p = (lp.array() + t.log_normalization).exp();
    return t;
}

// Reflects a density computed in the mirrored frame back to x.
DensityTable reflect(const DensityTable& m) {
    DensityTable t;
    t.s_lo = -m.s_hi;
    t.s_hi = -m.s_lo;
    t.grid = -m.grid.reverse();
    t.p = m.p.reverse();
    t.log_normalization = m.log_normalization;
    return t;
}

}  // namespace

DensityTable stationary_density(const PotentialParams& params, double input,
                                const DichotomousNoiseSpec& spec, Well well,
                                std::size_t grid_size) {
    if (grid_size < 2) throw InvalidArgument("grid_size must be at least 2");
    const Frame fr = make_frame(params, input, spec, well);
    const DensityTable t = left_density(fr, grid_size);
    return well == Well::left ? t : reflect(t);
}

RateResult escape_rate_quadrature(const PotentialParams& params, double input,
                                  const DichotomousNoiseSpec& spec, Direction direction,
                                  const QuadratureOptions& options) {
    if (options.grid_size < 100) throw InvalidArgument("grid_size must be at least 100");
    const Frame fr = make_frame(params, input, spec, source_well(direction));
    if (options.form == QuadratureForm::first_passage)
        return first_passage_rate(fr, direction, options.grid_size);

    // Literal forms: 1 / ∫ p over [x_in, x_out] or the support, p clipped to its support.
    const DensityTable t = left_density(fr, options.grid_size);
    const bool clip = options.form == QuadratureForm::literal;
    const double lo = clip ? std::max(fr.wells.x_in, t.s_lo) : t.s_lo;
    const double hi = clip ? std::min(fr.wells.x_out, t.s_hi) : t.s_hi;
    double mass = 0.0;
    for (Eigen::Index j = 0; j + 1 < t.grid.size(); ++j) {
        const double a = t.grid[j];
        const double b = t.grid[j + 1];
        if (a >= lo && b <= hi) mass += 0.5 * (b - a) * (t.p[j] + t.p[j + 1]);
    }
    if (!(mass > 0.0)) throw SingularDensity("density has no mass between the wells");
    RateResult r;
    r.rate = 1.0 / mass;
    r.log_rate = -std::log(mass);
    r.method = RateMethod::quadrature;
    r.direction = direction;
    return r;
}

double action(const PotentialParams& params, double input, const DichotomousNoiseSpec& spec,
              Direction direction) {
    const Frame fr = make_frame(params, input, spec, source_well(direction));
    if (!fr.top) throw NoMetastableState("input removes the barrier");
    for (double level : {fr.d1, fr.d2}) {
        if (const auto z = fr.zero_right(level, fr.x0); z && *z <= *fr.top)
            throw DivergentAction("action integrand diverges inside [x_in, x_top]", *z);
    }
    return fr.tau * fr.phi(*fr.top);
}

RateResult escape_rate_steepest_descent(const PotentialParams& params, double input,
                                        const DichotomousNoiseSpec& spec, Direction direction) {
    const double dphi = action(params, input, spec, direction);
    const double tau = spec.tau();
    const double curvature_in = params.a;
    const double curvature_top = params.b - params.a;
    const double prefactor = std::sqrt(curvature_in * curvature_top) /
                             (2.0 * std::numbers::pi * (1.0 + tau * curvature_top));
    RateResult r;
    r.log_rate = std::log(prefactor) - dphi / tau;
    r.rate = std::exp(r.log_rate);
    r.method = RateMethod::steepest_descent;
    r.direction = direction;
    return r;
}

RateResult escape_rate_monte_carlo(const PotentialParams& params, double input,
                                   const NoiseDrive& noise, Direction direction,
                                   const MonteCarloOptions& options) {
    if (options.n_paths < 100) throw InvalidArgument("n_paths must be at least 100");
    if (!(options.dt > 0.0) || !(options.max_time > options.dt))
        throw InvalidArgument("need 0 < dt < max_time");

    const WellStructure wells = fixed_points(params);
    const TiltedWells tilted = tilted_fixed_points(params, input);
    const bool forward = direction == Direction::forward;
    const auto source = forward ? tilted.left : tilted.right;
    if (!source)
        throw NoMetastableState("input " + std::to_string(input) + " removes the source well");
    const double x0 = *source;
    const double barrier = wells.x_top;
    const auto max_steps = static_cast<std::size_t>(std::ceil(options.max_time / options.dt));
    const double dt = options.dt;

    std::vector<double> fpt(options.n_paths, -1.0);
    const std::uint64_t stream = forward ? 0xf0f0 : 0xb0b0;

    parallel_for(options.n_paths, resolve_threads(options.threads), [&](std::size_t i) {
        Rng rng(derive_seed(options.seed, stream, i));
        double x = x0;
        std::size_t steps = 0;
        auto crossed = [&](double y) { return forward ? y > barrier : y < barrier; };
        if (const auto* dich = std::get_if<DichotomousDrive>(&noise)) {
            const NoiseStepper stepper(dich->spec, dt);
            const double lo = dich->prefactor * stepper.level(false);
            const double hi = dich->prefactor * stepper.level(true);
            bool upper = stepper.initial_upper(rng);
            for (; steps < max_steps; ++steps) {
                x += (drift(x, params) + input + (upper ? hi : lo)) * dt;
                if (crossed(x)) break;
                upper = stepper.next_upper(upper, rng);
            }
        } else {
            const double intensity = std::get<WhiteNoiseDrive>(noise).intensity;
            const double scale = std::sqrt(2.0 * intensity * dt);
            for (; steps < max_steps; ++steps) {
                const double kick = intensity > 0.0 ? scale * rng.normal() : 0.0;
                x += (drift(x, params) + input) * dt + kick;
                if (crossed(x)) break;
            }
        }
        if (steps < max_steps) fpt[i] = static_cast<double>(steps + 1) * dt;
    });

    std::size_t escaped = 0;
    double observed = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double t : fpt) {
        if (t >= 0.0) {
            ++escaped;
            observed += t;
            sum += t;
            sum_sq += t * t;
        } else {
            observed += options.max_time;
        }
    }
    const std::size_t n = options.n_paths;
    if (escaped == 0)
        throw AllCensored("no path escaped within max_time",
                          1.0 / (static_cast<double>(n) * options.max_time));

    RateResult r;
    r.method = RateMethod::monte_carlo;
    r.direction = direction;
    r.escaped = escaped;
    r.censored = n - escaped;
    if (escaped == n) {
        const double nn = static_cast<double>(n);
        const double mean = sum / nn;
        const double var = std::max(0.0, (sum_sq - nn * mean * mean) / (nn - 1.0));
        r.rate = 1.0 / mean;
        r.stderr_ = r.rate * std::sqrt(var) / (mean * std::sqrt(nn));
    } else {
        r.rate = static_cast<double>(escaped) / observed;
        r.stderr_ = r.rate / std::sqrt(static_cast<double>(escaped));
    }
    r.log_rate = std::log(r.rate);
    return r;
}

void write_rate_csv(std::ostream& out, std::span<const RateRow> rows) {
    out << "D,I,tau,A,method,k_f,k_b,stderr\n";
    char buf[256];
    for (const auto& row : rows) {
        const std::string method =
            std::string(to_string(row.method)) + (row.bound ? "-bound" : "");
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%s,%.10g,%.10g,%.10g\n",
                      row.intensity, row.input, row.tau, row.asymmetry, method.c_str(), row.k_f,
                      row.k_b, row.stderr_);
        out << buf;
    }
}

}  // namespace lsr
