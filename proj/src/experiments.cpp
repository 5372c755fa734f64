#include "lsr/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>

#include "lsr/errors.hpp"
#include "lsr/parallel.hpp"
#include "lsr/random.hpp"

namespace lsr {

NoiseDrive make_drive(const NoiseSettings& noise) {
    if (const auto* d = std::get_if<DichotomousSettings>(&noise)) {
        auto spec = DichotomousNoiseSpec::from_statistics(d->intensity, d->tau, d->asymmetry, d->mode);
        return DichotomousDrive{spec, d->literal_prefactor ? d->intensity : 1.0};
    }
    const auto& w = std::get<WhiteNoiseSettings>(noise);
    if (!(w.intensity >= 0.0)) throw InvalidArgument("white-noise intensity must be non-negative");
    return WhiteNoiseDrive{w.intensity};
}

double intensity_of(const NoiseSettings& noise) noexcept {
    return std::visit([](const auto& n) { return n.intensity; }, noise);
}

NoiseSettings with_intensity(NoiseSettings noise, double intensity) noexcept {
    std::visit([&](auto& n) { n.intensity = intensity; }, noise);
    return noise;
}

void validate(const ExperimentConfig& cfg) {
    validate(cfg.params);
    fixed_points(cfg.params);
    if (cfg.n_runs < 1) throw InvalidArgument("n_runs must be at least 1");
    const auto& sim = cfg.sim;
    if (!(sim.dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (!(sim.amplitude > 0.0)) throw InvalidArgument("input amplitude must be positive");
    const std::size_t steps = steps_per_segment(sim.segment_duration, sim.dt);
    if (detail::transient_steps(steps, sim.transient_fraction) >= steps)
        throw EmptySegment("a segment holds no post-transient samples");
    make_drive(cfg.noise);
}

DecodedRun simulate_run(const ExperimentConfig& cfg, std::uint64_t seed) {
    const WellStructure wells = fixed_points(cfg.params);
    const NoiseDrive drive = make_drive(cfg.noise);
    const auto& sim = cfg.sim;
    const std::size_t steps = steps_per_segment(sim.segment_duration, sim.dt);

    Rng rng(seed);
    std::array<InputPair, 4> order = all_input_pairs;
    for (std::size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(i + 1)]);
    const LogicSignal signal = encode_inputs(order, sim.amplitude, sim.segment_duration);

    detail::SegmentDecoder decoder(order.size(), steps, wells.x_top, sim.transient_fraction,
                                   sim.decode);
    detail::run_segments(cfg.params, drive, signal.levels, steps, sim.dt, wells.x_in, rng, decoder);
    const auto bits = decoder.bits();
    return score_run(bits, order, cfg.gate);
}

Estimate success_probability(const ExperimentConfig& cfg, std::uint64_t cell,
                             const Execution& exec) {
    validate(cfg);
    std::vector<char> success(cfg.n_runs, 0);
    parallel_for(cfg.n_runs, resolve_threads(exec.threads), [&](std::size_t r) {
        success[r] = simulate_run(cfg, derive_seed(cfg.master_seed, cell, r)).success ? 1 : 0;
    });
    Estimate e;
    e.runs = cfg.n_runs;
    e.successes = static_cast<std::size_t>(std::count(success.begin(), success.end(), 1));
    e.p = static_cast<double>(e.successes) / static_cast<double>(e.runs);
    e.stderr_ = std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(e.runs));
    return e;
}

Family parse_family(std::string_view name) {
    if (name == "A" || name == "asymmetry") return Family::asymmetry;
    if (name == "tau" || name == "correlation-time") return Family::correlation_time;
    throw InvalidArgument("unknown sweep family '" + std::string(name) + "'");
}

std::string_view to_string(Family f) noexcept {
    return f == Family::asymmetry ? "A" : "tau";
}

namespace {

void require_grid(std::span<const double> grid, const char* name) {
    if (grid.empty()) throw InvalidArgument(std::string(name) + " must not be empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw InvalidArgument(std::string(name) + " must be strictly increasing");
}

void report(const Execution& exec, const std::string& message) {
    if (exec.progress) exec.progress(message);
}

std::string format_point(const char* axis, double x, const char* family, double f) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s=%.6g %s=%.6g", axis, x, family, f);
    return buf;
}

SweepPoint evaluate(const ExperimentConfig& cfg, std::uint64_t cell, double axis, double family,
                    const Execution& exec) {
    SweepPoint pt;
    pt.axis = axis;
    pt.family = family;
    try {
        pt.estimate = success_probability(cfg, cell, exec);
    } catch (const Error& e) {
        pt.error = e.what();
    }
    return pt;
}

}  // namespace

SweepResult sweep_over_intensity(const ExperimentConfig& base, std::span<const double> d_grid,
                                 Family family, std::span<const double> family_values,
                                 const Execution& exec) {
    require_grid(d_grid, "D grid");
    SweepResult result;
    result.axis_name = "D";
    result.family_name = std::string(to_string(family));

    if (family_values.empty()) {
        for (std::size_t i = 0; i < d_grid.size(); ++i) {
            ExperimentConfig cfg = base;
            cfg.noise = with_intensity(base.noise, d_grid[i]);
            const double fam = std::holds_alternative<DichotomousSettings>(base.noise)
                                   ? (family == Family::asymmetry
                                          ? std::get<DichotomousSettings>(base.noise).asymmetry
                                          : std::get<DichotomousSettings>(base.noise).tau)
                                   : std::numeric_limits<double>::quiet_NaN();
            result.points.push_back(evaluate(cfg, i, d_grid[i], fam, exec));
            report(exec, format_point("D", d_grid[i], result.family_name.c_str(), fam));
        }
        return result;
    }

    if (!std::holds_alternative<DichotomousSettings>(base.noise))
        throw InvalidArgument("family sweeps need dichotomous noise");
    for (std::size_t f = 0; f < family_values.size(); ++f) {
        for (std::size_t i = 0; i < d_grid.size(); ++i) {
            auto noise = std::get<DichotomousSettings>(base.noise);
            noise.intensity = d_grid[i];
            (family == Family::asymmetry ? noise.asymmetry : noise.tau) = family_values[f];
            ExperimentConfig cfg = base;
            cfg.noise = noise;
            result.points.push_back(
                evaluate(cfg, f * d_grid.size() + i, d_grid[i], family_values[f], exec));
            report(exec, format_point("D", d_grid[i], result.family_name.c_str(), family_values[f]));
        }
    }
    return result;
}

SweepResult sweep_over_correlation_time(const ExperimentConfig& base,
                                        std::span<const double> tau_grid,
                                        std::span<const double> d_values,
                                        const Execution& exec) {
    require_grid(tau_grid, "tau grid");
    if (!std::holds_alternative<DichotomousSettings>(base.noise))
        throw InvalidArgument("correlation-time sweeps need dichotomous noise");
    std::vector<double> ds(d_values.begin(), d_values.end());
    if (ds.empty()) ds.push_back(intensity_of(base.noise));

    SweepResult result;
    result.axis_name = "tau";
    result.family_name = "D";
    for (std::size_t f = 0; f < ds.size(); ++f) {
        for (std::size_t i = 0; i < tau_grid.size(); ++i) {
            auto noise = std::get<DichotomousSettings>(base.noise);
            noise.intensity = ds[f];
            noise.tau = tau_grid[i];
            ExperimentConfig cfg = base;
            cfg.noise = noise;
            result.points.push_back(evaluate(cfg, f * tau_grid.size() + i, tau_grid[i], ds[f], exec));
            report(exec, format_point("tau", tau_grid[i], "D", ds[f]));
        }
    }
    return result;
}

ThresholdMap threshold_map(const ExperimentConfig& base, std::span<const double> x_l_grid,
                           std::span<const double> x_u_grid, const Execution& exec) {
    require_grid(x_l_grid, "x_l grid");
    require_grid(x_u_grid, "x_u grid");
    const auto nl = static_cast<Eigen::Index>(x_l_grid.size());
    const auto nu = static_cast<Eigen::Index>(x_u_grid.size());
    ThresholdMap map;
    map.x_l = Eigen::Map<const Eigen::VectorXd>(x_l_grid.data(), nl);
    map.x_u = Eigen::Map<const Eigen::VectorXd>(x_u_grid.data(), nu);
    map.p = Eigen::MatrixXd::Zero(nl, nu);
    map.stderr_ = Eigen::MatrixXd::Zero(nl, nu);
    map.degenerate.setConstant(nl, nu, false);

    for (Eigen::Index i = 0; i < nl; ++i) {
        for (Eigen::Index j = 0; j < nu; ++j) {
            ExperimentConfig cfg = base;
            cfg.params.x_l = map.x_l[i];
            cfg.params.x_u = map.x_u[j];
            try {
                fixed_points(cfg.params);
            } catch (const DegenerateWells&) {
                map.degenerate(i, j) = true;
                continue;
            }
            const auto cell = static_cast<std::uint64_t>(i * nu + j);
            const Estimate e = success_probability(cfg, cell, exec);
            map.p(i, j) = e.p;
            map.stderr_(i, j) = e.stderr_;
            report(exec, format_point("x_l", map.x_l[i], "x_u", map.x_u[j]));
        }
    }
    return map;
}

std::vector<RateRow> rate_curves(const PotentialParams& params, std::span<const double> inputs,
                                 std::span<const double> d_grid, const RateCurveOptions& options,
                                 const Execution& exec) {
    require_grid(d_grid, "D grid");
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<RateRow> rows;
    for (double input : inputs) {
        for (double d : d_grid) {
            const auto spec =
                DichotomousNoiseSpec::from_statistics(d, options.tau, options.asymmetry, options.mode);
            RateRow row{d, input, options.tau, options.asymmetry, RateMethod::quadrature,
                        0.0, 0.0, 0.0, false};
            auto quad = [&](Direction dir) {
                try {
                    return escape_rate_quadrature(params, input, spec, dir, options.quadrature).rate;
                } catch (const NoMetastableState&) {
                    return inf;
                }
            };
            row.k_f = quad(Direction::forward);
            row.k_b = quad(Direction::backward);
            rows.push_back(row);

            if (options.monte_carlo) {
                RateRow mc = row;
                mc.method = RateMethod::monte_carlo;
                const NoiseDrive drive = DichotomousDrive{spec, 1.0};
                auto oracle = [&](Direction dir, double& k, double& err) {
                    if (std::isinf(dir == Direction::forward ? row.k_f : row.k_b)) {
                        k = inf;
                        return;
                    }
                    MonteCarloOptions o = options.mc;
                    o.threads = exec.threads;
                    try {
                        const auto r = escape_rate_monte_carlo(params, input, drive, dir, o);
                        k = r.rate;
                        err = r.stderr_;
                    } catch (const AllCensored& e) {
                        k = e.upper_bound();
                        mc.bound = true;
                    }
                };
                double err_b = 0.0;
                oracle(Direction::forward, mc.k_f, mc.stderr_);
                oracle(Direction::backward, mc.k_b, err_b);
                rows.push_back(mc);
            }
            report(exec, format_point("D", d, "I", input));
        }
    }
    return rows;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0 && hi > 0.0)) throw InvalidArgument("log grid bounds must be positive");
    if (n == 1) return {lo};
    std::vector<double> g(n);
    const double a = std::log(lo);
    const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + step * static_cast<double>(i));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    if (n == 1) return {lo};
    std::vector<double> g(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
    g.back() = hi;
    return g;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    out << "axis,family,P,stderr\n";
    char buf[160];
    for (const auto& pt : result.points) {
        if (pt.error.empty())
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.6f,%.6f\n", pt.axis, pt.family,
                          pt.estimate.p, pt.estimate.stderr_);
        else
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,nan,nan\n", pt.axis, pt.family);
        out << buf;
    }
}

void write_map_csv(std::ostream& out, const ThresholdMap& map) {
    out << "x_l,x_u,P,stderr,degenerate\n";
    char buf[160];
    for (Eigen::Index i = 0; i < map.p.rows(); ++i)
        for (Eigen::Index j = 0; j < map.p.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.6f,%.6f,%d\n", map.x_l[i], map.x_u[j],
                          map.p(i, j), map.stderr_(i, j), map.degenerate(i, j) ? 1 : 0);
            out << buf;
        }
}

}  // namespace lsr
