#include "lsr/cli.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "lsr/config.hpp"
#include "lsr/errors.hpp"
#include "lsr/experiments.hpp"
#include "lsr/noise.hpp"
#include "lsr/parallel.hpp"
#include "lsr/random.hpp"
#include "lsr/simulate.hpp"
#include "lsr/theory.hpp"

namespace lsr {

std::uint64_t fnv1a64(std::string_view data) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Context {
    std::string command;
    RunConfig rc;
    Execution exec;
    std::ostream& out;
    std::ostream& err;
};

// Writes name and name.meta under the output directory.
void emit(const Context& ctx, const std::string& name, const std::string& csv) {
    std::filesystem::create_directories(ctx.rc.out_dir);
    const auto path = ctx.rc.out_dir / name;
    {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write " + path.string());
        f << csv;
    }
    // The thread count never changes results; the output directory is
    // echoed but kept out of the digest.
    std::string echo, digested;
    std::istringstream lines(ctx.rc.echo());
    for (std::string line; std::getline(lines, line);) {
        if (line.rfind("run.threads", 0) == 0) continue;
        echo += line + '\n';
        if (line.rfind("run.out", 0) != 0) digested += line + '\n';
    }

    std::ofstream meta(path.string() + ".meta", std::ios::binary);
    if (!meta) throw Error("cannot write " + path.string() + ".meta");
    meta << "command = " << ctx.command << '\n'
         << "output = " << name << '\n'
         << "seed = " << ctx.rc.experiment.master_seed << '\n'
         << "seed_rule = mix64(mix64(mix64(seed) ^ cell) ^ run * 0xd1b54a32d192ed03)\n"
         << "output_digest = " << hex(fnv1a64(csv)) << '\n'
         << "config_digest = " << hex(fnv1a64(digested)) << '\n'
         << echo;
    ctx.err << "[lsr] wrote " << path.string() << '\n';
}

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

void cmd_trajectory(const Context& ctx) {
    const auto& ex = ctx.rc.experiment;
    const WellStructure wells = fixed_points(ex.params);
    const LogicSignal signal =
        encode_inputs(ctx.rc.pairs, ex.sim.amplitude, ex.sim.segment_duration);
    const Trajectory traj = integrate(ex.params, make_drive(ex.noise), signal, ex.sim.dt,
                                      wells.x_in, derive_seed(ex.master_seed, 0, 0));
    std::ostringstream csv;
    write_trajectory_csv(csv, traj, ctx.rc.decimation);
    emit(ctx, "trajectory.csv", csv.str());

    const auto bits = decode_output(traj, signal, wells, ex.sim.transient_fraction, ex.sim.decode);
    const DecodedRun run = score_run(bits, signal.pairs, ex.gate);
    ctx.out << "segment,inputs,decoded,expected\n";
    for (std::size_t s = 0; s < bits.size(); ++s)
        ctx.out << s << ',' << signal.pairs[s].first << signal.pairs[s].second << ','
                << run.decoded[s] << ',' << run.expected[s] << '\n';
    ctx.out << "success = " << (run.success ? "true" : "false") << '\n';
}

void describe_noise(std::ostringstream& csv, const NoiseSettings& noise) {
    if (const auto* d = std::get_if<DichotomousSettings>(&noise))
        csv << format("dichotomous,%.10g,%.10g,%.10g", d->intensity, d->tau, d->asymmetry);
    else
        csv << format("gwn,%.10g,,", std::get<WhiteNoiseSettings>(noise).intensity);
}

void cmd_success(const Context& ctx) {
    const auto& ex = ctx.rc.experiment;
    const Estimate e = success_probability(ex, 0, ctx.exec);
    std::ostringstream csv;
    csv << "gate,noise,D,tau,A,P,stderr,successes,runs\n" << to_string(ex.gate) << ',';
    describe_noise(csv, ex.noise);
    csv << format(",%.6f,%.6f,%zu,%zu\n", e.p, e.stderr_, e.successes, e.runs);
    emit(ctx, "success.csv", csv.str());
    ctx.out << format("P(%s) = %.4f +- %.4f (%zu/%zu)\n", std::string(to_string(ex.gate)).c_str(),
                      e.p, e.stderr_, e.successes, e.runs);
}

void report_errors(const Context& ctx, const SweepResult& r) {
    for (const auto& pt : r.points)
        if (!pt.error.empty())
            ctx.err << "[lsr] " << r.axis_name << '=' << pt.axis << ": " << pt.error << '\n';
}

void cmd_sweep_d(const Context& ctx) {
    const auto r = sweep_over_intensity(ctx.rc.experiment, ctx.rc.d_grid, ctx.rc.family,
                                        ctx.rc.family_values, ctx.exec);
    report_errors(ctx, r);
    std::ostringstream csv;
    write_sweep_csv(csv, r);
    emit(ctx, "sweep_d.csv", csv.str());
}

void cmd_sweep_tau(const Context& ctx) {
    const auto r =
        sweep_over_correlation_time(ctx.rc.experiment, ctx.rc.tau_grid, ctx.rc.d_values, ctx.exec);
    report_errors(ctx, r);
    std::ostringstream csv;
    write_sweep_csv(csv, r);
    emit(ctx, "sweep_tau.csv", csv.str());
}

void cmd_map(const Context& ctx) {
    const auto m = threshold_map(ctx.rc.experiment, ctx.rc.x_l_grid, ctx.rc.x_u_grid, ctx.exec);
    std::ostringstream csv;
    write_map_csv(csv, m);
    emit(ctx, "map.csv", csv.str());
}

void cmd_rates(const Context& ctx) {
    if (!std::holds_alternative<DichotomousSettings>(ctx.rc.experiment.noise))
        throw ConfigError("noise.kind", "rates need dichotomous noise");
    const auto rows = rate_curves(ctx.rc.experiment.params, ctx.rc.rate_inputs,
                                  ctx.rc.rate_d_grid, ctx.rc.rates, ctx.exec);
    std::ostringstream csv;
    write_rate_csv(csv, rows);
    emit(ctx, "rates.csv", csv.str());
}

void cmd_noise_check(const Context& ctx) {
    const auto* d = std::get_if<DichotomousSettings>(&ctx.rc.experiment.noise);
    if (!d) throw ConfigError("noise.kind", "noise-check needs dichotomous noise");
    const auto spec = DichotomousNoiseSpec::from_statistics(d->intensity, d->tau, d->asymmetry, d->mode);
    const NoisePath path = generate_noise_path(spec, ctx.rc.check_dt, ctx.rc.check_samples,
                                               derive_seed(ctx.rc.experiment.master_seed, 0, 0));
    const NoiseStatistics s = estimate_statistics(path);
    const double tau_err = s.tau_hat / d->tau - 1.0;
    const double d_err = s.intensity_hat / d->intensity - 1.0;

    std::ostringstream csv;
    csv << "quantity,target,estimate,rel_error\n"
        << format("mean,%.10g,%.10g,\n", spec.mean(), s.mean)
        << format("variance,%.10g,%.10g,%.6g\n", spec.variance(), s.variance,
                  s.variance / spec.variance() - 1.0)
        << format("tau,%.10g,%.10g,%.6g\n", d->tau, s.tau_hat, tau_err)
        << format("D,%.10g,%.10g,%.6g\n", d->intensity, s.intensity_hat, d_err);
    emit(ctx, "noise_check.csv", csv.str());
    ctx.out << format("levels    %.6g %.6g\nrates     alpha=%.6g beta=%.6g\n", spec.delta1(),
                      spec.delta2(), spec.alpha(), spec.beta())
            << format("mean      %.6g (target %.6g)\n", s.mean, spec.mean())
            << format("tau_hat   %.6g (target %.6g, %+.2f%%)\n", s.tau_hat, d->tau, 100 * tau_err)
            << format("D_hat     %.6g (target %.6g, %+.2f%%)\n", s.intensity_hat, d->intensity,
                      100 * d_err)
            << "tau within 5%: " << (std::abs(tau_err) < 0.05 ? "yes" : "no") << '\n';
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Logical stochastic resonance with dichotomous noise"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out_dir, gate, noise, d, tau, asym;
    std::optional<std::size_t> runs;

    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--set", overrides, "override one key, e.g. --set noise.tau=0.001");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--threads", threads, "worker threads (default: LSR_THREADS or all cores)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--gate", gate, "AND, OR, NAND or NOR");
    app.add_option("--noise", noise, "dichotomous or gwn");
    app.add_option("--D", d, "noise intensity");
    app.add_option("--tau", tau, "correlation time");
    app.add_option("--A", asym, "asymmetry");
    app.add_option("--runs", runs, "runs per estimate");

    const std::map<std::string, std::function<void(const Context&)>> commands{
        {"trajectory", cmd_trajectory}, {"success", cmd_success},
        {"sweep-d", cmd_sweep_d},       {"sweep-tau", cmd_sweep_tau},
        {"map", cmd_map},               {"rates", cmd_rates},
        {"noise-check", cmd_noise_check},
    };
    const std::map<std::string, std::string> help{
        {"trajectory", "integrate one run and write the time series"},
        {"success", "estimate the success probability"},
        {"sweep-d", "success probability versus noise intensity"},
        {"sweep-tau", "success probability versus correlation time"},
        {"map", "success probability over a threshold grid"},
        {"rates", "forward and backward escape rates"},
        {"noise-check", "generate noise and re-estimate its statistics"},
    };
    for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }

    std::string command;
    for (const auto* sub : app.get_subcommands()) command = sub->get_name();

    try {
        ConfigBuilder builder;
        if (!config_path.empty()) builder.load_file(config_path);
        for (const auto& o : overrides) builder.set(o);
        if (seed) builder.set("run.seed", std::to_string(*seed));
        if (threads) builder.set("run.threads", std::to_string(*threads));
        if (out_dir) builder.set("run.out", *out_dir);
        if (gate) builder.set("gate", *gate);
        if (noise) builder.set("noise.kind", *noise);
        if (d) builder.set("noise.D", *d);
        if (tau) builder.set("noise.tau", *tau);
        if (asym) builder.set("noise.A", *asym);
        if (runs) builder.set("run.n_runs", std::to_string(*runs));

        Context ctx{command, builder.build(), {}, out, err};
        ctx.exec.threads = resolve_threads(ctx.rc.threads);
        ctx.exec.progress = [&err](const std::string& msg) { err << "[lsr] " << msg << '\n'; };
        commands.at(command)(ctx);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace lsr
