#include "lsr/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "lsr/errors.hpp"

namespace lsr {

namespace {

struct KeySpec {
    std::string key;
    std::string fallback;
};

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table{
        {"gate", "AND"},
        {"params.a", "1"},
        {"params.b", "2"},
        {"params.x_l", "-1.5"},
        {"params.x_u", "0.5"},
        {"noise.kind", "dichotomous"},
        {"noise.D", "0.05"},
        {"noise.tau", "0.01"},
        {"noise.A", "0"},
        {"noise.mode", "zero-mean"},
        {"noise.literal_prefactor", "false"},
        {"sim.dt", "0.01"},
        {"sim.segment_duration", "250"},
        {"sim.transient_fraction", "0.25"},
        {"sim.amplitude", "0.4"},
        {"sim.decode", "final"},
        {"run.n_runs", "1000"},
        {"run.seed", "1"},
        {"run.threads", "0"},
        {"run.out", "out"},
        {"sweep.D_min", "1e-4"},
        {"sweep.D_max", "0.2"},
        {"sweep.D_points", "20"},
        {"sweep.family", "A"},
        {"sweep.family_values", ""},
        {"sweep.tau_min", "1e-4"},
        {"sweep.tau_max", "0.1"},
        {"sweep.tau_points", "20"},
        {"sweep.D_values", "0.05"},
        {"map.x_l_min", "-2"},
        {"map.x_l_max", "-0.25"},
        {"map.x_u_min", "0.25"},
        {"map.x_u_max", "2"},
        {"map.step", "0.25"},
        {"rates.I_values", "-0.8,0,0.8"},
        {"rates.D_min", "0.01"},
        {"rates.D_max", "0.1"},
        {"rates.D_points", "10"},
        {"rates.grid_size", "20000"},
        {"rates.monte_carlo", "false"},
        {"rates.mc_paths", "1000"},
        {"rates.mc_dt", "0.001"},
        {"rates.mc_max_time", "1000"},
        {"theory.quadrature", "first-passage"},
        {"trajectory.pairs", "00,01,10,11"},
        {"trajectory.decimation", "1"},
        {"noise_check.samples", "1000000"},
        {"noise_check.dt", "0.001"},
    };
    return table;
}

std::string canonical_key(std::string_view key) {
    if (key == "D") return "noise.D";
    if (key == "tau") return "noise.tau";
    if (key == "A") return "noise.A";
    return std::string(key);
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Typed access to the merged key/value table.
class Reader {
public:
    explicit Reader(const std::map<std::string, std::string>& v) : v_(v) {}

    const std::string& text(const std::string& key) const { return v_.at(key); }

    double real(const std::string& key) const { return to_real(key, text(key)); }

    std::size_t count(const std::string& key) const {
        const std::string& s = text(key);
        std::uint64_t value = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
        return static_cast<std::size_t>(value);
    }

    bool flag(const std::string& key) const {
        const std::string& s = text(key);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw ConfigError(key, "expected true or false, got '" + s + "'");
    }

    std::vector<double> reals(const std::string& key) const {
        std::vector<double> out;
        std::string_view s = text(key);
        while (!trim(s).empty()) {
            const auto comma = s.find(',');
            out.push_back(to_real(key, trim(s.substr(0, comma))));
            if (comma == std::string_view::npos) break;
            s.remove_prefix(comma + 1);
        }
        return out;
    }

    template <class Fn>
    auto parsed(const std::string& key, Fn&& fn) const {
        try {
            return fn(text(key));
        } catch (const InvalidArgument& e) {
            throw ConfigError(key, e.what());
        }
    }

private:
    static double to_real(const std::string& key, std::string_view s) {
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value))
            throw ConfigError(key, "expected a number, got '" + std::string(s) + "'");
        return value;
    }

    const std::map<std::string, std::string>& v_;
};

std::vector<InputPair> parse_pairs(const std::string& key, std::string_view s) {
    std::vector<InputPair> pairs;
    while (!trim(s).empty()) {
        const auto comma = s.find(',');
        const auto item = trim(s.substr(0, comma));
        if (item.size() != 2 || (item[0] != '0' && item[0] != '1') ||
            (item[1] != '0' && item[1] != '1'))
            throw ConfigError(key, "input pairs are written 00, 01, 10 or 11");
        pairs.push_back({item[0] == '1', item[1] == '1'});
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    if (pairs.empty()) throw ConfigError(key, "at least one input pair is required");
    return pairs;
}

std::vector<double> stepped(const std::string& key, double lo, double hi, double step) {
    if (!(step > 0.0)) throw ConfigError(key, "step must be positive");
    if (!(hi >= lo)) throw ConfigError(key, "max must not be below min");
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
    return linear_grid(lo, lo + step * static_cast<double>(n - 1), n);
}

std::size_t positive_count(const Reader& r, const std::string& key) {
    const std::size_t n = r.count(key);
    if (n == 0) throw ConfigError(key, "must be at least 1");
    return n;
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& spec : key_table()) keys.push_back(spec.key);
    return keys;
}

std::string RunConfig::echo() const {
    std::ostringstream out;
    for (const auto& spec : key_table()) {
        out << spec.key << " = " << values.at(spec.key);
        if (defaulted.count(spec.key)) out << "  # default";
        out << '\n';
    }
    return out.str();
}

void ConfigBuilder::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    load_text(buffer.str(), path.string());
}

void ConfigBuilder::load_text(std::string_view text, std::string_view origin) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.find('=') == std::string_view::npos)
            throw ConfigError("", std::string(origin) + ":" + std::to_string(line_no) +
                                      ": expected 'key = value'");
        set(line);
    }
}

void ConfigBuilder::set(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(std::string(trim(assignment)), "expected key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void ConfigBuilder::set(std::string_view key, std::string_view value) {
    const std::string k = canonical_key(key);
    const auto& table = key_table();
    const bool known = std::any_of(table.begin(), table.end(),
                                   [&](const KeySpec& s) { return s.key == k; });
    if (!known) throw ConfigError(k, "unknown key");
    explicit_[k] = std::string(value);
}

RunConfig ConfigBuilder::build() const {
    RunConfig rc;
    for (const auto& spec : key_table()) {
        const auto it = explicit_.find(spec.key);
        if (it != explicit_.end()) {
            rc.values[spec.key] = it->second;
        } else {
            rc.values[spec.key] = spec.fallback;
            rc.defaulted.insert(spec.key);
        }
    }
    const bool white = rc.values["noise.kind"] == "gwn";
    if (white && rc.defaulted.count("noise.D")) rc.values["noise.D"] = "0.5";

    const Reader r(rc.values);
    auto& ex = rc.experiment;
    ex.gate = r.parsed("gate", [](const std::string& s) { return parse_gate(s); });
    ex.params = {r.real("params.a"), r.real("params.b"), r.real("params.x_l"), r.real("params.x_u")};
    if (!(ex.params.x_l < ex.params.x_u))
        throw ConfigError("params.x_l", "x_l < x_u invariant violated (x_l = " +
                                            r.text("params.x_l") + ", x_u = " +
                                            r.text("params.x_u") + ")");
    try {
        validate(ex.params);
        fixed_points(ex.params);
    } catch (const Error& e) {
        throw ConfigError("params", e.what());
    }

    const std::string& kind = r.text("noise.kind");
    const double d = r.real("noise.D");
    const MeanMode mode = r.parsed("noise.mode", [](const std::string& s) {
        if (s == "zero-mean") return MeanMode::zero_mean;
        if (s == "equal-rates") return MeanMode::equal_rates;
        throw InvalidArgument("expected zero-mean or equal-rates, got '" + s + "'");
    });
    const double tau = r.real("noise.tau");
    const double asym = r.real("noise.A");
    if (kind == "dichotomous") {
        if (!(d > 0.0)) throw ConfigError("noise.D", "must be positive");
        if (!(tau > 0.0)) throw ConfigError("noise.tau", "must be positive");
        if (!(std::abs(asym) < 1.0)) throw ConfigError("noise.A", "|A| must be below 1");
        ex.noise = DichotomousSettings{d, tau, asym, mode, r.flag("noise.literal_prefactor")};
    } else if (kind == "gwn") {
        if (!(d >= 0.0)) throw ConfigError("noise.D", "must be non-negative");
        ex.noise = WhiteNoiseSettings{d};
    } else {
        throw ConfigError("noise.kind", "expected dichotomous or gwn, got '" + kind + "'");
    }

    auto& sim = ex.sim;
    sim.dt = r.real("sim.dt");
    sim.segment_duration = r.real("sim.segment_duration");
    sim.transient_fraction = r.real("sim.transient_fraction");
    sim.amplitude = r.real("sim.amplitude");
    sim.decode = r.parsed("sim.decode", [](const std::string& s) { return parse_decode_mode(s); });
    ex.n_runs = positive_count(r, "run.n_runs");
    ex.master_seed = r.count("run.seed");
    rc.threads = static_cast<unsigned>(r.count("run.threads"));
    rc.out_dir = r.text("run.out");

    try {
        validate(ex);
    } catch (const Error& e) {
        throw ConfigError("sim", e.what());
    }

    auto grid = [&](const std::string& prefix, const std::string& what, const char* key_lo,
                    const char* key_hi, const char* key_n, bool logarithmic = true) {
        try {
            const double lo = r.real(prefix + key_lo);
            const double hi = r.real(prefix + key_hi);
            const std::size_t n = positive_count(r, prefix + key_n);
            if (!(lo > 0.0)) throw InvalidArgument("grid must be positive");
            auto g = logarithmic ? log_grid(lo, hi, n) : linear_grid(lo, hi, n);
            if (g.size() > 1 && !(g.back() > g.front())) throw InvalidArgument("max must exceed min");
            return g;
        } catch (const InvalidArgument& e) {
            throw ConfigError(prefix + what, e.what());
        }
    };
    rc.d_grid = grid("sweep.", "D", "D_min", "D_max", "D_points");
    rc.family = r.parsed("sweep.family", [](const std::string& s) { return parse_family(s); });
    rc.family_values = r.reals("sweep.family_values");
    rc.tau_grid = grid("sweep.", "tau", "tau_min", "tau_max", "tau_points");
    rc.d_values = r.reals("sweep.D_values");
    for (double v : rc.d_values)
        if (!(v > 0.0)) throw ConfigError("sweep.D_values", "intensities must be positive");

    const double step = r.real("map.step");
    rc.x_l_grid = stepped("map.x_l", r.real("map.x_l_min"), r.real("map.x_l_max"), step);
    rc.x_u_grid = stepped("map.x_u", r.real("map.x_u_min"), r.real("map.x_u_max"), step);

    rc.rate_inputs = r.reals("rates.I_values");
    rc.rate_d_grid = grid("rates.", "D", "D_min", "D_max", "D_points", false);
    rc.rates.tau = tau;
    rc.rates.asymmetry = asym;
    rc.rates.mode = mode;
    rc.rates.quadrature.grid_size = r.count("rates.grid_size");
    if (rc.rates.quadrature.grid_size < 100)
        throw ConfigError("rates.grid_size", "must be at least 100");
    rc.rates.quadrature.form = r.parsed("theory.quadrature", [](const std::string& s) {
        return parse_quadrature_form(s);
    });
    rc.rates.monte_carlo = r.flag("rates.monte_carlo");
    rc.rates.mc.n_paths = r.count("rates.mc_paths");
    if (rc.rates.mc.n_paths < 100) throw ConfigError("rates.mc_paths", "must be at least 100");
    rc.rates.mc.dt = r.real("rates.mc_dt");
    rc.rates.mc.max_time = r.real("rates.mc_max_time");
    if (!(rc.rates.mc.dt > 0.0 && rc.rates.mc.max_time > rc.rates.mc.dt))
        throw ConfigError("rates.mc_dt", "need 0 < mc_dt < mc_max_time");
    rc.rates.mc.seed = ex.master_seed;

    rc.pairs = parse_pairs("trajectory.pairs", r.text("trajectory.pairs"));
    rc.decimation = positive_count(r, "trajectory.decimation");

    rc.check_samples = r.count("noise_check.samples");
    if (rc.check_samples < 100000)
        throw ConfigError("noise_check.samples", "at least 1e5 samples are required");
    rc.check_dt = r.real("noise_check.dt");
    if (!(rc.check_dt > 0.0)) throw ConfigError("noise_check.dt", "must be positive");
    return rc;
}

RunConfig parse_config(const std::filesystem::path& path) {
    ConfigBuilder builder;
    builder.load_file(path);
    return builder.build();
}

}  // namespace lsr
