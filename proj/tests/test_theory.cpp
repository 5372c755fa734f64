#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "lsr/errors.hpp"
#include "lsr/theory.hpp"

using namespace lsr;

namespace {

const PotentialParams canonical{};

// Levels ±sqrt(D / tau) at tau = 0.01; D = 0.01 gives ±1.
DichotomousNoiseSpec unit_family(double d) {
    return DichotomousNoiseSpec::from_statistics(d, 0.01, 0.0);
}

// Unnormalized density by brute-force cumulative trapezoid of
// γ F / ((F + Δ1)(F + Δ2)) from the well bottom, for zero-mean noise.
double brute_density(double x, double x0, double input, const DichotomousNoiseSpec& s) {
    auto F = [&](double y) { return drift(y, canonical) + input; };
    auto h = [&](double y) { return s.gamma() * F(y) / ((F(y) + s.delta1()) * (F(y) + s.delta2())); };
    const int n = 200000;
    const double step = (x - x0) / n;
    double integral = 0.5 * (h(x0) + h(x));
    for (int i = 1; i < n; ++i) integral += h(x0 + i * step);
    integral *= step;
    return std::exp(-integral) / std::abs((F(x) + s.delta1()) * (F(x) + s.delta2()));
}

double trapezoid(const DensityTable& t) {
    double s = 0.0;
    for (Eigen::Index j = 0; j + 1 < t.grid.size(); ++j)
        s += 0.5 * (t.grid[j + 1] - t.grid[j]) * (t.p[j] + t.p[j + 1]);
    return s;
}

}  // namespace

TEST_CASE("density support for unit levels") {
    const DichotomousNoiseSpec spec(-1.0, 1.0, 50.0, 50.0);
    const auto t = stationary_density(canonical, 0.0, spec, Well::left, 4000);
    CHECK(t.s_lo == doctest::Approx(-4.0));
    CHECK(t.s_hi == doctest::Approx(-2.0));
    CHECK(t.grid[0] > t.s_lo);
    CHECK(t.grid[t.grid.size() - 1] < t.s_hi);
    CHECK(trapezoid(t) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(t.p.minCoeff() >= 0.0);
    CHECK(t(-4.5) == 0.0);
    CHECK(t(-1.0) == 0.0);
}

TEST_CASE("density normalization across parameters") {
    for (double input : {-0.8, 0.0, 0.8}) {
        for (double d : {0.03, 0.05, 0.1}) {
            for (double a : {-1.0 / 3.0, 0.0, 1.0 / 3.0}) {
                const auto spec = DichotomousNoiseSpec::from_statistics(d, 0.01, a);
                DensityTable t;
                try {
                    t = stationary_density(canonical, input, spec, Well::left, 3000);
                } catch (const NoMetastableState&) {
                    continue;
                }
                CHECK(std::abs(trapezoid(t) - 1.0) < 1e-6);
                CHECK(t.p.minCoeff() >= 0.0);
            }
        }
    }
}

TEST_CASE("density shape matches direct quadrature") {
    const auto spec = unit_family(0.02);
    const auto t = stationary_density(canonical, 0.0, spec, Well::left, 20000);
    const double x0 = -3.0;
    const double ref = brute_density(-3.2, x0, 0.0, spec);
    for (double x : {-3.9, -3.5, -2.8, -2.0, -1.6}) {
        if (x <= t.s_lo || x >= t.s_hi) continue;
        const double expected = brute_density(x, x0, 0.0, spec) / ref;
        CHECK(t(x) / t(-3.2) == doctest::Approx(expected).epsilon(1e-3));
    }
}

TEST_CASE("right-well density is the mirror image") {
    const auto spec = DichotomousNoiseSpec::from_statistics(0.04, 0.01, 0.2);
    const auto right = stationary_density(canonical, 0.3, spec, Well::right, 4000);

    const DichotomousNoiseSpec reflected(-spec.delta2(), -spec.delta1(), spec.beta(), spec.alpha());
    const auto left = stationary_density(mirrored(canonical), -0.3, reflected, Well::left, 4000);
    CHECK(right.s_lo == doctest::Approx(-left.s_hi));
    CHECK(right.s_hi == doctest::Approx(-left.s_lo));
    for (double x = right.s_lo + 0.05; x < right.s_hi; x += 0.1)
        CHECK(right(x) == doctest::Approx(left(-x)).epsilon(1e-6));
}

TEST_CASE("no metastable state") {
    // A weak lower level cannot hold the particle against a strong tilt.
    const auto weak = DichotomousNoiseSpec::from_statistics(0.01, 0.01, 0.8);
    CHECK_THROWS_AS(stationary_density(canonical, 0.8, weak, Well::left, 1000), NoMetastableState);
    // The input removes the left well.
    CHECK_THROWS_AS(stationary_density(canonical, 2.0, unit_family(0.01), Well::left, 1000),
                    NoMetastableState);
}

TEST_CASE("quadrature rate agrees with the Monte-Carlo oracle") {
    MonteCarloOptions mc;
    mc.n_paths = 400;
    mc.dt = 1e-3;
    mc.max_time = 300.0;
    mc.seed = 17;
    struct Case {
        double input, d;
        Direction dir;
    };
    for (const Case c : {Case{0.8, 0.2, Direction::forward}, Case{0.0, 0.5, Direction::backward},
                         Case{0.4, 0.3, Direction::forward}}) {
        const auto spec = unit_family(c.d);
        const auto q = escape_rate_quadrature(canonical, c.input, spec, c.dir);
        const auto m = escape_rate_monte_carlo(canonical, c.input, DichotomousDrive{spec}, c.dir, mc);
        INFO("I=" << c.input << " D=" << c.d << " k_q=" << q.rate << " k_mc=" << m.rate);
        CHECK(std::abs(q.rate / m.rate - 1.0) < 0.2);
        CHECK(m.stderr_ / m.rate < 0.2);
    }
}

TEST_CASE("asymmetric zero-mean noise against the oracle") {
    const auto spec = DichotomousNoiseSpec::from_statistics(0.15, 0.01, 1.0 / 3.0);
    MonteCarloOptions mc;
    mc.n_paths = 400;
    mc.max_time = 300.0;
    const auto q = escape_rate_quadrature(canonical, 0.4, spec, Direction::forward);
    const auto m = escape_rate_monte_carlo(canonical, 0.4, DichotomousDrive{spec}, Direction::forward, mc);
    INFO("k_q=" << q.rate << " k_mc=" << m.rate);
    CHECK(std::abs(q.rate / m.rate - 1.0) < 0.2);
}

TEST_CASE("grid convergence") {
    const auto spec = unit_family(0.05);
    for (double input : {0.0, 0.8}) {
        QuadratureOptions coarse{10000, QuadratureForm::first_passage};
        QuadratureOptions fine{20000, QuadratureForm::first_passage};
        const double a = escape_rate_quadrature(canonical, input, spec, Direction::forward, coarse).rate;
        const double b = escape_rate_quadrature(canonical, input, spec, Direction::forward, fine).rate;
        CHECK(std::abs(a / b - 1.0) < 0.01);
    }
}

TEST_CASE("rates vanish when the upper level cannot climb the barrier") {
    for (double d : {0.01, 0.02, 0.03}) {
        CHECK(escape_rate_quadrature(canonical, 0.0, unit_family(d), Direction::forward).rate < 1e-4);
        CHECK(escape_rate_quadrature(canonical, -0.8, unit_family(d), Direction::forward).rate < 1e-4);
    }
    const auto zero = escape_rate_quadrature(canonical, 0.0, unit_family(0.01), Direction::forward);
    CHECK(zero.rate == 0.0);
    CHECK(std::isinf(zero.log_rate));
}

TEST_CASE("input ordering and direction asymmetry") {
    for (double d : {0.07, 0.1}) {
        const auto spec = unit_family(d);
        const double kf_pos = escape_rate_quadrature(canonical, 0.8, spec, Direction::forward).rate;
        const double kf_zero = escape_rate_quadrature(canonical, 0.0, spec, Direction::forward).rate;
        const double kf_neg = escape_rate_quadrature(canonical, -0.8, spec, Direction::forward).rate;
        CHECK(kf_pos > kf_zero);
        CHECK(kf_zero > kf_neg);
        const double kb_pos = escape_rate_quadrature(canonical, 0.8, spec, Direction::backward).rate;
        CHECK(kb_pos < kf_pos);
    }
    // -0.8 tilts the right well away entirely.
    CHECK_THROWS_AS(escape_rate_quadrature(canonical, -0.8, unit_family(0.1), Direction::backward),
                    NoMetastableState);
}

TEST_CASE("literal forms") {
    const auto spec = unit_family(0.05);
    QuadratureOptions literal{4000, QuadratureForm::literal};
    QuadratureOptions support{4000, QuadratureForm::literal_support};
    CHECK(escape_rate_quadrature(canonical, 0.0, spec, Direction::forward, literal).rate >= 1.0);
    CHECK(escape_rate_quadrature(canonical, 0.0, spec, Direction::forward, support).rate ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(parse_quadrature_form("literal") == QuadratureForm::literal);
    CHECK_THROWS_AS(parse_quadrature_form("simpson"), InvalidArgument);
}

TEST_CASE("steepest descent") {
    SUBCASE("agrees with quadrature within a factor of two at small D") {
        for (double d : {0.01, 0.02, 0.03, 0.04, 0.05}) {
            const auto spec = unit_family(d);
            const double q = escape_rate_quadrature(canonical, 0.8, spec, Direction::forward).rate;
            const double s = escape_rate_steepest_descent(canonical, 0.8, spec).rate;
            INFO("D=" << d << " q=" << q << " s=" << s);
            CHECK(s / q < 2.0);
            CHECK(q / s < 2.0);
        }
    }
    SUBCASE("action equals direct quadrature of the integrand") {
        const auto spec = unit_family(0.05);
        const auto w = tilted_fixed_points(canonical, 0.0);
        const int n = 200000;
        const double lo = *w.left, hi = *w.top, h = (hi - lo) / n;
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = lo + (i + 0.5) * h;
            const double f = drift(x, canonical);
            s += f / ((f + spec.delta1()) * (f + spec.delta2()));
        }
        CHECK(action(canonical, 0.0, spec) == doctest::Approx(s * h).epsilon(1e-6));
    }
    SUBCASE("action is non-negative for uphill climbs") {
        for (double input : {-0.4, 0.0, 0.4, 0.8})
            for (double d : {0.05, 0.1, 0.3})
                for (double tau : {0.001, 0.01}) {
                    const auto spec = DichotomousNoiseSpec::from_statistics(d, tau, 0.0);
                    try {
                        CHECK(action(canonical, input, spec) >= 0.0);
                    } catch (const DivergentAction&) {
                    }
                }
    }
    SUBCASE("white-noise limit of the prefactor") {
        const auto spec = DichotomousNoiseSpec::from_statistics(0.1, 1e-7, 0.0);
        const auto r = escape_rate_steepest_descent(canonical, 0.0, spec);
        const double prefactor = std::exp(r.log_rate + action(canonical, 0.0, spec) / spec.tau());
        CHECK(prefactor == doctest::Approx(std::sqrt(1.0 * 1.0) / (2 * std::numbers::pi)).epsilon(1e-5));
    }
    SUBCASE("divergent action is located") {
        try {
            escape_rate_steepest_descent(canonical, 0.0, unit_family(0.01));
            FAIL("expected DivergentAction");
        } catch (const DivergentAction& e) {
            CHECK(e.location() == doctest::Approx(-2.0));
        }
    }
}

TEST_CASE("Monte-Carlo oracle") {
    MonteCarloOptions mc;
    mc.n_paths = 100;
    mc.dt = 0.01;
    mc.max_time = 50.0;
    SUBCASE("no noise never escapes") {
        try {
            escape_rate_monte_carlo(canonical, 0.0, WhiteNoiseDrive{0.0}, Direction::forward, mc);
            FAIL("expected AllCensored");
        } catch (const AllCensored& e) {
            CHECK(e.upper_bound() == doctest::Approx(1.0 / (100 * 50.0)));
        }
    }
    SUBCASE("results do not depend on the thread count") {
        const auto spec = unit_family(0.3);
        mc.threads = 1;
        const auto a = escape_rate_monte_carlo(canonical, 0.8, DichotomousDrive{spec}, Direction::forward, mc);
        mc.threads = 3;
        const auto b = escape_rate_monte_carlo(canonical, 0.8, DichotomousDrive{spec}, Direction::forward, mc);
        CHECK(a.rate == b.rate);
        CHECK(a.stderr_ == b.stderr_);
    }
    SUBCASE("forward beats backward under positive input") {
        mc.max_time = 200.0;
        const auto spec = unit_family(0.3);
        const auto f = escape_rate_monte_carlo(canonical, 0.8, DichotomousDrive{spec}, Direction::forward, mc);
        double kb = 0.0;
        try {
            kb = escape_rate_monte_carlo(canonical, 0.8, DichotomousDrive{spec}, Direction::backward, mc).rate;
        } catch (const AllCensored& e) {
            kb = e.upper_bound();
        }
        CHECK(kb < f.rate);
    }
    SUBCASE("path count is enforced") {
        mc.n_paths = 10;
        CHECK_THROWS_AS(escape_rate_monte_carlo(canonical, 0.0, WhiteNoiseDrive{1.0}, Direction::forward, mc),
                        InvalidArgument);
    }
}

TEST_CASE("rate csv") {
    std::ostringstream out;
    const RateRow row{0.05, 0.8, 0.01, 0.0, RateMethod::quadrature, 1e-3, 2e-9, 0.0, false};
    write_rate_csv(out, std::span(&row, 1));
    CHECK(out.str().rfind("D,I,tau,A,method,k_f,k_b,stderr\n0.05,0.8,0.01,0,quadrature,", 0) == 0);
}
