#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ood/conformal.hpp"
#include "ood/error.hpp"
#include "ood/multiple_testing.hpp"
#include "ood/numerics.hpp"
#include "support/ks.hpp"

using ood::CalibrationSet;
using ood::conformal_p_value;
using ood::NullCdf;
using ood::oracle_p_value;

TEST_CASE("conformal_p_value hand examples") {
    const std::vector<double> cal{0.1, 0.5, 0.9};
    CHECK(conformal_p_value(cal, 0.7) == doctest::Approx(0.5));   // one exceedance
    CHECK(conformal_p_value(cal, 5.0) == doctest::Approx(0.25));  // none: 1/(1+n)
    CHECK(conformal_p_value(cal, 0.05) == doctest::Approx(1.0));  // all exceed
    // Ties count toward the ">=" set.
    CHECK(conformal_p_value(cal, 0.5) == doctest::Approx(0.75));
    CHECK_THROWS_AS(conformal_p_value({}, 0.0), ood::ConfigError);
}

TEST_CASE("conformal_p_value is non-increasing in t") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    std::vector<double> cal(57);
    for (auto& v : cal) v = z(rng);
    double prev = 2.0;
    for (double t = -4.0; t <= 4.0; t += 0.01) {
        const double p = conformal_p_value(cal, t);
        CHECK(p <= prev);
        prev = p;
    }
}

TEST_CASE("CalibrationSet columns and component-wise p-values") {
    const CalibrationSet cal({"a", "b"}, {{1, 2, 3}, {10, 20, 30}});
    CHECK(cal.k() == 2);
    CHECK(cal.n_cal() == 3);

    const auto p = cal.p_values({2.5, 5.0});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(1.0));

    // Determinism: identical inputs give identical outputs.
    CHECK(cal.p_values({2.5, 5.0}) == p);

    // K = 1 reduces to the scalar definition.
    const CalibrationSet single({"a"}, {{1, 2, 3}});
    CHECK(single.p_values({2.5})[0] == conformal_p_value({1, 2, 3}, 2.5));

    CHECK_THROWS_AS(cal.p_values({1.0}), ood::ConfigError);
}

TEST_CASE("CalibrationSet validation rejects bad input") {
    CHECK_THROWS_AS(CalibrationSet({"a", "b"}, {{1, 2}, {1}}), ood::ConfigError);
    CHECK_THROWS_AS(CalibrationSet({"a"}, {{1, std::nan(""), 2}}), ood::ConfigError);
    CHECK_THROWS_AS(CalibrationSet({"a"}, {{}}), ood::ConfigError);
    CHECK_THROWS_AS(CalibrationSet({}, {}), ood::ConfigError);
}

TEST_CASE("sorted and linear exceedance counting are bit-identical") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> z;
    std::vector<double> col(301);
    for (auto& v : col) v = z(rng);
    // Inject exact duplicates so tie handling is exercised.
    for (int i = 0; i < 30; ++i) col[static_cast<std::size_t>(i) * 10] = col[0];

    const CalibrationSet cal({"s"}, {col});
    for (int i = 0; i < 2000; ++i) {
        const double t = (i % 3 == 0) ? col[static_cast<std::size_t>(i) % col.size()]
                                      : z(rng) * 2.0;
        CHECK(cal.p_value(0, t) == conformal_p_value(col, t));
    }
}

TEST_CASE("marginal super-uniformity over fresh calibration draws") {
    // With n_cal = 99, P{Q <= t} = floor(t * 100)/100 = t exactly for the
    // levels below, so the empirical rate must stay within the Monte Carlo
    // band around t.
    const std::size_t n_cal = 99;
    const int draws = 20000;
    std::mt19937_64 rng(20240613);
    std::normal_distribution<double> z;

    const std::vector<double> levels{0.05, 0.1, 0.25, 0.5};
    std::vector<int> hits(levels.size(), 0);
    std::vector<double> cal(n_cal);
    for (int d = 0; d < draws; ++d) {
        for (auto& v : cal) v = z(rng);
        const double q = conformal_p_value(cal, z(rng));
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (q <= levels[i]) ++hits[i];
        }
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double freq = static_cast<double>(hits[i]) / draws;
        const double band = 3.0 * std::sqrt(levels[i] * (1.0 - levels[i]) / draws);
        CHECK(freq <= levels[i] + band);
    }
}

TEST_CASE("conditional exceedance probability follows the Beta law") {
    // At threshold level alpha_j the probability P(Q <= alpha_j | T_cal) is
    // Psi applied to an order statistic, hence Beta(a_j, b_j) distributed
    // across calibration draws. Checked by KS at the 1% level.
    const long long n_cal = 500;
    const double alpha = 0.1;
    const double epsilon = 1.0;
    const int k = 5;
    const double c_k = ood::correction_constant(k, epsilon);

    std::mt19937_64 rng(20240617);
    std::normal_distribution<double> z;

    for (int j : {1, k}) {
        const double alpha_j = alpha * j / (c_k * k);
        const auto a = static_cast<long long>(std::floor((n_cal + 1) * alpha_j));
        REQUIRE(a >= 1);
        const long long b = (n_cal + 1) - a;

        std::vector<double> r_sample;
        r_sample.reserve(2000);
        std::vector<double> cal(n_cal);
        for (int d = 0; d < 2000; ++d) {
            for (auto& v : cal) v = z(rng);
            std::sort(cal.begin(), cal.end());
            // P(Q <= alpha_j | cal) = Psi(a-th largest calibration score).
            r_sample.push_back(ood::normal_sf(cal[static_cast<std::size_t>(n_cal - a)]));
        }

        const ood::BetaParams params(a, b);
        const double d_stat = ks::statistic(
            r_sample, [&](double x) { return ood::reg_inc_beta(std::clamp(x, 0.0, 1.0), params); });
        const double p = ks::p_value(d_stat, r_sample.size());
        INFO("j=", j, " a=", a, " b=", b, " D=", d_stat, " p=", p);
        CHECK(p >= 0.01);
    }
}

TEST_CASE("oracle p-values for the analytic null families") {
    CHECK(oracle_p_value(NullCdf::standard_normal(), 0.0) == doctest::Approx(0.5));
    CHECK(oracle_p_value(NullCdf::standard_normal(), 1.6449) ==
          doctest::Approx(0.05).epsilon(1e-3));
    CHECK(oracle_p_value(NullCdf::normal(2.0, 1.0), 2.0) == doctest::Approx(0.5));
    CHECK(oracle_p_value(NullCdf::normal(1.0, 2.0), 5.0) ==
          doctest::Approx(ood::normal_sf(2.0)));
}

TEST_CASE("null CDF parsing") {
    CHECK(NullCdf::parse("standard_normal").family == NullCdf::Family::StandardNormal);
    const auto n = NullCdf::parse("normal(2.0,0.5)");
    CHECK(n.mu == doctest::Approx(2.0));
    CHECK(n.sigma == doctest::Approx(0.5));
    CHECK_THROWS_AS(NullCdf::parse("cauchy(0,1)"), ood::ConfigError);
    CHECK_THROWS_AS(NullCdf::parse("normal(0,-1)"), ood::ConfigError);
    CHECK_THROWS_AS(NullCdf::normal(0.0, 0.0), ood::ConfigError);
}
