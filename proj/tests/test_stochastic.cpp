#include "doctest.h"

#include "circlefact/stochastic.hpp"

#include <algorithm>
#include <cmath>

using namespace circlefact;

namespace {

// Asymptotic Kolmogorov tail probability for statistic D on n samples.
double ks_pvalue(double D, std::size_t n)
{
    const double sn = std::sqrt(static_cast<double>(n));
    const double lam = (sn + 0.12 + 0.11 / sn) * D;
    double q = 0.0;
    for (int k = 1; k < 200; ++k)
        q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    return std::clamp(q, 0.0, 1.0);
}

} // namespace

TEST_SUITE("stochastic")
{
    TEST_CASE("uniform phase sampling")
    {
        const RootCoordinateSequence zero = sample_uniform_phases(MagnitudeRule{0.0, -1.0}, 3, 50);
        for (std::size_t n = 1; n <= 50; ++n)
            CHECK(zero.coefficient(n) == cplx{});

        const std::size_t N = 10000;
        const RootCoordinateSequence s = sample_uniform_phases(MagnitudeRule{0.5, 0.0}, 42, N);
        std::vector<double> u;
        for (std::size_t n = 1; n <= N; ++n) {
            CHECK(std::abs(s.magnitude(n) - 0.5) < 1e-15);
            u.push_back(std::fmod(std::arg(s.coefficient(n)) + kTwoPi, kTwoPi) / kTwoPi);
        }
        std::sort(u.begin(), u.end());
        double D = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            D = std::max({D, (i + 1.0) / N - u[i], u[i] - static_cast<double>(i) / N});
        CHECK(ks_pvalue(D, N) > 0.01);

        const RootCoordinateSequence again = sample_uniform_phases(MagnitudeRule{0.5, 0.0}, 42, N);
        CHECK(again.terms() == s.terms());
        const RootCoordinateSequence other = sample_uniform_phases(MagnitudeRule{0.5, 0.0}, 42, N, 1);
        CHECK(other.terms() != s.terms());
        CHECK_THROWS_AS(sample_uniform_phases(MagnitudeRule{2.0, 0.0}, 1, 3), PreconditionError);
    }

    TEST_CASE("beta measure moments")
    {
        const std::size_t N = 100000;
        const RootCoordinateSequence s = sample_beta_measure(BetaRule{0.0, 1.0}, 9, N);
        double m = 0.0, q = 0.0;
        for (std::size_t n = 1; n <= N; ++n) {
            const double x = 1.0 - std::norm(s.coefficient(n));
            m += x;
            q += x * x;
        }
        m /= N;
        const double se = std::sqrt((q / N - m * m) / N);
        CHECK(std::abs(m - 2.0 / 3.0) < 3.0 * se);

        const RootCoordinateSequence big = sample_beta_measure(BetaRule{0.0, 200.0}, 9, N);
        double r2 = 0.0;
        for (std::size_t n = 1; n <= N; ++n)
            r2 += std::norm(big.coefficient(n));
        CHECK(r2 / N == doctest::Approx(1.0 / 202.0).epsilon(0.02));

        CHECK(sample_beta_measure(BetaRule{1.0, 0.0}, 5, 100).terms() ==
              sample_beta_measure(BetaRule{1.0, 0.0}, 5, 100).terms());
        CHECK_THROWS_AS(sample_beta_measure(BetaRule{0.0, -1.0}, 5, 3), PreconditionError);
    }

    TEST_CASE("Kakutani dichotomy")
    {
        const KakutaniResult same = kakutani_overlap(BetaRule{1.0, 0.0}, BetaRule{1.0, 0.0}, 10000);
        CHECK(same.overlap == 1.0);
        CHECK(same.equivalent);

        const KakutaniResult near = kakutani_overlap(BetaRule{1.0, 0.0}, BetaRule{1.0, 1.0}, 100000);
        CHECK(near.equivalent);
        CHECK(near.overlap > 0.0);
        CHECK(near.criterion == doctest::Approx(1.0 - 1.0 / 100001.0).epsilon(1e-9));

        const KakutaniResult far = kakutani_overlap(BetaRule{1.0, 0.0}, BetaRule{2.0, 0.0}, 100000);
        CHECK_FALSE(far.equivalent);
        CHECK(far.overlap < 1e-100);
        CHECK(far.criterion == doctest::Approx(0.5 * 100000).epsilon(1e-9));
    }

    TEST_CASE("Wilson interval")
    {
        const Proportion none = wilson_interval(0, 200);
        const double z2 = 1.959963984540054 * 1.959963984540054;
        CHECK(none.lower == 0.0);
        CHECK(none.upper == doctest::Approx(z2 / (200.0 + z2)).epsilon(1e-14));
        const Proportion all = wilson_interval(200, 200);
        CHECK(all.upper == 1.0);
        CHECK(all.lower == doctest::Approx(200.0 / (200.0 + z2)).epsilon(1e-14));
        const Proportion half = wilson_interval(50, 100);
        CHECK(half.lower + half.upper == doctest::Approx(1.0));
    }

    TEST_CASE("parallel_for is deterministic and propagates errors")
    {
        std::vector<double> a(1000), b(1000);
        parallel_for(1000, 1, [&](std::size_t i) { a[i] = std::sin(double(i)); });
        parallel_for(1000, 7, [&](std::size_t i) { b[i] = std::sin(double(i)); });
        CHECK(a == b);
        CHECK_THROWS_AS(parallel_for(10, 4,
                                     [](std::size_t i) {
                                         if (i == 7)
                                             throw NumericalError("boom");
                                     }),
                        NumericalError);
    }

    TEST_CASE("Monte Carlo invertibility")
    {
        RandomModel zero;
        zero.magnitude = MagnitudeRule{0.0, -1.0};
        const McInvertibility r = mc_invertibility(zero, 0.0, 0.01, 1000, 20);
        CHECK(r.collapsed.successes == 0);

        RandomModel m;
        m.magnitude = MagnitudeRule::parse("n^-0.6@2");
        m.seed = 3;
        const McInvertibility one = mc_invertibility(m, 0.0, 0.01, 2000, 8, 1e-9, 1);
        const McInvertibility many = mc_invertibility(m, 0.0, 0.01, 2000, 8, 1e-9, 4);
        CHECK(one.log10_ratio == many.log10_ratio);
    }

    TEST_CASE("derivative decay statistics")
    {
        RandomModel zero;
        zero.magnitude = MagnitudeRule{0.0, -1.0};
        for (const DecayRow& row : mc_derivative_decay(zero, 1.0, {10, 100}, 10)) {
            CHECK(row.mean == 0.0);
            CHECK(row.variance == 0.0);
        }

        RandomModel single;
        single.magnitude = MagnitudeRule{0.5, 0.0};
        single.seed = 17;
        const std::size_t T = 40000;
        const DecayRow row = mc_derivative_decay(single, 1.0, {1}, T).front();
        double expected = 0.0;
        for (int k = 1; k < 60; ++k)
            expected += 2.0 * std::pow(0.25, k) / (double(k) * k);
        CHECK(row.expected_variance == doctest::Approx(expected).epsilon(1e-14));
        CHECK(expected == doctest::Approx(0.53531).epsilon(1e-4));
        // Sample-variance standard error from the fourth central moment of a large reference run.
        const DecayRow ref = mc_derivative_decay(single, 1.0, {1}, 4 * T).front();
        const double mu4_bound = 9.0 * ref.variance * ref.variance;
        CHECK(std::abs(row.variance - expected) < 3.0 * std::sqrt(mu4_bound / T));
        CHECK(std::abs(row.mean - std::log(0.75)) < 3.0 * std::sqrt(row.variance / T));

        RandomModel half;
        half.magnitude = MagnitudeRule::parse("1/sqrt(n)@2");
        half.seed = 5;
        const auto rows = mc_derivative_decay(half, 1.0, {100, 1000, 10000}, 200);
        CHECK(rows[0].fraction_small <= rows[1].fraction_small);
        CHECK(rows[1].fraction_small <= rows[2].fraction_small);
        CHECK(rows[2].fraction_small > rows[0].fraction_small);

        const auto composed = mc_derivative_decay(half, 1.0, {50, 200}, 30, 1e-6, true);
        const auto composed2 = mc_derivative_decay(half, 1.0, {50, 200}, 30, 1e-6, true, 3);
        CHECK(composed[1].mean == composed2[1].mean);
        CHECK(composed[1].mean < composed[0].mean);
    }

    TEST_CASE("weak-star diagnostics")
    {
        RandomModel finite;
        finite.magnitude = MagnitudeRule{0.3, 0.0};
        finite.uniform_phases = false;
        const std::vector<double> g = uniform_grid(128);
        const WeakStarEstimate e = weakstar_estimate(finite, g, {4, 8, 16});
        CHECK(e.all_monotone);

        RandomModel unit;
        unit.magnitude = MagnitudeRule{1.0, 0.0};
        unit.seed = 8;
        const WeakStarEstimate u = weakstar_estimate(unit, g, {8, 16, 32, 64});
        CHECK(u.all_monotone);
        for (std::size_t j = 1; j < u.mean_oscillation.size(); ++j)
            CHECK(u.mean_oscillation[j] <= u.mean_oscillation[j - 1]);
        CHECK(u.mean_oscillation.back() == 0.0);
    }

    TEST_CASE("dilogarithm and log-modulus moments")
    {
        CHECK(dilog_series(1.0) == doctest::Approx(kPi * kPi / 6.0).epsilon(1e-15));
        CHECK(dilog_series(0.5) == doctest::Approx(kPi * kPi / 12.0 - 0.5 * std::log(2.0) * std::log(2.0)).epsilon(1e-15));
        CHECK(dilog_series(-1.0) == doctest::Approx(-kPi * kPi / 12.0).epsilon(1e-9));
        for (double rho : {0.1, 0.5, 0.9}) {
            const MomentCheck m = log_modulus_moments(rho);
            CHECK(std::abs(m.mean) < 1e-10);
            CHECK(std::abs(m.second - m.expected_second) < 1e-8);
        }
    }
}
