#pragma once

#include "circlefact/core_maps.hpp"
#include "circlefact/invertibility.hpp"

#include <cstdint>
#include <functional>
#include <random>

namespace circlefact {

// a(n) = slope * n + offset for the measure ((a+1)/pi)(1-|w|^2)^a dA.
struct BetaRule {
    double slope = 1.0;
    double offset = 0.0;
    double a(std::size_t n) const { return slope * static_cast<double>(n) + offset; }
};

struct RandomModel {
    enum class Kind { magnitude, beta };
    Kind kind = Kind::magnitude;
    MagnitudeRule magnitude;
    BetaRule beta;
    bool uniform_phases = true;
    std::uint64_t seed = 0;
};

// Independent engine per (seed, trial).
std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial);
// Uniform double in [0,1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& eng);

RootCoordinateSequence sample_uniform_phases(const MagnitudeRule& rule, std::uint64_t seed,
                                             std::size_t N, std::uint64_t trial = 0);
RootCoordinateSequence sample_beta_measure(const BetaRule& rule, std::uint64_t seed,
                                           std::size_t N, std::uint64_t trial = 0);
RootCoordinateSequence sample_model(const RandomModel& model, std::size_t N, std::uint64_t trial);

struct KakutaniResult {
    double log_overlap = 0.0;
    double overlap = 1.0;
    double criterion = 0.0;  // partial sum of (a-a')^2/(a a')
    double tail_slope = 0.0; // log-log slope of criterion terms over the tail
    bool equivalent = true;
};

KakutaniResult kakutani_overlap(const BetaRule& a, const BetaRule& b, std::size_t N_max);

struct Proportion {
    std::size_t successes = 0;
    std::size_t trials = 0;
    double fraction = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

Proportion wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

struct McInvertibility {
    Proportion collapsed;
    std::vector<CollapseVerdict> verdicts;
    std::vector<double> log10_ratio; // log10(D_N / x0) per trial
};

McInvertibility mc_invertibility(const RandomModel& model, double theta, double x0,
                                 std::size_t N_max, std::size_t trials, double tol = 1e-9,
                                 unsigned threads = 1);

struct DecayRow {
    std::size_t N = 0;
    double mean = 0.0;
    double variance = 0.0;
    double median = 0.0;
    double expected_mean = 0.0;     // sum log(1 - r_n^2)
    double expected_variance = 0.0; // sum 2 Li2(r_n^2)
    double s = 0.0;                 // sum r_n^2
    double envelope = 0.0;          // sqrt(2 V loglog V), loglog floored at 1
    double fraction_small = 0.0;    // fraction with Sigma'_N < threshold
};

// Statistics of log Sigma'_N(theta). With compose = false the per-factor
// angles are drawn i.i.d. uniform; otherwise random coordinates are sampled
// and Sigma'_N(theta) is evaluated through the composition.
std::vector<DecayRow> mc_derivative_decay(const RandomModel& model, double theta,
                                          const std::vector<std::size_t>& schedule,
                                          std::size_t trials, double threshold = 1e-6,
                                          bool compose = false, unsigned threads = 1);

struct WeakStarEstimate {
    std::vector<std::size_t> schedule;
    std::vector<CircleLift> lifts;
    // oscillation[j][i]: max - min of Sigma_{N_l}(theta_i) over l >= j.
    std::vector<std::vector<double>> oscillation;
    std::vector<double> mean_oscillation;
    bool all_monotone = true;
};

WeakStarEstimate weakstar_estimate(const RandomModel& model, const std::vector<double>& thetas,
                                   const std::vector<std::size_t>& schedule);

// Li2(y) = sum y^k / k^2 for |y| <= 1.
double dilog_series(double y);

struct MomentCheck {
    double mean = 0.0;
    double second = 0.0;
    double expected_second = 0.0;
};

// Quadrature moments of X = -log(1 + 2 rho cos v + rho^2) under uniform v.
MomentCheck log_modulus_moments(double rho, std::size_t grid = 4096);

} // namespace circlefact
