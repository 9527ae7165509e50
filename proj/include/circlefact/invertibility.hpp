#pragma once

#include "circlefact/core_maps.hpp"

namespace circlefact {

enum class Invertibility { invertible, not_invertible, undecided };
enum class CollapseVerdict { collapsed, separated, undecided };
enum class SeriesVerdict { convergent, divergent, hypothesis_violated };

std::string to_string(Invertibility v);
std::string to_string(CollapseVerdict v);
std::string to_string(SeriesVerdict v);

Invertibility classify_rule(const MagnitudeRule& rule);
Invertibility classify_rule(const std::optional<MagnitudeRule>& rule);

struct CollapseTrace {
    double theta = 0.0;
    double x0 = 0.0;
    double tol = 1e-9;
    std::vector<double> D;  // D_0..D_N
    std::vector<double> U;  // U_1..U_N (index 0 unused, set to 1)
    std::vector<double> p;  // p_0..p_N
    double b_estimate = 0.0;
    CollapseVerdict verdict = CollapseVerdict::undecided;
};

// d_n(x) for a single factor with parameter w at base point Sigma_{n-1}(theta) = base.
double collapse_step(unsigned n, cplx w, double base, double x);

CollapseTrace collapse_probe(const RootCoordinateSequence& coords, double theta, double x0,
                             std::size_t N_max, double tol = 1e-9, bool keep_trace = true);

struct IntervalBounds {
    double a = 0.0;
    double b = 0.0;
    double tail = 0.0;
};

// Points a_N >= theta >= b_N outside the fiber of Sigma through theta.
IntervalBounds interval_bounds(const RootCoordinateSequence& coords, double theta, std::size_t N);

// Inverse of the finite composition Sigma_N at y, by bisection.
double sigma_inverse(const RootCoordinateSequence& coords, std::size_t N, double y,
                     double tol = 1e-12);

struct Thm14Report {
    std::vector<std::size_t> n;
    std::vector<double> s;                 // s_n
    std::vector<double> summand_statement; // sqrt(2 pi s_n) * loglog s_n variant
    std::vector<double> summand_proof;     // sqrt(2 pi s_n loglog s_n) variant
    std::vector<double> partial_statement;
    std::vector<double> partial_proof;
    double power_slope = 0.0;
    SeriesVerdict verdict = SeriesVerdict::hypothesis_violated;
};

Thm14Report thm14_report(const MagnitudeRule& rule, std::size_t N_max);

// One step of c_n = U_n c_{n-1} (1 + n r_n B U_n c_{n-1}).
double thm14_c_step(double c_prev, double U, std::size_t n, double r, double B);

// max over (theta, t) of the quasisymmetry ratio and its reciprocal.
double qs_ratio(const CircleLift& lift, const std::vector<std::size_t>& t_steps);

} // namespace circlefact
