#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace circlefact {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Raised when an input violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a numerical procedure cannot reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Uniform grid of n angles 2*pi*i/n, i = 0..n-1.
std::vector<double> uniform_grid(std::size_t n);

// Trapezoidal mean (1/2pi) * integral over a uniform periodic grid.
double periodic_mean(const std::vector<double>& samples);

} // namespace circlefact
