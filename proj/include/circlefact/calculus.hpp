#pragma once

#include "circlefact/core_maps.hpp"

#include <cstdint>

namespace circlefact {

struct EulerianPolynomial {
    unsigned order = 0;
    std::vector<std::uint64_t> coeffs; // coefficient of q^k at index k

    double eval(double q) const;
    cplx eval(cplx q) const;
};

EulerianPolynomial eulerian_poly(unsigned s);

// s-th derivative of log Phi_n'(w; theta).
double b_derivative(unsigned n, cplx w, unsigned s, double theta);

// Bound c(s) n^s |w| (1-|w|)^{-s}, c(s) = 2 * A_{s-1}(1).
double b_derivative_bound(unsigned n, cplx w, unsigned s);

double derivative_product(const RootCoordinateSequence& coords, std::size_t N, double theta);

struct DerivativeStack {
    unsigned order = 0;
    double theta = 0.0;
    // derivs[k] = Sigma_N^{(k)}(theta); derivs[0] is the lift value.
    std::vector<double> derivs;
    // log_derivs[k] = (d/dtheta)^k log Sigma_N'(theta), k = 0..order-1.
    std::vector<double> log_derivs;
    // Optional per-step history, steps[n][k] = Sigma_n^{(k)}(theta).
    std::vector<std::vector<double>> steps;
};

DerivativeStack higher_derivative(const RootCoordinateSequence& coords, std::size_t N,
                                  unsigned s, double theta, bool keep_steps = false);

DerivativeStack higher_derivative(const CompositionChain& chain, unsigned s, double theta,
                                  bool keep_steps = false);

// Partial Bell polynomial B_{m,k}(x_1, x_2, ...), x[i-1] = x_i.
double partial_bell(unsigned m, unsigned k, const std::vector<double>& x);
// Complete Bell polynomial Y_m(x_1..x_m).
double complete_bell(unsigned m, const std::vector<double>& x);

// (1/48 pi) Re int log(d phi/dz o psi) d log(d psi/dz), trapezoidal on a
// uniform grid of the given size.
double bott_cocycle(const CompositionChain& phi, const CompositionChain& psi,
                    std::size_t grid = 4096);

} // namespace circlefact
