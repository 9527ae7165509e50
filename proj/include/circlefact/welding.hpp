#pragma once

#include "circlefact/core_maps.hpp"
#include "circlefact/series.hpp"

#include <Eigen/Dense>

#include <functional>

namespace circlefact {

// sigma = l o (m a) o u with
//   u(z) = z (1 + sum_{k>=1} u_k z^k),      u_coeffs[k-1] = u_k
//   L(z) = z + sum_{k>=0} b_k z^{-k},       L_coeffs[k]   = b_k
// and L = l^{-1}, so that L(sigma(z)) = m a u(z) on the circle.
struct WeldingTriple {
    std::vector<cplx> u_coeffs;
    cplx m{1.0, 0.0};
    double a = 1.0;
    std::vector<cplx> L_coeffs;
    std::size_t cutoff = 0;

    cplx u(cplx z) const;
    cplx u_prime(cplx z) const;
    cplx L(cplx z) const;
    // Taylor coefficients of u: [0, 1, u_1, u_2, ...].
    series::Series u_series() const;
};

using LiftFunction = std::function<double(double)>;

LiftFunction lift_of(const CompositionChain& chain);

// sup over a uniform grid of |L(sigma(z)) - m a u(z)|.
double welding_residual(const WeldingTriple& t, const LiftFunction& sigma, std::size_t grid = 4096);
double welding_residual(const WeldingTriple& t, const CompositionChain& sigma, std::size_t grid = 4096);

// Triple of Rot(lambda) o phi_n(w).
WeldingTriple weld_phi_n(unsigned n, cplx w, cplx lambda = 1.0, std::size_t cutoff = 256);

WeldingTriple weld_identity(std::size_t cutoff = 256);

// Triple of phi o phi_1(w1) from the triple of phi.
WeldingTriple weld_compose_phi1(const WeldingTriple& t, cplx w1);

// Given the triple of psi, the triple of z^{1/n} o psi o z^n; the root of m
// is chosen to minimise the welding residual against `target`.
WeldingTriple weld_substitute(const WeldingTriple& t, unsigned n, const LiftFunction& target,
                              double tol = 1e-6);

// Chain for z^{1/n} o chain o z^n when chain has no rotation.
CompositionChain scale_indices(const CompositionChain& chain, unsigned n);

WeldingTriple weld_invert(const WeldingTriple& t, double tail_tol = 1e-12);

struct PowerOperatorMatrix {
    Eigen::MatrixXcd A;
    std::size_t quadrature_grid = 0;
    // A(m-1, k-1) = (k/m) (1/2pi) int e^{i k theta} sigma(e^{i theta})^{-m} d theta
    std::string convention = "row m, column k: (k/m) * mean(e^{ik theta} sigma^{-m})";
};

PowerOperatorMatrix power_operator(const LiftFunction& sigma, std::size_t M, std::size_t grid = 0);

struct WeldSolution {
    WeldingTriple triple;
    std::size_t M = 0;
    double rcond = 0.0;
    double drift = 0.0;
    std::vector<double> drift_history;
    double residual = 0.0;
    // largest |coefficient| of L(e^{i psi}) at positive frequencies >= 2
    double positive_leak = 0.0;
    bool converged = false;
};

WeldSolution weld_solve(const LiftFunction& sigma, double tol = 1e-10, std::size_t M_start = 32,
                        std::size_t M_max = 1024, std::size_t grid = 0);

// Inverse of a lift by bisection to the given tolerance.
double invert_lift(const LiftFunction& sigma, double y, double tol = 1e-14);

} // namespace circlefact
