#pragma once

#include "circlefact/common.hpp"

namespace circlefact {

// Polynomial coefficients, index k holds the coefficient of z^k.
using Polynomial = std::vector<cplx>;

// alpha_1, alpha_2, ... with p_n(0) = -conj(alpha_n).
struct VerblunskySequence {
    std::vector<cplx> alphas;
    std::string convention = "alpha_n = -conj(p_n(0)), n >= 1";
};

// c_k = (1/2pi) int e^{-ik theta} d mu, c_0 = 1.
struct MomentSequence {
    std::vector<cplx> c;
};

// Monic ladder p_0..p_N from p_n = z p_{n-1} - conj(alpha_n) z^{n-1} p*_{n-1}.
std::vector<Polynomial> szego_recursion(const std::vector<cplx>& alphas, std::size_t N);

cplx poly_eval(const Polynomial& p, cplx z);

// Density of the measure with finitely supported Verblunsky coefficients,
// relative to d theta / 2pi.
std::vector<double> verblunsky_to_measure(const std::vector<cplx>& alphas,
                                          const std::vector<double>& thetas);

MomentSequence moments_from_density(const std::vector<double>& density, std::size_t K);

VerblunskySequence measure_to_verblunsky(const MomentSequence& moments, std::size_t N);
VerblunskySequence measure_to_verblunsky(const std::vector<double>& density, std::size_t N);

struct ToeplitzCheck {
    double det = 1.0;
    double product = 1.0;
    double residual = 0.0;
};

// det (c_{i-j})_{1<=i,j<=N} against prod (1 - |alpha_n|^2)^{N-n}.
ToeplitzCheck toeplitz_det(const MomentSequence& moments, std::size_t N);

struct IdentityCheck {
    double lhs = 1.0;
    double rhs = 1.0;
    double residual = 0.0;
};

IdentityCheck szego_identity_check(const std::vector<cplx>& alphas, std::size_t grid = 4096);

// terms = number of Fourier modes k used in sum k |f_k|^2; 0 means all.
IdentityCheck ibragimov_identity_check(const std::vector<cplx>& alphas, std::size_t grid = 4096,
                                       std::size_t terms = 0);

double rsf_opuc_crosscheck(unsigned N, cplx w, std::size_t grid = 4096);

} // namespace circlefact
