#pragma once

#include "circlefact/common.hpp"

namespace circlefact::series {

// Truncated power series: s[k] is the coefficient of x^k.
using Series = std::vector<cplx>;

Series truncate(Series a, std::size_t M);
Series multiply(const Series& a, const Series& b, std::size_t M);
Series reciprocal(const Series& a, std::size_t M);
// log(a) for a[0] = 1.
Series log(const Series& a, std::size_t M);
// exp(a) for a[0] = 0.
Series exp(const Series& a, std::size_t M);
// a^alpha for a[0] = 1, via exp(alpha log a).
Series power(const Series& a, double alpha, std::size_t M);
// a(h(x)) for h[0] = 0.
Series compose(const Series& a, const Series& h, std::size_t M);
// Coefficients of a(c + x), i.e. the Taylor expansion around c.
Series taylor_shift(const Series& a, cplx c);

cplx eval(const Series& a, cplx x);
cplx eval_derivative(const Series& a, cplx x);

// Largest |a_k| |r|^k over the last `window` coefficients.
double tail_size(const Series& a, double r, std::size_t window);

} // namespace circlefact::series
