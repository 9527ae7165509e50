#include "circlefact/calculus.hpp"

#include <cmath>

namespace circlefact {

double EulerianPolynomial::eval(double q) const
{
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        acc = acc * q + static_cast<double>(*it);
    return acc;
}

cplx EulerianPolynomial::eval(cplx q) const
{
    cplx acc{};
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        acc = acc * q + static_cast<double>(*it);
    return acc;
}

EulerianPolynomial eulerian_poly(unsigned s)
{
    std::vector<std::uint64_t> a{1};
    for (unsigned n = 1; n <= s; ++n) {
        std::vector<std::uint64_t> next(n, 0);
        for (unsigned m = 0; m < n; ++m) {
            const std::uint64_t keep = m < a.size() ? a[m] : 0;
            const std::uint64_t shift = (m >= 1 && m - 1 < a.size()) ? a[m - 1] : 0;
            next[m] = (m + 1) * keep + (n - m) * shift;
        }
        a = std::move(next);
    }
    return {s, a};
}

double b_derivative(unsigned n, cplx w, unsigned s, double theta)
{
    if (std::abs(w) >= 1.0)
        throw PreconditionError("b_derivative requires |w| < 1");
    if (s == 0)
        throw PreconditionError("b_derivative order must be at least 1");
    const double nn = static_cast<double>(n);
    const cplx g = w * std::polar(1.0, nn * theta);
    const cplx in(0.0, nn);
    const cplx value = std::pow(in, static_cast<int>(s)) * g * eulerian_poly(s - 1).eval(-g) /
                       std::pow(1.0 + g, static_cast<int>(s));
    return -2.0 * value.real();
}

double b_derivative_bound(unsigned n, cplx w, unsigned s)
{
    const double r = std::abs(w);
    const double cs = 2.0 * eulerian_poly(s - 1).eval(1.0);
    return cs * std::pow(static_cast<double>(n), static_cast<double>(s)) * r /
           std::pow(1.0 - r, static_cast<double>(s));
}

double partial_bell(unsigned m, unsigned k, const std::vector<double>& x)
{
    // B[i][j] for i <= m, j <= k via B_{i,j} = sum_l C(i-1,l-1) x_l B_{i-l,j-1}.
    std::vector<std::vector<double>> B(m + 1, std::vector<double>(k + 1, 0.0));
    B[0][0] = 1.0;
    std::vector<std::vector<double>> C(m + 1, std::vector<double>(m + 1, 0.0));
    for (unsigned i = 0; i <= m; ++i) {
        C[i][0] = 1.0;
        for (unsigned j = 1; j <= i; ++j)
            C[i][j] = C[i - 1][j - 1] + (j <= i - 1 ? C[i - 1][j] : 0.0);
    }
    for (unsigned i = 1; i <= m; ++i)
        for (unsigned j = 1; j <= std::min(i, k); ++j) {
            double acc = 0.0;
            for (unsigned l = 1; l + j - 1 <= i; ++l)
                if (l - 1 < x.size())
                    acc += C[i - 1][l - 1] * x[l - 1] * B[i - l][j - 1];
            B[i][j] = acc;
        }
    return B[m][k];
}

double complete_bell(unsigned m, const std::vector<double>& x)
{
    if (m == 0)
        return 1.0;
    double acc = 0.0;
    for (unsigned k = 1; k <= m; ++k)
        acc += partial_bell(m, k, x);
    return acc;
}

namespace {

// Sigma^{(1..s)} from log-derivatives L_0..L_{s-1} of Sigma'.
std::vector<double> derivs_from_logs(const std::vector<double>& L, unsigned s)
{
    std::vector<double> d(s + 1, 0.0);
    const double e = std::exp(L[0]);
    std::vector<double> tail(L.begin() + 1, L.end());
    for (unsigned j = 0; j < s; ++j)
        d[j + 1] = e * complete_bell(j, tail);
    return d;
}

} // namespace

DerivativeStack higher_derivative(const CompositionChain& chain, unsigned s, double theta,
                                  bool keep_steps)
{
    if (s == 0)
        throw PreconditionError("derivative order must be at least 1");
    if (!chain.open_disk())
        throw PreconditionError("higher_derivative requires open-disk parameters");
    DerivativeStack st;
    st.order = s;
    st.theta = theta;
    std::vector<double> L(s, 0.0);
    double x = theta;
    auto snapshot = [&]() {
        std::vector<double> d = derivs_from_logs(L, s);
        d[0] = x;
        return d;
    };
    if (keep_steps)
        st.steps.push_back(snapshot());
    for (const auto& step : chain.steps) {
        const std::vector<double> S = derivs_from_logs(L, s);
        const std::vector<double> args(S.begin() + 1, S.end());
        const cplx g = step.w * std::polar(1.0, static_cast<double>(step.n) * x);
        L[0] += std::log1p(-std::norm(step.w)) - std::log(std::norm(1.0 + g));
        for (unsigned j = 1; j < s; ++j) {
            double acc = 0.0;
            for (unsigned k = 1; k <= j; ++k)
                acc += b_derivative(step.n, step.w, k, x) * partial_bell(j, k, args);
            L[j] += acc;
        }
        x = phi_lift(step.n, step.w, x);
        if (keep_steps)
            st.steps.push_back(snapshot());
    }
    st.derivs = derivs_from_logs(L, s);
    st.derivs[0] = x + chain.rotation;
    st.log_derivs = L;
    return st;
}

DerivativeStack higher_derivative(const RootCoordinateSequence& coords, std::size_t N,
                                  unsigned s, double theta, bool keep_steps)
{
    coords.require_open_disk(N);
    return higher_derivative(chain_from(coords, N), s, theta, keep_steps);
}

double derivative_product(const RootCoordinateSequence& coords, std::size_t N, double theta)
{
    return higher_derivative(coords, N, 1, theta).derivs[1];
}

double bott_cocycle(const CompositionChain& phi, const CompositionChain& psi, std::size_t grid)
{
    if (!phi.open_disk() || !psi.open_disk())
        throw PreconditionError("cocycle requires smooth maps (open-disk parameters)");
    std::vector<double> integrand(grid);
    const std::vector<double> th = uniform_grid(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        const LiftJet p = psi.jet(th[i]);
        const LiftJet f = phi.jet(p.value);
        integrand[i] = std::log(f.d1) * p.d2 / p.d1 - (f.value - p.value) * (p.d1 - 1.0);
    }
    return periodic_mean(integrand) / 24.0;
}

} // namespace circlefact
