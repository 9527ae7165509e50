#include "circlefact/welding.hpp"

#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace circlefact {

namespace {

std::size_t next_pow2(std::size_t n)
{
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

} // namespace

cplx WeldingTriple::u(cplx z) const
{
    cplx acc{};
    for (auto it = u_coeffs.rbegin(); it != u_coeffs.rend(); ++it)
        acc = (acc + *it) * z;
    return z * (1.0 + acc);
}

cplx WeldingTriple::u_prime(cplx z) const
{
    return series::eval_derivative(u_series(), z);
}

cplx WeldingTriple::L(cplx z) const
{
    const cplx y = 1.0 / z;
    cplx acc{};
    for (auto it = L_coeffs.rbegin(); it != L_coeffs.rend(); ++it)
        acc = acc * y + *it;
    return z + acc;
}

series::Series WeldingTriple::u_series() const
{
    series::Series s(u_coeffs.size() + 2, cplx{});
    s[1] = 1.0;
    for (std::size_t k = 0; k < u_coeffs.size(); ++k)
        s[k + 2] = u_coeffs[k];
    return s;
}

LiftFunction lift_of(const CompositionChain& chain)
{
    return [chain](double t) { return chain.lift(t); };
}

double welding_residual(const WeldingTriple& t, const LiftFunction& sigma, std::size_t grid)
{
    double worst = 0.0;
    const std::vector<double> th = uniform_grid(grid);
    const cplx ma = t.m * t.a;
    for (double x : th) {
        const cplx z = std::polar(1.0, x);
        const cplx s = std::polar(1.0, sigma(x));
        worst = std::max(worst, std::abs(t.L(s) - ma * t.u(z)));
    }
    return worst;
}

double welding_residual(const WeldingTriple& t, const CompositionChain& sigma, std::size_t grid)
{
    return welding_residual(t, lift_of(sigma), grid);
}

WeldingTriple weld_identity(std::size_t cutoff)
{
    WeldingTriple t;
    t.cutoff = cutoff;
    t.u_coeffs.assign(cutoff, cplx{});
    t.L_coeffs.assign(cutoff + 1, cplx{});
    return t;
}

WeldingTriple weld_phi_n(unsigned n, cplx w, cplx lambda, std::size_t M)
{
    if (n == 0)
        throw PreconditionError("phi index must be positive");
    if (std::abs(w) >= 1.0)
        throw PreconditionError("weld_phi_n requires |w| < 1");
    if (std::abs(std::abs(lambda) - 1.0) > 1e-12)
        throw PreconditionError("rotation must have unit modulus");
    const double inv_n = 1.0 / static_cast<double>(n);

    series::Series h(M + 2, cplx{});
    h[0] = 1.0;
    if (n <= M + 1)
        h[n] = w;
    const series::Series P = series::power(h, -inv_n, M);

    series::Series q(M + 2, cplx{});
    q[0] = 1.0;
    if (n <= M + 1)
        q[n] = -std::conj(w) * std::pow(lambda, static_cast<int>(n));
    const series::Series Q = series::power(q, inv_n, M + 1);

    WeldingTriple t;
    t.cutoff = M;
    t.u_coeffs.assign(P.begin() + 1, P.begin() + 1 + static_cast<std::ptrdiff_t>(M));
    t.L_coeffs.assign(Q.begin() + 1, Q.begin() + 2 + static_cast<std::ptrdiff_t>(M));
    t.a = std::pow(1.0 - std::norm(w), inv_n);
    t.m = lambda;
    return t;
}

WeldingTriple weld_compose_phi1(const WeldingTriple& t, cplx w1)
{
    const double r = std::abs(w1);
    if (r >= 1.0)
        throw PreconditionError("weld_compose_phi1 requires |w1| < 1");
    const std::size_t M = t.cutoff;
    const series::Series c = t.u_series();
    if (series::tail_size(c, r, 8) > 1e-15)
        throw NumericalError("u series does not converge at conj(w1) within cutoff " +
                             std::to_string(M) + "; increase the cutoff");
    const cplx zeta = std::conj(w1);
    series::Series d = series::taylor_shift(c, zeta);
    const cplx d0 = d[0];
    d[0] = 0.0;

    const double shrink = 1.0 - std::norm(w1);
    series::Series h(M + 2, cplx{});
    cplx pw = shrink;
    for (std::size_t k = 1; k <= M + 1; ++k) {
        h[k] = pw;
        pw *= -w1;
    }
    const series::Series comp = series::compose(d, h, M + 1);
    const cplx lead = comp[1];
    if (std::abs(lead) == 0.0)
        throw NumericalError("degenerate derivative in composition update");

    WeldingTriple out;
    out.cutoff = M;
    out.u_coeffs.resize(M);
    for (std::size_t k = 1; k <= M; ++k)
        out.u_coeffs[k - 1] = comp[k + 1] / lead;
    const cplx ma = t.m * t.a * lead;
    out.a = std::abs(ma);
    out.m = ma / out.a;
    out.L_coeffs = t.L_coeffs;
    if (out.L_coeffs.empty())
        out.L_coeffs.push_back(cplx{});
    out.L_coeffs[0] -= t.m * t.a * d0;
    return out;
}

CompositionChain scale_indices(const CompositionChain& chain, unsigned n)
{
    if (chain.rotation != 0.0)
        throw PreconditionError("index scaling needs a rotation-free chain");
    CompositionChain out;
    for (const auto& s : chain.steps)
        out.steps.push_back({s.n * n, s.w});
    return out;
}

WeldingTriple weld_substitute(const WeldingTriple& t, unsigned n, const LiftFunction& target,
                              double tol)
{
    if (n == 0)
        throw PreconditionError("substitution index must be positive");
    const std::size_t M = t.cutoff;
    const double inv_n = 1.0 / static_cast<double>(n);

    series::Series P(M + 1, cplx{});
    P[0] = 1.0;
    for (std::size_t k = 1; k <= t.u_coeffs.size() && n * k <= M; ++k)
        P[n * k] = t.u_coeffs[k - 1];
    const series::Series R = series::power(P, inv_n, M);

    series::Series Q(M + 2, cplx{});
    Q[0] = 1.0;
    for (std::size_t k = 0; k < t.L_coeffs.size() && n * (k + 1) <= M + 1; ++k)
        Q[n * (k + 1)] = t.L_coeffs[k];
    const series::Series S = series::power(Q, inv_n, M + 1);

    WeldingTriple out;
    out.cutoff = M;
    out.u_coeffs.assign(R.begin() + 1, R.begin() + 1 + static_cast<std::ptrdiff_t>(M));
    out.L_coeffs.assign(S.begin() + 1, S.begin() + 2 + static_cast<std::ptrdiff_t>(M));
    out.a = std::pow(t.a, inv_n);

    const cplx root = std::pow(t.m, inv_n);
    double best = kInfinity;
    cplx best_m = root;
    for (unsigned j = 0; j < n; ++j) {
        out.m = root * std::polar(1.0, kTwoPi * j * inv_n);
        const double res = welding_residual(out, target, 1024);
        if (res < best) {
            best = res;
            best_m = out.m;
        }
    }
    if (best > tol)
        throw NumericalError("no n-th root of m gives a small welding residual (best " +
                             std::to_string(best) + ")");
    out.m = best_m;
    return out;
}

WeldingTriple weld_invert(const WeldingTriple& t, double tail_tol)
{
    const std::size_t M = t.cutoff;
    series::Series D(M + 1, cplx{});
    D[0] = 1.0;
    for (std::size_t k = 0; k < t.L_coeffs.size() && k + 1 <= M; ++k)
        D[k + 1] = std::conj(t.L_coeffs[k]);
    const series::Series R = series::reciprocal(D, M);

    series::Series E(M + 2, cplx{});
    E[0] = 1.0;
    for (std::size_t k = 1; k <= t.u_coeffs.size() && k <= M + 1; ++k)
        E[k] = std::conj(t.u_coeffs[k - 1]);
    const series::Series S = series::reciprocal(E, M + 1);

    if (series::tail_size(R, 1.0, 8) > tail_tol || series::tail_size(S, 1.0, 8) > tail_tol)
        throw NumericalError("inverse factorization series does not converge at cutoff " +
                             std::to_string(M));
    WeldingTriple out;
    out.cutoff = M;
    out.u_coeffs.assign(R.begin() + 1, R.begin() + 1 + static_cast<std::ptrdiff_t>(M));
    out.L_coeffs.assign(S.begin() + 1, S.begin() + 2 + static_cast<std::ptrdiff_t>(M));
    out.m = std::conj(t.m);
    out.a = t.a;
    return out;
}

PowerOperatorMatrix power_operator(const LiftFunction& sigma, std::size_t M, std::size_t grid)
{
    const std::size_t G = grid ? next_pow2(grid) : next_pow2(std::max<std::size_t>(4096, 16 * M));
    if (G < 2 * M + 2)
        throw PreconditionError("quadrature grid too small for the requested truncation");
    const std::vector<double> th = uniform_grid(G);
    std::vector<double> S(G);
    for (std::size_t i = 0; i < G; ++i)
        S[i] = sigma(th[i]);
    for (std::size_t i = 1; i < G; ++i)
        if (!(S[i] >= S[i - 1]))
            throw PreconditionError("power operator needs a monotone lift");
    if (std::abs(sigma(kTwoPi) - S[0] - kTwoPi) > 1e-9)
        throw PreconditionError("lift must satisfy Sigma(theta + 2pi) = Sigma(theta) + 2pi");

    PowerOperatorMatrix P;
    P.quadrature_grid = G;
    P.A.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
    Eigen::FFT<double> fft;
    std::vector<cplx> f(G), coef;
    for (std::size_t m = 1; m <= M; ++m) {
        for (std::size_t i = 0; i < G; ++i)
            f[i] = std::polar(1.0, -static_cast<double>(m) * S[i]);
        fft.inv(coef, f);
        for (std::size_t k = 1; k <= M; ++k)
            P.A(static_cast<Eigen::Index>(m - 1), static_cast<Eigen::Index>(k - 1)) =
                static_cast<double>(k) / static_cast<double>(m) * coef[k];
    }
    return P;
}

double invert_lift(const LiftFunction& sigma, double y, double tol)
{
    auto f = [&](double x) { return sigma(x) - y; };
    double lo = y, hi = y;
    while (f(lo) > 0.0)
        lo -= kTwoPi;
    while (f(hi) < 0.0)
        hi += kTwoPi;
    if (lo == hi)
        return lo;
    auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
    const auto br = boost::math::tools::bisect(f, lo, hi, stop);
    return 0.5 * (br.first + br.second);
}

WeldSolution weld_solve(const LiftFunction& sigma, double tol, std::size_t M_start,
                        std::size_t M_max, std::size_t grid)
{
    WeldSolution sol;
    Eigen::VectorXcd prev;
    Eigen::VectorXcd x;
    constexpr std::size_t kSlopeGrid = 8192;
    double min_slope = kInfinity;
    double prev_S = sigma(0.0);
    for (std::size_t i = 1; i <= kSlopeGrid; ++i) {
        const double S = sigma(kTwoPi * static_cast<double>(i) / kSlopeGrid);
        min_slope = std::min(min_slope, (S - prev_S) * kSlopeGrid / kTwoPi);
        prev_S = S;
    }
    // Column k is supported on rows m ~ k / Sigma'(theta).
    const double row_factor = std::clamp(1.25 / std::max(min_slope, 1e-12), 2.0, 8.0);
    std::size_t M = M_start;
    for (;; M *= 2) {
        const auto rows = static_cast<std::size_t>(std::ceil(row_factor * static_cast<double>(M)));
        const PowerOperatorMatrix P = power_operator(sigma, rows, grid);
        Eigen::MatrixXcd A = P.A.leftCols(static_cast<Eigen::Index>(M));
        for (Eigen::Index r = 0; r < A.rows(); ++r)
            A.row(r) *= std::sqrt(static_cast<double>(r + 1));
        const Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& sv = svd.singularValues();
        sol.rcond = sv(sv.size() - 1) / sv(0);
        if (!(sol.rcond > 1e-14)) {
            std::ostringstream msg;
            msg << "power operator truncation is ill-conditioned (rcond " << sol.rcond << ")";
            throw NumericalError(msg.str());
        }
        Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(A.rows());
        e1(0) = 1.0;
        x = svd.solve(e1);
        if (prev.size() > 0) {
            sol.drift = std::max((x.head(prev.size()) - prev).cwiseAbs().maxCoeff(),
                                 x.tail(x.size() - prev.size()).cwiseAbs().maxCoeff());
            sol.drift_history.push_back(sol.drift);
            if (sol.drift < tol) {
                sol.converged = true;
                break;
            }
        }
        if (2 * M > M_max)
            break;
        prev = x;
    }
    sol.M = M;
    const std::size_t K = static_cast<std::size_t>(x.size());

    WeldingTriple& t = sol.triple;
    t.cutoff = M;
    const cplx lead = x(0);
    t.a = std::abs(lead);
    t.m = lead / t.a;
    t.u_coeffs.resize(K - 1);
    for (std::size_t k = 1; k < K; ++k)
        t.u_coeffs[k - 1] = x(static_cast<Eigen::Index>(k)) / lead;
    t.u_coeffs.resize(M, cplx{});

    // L(e^{i psi}) = (m a u)(sigma^{-1}(e^{i psi})), resolved by FFT.
    const std::size_t G = next_pow2(std::max<std::size_t>(4096, 4 * M));
    const std::vector<double> psi = uniform_grid(G);
    std::vector<cplx> samples(G), coef;
    for (std::size_t i = 0; i < G; ++i) {
        const double phi = invert_lift(sigma, psi[i]);
        const cplx z = std::polar(1.0, phi);
        cplx acc{};
        for (Eigen::Index k = x.size(); k-- > 0;)
            acc = (acc + x(k)) * z;
        samples[i] = acc;
    }
    Eigen::FFT<double> fft;
    fft.inv(coef, samples);
    t.L_coeffs.resize(M + 1);
    for (std::size_t k = 0; k <= M; ++k)
        t.L_coeffs[k] = coef[k];
    for (std::size_t k = 2; k < G / 2; ++k)
        sol.positive_leak = std::max(sol.positive_leak, std::abs(coef[G - k]));
    sol.residual = welding_residual(t, sigma);
    return sol;
}

} // namespace circlefact
