#include "circlefact/opuc.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>

namespace circlefact {

namespace {

Polynomial reversed_conj(const Polynomial& p)
{
    Polynomial r(p.size());
    for (std::size_t k = 0; k < p.size(); ++k)
        r[k] = std::conj(p[p.size() - 1 - k]);
    return r;
}

void check_disk(const std::vector<cplx>& alphas)
{
    for (std::size_t i = 0; i < alphas.size(); ++i)
        if (std::abs(alphas[i]) >= 1.0)
            throw PreconditionError("|alpha_" + std::to_string(i + 1) + "| must be < 1");
}

} // namespace

cplx poly_eval(const Polynomial& p, cplx z)
{
    cplx acc{};
    for (auto it = p.rbegin(); it != p.rend(); ++it)
        acc = acc * z + *it;
    return acc;
}

std::vector<Polynomial> szego_recursion(const std::vector<cplx>& alphas, std::size_t N)
{
    check_disk(alphas);
    std::vector<Polynomial> ladder{{1.0}};
    for (std::size_t n = 1; n <= N; ++n) {
        const Polynomial& prev = ladder.back();
        const cplx a = n <= alphas.size() ? alphas[n - 1] : cplx{};
        const Polynomial rev = reversed_conj(prev);
        Polynomial next(n + 1, cplx{});
        for (std::size_t k = 0; k < prev.size(); ++k) {
            next[k + 1] += prev[k];
            next[k] -= std::conj(a) * rev[k];
        }
        ladder.push_back(std::move(next));
    }
    return ladder;
}

std::vector<double> verblunsky_to_measure(const std::vector<cplx>& alphas,
                                          const std::vector<double>& thetas)
{
    const std::size_t N = alphas.size();
    const Polynomial rev = reversed_conj(szego_recursion(alphas, N).back());
    double scale = 1.0;
    for (const cplx& a : alphas)
        scale *= 1.0 - std::norm(a);
    std::vector<double> rho(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i)
        rho[i] = scale / std::norm(poly_eval(rev, std::polar(1.0, thetas[i])));
    return rho;
}

MomentSequence moments_from_density(const std::vector<double>& density, std::size_t K)
{
    const std::size_t G = density.size();
    if (G < 2 * K + 1)
        throw PreconditionError("grid too coarse for the requested number of moments");
    std::vector<cplx> in(density.begin(), density.end()), out;
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    MomentSequence m;
    m.c.resize(K + 1);
    for (std::size_t k = 0; k <= K; ++k)
        m.c[k] = out[k] / static_cast<double>(G);
    return m;
}

VerblunskySequence measure_to_verblunsky(const MomentSequence& moments, std::size_t N)
{
    const auto& c = moments.c;
    if (c.size() < N + 1)
        throw PreconditionError("need moments c_0..c_N");
    if (std::abs(c[0] - 1.0) > 1e-8)
        throw PreconditionError("moments must describe a probability measure (c_0 = 1)");
    auto conj_moment = [&](std::size_t j) { return std::conj(c[j]); };
    VerblunskySequence out;
    Polynomial p{1.0};
    for (std::size_t n = 1; n <= N; ++n) {
        const Polynomial rev = reversed_conj(p);
        cplx num{}, den{};
        for (std::size_t j = 0; j < p.size(); ++j) {
            num += p[j] * conj_moment(j + 1);
            den += rev[j] * conj_moment(j);
        }
        if (!(den.real() > 0.0))
            throw NumericalError("Toeplitz minor of order " + std::to_string(n) +
                                 " is not positive");
        const cplx abar = num / den;
        if (std::abs(abar) >= 1.0)
            throw NumericalError("Toeplitz minor of order " + std::to_string(n + 1) +
                                 " is not positive (|alpha_" + std::to_string(n) + "| >= 1)");
        out.alphas.push_back(std::conj(abar));
        Polynomial next(n + 1, cplx{});
        for (std::size_t k = 0; k < p.size(); ++k) {
            next[k + 1] += p[k];
            next[k] -= abar * rev[k];
        }
        p = std::move(next);
    }
    return out;
}

VerblunskySequence measure_to_verblunsky(const std::vector<double>& density, std::size_t N)
{
    return measure_to_verblunsky(moments_from_density(density, N + 1), N);
}

ToeplitzCheck toeplitz_det(const MomentSequence& moments, std::size_t N)
{
    const auto& c = moments.c;
    if (c.size() < N + 1)
        throw PreconditionError("need moments c_0..c_N");
    Eigen::MatrixXcd T(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            T(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                i >= j ? c[i - j] : std::conj(c[j - i]);
    ToeplitzCheck chk;
    chk.det = N == 0 ? 1.0 : T.determinant().real();
    const VerblunskySequence v = measure_to_verblunsky(moments, N == 0 ? 0 : N - 1);
    chk.product = 1.0;
    for (std::size_t n = 1; n < N; ++n)
        chk.product *= std::pow(1.0 - std::norm(v.alphas[n - 1]), static_cast<double>(N - n));
    chk.residual = std::abs(chk.det - chk.product);
    return chk;
}

IdentityCheck szego_identity_check(const std::vector<cplx>& alphas, std::size_t grid)
{
    check_disk(alphas);
    const std::vector<double> rho = verblunsky_to_measure(alphas, uniform_grid(grid));
    std::vector<double> logs(rho.size());
    std::transform(rho.begin(), rho.end(), logs.begin(), [](double x) { return std::log(x); });
    IdentityCheck chk;
    for (const cplx& a : alphas)
        chk.lhs *= 1.0 - std::norm(a);
    chk.rhs = std::exp(periodic_mean(logs));
    chk.residual = std::abs(chk.lhs - chk.rhs);
    return chk;
}

IdentityCheck ibragimov_identity_check(const std::vector<cplx>& alphas, std::size_t grid,
                                       std::size_t terms)
{
    check_disk(alphas);
    const std::vector<double> rho = verblunsky_to_measure(alphas, uniform_grid(grid));
    std::vector<cplx> logs(rho.size()), f;
    std::transform(rho.begin(), rho.end(), logs.begin(), [](double x) { return cplx(std::log(x)); });
    Eigen::FFT<double> fft;
    fft.fwd(f, logs);
    const std::size_t K = terms ? std::min(terms, grid / 2 - 1) : grid / 2 - 1;
    long double acc = 0.0L;
    for (std::size_t k = 1; k <= K; ++k)
        acc += static_cast<long double>(k) * std::norm(f[k] / static_cast<double>(grid));
    IdentityCheck chk;
    for (std::size_t n = 1; n <= alphas.size(); ++n)
        chk.lhs *= std::pow(1.0 - std::norm(alphas[n - 1]), static_cast<double>(n));
    chk.rhs = std::exp(-static_cast<double>(acc));
    chk.residual = std::abs(chk.lhs - chk.rhs);
    return chk;
}

double rsf_opuc_crosscheck(unsigned N, cplx w, std::size_t grid)
{
    if (N == 0)
        throw PreconditionError("mode index must be positive");
    if (std::abs(w) >= 1.0)
        throw PreconditionError("crosscheck requires |w| < 1");
    const std::vector<double> th = uniform_grid(grid);
    std::vector<cplx> alphas(N, cplx{});
    alphas[N - 1] = -w;
    const std::vector<double> rho = verblunsky_to_measure(alphas, th);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        const cplx zN = std::polar(1.0, static_cast<double>(N) * th[i]);
        const double rsf = (1.0 - std::norm(w)) / std::norm(1.0 + w * zN);
        worst = std::max(worst, std::abs(rsf - rho[i]));
    }
    return worst;
}

} // namespace circlefact
