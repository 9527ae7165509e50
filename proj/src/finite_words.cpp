#include "circlefact/finite_words.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace circlefact {

namespace {

constexpr double kZeroParam = 1e-14;

std::vector<double> verification_grid()
{
    std::vector<double> g = uniform_grid(256);
    for (double& t : g)
        t += 0.0123;
    return g;
}

double merge_mismatch(unsigned n, cplx w, cplx wp, double a, cplx ws, const std::vector<double>& grid)
{
    double worst = 0.0;
    for (double t : grid) {
        const double lhs = phi_lift(n, w, phi_lift(n, wp, t));
        const double rhs = a + phi_lift(n, ws, t);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

struct FitData {
    unsigned n;
    cplx w, wp;
    const std::vector<double>* grid;
};

double fit_objective(const gsl_vector* x, void* params)
{
    const auto* d = static_cast<const FitData*>(params);
    const cplx ws(gsl_vector_get(x, 1), gsl_vector_get(x, 2));
    if (std::abs(ws) >= 1.0)
        return 1e6 * (1.0 + std::abs(ws));
    const double a = gsl_vector_get(x, 0);
    double acc = 0.0;
    for (double t : *d->grid) {
        const double diff = phi_lift(d->n, d->w, phi_lift(d->n, d->wp, t)) - a - phi_lift(d->n, ws, t);
        acc += diff * diff;
    }
    return acc;
}

MergeResult nelder_mead_fit(unsigned n, cplx w, cplx wp, double a0, cplx ws0,
                            const std::vector<double>& grid)
{
    FitData data{n, w, wp, &grid};
    gsl_multimin_function f{&fit_objective, 3, &data};
    gsl_vector* x = gsl_vector_alloc(3);
    gsl_vector* step = gsl_vector_alloc(3);
    gsl_vector_set(x, 0, a0);
    gsl_vector_set(x, 1, ws0.real());
    gsl_vector_set(x, 2, ws0.imag());
    gsl_vector_set_all(step, 0.05);
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
    gsl_multimin_fminimizer_set(s, &f, x, step);
    for (int iter = 0; iter < 20000; ++iter) {
        if (gsl_multimin_fminimizer_iterate(s))
            break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-14) == GSL_SUCCESS)
            break;
    }
    const gsl_vector* best = gsl_multimin_fminimizer_x(s);
    MergeResult r{std::polar(1.0, gsl_vector_get(best, 0)),
                  cplx(gsl_vector_get(best, 1), gsl_vector_get(best, 2)), true};
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return r;
}

} // namespace

bool FiniteTypeWord::is_canonical() const
{
    for (std::size_t j = 0; j < factors.size(); ++j) {
        if (std::abs(factors[j].w) < kZeroParam)
            return false;
        if (j + 1 < factors.size() && factors[j].n == factors[j + 1].n)
            return false;
    }
    return true;
}

CompositionChain FiniteTypeWord::chain() const
{
    CompositionChain c;
    c.rotation = std::arg(rotation);
    for (auto it = factors.rbegin(); it != factors.rend(); ++it)
        c.steps.push_back({it->n, it->w});
    return c;
}

FiniteTypeWord word_push_rotation_left(const std::vector<WordElement>& elements)
{
    FiniteTypeWord out;
    for (const auto& e : elements) {
        if (e.index == 0) {
            if (std::abs(std::abs(e.value) - 1.0) > 1e-12)
                throw PreconditionError("rotation must have unit modulus");
            for (auto& f : out.factors)
                f.w *= std::pow(e.value, static_cast<int>(f.n));
            out.rotation *= e.value;
        } else {
            out.factors.push_back({e.index, e.value});
        }
    }
    return out;
}

MergeResult merge_factors(unsigned n, cplx w, cplx wp)
{
    if (std::abs(w) >= 1.0 || std::abs(wp) >= 1.0)
        throw PreconditionError("merge requires open-disk parameters");
    const cplx ws = (w + wp) / (1.0 + w * std::conj(wp));
    if (std::abs(ws) >= 1.0)
        throw NumericalError("merged parameter left the open disk");
    const double t0 = 0.7;
    const double a = phi_lift(n, w, phi_lift(n, wp, t0)) - phi_lift(n, ws, t0);
    static const std::vector<double> grid = verification_grid();
    if (merge_mismatch(n, w, wp, a, ws, grid) < 1e-11)
        return {std::polar(1.0, a), ws, false};
    MergeResult fit = nelder_mead_fit(n, w, wp, a, ws, grid);
    if (std::abs(fit.w) >= 1.0)
        throw NumericalError("merged parameter left the open disk");
    return fit;
}

FiniteTypeWord word_reduce(const FiniteTypeWord& word)
{
    FiniteTypeWord out;
    out.rotation = word.rotation;
    auto push_rotation = [&out](cplx lambda) {
        for (auto& f : out.factors)
            f.w *= std::pow(lambda, static_cast<int>(f.n));
        out.rotation *= lambda;
    };
    for (const auto& f : word.factors) {
        if (std::abs(f.w) < kZeroParam)
            continue;
        if (!out.factors.empty() && out.factors.back().n == f.n) {
            const WordFactor top = out.factors.back();
            out.factors.pop_back();
            const MergeResult m = merge_factors(f.n, top.w, f.w);
            push_rotation(m.rotation);
            if (std::abs(m.w) >= kZeroParam)
                out.factors.push_back({f.n, m.w});
        } else {
            out.factors.push_back(f);
        }
    }
    return out;
}

std::uint64_t word_degree(const std::vector<unsigned>& indices)
{
    std::uint64_t num = 1;
    for (unsigned i : indices) {
        if (i == 0)
            throw PreconditionError("factor index must be positive");
        if (__builtin_mul_overflow(num, static_cast<std::uint64_t>(i), &num))
            throw NumericalError("word degree overflows 64 bits");
    }
    for (std::size_t k = 0; k + 1 < indices.size(); ++k)
        num /= std::gcd(indices[k], indices[k + 1]);
    return num;
}

std::uint64_t word_degree(const FiniteTypeWord& word)
{
    std::vector<unsigned> idx;
    for (const auto& f : word.factors)
        idx.push_back(f.n);
    return word_degree(idx);
}

std::pair<std::uint64_t, std::uint64_t> genus_phi_n(unsigned n)
{
    if (n == 0)
        throw PreconditionError("index must be positive");
    const std::uint64_t k = n - 1;
    return {k * k, k == 0 ? 0 : k * (k - 1) / 2};
}

std::int64_t genus_pair(unsigned m, unsigned n)
{
    if (m == 0 || n == 0 || m == n)
        throw PreconditionError("genus_pair requires distinct positive indices");
    const std::int64_t M = m, N = n, d = std::gcd(m, n);
    return 1 - M * N / d + M * N * M / d + N * M * N / d;
}

CircleLift word_eval(const FiniteTypeWord& word, const std::vector<double>& thetas)
{
    const CompositionChain c = word.chain();
    CircleLift out;
    out.theta = thetas;
    out.values.reserve(thetas.size());
    for (double t : thetas)
        out.values.push_back(c.lift(t));
    out.truncation = word.factors.size();
    return out;
}

} // namespace circlefact
