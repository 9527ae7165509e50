#include "circlefact/series.hpp"

#include <algorithm>
#include <cmath>

namespace circlefact::series {

Series truncate(Series a, std::size_t M)
{
    a.resize(M + 1, cplx{});
    return a;
}

Series multiply(const Series& a, const Series& b, std::size_t M)
{
    Series c(M + 1, cplx{});
    for (std::size_t i = 0; i < a.size() && i <= M; ++i) {
        if (a[i] == cplx{})
            continue;
        for (std::size_t j = 0; j < b.size() && i + j <= M; ++j)
            c[i + j] += a[i] * b[j];
    }
    return c;
}

Series reciprocal(const Series& a, std::size_t M)
{
    if (a.empty() || a[0] == cplx{})
        throw PreconditionError("series reciprocal needs a nonzero constant term");
    Series b(M + 1, cplx{});
    b[0] = 1.0 / a[0];
    for (std::size_t k = 1; k <= M; ++k) {
        cplx acc{};
        for (std::size_t j = 1; j <= k && j < a.size(); ++j)
            acc += a[j] * b[k - j];
        b[k] = -acc * b[0];
    }
    return b;
}

Series log(const Series& a, std::size_t M)
{
    if (a.empty() || std::abs(a[0] - 1.0) > 1e-14)
        throw PreconditionError("series log needs constant term 1");
    // (log a)' = a'/a, so k l_k = k a_k - sum_{j=1}^{k-1} j l_j a_{k-j}.
    Series l(M + 1, cplx{});
    for (std::size_t k = 1; k <= M; ++k) {
        cplx acc = k < a.size() ? static_cast<double>(k) * a[k] : cplx{};
        for (std::size_t j = 1; j < k; ++j)
            if (k - j < a.size())
                acc -= static_cast<double>(j) * l[j] * a[k - j];
        l[k] = acc / static_cast<double>(k);
    }
    return l;
}

Series exp(const Series& a, std::size_t M)
{
    if (!a.empty() && a[0] != cplx{})
        throw PreconditionError("series exp needs zero constant term");
    Series e(M + 1, cplx{});
    e[0] = 1.0;
    for (std::size_t k = 1; k <= M; ++k) {
        cplx acc{};
        for (std::size_t j = 1; j <= k && j < a.size(); ++j)
            acc += static_cast<double>(j) * a[j] * e[k - j];
        e[k] = acc / static_cast<double>(k);
    }
    return e;
}

Series power(const Series& a, double alpha, std::size_t M)
{
    Series l = log(a, M);
    for (auto& c : l)
        c *= alpha;
    return exp(l, M);
}

Series compose(const Series& a, const Series& h, std::size_t M)
{
    if (!h.empty() && h[0] != cplx{})
        throw PreconditionError("inner series must vanish at 0");
    Series out(M + 1, cplx{});
    const std::size_t top = std::min(a.size(), M + 1);
    for (std::size_t k = top; k-- > 0;) {
        out = multiply(out, h, M);
        out[0] += a[k];
    }
    return out;
}

Series taylor_shift(const Series& a, cplx c)
{
    // Repeated synthetic division by (x - c).
    Series d = a;
    const std::size_t n = d.size();
    for (std::size_t j = 0; j + 1 < n; ++j)
        for (std::size_t i = n - 1; i > j; --i)
            d[i - 1] += c * d[i];
    return d;
}

cplx eval(const Series& a, cplx x)
{
    cplx acc{};
    for (auto it = a.rbegin(); it != a.rend(); ++it)
        acc = acc * x + *it;
    return acc;
}

cplx eval_derivative(const Series& a, cplx x)
{
    cplx acc{};
    for (std::size_t k = a.size(); k-- > 1;)
        acc = acc * x + static_cast<double>(k) * a[k];
    return acc;
}

double tail_size(const Series& a, double r, std::size_t window)
{
    double worst = 0.0;
    const std::size_t start = a.size() > window ? a.size() - window : 0;
    for (std::size_t k = start; k < a.size(); ++k)
        worst = std::max(worst, std::abs(a[k]) * std::pow(r, static_cast<double>(k)));
    return worst;
}

} // namespace circlefact::series
