#include "circlefact/invertibility.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>

namespace circlefact {

std::string to_string(Invertibility v)
{
    switch (v) {
    case Invertibility::invertible: return "invertible";
    case Invertibility::not_invertible: return "not_invertible";
    default: return "undecided";
    }
}

std::string to_string(CollapseVerdict v)
{
    switch (v) {
    case CollapseVerdict::collapsed: return "collapsed";
    case CollapseVerdict::separated: return "separated";
    default: return "undecided";
    }
}

std::string to_string(SeriesVerdict v)
{
    switch (v) {
    case SeriesVerdict::convergent: return "convergent";
    case SeriesVerdict::divergent: return "divergent";
    default: return "hypothesis_violated";
    }
}

Invertibility classify_rule(const MagnitudeRule& rule)
{
    // lim n r_n for r_n = c n^p
    double limit;
    if (rule.c == 0.0 || rule.p < -1.0)
        limit = 0.0;
    else if (rule.p == -1.0)
        limit = rule.c;
    else
        limit = kInfinity;
    if (limit < 0.5)
        return Invertibility::invertible;
    const bool real_positive = std::remainder(rule.phase, kTwoPi) == 0.0;
    if (real_positive && limit > 0.5)
        return Invertibility::not_invertible;
    return Invertibility::undecided;
}

Invertibility classify_rule(const std::optional<MagnitudeRule>& rule)
{
    return rule ? classify_rule(*rule) : Invertibility::undecided;
}

double collapse_step(unsigned n, cplx w, double base, double x)
{
    const double r = std::abs(w);
    if (r == 0.0)
        return x;
    const double nn = static_cast<double>(n);
    const double beta = std::arg(w) + nn * base + nn * x / 2.0;
    const double cb = std::cos(beta);
    const double im = 2.0 * r * std::sin(nn * x / 2.0) * cb + r * r * std::sin(nn * x);
    const double re = 1.0 + 2.0 * r * std::cos(nn * x / 2.0) * cb + r * r * std::cos(nn * x);
    return x - 2.0 / nn * std::atan2(im, re);
}

CollapseTrace collapse_probe(const RootCoordinateSequence& coords, double theta, double x0,
                             std::size_t N_max, double tol, bool keep_trace)
{
    if (!(x0 > 0.0))
        throw PreconditionError("collapse_probe requires x0 > 0");
    coords.require_open_disk(N_max);
    CollapseTrace tr;
    tr.theta = theta;
    tr.x0 = x0;
    tr.tol = tol;
    if (keep_trace) {
        tr.D.reserve(N_max + 1);
        tr.U.reserve(N_max + 1);
        tr.p.reserve(N_max + 1);
        tr.D.push_back(x0);
        tr.U.push_back(1.0);
        tr.p.push_back(1.0);
    }
    double base = theta;
    double D = x0;
    double p = 1.0;
    double inf_D = x0;
    double late_max = 0.0;
    const std::size_t late_start = (N_max + 1) / 2;
    if (late_start == 0)
        late_max = x0;
    for (std::size_t k = 1; k <= N_max; ++k) {
        const std::size_t idx = coords.slot(k);
        const unsigned n = static_cast<unsigned>(idx);
        const cplx w = coords.coefficient(idx);
        double U = 1.0;
        if (w != cplx{}) {
            const cplx g = w * std::polar(1.0, static_cast<double>(n) * base);
            U = (1.0 - std::norm(w)) / std::norm(1.0 + g);
            const cplx gx = w * std::polar(1.0, static_cast<double>(n) * (base + D));
            const double ratio = 2.0 * std::abs(std::imag(gx / ((1.0 + gx) * (1.0 + gx)))) / std::abs(w);
            tr.b_estimate = std::max(tr.b_estimate, ratio);
            D = collapse_step(n, w, base, D);
            base = phi_lift(n, w, base);
        }
        p *= U;
        inf_D = std::min(inf_D, D);
        if (k >= late_start)
            late_max = std::max(late_max, D);
        if (keep_trace) {
            tr.D.push_back(D);
            tr.U.push_back(U);
            tr.p.push_back(p);
        }
    }
    if (!keep_trace) {
        tr.D = {x0, D};
        tr.p = {1.0, p};
    }
    if (late_max < tol * x0)
        tr.verdict = CollapseVerdict::collapsed;
    else if (inf_D > 10.0 * tol * x0)
        tr.verdict = CollapseVerdict::separated;
    else
        tr.verdict = CollapseVerdict::undecided;
    return tr;
}

double sigma_inverse(const RootCoordinateSequence& coords, std::size_t N, double y, double tol)
{
    auto f = [&](double x) { return sigma_at(coords, N, x) - y; };
    double lo = y, hi = y;
    while (f(lo) > 0.0)
        lo -= kTwoPi;
    while (f(hi) < 0.0)
        hi += kTwoPi;
    if (hi == lo)
        return lo;
    auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
    const auto bracket = boost::math::tools::bisect(f, lo, hi, stop);
    return 0.5 * (bracket.first + bracket.second);
}

IntervalBounds interval_bounds(const RootCoordinateSequence& coords, double theta, std::size_t N)
{
    const double T = tail_bound(coords, N);
    if (!std::isfinite(T))
        throw NumericalError("interval bounds need a convergent tail series");
    if (T == 0.0)
        return {theta, theta, 0.0};
    const double y = sigma_at(coords, N, theta);
    return {sigma_inverse(coords, N, y + 2.0 * T), sigma_inverse(coords, N, y - 2.0 * T), T};
}

Thm14Report thm14_report(const MagnitudeRule& rule, std::size_t N_max)
{
    Thm14Report rep;
    const bool in_l2 = rule.c == 0.0 || 2.0 * rule.p < -1.0;
    const bool bounded = rule.p < 0.0 || (rule.p == 0.0 && rule.c < 1.0);
    if (in_l2 || !bounded || N_max < 20) {
        rep.verdict = SeriesVerdict::hypothesis_violated;
        return rep;
    }
    long double s = 0.0L, part_stmt = 0.0L, part_proof = 0.0L;
    const std::size_t fit_start = std::max<std::size_t>(N_max / 10, rule.first + 1);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    std::size_t next_record = 1;
    for (std::size_t n = 1; n <= N_max; ++n) {
        const double r = rule.radius(n);
        s += static_cast<long double>(r) * r;
        const double sn = static_cast<double>(s);
        double t_stmt = std::nan(""), t_proof = std::nan("");
        if (sn > std::exp(1.0) && r > 0.0) {
            const double ll = std::log(std::log(sn));
            const double base = std::log(static_cast<double>(n) * r) - 2.0 * sn;
            t_stmt = std::exp(base + 2.0 * std::sqrt(kTwoPi * sn) * ll);
            t_proof = std::exp(base + 2.0 * std::sqrt(kTwoPi * sn * ll));
            part_stmt += t_stmt;
            part_proof += t_proof;
        }
        if (n >= fit_start && r > 0.0) {
            const double x = std::log(static_cast<double>(n));
            const double y = std::log(static_cast<double>(n) * r) - 2.0 * sn;
            sx += x; sy += y; sxx += x * x; sxy += x * y;
            ++cnt;
        }
        if (n == next_record || n == N_max) {
            rep.n.push_back(n);
            rep.s.push_back(sn);
            rep.summand_statement.push_back(t_stmt);
            rep.summand_proof.push_back(t_proof);
            rep.partial_statement.push_back(static_cast<double>(part_stmt));
            rep.partial_proof.push_back(static_cast<double>(part_proof));
            next_record = std::max(next_record + 1, static_cast<std::size_t>(next_record * 1.25));
        }
    }
    const double c = static_cast<double>(cnt);
    rep.power_slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
    rep.verdict = rep.power_slope < -1.0 ? SeriesVerdict::convergent : SeriesVerdict::divergent;
    return rep;
}

double thm14_c_step(double c_prev, double U, std::size_t n, double r, double B)
{
    return U * c_prev * (1.0 + static_cast<double>(n) * r * B * U * c_prev);
}

double qs_ratio(const CircleLift& lift, const std::vector<std::size_t>& t_steps)
{
    const std::size_t G = lift.values.size();
    if (G == 0)
        throw PreconditionError("empty lift");
    auto at = [&](std::ptrdiff_t i) {
        const std::ptrdiff_t g = static_cast<std::ptrdiff_t>(G);
        std::ptrdiff_t q = i / g, m = i % g;
        if (m < 0) {
            m += g;
            --q;
        }
        return lift.values[static_cast<std::size_t>(m)] + kTwoPi * static_cast<double>(q);
    };
    double M = 1.0;
    for (std::size_t i = 0; i < G; ++i)
        for (std::size_t k : t_steps) {
            const auto ii = static_cast<std::ptrdiff_t>(i);
            const auto kk = static_cast<std::ptrdiff_t>(k);
            const double fwd = at(ii + kk) - at(ii);
            const double bwd = at(ii) - at(ii - kk);
            if (fwd <= 0.0 || bwd <= 0.0)
                return kInfinity;
            M = std::max({M, fwd / bwd, bwd / fwd});
        }
    return M;
}

} // namespace circlefact
