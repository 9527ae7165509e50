#include "circlefact/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace circlefact {

std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& eng)
{
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

RootCoordinateSequence sample_uniform_phases(const MagnitudeRule& rule, std::uint64_t seed,
                                             std::size_t N, std::uint64_t trial)
{
    auto eng = trial_engine(seed, trial);
    std::vector<cplx> w(N);
    for (std::size_t n = 1; n <= N; ++n) {
        const double r = rule.radius(n);
        if (r > 1.0 + 1e-13)
            throw PreconditionError("magnitude rule exceeds 1 at n = " + std::to_string(n));
        w[n - 1] = std::polar(std::min(r, 1.0), kTwoPi * uniform01(eng));
    }
    return RootCoordinateSequence(std::move(w));
}

RootCoordinateSequence sample_beta_measure(const BetaRule& rule, std::uint64_t seed,
                                           std::size_t N, std::uint64_t trial)
{
    auto eng = trial_engine(seed, trial);
    std::vector<cplx> w(N);
    for (std::size_t n = 1; n <= N; ++n) {
        const double a = rule.a(n);
        if (!(a > 0.0))
            throw PreconditionError("beta rule requires a(n) > 0 at n = " + std::to_string(n));
        const double u = uniform01(eng);
        const double r = std::sqrt(-std::expm1(std::log1p(-u) / (a + 1.0)));
        w[n - 1] = std::polar(r, kTwoPi * uniform01(eng));
    }
    return RootCoordinateSequence(std::move(w));
}

RootCoordinateSequence sample_model(const RandomModel& model, std::size_t N, std::uint64_t trial)
{
    if (model.kind == RandomModel::Kind::beta)
        return sample_beta_measure(model.beta, model.seed, N, trial);
    if (model.uniform_phases)
        return sample_uniform_phases(model.magnitude, model.seed, N, trial);
    std::vector<cplx> w(N);
    for (std::size_t n = 1; n <= N; ++n)
        w[n - 1] = model.magnitude.term(n);
    return RootCoordinateSequence(std::move(w));
}

KakutaniResult kakutani_overlap(const BetaRule& A, const BetaRule& B, std::size_t N_max)
{
    KakutaniResult res;
    long double log_overlap = 0.0L, crit = 0.0L;
    const std::size_t fit_start = std::max<std::size_t>(1, N_max / 10);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    bool all_zero = true;
    for (std::size_t n = 1; n <= N_max; ++n) {
        const double a = A.a(n), b = B.a(n);
        if (!(a > 0.0) || !(b > 0.0))
            throw PreconditionError("Kakutani overlap requires positive rules");
        log_overlap += 0.5 * (std::log1p(a) + std::log1p(b)) - std::log1p(0.5 * (a + b));
        const double term = (a - b) * (a - b) / (a * b);
        crit += term;
        if (term > 0.0)
            all_zero = false;
        if (n >= fit_start && term > 0.0) {
            const double x = std::log(static_cast<double>(n)), y = std::log(term);
            sx += x; sy += y; sxx += x * x; sxy += x * y;
            ++cnt;
        }
    }
    res.log_overlap = static_cast<double>(log_overlap);
    res.overlap = std::exp(res.log_overlap);
    res.criterion = static_cast<double>(crit);
    if (all_zero) {
        res.tail_slope = -kInfinity;
        res.equivalent = true;
    } else {
        const double c = static_cast<double>(cnt);
        res.tail_slope = cnt > 1 ? (c * sxy - sx * sy) / (c * sxx - sx * sx) : 0.0;
        res.equivalent = res.tail_slope < -1.05;
    }
    return res;
}

Proportion wilson_interval(std::size_t k, std::size_t n, double z)
{
    Proportion p;
    p.successes = k;
    p.trials = n;
    if (n == 0) {
        p.upper = 1.0;
        return p;
    }
    const double nn = static_cast<double>(n);
    const double f = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double centre = (f + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
    const double half = z / (1.0 + z2 / nn) * std::sqrt(f * (1.0 - f) / nn + z2 / (4.0 * nn * nn));
    p.fraction = f;
    p.lower = std::max(0.0, centre - half);
    p.upper = std::min(1.0, centre + half);
    return p;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += threads)
                    fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

McInvertibility mc_invertibility(const RandomModel& model, double theta, double x0,
                                 std::size_t N_max, std::size_t trials, double tol,
                                 unsigned threads)
{
    McInvertibility res;
    res.verdicts.resize(trials);
    res.log10_ratio.resize(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        const RootCoordinateSequence coords = sample_model(model, N_max, t);
        const CollapseTrace tr = collapse_probe(coords, theta, x0, N_max, tol, false);
        res.verdicts[t] = tr.verdict;
        res.log10_ratio[t] = std::log10(tr.D.back() / x0);
    });
    const auto k = static_cast<std::size_t>(
        std::count(res.verdicts.begin(), res.verdicts.end(), CollapseVerdict::collapsed));
    res.collapsed = wilson_interval(k, trials);
    return res;
}

double dilog_series(double y)
{
    if (std::abs(y) > 1.0)
        throw PreconditionError("dilog series requires |y| <= 1");
    if (y == 1.0)
        return kPi * kPi / 6.0;
    if (y == -1.0)
        return -kPi * kPi / 12.0;
    long double acc = 0.0L, pw = 1.0L;
    for (std::size_t k = 1; k < 50000000; ++k) {
        pw *= y;
        const long double kk = static_cast<long double>(k);
        acc += pw / (kk * kk);
        const double bound = std::abs(static_cast<double>(pw)) * std::abs(y) /
                             ((kk + 1) * (kk + 1) * (1.0 - std::abs(y)));
        if (bound < 1e-18)
            break;
    }
    return static_cast<double>(acc);
}

std::vector<DecayRow> mc_derivative_decay(const RandomModel& model, double theta,
                                          const std::vector<std::size_t>& schedule,
                                          std::size_t trials, double threshold, bool compose,
                                          unsigned threads)
{
    if (schedule.empty())
        return {};
    std::vector<std::size_t> sched = schedule;
    std::sort(sched.begin(), sched.end());
    const std::size_t N_max = sched.back();
    // samples[j][t] = log Sigma'_{N_j} for trial t
    std::vector<std::vector<double>> samples(sched.size(), std::vector<double>(trials));
    parallel_for(trials, threads, [&](std::size_t t) {
        std::size_t j = 0;
        double acc = 0.0;
        auto record = [&](std::size_t n) {
            while (j < sched.size() && sched[j] == n)
                samples[j++][t] = acc;
        };
        record(0);
        if (compose) {
            const RootCoordinateSequence coords = sample_model(model, N_max, t);
            double x = theta;
            for (std::size_t n = 1; n <= N_max; ++n) {
                const cplx w = coords.coefficient(n);
                if (std::abs(w) >= 1.0)
                    throw PreconditionError("derivative decay requires open-disk magnitudes");
                const unsigned nn = static_cast<unsigned>(n);
                acc += std::log(phi_lift_derivative(nn, w, x));
                x = phi_lift(nn, w, x);
                record(n);
            }
        } else {
            auto eng = trial_engine(model.seed, t);
            for (std::size_t n = 1; n <= N_max; ++n) {
                double r;
                if (model.kind == RandomModel::Kind::beta) {
                    const double a = model.beta.a(n);
                    r = std::sqrt(-std::expm1(std::log1p(-uniform01(eng)) / (a + 1.0)));
                } else {
                    r = model.magnitude.radius(n);
                }
                if (r >= 1.0)
                    throw PreconditionError("derivative decay requires open-disk magnitudes");
                const double v = kTwoPi * uniform01(eng);
                acc += std::log1p(-r * r) - std::log(1.0 + 2.0 * r * std::cos(v) + r * r);
                record(n);
            }
        }
    });

    std::vector<DecayRow> rows;
    double exp_mean = 0.0, exp_var = 0.0, s = 0.0;
    std::size_t n_done = 0;
    const bool deterministic = model.kind == RandomModel::Kind::magnitude;
    const double log_thr = std::log(threshold);
    for (std::size_t j = 0; j < sched.size(); ++j) {
        for (; n_done < sched[j]; ++n_done) {
            const double r = deterministic ? model.magnitude.radius(n_done + 1) : std::nan("");
            exp_mean += std::log1p(-r * r);
            exp_var += 2.0 * dilog_series(r * r);
            s += r * r;
        }
        DecayRow row;
        row.N = sched[j];
        auto& v = samples[j];
        long double m = 0.0L;
        for (double x : v)
            m += x;
        row.mean = static_cast<double>(m / static_cast<long double>(trials));
        long double q = 0.0L;
        for (double x : v)
            q += (x - row.mean) * (x - row.mean);
        row.variance = trials > 1 ? static_cast<double>(q / static_cast<long double>(trials - 1)) : 0.0;
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        row.median = trials % 2 ? sorted[trials / 2]
                                : 0.5 * (sorted[trials / 2 - 1] + sorted[trials / 2]);
        row.fraction_small = static_cast<double>(std::count_if(v.begin(), v.end(),
                                                               [&](double x) { return x < log_thr; })) /
                             static_cast<double>(trials);
        row.expected_mean = exp_mean;
        row.expected_variance = exp_var;
        row.s = s;
        const double V = exp_var;
        row.envelope = V > 0.0 ? std::sqrt(2.0 * V * std::max(1.0, std::log(std::log(V)))) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

WeakStarEstimate weakstar_estimate(const RandomModel& model, const std::vector<double>& thetas,
                                   const std::vector<std::size_t>& schedule)
{
    WeakStarEstimate est;
    est.schedule = schedule;
    std::sort(est.schedule.begin(), est.schedule.end());
    if (est.schedule.empty())
        return est;
    const std::size_t N_max = est.schedule.back();
    const RootCoordinateSequence coords = sample_model(model, N_max, 0);
    std::vector<double> values = thetas;
    std::size_t j = 0;
    for (std::size_t n = 0; n <= N_max; ++n) {
        if (n > 0) {
            const cplx w = coords.coefficient(n);
            if (w != cplx{})
                for (double& v : values)
                    v = phi_lift(static_cast<unsigned>(n), w, v);
        }
        while (j < est.schedule.size() && est.schedule[j] == n) {
            CircleLift lift;
            lift.theta = thetas;
            lift.values = values;
            lift.truncation = n;
            lift.tail_bound = kInfinity;
            est.all_monotone = est.all_monotone && lift.is_monotone();
            est.lifts.push_back(std::move(lift));
            ++j;
        }
    }
    const std::size_t J = est.lifts.size(), G = thetas.size();
    est.oscillation.assign(J, std::vector<double>(G, 0.0));
    est.mean_oscillation.assign(J, 0.0);
    for (std::size_t i = 0; i < G; ++i) {
        double lo = kInfinity, hi = -kInfinity;
        for (std::size_t jj = J; jj-- > 0;) {
            lo = std::min(lo, est.lifts[jj].values[i]);
            hi = std::max(hi, est.lifts[jj].values[i]);
            est.oscillation[jj][i] = hi - lo;
        }
    }
    for (std::size_t jj = 0; jj < J; ++jj)
        est.mean_oscillation[jj] = periodic_mean(est.oscillation[jj]);
    return est;
}

MomentCheck log_modulus_moments(double rho, std::size_t grid)
{
    std::vector<double> x(grid), x2(grid);
    const std::vector<double> th = uniform_grid(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        x[i] = -std::log(1.0 + 2.0 * rho * std::cos(th[i]) + rho * rho);
        x2[i] = x[i] * x[i];
    }
    return {periodic_mean(x), periodic_mean(x2), 2.0 * dilog_series(rho * rho)};
}

} // namespace circlefact
