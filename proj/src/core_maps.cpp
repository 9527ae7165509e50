#include "circlefact/core_maps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <sstream>

namespace circlefact {

std::vector<double> uniform_grid(std::size_t n)
{
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    return g;
}

double periodic_mean(const std::vector<double>& samples)
{
    if (samples.empty())
        return 0.0;
    long double acc = 0.0L;
    for (double v : samples)
        acc += v;
    return static_cast<double>(acc / static_cast<long double>(samples.size()));
}

// ---------------------------------------------------------------- rules

double MagnitudeRule::radius(std::size_t n) const
{
    if (n < first || c == 0.0)
        return 0.0;
    return c * std::pow(static_cast<double>(n), p);
}

cplx MagnitudeRule::term(std::size_t n) const
{
    return std::polar(radius(n), phase);
}

std::string MagnitudeRule::tag() const
{
    std::ostringstream os;
    os.precision(17);
    os << c << "*n^" << p;
    if (first != 1)
        os << "@" << first;
    return os.str();
}

MagnitudeRule MagnitudeRule::parse(const std::string& text)
{
    static const std::regex first_re(R"(^(.*)@\s*([0-9]+)\s*$)");
    static const std::regex over_n(R"(^\s*([-+0-9.eE]*)\s*/\s*n\s*$)");
    static const std::regex over_sqrt(R"(^\s*([-+0-9.eE]*)\s*/\s*sqrt\(\s*n\s*\)\s*$)");
    static const std::regex power(R"(^\s*(?:([-+0-9.eE]+)\s*\*\s*)?n\s*\^\s*\(?\s*([-+0-9.eE]+)\s*\)?\s*$)");
    static const std::regex constant(R"(^\s*([-+0-9.eE]+)\s*$)");

    MagnitudeRule r;
    std::string body = text;
    std::smatch m;
    if (std::regex_match(text, m, first_re)) {
        body = m[1].str();
        r.first = std::stoul(m[2].str());
    }
    auto num = [](const std::string& s) { return s.empty() ? 1.0 : std::stod(s); };
    try {
        if (std::regex_match(body, m, over_n)) {
            r.c = num(m[1].str());
            r.p = -1.0;
        } else if (std::regex_match(body, m, over_sqrt)) {
            r.c = num(m[1].str());
            r.p = -0.5;
        } else if (std::regex_match(body, m, power)) {
            r.c = num(m[1].str());
            r.p = std::stod(m[2].str());
        } else if (std::regex_match(body, m, constant)) {
            r.c = std::stod(m[1].str());
            r.p = 0.0;
        } else {
            throw PreconditionError("unrecognised magnitude rule '" + text + "'");
        }
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const PreconditionError*>(&e))
            throw;
        throw PreconditionError("unrecognised magnitude rule '" + text + "'");
    }
    if (r.c < 0.0)
        throw PreconditionError("magnitude rule must be nonnegative: '" + text + "'");
    return r;
}

// ---------------------------------------------------------------- sequences

RootCoordinateSequence::RootCoordinateSequence(std::vector<cplx> terms,
                                               std::optional<MagnitudeRule> rule,
                                               std::vector<std::size_t> ordering)
    : terms_(std::move(terms)), rule_(rule), ordering_(std::move(ordering))
{
    for (std::size_t i = 0; i < terms_.size(); ++i)
        if (std::abs(terms_[i]) > 1.0 + 1e-13)
            throw PreconditionError("|w_" + std::to_string(i + 1) + "| exceeds 1");
    if (!ordering_.empty()) {
        std::vector<std::size_t> sorted = ordering_;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i)
            if (sorted[i] != i + 1)
                throw PreconditionError("ordering is not a permutation of 1.." +
                                        std::to_string(sorted.size()));
    }
}

RootCoordinateSequence RootCoordinateSequence::from_rule(const MagnitudeRule& rule)
{
    return RootCoordinateSequence({}, rule);
}

cplx RootCoordinateSequence::coefficient(std::size_t n) const
{
    if (n == 0)
        return {};
    if (n <= terms_.size())
        return terms_[n - 1];
    if (rule_)
        return rule_->term(n);
    return {};
}

std::size_t RootCoordinateSequence::slot(std::size_t k) const
{
    if (k >= 1 && k <= ordering_.size())
        return ordering_[k - 1];
    return k;
}

std::size_t RootCoordinateSequence::support() const
{
    if (rule_ && rule_->c != 0.0)
        return std::numeric_limits<std::size_t>::max();
    return std::max(terms_.size(), ordering_.size());
}

void RootCoordinateSequence::require_open_disk(std::size_t N) const
{
    const std::size_t top = std::min(N, support());
    for (std::size_t k = 1; k <= top; ++k) {
        const std::size_t n = slot(k);
        if (std::abs(coefficient(n)) >= 1.0 - 1e-15)
            throw PreconditionError("w_" + std::to_string(n) +
                                    " lies on the unit circle; open disk required");
    }
}

// ---------------------------------------------------------------- basic maps

namespace {

bool on_circle(cplx w) { return std::abs(std::abs(w) - 1.0) < 1e-13; }

// Polar angle of 1 + w e^{i n theta} in (-pi/2, pi/2], right-continuous.
double polar_angle(unsigned n, cplx w, double theta, bool* jump)
{
    if (jump)
        *jump = false;
    if (w == cplx{})
        return 0.0;
    const double x = static_cast<double>(n) * theta;
    const cplx g = w * std::polar(1.0, x);
    if (on_circle(w)) {
        if (std::abs(1.0 + g) < 1e-14) {
            if (jump)
                *jump = true;
            return -kPi / 2.0;
        }
        return std::remainder(x + std::arg(w), kTwoPi) / 2.0;
    }
    return std::atan2(g.imag(), 1.0 + g.real());
}

} // namespace

double phi_lift(unsigned n, cplx w, double theta)
{
    if (n == 0)
        throw PreconditionError("phi index must be positive");
    if (std::abs(w) > 1.0 + 1e-13)
        throw PreconditionError("phi parameter outside the closed disk");
    return theta - 2.0 / static_cast<double>(n) * polar_angle(n, w, theta, nullptr);
}

bool phi_is_jump(unsigned n, cplx w, double theta)
{
    bool jump = false;
    polar_angle(n, w, theta, &jump);
    return jump;
}

double phi_lift_derivative(unsigned n, cplx w, double theta)
{
    if (std::abs(w) >= 1.0)
        throw PreconditionError("derivative requires |w| < 1");
    const cplx g = w * std::polar(1.0, static_cast<double>(n) * theta);
    return (1.0 - std::norm(w)) / std::norm(1.0 + g);
}

PhiValue phi_eval(unsigned n, cplx w, cplx z)
{
    if (std::abs(std::abs(z) - 1.0) > 1e-12)
        throw PreconditionError("phi_eval requires |z| = 1");
    const double theta = std::arg(z);
    bool jump = false;
    const double angle = polar_angle(n, w, theta, &jump);
    if (n == 0)
        throw PreconditionError("phi index must be positive");
    const double lift = theta - 2.0 / static_cast<double>(n) * angle;
    return {std::polar(1.0, lift), jump};
}

cplx phi_inverse_param(unsigned n, cplx w)
{
    if (n == 0)
        throw PreconditionError("phi index must be positive");
    if (std::abs(w) >= 1.0)
        throw PreconditionError("step maps (|w| = 1) are not invertible");
    return -w;
}

// ---------------------------------------------------------------- lifts

bool CircleLift::is_monotone(double slack) const
{
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] < values[i - 1] - slack)
            return false;
    return true;
}

void CircleLift::validate(double slack) const
{
    if (theta.size() != values.size())
        throw PreconditionError("lift grid and values differ in length");
    if (!is_monotone(slack))
        throw PreconditionError("lift is not nondecreasing on its grid");
    if (!values.empty() && values.back() > values.front() + kTwoPi + slack)
        throw PreconditionError("lift violates the 2*pi wrap condition");
}

CircleLift sigma_lift_eval(const RootCoordinateSequence& coords, std::size_t N,
                           const std::vector<double>& thetas,
                           std::vector<std::vector<double>>* steps)
{
    CircleLift out;
    out.theta = thetas;
    out.values = thetas;
    out.truncation = N;
    const std::size_t top = std::min(N, coords.support());
    if (steps) {
        steps->assign(1, thetas);
        steps->reserve(top + 1);
    }
    for (std::size_t k = 1; k <= top; ++k) {
        const std::size_t n = coords.slot(k);
        const cplx w = coords.coefficient(n);
        if (w != cplx{})
            for (double& v : out.values)
                v = phi_lift(static_cast<unsigned>(n), w, v);
        if (steps)
            steps->push_back(out.values);
    }
    out.tail_bound = tail_bound(coords, N);
    return out;
}

double sigma_at(const RootCoordinateSequence& coords, std::size_t N, double theta)
{
    const std::size_t top = std::min(N, coords.support());
    for (std::size_t k = 1; k <= top; ++k) {
        const std::size_t n = coords.slot(k);
        const cplx w = coords.coefficient(n);
        if (w != cplx{})
            theta = phi_lift(static_cast<unsigned>(n), w, theta);
    }
    return theta;
}

double tail_bound(const RootCoordinateSequence& coords, std::size_t N)
{
    auto term = [&](std::size_t k) {
        const std::size_t n = coords.slot(k);
        const double r = std::min(1.0, coords.magnitude(n));
        return 2.0 / static_cast<double>(n) * std::asin(r);
    };
    const std::size_t explicit_top = std::max(coords.terms().size(), coords.ordering().size());
    const auto& rule = coords.rule();
    if (!rule || rule->c == 0.0) {
        long double acc = 0.0L;
        for (std::size_t k = N + 1; k <= explicit_top; ++k)
            acc += term(k);
        return static_cast<double>(acc);
    }
    if (rule->p >= 0.0)
        return kInfinity;

    std::size_t K = std::max(N, explicit_top) + 4096;
    const double unit_index = std::pow(2.0 * rule->c, -1.0 / rule->p);
    if (static_cast<double>(K) < unit_index)
        K = static_cast<std::size_t>(std::ceil(unit_index));
    K = std::max(K, rule->first);
    long double acc = 0.0L;
    for (std::size_t k = N + 1; k <= K; ++k)
        acc += term(k);
    const double xK = rule->radius(K);
    const double s = xK > 0.0 ? std::asin(std::min(1.0, xK)) / xK : 1.0;
    acc += 2.0 * s * xK / (-rule->p);
    return static_cast<double>(acc);
}

LimitValue sigma_limit_eval(const RootCoordinateSequence& coords, double theta, double tol)
{
    if (!(tol > 0.0))
        throw PreconditionError("tolerance must be positive");
    if (tail_bound(coords, 0) < tol)
        return {theta, 0, tail_bound(coords, 0)};

    std::size_t hi = 1;
    double bound = tail_bound(coords, hi);
    if (!std::isfinite(bound))
        throw NumericalError("no deterministic certificate: tail series diverges");
    const std::size_t cap = std::size_t{1} << 40;
    while (bound >= tol) {
        if (hi >= cap)
            throw NumericalError("no deterministic certificate below N = 2^40");
        hi *= 2;
        bound = tail_bound(coords, hi);
    }
    std::size_t lo = hi / 2;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (tail_bound(coords, mid) < tol)
            hi = mid;
        else
            lo = mid;
    }
    return {sigma_at(coords, hi, theta), hi, tail_bound(coords, hi)};
}

// ---------------------------------------------------------------- chains

double CompositionChain::lift(double theta) const
{
    for (const auto& s : steps)
        theta = phi_lift(s.n, s.w, theta);
    return theta + rotation;
}

LiftJet CompositionChain::jet(double theta) const
{
    // Carries Sigma, log Sigma' and its derivative through each factor.
    double x = theta;
    double dx = 1.0;
    double ddx = 0.0;
    for (const auto& s : steps) {
        const double nn = static_cast<double>(s.n);
        const cplx g = s.w * std::polar(1.0, nn * x);
        const cplx q = g / (1.0 + g);
        const double phi1 = (1.0 - std::norm(s.w)) / std::norm(1.0 + g);
        // d/dt log Phi'(t) = -2 Re[i n g / (1+g)]
        const double dlog = -2.0 * std::real(cplx(0.0, nn) * q);
        const double nx = phi_lift(s.n, s.w, x);
        ddx = phi1 * (dlog * dx * dx + ddx);
        dx = phi1 * dx;
        x = nx;
    }
    return {x + rotation, dx, ddx};
}

bool CompositionChain::open_disk() const
{
    return std::all_of(steps.begin(), steps.end(),
                       [](const ChainStep& s) { return std::abs(s.w) < 1.0; });
}

CompositionChain CompositionChain::then(const CompositionChain& outer) const
{
    CompositionChain out;
    out.rotation = rotation + outer.rotation;
    out.steps = steps;
    for (const auto& s : outer.steps)
        out.steps.push_back({s.n, s.w * std::polar(1.0, static_cast<double>(s.n) * rotation)});
    return out;
}

CompositionChain chain_from(const RootCoordinateSequence& coords, std::size_t N)
{
    CompositionChain c;
    const std::size_t top = std::min(N, coords.support());
    for (std::size_t k = 1; k <= top; ++k) {
        const std::size_t n = coords.slot(k);
        const cplx w = coords.coefficient(n);
        if (w != cplx{})
            c.steps.push_back({static_cast<unsigned>(n), w});
    }
    return c;
}

} // namespace circlefact
