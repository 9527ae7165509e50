#include "doctest.h"

#include "circlefact/invertibility.hpp"

#include <cmath>

using namespace circlefact;

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double width_slope(double lambda)
{
    const auto co = RootCoordinateSequence::from_rule(MagnitudeRule{lambda, -1.0});
    std::vector<double> x, y;
    for (double N = 500; N <= 10000; N *= 1.35) {
        const auto n = static_cast<std::size_t>(N);
        const IntervalBounds b = interval_bounds(co, 0.0, n);
        x.push_back(std::log(static_cast<double>(n)));
        y.push_back(std::log(b.a - b.b));
    }
    return slope(x, y);
}

} // namespace

TEST_SUITE("invertibility")
{
    TEST_CASE("rule classification")
    {
        CHECK(classify_rule(MagnitudeRule{0.4, -1.0}) == Invertibility::invertible);
        CHECK(classify_rule(MagnitudeRule{1.0, -1.0}) == Invertibility::not_invertible);
        CHECK(classify_rule(MagnitudeRule{0.5, -1.0}) == Invertibility::undecided);
        CHECK(classify_rule(MagnitudeRule{1.0, -2.0}) == Invertibility::invertible);
        CHECK(classify_rule(std::nullopt) == Invertibility::undecided);
        CHECK(to_string(Invertibility::not_invertible) == "not_invertible");
        CHECK(to_string(CollapseVerdict::collapsed) == "collapsed");
        CHECK(to_string(SeriesVerdict::hypothesis_violated) == "hypothesis_violated");
    }

    TEST_CASE("collapse step reproduces the difference of lifts")
    {
        const cplx w(0.4, -0.3);
        for (double base : {0.0, 1.1, 4.0})
            for (double x : {1e-3, 0.2, 1.5}) {
                const double direct = phi_lift(3, w, base + x) - phi_lift(3, w, base);
                CHECK(collapse_step(3, w, base, x) == doctest::Approx(direct).epsilon(1e-12));
            }
    }

    TEST_CASE("collapse probe")
    {
        const CollapseTrace zero = collapse_probe(RootCoordinateSequence({0.0, 0.0}), 0.0, 0.01, 100);
        for (double D : zero.D)
            CHECK(D == 0.01);
        CHECK(zero.verdict == CollapseVerdict::separated);

        const auto bad = RootCoordinateSequence::from_rule(MagnitudeRule::parse("1/n@2"));
        const CollapseTrace c = collapse_probe(bad, 0.0, 0.01, 100000);
        CHECK(c.verdict == CollapseVerdict::collapsed);
        for (double D : c.D)
            CHECK(D >= 0.0);
        for (double p : c.p) {
            CHECK(p > 0.0);
            CHECK(p <= 1.0);
        }
        const auto good = RootCoordinateSequence::from_rule(MagnitudeRule::parse("0.4/n@2"));
        const CollapseTrace s = collapse_probe(good, 0.0, 0.01, 100000);
        CHECK(s.verdict == CollapseVerdict::separated);
        const double decade = std::log10(s.D[100000] / s.D[10000]);
        CHECK(decade == doctest::Approx(-0.8).epsilon(0.1));
        const CollapseTrace lean = collapse_probe(good, 0.0, 0.01, 100000, 1e-9, false);
        CHECK(lean.D.size() == 2);
        CHECK(lean.D.back() == s.D.back());

        CHECK_THROWS_AS(collapse_probe(RootCoordinateSequence::from_rule(MagnitudeRule::parse("1/n")), 0.0, 0.01, 10),
                        PreconditionError);
        CHECK_THROWS_AS(collapse_probe(good, 0.0, 0.0, 10), PreconditionError);
    }

    TEST_CASE("finite inverse and interval bounds")
    {
        const RootCoordinateSequence co({cplx(0.3, 0.2), cplx(-0.4, 0.1), 0.5});
        for (double y : {-1.0, 0.5, 3.0}) {
            const double x = sigma_inverse(co, 3, y);
            CHECK(sigma_at(co, 3, x) == doctest::Approx(y).epsilon(1e-11));
        }
        const IntervalBounds z = interval_bounds(RootCoordinateSequence({0.0}), 0.8, 5);
        CHECK(z.a == 0.8);
        CHECK(z.b == 0.8);

        const auto rule = RootCoordinateSequence::from_rule(MagnitudeRule{0.4, -1.0});
        const IntervalBounds b = interval_bounds(rule, 0.3, 1000);
        CHECK(b.b <= 0.3);
        CHECK(b.a >= 0.3);
        CHECK(sigma_at(rule, 1000, b.a) - sigma_at(rule, 1000, 0.3) >= 2.0 * b.tail * (1 - 1e-9));
        const IntervalBounds b2 = interval_bounds(rule, 0.3, 4000);
        CHECK(b2.a - b2.b < b.a - b.b);
    }

    TEST_CASE("interval width exponent")
    {
        CHECK(width_slope(0.4) == doctest::Approx(-0.2).epsilon(0.2));
        CHECK(width_slope(0.45) == doctest::Approx(-0.1).epsilon(0.2));
    }

    TEST_CASE("summability verdicts")
    {
        CHECK(thm14_report(MagnitudeRule{1.0, -0.5}, 100000).verdict == SeriesVerdict::convergent);
        CHECK(thm14_report(MagnitudeRule{std::sqrt(0.5), -0.5}, 100000).verdict == SeriesVerdict::divergent);
        CHECK(thm14_report(MagnitudeRule{1.0, -0.6}, 100000).verdict == SeriesVerdict::hypothesis_violated);
        const Thm14Report r = thm14_report(MagnitudeRule{1.0, -0.5}, 100000);
        CHECK(r.power_slope == doctest::Approx(-1.5).epsilon(0.02));
        CHECK(r.n.back() == 100000);
        for (std::size_t i = 1; i < r.n.size(); ++i)
            CHECK(r.n[i] > r.n[i - 1]);
        CHECK(thm14_c_step(0.5, 0.9, 3, 0.2, 1.0) == doctest::Approx(0.9 * 0.5 * (1 + 3 * 0.2 * 0.9 * 0.5)));
    }

    TEST_CASE("quasisymmetry ratio")
    {
        const std::vector<double> g = uniform_grid(512);
        const std::vector<std::size_t> t{1, 4, 16, 64};
        CHECK(qs_ratio(sigma_lift_eval(RootCoordinateSequence({0.0}), 1, g), t) == doctest::Approx(1.0).epsilon(1e-12));
        const double M = qs_ratio(sigma_lift_eval(RootCoordinateSequence({0.5}), 1, g), t);
        CHECK(std::isfinite(M));
        CHECK(M > 1.0);
        CircleLift step;
        step.theta = g;
        for (double th : g)
            step.values.push_back(phi_lift(2, 1.0, th));
        CHECK(qs_ratio(step, t) == kInfinity);
    }
}
