#include "doctest.h"

#include "circlefact/core_maps.hpp"

#include <cmath>
#include <random>

using namespace circlefact;

TEST_SUITE("core_maps")
{
    TEST_CASE("phi_eval matches direct Moebius and angle evaluation")
    {
        const double th = 0.37;
        const PhiValue id = phi_eval(3, 0.0, std::polar(1.0, th));
        CHECK(std::abs(id.z - std::polar(1.0, th)) < 1e-15);

        const PhiValue v = phi_eval(1, 0.5, cplx(0.0, 1.0));
        CHECK(std::abs(v.z - cplx(0.8, 0.6)) < 1e-15);
        const cplx i(0.0, 1.0);
        CHECK(std::abs(v.z - (i + 0.5) / (1.0 + 0.5 * i)) < 1e-15);

        const PhiValue v2 = phi_eval(2, cplx(0.0, 0.5), i);
        CHECK(std::abs(v2.z - std::polar(1.0, kPi / 2 + std::atan(0.5))) < 1e-14);
        CHECK(std::abs(std::polar(1.0, phi_lift(2, cplx(0.0, 0.5), kPi / 2)) - v2.z) < 1e-14);
    }

    TEST_CASE("phi_lift closed values")
    {
        for (double th : {-2.0, 0.0, 1.3, 7.1})
            CHECK(phi_lift(4, 0.0, th) == doctest::Approx(th).epsilon(1e-15));
        CHECK(phi_lift(1, 0.5, kPi / 2) == doctest::Approx(kPi / 2 - 2 * std::atan(0.5)).epsilon(1e-14));
        CHECK(phi_lift(1, 0.5, kPi / 2) == doctest::Approx(0.6435011087932844).epsilon(1e-12));
    }

    TEST_CASE("phi_lift is a degree-one lift with positive derivative")
    {
        std::mt19937_64 eng(11);
        std::uniform_real_distribution<double> U(-0.95, 0.95);
        for (int t = 0; t < 20; ++t) {
            const unsigned n = 1 + t % 5;
            cplx w(U(eng), U(eng));
            if (std::abs(w) > 0.95)
                w *= 0.95 / std::abs(w);
            for (double th : {-1.0, 0.2, 2.9}) {
                CHECK(phi_lift(n, w, th + kTwoPi) == doctest::Approx(phi_lift(n, w, th) + kTwoPi).epsilon(1e-13));
                const double h = 1e-6;
                const double fd = (phi_lift(n, w, th + h) - phi_lift(n, w, th - h)) / (2 * h);
                CHECK(phi_lift_derivative(n, w, th) == doctest::Approx(fd).epsilon(1e-7));
                CHECK(phi_lift_derivative(n, w, th) > 0.0);
            }
        }
    }

    TEST_CASE("unit-modulus parameter gives a step map")
    {
        std::vector<double> seen;
        for (double th : uniform_grid(512)) {
            const double v = phi_lift(2, 1.0, th);
            const double r = std::remainder(v, kTwoPi);
            CHECK((std::abs(r) < 1e-12 || std::abs(std::abs(r) - kPi) < 1e-12));
        }
        CHECK(phi_is_jump(2, 1.0, kPi / 2));
        CHECK(phi_is_jump(2, 1.0, 3 * kPi / 2));
        CHECK_FALSE(phi_is_jump(2, 1.0, 0.3));
        const double below = phi_lift(2, 1.0, kPi / 2 - 1e-9);
        const double at = phi_lift(2, 1.0, kPi / 2);
        CHECK(below == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(at == doctest::Approx(kPi).epsilon(1e-12));
    }

    TEST_CASE("phi_inverse_param round trips")
    {
        CHECK(phi_inverse_param(2, 0.0) == cplx(0.0));
        CHECK(std::abs(phi_inverse_param(1, 0.5) - cplx(-0.5)) < 1e-16);
        const cplx w(0.2, 0.1);
        CHECK(std::abs(phi_inverse_param(3, w) + w) < 1e-16);
        double worst = 0.0;
        for (double th : uniform_grid(128)) {
            const double fwd = phi_lift(3, w, th);
            worst = std::max(worst, std::abs(phi_lift(3, phi_inverse_param(3, w), fwd) - th));
        }
        CHECK(worst < 1e-12);
    }

    TEST_CASE("magnitude rule parsing")
    {
        const MagnitudeRule a = MagnitudeRule::parse("1/n");
        CHECK(a.c == 1.0);
        CHECK(a.p == -1.0);
        const MagnitudeRule b = MagnitudeRule::parse("0.4/n@2");
        CHECK(b.c == 0.4);
        CHECK(b.first == 2);
        CHECK(b.radius(1) == 0.0);
        CHECK(b.radius(4) == doctest::Approx(0.1));
        const MagnitudeRule c = MagnitudeRule::parse("1/sqrt(n)");
        CHECK(c.p == -0.5);
        const MagnitudeRule d = MagnitudeRule::parse("n^-0.6");
        CHECK(d.c == 1.0);
        CHECK(d.p == -0.6);
        const MagnitudeRule e = MagnitudeRule::parse("0.5");
        CHECK(e.p == 0.0);
        CHECK(MagnitudeRule::parse(b.tag()).c == b.c);
        CHECK(MagnitudeRule::parse(b.tag()).first == b.first);
        CHECK_THROWS_AS(MagnitudeRule::parse("banana"), PreconditionError);
    }

    TEST_CASE("coordinate sequence validation")
    {
        CHECK_THROWS_AS(RootCoordinateSequence({cplx(1.5, 0.0)}), PreconditionError);
        CHECK_THROWS_AS(RootCoordinateSequence({0.1, 0.2}, std::nullopt, {1, 1}), PreconditionError);
        RootCoordinateSequence unit({1.0});
        CHECK_THROWS_AS(unit.require_open_disk(1), PreconditionError);
        RootCoordinateSequence perm({0.1, 0.2, 0.3}, std::nullopt, {3, 1, 2});
        CHECK(perm.slot(1) == 3);
        CHECK(perm.slot(3) == 2);
    }

    TEST_CASE("sigma_lift_eval degenerate cases")
    {
        const std::vector<double> th = uniform_grid(64);
        const CircleLift id = sigma_lift_eval(RootCoordinateSequence({0.0, 0.0, 0.0}), 3, th);
        for (std::size_t i = 0; i < th.size(); ++i)
            CHECK(id.values[i] == th[i]);

        const cplx w(0.3, -0.4);
        const CircleLift single = sigma_lift_eval(RootCoordinateSequence({0.0, 0.0, w}), 3, th);
        for (std::size_t i = 0; i < th.size(); ++i)
            CHECK(single.values[i] == doctest::Approx(phi_lift(3, w, th[i])).epsilon(1e-15));
        CHECK(single.is_monotone());
        CHECK_NOTHROW(single.validate());

        CHECK(std::abs(sigma_at(RootCoordinateSequence({0.5, 0.3}), 2, 0.0)) < 1e-15);
    }

    TEST_CASE("composition chain agrees with direct evaluation")
    {
        RootCoordinateSequence co({cplx(0.3, 0.1), cplx(-0.2, 0.25), cplx(0.1, 0.4)});
        const CompositionChain ch = chain_from(co, 3);
        for (double th : {0.0, 0.9, 4.0}) {
            CHECK(ch.lift(th) == doctest::Approx(sigma_at(co, 3, th)).epsilon(1e-14));
            const LiftJet j = ch.jet(th);
            const double h = 1e-5;
            CHECK(j.d1 == doctest::Approx((ch.lift(th + h) - ch.lift(th - h)) / (2 * h)).epsilon(1e-8));
            CHECK(j.d2 == doctest::Approx((ch.lift(th + h) - 2 * ch.lift(th) + ch.lift(th - h)) / (h * h)).epsilon(1e-4));
        }
        CompositionChain outer;
        outer.rotation = 0.7;
        outer.steps = {{2, cplx(0.2, 0.2)}};
        CompositionChain inner = ch;
        inner.rotation = -0.4;
        const CompositionChain both = inner.then(outer);
        for (double th : {0.1, 2.0, 5.5})
            CHECK(both.lift(th) == doctest::Approx(outer.lift(inner.lift(th))).epsilon(1e-13));
    }

    TEST_CASE("tail bounds")
    {
        CHECK(tail_bound(RootCoordinateSequence({0.0, 0.0}), 0) == 0.0);
        MagnitudeRule sq{1.0, -2.0};
        const double tb = tail_bound(RootCoordinateSequence::from_rule(sq), 10);
        double ref = 0.0;
        for (int k = 11; k < 2000000; ++k)
            ref += std::pow(k, -3.0);
        ref += 0.5 / (2000000.0 * 2000000.0);
        CHECK(tb <= kPi * ref);
        CHECK(tb > 0.0);
        CHECK(tail_bound(RootCoordinateSequence::from_rule(MagnitudeRule{0.5, 0.0}), 10) == kInfinity);
    }

    TEST_CASE("sigma_limit_eval certificates")
    {
        const LimitValue zero = sigma_limit_eval(RootCoordinateSequence(std::vector<cplx>{}), 1.2, 1e-8);
        CHECK(zero.value == 1.2);
        CHECK(zero.certificate_n == 0);

        const auto co = RootCoordinateSequence::from_rule(MagnitudeRule{0.4, -1.0});
        const LimitValue lv = sigma_limit_eval(co, 0.5, 1e-8);
        CHECK(lv.bound < 1e-8);
        const double N = static_cast<double>(lv.certificate_n);
        double arcsin_tail = 0.0;
        for (double k = N + 1; k <= N + 4096; ++k)
            arcsin_tail += 2.0 / k * std::asin(0.4 / k);
        arcsin_tail += 0.8 / (N + 4096.5);
        CHECK(arcsin_tail < 1e-8);
        CHECK(arcsin_tail <= kPi * 0.4 / (N + 0.5));
        CHECK(0.8 / (N - 0.5) > 1e-8 * 0.999);
        CHECK(std::abs(lv.value - sigma_at(co, lv.certificate_n, 0.5)) < 1e-15);

        CHECK_THROWS_AS(sigma_limit_eval(RootCoordinateSequence::from_rule(MagnitudeRule{0.5, 0.0}), 0.0, 1e-8),
                        NumericalError);
    }
}
