#include "doctest.h"

#include "circlefact/series.hpp"

#include <cmath>

using namespace circlefact;
namespace ps = circlefact::series;

TEST_SUITE("series")
{
    TEST_CASE("products and reciprocals")
    {
        const ps::Series a{1.0, 2.0, cplx(0.0, 1.0)};
        const ps::Series b{1.0, -1.0};
        const ps::Series ab = ps::multiply(a, b, 4);
        CHECK(ab[0] == cplx(1.0));
        CHECK(ab[1] == cplx(1.0));
        CHECK(ab[2] == cplx(-2.0, 1.0));
        CHECK(ab[3] == cplx(0.0, -1.0));
        CHECK(ab[4] == cplx(0.0));
        const ps::Series inv = ps::reciprocal(b, 10);
        for (const cplx& c : inv)
            CHECK(c == cplx(1.0));
        CHECK_THROWS_AS(ps::reciprocal(ps::Series{0.0, 1.0}, 3), PreconditionError);
    }

    TEST_CASE("log, exp and powers against closed forms")
    {
        const ps::Series one_plus{1.0, 1.0};
        const ps::Series l = ps::log(one_plus, 12);
        for (std::size_t k = 1; k <= 12; ++k)
            CHECK(l[k].real() == doctest::Approx((k % 2 ? 1.0 : -1.0) / double(k)).epsilon(1e-15));
        const ps::Series e = ps::exp(ps::Series{0.0, 1.0}, 12);
        double fact = 1.0;
        for (std::size_t k = 0; k <= 12; ++k) {
            if (k > 0)
                fact *= double(k);
            CHECK(e[k].real() == doctest::Approx(1.0 / fact).epsilon(1e-15));
        }
        const ps::Series half = ps::power(ps::Series{1.0, 0.0, 0.5}, -0.5, 8);
        CHECK(half[2].real() == doctest::Approx(-0.25));
        CHECK(half[4].real() == doctest::Approx(0.09375));
        const ps::Series sq = ps::multiply(ps::power(ps::Series{1.0, cplx(0.3, 0.2), -0.1}, 0.5, 20),
                                           ps::power(ps::Series{1.0, cplx(0.3, 0.2), -0.1}, 0.5, 20), 20);
        CHECK(std::abs(sq[1] - cplx(0.3, 0.2)) < 1e-15);
        CHECK(std::abs(sq[2] + 0.1) < 1e-15);
        for (std::size_t k = 3; k <= 20; ++k)
            CHECK(std::abs(sq[k]) < 1e-14);
        CHECK_THROWS_AS(ps::log(ps::Series{2.0, 1.0}, 3), PreconditionError);
        CHECK_THROWS_AS(ps::exp(ps::Series{1.0, 1.0}, 3), PreconditionError);
    }

    TEST_CASE("composition and Taylor shift")
    {
        const ps::Series geo = ps::reciprocal(ps::Series{1.0, -1.0}, 10);
        const ps::Series comp = ps::compose(geo, ps::Series{0.0, 0.5}, 10);
        for (std::size_t k = 0; k <= 10; ++k)
            CHECK(comp[k].real() == doctest::Approx(std::pow(0.5, double(k))));
        CHECK_THROWS_AS(ps::compose(geo, ps::Series{1.0, 1.0}, 3), PreconditionError);

        const ps::Series p{1.0, cplx(2.0, -1.0), 3.0, cplx(0.0, 0.5)};
        const cplx c(0.3, -0.7);
        const ps::Series sh = ps::taylor_shift(p, c);
        for (cplx x : {cplx(0.1, 0.2), cplx(-0.4, 0.0)})
            CHECK(std::abs(ps::eval(sh, x) - ps::eval(p, c + x)) < 1e-14);
        CHECK(std::abs(ps::eval_derivative(p, c) - sh[1]) < 1e-14);
        CHECK(ps::tail_size(ps::Series{1.0, 1.0, 1.0, 1.0}, 0.5, 2) == doctest::Approx(0.25));
    }
}
