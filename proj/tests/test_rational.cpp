#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ramlab/rational.hpp"
#include "ramlab/valuation.hpp"

using namespace ramlab;

TEST_CASE("basic rational arithmetic stays normalized") {
    Rat a(Int(6), Int(4));
    CHECK(a.num() == 3);
    CHECK(a.den() == 2);
    CHECK((a + Rat(1, 2)) == Rat(2));
    CHECK((a * Rat(2, 3)) == Rat(1));
    CHECK((Rat(1) / Rat(3)).den() == 3);
    CHECK(Rat(-4, -6) == Rat(2, 3));
    CHECK(Rat(4, -6) == Rat(-2, 3));
    CHECK(Rat(0, 5) == Rat(0));
}

TEST_CASE("ordering and floor/ceil") {
    CHECK(Rat(1, 3) < Rat(1, 2));
    CHECK(Rat(-7, 2).floor() == -4);
    CHECK(Rat(-7, 2).ceil() == -3);
    CHECK(Rat(7, 2).floor() == 3);
    CHECK(rat_min(Rat(5, 3), Rat(3, 2)) == Rat(3, 2));
}

TEST_CASE("division by zero throws") {
    CHECK_THROWS_AS(Rat(1) / Rat(0), std::domain_error);
    CHECK_THROWS_AS(Rat(Int(1), Int(0)), std::domain_error);
}

TEST_CASE("valuations: infinity absorbs and wins min") {
    Valuation inf = Valuation::infinity();
    Valuation two(2);
    CHECK((inf + two).is_infinite());
    CHECK(val_min(inf, two) == two);
    CHECK(two < inf);
    CHECK(!(inf < inf));
    CHECK(inf == Valuation::infinity());
    CHECK((two * Rat(1, 2)) == Valuation(Rat(1)));
}

TEST_CASE("simplest rational in an interval") {
    CHECK(simplest_in_interval(Rat(3, 10), Rat(1, 2)) == Rat(1, 2));
    CHECK(simplest_in_interval(Rat(3, 10), Rat(2, 5)) == Rat(1, 3));
    CHECK(simplest_in_interval(Rat(1, 3), Rat(1, 3)) == Rat(1, 3));
    CHECK(simplest_in_interval(Rat(-1, 4), Rat(1, 7)) == Rat(0));
    CHECK(simplest_in_interval(Rat(5, 2), Rat(7, 2)) == Rat(3));
    CHECK(simplest_in_interval(Rat(17, 12), Rat(13, 9)) == Rat(10, 7));
    Rat r = simplest_in_interval(Rat(201, 100), Rat(207, 100));
    CHECK(r >= Rat(201, 100));
    CHECK(r <= Rat(207, 100));
    CHECK(r.den() <= 50);
}

TEST_CASE("denominator snapping via continued fractions") {
    CHECK(snap_denominator(Rat(22, 7), Int(7)) == Rat(22, 7));
    Rat pi_ish(314159, 100000);
    Rat s = snap_denominator(pi_ish, Int(200));
    CHECK(s.den() <= 200);
    CHECK(rat_abs(s - pi_ish) < Rat(1, 10000));
    CHECK(snap_denominator(Rat(1999, 1000), Int(10)) == Rat(2));
}
