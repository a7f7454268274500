#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "ramlab/newton.hpp"

using namespace ramlab;

namespace {

FieldPtr Qp(int p, int prec = 40) { return LocalField::make_base(p, 0, prec); }

// K(pi) with pi^p + pi_K*pi^{p-1} = pi_K
FieldPtr wild_step(const FieldPtr& K) {
    int p = K->p();
    std::vector<Elt> tail(p, K->zero());
    tail[0] = -K->uniformizer();
    tail[p - 1] = K->uniformizer();
    return LocalField::extend(K, tail);
}

bool has_root_with_val(const std::vector<Elt>& roots, const Valuation& v) {
    return std::any_of(roots.begin(), roots.end(),
                       [&](const Elt& r) { return r.val() == v; });
}

}  // namespace

TEST_CASE("newton polygon of split polynomials") {
    auto K = Qp(5);
    Elt p = K->from_int(5);
    // (T-1)(T-p): root valuations 1 and 0
    FPoly f = FPoly::from_roots(K, {K->one(), p});
    auto segs = newton_polygon(f);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].root_val == Rat(1));
    CHECK(segs[0].length == 1);
    CHECK(segs[1].root_val == Rat(0));
    CHECK(segs[1].length == 1);
    // (T-p)^2(T-1/p): valuations 1,1,-1
    FPoly g = FPoly::from_roots(K, {p, p, p.inv()});
    segs = newton_polygon(g);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].root_val == Rat(1));
    CHECK(segs[0].length == 2);
    CHECK(segs[1].root_val == Rat(-1));
}

TEST_CASE("newton polygon of an eisenstein polynomial") {
    auto K = Qp(3);
    // T^4 - 3 over Q_3: pure slope 1/4
    FPoly f(K, {-K->from_int(3), K->zero(), K->zero(), K->zero(), K->one()});
    auto segs = newton_polygon(f);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].root_val == Rat(1, 4));
    CHECK(segs[0].length == 4);
}

TEST_CASE("roots are recovered with their valuations") {
    auto K = Qp(5);
    Elt p = K->from_int(5);
    std::vector<Elt> roots = {K->one(), p, p * p + K->one(), -p.inv().mul_int(2)};
    FPoly f = FPoly::from_roots(K, roots);
    auto found = roots_in_field(f, K);
    REQUIRE(found.size() == 4);
    for (const auto& r : roots) {
        bool ok = std::any_of(found.begin(), found.end(),
                              [&](const Elt& x) { return x.equals(r, 25); });
        CHECK(ok);
    }
    for (const auto& x : found) CHECK(f.eval(x).indistinguishable_from_zero());
}

TEST_CASE("roots at zero and multiple residue classes") {
    auto K = Qp(3);
    Elt p = K->from_int(3);
    // T^2 * (T - (1+p)) * (T - (1+2p)): residue root 1 is double
    FPoly f = FPoly::from_roots(
        K, {K->zero(), K->zero(), K->one() + p, K->one() + p.mul_int(2)});
    auto found = roots_in_field(f, K);
    REQUIRE(found.size() == 4);
    CHECK(std::count_if(found.begin(), found.end(),
                        [](const Elt& x) { return x.is_zero(); }) == 2);
    CHECK(has_root_with_val(found, Valuation(0)));
    bool a = std::any_of(found.begin(), found.end(),
                         [&](const Elt& x) { return x.equals(K->one() + p, 25); });
    bool b = std::any_of(found.begin(), found.end(),
                         [&](const Elt& x) { return x.equals(K->one() + p.mul_int(2), 25); });
    CHECK(a);
    CHECK(b);
}

TEST_CASE("random coprime-slope products round-trip") {
    std::mt19937_64 rng(20260823);
    for (int p : {2, 3, 5}) {
        auto K = Qp(p);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<Elt> roots;
            int n = 2 + int(rng() % 3);
            for (int i = 0; i < n; ++i) {
                Elt u = K->random_element(rng, 0, /*force_unit=*/true);
                int v = int(rng() % 5) - 2;
                roots.push_back(u.shifted(v));
            }
            FPoly f = FPoly::from_roots(K, roots);
            auto found = roots_in_field(f, K);
            REQUIRE(found.size() == roots.size());
            for (const auto& r : roots) CHECK(has_root_with_val(found, r.val()));
            for (const auto& x : found) CHECK(f.eval(x).val() > Valuation(20));
        }
    }
}

TEST_CASE("hensel slope factorization") {
    auto K = Qp(5);
    Elt p = K->from_int(5);
    FPoly f = FPoly::from_roots(K, {K->one(), p});
    auto facs = hensel_slope_factor(f);
    REQUIRE(facs.size() == 2);
    // product reassembles f
    FPoly prod = facs[0] * facs[1];
    for (int i = 0; i <= 2; ++i)
        CHECK((prod.coeff(i) - f.coeff(i)).val() > Valuation(25));
    // each factor is pure-slope
    for (const auto& g : facs) CHECK(newton_polygon(g).size() == 1);

    // three slopes: units, p, p^3 (double)
    FPoly g3 = FPoly::from_roots(K, {K->from_int(2), p, p.pow(3), p.pow(3).mul_int(3)});
    auto f3 = hensel_slope_factor(g3);
    REQUIRE(f3.size() == 3);
    CHECK(f3[0].degree() + f3[1].degree() + f3[2].degree() == 4);
    std::vector<Rat> vals;
    for (const auto& g : f3) vals.push_back(newton_polygon(g)[0].root_val);
    CHECK(vals == std::vector<Rat>{Rat(3), Rat(1), Rat(0)});
}

TEST_CASE("full hensel splitting and the inseparable diagnostic") {
    auto K = Qp(5);
    Elt p = K->from_int(5);
    FPoly f = FPoly::from_roots(K, {K->one(), K->from_int(2), p});
    auto facs = hensel_factor(f);
    REQUIRE(facs.size() == 3);
    for (const auto& g : facs) CHECK(g.degree() == 1);

    // residue (T-1)^2 at slope zero: plain lifting cannot separate
    auto K2 = Qp(2);
    Elt q = K2->from_int(2);
    FPoly h = FPoly::from_roots(K2, {K2->one() + q, K2->one() + q.mul_int(2) + q});
    CHECK_THROWS_AS(hensel_factor(h), InseparableResidual);

    // irreducible residue stays whole: T^2+T+1 over Q_2
    FPoly irr(K2, {K2->one(), K2->one(), K2->one()});
    auto fi = hensel_factor(irr);
    REQUIRE(fi.size() == 1);
    CHECK(fi[0].degree() == 2);
}

TEST_CASE("newton lift refines an approximate root quadratically") {
    auto K = Qp(3);
    // x^2 = 7 in Q_3, from x0 = 1
    FPoly f(K, {-K->from_int(7), K->zero(), K->one()});
    Elt r = newton_lift(f, K->one());
    CHECK(f.eval(r).indistinguishable_from_zero());
    CHECK((r * r).equals(K->from_int(7), 30));
}

TEST_CASE("wild eisenstein step: root differences have valuation 2") {
    for (int p : {2, 3, 5}) {
        CAPTURE(p);
        auto K = Qp(p, 60);
        auto L = wild_step(K);
        // h(T) = T^p + pi_K T^{p-1} - pi_K splits in L
        std::vector<Elt> c(p + 1, L->zero());
        c[0] = -embed(K->uniformizer(), L);
        c[p - 1] = embed(K->uniformizer(), L);
        c[p] = L->one();
        FPoly h(L, c);
        auto table = root_difference_table(h, L);
        REQUIRE(int(table.roots.size()) == p);
        for (const auto& r : table.roots) CHECK(r.val() == Valuation(1));
        for (std::size_t i = 0; i < table.roots.size(); ++i)
            for (std::size_t j = 0; j < table.roots.size(); ++j)
                if (i != j) CHECK(table.diff_val[i][j] == Valuation(2));
    }
}

TEST_CASE("adjoin_root matches direct extension") {
    auto K = Qp(3);
    auto L = adjoin_root(K, {-K->from_int(3), K->zero(), K->zero()});
    CHECK(L->e_rel() == 3);
    CHECK(L->uniformizer().pow(3).equals(embed(K->from_int(3), L), 30));
    CHECK_THROWS_AS(adjoin_root(K, {K->one()}), NonEisenstein);
}
