#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ramlab/local_field.hpp"

using namespace ramlab;

static FieldPtr Qp(int p, int prec = 40) { return LocalField::make_base(p, 0, prec); }

TEST_CASE("valuations in the base field") {
    auto K = Qp(5);
    CHECK(K->from_int(5).val() == Valuation(1));
    CHECK(K->from_int(1).val() == Valuation(0));
    CHECK(K->from_int(250).val() == Valuation(3));
    CHECK(K->zero().val().is_infinite());
    CHECK(K->from_int(-5).val() == Valuation(1));
    CHECK(K->uniformizer().val() == Valuation(1));
}

TEST_CASE("ramified quadratic: v(pi)=1 so v(p)=2") {
    auto K = Qp(5);
    auto L = LocalField::extend(K, {-K->from_int(5), K->zero()});
    CHECK(L->e_abs() == 2);
    CHECK(embed(K->from_int(5), L).val() == Valuation(2));
    CHECK(L->uniformizer().val() == Valuation(1));
    Elt pi2 = L->uniformizer() * L->uniformizer();
    CHECK((pi2 - embed(K->from_int(5), L)).val().is_infinite());
}

TEST_CASE("inverse by geometric series: 1/(1-p) = sum p^k") {
    auto K = Qp(3);
    Elt x = K->one() - K->from_int(3);
    Elt inv = x.inv();
    Elt acc = K->zero();
    Int pk = 1;
    for (int k = 0; k < 40; ++k) {
        acc += K->from_int(pk);
        pk *= 3;
    }
    CHECK((inv - acc).val().is_infinite());
}

TEST_CASE("field axioms on random elements (seeded)") {
    std::mt19937_64 rng(20240817);
    auto K = Qp(3);
    auto L = LocalField::extend(K, {-K->from_int(3), K->from_int(3)});  // T^2+3T-3
    auto M = LocalField::extend(L, {-L->uniformizer(), L->zero()});     // T^2 - pi_L
    for (int iter = 0; iter < 25; ++iter) {
        Elt a = M->random_integral(rng);
        Elt b = M->random_integral(rng);
        Elt c = M->random_integral(rng);
        // ring identities
        CHECK(((a + b) * c - (a * c + b * c)).val().is_infinite());
        CHECK((a * b - b * a).val().is_infinite());
        // ultrametric inequality, with equality when valuations differ
        Valuation va = a.val(), vb = b.val(), vs = (a + b).val();
        CHECK(vs >= val_min(va, vb));
        if (va != vb) CHECK(vs == val_min(va, vb));
        // multiplicativity
        Valuation vp = (a * b).val();
        if (!va.is_infinite() && !vb.is_infinite()) CHECK(vp == va + vb);
    }
}

TEST_CASE("inversion round-trips") {
    std::mt19937_64 rng(7);
    auto K = Qp(2);
    auto L = LocalField::extend(K, {-K->from_int(2), K->from_int(4), K->zero()});
    for (int iter = 0; iter < 10; ++iter) {
        Elt a = L->random_element(rng, 0, true);
        Elt r = a * a.inv() - L->one();
        Valuation v = r.val();
        CHECK((v.is_infinite() || v >= Valuation(60)));
    }
    // non-unit inversion: v(x) != 0
    Elt x = L->uniformizer().pow(3) * L->from_int(7);
    Elt y = x.inv();
    CHECK(y.val() == Valuation(-3));
    CHECK((x * y - L->one()).val().is_infinite());
}

TEST_CASE("pi^{-1} and canonical forms") {
    auto K = Qp(5);
    auto L = LocalField::extend(K, {-K->from_int(5), K->from_int(10)});
    Elt pinv = L->pi_pow(-1);
    CHECK(pinv.val() == Valuation(-1));
    CHECK((L->uniformizer() * pinv - L->one()).val().is_infinite());
    Elt a = L->random_integral(*(new std::mt19937_64(3)));
    Elt messy = a * pinv * L->uniformizer();
    Elt can = messy.canonical();
    CHECK(can.shift() == 0);
    CHECK((can - a).val().is_infinite());
    for (const auto& d : can.digits()) {
        Valuation dv = d.val();
        CHECK((dv.is_infinite() || dv >= Valuation(0)));
    }
}

TEST_CASE("negative-valuation elements have no canonical integral form") {
    auto K = Qp(5);
    CHECK_THROWS_AS(K->uniformizer().pow(-2).canonical(), NegativeValuation);
}

TEST_CASE("residue field and canonical lift") {
    auto K = LocalField::make_base(3, 1);  // F_3(t1) residue field
    Elt t = K->transcendental(1);
    Elt x = (t * t + K->from_int(2)) * (t + K->from_int(1)).inv();
    ResidueElt r = residue(x);
    Elt back = r.lift_to(K);
    CHECK(residue(back) == r);
    CHECK((residue(x * x) == r * r));
    CHECK((residue(x + x) == r + r));
    // residue kills the maximal ideal
    CHECK(residue(x + K->from_int(3)) == r);
    CHECK(residue(K->from_int(3)).is_zero());
    CHECK_THROWS_AS(residue(K->uniformizer().pow(-1)), NegativeValuation);
}

TEST_CASE("residue inversion in F_p(t)") {
    auto K = LocalField::make_base(5, 2);
    Elt t1 = K->transcendental(1), t2 = K->transcendental(2);
    ResidueElt r = residue(t1 * t2 + K->from_int(3));
    ResidueElt rinv = r.inv();
    ResidueElt one = residue(K->one());
    CHECK(r * rinv == one);
}

TEST_CASE("unramified step gives F_q and enumerate_fq") {
    // x^2 + x + 1 is irreducible mod 2
    auto K = LocalField::make_base(2, {Int(1), Int(1), Int(1)}, 0, 40);
    CHECK(K->f() == 2);
    auto fq = ResidueElt::enumerate_fq(K);
    CHECK(fq.size() == 4);
    // every nonzero element satisfies x^3 = 1 in F_4
    ResidueElt one = residue(K->one());
    int nonzero = 0;
    for (const auto& a : fq)
        if (!a.is_zero()) {
            ++nonzero;
            CHECK(a.pow(3) == one);
        }
    CHECK(nonzero == 3);
}

TEST_CASE("reducible unramified polynomial is rejected") {
    CHECK_THROWS_AS(LocalField::make_base(5, {Int(-1), Int(0), Int(1)}, 0, 40),
                    ReducibleUnramifiedStep);  // x^2 - 1
    CHECK_THROWS_AS(LocalField::make_base(7, {Int(-1), Int(0), Int(0), Int(1)}, 0, 40),
                    ReducibleUnramifiedStep);  // x^3 - 1
    // x^2 - 2 is irreducible mod 5
    CHECK_NOTHROW(LocalField::make_base(5, {Int(-2), Int(0), Int(1)}, 0, 40));
}

TEST_CASE("non-Eisenstein polynomials are rejected") {
    auto K = Qp(3);
    // constant term valuation 2
    CHECK_THROWS_AS(LocalField::extend(K, {K->from_int(9), K->zero()}), NonEisenstein);
    // middle coefficient a unit
    CHECK_THROWS_AS(LocalField::extend(K, {-K->from_int(3), K->one()}), NonEisenstein);
    // constant term a unit
    CHECK_THROWS_AS(LocalField::extend(K, {K->from_int(2), K->zero()}), NonEisenstein);
}

TEST_CASE("precision exhaustion raises PrecisionTooSmall") {
    auto K = Qp(2, 10);
    Elt x = K->from_int(1 << 8);  // v = 8 of 10 digits
    CHECK_THROWS_AS(x.inv().canonical(), RamlabError);
    Elt y = K->from_int(1 << 3);
    CHECK_NOTHROW(y.inv());
    CHECK_THROWS_AS((void)K->from_int(1 << 7).inv(), PrecisionTooSmall);
}

TEST_CASE("defining relation of the wild degree-p family holds") {
    // K_* generated by a root of T^p + pi T^{p-1} - pi over K
    for (int p : {2, 3, 5}) {
        auto K = Qp(p);
        std::vector<Elt> tail(p, K->zero());
        tail[0] = -K->uniformizer();
        tail[p - 1] = K->uniformizer();
        auto Ks = LocalField::extend(K, tail);
        Elt w = Ks->uniformizer();
        Elt lhs = w.pow(p) + embed(K->uniformizer(), Ks) * w.pow(p - 1) -
                  embed(K->uniformizer(), Ks);
        CHECK(lhs.val().is_infinite());
        // pi_K / w^p is 1 mod the maximal ideal
        Elt u = embed(K->uniformizer(), Ks) * w.pow(p).inv();
        CHECK((u - Ks->one()).val() >= Valuation(Rat(1, 1)));
    }
}

TEST_CASE("val_over converts between normalizations") {
    auto K = Qp(3);
    auto L = LocalField::extend(K, {-K->from_int(3), K->zero(), K->zero()});  // e=3
    Elt x = embed(K->from_int(3), L);
    CHECK(x.val() == Valuation(3));
    CHECK(x.val_over(K) == Valuation(1));
    CHECK(L->uniformizer().val_over(K) == Valuation(Rat(1, 3)));
}
