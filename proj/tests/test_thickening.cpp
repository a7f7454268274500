#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ramlab/ramification.hpp"
#include "ramlab/thickening.hpp"

using namespace ramlab;

namespace {

bool poly_negligible(const GaussPoly& g) {
    for (const auto& [e, c] : g.terms())
        if (!c.indistinguishable_from_zero()) return false;
    return true;
}

// membership in pi^c * p * (d0/pi, d_J)-span, the modulus of the psi
// homomorphism defect
bool in_defect_ideal(const GaussPoly& X, int m, const Rat& c, long horizon) {
    Rat beta = X.field()->beta();
    for (const auto& [e, q] : X.terms()) {
        Valuation v = q.val();
        if (v.is_infinite() || v >= Valuation(Rat(horizon))) continue;
        long k = e.empty() ? 0 : e[0];
        long dtot = 0;
        for (int j = 0; j <= m && j < int(e.size()); ++j) dtot += e[j];
        if (dtot == 0) return false;
        if (v.finite() + Rat(k) < c + beta) return false;
    }
    return true;
}

GaussPoly delta_to_zero(const GaussPoly& g, int m) {
    GaussPoly r = g;
    for (int j = 0; j <= m; ++j)
        r = r.substitute(delta_index(m, j), g.field()->zero());
    return r;
}

// beta = 2, p-basis {t1}: T^2 = p over F_p(t1)
FieldPtr square_root_of_p_field(int p, int prec = 40) {
    FieldPtr B = LocalField::make_base(p, 1, prec);
    return LocalField::extend(B, {-B->from_int(p), B->zero()});
}

}  // namespace

TEST_CASE("psi on explicit elements") {
    for (int p : {2, 3}) {
        FieldPtr K = LocalField::make_base(p, 1);
        VarTablePtr vars = thickening_vars(1);
        const int tr = 4;

        GaussPoly one = GaussPoly::constant(K->one(), vars, tr);
        CHECK(poly_negligible(psi(K->one(), vars, tr) - one));
        CHECK(psi(K->zero(), vars, tr).is_zero());

        GaussPoly P0 = GaussPoly::constant(K->uniformizer(), vars, tr) +
                       GaussPoly::variable(K, vars, delta_index(1, 0), tr);
        CHECK(poly_negligible(psi(K->uniformizer() * K->uniformizer(), vars, tr) -
                              P0 * P0));

        // a p-basis element deforms linearly: t1 -> t1 + d1
        GaussPoly T1 = GaussPoly::constant(K->transcendental(1), vars, tr) +
                       GaussPoly::variable(K, vars, delta_index(1, 1), tr);
        CHECK(poly_negligible(psi(K->transcendental(1), vars, tr) - T1));

        // pi-power prefactor rule
        CHECK(poly_negligible(psi(K->pi_pow(2) * K->transcendental(1), vars, tr) -
                              P0 * P0 * T1));
    }

    // same pi-power identity across a ramified step pi^2 = p
    FieldPtr K2 = square_root_of_p_field(3);
    VarTablePtr vars = thickening_vars(1);
    GaussPoly P0 = GaussPoly::constant(K2->uniformizer(), vars, 4) +
                   GaussPoly::variable(K2, vars, delta_index(1, 0), 4);
    CHECK(poly_negligible(psi(K2->pi_pow(2), vars, 4) - P0 * P0));

    // constant term of psi(h) recovers h
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
        Elt h = K2->random_integral(rng);
        Elt c0 = psi(h, vars, 3).constant_term() - h;
        CHECK(c0.indistinguishable_from_zero());
    }
}

TEST_CASE("psi across general towers and its limits") {
    // the relation of the ramified step is unconstrained: pi^2 = -3 works
    FieldPtr B = LocalField::make_base(3, 0);
    FieldPtr K = LocalField::extend(B, {B->from_int(3), B->zero()});  // pi^2 = -3
    VarTablePtr vars = thickening_vars(0);
    GaussPoly P0 = GaussPoly::constant(K->uniformizer(), vars, 3) +
                   GaussPoly::variable(K, vars, delta_index(0, 0), 3);
    CHECK(poly_negligible(psi(K->pi_pow(2), vars, 3) - P0 * P0));
    // Teichmueller digits keep sign units intact
    CHECK(poly_negligible(psi(-K->uniformizer(), vars, 3) + P0));

    // residue extensions have no monomial digit expansion
    FieldPtr F9 = LocalField::make_base(3, {Int(1), Int(0), Int(1)}, 0);
    CHECK_THROWS_AS(psi(F9->one() + F9->uniformizer(), thickening_vars(0), 3),
                    UnsupportedRelationShape);
}

TEST_CASE("digit decomposition and reassembly") {
    FieldPtr K = LocalField::make_base(3, 1);

    // single-term case: a p-basis element at level 1
    PBasisDecomposition D = decompose(K->transcendental(1), 1);
    REQUIRE(D.terms.size() == 1);
    const auto& [key, alpha] = *D.terms.begin();
    CHECK(key.eJ == std::vector<int>{1});
    CHECK(key.n == 0);
    CHECK(key.nprime == 0);
    CHECK((alpha - K->one()).is_zero());

    // exponent splitting: t^5 = t^2 * (t)^3 at p = 3, r = 1
    PBasisDecomposition D5 = decompose(K->transcendental(1).pow(5), 1);
    REQUIRE(D5.terms.size() == 1);
    CHECK(D5.terms.begin()->first.eJ == std::vector<int>{2});
    CHECK((D5.terms.begin()->second - K->transcendental(1)).is_zero());

    // repetition index carries the digit multiplicity
    PBasisDecomposition D2 = decompose(K->from_int(2), 1);
    CHECK(D2.terms.size() == 2);
    CHECK((D2.reassemble(K) - K->from_int(2)).indistinguishable_from_zero());

    // random round trips at levels 1 and 2, exponents below p^r
    std::mt19937_64 rng(23);
    for (int i = 0; i < 30; ++i) {
        Elt h = K->random_integral(rng, 6);
        for (int r : {1, 2}) {
            PBasisDecomposition Dr = decompose(h, r);
            CHECK(Dr.level == r);
            long pr = r == 1 ? 3 : 9;
            for (const auto& [k2, a2] : Dr.terms) {
                for (int e : k2.eJ) CHECK(e < pr);
                if (!a2.is_zero())
                    CHECK((a2.val() == Valuation(0) ||
                           (a2 - K->one()).is_zero()));
            }
            CHECK(Dr.reassemble(K).equals(h, 30));
            if (r == 2) {
                REQUIRE(Dr.compatibility_parent);
                CHECK(Dr.compatibility_parent->level == 1);
                CHECK(Dr.compatibility_parent->reassemble(K).equals(h, 30));
            }
        }
    }
}

TEST_CASE("approximate homomorphism") {
    FieldPtr K = square_root_of_p_field(3, 20);
    VarTablePtr vars = thickening_vars(1);
    const int tr = 4;

    // pure pi-powers multiply exactly
    ApproxHomReport pp = check_approx_hom(K->uniformizer(), K->uniformizer(), vars, tr);
    CHECK(pp.mult_ok);
    CHECK(pp.mult_margin.is_infinite());

    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        Elt h1 = K->random_integral(rng).shifted(int(rng() % 3));
        Elt h2 = K->random_integral(rng).shifted(int(rng() % 3));
        ApproxHomReport rep = check_approx_hom(h1, h2, vars, tr);
        CHECK(rep.mult_ok);
        CHECK(rep.add_ok);
        CHECK(rep.mult_margin >= Valuation(0));
        CHECK(rep.add_margin >= Valuation(0));
    }
}

TEST_CASE("linear deformation part") {
    // explicit: psi(pi t1) - pi t1 = t1 d0 + pi d1 + d0 d1
    FieldPtr B = LocalField::make_base(3, 1);
    VarTablePtr bv = thickening_vars(1);
    std::vector<Elt> L = psi_diff_linear(B->uniformizer() * B->transcendental(1), bv, 2);
    REQUIRE(L.size() == 2);
    CHECK((L[0] - B->transcendental(1)).indistinguishable_from_zero());
    CHECK((L[1] - B->uniformizer()).indistinguishable_from_zero());

    // Leibniz and additivity hold up to the homomorphism defect: coefficient
    // of d_j in the defect has valuation >= beta (>= beta - 1 for d0)
    FieldPtr K = square_root_of_p_field(3, 20);
    VarTablePtr vars = thickening_vars(1);
    Rat beta = K->beta();
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        Elt h1 = K->random_integral(rng);
        Elt h2 = K->random_integral(rng);
        auto L1 = psi_diff_linear(h1, vars, 2);
        auto L2 = psi_diff_linear(h2, vars, 2);
        auto Lm = psi_diff_linear(h1 * h2, vars, 2);
        auto La = psi_diff_linear(h1 + h2, vars, 2);
        for (int j = 0; j <= 1; ++j) {
            Valuation bound(j == 0 ? beta - Rat(1) : beta);
            CHECK((Lm[j] - h1 * L2[j] - h2 * L1[j]).val() >= bound);
            CHECK((La[j] - L1[j] - L2[j]).val() >= bound);
        }
    }
}

TEST_CASE("psi is independent of the digit system modulo the defect ideal") {
    FieldPtr K = square_root_of_p_field(5, 20);
    VarTablePtr vars = thickening_vars(1);
    std::mt19937_64 rng(13);
    int differing = 0;
    for (int i = 0; i < 40; ++i) {
        Elt h = K->random_integral(rng);
        GaussPoly diff = psi(h, vars, 4, true) - psi(h, vars, 4, false);
        if (!poly_negligible(diff)) ++differing;
        CHECK(in_defect_ideal(diff, 1, Rat(0), h.aprec()));
    }
    CHECK(differing > 0);  // the two digit systems genuinely disagree
}

TEST_CASE("error gauge membership scan") {
    FieldPtr K = square_root_of_p_field(3);
    FieldPtr L = LocalField::extend(K, {-K->uniformizer(), K->zero()});  // u^2 = pi_K
    VarTablePtr vars = thickening_vars(1);
    const int m = 1, e = 2;
    auto gens = standard_generators(L, K, m, 6);

    // standard presentation certifies the full window
    ThickeningPresentation P =
        make_presentation(K, m, e, gens, {}, Rat(2));
    CHECK(P.omega == Rat(2));

    GaussPoly z(K, vars, 6);
    GaussPoly d0 = GaussPoly::variable(K, vars, delta_index(m, 0), 6);
    GaussPoly d1 = GaussPoly::variable(K, vars, delta_index(m, 1), 6);
    GaussPoly u0 = GaussPoly::variable(K, vars, gen_index(m, 0), 6);

    // R_0 = p d0 u0 keeps the full gauge: v(p) + w(u0) clears the window
    CHECK(error_gauge({(d0 * u0).scale(K->from_int(3))}, m, e, K) == Rat(2));

    // R_1 = d0 with no weighted factor sits exactly on the admissibility
    // boundary; the membership scan certifies omega = 1 and nothing more
    CHECK(error_gauge({z, d0}, m, e, K) == Rat(1));

    // R_1 = d1 fails even at the boundary
    CHECK_THROWS_AS(error_gauge({z, d1}, m, e, K), NotAdmissible);
    // a residual outside the deformation ideal is rejected outright
    CHECK_THROWS_AS(
        error_gauge({GaussPoly::constant(K->uniformizer(), vars, 6)}, m, e, K),
        NotAdmissible);
}

TEST_CASE("generator shapes") {
    FieldPtr K = square_root_of_p_field(3);
    VarTablePtr vars = thickening_vars(1);

    // standard generator and its relation reduce to the defining polynomial
    FieldPtr L = LocalField::extend(K, {-K->uniformizer(), K->zero()});
    auto gens = standard_generators(L, K, 1, 6);
    REQUIRE(gens.size() == 1);
    ThickeningPresentation P = make_presentation(K, 1, 2, gens, {}, Rat(2));
    GaussPoly rel = relation(P, 0, 6);
    CHECK(poly_negligible(delta_to_zero(rel, 1) - gens[0]));
    // psi replaces the uniformizer coefficient: d0-linear term is -1
    std::vector<int> ed0(std::size_t(vars->size()), 0);
    ed0[std::size_t(delta_index(1, 0))] = 1;
    CHECK((rel.coeff(ed0) + K->one()).indistinguishable_from_zero());

    // misaligned uniformizer: u^2 - pi(1 + t1) is no standard generator
    Elt bad = -(K->uniformizer() * (K->one() + K->transcendental(1)));
    FieldPtr Lbad = LocalField::extend(K, {bad, K->zero()});
    CHECK_THROWS_AS(standard_generators(Lbad, K, 1, 6), BasisReductionFailure);

    // fierce generator u1^3 - t1 - pi u1 passes the tail test
    FieldPtr B3 = LocalField::make_base(3, 1);
    FieldPtr K3 = LocalField::extend(B3, {-B3->from_int(3), B3->zero(), B3->zero()});
    GaussPoly p1(K3, vars, 6);
    std::vector<int> ex(std::size_t(vars->size()), 0);
    ex[std::size_t(gen_index(1, 1))] = 3;
    p1.set_coeff(ex, K3->one());
    GaussPoly tail = GaussPoly::constant(-K3->transcendental(1), vars, 6) +
                     GaussPoly::variable(K3, vars, gen_index(1, 1), 6)
                         .scale(-K3->uniformizer());
    p1 += tail;
    CHECK_NOTHROW(check_generator_shape(p1, 1, 3, 1, 3));

    // a unit-coefficient term in the generator's own variable is rejected
    // (u0 would be fine: it carries weight 1/e)
    GaussPoly worse = p1 + GaussPoly::variable(K3, vars, gen_index(1, 1), 6);
    CHECK_THROWS_AS(check_generator_shape(worse, 1, 3, 1, 3),
                    BasisReductionFailure);
}

TEST_CASE("component counts of a one-relation space") {
    for (int p : {2, 3, 5}) {
        FieldPtr K = LocalField::make_base(p, 0);
        std::vector<Elt> tail(std::size_t(p), K->zero());
        tail[0] = -K->uniformizer();
        tail[std::size_t(p) - 1] = K->uniformizer();
        FieldPtr L = LocalField::extend(K, tail);
        std::vector<Elt> cs(tail);
        cs.push_back(K->one());
        FPoly p0(K, cs);

        // log level above the log break: p discs of radius a - (p-2)/p
        for (Rat a : {Rat(2), Rat(3, 2)}) {
            ComponentCount cc = count_components_single_relation(p0, L, a, true);
            CHECK(cc.components == p);
            Rat expect = a - Rat(p - 2, p);
            for (const auto& r : cc.log_radii) CHECK(r == expect);
        }
        // at or below the log break everything collapses
        CHECK(count_components_single_relation(p0, L, Rat(1, 2), true).components < p);
        CHECK(count_components_single_relation(p0, L, Rat(1), true).components < p);
        CHECK(count_components_single_relation(p0, L, Rat(11, 10), true).components == p);
        // non-log threshold sits one higher
        CHECK(count_components_single_relation(p0, L, Rat(2), false).components < p);
        CHECK(count_components_single_relation(p0, L, Rat(21, 10), false).components == p);
    }

    // tame quadratic: split happens above the non-log break 1
    FieldPtr K = LocalField::make_base(3, 0);
    FieldPtr L = LocalField::extend(K, {-K->uniformizer(), K->zero()});
    FPoly t2(K, {-K->uniformizer(), K->zero(), K->one()});
    CHECK(count_components_single_relation(t2, L, Rat(1, 2), false).components == 1);
    CHECK(count_components_single_relation(t2, L, Rat(3, 2), false).components == 2);

    // etale relation: full fiber at every positive level
    FPoly et(K, {-K->one(), K->zero(), K->one()});  // u^2 = 1
    for (Rat a : {Rat(1, 10), Rat(1), Rat(5)}) {
        CHECK(count_components_single_relation(et, K, a, false).components == 2);
        CHECK(count_components_single_relation(et, K, a, true).components == 2);
    }

    // diagnostics
    std::vector<Elt> big(9, K->zero());
    big[0] = -K->uniformizer();
    big[8] = K->one();
    CHECK_THROWS_AS(count_components_single_relation(FPoly(K, big), K, Rat(1), false),
                    UnsupportedRelationShape);
    CHECK_THROWS_AS(count_components_single_relation(t2, K, Rat(1), false),
                    DoesNotSplit);
    CHECK_THROWS_AS(count_components_single_relation(t2, L, Rat(0), false),
                    ParameterOutOfRange);
}

TEST_CASE("basis reduction to the standard monomial basis") {
    FieldPtr K = LocalField::make_base(3, 1, 20);
    FieldPtr L = LocalField::extend(
        K, {-K->uniformizer(), K->zero(), K->uniformizer()});  // wild, e = 3
    std::mt19937_64 rng(31);
    for (int i = 0; i < 200; ++i) {
        Elt x = L->random_integral(rng);
        Elt c = x.canonical();
        REQUIRE(c.digits().size() <= 3);
        // reduction terminates in the standard basis 1, u, u^2 with
        // integral coefficients from below
        Elt back = L->zero();
        for (std::size_t d = 0; d < c.digits().size(); ++d) {
            CHECK(c.digits()[d].val() >= Valuation(0));
            back += embed(c.digits()[d], L) * L->pi_pow(long(d));
        }
        CHECK(back.equals(x, 40));
    }
    // independence: a unit coordinate forces a nonzero combination
    for (int i = 0; i < 50; ++i) {
        std::vector<Elt> cs{K->random_integral(rng), K->random_integral(rng),
                            K->random_integral(rng)};
        cs[rng() % 3] = K->random_element(rng, 2, true);
        Elt comb = L->zero();
        for (int d = 0; d < 3; ++d) comb += embed(cs[std::size_t(d)], L) * L->pi_pow(d);
        CHECK(!comb.indistinguishable_from_zero());
    }
}

TEST_CASE("psi extends termwise over generator variables") {
    FieldPtr K = square_root_of_p_field(3);
    VarTablePtr vars = thickening_vars(1);
    GaussPoly u0 = GaussPoly::variable(K, vars, gen_index(1, 0), 5);
    GaussPoly g = u0 * u0 - GaussPoly::constant(K->uniformizer(), vars, 5);
    GaussPoly pg = psi_poly(g, 1, 5);
    GaussPoly expect = u0 * u0 -
                       GaussPoly::constant(K->uniformizer(), vars, 5) -
                       GaussPoly::variable(K, vars, delta_index(1, 0), 5);
    CHECK(poly_negligible(pg - expect));

    CHECK_THROWS_AS(
        psi_poly(GaussPoly::variable(K, vars, delta_index(1, 0), 5), 1, 5),
        UnsupportedRelationShape);
}
