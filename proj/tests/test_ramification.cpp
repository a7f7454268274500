#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ramlab/ramification.hpp"

using namespace ramlab;

TEST_CASE("wild displacement-2 extension: filtration and conductors") {
    for (int p : {2, 3, 5}) {
        CAPTURE(p);
        auto K = LocalField::make_base(p, 0, 40);
        auto L = wild_displacement2_extension(K);
        GaloisGroup G = galois_group(L, K);
        CHECK(G.order() == p);
        for (int k = 1; k < G.order(); ++k) {
            REQUIRE(!G.displacement()[std::size_t(k)].is_infinite());
            CHECK(G.displacement()[std::size_t(k)].finite() == Rat(2));
        }

        RamificationProfile prof = lower_filtration(G);
        CHECK(prof.group_order == p);
        CHECK(prof.lower_breaks == std::vector<Rat>{Rat(1)});
        CHECK(prof.subgroup_order(Rat(1)) == p);
        CHECK(prof.subgroup_order(Rat(2)) == 1);
        // calibration regression: lower break 1 maps to log break 1, plain break 2
        CHECK(prof.upper_breaks == std::vector<Rat>{Rat(1)});
        CHECK(prof.b_log == Rat(1));
        CHECK(prof.b == Rat(2));

        ConductorRow faithful = conductors(prof, "chi", 1, {1, 1});
        CHECK(faithful.art == Rat(2));
        CHECK(faithful.swan == Rat(1));
        CHECK(faithful.art_integral);
        CHECK(faithful.swan_integral);
        ConductorRow trivial = conductors(prof, "1", 1, {});
        CHECK(trivial.art == Rat(0));
        CHECK(trivial.swan == Rat(0));
    }
}

TEST_CASE("group law of the displacement-2 extension is cyclic of order p") {
    for (int p : {2, 3, 5}) {
        CAPTURE(p);
        auto K = LocalField::make_base(p, 0, 40);
        auto L = wild_displacement2_extension(K);
        GaloisGroup G = galois_group(L, K);
        for (int a = 0; a < G.order(); ++a) {
            CHECK(G.compose(a, G.inverse(a)) == 0);
            CHECK(G.compose(0, a) == a);
            int pw = 0;
            for (int j = 0; j < p; ++j) pw = G.compose(pw, a);
            CHECK(pw == 0);
        }
        // closure: every row of the table is a permutation
        for (int a = 0; a < G.order(); ++a) {
            std::vector<bool> seen(std::size_t(G.order()), false);
            for (int b = 0; b < G.order(); ++b) {
                int c = G.compose(a, b);
                CHECK(!seen[std::size_t(c)]);
                seen[std::size_t(c)] = true;
            }
        }
        CHECK(G.quotient_elementary_p_abelian(Rat(1), Rat(2)));
    }
}

TEST_CASE("tame extensions: single break at 0, Artin 1, Swan 0") {
    struct Case { int p; FieldPtr L; FieldPtr K; };
    std::vector<Case> cases;
    for (int p : {3, 5}) {
        auto K = LocalField::make_base(p, 0, 40);
        cases.push_back({p, cyclotomic_extension(K, 1), K});
    }
    {
        auto K = LocalField::make_base(3, 0, 40);
        cases.push_back({3, kummer_extension(K, 2), K});
    }
    for (const auto& c : cases) {
        CAPTURE(c.p);
        RamificationProfile prof = lower_filtration(c.L, c.K);
        CHECK(prof.group_order == c.L->e_rel());
        CHECK(prof.lower_breaks == std::vector<Rat>{Rat(0)});
        CHECK(prof.upper_breaks == std::vector<Rat>{Rat(0)});
        CHECK(prof.b == Rat(1));
        CHECK(prof.b_log == Rat(0));
        ConductorRow faithful = conductors(prof, "chi", 1, {1});
        CHECK(faithful.art == Rat(1));
        CHECK(faithful.swan == Rat(0));
    }
}

TEST_CASE("p^2-th roots of unity: breaks 0 and p-1, upper breaks 0 and 1") {
    for (int p : {2, 3}) {
        CAPTURE(p);
        auto K = LocalField::make_base(p, 0, 40);
        auto L = cyclotomic_extension(K, 2);
        CHECK(L->e_rel() == p * (p - 1));
        RamificationProfile prof = lower_filtration(L, K);
        CHECK(prof.group_order == p * (p - 1));
        if (p == 2) {
            // Gal(Q_2(i)/Q_2): the single break sits at level 1
            CHECK(prof.lower_breaks == std::vector<Rat>{Rat(1)});
            CHECK(prof.upper_breaks == std::vector<Rat>{Rat(1)});
        } else {
            CHECK(prof.lower_breaks == std::vector<Rat>{Rat(0), Rat(p - 1)});
            CHECK(prof.upper_breaks == std::vector<Rat>{Rat(0), Rat(1)});
            CHECK(prof.subgroup_order(Rat(1)) == p);
        }
        CHECK(prof.b_log == Rat(1));
        CHECK(prof.b == Rat(2));
    }
}

TEST_CASE("Herbrand transition: phi and psi are mutually inverse") {
    // synthetic two-break profile: |G_0| = p^2, breaks at 1 and 3
    for (int p : {2, 5}) {
        CAPTURE(p);
        std::vector<Rat> disp;
        for (int i = 0; i < p * p - p; ++i) disp.push_back(Rat(2));
        for (int i = 0; i < p - 1; ++i) disp.push_back(Rat(4));
        RamificationProfile prof = profile_from_displacements(long(p) * p, disp);
        CHECK(prof.lower_breaks == std::vector<Rat>{Rat(1), Rat(3)});
        CHECK(prof.phi(Rat(1)) == Rat(1));
        CHECK(prof.phi(Rat(3)) == Rat(1) + Rat(2, p));
        for (Rat u : {Rat(0), Rat(1, 2), Rat(1), Rat(2), Rat(3), Rat(7, 2), Rat(5)}) {
            CHECK(prof.psi(prof.phi(u)) == u);
        }
        for (Rat v : {Rat(0), Rat(1, 3), Rat(1), Rat(1) + Rat(1, p), Rat(2)}) {
            CHECK(prof.phi(prof.psi(v)) == v);
        }
        // phi is concave: slopes decrease across the breaks
        Rat s0 = prof.phi(Rat(1)) - prof.phi(Rat(0));
        Rat s1 = prof.phi(Rat(2)) - prof.phi(Rat(1));
        Rat s2 = prof.phi(Rat(4)) - prof.phi(Rat(3));
        CHECK(s0 > s1);
        CHECK(s1 > s2);
        CHECK(prof.phi(Rat(0)) == Rat(0));
    }
}

TEST_CASE("conductor preconditions") {
    RamificationProfile prof = profile_from_displacements(2, {Rat(2)});
    CHECK_THROWS_AS(conductors(prof, "bad", 1, {1, 2}), InconsistentDims);
    CHECK_THROWS_AS(conductors(prof, "bad", 2, {1, 2}), InconsistentDims);
    CHECK_THROWS_AS(conductors(prof, "bad", 1, {-1}), InconsistentDims);
    ConductorRow ok = conductors(prof, "ok", 2, {2, 1});
    CHECK(ok.art == Rat(3));
    CHECK(ok.swan == Rat(1));
}

TEST_CASE("integrality audit over a mixed family") {
    std::vector<ExtensionCase> family;
    for (int p : {2, 3, 5}) {
        auto K = LocalField::make_base(p, 0, 40);
        family.push_back({"wild2-p" + std::to_string(p),
                          wild_displacement2_extension(K), K});
    }
    for (int p : {2, 3}) {
        auto K = LocalField::make_base(p, 0, 40);
        family.push_back({"cyclo2-p" + std::to_string(p),
                          cyclotomic_extension(K, 2), K});
    }
    {
        auto K = LocalField::make_base(5, 0, 40);
        family.push_back({"tame-p5", cyclotomic_extension(K, 1), K});
    }
    AuditReport rep = hasse_arf_audit(family);
    CHECK(rep.rows.size() == family.size());
    CHECK(rep.all_integral);
    CHECK(rep.all_subquotients_ok);
    for (const auto& row : rep.rows) {
        CAPTURE(row.label);
        for (const auto& a : row.art_levels) CHECK(a.is_integer());
        for (const auto& sq : row.subquotients) {
            if (sq.lower_level >= Rat(1)) CHECK(sq.elementary_p_abelian);
        }
    }
}

TEST_CASE("galois_group diagnostics") {
    auto K = LocalField::make_base(5, 0, 40);
    auto L = kummer_extension(K, 3);  // x^3 = 5 over Q_5: no cube roots of unity
    CHECK_THROWS_AS(galois_group(L, K), NotGalois);
    auto M = kummer_extension(L, 2);
    CHECK_THROWS_AS(galois_group(M, K), UnsupportedRelationShape);
}
