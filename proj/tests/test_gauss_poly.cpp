#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ramlab/gauss_poly.hpp"

using namespace ramlab;

namespace {

FieldPtr Qp(int p, int prec = 40) { return LocalField::make_base(p, 0, prec); }

VarTablePtr dvars() {
    return std::make_shared<VarTable>(std::vector<std::string>{"d0", "d1", "u0"});
}

std::function<std::optional<Elt>(const std::string&)> syms(const FieldPtr& F) {
    return [F](const std::string& n) -> std::optional<Elt> {
        if (n == "p") {
            FieldPtr base = F;
            while (!base->is_base()) base = base->parent();
            return embed(base->uniformizer(), F);
        }
        if (n == "pi") return F->uniformizer();
        return std::nullopt;
    };
}

}  // namespace

TEST_CASE("ring operations and truncation") {
    auto K = Qp(3);
    auto V = dvars();
    GaussPoly d0 = GaussPoly::variable(K, V, 0, 4);
    GaussPoly u0 = GaussPoly::variable(K, V, 2, 4);
    GaussPoly f = (d0 + u0).pow(3);
    // binomial coefficients survive
    CHECK(f.coeff({1, 0, 2}).equals(K->from_int(3), 30));
    CHECK(f.total_degree() == 3);
    // truncation drops high terms in products
    GaussPoly g = (d0 + u0).pow(2) * (d0 + u0).pow(2);
    CHECK(g.total_degree() <= 4);
    CHECK(f.truncated(2).is_zero());  // homogeneous of degree 3
    GaussPoly h = (f + d0).truncated(2);
    CHECK(h.is_zero() == false);
    CHECK(h.total_degree() <= 2);
    CHECK_THROWS_AS(GaussPoly(K, V, kTruncationHardCap + 1), TruncationOverflow);
}

TEST_CASE("gauss valuation is min over weighted terms") {
    auto K = Qp(5);
    auto V = dvars();
    GaussPoly d0 = GaussPoly::variable(K, V, 0, 8);
    GaussPoly u0 = GaussPoly::variable(K, V, 2, 8);
    Elt p = K->from_int(5);
    // f = p^2*d0 + u0^3
    GaussPoly f = d0.scale(p * p) + u0.pow(3);
    WeightVector w = WeightVector::zero(3);
    w.set(0, Rat(3, 2)).set(2, Rat(1, 4));
    // terms: 2 + 3/2 = 7/2 and 0 + 3/4
    CHECK(f.gauss_valuation(w) == Valuation(Rat(3, 4)));
    w.set(2, Rat(2));
    CHECK(f.gauss_valuation(w) == Valuation(Rat(7, 2)));
    CHECK(GaussPoly(K, V, 8).gauss_valuation(w).is_infinite());
}

TEST_CASE("missing weights are detected") {
    auto K = Qp(5);
    auto V = dvars();
    GaussPoly d1 = GaussPoly::variable(K, V, 1, 8);
    WeightVector w;
    w.set(0, Rat(1));
    CHECK_THROWS_AS(d1.gauss_valuation(w), MissingWeight);
    // unused variables need no weight
    GaussPoly d0 = GaussPoly::variable(K, V, 0, 8);
    CHECK(d0.gauss_valuation(w) == Valuation(Rat(1)));
}

TEST_CASE("filtration membership") {
    // N^a on O_K[u0] with u0 of weight 1/e: membership is a Gauss bound
    auto K = Qp(3);
    auto L = LocalField::extend(K, {-K->from_int(3), K->zero()});  // e = 2
    auto V = dvars();
    WeightVector w = WeightVector::zero(3);
    w.set(2, Rat(1, 2) * Rat(2));  // u0 weight 1/e in v_K units, here in v_L units
    GaussPoly u0 = GaussPoly::variable(L, V, 2, 8);
    GaussPoly f = u0.pow(3) + u0.scale(L->uniformizer().pow(2));
    // v_L terms: 3*1 = 3 and 2+1 = 3
    CHECK(f.in_filtration(w, Rat(3)));
    CHECK(f.in_filtration(w, Rat(5, 2)));
    CHECK(!f.in_filtration(w, Rat(7, 2)));
}

TEST_CASE("substitution composes correctly") {
    auto K = Qp(5);
    auto V = dvars();
    GaussPoly d0 = GaussPoly::variable(K, V, 0, 6);
    GaussPoly u0 = GaussPoly::variable(K, V, 2, 6);
    GaussPoly f = u0.pow(2) + u0.scale(K->from_int(5)) + d0;
    // u0 -> u0 + 1
    GaussPoly g = f.substitute(2, u0 + GaussPoly::constant(K->one(), V, 6));
    CHECK(g.coeff({0, 0, 0}).equals(K->from_int(6), 30));   // 1 + 5
    CHECK(g.coeff({0, 0, 1}).equals(K->from_int(7), 30));   // 2 + 5
    CHECK(g.coeff({0, 0, 2}).equals(K->one(), 30));
    CHECK(g.coeff({1, 0, 0}).equals(K->one(), 30));
    // evaluation at an element
    GaussPoly h = f.substitute(2, K->from_int(2)).substitute(0, K->zero());
    CHECK(h.constant_term().equals(K->from_int(14), 30));
}

TEST_CASE("derivatives") {
    auto K = Qp(3);
    auto V = dvars();
    GaussPoly d0 = GaussPoly::variable(K, V, 0, 6);
    GaussPoly u0 = GaussPoly::variable(K, V, 2, 6);
    GaussPoly f = d0.pow(3) * u0 + u0.pow(2);
    GaussPoly fd = f.derivative(0);
    CHECK(fd.coeff({2, 0, 1}).equals(K->from_int(3), 30));
    GaussPoly fu = f.derivative(2);
    CHECK(fu.coeff({3, 0, 0}).equals(K->one(), 30));
    CHECK(fu.coeff({0, 0, 1}).equals(K->from_int(2), 30));
    // Leibniz rule on random-ish data
    GaussPoly a = d0.pow(2) + u0.scale(K->from_int(7));
    GaussPoly b = u0 + d0.scale(K->from_int(4));
    GaussPoly lhs = (a * b).derivative(0);
    GaussPoly rhs = a.derivative(0) * b + a * b.derivative(0);
    CHECK((lhs - rhs).is_zero());
}

TEST_CASE("expression parser") {
    auto K = Qp(3);
    auto V = dvars();
    GaussPoly f = parse_poly("u0^2 + 3*d0*u0 - p", K, V, 8, syms(K));
    CHECK(f.coeff({0, 0, 2}).equals(K->one(), 30));
    CHECK(f.coeff({1, 0, 1}).equals(K->from_int(3), 30));
    CHECK(f.coeff({0, 0, 0}).equals(K->from_int(-3), 30));
    CHECK_THROWS_AS(parse_poly("u0 + q", K, V, 8, syms(K)), ParseError);
    CHECK_THROWS_AS(parse_poly("u0 + ", K, V, 8, syms(K)), ParseError);
    Elt e = parse_elt("(1 + p)^2 - 1", K, syms(K));
    CHECK(e.equals(K->from_int(15), 30));
}

TEST_CASE("coefficients embed into tower extensions") {
    auto K = Qp(3);
    auto L = LocalField::extend(K, {-K->from_int(3), K->zero()});
    auto V = dvars();
    GaussPoly f = parse_poly("u0^2 - p", K, V, 8, syms(K));
    GaussPoly g = f.embedded(L);
    CHECK(g.field().get() == L.get());
    CHECK(g.coeff({0, 0, 0}).val() == Valuation(2));  // v_L(p) = 2
    // mixed-field arithmetic embeds automatically
    GaussPoly h = f + GaussPoly::constant(L->uniformizer(), V, 8);
    CHECK(h.field().get() == L.get());
    CHECK(h.coeff({0, 0, 0}).val() == Valuation(1));
}
