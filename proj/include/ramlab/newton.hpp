#pragma once

#include "ramlab/local_field.hpp"

namespace ramlab {

// Dense univariate polynomial over a local field (little-endian coefficients).
class FPoly {
public:
    FPoly() = default;
    FPoly(FieldPtr F, std::vector<Elt> coeffs);
    static FPoly zero(const FieldPtr& F) { return FPoly(F, {}); }
    static FPoly from_roots(const FieldPtr& F, const std::vector<Elt>& roots);

    const FieldPtr& field() const { return F_; }
    int degree() const;  // -1 for zero, ignores exact-zero leading coeffs
    const std::vector<Elt>& coeffs() const { return c_; }
    Elt coeff(int i) const;
    bool is_zero() const { return degree() < 0; }

    FPoly operator+(const FPoly& o) const;
    FPoly operator-(const FPoly& o) const;
    FPoly operator*(const FPoly& o) const;
    FPoly scale(const Elt& a) const;
    FPoly derivative() const;
    Elt eval(const Elt& x) const;

    // f(pi^v T): coefficient i multiplied by pi^{v i}.
    FPoly scale_var_pi(long v) const;
    // f(a + T)
    FPoly shift(const Elt& a) const;
    // minimal coefficient valuation (infinite for zero-at-precision input)
    Valuation content() const;
    // multiply by pi^{-content}: content becomes 0
    FPoly normalized() const;
    // division by a monic polynomial: returns (quotient, remainder)
    std::pair<FPoly, FPoly> divmod_monic(const FPoly& d) const;
    FPoly embedded(const FieldPtr& L) const;

    std::string str() const;

private:
    FieldPtr F_;
    std::vector<Elt> c_;
};

// One segment of the lower Newton polygon.
struct NewtonSegment {
    Rat root_val;  // common valuation of the roots on this segment (= -slope)
    long length;   // number of roots, with multiplicity
};

// Lower convex hull of (i, v(a_i)); segments ordered by decreasing root_val.
// Coefficients indistinguishable from zero are treated as +infinity.
std::vector<NewtonSegment> newton_polygon(const FPoly& f);

// Split f into pure-slope factors (product = f up to precision).  Separation
// happens at integer valuations; adjacent segments that no integer separates
// are returned as one mixed factor.
std::vector<FPoly> hensel_slope_factor(const FPoly& f);

// Full splitting: slope factors, then each factor is split into linear pieces
// by simple residue roots in F_q.  A repeated residue root cannot be separated
// by plain lifting and raises InseparableResidual (an affine substitution is
// needed first); factors whose residual has no F_q root are returned whole.
std::vector<FPoly> hensel_factor(const FPoly& f);

// All roots of f lying in L, found by Newton-polygon recursion with residue
// roots searched in F_q.  Multiple roots are reported with multiplicity.
std::vector<Elt> roots_in_field(const FPoly& f, const FieldPtr& L);

// Quadratically convergent lift of a simple approximate root.
Elt newton_lift(const FPoly& f, const Elt& x0);

// Extend K by a root of the monic Eisenstein polynomial with this tail.
FieldPtr adjoin_root(const FieldPtr& K, const std::vector<Elt>& eisenstein_tail);

struct RootDiffTable {
    std::vector<Elt> roots;
    std::vector<std::vector<Valuation>> diff_val;  // v_L(r_i - r_j)
};

// Pairwise valuations of root differences of f inside L.
RootDiffTable root_difference_table(const FPoly& f, const FieldPtr& L);

}  // namespace ramlab
