#pragma once

#include "ramlab/gauss_poly.hpp"
#include "ramlab/newton.hpp"

namespace ramlab {

// ---------------------------------------------------------------------------
// Deformation rings for a field K with uniformizer pi and p-basis t_1..t_m:
// variables d0 (deformation of pi) and d1..dm (deformations of the p-basis),
// plus generator variables u0..um for presentations of an extension L/K.
// Fixed layout: index j is d_j for j <= m, index m+1+j is u_j.
// ---------------------------------------------------------------------------

VarTablePtr thickening_vars(int m);
inline int delta_index(int /*m*/, int j) { return j; }
inline int gen_index(int m, int j) { return m + 1 + j; }

// ---------------------------------------------------------------------------
// The psi deformation: substitute pi -> pi + d0 and t_j -> t_j + d_j into a
// greedy digit representation of h (Teichmueller coefficients times
// t-monomials), with the value-preserving prefactor (pi + d0)^{v(h)}.
// Teichmueller digits are stable under p-th powers, so the same expansion is
// a compatible decomposition at every level and the level limit is the
// expansion itself.  Requires a prime residue subfield F_p(t_1..t_m); residue
// denominators must be constant units.  psi(1) = 1, psi(0) = 0, and
// psi(h) - h lies in (d_{J+}).
//
// `balanced` selects the alternative digit system with plain integer digits
// in (-p/2, p/2]; both are valid (integers are sums of p^r-th powers of
// +/-1) and their psi-values agree modulo I_K = p(d0/pi, d_J).
// ---------------------------------------------------------------------------

GaussPoly psi(const Elt& h, const VarTablePtr& vars, int trunc,
              bool balanced = false);

// Termwise extension to polynomials in the generator variables (coefficients
// must lie in O_K; the input must not involve the deformation variables).
GaussPoly psi_poly(const GaussPoly& g, int m, int trunc, bool balanced = false);

// Linear deformation coefficients: entry j is the coefficient of d_j in
// psi(h) - h.  Modulo pi these recover the differential of h with respect to
// (pi, t_1, .., t_m).
std::vector<Elt> psi_diff_linear(const Elt& h, const VarTablePtr& vars, int trunc);

// ---------------------------------------------------------------------------
// Digit decompositions at level r: h = sum_{e_J < p^r} t^{e_J} *
// (sum_n (sum_{n'} alpha^{p^r}) pi^n) with alpha a unit t-monomial or zero.
// ---------------------------------------------------------------------------

struct PBasisTermKey {
    std::vector<int> eJ;  // t-exponents, all < p^r
    long n = 0;           // pi-power
    int nprime = 0;       // repetition index
    bool operator<(const PBasisTermKey& o) const {
        if (eJ != o.eJ) return eJ < o.eJ;
        if (n != o.n) return n < o.n;
        return nprime < o.nprime;
    }
};

struct PBasisDecomposition {
    int level = 1;  // r
    std::map<PBasisTermKey, Elt> terms;
    std::shared_ptr<const PBasisDecomposition> compatibility_parent;

    // sum t^{e_J} alpha^{p^r} pi^n; equals the decomposed element.
    Elt reassemble(const FieldPtr& K) const;
};

PBasisDecomposition decompose(const Elt& h, int r);

// ---------------------------------------------------------------------------
// Approximate-homomorphism verification: residual margins against the ideal
// I_K = p(d0/pi, d_J), scaled by pi^{a1+a2} (multiplicative) and
// pi^{min(a1,a2)} (additive).  A nonnegative margin passes.
// ---------------------------------------------------------------------------

struct ApproxHomReport {
    Valuation mult_margin;  // infinity when the residual vanishes
    Valuation add_margin;
    bool mult_ok = false;
    bool add_ok = false;
};

ApproxHomReport check_approx_hom(const Elt& h1, const Elt& h2,
                                 const VarTablePtr& vars, int trunc);

// ---------------------------------------------------------------------------
// Presentations of O_L over the deformation ring and error-gauge accounting.
//
// The weighted ideal N^a of O_K[u_{J+}] assigns u_0 weight 1/e and everything
// else weight 0; membership of R in (N^x d0, N^y d_J) * S_K is tested
// monomial by monomial with d0 paired against 1/pi inside S_K.
// ---------------------------------------------------------------------------

bool in_weighted_delta_ideal(const GaussPoly& R, int m, int e,
                             const Rat& x, const Rat& y);

struct ThickeningPresentation {
    FieldPtr K;
    int m = 0;                          // p-basis size
    int e = 1;                          // naive ramification degree of L/K
    VarTablePtr vars;
    std::vector<GaussPoly> generators;  // p_{J+}: index 0 the uniformizer one
    std::vector<GaussPoly> residuals;   // R_{J+}, in (d_{J+}) * S_K
    Rat level;                          // a
    Rat omega;                          // certified error gauge
};

// Largest omega in (1/e)N intersect [1, beta_K] certified by the membership
// tests: R_0 in (N^omega d0, N^{omega+1} d_J), R_j in (N^{omega-1} d0,
// N^omega d_J).  All-zero residuals certify beta_K.  Throws NotAdmissible.
Rat error_gauge(const std::vector<GaussPoly>& residuals, int m, int e,
                const FieldPtr& K);

ThickeningPresentation make_presentation(FieldPtr K, int m, int e,
                                         std::vector<GaussPoly> generators,
                                         std::vector<GaussPoly> residuals,
                                         Rat level);

// psi(p_j) + R_j, the defining relation of the deformation-space chart.
GaussPoly relation(const ThickeningPresentation& pres, int j, int trunc);

// ---------------------------------------------------------------------------
// Standard generators for a single Eisenstein step L/K: p_0 = the defining
// polynomial of pi_L in the variable u_0, verified to have the shape
// u_0^e - pi_K + pi_K N^{1/e}.  Throws BasisReductionFailure on shape
// violations (e.g. uniformizers not aligned).
// ---------------------------------------------------------------------------

std::vector<GaussPoly> standard_generators(const FieldPtr& L, const FieldPtr& K,
                                           int m, int trunc);

// Shape test for a generator p_j corresponding to a p-basis element (j >= 1,
// leading term u_j^{lead_pow}): everything beyond the leading term and the
// unit-coefficient part in u_1..u_{j-1} must lie in N^{1/e}.
void check_generator_shape(const GaussPoly& pj, int j, long lead_pow, int m,
                           int e);

// ---------------------------------------------------------------------------
// Component counting for a one-generator space: points u with
// |p_0(u) - V| bounded by theta^a (non-log) or theta^{a+1} (log, matching the
// d0 radius).  Factors through the root system of p_0 in L.
// ---------------------------------------------------------------------------

struct ComponentCount {
    long components = 0;
    std::vector<Rat> log_radii;  // one per component, in v_K units
};

ComponentCount count_components_single_relation(const FPoly& p0,
                                                const FieldPtr& L,
                                                const Rat& a, bool log_space);

}  // namespace ramlab
