#pragma once

#include "ramlab/thickening.hpp"

namespace ramlab {

// ---------------------------------------------------------------------------
// Differential modules over polydiscs around (pi, t_J).  A module of rank d
// carries, for each deformation direction j, a d x d matrix N_j of truncated
// polynomials in the delta variables: the connection acts on a coefficient
// vector v by  v -> dv/d(delta_j) + N_j v.  All valuations attached to a
// module (radii, weights, spectral estimates) are in v_F units of its own
// coefficient field.
// ---------------------------------------------------------------------------

// Exact relation data for a one-generator covering K[delta][z]/(F).  Stored
// as z-power coefficient lists whose entries map a delta-exponent vector to a
// field element; unlike the truncated derivation matrices this carries the
// relation exactly, which the spectral iteration needs (repeated truncation
// of the derivation series is unstable near the tail slopes).
struct CoveringData {
    using Coef = std::map<std::vector<int>, Elt>;
    int d = 0;  // generator degree
    int m = 0;  // last delta index
    std::vector<Coef> negT;           // z^d == negT, z-degree < d
    std::vector<Coef> Fz;             // dF/dz, z-degree < d
    std::vector<std::vector<Coef>> Fdelta;  // per direction, z-degree <= d-1 (reduced)
};

struct DifferentialModule {
    FieldPtr F;                     // coefficient field
    int rank = 0;
    VarTablePtr vars;               // delta variables d0..dm only
    std::vector<Rat> base_radii;    // radius exponent per direction
    // derivation[j] is N_j, row-major: entry(j,i,k) = coefficient of basis_i
    // in the j-derivative of basis_k.
    std::vector<std::vector<GaussPoly>> derivation;
    std::vector<std::string> basis_labels;
    int trunc = 8;
    // Present for modules built by from_covering; spectral routines then use
    // the exact orbit iteration instead of the truncated series.
    std::shared_ptr<const CoveringData> covering;

    int directions() const { return int(derivation.size()); }
    const GaussPoly& entry(int j, int i, int k) const {
        return derivation.at(j).at(std::size_t(i) * rank + k);
    }

    static DifferentialModule trivial(const FieldPtr& F, int m, int trunc,
                                      std::vector<Rat> radii = {});
    static DifferentialModule rank_one(const FieldPtr& F,
                                       std::vector<GaussPoly> n_by_direction,
                                       std::vector<Rat> radii);
};

// Variable table with just the delta variables d0..dm.
VarTablePtr delta_vars(int m);

// ---------------------------------------------------------------------------
// Module of a one-generator covering: the chart K[delta][z]/(psi(p_0) + R_0)
// is free with basis 1, z, .., z^{d-1}; the derivation matrices come from
// implicit differentiation of the relation, with dz/d(delta_j) =
// -F_{delta_j} / F_z inverted modulo the relation.
// ---------------------------------------------------------------------------

DifferentialModule from_covering(const ThickeningPresentation& pres,
                                 int trunc = 8);

// Commutator residuals [d_i + N_i, d_j + N_j]; true when every entry is zero
// up to valuation `cutoff` (unweighted Gauss valuation).
bool integrable(const DifferentialModule& M, const Rat& cutoff);

// ---------------------------------------------------------------------------
// Spectral valuations.  The iterates D_1 = N_j, D_{n+1} = d_j(D_n) + N_j D_n
// represent the n-th power of the j-derivation on the basis; their Gauss
// valuations at weight s give the module part of the spectral valuation,
//     E_V = min(E_F, lim w_n / n),   E_F = beta_F/(p-1) - s_j,
// and the intrinsic-radius exponent is -log_theta IR_j = E_F - E_V >= 0.
// ---------------------------------------------------------------------------

struct SpectralProfile {
    int direction = 0;
    int nmax = 0;
    // terms[n-1]: delta-exponent -> min coefficient valuation over all entries
    // of D_n.  Empty map when D_n vanishes identically.
    std::vector<std::map<std::vector<int>, Rat>> terms;
};

SpectralProfile spectral_profile(const DifferentialModule& M, int j,
                                 int nmax = 0);

// Exact orbit valuations for covering-backed modules: w_n is the weighted
// Gauss valuation of the n-th derivative of the generator (coordinates in the
// power basis) minus that of the accumulated F_z denominator power.  Terms
// more than `band` above the running minimum are pruned; 0 selects a default.
std::vector<std::optional<Rat>> spectral_orbit(const DifferentialModule& M,
                                               int j, const std::vector<Rat>& s,
                                               int nmax, const Rat& band = Rat(0));

struct SpectralEstimate {
    Rat value;                // E_V, v_F units
    Rat ef;                   // E_F at this weight
    Rat lower, upper;         // raw tail window on lim w_n/n
    Rat slope;                // snapped module slope (= value when dominant)
    bool module_vanishes = false;  // iterates are eventually zero
};

SpectralEstimate spectral_valuation(const SpectralProfile& prof,
                                    const DifferentialModule& M,
                                    const std::vector<Rat>& s,
                                    long snap_den = 0);
SpectralEstimate spectral_valuation(const DifferentialModule& M, int j,
                                    const std::vector<Rat>& s, int nmax = 0,
                                    long snap_den = 0);

struct RadiusReport {
    std::vector<Rat> weights;
    std::vector<SpectralEstimate> per_direction;
    Rat ir_exponent;             // max_j (E_F - E_V); zero means IR = 1
    Rat ir_exponent_normalized;  // divided by e_abs(F): comparable across fields
    bool trivial_radius() const { return ir_exponent.is_zero(); }
};

RadiusReport radius_report(const DifferentialModule& M,
                           const std::vector<Rat>& s, int nmax = 0,
                           long snap_den = 0);

// ---------------------------------------------------------------------------
// Break extraction: bisection over the line s_J+ = (s,..,s) (non-log) or
// (s+1, s,..,s) (log) for the smallest s with IR = 1.  Throws
// NoThresholdInRange when the endpoints do not bracket a threshold.
// ---------------------------------------------------------------------------

enum class BreakMode { NonLog, Log };

Rat break_search(const DifferentialModule& M, BreakMode mode, const Rat& lo,
                 const Rat& hi, int nmax = 0, long snap_den = 0);

// ---------------------------------------------------------------------------
// Pullbacks.  The core transform substitutes subs[j] (a polynomial in the new
// variables over F2) for each old direction j and applies the chain rule
//     N'_i = sum_j d(subs[j])/d(eta_i) * (N_j o subs),
// with coefficients mapped into F2 by coeff_map.
// ---------------------------------------------------------------------------

DifferentialModule pullback(const DifferentialModule& M, const FieldPtr& F2,
                            const VarTablePtr& new_vars,
                            const std::vector<GaussPoly>& subs,
                            std::vector<Rat> new_radii,
                            const std::function<Elt(const Elt&)>& coeff_map);

// Off-centered tame substitution delta_0 = (x0^{1/n} + eta_0)^n - x0 with
// x0 = x0_root^n; requires gcd(n, p) = 1 and v(x0) < the direction-0 radius.
// Radius relation: IR(f_n^* E; a - b(n-1)/n) = IR(E; a), b = v(x0).
DifferentialModule pullback_tame(const DifferentialModule& M, int n,
                                 const Elt& x0_root);

// Off-centered Frobenius delta_0 = (beta + eta_0)^p - beta^p with beta a unit;
// target radius b must satisfy b > max(a - beta_F, a/p).  The intrinsic
// radius can only grow: IR(f^* E; b) >= IR(E; a).
DifferentialModule pullback_frobenius(const DifferentialModule& M,
                                      const Elt& beta, const Rat& b);

// Generic p-th root substitution in direction j0 (1 <= j0 <= m):
//   delta_j0 = (beta + eta_j0)^p - beta^p - ((x + eta_{m+1})(pi+eta_0)^n
//              - x pi^n),
// over the base widened by two fresh transcendentals x = t_{m+1} and
// beta = t_{m+2} (only powers beta^{p-k}, k >= 1 appear, so no relation on
// beta is needed).  Adds the direction eta_{m+1}; requires gcd(n, p) = 1.
DifferentialModule pullback_generic_pth_root(const DifferentialModule& M,
                                             int j0, int n);

// Rotation to a root varpi of z^p + pi z^{p-1} - pi in a degree-p step:
//   delta_0 = (varpi + eta_0)^p / (1 - (varpi + eta_0)^{p-1}) - pi.
// Valid for direction-0 radius a+1 with a > 1; the pulled-back module lives
// at direction-0 radius a - (p-2)/p (in v-units of varpi's field) and
// IR_0(f_gamma^* E; a - (p-2)/p) = IR_0(E; a+1).
DifferentialModule pullback_kstar(const DifferentialModule& M,
                                  const Elt& varpi);

// ---------------------------------------------------------------------------
// Exact-valuation oracle for the p-th power radius bound:
//     v(b^p - T^p) >= min(p v(b-T), v(p) + v(b-T) + (p-1) v(b)),
// with equality whenever the two branches differ.
// ---------------------------------------------------------------------------

struct PthPowerCheck {
    Valuation lhs;    // v(b^p - T^p)
    Valuation bound;  // the min above
    bool ok = false;
    bool tight = false;  // branches differ and equality holds
};

PthPowerCheck pth_power_radius_check(const Elt& b, const Elt& T);

}  // namespace ramlab
