#pragma once

#include "ramlab/newton.hpp"

namespace ramlab {

// ---------------------------------------------------------------------------
// Galois group of a totally ramified single-step extension L = K(pi_L),
// realized through the conjugates of pi_L inside L.  Automorphisms act by
// substituting a conjugate for pi_L in the canonical digit expansion.
// ---------------------------------------------------------------------------

class GaloisGroup {
public:
    const FieldPtr& upper() const { return L_; }
    const FieldPtr& lower() const { return K_; }
    int order() const { return int(roots_.size()); }
    const std::vector<Elt>& conjugates() const { return roots_; }
    // v_L(sigma(pi_L) - pi_L); infinite at the identity (index 0).
    const std::vector<Valuation>& displacement() const { return disp_; }

    // sigma_k applied to an integral element of L.
    Elt apply(int k, const Elt& x) const;
    // composition index: returns c with sigma_c = sigma_a after sigma_b
    int compose(int a, int b) const;
    int inverse(int a) const;

    // order of G_t = {sigma : i(sigma) >= t+1}
    long subgroup_order(const Rat& t) const;
    std::vector<int> subgroup_members(const Rat& t) const;
    // G_s/G_t abelian and killed by p (s < t)?
    bool quotient_elementary_p_abelian(const Rat& s, const Rat& t) const;

private:
    friend GaloisGroup galois_group(const FieldPtr& L, const FieldPtr& K);
    void build_table() const;

    FieldPtr L_, K_;
    std::vector<Elt> roots_;
    std::vector<Valuation> disp_;
    mutable std::vector<std::vector<int>> table_;  // lazily built
    mutable std::vector<int> inv_;
    long match_cutoff_ = 0;  // conjugates are separated below this valuation
};

// Enumerate the conjugates of pi_L in L.  Requires L to be a single Eisenstein
// step over K of degree <= 64; throws NotGalois when conjugates are missing,
// DegreeTooLarge beyond the cap.
GaloisGroup galois_group(const FieldPtr& L, const FieldPtr& K);

// ---------------------------------------------------------------------------
// Ramification filtration data.
// ---------------------------------------------------------------------------

struct RamificationProfile {
    long group_order = 1;
    // i(sigma) = v_L(sigma(pi)-pi) for sigma != 1, sorted ascending
    std::vector<Rat> displacements;
    std::vector<Rat> lower_breaks;  // t with |G_t| > |G_{t+}|
    std::vector<Rat> upper_breaks;  // phi(lower breaks)
    Rat b;      // highest break + 1 in the non-log normalization (>= 1)
    Rat b_log;  // highest break in the log normalization (>= 0)

    long subgroup_order(const Rat& t) const;  // |G_t|
    Rat phi(const Rat& u) const;              // Herbrand transition
    Rat psi(const Rat& v) const;              // inverse of phi
};

// Filtration from the multiset of displacements of the non-identity elements.
RamificationProfile profile_from_displacements(long group_order,
                                               std::vector<Rat> displacements);

// Filtration of L/K via conjugate enumeration.
RamificationProfile lower_filtration(const FieldPtr& L, const FieldPtr& K);
RamificationProfile lower_filtration(const GaloisGroup& G);

// ---------------------------------------------------------------------------
// Conductors.  A representation enters through its level profile:
// codims[a] = dim(V / V^{G_a}) at integer lower level a (0 beyond the list).
// ---------------------------------------------------------------------------

struct ConductorRow {
    std::string label;
    int dim = 0;
    Rat art, swan;
    bool art_integral = false, swan_integral = false;
};

ConductorRow conductors(const RamificationProfile& prof, const std::string& label,
                        int dim, const std::vector<int>& codims);

// ---------------------------------------------------------------------------
// Integrality and structure audit over a family of extensions.
// ---------------------------------------------------------------------------

struct ExtensionCase {
    std::string label;
    FieldPtr L;
    FieldPtr K;
};

struct SubquotientCheck {
    Rat lower_level;
    long order_ratio = 1;
    bool elementary_p_abelian = false;
};

struct AuditRow {
    std::string label;
    RamificationProfile profile;
    // Artin exponents of characters detecting each break (abelian case)
    std::vector<Rat> art_levels;
    bool arts_integral = false;
    std::vector<SubquotientCheck> subquotients;
};

struct AuditReport {
    std::vector<AuditRow> rows;
    bool all_integral = true;
    bool all_subquotients_ok = true;
};

AuditReport hasse_arf_audit(const std::vector<ExtensionCase>& family);

// ---------------------------------------------------------------------------
// Builders for standard totally ramified extensions of K.
// ---------------------------------------------------------------------------

// Adjoin a primitive p^n-th root of unity zeta; uniformizer is zeta - 1.
FieldPtr cyclotomic_extension(const FieldPtr& K, int n);
// Adjoin an n-th root of pi_K (tame when p does not divide n).
FieldPtr kummer_extension(const FieldPtr& K, int n);
// K(x), x^p + pi_K x^{p-1} = pi_K: wild degree-p extension with distinct
// uniformizer conjugates at mutual distance 2.
FieldPtr wild_displacement2_extension(const FieldPtr& K);

}  // namespace ramlab
