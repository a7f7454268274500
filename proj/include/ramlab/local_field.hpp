#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ramlab/errors.hpp"
#include "ramlab/valuation.hpp"

namespace ramlab {

class LocalField;
class Elt;
using FieldPtr = std::shared_ptr<const LocalField>;

// ---------------------------------------------------------------------------
// Base coefficient ring machinery.
//
// The bottom of every field tower is W(t_1..t_m) where W = (Z/p^N)[x]/(U(x))
// with U monic and irreducible mod p.  Elements of W are coefficient vectors
// of length f = deg U.  Digits of base-field elements are fractions of
// polynomials in the transcendentals t_j over W whose denominator is a unit
// (nonzero residue).
// ---------------------------------------------------------------------------

using UnramElt = std::vector<Int>;  // length f, reduced mod p^N and mod U

// Exponent vector of a t-monomial packed 16 bits per variable (m <= 4).
using TExp = std::uint64_t;
inline TExp texp_pack(const std::vector<int>& e) {
    TExp k = 0;
    for (std::size_t j = 0; j < e.size(); ++j) k |= TExp(e[j] & 0xffff) << (16 * j);
    return k;
}
inline int texp_get(TExp k, int j) { return int((k >> (16 * j)) & 0xffff); }
inline TExp texp_mul(TExp a, TExp b) { return a + b; }  // exponent addition

struct TPoly {
    std::map<TExp, UnramElt> terms;  // monomial -> W coefficient
    bool is_zero() const { return terms.empty(); }
};

struct TFrac {
    TPoly num;
    TPoly den;  // unit (nonzero residue); 1 in the common case
};

// Arithmetic context for the bottom ring.  Owned by the base LocalField.
struct BaseRing {
    int p = 2;
    int f = 1;
    int m = 0;
    int prec = 40;            // coefficients live in Z/p^prec
    Int mod;                  // p^prec
    std::vector<Int> U;       // monic unramified polynomial, size f+1

    Int reduce(const Int& a) const;
    UnramElt ue_zero() const { return UnramElt(f, Int(0)); }
    UnramElt ue_one() const;
    UnramElt ue_from_int(const Int& a) const;
    bool ue_is_zero(const UnramElt& a) const;
    UnramElt ue_add(const UnramElt& a, const UnramElt& b) const;
    UnramElt ue_sub(const UnramElt& a, const UnramElt& b) const;
    UnramElt ue_neg(const UnramElt& a) const;
    UnramElt ue_mul(const UnramElt& a, const UnramElt& b) const;
    // Inverse of a unit (nonzero mod p); throws NotInvertibleAtPrecision.
    UnramElt ue_inv(const UnramElt& a) const;
    int ue_valp(const UnramElt& a) const;  // min v_p of coords, capped at prec
    UnramElt ue_div_p(const UnramElt& a, int k) const;  // exact division by p^k
    UnramElt ue_mod_pk(const UnramElt& a, int k) const;

    TPoly tp_zero() const { return {}; }
    TPoly tp_one() const;
    TPoly tp_from_ue(const UnramElt& a) const;
    TPoly tp_monomial(TExp e, const UnramElt& a) const;
    TPoly tp_add(const TPoly& a, const TPoly& b) const;
    TPoly tp_neg(const TPoly& a) const;
    TPoly tp_mul(const TPoly& a, const TPoly& b) const;
    int tp_valp(const TPoly& a) const;              // min over coefficients
    TPoly tp_div_p(const TPoly& a, int k) const;    // exact
    TPoly tp_mod_pk(const TPoly& a, int k) const;
    bool tp_is_unit(const TPoly& a) const;          // some coefficient a p-unit
    bool tp_is_const_unit(const TPoly& a) const;    // single t-free unit term

    TFrac tf_zero() const { return {tp_zero(), tp_one()}; }
    TFrac tf_one() const { return {tp_one(), tp_one()}; }
    TFrac tf_add(const TFrac& a, const TFrac& b) const;
    TFrac tf_neg(const TFrac& a) const;
    TFrac tf_mul(const TFrac& a, const TFrac& b) const;
    TFrac tf_inv(const TFrac& a) const;  // unit numerator required
    int tf_valp(const TFrac& a) const { return tp_valp(a.num); }
    TFrac tf_div_p(const TFrac& a, int k) const { return {tp_div_p(a.num, k), a.den}; }
    bool tf_is_zero(const TFrac& a) const { return a.num.is_zero(); }
    TFrac tf_normalize(const TFrac& a) const;  // clear constant-unit denominators
    bool tf_equal(const TFrac& a, const TFrac& b, int pk) const;  // mod p^pk
    std::string tf_str(const TFrac& a) const;
    std::string tp_str(const TPoly& a) const;
    std::string ue_str(const UnramElt& a) const;
};

// ---------------------------------------------------------------------------
// Field towers.
//
// A LocalField is either a base field (fraction field of W(t)^wedge with
// uniformizer p) or an Eisenstein step of degree e over its parent.  Residue
// extensions are modelled by the unramified polynomial at the bottom;
// transcendentals t_j make the residue field imperfect.
// ---------------------------------------------------------------------------

class LocalField : public std::enable_shared_from_this<LocalField> {
public:
    // Base field: residue field F_{p^f}(t_1..t_m), uniformizer pi_sign * p,
    // coefficients mod p^precision.  unramified_poly is monic of degree f >= 1
    // over Z.  pi_sign in {1, -1}: some Eisenstein steps (e.g. cyclotomic)
    // only match the normalized relation shape pi_K/pi_L^e = 1 + O(pi_L) for
    // the negated choice.
    static FieldPtr make_base(int p, std::vector<Int> unramified_poly, int m,
                              int precision = 40, int pi_sign = 1);
    // Convenience: residue field F_p(t_1..t_m).
    static FieldPtr make_base(int p, int m = 0, int precision = 40,
                              int pi_sign = 1);

    // Totally ramified step defined by a monic Eisenstein polynomial
    // T^e + c_{e-1}T^{e-1} + ... + c_0 over the parent; pass c_0..c_{e-1}.
    static FieldPtr extend(FieldPtr parent, std::vector<Elt> eisenstein_tail);

    bool is_base() const { return !parent_; }
    const FieldPtr& parent() const { return parent_; }
    int p() const { return ring_->p; }
    int f() const { return ring_->f; }
    int m() const { return ring_->m; }
    int pprec() const { return ring_->prec; }
    int e_rel() const { return e_rel_; }
    int pi_sign() const { return pi_sign_; }
    long e_abs() const { return e_abs_; }          // ramification index over the base
    Rat beta() const { return Rat(e_abs_); }       // v_K(p) with v_K(pi_K)=1
    const BaseRing& ring() const { return *ring_; }
    const std::vector<Elt>& eisenstein_tail() const { return eis_; }

    Elt zero() const;
    Elt one() const;
    Elt from_int(const Int& a) const;
    Elt uniformizer() const;
    Elt transcendental(int j) const;  // t_j, 1-based
    Elt pi_pow(long k) const;         // pi^k, k may be negative

    // True if `anc` is this field or an ancestor in the tower.
    bool has_ancestor(const LocalField* anc) const;
    // Ramification index of this field over ancestor field a.
    long e_over(const LocalField* a) const;

    Elt random_element(std::mt19937_64& rng, int max_tdeg = 2,
                       bool force_unit = false) const;
    Elt random_integral(std::mt19937_64& rng, int max_tdeg = 2) const;

    std::string describe() const;

private:
    LocalField() = default;
    friend class Elt;
    const Elt& pi_inv() const;       // cached pi^{-1}
    const Elt& pi_e_unit_inv() const;  // cached w^{-1} where pi^e = pi_parent * w

    FieldPtr parent_;
    std::shared_ptr<const BaseRing> ring_;  // shared across the tower
    std::vector<Elt> eis_;                  // c_0..c_{e-1}
    int e_rel_ = 1;
    long e_abs_ = 1;
    int pi_sign_ = 1;  // base fields only; extensions inherit via the tail
    mutable std::shared_ptr<Elt> pi_inv_cache_;
    mutable std::shared_ptr<Elt> pi_e_unit_inv_cache_;
    mutable bool building_unit_inv_ = false;
};

// ---------------------------------------------------------------------------
// Field elements.
//
// Base level: value = p^shift * (num/den) with num, den in W(t)-polynomials.
// Extension level: value = pi^shift * sum_i digit[i] * pi^i, digits in the
// parent field.  All valuations are in v_L units (v_L(pi_L) = 1), so they are
// integers on L^x.  `pprec` is the number of guaranteed p-digits of the
// unshifted part; the element is known up to O(pi^shift * p^pprec).
// ---------------------------------------------------------------------------

class Elt {
public:
    Elt() = default;

    const FieldPtr& field() const { return F_; }
    int shift() const { return shift_; }
    int pprec() const { return pprec_; }
    // Absolute precision in v_L units: the element is known mod pi^aprec.
    long aprec() const { return shift_ + long(pprec_) * F_->e_abs(); }

    bool is_zero() const;  // exactly-represented zero
    // v_L-normalized valuation; infinity when indistinguishable from zero.
    Valuation val() const;
    // Valuation in v_A units for an ancestor field A (v_A(pi_A) = 1).
    Valuation val_over(const FieldPtr& A) const;

    Elt operator+(const Elt& o) const;
    Elt operator-(const Elt& o) const;
    Elt operator-() const;
    Elt operator*(const Elt& o) const;
    Elt operator/(const Elt& o) const { return *this * o.inv(); }
    Elt& operator+=(const Elt& o) { return *this = *this + o; }
    Elt& operator-=(const Elt& o) { return *this = *this - o; }
    Elt& operator*=(const Elt& o) { return *this = *this * o; }

    Elt inv() const;
    Elt pow(long k) const;  // k may be negative
    Elt mul_int(const Int& c) const;
    Elt shifted(int ds) const;  // value * pi^ds, exact

    // Canonical form: shift 0, digits integral and canonical recursively.
    // Requires val() >= 0.
    Elt canonical() const;

    // The stored representation reinterpreted as an exact element, with the
    // precision bookkeeping reset to the ring precision.  Use only when the
    // represented value itself is what is wanted (e.g. as a Newton seed near
    // a root), not the approximated one.
    Elt refreshed() const;

    // True when the element cannot be distinguished from zero at precision.
    bool indistinguishable_from_zero() const { return val().is_infinite(); }
    bool equals(const Elt& o, long cutoff_vl) const;  // v(x - y) >= cutoff

    std::string str() const;

    // Internal structure access (canonical form expected where noted).
    const std::vector<Elt>& digits() const { return digits_; }
    const TFrac& base_frac() const { return base_; }

private:
    friend class LocalField;
    friend class ResidueElt;
    friend Elt embed(const Elt&, const FieldPtr&);
    friend Elt transport(const Elt&, const FieldPtr&);

    static Elt make_base(FieldPtr F, TFrac fr, int shift, int pprec);
    static Elt make_ext(FieldPtr F, std::vector<Elt> digits, int shift, int pprec);
    void reduce_top(std::vector<Elt>& d) const;  // fold pi-powers >= e
    void check_prec() const;
    // Fold common pi_parent-divisibility of the digits into the shift so the
    // shift stays close to the valuation (keeps aprec() meaningful).
    Elt balanced() const;

    FieldPtr F_;
    int shift_ = 0;
    int pprec_ = 0;
    std::vector<Elt> digits_;  // extension level
    TFrac base_;               // base level
};

// Coerce x into descendant field L (x.field() must be an ancestor of L).
Elt embed(const Elt& x, const FieldPtr& L);

// Parallel tower whose base carries `extra` additional transcendentals; the
// Eisenstein tails are transported digit for digit.
FieldPtr widen_transcendentals(const FieldPtr& K, int extra);
// Move x into the corresponding field K2 of a parallel tower (same p, f,
// precision and Eisenstein step degrees; K2 may have more transcendentals).
Elt transport(const Elt& x, const FieldPtr& K2);

// ---------------------------------------------------------------------------
// Residue field elements: reduced fractions over F_{p^f}[t].
// ---------------------------------------------------------------------------

class ResidueElt {
public:
    ResidueElt() = default;

    bool is_zero() const;
    ResidueElt operator+(const ResidueElt& o) const;
    ResidueElt operator-(const ResidueElt& o) const;
    ResidueElt operator-() const;
    ResidueElt operator*(const ResidueElt& o) const;
    ResidueElt inv() const;
    ResidueElt pow(long k) const;
    bool operator==(const ResidueElt& o) const;
    bool operator!=(const ResidueElt& o) const { return !(*this == o); }

    // Canonical lift into field L (same tower): digit-0 lift, t_j -> t_j.
    Elt lift_to(const FieldPtr& L) const;
    std::string str() const;

    // All p^f elements of the prime-subfield part F_{p^f} of the residue field.
    static std::vector<ResidueElt> enumerate_fq(const FieldPtr& any_field_in_tower);

private:
    friend ResidueElt residue(const Elt&);
    std::shared_ptr<const BaseRing> ring_;
    TFrac frac_;  // coefficients reduced mod p, den unit
};

// Image in the residue field; requires val() >= 0 (NegativeValuation otherwise).
ResidueElt residue(const Elt& x);

}  // namespace ramlab
