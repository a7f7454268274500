#include "ramlab/local_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ramlab {

namespace {

Int int_pow(Int base, long k) {
    Int r = 1;
    while (k-- > 0) r *= base;
    return r;
}

bool is_prime_small(int n) {
    if (n < 2) return false;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// --- F_p[x] helpers for the unramified-step irreducibility check ---

using FpPoly = std::vector<int>;  // little-endian coefficients in [0,p)

void fp_trim(FpPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

int fp_inv_scalar(int a, int p) {
    int r = 1, b = a % p, e = p - 2;
    while (e > 0) {
        if (e & 1) r = int(long(r) * b % p);
        b = int(long(b) * b % p);
        e >>= 1;
    }
    return r;
}

FpPoly fp_mul(const FpPoly& a, const FpPoly& b, int p) {
    if (a.empty() || b.empty()) return {};
    FpPoly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            r[i + j] = int((r[i + j] + long(a[i]) * b[j]) % p);
    fp_trim(r);
    return r;
}

FpPoly fp_mod(FpPoly a, const FpPoly& b, int p) {
    fp_trim(a);
    int linv = fp_inv_scalar(b.back(), p);
    while (a.size() >= b.size()) {
        int c = int(long(a.back()) * linv % p);
        std::size_t off = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i)
            a[off + i] = int(((a[off + i] - long(c) * b[i]) % p + p) % p);
        fp_trim(a);
        if (a.empty()) break;
    }
    return a;
}

FpPoly fp_gcd(FpPoly a, FpPoly b, int p) {
    fp_trim(a);
    fp_trim(b);
    while (!b.empty()) {
        FpPoly r = fp_mod(a, b, p);
        a = b;
        b = r;
    }
    return a;
}

FpPoly fp_powmod_x(const Int& e, const FpPoly& U, int p) {
    // x^e mod U
    FpPoly result{1}, base{0, 1};
    base = fp_mod(base, U, p);
    Int k = e;
    while (k > 0) {
        if ((k & 1) != 0) result = fp_mod(fp_mul(result, base, p), U, p);
        base = fp_mod(fp_mul(base, base, p), U, p);
        k >>= 1;
    }
    return result;
}

// Extended Euclid in F_p[x]: returns (g, s) with s*a == g mod b, g the gcd.
std::pair<FpPoly, FpPoly> fp_ext_gcd(FpPoly a, FpPoly b, int p) {
    fp_trim(a);
    fp_trim(b);
    FpPoly s0{1}, s1{};
    while (!b.empty()) {
        // quotient of a by b
        FpPoly q;
        FpPoly r = a;
        int linv = fp_inv_scalar(b.back(), p);
        fp_trim(r);
        if (r.size() >= b.size()) q.assign(r.size() - b.size() + 1, 0);
        while (r.size() >= b.size() && !r.empty()) {
            int c = int(long(r.back()) * linv % p);
            std::size_t off = r.size() - b.size();
            q[off] = c;
            for (std::size_t i = 0; i < b.size(); ++i)
                r[off + i] = int(((r[off + i] - long(c) * b[i]) % p + p) % p);
            fp_trim(r);
        }
        // (a,b) <- (b,r); (s0,s1) <- (s1, s0 - q*s1)
        FpPoly qs = fp_mul(q, s1, p);
        FpPoly s2 = s0;
        if (s2.size() < qs.size()) s2.resize(qs.size(), 0);
        for (std::size_t i = 0; i < qs.size(); ++i)
            s2[i] = int(((s2[i] - qs[i]) % p + p) % p);
        fp_trim(s2);
        a = b;
        b = r;
        s0 = s1;
        s1 = s2;
    }
    return {a, s0};
}

}  // namespace

// ===========================================================================
// BaseRing
// ===========================================================================

Int BaseRing::reduce(const Int& a) const {
    Int r = a % mod;
    if (r < 0) r += mod;
    return r;
}

UnramElt BaseRing::ue_one() const {
    UnramElt r(f, Int(0));
    r[0] = 1;
    return r;
}

UnramElt BaseRing::ue_from_int(const Int& a) const {
    UnramElt r(f, Int(0));
    r[0] = reduce(a);
    return r;
}

bool BaseRing::ue_is_zero(const UnramElt& a) const {
    for (const auto& c : a)
        if (c != 0) return false;
    return true;
}

UnramElt BaseRing::ue_add(const UnramElt& a, const UnramElt& b) const {
    UnramElt r(f);
    for (int i = 0; i < f; ++i) r[i] = reduce(a[i] + b[i]);
    return r;
}

UnramElt BaseRing::ue_sub(const UnramElt& a, const UnramElt& b) const {
    UnramElt r(f);
    for (int i = 0; i < f; ++i) r[i] = reduce(a[i] - b[i]);
    return r;
}

UnramElt BaseRing::ue_neg(const UnramElt& a) const {
    UnramElt r(f);
    for (int i = 0; i < f; ++i) r[i] = reduce(-a[i]);
    return r;
}

UnramElt BaseRing::ue_mul(const UnramElt& a, const UnramElt& b) const {
    if (f == 1) {
        UnramElt r(1);
        r[0] = reduce(a[0] * b[0]);
        return r;
    }
    std::vector<Int> full(2 * f - 1, Int(0));
    for (int i = 0; i < f; ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; j < f; ++j) full[i + j] += a[i] * b[j];
    }
    // reduce mod U (monic)
    for (int j = 2 * f - 2; j >= f; --j) {
        if (full[j] == 0) continue;
        Int c = full[j];
        for (int i = 0; i < f; ++i) full[j - f + i] -= c * U[i];
        full[j] = 0;
    }
    UnramElt r(f);
    for (int i = 0; i < f; ++i) r[i] = reduce(full[i]);
    return r;
}

UnramElt BaseRing::ue_inv(const UnramElt& a) const {
    if (ue_valp(a) > 0)
        throw NotInvertibleAtPrecision("unramified-ring element with positive valuation");
    // inverse mod p by extended Euclid, then Newton-lift to mod p^prec
    FpPoly ap(f);
    for (int i = 0; i < f; ++i) ap[i] = int(a[i] % p);
    fp_trim(ap);
    FpPoly Up(f + 1);
    for (int i = 0; i <= f; ++i) Up[i] = int(((U[i] % p) + p) % p);
    auto [g, s] = fp_ext_gcd(ap, Up, p);
    if (g.size() != 1)
        throw NotInvertibleAtPrecision("residue not invertible in F_q");
    int ginv = fp_inv_scalar(g[0], p);
    UnramElt y = ue_zero();
    for (std::size_t i = 0; i < s.size() && int(i) < f; ++i)
        y[i] = reduce(Int(int(long(s[i]) * ginv % p)));
    UnramElt two = ue_from_int(2);
    int steps = 1;
    while ((1 << steps) < prec + 1) ++steps;
    for (int k = 0; k < steps; ++k)
        y = ue_mul(y, ue_sub(two, ue_mul(a, y)));
    return y;
}

int BaseRing::ue_valp(const UnramElt& a) const {
    int best = prec;
    for (const auto& c : a) {
        if (c == 0) continue;
        Int v = c;
        int k = 0;
        while (k < best && v % p == 0) {
            v /= p;
            ++k;
        }
        best = std::min(best, k);
        if (best == 0) return 0;
    }
    return best;
}

UnramElt BaseRing::ue_div_p(const UnramElt& a, int k) const {
    Int pk = int_pow(p, k);
    UnramElt r(f);
    for (int i = 0; i < f; ++i) {
        if (a[i] % pk != 0)
            throw PrecisionTooSmall("inexact division by p^" + std::to_string(k));
        r[i] = a[i] / pk;
    }
    return r;
}

UnramElt BaseRing::ue_mod_pk(const UnramElt& a, int k) const {
    Int pk = int_pow(p, std::min(k, prec));
    UnramElt r(f);
    for (int i = 0; i < f; ++i) r[i] = a[i] % pk;
    return r;
}

TPoly BaseRing::tp_one() const { return tp_from_ue(ue_one()); }

TPoly BaseRing::tp_from_ue(const UnramElt& a) const {
    TPoly r;
    if (!ue_is_zero(a)) r.terms[0] = a;
    return r;
}

TPoly BaseRing::tp_monomial(TExp e, const UnramElt& a) const {
    TPoly r;
    if (!ue_is_zero(a)) r.terms[e] = a;
    return r;
}

TPoly BaseRing::tp_add(const TPoly& a, const TPoly& b) const {
    TPoly r = a;
    for (const auto& [e, c] : b.terms) {
        auto it = r.terms.find(e);
        if (it == r.terms.end()) {
            r.terms[e] = c;
        } else {
            it->second = ue_add(it->second, c);
            if (ue_is_zero(it->second)) r.terms.erase(it);
        }
    }
    return r;
}

TPoly BaseRing::tp_neg(const TPoly& a) const {
    TPoly r;
    for (const auto& [e, c] : a.terms) r.terms[e] = ue_neg(c);
    return r;
}

TPoly BaseRing::tp_mul(const TPoly& a, const TPoly& b) const {
    TPoly r;
    for (const auto& [ea, ca] : a.terms)
        for (const auto& [eb, cb] : b.terms) {
            UnramElt c = ue_mul(ca, cb);
            if (ue_is_zero(c)) continue;
            TExp e = texp_mul(ea, eb);
            auto it = r.terms.find(e);
            if (it == r.terms.end()) {
                r.terms[e] = c;
            } else {
                it->second = ue_add(it->second, c);
                if (ue_is_zero(it->second)) r.terms.erase(it);
            }
        }
    return r;
}

int BaseRing::tp_valp(const TPoly& a) const {
    int best = prec;
    for (const auto& [e, c] : a.terms) {
        best = std::min(best, ue_valp(c));
        if (best == 0) break;
    }
    return best;
}

TPoly BaseRing::tp_div_p(const TPoly& a, int k) const {
    TPoly r;
    for (const auto& [e, c] : a.terms) {
        UnramElt d = ue_div_p(c, k);
        if (!ue_is_zero(d)) r.terms[e] = d;
    }
    return r;
}

TPoly BaseRing::tp_mod_pk(const TPoly& a, int k) const {
    TPoly r;
    for (const auto& [e, c] : a.terms) {
        UnramElt d = ue_mod_pk(c, k);
        if (!ue_is_zero(d)) r.terms[e] = d;
    }
    return r;
}

bool BaseRing::tp_is_unit(const TPoly& a) const { return tp_valp(a) == 0; }

bool BaseRing::tp_is_const_unit(const TPoly& a) const {
    return a.terms.size() == 1 && a.terms.begin()->first == 0 &&
           ue_valp(a.terms.begin()->second) == 0;
}

TFrac BaseRing::tf_add(const TFrac& a, const TFrac& b) const {
    if (a.num.is_zero()) return b;
    if (b.num.is_zero()) return a;
    // identical denominators are common; avoid blowing them up
    bool same_den = a.den.terms == b.den.terms;
    TFrac r;
    if (same_den) {
        r.num = tp_add(a.num, b.num);
        r.den = a.den;
    } else {
        r.num = tp_add(tp_mul(a.num, b.den), tp_mul(b.num, a.den));
        r.den = tp_mul(a.den, b.den);
    }
    return tf_normalize(r);
}

TFrac BaseRing::tf_neg(const TFrac& a) const { return {tp_neg(a.num), a.den}; }

TFrac BaseRing::tf_mul(const TFrac& a, const TFrac& b) const {
    if (a.num.is_zero() || b.num.is_zero()) return tf_zero();
    TFrac r{tp_mul(a.num, b.num), tp_mul(a.den, b.den)};
    return tf_normalize(r);
}

TFrac BaseRing::tf_inv(const TFrac& a) const {
    if (tp_valp(a.num) != 0)
        throw NotInvertibleAtPrecision("base digit is not a unit");
    return tf_normalize({a.den, a.num});
}

TFrac BaseRing::tf_normalize(const TFrac& a) const {
    TFrac r = a;
    if (r.num.is_zero()) return tf_zero();
    if (tp_is_const_unit(r.den)) {
        UnramElt dinv = ue_inv(r.den.terms.begin()->second);
        TPoly n;
        for (const auto& [e, c] : r.num.terms) {
            UnramElt d = ue_mul(c, dinv);
            if (!ue_is_zero(d)) n.terms[e] = d;
        }
        r.num = n;
        r.den = tp_one();
    } else if (r.num.terms == r.den.terms) {
        r.num = tp_one();
        r.den = tp_one();
    }
    return r;
}

bool BaseRing::tf_equal(const TFrac& a, const TFrac& b, int pk) const {
    TPoly d = tp_add(tp_mul(a.num, b.den), tp_neg(tp_mul(b.num, a.den)));
    return d.is_zero() || tp_valp(d) >= std::min(pk, prec);
}

std::string BaseRing::ue_str(const UnramElt& a) const {
    if (f == 1) return a[0].str();
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < f; ++i) {
        if (i) os << "+";
        os << a[i].str();
        if (i == 1) os << "*w";
        if (i > 1) os << "*w^" << i;
    }
    os << ")";
    return os.str();
}

std::string BaseRing::tp_str(const TPoly& a) const {
    if (a.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : a.terms) {
        if (!first) os << " + ";
        first = false;
        os << ue_str(c);
        for (int j = 0; j < m; ++j) {
            int ej = texp_get(e, j);
            if (ej == 1) os << "*t" << (j + 1);
            if (ej > 1) os << "*t" << (j + 1) << "^" << ej;
        }
    }
    return os.str();
}

std::string BaseRing::tf_str(const TFrac& a) const {
    std::string s = tp_str(a.num);
    if (!(a.den.terms.size() == 1 && a.den.terms.begin()->first == 0 &&
          a.den.terms.begin()->second == ue_one()))
        s = "(" + s + ")/(" + tp_str(a.den) + ")";
    return s;
}

// ===========================================================================
// LocalField
// ===========================================================================

FieldPtr LocalField::make_base(int p, std::vector<Int> unramified_poly, int m,
                               int precision, int pi_sign) {
    if (!is_prime_small(p)) throw ParseError("p must be a (small) prime");
    if (pi_sign != 1 && pi_sign != -1)
        throw ParseError("pi_sign must be +1 or -1");
    if (precision < 4) throw PrecisionTooSmall("precision must be at least 4");
    if (m < 0 || m > 4) throw ParseError("at most 4 transcendentals supported");
    if (unramified_poly.size() < 2 || unramified_poly.back() != 1)
        throw ReducibleUnramifiedStep("unramified polynomial must be monic of degree >= 1");
    int f = int(unramified_poly.size()) - 1;
    if (f > 1) {
        FpPoly Up(f + 1);
        for (int i = 0; i <= f; ++i)
            Up[i] = int(((unramified_poly[i] % p) + p) % p);
        // irreducible over F_p iff x^{p^f} == x mod U and gcd(x^{p^{f/q}}-x, U)=1
        auto sub_x = [&](const Int& e) {
            FpPoly xe = fp_powmod_x(e, Up, p);
            FpPoly xm{0, 1};
            xm = fp_mod(xm, Up, p);
            if (xe.size() < xm.size()) xe.resize(xm.size(), 0);
            if (xm.size() < xe.size()) xm.resize(xe.size(), 0);
            FpPoly d(xe.size());
            for (std::size_t i = 0; i < xe.size(); ++i)
                d[i] = int(((xe[i] - xm[i]) % p + p) % p);
            fp_trim(d);
            return d;
        };
        if (!sub_x(int_pow(p, f)).empty())
            throw ReducibleUnramifiedStep("x^q != x in the quotient");
        for (int q = 2; q <= f; ++q) {
            if (!is_prime_small(q) || f % q != 0) continue;
            FpPoly d = sub_x(int_pow(p, f / q));
            if (d.empty() || fp_gcd(d, Up, p).size() != 1)
                throw ReducibleUnramifiedStep("nontrivial factor at degree f/" +
                                              std::to_string(q));
        }
    }
    auto ring = std::make_shared<BaseRing>();
    ring->p = p;
    ring->f = f;
    ring->m = m;
    ring->prec = precision;
    ring->mod = int_pow(p, precision);
    ring->U.resize(f + 1);
    for (int i = 0; i <= f; ++i) ring->U[i] = ring->reduce(unramified_poly[i]);
    auto F = std::shared_ptr<LocalField>(new LocalField());
    F->ring_ = ring;
    F->e_rel_ = 1;
    F->e_abs_ = 1;
    F->pi_sign_ = pi_sign;
    return F;
}

FieldPtr LocalField::make_base(int p, int m, int precision, int pi_sign) {
    return make_base(p, std::vector<Int>{Int(0), Int(1)}, m, precision,
                     pi_sign);
}

FieldPtr LocalField::extend(FieldPtr parent, std::vector<Elt> tail) {
    if (!parent) throw ParseError("extend: null parent");
    if (tail.empty()) throw NonEisenstein("empty Eisenstein tail");
    int e = int(tail.size());
    for (int i = 0; i < e; ++i) {
        if (!tail[i].field() || tail[i].field().get() != parent.get()) {
            if (tail[i].field() && parent->has_ancestor(tail[i].field().get()))
                tail[i] = embed(tail[i], parent);
            else
                throw NonEisenstein("coefficient not in the parent field");
        }
        Valuation v = tail[i].val();
        if (i == 0) {
            if (v != Valuation(1))
                throw NonEisenstein("constant term must have valuation exactly 1");
        } else if (v < Valuation(1)) {
            throw NonEisenstein("coefficient " + std::to_string(i) +
                                " has valuation < 1");
        }
    }
    auto F = std::shared_ptr<LocalField>(new LocalField());
    F->parent_ = parent;
    F->ring_ = std::shared_ptr<const BaseRing>(parent, &parent->ring());
    F->eis_ = std::move(tail);
    F->e_rel_ = e;
    F->e_abs_ = parent->e_abs() * e;
    return F;
}

bool LocalField::has_ancestor(const LocalField* anc) const {
    const LocalField* cur = this;
    while (cur) {
        if (cur == anc) return true;
        cur = cur->parent_.get();
    }
    return false;
}

long LocalField::e_over(const LocalField* a) const {
    if (!has_ancestor(a)) throw ParseError("e_over: not an ancestor");
    return e_abs_ / a->e_abs_;
}

Elt LocalField::zero() const {
    if (is_base())
        return Elt::make_base(shared_from_this(), ring_->tf_zero(), 0, ring_->prec);
    std::vector<Elt> d(e_rel_, parent_->zero());
    return Elt::make_ext(shared_from_this(), std::move(d), 0, ring_->prec);
}

Elt LocalField::one() const { return from_int(1); }

Elt LocalField::from_int(const Int& a) const {
    if (is_base()) {
        TFrac fr{ring_->tp_from_ue(ring_->ue_from_int(a)), ring_->tp_one()};
        return Elt::make_base(shared_from_this(), std::move(fr), 0, ring_->prec);
    }
    Elt x = zero();
    x.digits_[0] = parent_->from_int(a);
    return x;
}

Elt LocalField::uniformizer() const { return pi_pow(1); }

Elt LocalField::pi_pow(long k) const {
    // exact for either sign of k: pi-powers are pure shifts, up to the unit
    // -1 when the base uniformizer is -p
    Elt x = (pi_sign_ < 0 && (k & 1L)) ? from_int(-1) : one();
    x.shift_ = int(k);
    return x;
}

Elt LocalField::transcendental(int j) const {
    if (j < 1 || j > ring_->m) throw ParseError("no such transcendental");
    if (is_base()) {
        std::vector<int> ev(ring_->m, 0);
        ev[j - 1] = 1;
        TFrac fr{ring_->tp_monomial(texp_pack(ev), ring_->ue_one()), ring_->tp_one()};
        return Elt::make_base(shared_from_this(), std::move(fr), 0, ring_->prec);
    }
    return embed(parent_->transcendental(j), shared_from_this());
}

const Elt& LocalField::pi_inv() const {
    if (!pi_inv_cache_) {
        if (is_base()) {
            Elt x = pi_sign_ < 0 ? from_int(-1) : one();
            x.shift_ = -1;
            pi_inv_cache_ = std::make_shared<Elt>(std::move(x));
        } else {
            // pi * (pi^{e-1} + c_{e-1} pi^{e-2} + ... + c_1) = -c_0
            FieldPtr self = shared_from_this();
            Elt acc = pi_pow(e_rel_ - 1);
            for (int i = 1; i < e_rel_; ++i)
                acc += embed(eis_[i], self) * pi_pow(i - 1);
            Elt c0inv = eis_[0].inv();
            Elt r = acc * embed(c0inv, self);
            r = -r;
            pi_inv_cache_ = std::make_shared<Elt>(std::move(r));
        }
    }
    return *pi_inv_cache_;
}

const Elt& LocalField::pi_e_unit_inv() const {
    if (!pi_e_unit_inv_cache_) {
        // w = pi^e / pi_parent = -(sum c_i pi^i)/pi_parent, a unit of O_L
        building_unit_inv_ = true;  // suspends balanced() at this level
        FieldPtr self = shared_from_this();
        Elt piK_inv = parent_->pi_inv();
        Elt acc = zero();
        for (int i = 0; i < e_rel_; ++i)
            acc += embed(eis_[i] * piK_inv, self) * pi_pow(i);
        Elt w = -acc;
        pi_e_unit_inv_cache_ = std::make_shared<Elt>(w.inv());
        building_unit_inv_ = false;
    }
    return *pi_e_unit_inv_cache_;
}

Elt LocalField::random_element(std::mt19937_64& rng, int max_tdeg,
                               bool force_unit) const {
    Elt x = random_integral(rng, max_tdeg);
    if (force_unit && !(x.val() == Valuation(0))) x = x + one();
    return x;
}

Elt LocalField::random_integral(std::mt19937_64& rng, int max_tdeg) const {
    if (is_base()) {
        TPoly n;
        int terms = 1 + int(rng() % 3);
        for (int k = 0; k < terms; ++k) {
            std::vector<int> ev(ring_->m, 0);
            for (int j = 0; j < ring_->m; ++j) ev[j] = int(rng() % (max_tdeg + 1));
            UnramElt c = ring_->ue_zero();
            for (int i = 0; i < ring_->f; ++i)
                c[i] = ring_->reduce(Int(long(rng() % 1000) - 500));
            if (ring_->ue_is_zero(c)) c = ring_->ue_one();
            TPoly t = ring_->tp_monomial(texp_pack(ev), c);
            n = ring_->tp_add(n, t);
        }
        TFrac fr{n, ring_->tp_one()};
        return Elt::make_base(shared_from_this(), std::move(fr), 0, ring_->prec);
    }
    std::vector<Elt> d;
    d.reserve(e_rel_);
    for (int i = 0; i < e_rel_; ++i) d.push_back(parent_->random_integral(rng, max_tdeg));
    return Elt::make_ext(shared_from_this(), std::move(d), 0, ring_->prec);
}

std::string LocalField::describe() const {
    std::ostringstream os;
    if (is_base()) {
        os << "base(p=" << ring_->p << ",f=" << ring_->f << ",m=" << ring_->m
           << ",prec=" << ring_->prec << ")";
    } else {
        os << parent_->describe() << "->eis(e=" << e_rel_ << ")";
    }
    return os.str();
}

// ===========================================================================
// Elt
// ===========================================================================

Elt Elt::make_base(FieldPtr F, TFrac fr, int shift, int pprec) {
    // Fold the p-valuation of the numerator into the shift so that stored
    // coefficients always carry full significance mod p^prec.  The absolute
    // precision shift + pprec is unchanged by this.
    const auto& R = F->ring();
    if (!fr.num.is_zero()) {
        int k = R.tp_valp(fr.num);
        if (k >= pprec || k >= R.prec) {
            fr = R.tf_zero();
        } else if (k > 0) {
            fr = R.tf_div_p(fr, k);
            shift += k;
            pprec -= k;
        }
    }
    Elt x;
    x.F_ = std::move(F);
    x.base_ = std::move(fr);
    x.shift_ = shift;
    x.pprec_ = pprec;
    return x;
}

Elt Elt::make_ext(FieldPtr F, std::vector<Elt> digits, int shift, int pprec) {
    Elt x;
    x.F_ = std::move(F);
    x.shift_ = shift;
    x.pprec_ = pprec;
    x.reduce_top(digits);
    x.digits_ = std::move(digits);
    return x;
}

void Elt::reduce_top(std::vector<Elt>& d) const {
    int e = F_->e_rel();
    const auto& eis = F_->eisenstein_tail();
    while (int(d.size()) > e) {
        Elt c = d.back();
        d.pop_back();
        if (c.is_zero()) continue;
        int j = int(d.size());
        for (int i = 0; i < e; ++i) d[j - e + i] -= c * eis[i];
    }
    while (int(d.size()) < e) d.push_back(F_->parent()->zero());
}

Elt Elt::balanced() const {
    if (F_->is_base()) return *this;
    if (F_->building_unit_inv_) return *this;
    bool any_finite = false;
    for (const auto& d : digits_) {
        Valuation v = d.val();
        if (v.is_infinite()) continue;
        any_finite = true;
        if (v < Valuation(1)) return *this;
    }
    if (!any_finite) return *this;
    // every digit is divisible by pi_parent:
    // pi^s sum d_i pi^i = pi^{s+e} * w^{-1} * sum (d_i/pi_parent) pi^i
    int e = F_->e_rel();
    bool parent_base = F_->parent()->is_base();
    Elt r = *this;
    for (auto& d : r.digits_) {
        if (d.is_zero()) continue;
        d = parent_base ? d.shifted(-1) : d * F_->parent()->pi_inv();
    }
    r.shift_ += e;
    return r * F_->pi_e_unit_inv();  // operator* balances further if possible
}

void Elt::check_prec() const {
    // absolute precision: high-valuation elements may hold few relative digits
    if (aprec() < 4 * F_->e_abs())
        throw PrecisionTooSmall("fewer than 4 guaranteed digits remain");
}

bool Elt::is_zero() const {
    if (F_->is_base()) return base_.num.is_zero();
    for (const auto& d : digits_)
        if (!d.is_zero()) return false;
    return true;
}

Valuation Elt::val() const {
    if (F_->is_base()) {
        if (base_.num.is_zero()) return Valuation::infinity();
        int k = F_->ring().tf_valp(base_);
        if (k >= pprec_) return Valuation::infinity();
        return Valuation(long(shift_) + k);
    }
    Valuation best = Valuation::infinity();
    int e = F_->e_rel();
    for (int i = 0; i < e; ++i) {
        Valuation vi = digits_[i].val();
        if (vi.is_infinite()) continue;
        best = val_min(best, vi * Rat(e) + Valuation(long(i)));
    }
    if (best.is_infinite()) return best;
    Valuation v = best + Valuation(long(shift_));
    if (!(v < Valuation(Rat(aprec())))) return Valuation::infinity();
    return v;
}

Valuation Elt::val_over(const FieldPtr& A) const {
    return val() * Rat(Int(1), Int(F_->e_over(A.get())));
}

Elt Elt::operator+(const Elt& o) const {
    if (F_.get() != o.F_.get()) {
        if (o.F_->has_ancestor(F_.get())) return embed(*this, o.F_) + o;
        if (F_->has_ancestor(o.F_.get())) return *this + embed(o, F_);
        throw ParseError("operands in unrelated fields");
    }
    long e = F_->e_abs();
    int s = std::min(shift_, o.shift_);
    long absmin = std::min(aprec(), o.aprec());
    int pnew = int(std::min<long>((absmin - s) / e, F_->ring().prec));
    if (F_->is_base()) {
        const auto& R = F_->ring();
        TPoly pa = base_.num, pb = o.base_.num;
        TFrac fa = base_, fb = o.base_;
        auto scale = [&](TFrac& fr, int k) {
            if (k == 0) return;
            UnramElt pk = R.ue_from_int(int_pow(R.p, k));
            TPoly sc = R.tp_from_ue(pk);
            fr.num = R.tp_mul(fr.num, sc);
        };
        scale(fa, shift_ - s);
        scale(fb, o.shift_ - s);
        return make_base(F_, R.tf_add(fa, fb), s, pnew);
    }
    auto lifted = [&](const Elt& x) {
        std::vector<Elt> d = x.digits_;
        int delta = x.shift_ - s;
        if (delta > 0) {
            std::vector<Elt> nd(d.size() + delta, F_->parent()->zero());
            for (std::size_t i = 0; i < d.size(); ++i) nd[i + delta] = d[i];
            d = std::move(nd);
        }
        return d;
    };
    std::vector<Elt> da = lifted(*this), db = lifted(o);
    if (db.size() > da.size()) da.swap(db);
    for (std::size_t i = 0; i < db.size(); ++i) da[i] += db[i];
    return make_ext(F_, std::move(da), s, pnew).balanced();
}

Elt Elt::operator-() const {
    Elt r = *this;
    if (F_->is_base()) {
        r.base_ = F_->ring().tf_neg(base_);
    } else {
        for (auto& d : r.digits_) d = -d;
    }
    return r;
}

Elt Elt::operator-(const Elt& o) const { return *this + (-o); }

Elt Elt::operator*(const Elt& o) const {
    if (F_.get() != o.F_.get()) {
        if (o.F_->has_ancestor(F_.get())) return embed(*this, o.F_) * o;
        if (F_->has_ancestor(o.F_.get())) return *this * embed(o, F_);
        throw ParseError("operands in unrelated fields");
    }
    int pnew = std::min(pprec_, o.pprec_);
    if (F_->is_base()) {
        return make_base(F_, F_->ring().tf_mul(base_, o.base_), shift_ + o.shift_, pnew);
    }
    if (is_zero() || o.is_zero()) {
        Elt z = F_->zero();
        z.pprec_ = pnew;
        return z;
    }
    int e = F_->e_rel();
    std::vector<Elt> d(2 * e - 1, F_->parent()->zero());
    for (int i = 0; i < e; ++i) {
        if (digits_[i].is_zero()) continue;
        for (int j = 0; j < e; ++j) {
            if (o.digits_[j].is_zero()) continue;
            d[i + j] += digits_[i] * o.digits_[j];
        }
    }
    return make_ext(F_, std::move(d), shift_ + o.shift_, pnew).balanced();
}

Elt Elt::mul_int(const Int& c) const {
    if (F_->is_base()) {
        const auto& R = F_->ring();
        TPoly sc = R.tp_from_ue(R.ue_from_int(c));
        TFrac fr{R.tp_mul(base_.num, sc), base_.den};
        return make_base(F_, std::move(fr), shift_, pprec_);
    }
    Elt r = *this;
    for (auto& d : r.digits_) d = d.mul_int(c);
    return r;
}

Elt Elt::shifted(int ds) const {
    Elt r = *this;
    r.shift_ += ds;
    return r;
}

Elt Elt::inv() const {
    if (F_->is_base()) {
        const auto& R = F_->ring();
        if (base_.num.is_zero())
            throw NotInvertibleAtPrecision("inverse of zero");
        int k = R.tf_valp(base_);
        if (k >= pprec_)
            throw NotInvertibleAtPrecision("element indistinguishable from zero");
        TFrac fr = k > 0 ? R.tf_div_p(base_, k) : base_;
        TFrac out = R.tf_inv(fr);
        Elt r = make_base(F_, std::move(out), -shift_ - k, pprec_ - k);
        r.check_prec();
        return r;
    }
    Valuation v = val();
    if (v.is_infinite())
        throw NotInvertibleAtPrecision("element indistinguishable from zero");
    // initial guess from the unique minimal-valuation digit
    int e = F_->e_rel();
    int i0 = -1;
    Valuation best = Valuation::infinity();
    for (int i = 0; i < e; ++i) {
        Valuation vi = digits_[i].val();
        if (vi.is_infinite()) continue;
        Valuation term = vi * Rat(e) + Valuation(long(i));
        if (term < best) {
            best = term;
            i0 = i;
        }
    }
    Elt y = embed(digits_[i0].inv(), F_) * F_->pi_pow(-long(i0) - shift_);
    Elt two = F_->from_int(2);
    long target = F_->e_abs() * long(F_->ring().prec);
    int steps = 1;
    while ((1L << steps) < target + 1) ++steps;
    for (int k = 0; k < steps; ++k) y = y * (two - *this * y);
    return y;
}

Elt Elt::pow(long k) const {
    if (k < 0) return inv().pow(-k);
    Elt r = F_->one();
    Elt b = *this;
    while (k > 0) {
        if (k & 1) r = r * b;
        b = b * b;
        k >>= 1;
    }
    return r;
}

Elt Elt::canonical() const {
    Valuation v = val();
    if (v.is_infinite()) {
        Elt z = F_->zero();
        z.pprec_ = pprec_;
        return z;
    }
    if (v < Valuation(0))
        throw NegativeValuation("canonical form requires a nonnegative valuation");
    if (F_->is_base()) {
        const auto& R = F_->ring();
        TFrac fr = base_;
        int s = shift_, pp = pprec_;
        if (s > 0) {
            TPoly sc = R.tp_from_ue(R.ue_from_int(int_pow(R.p, s)));
            fr.num = R.tp_mul(fr.num, sc);
            pp = std::min(pp + s, R.prec);  // absolute precision is unchanged
        } else if (s < 0) {
            fr = R.tf_div_p(fr, -s);
            pp += s;
        }
        fr = R.tf_normalize(fr);
        fr.num = R.tp_mod_pk(fr.num, pp);
        Elt r = make_base(F_, std::move(fr), 0, pp);
        r.check_prec();
        return r;
    }
    Elt cur = *this;
    int e = F_->e_rel();
    int k = cur.shift_ < 0 ? -cur.shift_ : 0;
    const int k_orig = k;
    if (k > 0) cur.shift_ = 0;  // now pi^k * value; divided back out below
    auto fold0 = [&](Elt x) {
        // fold a positive shift into the digit positions
        if (x.shift_ <= 0) return x;
        std::vector<Elt> d(x.digits_.size() + x.shift_, F_->parent()->zero());
        for (std::size_t i = 0; i < x.digits_.size(); ++i) d[i + x.shift_] = x.digits_[i];
        return make_ext(F_, std::move(d), 0, x.pprec_);
    };
    // Divide by pi exactly, k times.  Digit-term valuations e*v(d_i)+i are
    // pairwise distinct, so v(cur) >= 1 forces v(d_0) >= 1 and
    // d_0 * pi^{-1} = (d_0/pi_parent) * w^{-1} * pi^{e-1} stays integral.
    while (k > 0) {
        if (cur.shift_ > 0) {
            int use = std::min(cur.shift_, k);
            cur.shift_ -= use;
            k -= use;
            if (k == 0) break;
        }
        std::vector<Elt> d(e, F_->parent()->zero());
        for (int i = 1; i < e; ++i) d[i - 1] = cur.digits_[i];
        Elt d0 = cur.digits_[0];
        cur = make_ext(F_, std::move(d), 0, cur.pprec_);
        if (!d0.val().is_infinite()) {
            Elt q = d0 * F_->parent()->pi_inv();
            cur += embed(q, F_) * F_->pi_e_unit_inv() * F_->pi_pow(e - 1);
        }
        --k;
    }
    cur = fold0(cur);
    // dividing by pi^k costs k units of absolute precision
    cur.pprec_ -= (k_orig + e - 1) / e;
    cur.check_prec();
    for (auto& dig : cur.digits_) dig = dig.canonical();
    return cur;
}

Elt Elt::refreshed() const {
    Elt r = *this;
    r.pprec_ = F_->ring().prec;
    if (!F_->is_base())
        for (auto& d : r.digits_) d = d.refreshed();
    return r;
}

bool Elt::equals(const Elt& o, long cutoff_vl) const {
    Valuation v = (*this - o).val();
    return v.is_infinite() || v >= Valuation(Rat(cutoff_vl));
}

std::string Elt::str() const {
    if (F_->is_base()) {
        std::string s = F_->ring().tf_str(base_);
        if (shift_ != 0) s = "p^" + std::to_string(shift_) + "*(" + s + ")";
        return s;
    }
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < digits_.size(); ++i) {
        if (i) os << ", ";
        os << digits_[i].str();
    }
    os << "]";
    if (shift_ != 0) os << "*pi^" << shift_;
    return os.str();
}

Elt embed(const Elt& x, const FieldPtr& L) {
    if (!x.field()) throw ParseError("embed: uninitialized element");
    if (x.field().get() == L.get()) return x;
    if (!L->has_ancestor(x.field().get()))
        throw ParseError("embed: not an ancestor field");
    Elt y = embed(x, L->parent());
    int pp = y.pprec();
    std::vector<Elt> d(L->e_rel(), L->parent()->zero());
    d[0] = std::move(y);
    return Elt::make_ext(L, std::move(d), 0, pp);
}

FieldPtr widen_transcendentals(const FieldPtr& K, int extra) {
    if (!K) throw ParseError("widen_transcendentals: null field");
    if (extra < 0) throw ParseError("widen_transcendentals: negative count");
    if (K->is_base())
        return LocalField::make_base(K->p(), K->ring().U, K->m() + extra,
                                     K->pprec());
    FieldPtr par = widen_transcendentals(K->parent(), extra);
    std::vector<Elt> tail;
    tail.reserve(K->eisenstein_tail().size());
    for (const Elt& c : K->eisenstein_tail()) tail.push_back(transport(c, par));
    return LocalField::extend(par, std::move(tail));
}

Elt transport(const Elt& x, const FieldPtr& K2) {
    if (!x.field() || !K2) throw ParseError("transport: uninitialized element");
    const LocalField* A = x.field().get();
    if (A == K2.get()) return x;
    if (A->is_base() != K2->is_base() || A->p() != K2->p() ||
        A->f() != K2->f() || A->pprec() != K2->pprec() ||
        A->e_rel() != K2->e_rel() || A->m() > K2->m())
        throw ParseError("transport: incompatible towers");
    if (A->is_base())
        return Elt::make_base(K2, x.base_frac(), x.shift(), x.pprec());
    std::vector<Elt> d;
    d.reserve(x.digits().size());
    for (const Elt& g : x.digits()) d.push_back(transport(g, K2->parent()));
    return Elt::make_ext(K2, std::move(d), x.shift(), x.pprec());
}

// ===========================================================================
// ResidueElt
// ===========================================================================

ResidueElt residue(const Elt& x) {
    Valuation v = x.val();
    if (!v.is_infinite() && v < Valuation(0))
        throw NegativeValuation("residue of a non-integral element");
    ResidueElt r;
    Elt c = x.canonical();
    const Elt* cur = &c;
    while (!cur->field()->is_base()) cur = &cur->digits()[0];
    const auto& R = cur->field()->ring();
    r.ring_ = std::shared_ptr<const BaseRing>(cur->field(), &cur->field()->ring());
    if (cur->shift() > 0) {
        r.frac_ = R.tf_zero();
        return r;
    }
    r.frac_.num = R.tp_mod_pk(cur->base_frac().num, 1);
    r.frac_.den = R.tp_mod_pk(cur->base_frac().den, 1);
    if (r.frac_.num.is_zero()) r.frac_ = R.tf_zero();
    return r;
}

bool ResidueElt::is_zero() const { return frac_.num.is_zero(); }

ResidueElt ResidueElt::operator+(const ResidueElt& o) const {
    if (!ring_) return o;  // default-constructed = zero
    if (!o.ring_) return *this;
    ResidueElt r;
    r.ring_ = ring_;
    r.frac_ = ring_->tf_add(frac_, o.frac_);
    r.frac_.num = ring_->tp_mod_pk(r.frac_.num, 1);
    r.frac_.den = ring_->tp_mod_pk(r.frac_.den, 1);
    if (r.frac_.num.is_zero()) r.frac_ = ring_->tf_zero();
    return r;
}

ResidueElt ResidueElt::operator-() const {
    if (!ring_) return *this;
    ResidueElt r;
    r.ring_ = ring_;
    r.frac_ = ring_->tf_neg(frac_);
    r.frac_.num = ring_->tp_mod_pk(r.frac_.num, 1);
    return r;
}

ResidueElt ResidueElt::operator-(const ResidueElt& o) const { return *this + (-o); }

ResidueElt ResidueElt::operator*(const ResidueElt& o) const {
    if (!ring_) return *this;  // zero
    if (!o.ring_) return o;
    ResidueElt r;
    r.ring_ = ring_;
    r.frac_ = ring_->tf_mul(frac_, o.frac_);
    r.frac_.num = ring_->tp_mod_pk(r.frac_.num, 1);
    r.frac_.den = ring_->tp_mod_pk(r.frac_.den, 1);
    if (r.frac_.den.is_zero()) r.frac_.den = ring_->tp_one();
    if (r.frac_.num.is_zero()) r.frac_ = ring_->tf_zero();
    return r;
}

ResidueElt ResidueElt::inv() const {
    if (is_zero()) throw NotInvertibleAtPrecision("residue inverse of zero");
    ResidueElt r;
    r.ring_ = ring_;
    r.frac_ = ring_->tf_inv(frac_);
    r.frac_.num = ring_->tp_mod_pk(r.frac_.num, 1);
    r.frac_.den = ring_->tp_mod_pk(r.frac_.den, 1);
    return r;
}

ResidueElt ResidueElt::pow(long k) const {
    if (k < 0) return inv().pow(-k);
    ResidueElt r;
    r.ring_ = ring_;
    r.frac_ = ring_->tf_one();
    ResidueElt b = *this;
    while (k > 0) {
        if (k & 1) r = r * b;
        b = b * b;
        k >>= 1;
    }
    return r;
}

bool ResidueElt::operator==(const ResidueElt& o) const {
    if (!ring_ || !o.ring_) return is_zero() && o.is_zero();
    return ring_->tf_equal(frac_, o.frac_, 1);
}

Elt ResidueElt::lift_to(const FieldPtr& L) const {
    // find the base of L's tower
    FieldPtr base = L;
    while (!base->is_base()) base = base->parent();
    Elt x = Elt::make_base(base, frac_, 0, base->ring().prec);
    return embed(x, L);
}

std::string ResidueElt::str() const { return ring_->tf_str(frac_); }

std::vector<ResidueElt> ResidueElt::enumerate_fq(const FieldPtr& field) {
    FieldPtr base = field;
    while (!base->is_base()) base = base->parent();
    const auto& R = base->ring();
    std::vector<ResidueElt> out;
    long total = 1;
    for (int i = 0; i < R.f; ++i) total *= R.p;
    for (long idx = 0; idx < total; ++idx) {
        UnramElt c = R.ue_zero();
        long t = idx;
        for (int i = 0; i < R.f; ++i) {
            c[i] = Int(t % R.p);
            t /= R.p;
        }
        ResidueElt r;
        r.ring_ = std::shared_ptr<const BaseRing>(base, &base->ring());
        if (R.ue_is_zero(c))
            r.frac_ = R.tf_zero();
        else
            r.frac_ = TFrac{R.tp_from_ue(c), R.tp_one()};
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace ramlab
