#include "ramlab/newton.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace ramlab {

// ---------------------------------------------------------------------------
// FPoly
// ---------------------------------------------------------------------------

FPoly::FPoly(FieldPtr F, std::vector<Elt> coeffs) : F_(std::move(F)), c_(std::move(coeffs)) {
    for (auto& a : c_)
        if (!a.field()) a = F_->zero();
}

FPoly FPoly::from_roots(const FieldPtr& F, const std::vector<Elt>& roots) {
    FPoly f(F, {F->one()});
    for (const auto& r : roots) f = f * FPoly(F, {-r, F->one()});
    return f;
}

int FPoly::degree() const {
    for (int i = int(c_.size()) - 1; i >= 0; --i)
        if (!c_[i].is_zero()) return i;
    return -1;
}

Elt FPoly::coeff(int i) const {
    if (i < 0 || i >= int(c_.size())) return F_->zero();
    return c_[i];
}

FPoly FPoly::operator+(const FPoly& o) const {
    std::vector<Elt> r(std::max(c_.size(), o.c_.size()), F_->zero());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = coeff(int(i)) + o.coeff(int(i));
    return FPoly(F_, std::move(r));
}

FPoly FPoly::operator-(const FPoly& o) const {
    std::vector<Elt> r(std::max(c_.size(), o.c_.size()), F_->zero());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = coeff(int(i)) - o.coeff(int(i));
    return FPoly(F_, std::move(r));
}

FPoly FPoly::operator*(const FPoly& o) const {
    if (is_zero() || o.is_zero()) return zero(F_);
    std::vector<Elt> r(c_.size() + o.c_.size() - 1, F_->zero());
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (c_[i].is_zero()) continue;
        for (std::size_t j = 0; j < o.c_.size(); ++j) {
            if (o.c_[j].is_zero()) continue;
            r[i + j] += c_[i] * o.c_[j];
        }
    }
    return FPoly(F_, std::move(r));
}

FPoly FPoly::scale(const Elt& a) const {
    std::vector<Elt> r = c_;
    for (auto& x : r) x = x * a;
    return FPoly(F_, std::move(r));
}

FPoly FPoly::derivative() const {
    if (c_.size() <= 1) return zero(F_);
    std::vector<Elt> r(c_.size() - 1, F_->zero());
    for (std::size_t i = 1; i < c_.size(); ++i) r[i - 1] = c_[i].mul_int(Int(i));
    return FPoly(F_, std::move(r));
}

Elt FPoly::eval(const Elt& x) const {
    const FieldPtr& L = x.field();
    Elt acc = L->zero();
    for (int i = int(c_.size()) - 1; i >= 0; --i) acc = acc * x + embed(c_[i], L);
    return acc;
}

FPoly FPoly::scale_var_pi(long v) const {
    std::vector<Elt> r = c_;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!r[i].is_zero()) r[i] = r[i].shifted(int(v * long(i)));
    return FPoly(F_, std::move(r));
}

FPoly FPoly::shift(const Elt& a) const {
    // Horner: f(a + T) built from the top coefficient down.
    FPoly acc = zero(F_);
    FPoly lin(F_, {a, F_->one()});
    for (int i = int(c_.size()) - 1; i >= 0; --i) acc = acc * lin + FPoly(F_, {c_[i]});
    return acc;
}

Valuation FPoly::content() const {
    Valuation v = Valuation::infinity();
    for (const auto& a : c_) v = val_min(v, a.val());
    return v;
}

FPoly FPoly::normalized() const {
    Valuation v = content();
    if (v.is_infinite() || v.finite().is_zero()) return *this;
    if (!v.finite().is_integer()) throw RamlabError("Internal", "non-integer content");
    long s = v.finite().num().convert_to<long>();
    std::vector<Elt> r = c_;
    for (auto& x : r)
        if (!x.is_zero()) x = x.shifted(int(-s));
    return FPoly(F_, std::move(r));
}

std::pair<FPoly, FPoly> FPoly::divmod_monic(const FPoly& d) const {
    int dd = d.degree();
    if (dd < 0) throw RamlabError("Internal", "division by zero polynomial");
    std::vector<Elt> rem = c_;
    rem.resize(std::max(rem.size(), std::size_t(dd)), F_->zero());
    std::vector<Elt> quot(rem.size() > std::size_t(dd) ? rem.size() - dd : 1, F_->zero());
    for (int i = int(rem.size()) - 1; i >= dd; --i) {
        Elt q = rem[i];
        if (q.is_zero()) continue;
        quot[i - dd] = q;
        for (int j = 0; j <= dd; ++j) rem[i - dd + j] -= q * d.coeff(j);
        rem[i] = F_->zero();
    }
    rem.resize(dd > 0 ? dd : 1, F_->zero());
    return {FPoly(F_, std::move(quot)), FPoly(F_, std::move(rem))};
}

FPoly FPoly::embedded(const FieldPtr& L) const {
    std::vector<Elt> r;
    r.reserve(c_.size());
    for (const auto& a : c_) r.push_back(embed(a, L));
    return FPoly(L, std::move(r));
}

std::string FPoly::str() const {
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < int(c_.size()); ++i) {
        if (c_[i].is_zero()) continue;
        if (!first) os << " + ";
        os << "(" << c_[i].str() << ")*T^" << i;
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

// ---------------------------------------------------------------------------
// Newton polygon
// ---------------------------------------------------------------------------

std::vector<NewtonSegment> newton_polygon(const FPoly& f) {
    int d = f.degree();
    if (d < 0) throw ZeroPolynomial("Newton polygon of the zero polynomial");
    if (f.coeff(d).val().is_infinite())
        throw PrecisionTooSmall("leading coefficient is below working precision");
    // points (i, v(a_i)), finite valuations only
    std::vector<std::pair<long, Rat>> pts;
    for (int i = 0; i <= d; ++i) {
        Valuation v = f.coeff(i).val();
        if (!v.is_infinite()) pts.push_back({i, v.finite()});
    }
    // lower convex hull, left to right
    std::vector<std::pair<long, Rat>> hull;
    for (const auto& pt : pts) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull[hull.size() - 1];
            // drop b if it lies on or above segment a-pt
            Rat lhs = (b.second - a.second) * Rat(pt.first - a.first);
            Rat rhs = (pt.second - a.second) * Rat(b.first - a.first);
            if (lhs >= rhs)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(pt);
    }
    std::vector<NewtonSegment> segs;
    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
        Rat slope = (hull[k + 1].second - hull[k].second) / Rat(hull[k + 1].first - hull[k].first);
        segs.push_back({-slope, hull[k + 1].first - hull[k].first});
    }
    return segs;  // root_val decreasing
}

// ---------------------------------------------------------------------------
// Residue polynomial helpers
// ---------------------------------------------------------------------------

namespace {

using RPoly = std::vector<ResidueElt>;

int rp_degree(const RPoly& a) {
    for (int i = int(a.size()) - 1; i >= 0; --i)
        if (!a[i].is_zero()) return i;
    return -1;
}

RPoly residue_poly(const FPoly& f) {
    RPoly r;
    r.reserve(f.coeffs().size());
    for (const auto& a : f.coeffs()) r.push_back(residue(a));
    return r;
}

ResidueElt rp_eval(const RPoly& a, const ResidueElt& x) {
    ResidueElt acc;  // zero
    bool init = false;
    for (int i = int(a.size()) - 1; i >= 0; --i) {
        if (!init) {
            acc = a[i];
            init = true;
        } else {
            acc = acc * x + a[i];
        }
    }
    return acc;
}

// Divide by (S - c); returns quotient, remainder in *rem.
RPoly rp_div_linear(const RPoly& a, const ResidueElt& c, ResidueElt* rem) {
    int d = rp_degree(a);
    RPoly q(std::max(d, 1), ResidueElt{});
    ResidueElt carry;
    bool have = false;
    for (int i = d; i >= 1; --i) {
        ResidueElt b = have ? a[i] + carry : a[i];
        // q coefficient for S^{i-1}
        q[i - 1] = b;
        carry = b * c;
        have = true;
    }
    *rem = have ? a[0] + carry : (d >= 0 ? a[0] : ResidueElt{});
    return q;
}

RPoly rp_mul(const RPoly& a, const RPoly& b) {
    int da = rp_degree(a), db = rp_degree(b);
    if (da < 0 || db < 0) return {};
    RPoly r(da + db + 1, ResidueElt{});
    for (int i = 0; i <= da; ++i) {
        if (a[i].is_zero()) continue;
        for (int j = 0; j <= db; ++j) r[i + j] = r[i + j] + a[i] * b[j];
    }
    return r;
}

RPoly rp_sub(const RPoly& a, const RPoly& b) {
    RPoly r(std::max(a.size(), b.size()), ResidueElt{});
    for (std::size_t i = 0; i < r.size(); ++i) {
        ResidueElt x = i < a.size() ? a[i] : ResidueElt{};
        ResidueElt y = i < b.size() ? b[i] : ResidueElt{};
        r[i] = x - y;
    }
    return r;
}

// Power-series inverse of u (unit constant term) modulo S^k.
RPoly rp_series_inv(const RPoly& u, int k) {
    RPoly r(k, ResidueElt{});
    ResidueElt u0i = u[0].inv();
    r[0] = u0i;
    for (int i = 1; i < k; ++i) {
        ResidueElt s;  // zero
        for (int j = 1; j <= i; ++j) {
            if (j < int(u.size()) && !u[j].is_zero()) s = s + u[j] * r[i - j];
        }
        r[i] = -(s * u0i);
    }
    return r;
}

// Distinct roots of rp in F_q with multiplicities.
std::vector<std::pair<ResidueElt, int>> rp_fq_roots(const RPoly& rp, const FieldPtr& tower) {
    std::vector<std::pair<ResidueElt, int>> out;
    for (const auto& c : ResidueElt::enumerate_fq(tower)) {
        if (rp_degree(rp) < 1) break;
        if (!rp_eval(rp, c).is_zero()) continue;
        RPoly cur = rp;
        int mult = 0;
        ResidueElt rem;
        while (rp_degree(cur) >= 1) {
            RPoly q = rp_div_linear(cur, c, &rem);
            if (!rem.is_zero()) break;
            ++mult;
            cur = q;
        }
        out.push_back({c, mult});
    }
    return out;
}

FPoly rp_lift(const RPoly& a, const FieldPtr& L) {
    std::vector<Elt> c;
    c.reserve(a.size());
    for (const auto& x : a) c.push_back(x.is_zero() ? L->zero() : x.lift_to(L));
    return FPoly(L, std::move(c));
}

}  // namespace

// ---------------------------------------------------------------------------
// Root lifting and root finding
// ---------------------------------------------------------------------------

Elt newton_lift(const FPoly& f, const Elt& x0) {
    FPoly df = f.derivative();
    Elt x = x0;
    Valuation prev = Valuation::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        Elt fx = f.eval(x);
        if (fx.indistinguishable_from_zero()) return x;
        if (iter > 0 && !(prev < fx.val()))
            throw NotConverged("root lift stalled at valuation " + fx.val().str());
        prev = fx.val();
        Elt dfx = df.eval(x);
        if (dfx.indistinguishable_from_zero())
            throw NotConverged("derivative vanishes at approximate root");
        x = x - fx * dfx.inv();
    }
    throw NotConverged("root lift did not terminate");
}

namespace {

void find_roots(const FPoly& f, long min_v, std::vector<Elt>& out, int depth) {
    if (depth > 64) throw NotConverged("root search recursion too deep");
    const FieldPtr& L = f.field();
    FPoly g = f;
    // strip roots at zero (coefficients indistinguishable from zero count)
    int low = 0;
    int d = g.degree();
    if (d < 0) return;
    while (low <= d && g.coeff(low).val().is_infinite()) ++low;
    for (int i = 0; i < low; ++i) out.push_back(L->zero());
    if (low > 0) {
        std::vector<Elt> c(g.coeffs().begin() + low, g.coeffs().end());
        g = FPoly(L, std::move(c));
    }
    if (g.degree() < 1) return;
    for (const auto& seg : newton_polygon(g)) {
        if (!seg.root_val.is_integer()) continue;
        long v = seg.root_val.num().convert_to<long>();
        if (v < min_v) continue;
        FPoly h = g.scale_var_pi(v).normalized();
        RPoly hr = residue_poly(h);
        for (const auto& [rbar, mult] : rp_fq_roots(hr, L)) {
            // residue 0 marks roots of higher valuation: their own segments
            if (rbar.is_zero()) continue;
            Elt x0 = rbar.lift_to(L);
            if (mult == 1) {
                Elt s = newton_lift(h, x0);
                out.push_back(s.shifted(int(v)));
            } else {
                std::vector<Elt> sub;
                find_roots(h.shift(x0), 1, sub, depth + 1);
                for (const auto& rho : sub) out.push_back((x0 + rho).shifted(int(v)));
            }
        }
    }
}

}  // namespace

std::vector<Elt> roots_in_field(const FPoly& f, const FieldPtr& L) {
    FPoly g = f.field().get() == L.get() ? f : f.embedded(L);
    std::vector<Elt> out;
    find_roots(g, std::numeric_limits<long>::min() / 4, out, 0);
    return out;
}

// ---------------------------------------------------------------------------
// Hensel factorization along the Newton polygon
// ---------------------------------------------------------------------------

namespace {

// Split f (exact nonzero leading coefficient) as G*H where G is monic and
// carries exactly the roots of valuation > c.  Requires the reduction of the
// c-rescaled polynomial to be S^k * (unit + ...).
std::pair<FPoly, FPoly> hensel_split_at(const FPoly& f, long c) {
    const FieldPtr& L = f.field();
    FPoly g0 = f.scale_var_pi(c);
    Valuation gamma_v = g0.content();
    long gamma = gamma_v.finite().num().convert_to<long>();
    FPoly g = g0.normalized();
    RPoly gr = residue_poly(g);
    int k = 0;
    while (k <= rp_degree(gr) && gr[k].is_zero()) ++k;
    if (k == 0 || k > rp_degree(gr))
        throw RamlabError("Internal", "degenerate reduction in slope split");
    RPoly u(gr.begin() + k, gr.end());
    RPoly uinv = rp_series_inv(u, k);

    long ea = L->e_abs();
    long target = std::numeric_limits<long>::max();
    for (const auto& a : g.coeffs())
        if (!a.is_zero()) target = std::min(target, a.aprec());
    target -= 6 * ea;  // keep enough digits for residue computations near the end
    if (target < 2) throw PrecisionTooSmall("not enough precision for slope split");

    // G = S^k + lower digits, H starts as the lift of u.
    std::vector<Elt> gc(k + 1, L->zero());
    gc[k] = L->one();
    FPoly G(L, std::move(gc));
    FPoly H = rp_lift(u, L);

    for (int iter = 0; iter < 4 * int(target) + 8; ++iter) {
        FPoly E = g - G * H;
        Valuation ev = E.content();
        if (ev.is_infinite() || ev.finite() >= Rat(target)) break;
        long j = ev.finite().num().convert_to<long>();
        FPoly Ej = E.scale_var_pi(0);  // copy
        {
            std::vector<Elt> c2 = E.coeffs();
            for (auto& x : c2)
                if (!x.is_zero()) x = x.shifted(int(-j));
            Ej = FPoly(L, std::move(c2));
        }
        RPoly er = residue_poly(Ej);
        // solve dg*u + dh*S^k = er with deg dg < k
        RPoly dg = rp_mul(er, uinv);
        dg.resize(k);
        RPoly dh = rp_sub(er, rp_mul(dg, u));
        // dh is divisible by S^k in the residue ring
        RPoly dh2(dh.begin() + std::min<std::size_t>(k, dh.size()), dh.end());
        FPoly dG = rp_lift(dg, L).scale_var_pi(0);
        FPoly dH = rp_lift(dh2, L);
        auto bump = [&](const FPoly& base, const FPoly& delta) {
            std::vector<Elt> c2 = base.coeffs();
            c2.resize(std::max(c2.size(), delta.coeffs().size()), L->zero());
            for (std::size_t i = 0; i < delta.coeffs().size(); ++i)
                if (!delta.coeff(int(i)).is_zero())
                    c2[i] += delta.coeff(int(i)).shifted(int(j));
            return FPoly(L, std::move(c2));
        };
        G = bump(G, dG);
        H = bump(H, dH);
    }

    // map back: f = pi^gamma * G(pi^{-c} T) * H(pi^{-c} T)
    FPoly Gf = G.scale_var_pi(-c);
    {
        std::vector<Elt> c2 = Gf.coeffs();
        for (auto& x : c2)
            if (!x.is_zero()) x = x.shifted(int(c * long(k)));
        Gf = FPoly(L, std::move(c2));
    }
    FPoly Hf = H.scale_var_pi(-c);
    {
        std::vector<Elt> c2 = Hf.coeffs();
        long s = gamma - c * long(k);
        for (auto& x : c2)
            if (!x.is_zero()) x = x.shifted(int(s));
        Hf = FPoly(L, std::move(c2));
    }
    return {Gf, Hf};
}

}  // namespace

std::vector<FPoly> hensel_slope_factor(const FPoly& f) {
    std::vector<FPoly> out;
    FPoly cur = f;
    while (true) {
        if (cur.degree() < 1) {
            if (out.empty()) out.push_back(cur);
            break;
        }
        auto segs = newton_polygon(cur);
        if (segs.size() <= 1) {
            out.push_back(cur);
            break;
        }
        bool found = false;
        for (std::size_t j = 0; j + 1 < segs.size(); ++j) {
            // integer cut c with v_{j+1} <= c < v_j separates segments 0..j
            Rat lo = segs[j + 1].root_val, hi = segs[j].root_val;
            Int ci = lo.ceil();
            if (Rat(ci) >= hi) continue;
            auto [G, H] = hensel_split_at(cur, ci.convert_to<long>());
            out.push_back(G);
            cur = H;
            found = true;
            break;
        }
        if (!found) {
            out.push_back(cur);
            break;
        }
    }
    return out;
}

std::vector<FPoly> hensel_factor(const FPoly& f) {
    const FieldPtr& L = f.field();
    std::vector<FPoly> out;
    for (const auto& fac : hensel_slope_factor(f)) {
        if (fac.degree() <= 1) {
            out.push_back(fac);
            continue;
        }
        auto segs = newton_polygon(fac);
        if (segs.size() != 1 || !segs[0].root_val.is_integer()) {
            out.push_back(fac);  // mixed or fractional slope: keep whole
            continue;
        }
        long v = segs[0].root_val.num().convert_to<long>();
        FPoly g = fac.scale_var_pi(v).normalized();
        RPoly gr = residue_poly(g);
        auto rroots = rp_fq_roots(gr, L);
        for (const auto& [rbar, mult] : rroots)
            if (mult > 1)
                throw InseparableResidual(
                    "repeated residue root; apply an affine substitution before splitting");
        FPoly rest = fac;
        for (const auto& [rbar, mult] : rroots) {
            Elt r = newton_lift(g, rbar.lift_to(L)).shifted(int(v));
            FPoly lin(L, {-r, L->one()});
            out.push_back(lin);
            rest = rest.divmod_monic(lin).first;
        }
        if (rest.degree() >= 1) out.push_back(rest);
    }
    return out;
}

FieldPtr adjoin_root(const FieldPtr& K, const std::vector<Elt>& eisenstein_tail) {
    return LocalField::extend(K, eisenstein_tail);
}

RootDiffTable root_difference_table(const FPoly& f, const FieldPtr& L) {
    RootDiffTable t;
    t.roots = roots_in_field(f, L);
    std::size_t n = t.roots.size();
    t.diff_val.assign(n, std::vector<Valuation>(n, Valuation::infinity()));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) t.diff_val[i][j] = (t.roots[i] - t.roots[j]).val();
    return t;
}

}  // namespace ramlab
