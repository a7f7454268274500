#include "ramlab/ramification.hpp"

#include <algorithm>

namespace ramlab {

// ---------------------------------------------------------------------------
// GaloisGroup
// ---------------------------------------------------------------------------

Elt GaloisGroup::apply(int k, const Elt& x) const {
    if (k == 0) return x;
    Elt c = x.canonical();
    const auto& d = c.digits();
    Elt acc = L_->zero();
    for (int i = int(d.size()) - 1; i >= 0; --i)
        acc = acc * roots_[k] + embed(d[i], L_);
    return acc;
}

void GaloisGroup::build_table() const {
    if (!table_.empty()) return;
    int n = order();
    std::vector<std::vector<int>> tab(std::size_t(n), std::vector<int>(std::size_t(n), -1));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (a == 0) {
                tab[std::size_t(a)][std::size_t(b)] = b;
                continue;
            }
            if (b == 0) {
                tab[std::size_t(a)][std::size_t(b)] = a;
                continue;
            }
            Elt y = apply(a, roots_[std::size_t(b)]);
            int best = -1;
            for (int c = 0; c < n; ++c) {
                Valuation v = (y - roots_[std::size_t(c)]).val();
                if (v.is_infinite() || v > Valuation(match_cutoff_)) {
                    best = c;
                    break;
                }
            }
            if (best < 0)
                throw PrecisionTooSmall("cannot match a composed conjugate");
            tab[std::size_t(a)][std::size_t(b)] = best;
        }
    }
    std::vector<int> iv(std::size_t(n), -1);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (tab[std::size_t(a)][std::size_t(b)] == 0) iv[std::size_t(a)] = b;
    table_ = std::move(tab);
    inv_ = std::move(iv);
}

int GaloisGroup::compose(int a, int b) const {
    build_table();
    return table_[a][b];
}

int GaloisGroup::inverse(int a) const {
    build_table();
    return inv_[a];
}

long GaloisGroup::subgroup_order(const Rat& t) const {
    long n = 0;
    for (const auto& v : disp_)
        if (v.is_infinite() || v.finite() >= t + Rat(1)) ++n;
    return n;
}

std::vector<int> GaloisGroup::subgroup_members(const Rat& t) const {
    std::vector<int> m;
    for (int k = 0; k < order(); ++k)
        if (disp_[k].is_infinite() || disp_[k].finite() >= t + Rat(1)) m.push_back(k);
    return m;
}

bool GaloisGroup::quotient_elementary_p_abelian(const Rat& s, const Rat& t) const {
    build_table();
    auto in_bottom = [&](int k) {
        return disp_[k].is_infinite() || disp_[k].finite() >= t + Rat(1);
    };
    std::vector<int> top = subgroup_members(s);
    int p = L_->p();
    for (int a : top) {
        // a^p in the lower subgroup
        int pw = 0;
        for (int j = 0; j < p; ++j) pw = compose(pw, a);
        if (!in_bottom(pw)) return false;
        // commutators in the lower subgroup
        for (int b : top) {
            int c = compose(compose(a, b), compose(inverse(a), inverse(b)));
            if (!in_bottom(c)) return false;
        }
    }
    return true;
}

namespace {

// Guaranteed absolute precision implied by the digit data itself, which can be
// lower than the element-level figure after long operation chains.
long honest_aprec(const Elt& x) {
    if (x.field()->is_base()) return x.shift() + x.pprec();
    long best = -1;
    int e = x.field()->e_rel();
    const auto& ds = x.digits();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds[i].is_zero()) continue;
        long a = e * honest_aprec(ds[i]) + long(i);
        if (best < 0 || a < best) best = a;
    }
    if (best < 0) return long(x.field()->e_abs()) * x.field()->pprec();  // exact zero
    return x.shift() + best;
}

// Roots coming out of the search pipeline can carry very pessimistic precision
// bookkeeping.  The stored digit data is an exact element within the honest
// precision of the true root; reinterpret it as the Newton seed and polish.
Elt sharpen_root(const FPoly& P, const Elt& r) {
    Valuation vd = P.derivative().eval(r).val();
    if (vd.is_infinite())
        throw PrecisionTooSmall("conjugate looks like a multiple root at precision");
    // v(seed - root) > v(P'(root)) keeps the seed inside the Newton basin
    if (Valuation(honest_aprec(r)) <= vd)
        throw PrecisionTooSmall("root too coarse to re-enter the Newton basin");
    return newton_lift(P, r.refreshed());
}

}  // namespace

GaloisGroup galois_group(const FieldPtr& L, const FieldPtr& K) {
    GaloisGroup G;
    G.L_ = L;
    G.K_ = K;
    if (L.get() == K.get()) {
        G.roots_ = {L->uniformizer()};
        G.disp_ = {Valuation::infinity()};
        return G;
    }
    if (!L->parent() || L->parent().get() != K.get())
        throw UnsupportedRelationShape("conjugate enumeration needs a single Eisenstein step");
    int e = L->e_rel();
    if (e > 64) throw DegreeTooLarge("extension degree beyond the enumeration cap");

    std::vector<Elt> c(e + 1, L->zero());
    for (int i = 0; i < e; ++i) c[i] = embed(L->eisenstein_tail()[i], L);
    c[e] = L->one();
    FPoly P(L, std::move(c));
    std::vector<Elt> roots = roots_in_field(P, L);
    if (int(roots.size()) != e)
        throw NotGalois("found " + std::to_string(roots.size()) + " of " +
                        std::to_string(e) + " conjugates in the field");
    for (auto& r : roots) r = sharpen_root(P, r);

    Elt pi = L->uniformizer();
    // identity = the conjugate indistinguishable from pi itself
    int id = -1;
    long dmax = 0;
    std::vector<Valuation> dv(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        dv[i] = (roots[i] - pi).val();
        if (dv[i].is_infinite()) {
            id = int(i);
        } else {
            dmax = std::max(dmax, dv[i].finite().num().convert_to<long>());
        }
    }
    if (id < 0) throw PrecisionTooSmall("identity conjugate not recognized");
    std::swap(roots[0], roots[std::size_t(id)]);
    std::swap(dv[0], dv[std::size_t(id)]);
    // conjugates must be mutually separated well below precision
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            Valuation v = (roots[i] - roots[j]).val();
            if (v.is_infinite()) throw PrecisionTooSmall("conjugates collide at precision");
            dmax = std::max(dmax, v.finite().num().convert_to<long>());
        }
    G.roots_ = std::move(roots);
    G.disp_ = std::move(dv);
    G.match_cutoff_ = dmax;
    return G;
}

// ---------------------------------------------------------------------------
// RamificationProfile
// ---------------------------------------------------------------------------

long RamificationProfile::subgroup_order(const Rat& t) const {
    long n = 1;  // identity
    for (const auto& d : displacements)
        if (d >= t + Rat(1)) ++n;
    return n;
}

Rat RamificationProfile::phi(const Rat& u) const {
    // phi(u) = (u + sum_{sigma != 1} min(u, i(sigma)-1)) / |G_0|
    Rat acc = u;
    for (const auto& d : displacements) acc += rat_min(u, d - Rat(1));
    return acc / Rat(group_order);
}

Rat RamificationProfile::psi(const Rat& v) const {
    Rat t(0), ft(0);
    for (const auto& br : lower_breaks) {
        Rat fb = phi(br);
        if (fb >= v) break;
        t = br;
        ft = fb;
    }
    if (v <= ft) return t;
    // slope just above t is |G_{t+}|/|G_0|
    long gplus = 1;
    for (const auto& d : displacements)
        if (d - Rat(1) > t) ++gplus;
    return t + (v - ft) * Rat(group_order) / Rat(gplus);
}

RamificationProfile profile_from_displacements(long group_order,
                                               std::vector<Rat> displacements) {
    RamificationProfile r;
    r.group_order = group_order;
    std::sort(displacements.begin(), displacements.end());
    r.displacements = std::move(displacements);
    for (const auto& d : r.displacements) {
        Rat t = d - Rat(1);
        if (r.lower_breaks.empty() || r.lower_breaks.back() != t)
            r.lower_breaks.push_back(t);
    }
    for (const auto& t : r.lower_breaks) r.upper_breaks.push_back(r.phi(t));
    r.b_log = r.upper_breaks.empty() ? Rat(0) : r.upper_breaks.back();
    r.b = r.b_log + Rat(1);
    return r;
}

RamificationProfile lower_filtration(const GaloisGroup& G) {
    std::vector<Rat> disp;
    for (const auto& v : G.displacement())
        if (!v.is_infinite()) disp.push_back(v.finite());
    return profile_from_displacements(G.order(), std::move(disp));
}

RamificationProfile lower_filtration(const FieldPtr& L, const FieldPtr& K) {
    return lower_filtration(galois_group(L, K));
}

// ---------------------------------------------------------------------------
// Conductors
// ---------------------------------------------------------------------------

ConductorRow conductors(const RamificationProfile& prof, const std::string& label,
                        int dim, const std::vector<int>& codims) {
    for (std::size_t a = 0; a < codims.size(); ++a) {
        if (codims[a] < 0 || codims[a] > dim)
            throw InconsistentDims("codimension outside [0, dim]");
        if (a > 0 && codims[a] > codims[a - 1])
            throw InconsistentDims("codimensions must be non-increasing");
    }
    ConductorRow row;
    row.label = label;
    row.dim = dim;
    Rat art(0), swan(0);
    Rat g0(prof.group_order);
    for (std::size_t a = 0; a < codims.size(); ++a) {
        if (codims[a] == 0) continue;
        Rat term = Rat(prof.subgroup_order(Rat(long(a)))) / g0 * Rat(codims[a]);
        art += term;
        if (a >= 1) swan += term;
    }
    row.art = art;
    row.swan = swan;
    row.art_integral = art.is_integer();
    row.swan_integral = swan.is_integer();
    return row;
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

AuditReport hasse_arf_audit(const std::vector<ExtensionCase>& family) {
    AuditReport rep;
    for (const auto& fc : family) {
        AuditRow row;
        row.label = fc.label;
        GaloisGroup G = galois_group(fc.L, fc.K);
        row.profile = lower_filtration(G);
        row.arts_integral = true;
        for (const auto& t : row.profile.lower_breaks) {
            // a character whose restriction dies exactly after level t
            if (!t.is_integer()) {
                row.arts_integral = false;
                continue;
            }
            long tl = t.num().convert_to<long>();
            std::vector<int> codims(std::size_t(tl) + 1, 1);
            ConductorRow cr = conductors(row.profile, fc.label, 1, codims);
            row.art_levels.push_back(cr.art);
            row.arts_integral = row.arts_integral && cr.art_integral;
        }
        const auto& breaks = row.profile.lower_breaks;
        for (std::size_t j = 0; j < breaks.size(); ++j) {
            SubquotientCheck sc;
            sc.lower_level = breaks[j];
            Rat next = breaks[j] + Rat(1);
            sc.order_ratio = G.subgroup_order(breaks[j]) / G.subgroup_order(next);
            sc.elementary_p_abelian = G.quotient_elementary_p_abelian(breaks[j], next);
            row.subquotients.push_back(sc);
            if (breaks[j] >= Rat(1) && !sc.elementary_p_abelian)
                rep.all_subquotients_ok = false;
        }
        rep.all_integral = rep.all_integral && row.arts_integral;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace {

// (1+T)^n as integer coefficients
std::vector<Int> binomial_row(long n) {
    std::vector<Int> c(std::size_t(n) + 1);
    c[0] = 1;
    for (long k = 1; k <= n; ++k) c[std::size_t(k)] = c[std::size_t(k - 1)] * (n - k + 1) / k;
    return c;
}

}  // namespace

FieldPtr cyclotomic_extension(const FieldPtr& K, int n) {
    int p = K->p();
    long pn = 1, pn1 = 1;
    for (int i = 0; i < n; ++i) pn *= p;
    for (int i = 0; i + 1 < n; ++i) pn1 *= p;
    long deg = pn - pn1;
    if (deg > 64) throw DegreeTooLarge("cyclotomic step beyond the enumeration cap");
    // ((1+T)^{p^n} - 1) / ((1+T)^{p^{n-1}} - 1), exact division over Z
    std::vector<Int> A = binomial_row(pn), B = binomial_row(pn1);
    A[0] -= 1;
    B[0] -= 1;  // both now divisible by T
    A.erase(A.begin());
    B.erase(B.begin());
    std::vector<Int> Q(std::size_t(deg) + 1);
    for (long i = deg; i >= 0; --i) {
        Int lead = A[std::size_t(i) + B.size() - 1];
        Q[std::size_t(i)] = lead;  // B is monic
        for (std::size_t j = 0; j < B.size(); ++j) A[std::size_t(i) + j] -= lead * B[j];
    }
    std::vector<Elt> tail;
    tail.reserve(std::size_t(deg));
    for (long i = 0; i < deg; ++i) tail.push_back(K->from_int(Q[std::size_t(i)]));
    return LocalField::extend(K, std::move(tail));
}

FieldPtr kummer_extension(const FieldPtr& K, int n) {
    std::vector<Elt> tail(std::size_t(n), K->zero());
    tail[0] = -K->uniformizer();
    return LocalField::extend(K, std::move(tail));
}

FieldPtr wild_displacement2_extension(const FieldPtr& K) {
    int p = K->p();
    std::vector<Elt> tail(std::size_t(p), K->zero());
    tail[0] = -K->uniformizer();
    tail[std::size_t(p) - 1] = K->uniformizer();
    return LocalField::extend(K, std::move(tail));
}

}  // namespace ramlab
