#include "ramlab/thickening.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace ramlab {

VarTablePtr thickening_vars(int m) {
    std::vector<std::string> names;
    for (int j = 0; j <= m; ++j) names.push_back("d" + std::to_string(j));
    for (int j = 0; j <= m; ++j) names.push_back("u" + std::to_string(j));
    return std::make_shared<VarTable>(std::move(names));
}

namespace {

// One digit of an integral element: c * t^a * pi^n with c a lifted unit.
struct RawTerm {
    TExp a = 0;
    long n = 0;
    Int c;
};

// The fixed point of x -> x^p above a nonzero residue c: the multiplicative
// lift, stable under every p-th power, so the digit survives unchanged at
// every decomposition level.
Int teichmuller(const Int& c, const BaseRing& R) {
    Int y = c % R.mod;
    if (y < 0) y += R.mod;
    for (int i = 0; i < R.prec; ++i)
        y = boost::multiprecision::powm(y, Int(R.p), R.mod);
    return y;
}

// Residue of a valuation-zero element as a fraction with a cleared
// constant-unit denominator; t-dependent denominators have no monomial digit
// expansion.
TFrac unit_residue_frac(const Elt& y) {
    const BaseRing& R = y.field()->ring();
    Elt b = y.canonical();
    while (!b.field()->is_base()) {
        const auto& dg = b.digits();
        if (dg.empty() || b.shift() != 0)
            throw PrecisionTooSmall("unit lost its leading digit");
        b = dg[0].canonical();
    }
    if (b.shift() != 0) throw PrecisionTooSmall("unit lost its leading digit");
    TFrac fr = R.tf_normalize(b.base_frac());
    if (!R.tp_is_const_unit(fr.den))
        throw UnsupportedRelationShape(
            "residue denominator involves the p-basis; no digit expansion");
    return fr;
}

// Greedy digit representation of an integral element: h = sum c * t^a * pi^n
// with Teichmueller coefficients (balanced: plain integers in (-p/2, p/2],
// the alternative decomposition system).  Deterministic: lowest pi-power
// first, monomial order within a level from the base-ring maps.
std::vector<RawTerm> gather(const Elt& h, bool balanced) {
    const FieldPtr& K = h.field();
    if (K->f() != 1)
        throw UnsupportedRelationShape(
            "digit expansion needs a prime residue subfield");
    const BaseRing& R = K->ring();
    std::vector<RawTerm> out;
    // The expansion runs on the stored representation taken as exact and to
    // its full depth, so that reassembling the digits recovers the
    // representation on the nose; anything beyond the representation's range
    // is cut off.
    Elt x = h.refreshed();
    const long cap = x.aprec();
    for (long guard = 0; guard <= cap; ++guard) {
        Valuation v = x.val();
        if (v.is_infinite()) return out;
        if (!v.finite().is_integer() || v.finite().sign() < 0)
            throw NegativeValuation("digit expansion needs an integral element");
        long n = v.finite().num().convert_to<long>();
        if (n >= cap) return out;
        TFrac fr = unit_residue_frac(x * K->pi_pow(-n));
        UnramElt dinv = R.ue_inv(fr.den.terms.begin()->second);
        Elt level = K->zero();
        for (const auto& [texp, w] : fr.num.terms) {
            Int c = R.ue_mul(w, dinv)[0] % R.p;
            if (c < 0) c += R.p;
            if (c == 0) continue;
            if (balanced) {
                if (2 * c > R.p) c -= R.p;
            } else {
                c = teichmuller(c, R);
            }
            Elt term = K->from_int(c);
            for (int j = 0; j < K->m(); ++j) {
                int aj = texp_get(texp, j);
                if (aj > 0) term *= K->transcendental(j + 1).pow(aj);
            }
            level += term;
            out.push_back({texp, n, c});
        }
        x = (x - level * K->pi_pow(n)).refreshed();
        if (!(x.val() > v)) throw PrecisionTooSmall("digit expansion stalled");
    }
    throw PrecisionTooSmall("digit expansion did not terminate");
}

long int_val(const Elt& h, const char* what) {
    Valuation v = h.val();
    if (v.is_infinite()) return 0;
    const Rat& vr = v.finite();
    if (!vr.is_integer() || vr.sign() < 0) throw NegativeValuation(what);
    return vr.num().convert_to<long>();
}

}  // namespace

GaussPoly psi(const Elt& h, const VarTablePtr& vars, int trunc, bool balanced) {
    const FieldPtr& K = h.field();
    const int m = K->m();
    if (vars->size() < 2 * (m + 1))
        throw ParseError("variable table too small for this p-basis");
    GaussPoly acc(K, vars, trunc);
    if (h.is_zero() || h.indistinguishable_from_zero()) return acc;
    long s = int_val(h, "psi needs a pi-power multiple of an integral element");
    auto raw = gather(h * K->pi_pow(-s), balanced);

    GaussPoly one = GaussPoly::constant(K->one(), vars, trunc);
    GaussPoly P0 = GaussPoly::constant(K->uniformizer(), vars, trunc) +
                   GaussPoly::variable(K, vars, delta_index(m, 0), trunc);
    std::vector<GaussPoly> ppow{one};
    auto pi_d0_pow = [&](long n) -> const GaussPoly& {
        while (long(ppow.size()) <= n) ppow.push_back(ppow.back() * P0);
        return ppow[std::size_t(n)];
    };
    std::vector<std::vector<GaussPoly>> tpow(std::size_t(m) + 1);
    auto t_dj_pow = [&](int j, int a) -> const GaussPoly& {
        auto& cache = tpow[std::size_t(j)];
        if (cache.empty()) cache.push_back(one);
        if (int(cache.size()) <= a) {
            GaussPoly Tj = GaussPoly::constant(K->transcendental(j), vars, trunc) +
                           GaussPoly::variable(K, vars, delta_index(m, j), trunc);
            while (int(cache.size()) <= a) cache.push_back(cache.back() * Tj);
        }
        return cache[std::size_t(a)];
    };

    for (const auto& t : raw) {
        GaussPoly term = pi_d0_pow(t.n + s).scale(K->from_int(t.c));
        for (int j = 1; j <= m; ++j) {
            int aj = texp_get(t.a, j - 1);
            if (aj > 0) term *= t_dj_pow(j, aj);
        }
        acc += term;
    }
    return acc;
}

GaussPoly psi_poly(const GaussPoly& g, int m, int trunc, bool balanced) {
    const FieldPtr& K = g.field();
    const VarTablePtr& vars = g.vars();
    GaussPoly acc(K, vars, trunc);
    for (const auto& [e, c] : g.terms()) {
        for (int j = 0; j <= m && j < int(e.size()); ++j)
            if (e[j] != 0)
                throw UnsupportedRelationShape(
                    "input already involves the deformation variables");
        GaussPoly mono(K, vars, trunc);
        mono.set_coeff(e, K->one());
        acc += psi(c, vars, trunc, balanced) * mono;
    }
    return acc;
}

std::vector<Elt> psi_diff_linear(const Elt& h, const VarTablePtr& vars, int trunc) {
    const FieldPtr& K = h.field();
    const int m = K->m();
    GaussPoly ph = psi(h, vars, std::max(trunc, 1));
    std::vector<Elt> out;
    for (int j = 0; j <= m; ++j) {
        std::vector<int> e(std::size_t(vars->size()), 0);
        e[std::size_t(delta_index(m, j))] = 1;
        out.push_back(ph.coeff(e));
    }
    return out;
}

PBasisDecomposition decompose(const Elt& h, int r) {
    if (r < 1) throw ParameterOutOfRange("decomposition level must be >= 1");
    const FieldPtr& K = h.field();
    const int m = K->m();
    PBasisDecomposition D;
    D.level = r;
    if (r > 1)
        D.compatibility_parent =
            std::make_shared<PBasisDecomposition>(decompose(h, r - 1));
    if (h.is_zero() || h.indistinguishable_from_zero()) return D;
    (void)int_val(h, "decomposition needs an integral element");
    long pr = 1;
    for (int i = 0; i < r; ++i) pr *= K->p();
    for (const auto& t : gather(h, false)) {
        PBasisTermKey key;
        key.eJ.resize(std::size_t(m));
        // the digit is its own p^r-th power up to the monomial part, which
        // splits as t^{e_J} * (t^q)^{p^r}
        Elt alpha = K->from_int(t.c);
        for (int j = 0; j < m; ++j) {
            long aj = texp_get(t.a, j);
            key.eJ[std::size_t(j)] = int(aj % pr);
            if (aj / pr > 0) alpha *= K->transcendental(j + 1).pow(aj / pr);
        }
        key.n = t.n;
        while (D.terms.count(key)) ++key.nprime;
        D.terms.emplace(key, alpha);
    }
    return D;
}

Elt PBasisDecomposition::reassemble(const FieldPtr& K) const {
    Elt acc = K->zero();
    long pr = 1;
    for (int i = 0; i < level; ++i) pr *= K->p();
    for (const auto& [key, alpha] : terms) {
        Elt t = alpha.pow(pr);
        for (std::size_t j = 0; j < key.eJ.size(); ++j)
            if (key.eJ[j] != 0) t *= K->transcendental(int(j) + 1).pow(key.eJ[j]);
        acc += t * K->pi_pow(key.n);
    }
    return acc;
}

namespace {

// Margin of a residual against pi^c * I, I = p * (d0/pi, d_J)-span: every
// monomial q * d0^k * dJ^beta needs positive deformation degree and
// v(q) + k >= c + v(p).  Terms at or beyond the precision horizon are
// representation noise and are ignored.
std::pair<Valuation, bool> deformation_ideal_margin(const GaussPoly& X, int m,
                                                    const Rat& c, long horizon) {
    Rat beta = X.field()->beta();
    Valuation margin = Valuation::infinity();
    bool ok = true;
    for (const auto& [e, q] : X.terms()) {
        Valuation v = q.val();
        if (v.is_infinite() || v >= Valuation(Rat(horizon))) continue;
        long k = e.empty() ? 0 : e[0];
        long dtot = 0;
        for (int j = 0; j <= m && j < int(e.size()); ++j) dtot += e[j];
        Valuation mg = v + Valuation(Rat(k) - c - beta);
        margin = val_min(margin, mg);
        if (dtot == 0 || mg < Valuation(0)) ok = false;
    }
    return {margin, ok};
}

}  // namespace

ApproxHomReport check_approx_hom(const Elt& h1, const Elt& h2,
                                 const VarTablePtr& vars, int trunc) {
    const FieldPtr& K = h1.field();
    const int m = K->m();
    Rat a1(int_val(h1, "check_approx_hom needs integral inputs"));
    Rat a2(int_val(h2, "check_approx_hom needs integral inputs"));
    GaussPoly P1 = psi(h1, vars, trunc);
    GaussPoly P2 = psi(h2, vars, trunc);
    GaussPoly M = psi(h1 * h2, vars, trunc) - P1 * P2;
    GaussPoly A = psi(h1 + h2, vars, trunc) - P1 - P2;
    long horizon = std::min(h1.aprec(), h2.aprec());
    ApproxHomReport rep;
    std::tie(rep.mult_margin, rep.mult_ok) =
        deformation_ideal_margin(M, m, a1 + a2, horizon);
    std::tie(rep.add_margin, rep.add_ok) =
        deformation_ideal_margin(A, m, rat_min(a1, a2), horizon);
    return rep;
}

bool in_weighted_delta_ideal(const GaussPoly& R, int m, int e, const Rat& x,
                             const Rat& y) {
    for (const auto& [ex, c] : R.terms()) {
        Valuation v = c.val();
        if (v.is_infinite()) continue;
        long k = ex.empty() ? 0 : ex[0];
        long bsum = 0;
        for (int j = 1; j <= m && j < int(ex.size()); ++j) bsum += ex[j];
        long g0 = int(ex.size()) > m + 1 ? ex[std::size_t(m) + 1] : 0;
        Rat w = v.finite() + Rat(Int(g0), Int(e));
        bool via_d0 = k >= 1 && w + Rat(k - 1) >= x;
        bool via_dj = bsum >= 1 && w + Rat(k) >= y;
        if (!via_d0 && !via_dj) return false;
    }
    return true;
}

Rat error_gauge(const std::vector<GaussPoly>& residuals, int m, int e,
                const FieldPtr& K) {
    bool all_zero = true;
    for (const auto& R : residuals) {
        for (const auto& [ex, c] : R.terms()) {
            Valuation v = c.val();
            if (v.is_infinite()) continue;
            all_zero = false;
            long k = ex.empty() ? 0 : ex[0];
            long dtot = 0;
            for (int j = 0; j <= m && j < int(ex.size()); ++j) dtot += ex[j];
            if (dtot == 0)
                throw NotAdmissible("residual term outside the deformation ideal");
            if (v < Valuation(Rat(-k)))
                throw NotAdmissible("residual coefficient too deep in 1/pi");
        }
    }
    const long beta = K->e_abs();
    if (all_zero) return Rat(beta);
    for (long t = e * beta; t >= e; --t) {
        Rat w = Rat(Int(t), Int(e));
        bool ok = in_weighted_delta_ideal(residuals[0], m, e, w, w + Rat(1));
        for (std::size_t j = 1; ok && j < residuals.size(); ++j)
            ok = in_weighted_delta_ideal(residuals[j], m, e, w - Rat(1), w);
        if (ok) return w;
    }
    throw NotAdmissible("no gauge in [1, beta] passes the membership scan");
}

void check_generator_shape(const GaussPoly& pj, int j, long lead_pow, int m,
                           int e) {
    const FieldPtr& K = pj.field();
    const int uj = gen_index(m, j);
    std::vector<int> lead(std::size_t(pj.vars()->size()), 0);
    lead[std::size_t(uj)] = int(lead_pow);
    Elt lc = pj.coeff(lead) - K->one();
    if (!(lc.is_zero() || lc.indistinguishable_from_zero()))
        throw BasisReductionFailure("generator is not monic in its own variable");
    GaussPoly D = pj;
    D.set_coeff(lead, K->zero());
    const Rat tail_bound =
        j == 0 ? Rat(1) + Rat(Int(1), Int(e)) : Rat(Int(1), Int(e));
    for (const auto& [ex, c] : D.terms()) {
        Valuation v = c.val();
        if (v.is_infinite()) continue;
        for (int i = 0; i <= m; ++i)
            if (i < int(ex.size()) && ex[i] != 0)
                throw BasisReductionFailure(
                    "generator involves deformation variables");
        long g0 = int(ex.size()) > m + 1 ? ex[std::size_t(m) + 1] : 0;
        bool u_free = true;
        for (int i = m + 1; i < int(ex.size()); ++i)
            if (ex[i] != 0) u_free = false;
        if (j == 0 && u_free) {
            // the constant slot carries the uniformizer: c = -pi + pi*N^{1/e}
            Valuation vv = (c + K->uniformizer()).val();
            if (!vv.is_infinite() && vv.finite() < tail_bound)
                throw BasisReductionFailure(
                    "uniformizer part of the relation is out of shape");
            continue;
        }
        if (j >= 1) {
            // unit-coefficient lift of the p-basis element: only u_1..u_{j-1}
            bool btilde = true;
            for (int i = m + 1; i < int(ex.size()); ++i) {
                int jj = i - (m + 1);
                if (ex[i] != 0 && (jj == 0 || jj >= j)) btilde = false;
            }
            if (btilde && v == Valuation(0)) continue;
        }
        if (v.finite() + Rat(Int(g0), Int(e)) < tail_bound)
            throw BasisReductionFailure("generator tail escapes the weighted ideal");
    }
}

ThickeningPresentation make_presentation(FieldPtr K, int m, int e,
                                         std::vector<GaussPoly> generators,
                                         std::vector<GaussPoly> residuals,
                                         Rat level) {
    if (generators.empty())
        throw UnsupportedRelationShape("a presentation needs a uniformizer relation");
    check_generator_shape(generators[0], 0, e, m, e);
    for (std::size_t j = 1; j < generators.size(); ++j) {
        long lead = 0;
        const int uj = gen_index(m, int(j));
        for (const auto& [ex, c] : generators[j].terms())
            if (uj < int(ex.size())) lead = std::max(lead, long(ex[std::size_t(uj)]));
        check_generator_shape(generators[j], int(j), lead, m, e);
    }
    ThickeningPresentation P;
    P.K = std::move(K);
    P.m = m;
    P.e = e;
    P.vars = generators[0].vars();
    P.omega = error_gauge(residuals, m, e, P.K);
    P.generators = std::move(generators);
    P.residuals = std::move(residuals);
    P.level = std::move(level);
    return P;
}

GaussPoly relation(const ThickeningPresentation& pres, int j, int trunc) {
    if (j < 0 || j >= int(pres.generators.size()))
        throw ParameterOutOfRange("no such generator");
    GaussPoly rel = psi_poly(pres.generators[std::size_t(j)], pres.m, trunc);
    if (j < int(pres.residuals.size()))
        rel += pres.residuals[std::size_t(j)].truncated(trunc);
    return rel;
}

std::vector<GaussPoly> standard_generators(const FieldPtr& L, const FieldPtr& K,
                                           int m, int trunc) {
    if (L == K || !L->parent() || L->parent().get() != K.get())
        throw UnsupportedRelationShape("expected a single totally ramified step");
    VarTablePtr vars = thickening_vars(m);
    const int e = L->e_rel();
    GaussPoly p0(K, vars, trunc);
    std::vector<int> ex(std::size_t(vars->size()), 0);
    ex[std::size_t(gen_index(m, 0))] = e;
    p0.set_coeff(ex, K->one());
    const auto& tail = L->eisenstein_tail();
    for (int i = 0; i < e; ++i) {
        if (tail[std::size_t(i)].is_zero()) continue;
        ex[std::size_t(gen_index(m, 0))] = i;
        p0.set_coeff(ex, tail[std::size_t(i)]);
    }
    check_generator_shape(p0, 0, e, m, e);
    return {p0};
}

ComponentCount count_components_single_relation(const FPoly& p0,
                                                const FieldPtr& L, const Rat& a,
                                                bool log_space) {
    const int d = p0.degree();
    if (d < 1 || d > 7)
        throw UnsupportedRelationShape("relation degree must be between 1 and 7");
    if (!(a > Rat(0))) throw ParameterOutOfRange("level must be positive");
    RootDiffTable tab = root_difference_table(p0, L);
    const int n = int(tab.roots.size());
    if (n < d) throw DoesNotSplit("the relation does not split over the given field");
    const long eL = L->e_over(p0.field().get());
    const Rat c = Rat(eL) * (log_space ? a + Rat(1) : a);

    // per root, the generic-coefficient equation r + sum_{others} min(r, dist)
    // = c picks the disc radius r (valuations in v_L units)
    std::vector<Rat> rad(std::size_t(n), Rat(0));
    for (int i = 0; i < n; ++i) {
        std::vector<Rat> ds;
        for (int jj = 0; jj < n; ++jj) {
            if (jj == i) continue;
            const Valuation& dv = tab.diff_val[std::size_t(i)][std::size_t(jj)];
            if (dv.is_infinite())
                throw PrecisionTooSmall("roots indistinguishable at precision");
            ds.push_back(dv.finite());
        }
        std::sort(ds.begin(), ds.end());
        for (int t = 0; t < n; ++t) {
            Rat s(0);
            for (int q = 0; q < t; ++q) s += ds[std::size_t(q)];
            Rat r = (c - s) / Rat(n - t);
            if (t > 0 && r < ds[std::size_t(t) - 1]) continue;
            if (t < n - 1 && r > ds[std::size_t(t)]) continue;
            rad[std::size_t(i)] = r;
            break;
        }
    }

    // discs overlap iff the center distance reaches the larger (outer) disc
    std::vector<int> uf(static_cast<std::size_t>(n));
    std::iota(uf.begin(), uf.end(), 0);
    std::function<int(int)> find = [&](int i) {
        return uf[std::size_t(i)] == i ? i : uf[std::size_t(i)] = find(uf[std::size_t(i)]);
    };
    for (int i = 0; i < n; ++i)
        for (int jj = i + 1; jj < n; ++jj) {
            const Valuation& dv = tab.diff_val[std::size_t(i)][std::size_t(jj)];
            if (dv >= Valuation(rat_min(rad[std::size_t(i)], rad[std::size_t(jj)])))
                uf[std::size_t(find(i))] = find(jj);
        }
    std::map<int, Rat> comps;
    for (int i = 0; i < n; ++i) {
        int rt = find(i);
        auto it = comps.find(rt);
        if (it == comps.end())
            comps.emplace(rt, rad[std::size_t(i)]);
        else
            it->second = rat_min(it->second, rad[std::size_t(i)]);
    }
    ComponentCount out;
    out.components = long(comps.size());
    for (const auto& [rt, r] : comps) out.log_radii.push_back(r / Rat(eL));
    std::sort(out.log_radii.begin(), out.log_radii.end());
    return out;
}

}  // namespace ramlab
