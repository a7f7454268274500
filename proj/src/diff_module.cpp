#include "ramlab/diff_module.hpp"

#include <algorithm>
#include <sstream>

namespace ramlab {

namespace {

std::vector<GaussPoly> mat_mul(const std::vector<GaussPoly>& A,
                               const std::vector<GaussPoly>& B, int d,
                               const GaussPoly& zero) {
    std::vector<GaussPoly> C(std::size_t(d) * d, zero);
    for (int i = 0; i < d; ++i)
        for (int l = 0; l < d; ++l) {
            const GaussPoly& a = A[std::size_t(i) * d + l];
            if (a.is_zero()) continue;
            for (int k = 0; k < d; ++k) {
                const GaussPoly& b = B[std::size_t(l) * d + k];
                if (b.is_zero()) continue;
                C[std::size_t(i) * d + k] += a * b;
            }
        }
    return C;
}

bool poly_below(const GaussPoly& g, const Rat& cutoff) {
    for (const auto& [e, c] : g.terms()) {
        Valuation v = c.val();
        if (!v.is_infinite() && v < Valuation(cutoff)) return false;
    }
    return true;
}

long default_nmax(const DifferentialModule& M) {
    if (M.covering) return std::max(64L, 16L * M.F->p());
    return 8L * std::max(1, M.rank) * M.F->p();
}

long default_snap(const DifferentialModule& M) {
    long p = M.F->p();
    return std::max<long>(4, (p - 1) * M.F->e_abs() * 2);
}

// -------------------------------------------------------------------------
// Exact z-polynomial layer for covering-backed modules.  Elements of
// K[delta][z]/(F) are coefficient lists indexed by z-degree; no delta
// truncation is applied, only weight-band pruning relative to the running
// Gauss minimum (which preserves every term that can influence the measured
// valuations within the band).
// -------------------------------------------------------------------------

using Coef = CoveringData::Coef;
using ZP = std::vector<Coef>;

void coef_add(Coef& a, const std::vector<int>& e, const Elt& c) {
    auto it = a.find(e);
    if (it == a.end())
        a.emplace(e, c);
    else {
        it->second = it->second + c;
        if (it->second.indistinguishable_from_zero()) a.erase(it);
    }
}

Coef coef_mul(const Coef& a, const Coef& b) {
    Coef out;
    std::vector<int> e;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            Elt c = ca * cb;
            if (c.indistinguishable_from_zero()) continue;
            e = ea;
            for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
            coef_add(out, e, c);
        }
    return out;
}

void coef_axpy(Coef& out, const Coef& a, const Coef& b, const Elt& scale,
               bool use_scale) {
    std::vector<int> e;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            Elt c = ca * cb;
            if (use_scale) c = c * scale;
            if (c.indistinguishable_from_zero()) continue;
            e = ea;
            for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
            coef_add(out, e, c);
        }
}

void zp_reduce(ZP& a, const ZP& negT, int d) {
    while (int(a.size()) > d) {
        Coef top = std::move(a.back());
        a.pop_back();
        int base = int(a.size()) - d;
        for (std::size_t j = 0; j < negT.size(); ++j) {
            if (negT[j].empty() || top.empty()) continue;
            Coef prod = coef_mul(top, negT[j]);
            Coef& dst = a[std::size_t(base) + j];
            for (auto& [e, c] : prod) coef_add(dst, e, c);
        }
    }
}

ZP zp_mul(const ZP& a, const ZP& b, const ZP& negT, int d) {
    if (a.empty() || b.empty()) return {};
    ZP out(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].empty()) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (b[j].empty()) continue;
            coef_axpy(out[i + j], a[i], b[j], Elt(), false);
        }
    }
    zp_reduce(out, negT, d);
    return out;
}

ZP zp_sub(ZP a, const ZP& b) {
    if (a.size() < b.size()) a.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        for (const auto& [e, c] : b[i]) coef_add(a[i], e, -c);
    return a;
}

ZP zp_scaled(const ZP& a, const Elt& c) {
    ZP out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (const auto& [e, v] : a[i]) {
            Elt w = v * c;
            if (!w.indistinguishable_from_zero()) out[i].emplace(e, w);
        }
    return out;
}

ZP zp_dz(const ZP& a, const FieldPtr& K) {
    if (a.size() <= 1) return {};
    ZP out(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i) {
        Elt f = K->from_int(long(i));
        for (const auto& [e, c] : a[i]) {
            Elt w = c * f;
            if (!w.indistinguishable_from_zero()) out[i - 1].emplace(e, w);
        }
    }
    return out;
}

ZP zp_ddelta(const ZP& a, int j, const FieldPtr& K) {
    ZP out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (const auto& [e, c] : a[i]) {
            if (e[std::size_t(j)] == 0) continue;
            Elt w = c * K->from_int(e[j]);
            if (w.indistinguishable_from_zero()) continue;
            std::vector<int> e2 = e;
            e2[std::size_t(j)] -= 1;
            coef_add(out[i], e2, w);
        }
    return out;
}

std::optional<Rat> zp_min_weight(const ZP& a, const std::vector<Rat>& s) {
    std::optional<Rat> best;
    for (const Coef& co : a)
        for (const auto& [e, c] : co) {
            Valuation v = c.val();
            if (v.is_infinite()) continue;
            Rat w = v.finite();
            for (std::size_t j = 0; j < e.size(); ++j)
                if (e[j] != 0) w += s[j] * Rat(e[j]);
            if (!best || w < *best) best = w;
        }
    return best;
}

void zp_prune(ZP& a, const std::vector<Rat>& s, const Rat& cutoff) {
    for (Coef& co : a)
        for (auto it = co.begin(); it != co.end();) {
            Valuation v = it->second.val();
            bool drop = v.is_infinite();
            if (!drop) {
                Rat w = v.finite();
                for (std::size_t j = 0; j < it->first.size(); ++j)
                    if (it->first[j] != 0) w += s[j] * Rat(it->first[j]);
                drop = w > cutoff;
            }
            it = drop ? co.erase(it) : ++it;
        }
}

bool zp_empty(const ZP& a) {
    for (const Coef& co : a)
        if (!co.empty()) return false;
    return true;
}

// Shared slope estimator.  The orbit minima follow one of two asymptotic
// shapes: a smooth line (module-dominated) or a line plus the v_p(n!)
// digit-sum staircase (function-part-dominated).  Both a plain and a
// staircase-normalized difference estimator are formed at two baselines and
// the narrowest window wins; all four target the same limit.
long digit_sum(long n, int p) {
    long s = 0;
    for (; n > 0; n /= p) s += n % p;
    return s;
}

SpectralEstimate estimate_from_ws(const std::vector<std::optional<Rat>>& w,
                                  const Rat& ef, int p, long e_abs,
                                  long snap_den) {
    SpectralEstimate est;
    est.ef = ef;
    const int N = int(w.size());
    bool any = false;
    for (const auto& x : w)
        if (x) any = true;
    if (!any || (N > 2 && !w.back() && !w[std::size_t(N) - 2])) {
        est.module_vanishes = true;
        est.slope = ef;
        est.value = ef;
        return est;
    }
    const Rat fcorr(Int(e_abs), Int(p - 1));
    std::optional<Rat> blo, bhi;
    for (int k : {std::max(1, N / 4), std::max(1, N / 2)})
        for (int normalized = 0; normalized < 2; ++normalized) {
            std::optional<Rat> lo, hi;
            for (int n = std::max(k + 1, N - std::max(1, N / 8)); n <= N; ++n) {
                const auto& wn = w[std::size_t(n) - 1];
                const auto& wm = w[std::size_t(n - k) - 1];
                if (!wn || !wm) continue;
                Rat r = (*wn - *wm) / Rat(k);
                if (normalized)
                    r += fcorr * Rat(Int(digit_sum(n, p) - digit_sum(n - k, p)),
                                     Int(k));
                if (!lo || r < *lo) lo = r;
                if (!hi || r > *hi) hi = r;
            }
            if (!lo) continue;
            if (!blo || (*bhi - *blo) > (*hi - *lo)) {
                blo = lo;
                bhi = hi;
            }
        }
    if (!blo) {
        est.module_vanishes = true;
        est.slope = ef;
        est.value = ef;
        return est;
    }
    est.lower = *blo;
    est.upper = *bhi;
    Rat width = est.upper - est.lower;
    Rat gate = rat_max(Rat(Int(1), Int(snap_den)), Rat(Int(1), Int(16)));
    if (width > gate)
        throw NotConverged("spectral window " + est.lower.str() + ".." +
                           est.upper.str() + " too wide at n_max");
    Rat slack(Int(1), Int(2 * snap_den));
    est.slope = simplest_in_interval(est.lower - slack, est.upper + slack);
    est.value = rat_min(est.ef, est.slope);
    return est;
}

// -------------------------------------------------------------------------
// Orbit families.  Along the break-search line the direction weights are
// s_j(t) = base_j + t, so a term of valuation v and delta-exponents e
// contributes the line (v + sum_j e_j base_j) + (sum_j e_j) t.  The orbit
// recurrence itself does not depend on the weight, only the pruning does;
// pruning against the band at the endpoints and midpoint of [t_lo, t_hi]
// lets a single orbit serve every weight the bisection visits.  Per step we
// keep just the cheapest intercept for each delta-degree.
// -------------------------------------------------------------------------

using LineSet = std::map<int, Rat>;  // delta-degree -> min intercept

std::optional<Rat> lines_eval(const LineSet& L, const Rat& t) {
    std::optional<Rat> best;
    for (const auto& [deg, ic] : L) {
        Rat w = ic + Rat(deg) * t;
        if (!best || w < *best) best = w;
    }
    return best;
}

LineSet zp_lines(const ZP& a, const std::vector<Rat>& base) {
    LineSet out;
    for (const Coef& co : a)
        for (const auto& [e, c] : co) {
            Valuation v = c.val();
            if (v.is_infinite()) continue;
            Rat ic = v.finite();
            int deg = 0;
            for (std::size_t j = 0; j < e.size(); ++j)
                if (e[j] != 0) {
                    ic += base[j] * Rat(e[j]);
                    deg += e[j];
                }
            auto it = out.find(deg);
            if (it == out.end())
                out.emplace(deg, ic);
            else if (ic < it->second)
                it->second = ic;
        }
    return out;
}

void zp_prune_family(ZP& a, const std::vector<Rat>& base,
                     const std::vector<Rat>& tpts, const Rat& band) {
    std::vector<std::optional<Rat>> mins(tpts.size());
    auto term_lines = [&](const std::vector<int>& e, const Elt& c,
                          Rat& ic, int& deg) {
        Valuation v = c.val();
        if (v.is_infinite()) return false;
        ic = v.finite();
        deg = 0;
        for (std::size_t j = 0; j < e.size(); ++j)
            if (e[j] != 0) {
                ic += base[j] * Rat(e[j]);
                deg += e[j];
            }
        return true;
    };
    for (const Coef& co : a)
        for (const auto& [e, c] : co) {
            Rat ic;
            int deg;
            if (!term_lines(e, c, ic, deg)) continue;
            for (std::size_t k = 0; k < tpts.size(); ++k) {
                Rat w = ic + Rat(deg) * tpts[k];
                if (!mins[k] || w < *mins[k]) mins[k] = w;
            }
        }
    if (!mins[0]) return;
    for (Coef& co : a)
        for (auto it = co.begin(); it != co.end();) {
            Rat ic;
            int deg;
            bool keep = term_lines(it->first, it->second, ic, deg);
            if (keep) {
                keep = false;
                for (std::size_t k = 0; k < tpts.size(); ++k)
                    if (ic + Rat(deg) * tpts[k] <= *mins[k] + band) {
                        keep = true;
                        break;
                    }
            }
            it = keep ? ++it : co.erase(it);
        }
}

struct OrbitFamily {
    bool flat = false;               // relation does not involve the direction
    std::vector<LineSet> h, W;       // per iterate; w_n(t) = min h - min W
};

OrbitFamily spectral_orbit_family(const DifferentialModule& M, int j,
                                  const std::vector<Rat>& base,
                                  const Rat& t_lo, const Rat& t_hi, int nmax,
                                  Rat B) {
    const CoveringData& cd = *M.covering;
    const FieldPtr& K = M.F;
    const int d = cd.d;
    if (!(B.sign() > 0)) B = Rat(Int(16 + 4 * K->e_abs()));
    const std::vector<Rat> tpts{t_lo, (t_lo + t_hi) / Rat(2), t_hi};

    OrbitFamily fam;
    ZP negT = cd.negT, Dz = cd.Fz, E = cd.Fdelta.at(std::size_t(j));
    if (zp_empty(E)) {
        fam.flat = true;
        return fam;
    }
    ZP P1 = zp_mul(Dz, Dz, negT, d);
    ZP P2 = zp_mul(E, Dz, negT, d);
    ZP P3 = zp_sub(zp_mul(zp_ddelta(Dz, j, K), Dz, negT, d),
                   zp_mul(zp_dz(Dz, K), E, negT, d));
    const Rat wideB = B + B;
    for (ZP* f : {&P1, &P2, &P3}) zp_prune_family(*f, base, tpts, wideB);

    ZP h = zp_scaled(E, -K->one());
    ZP W = Dz;
    for (int n = 1; n <= nmax; ++n) {
        if (zp_empty(h) || zp_empty(W)) {
            if (n == 1) {
                fam.flat = true;
                return fam;
            }
            throw PrecisionTooSmall(
                "spectral orbit lost below working precision");
        }
        fam.h.push_back(zp_lines(h, base));
        fam.W.push_back(zp_lines(W, base));
        if (n == nmax) break;
        ZP next = zp_sub(zp_mul(zp_ddelta(h, j, K), P1, negT, d),
                         zp_mul(zp_dz(h, K), P2, negT, d));
        ZP corr = zp_mul(h, P3, negT, d);
        next = zp_sub(next, zp_scaled(corr, K->from_int(2L * n - 1)));
        h = std::move(next);
        W = zp_mul(W, P1, negT, d);
        zp_prune_family(h, base, tpts, B);
        zp_prune_family(W, base, tpts, B);
    }
    return fam;
}

}  // namespace

VarTablePtr delta_vars(int m) {
    std::vector<std::string> names;
    for (int j = 0; j <= m; ++j) names.push_back("d" + std::to_string(j));
    return std::make_shared<VarTable>(std::move(names));
}

DifferentialModule DifferentialModule::trivial(const FieldPtr& F, int m,
                                               int trunc,
                                               std::vector<Rat> radii) {
    DifferentialModule M;
    M.F = F;
    M.rank = 1;
    M.vars = delta_vars(m);
    M.trunc = trunc;
    if (radii.empty()) radii.assign(std::size_t(m) + 1, Rat(0));
    if (int(radii.size()) != m + 1)
        throw InconsistentDims("trivial: radii size mismatch");
    M.base_radii = std::move(radii);
    M.derivation.assign(std::size_t(m) + 1, {GaussPoly(F, M.vars, trunc)});
    M.basis_labels = {"1"};
    return M;
}

DifferentialModule DifferentialModule::rank_one(
    const FieldPtr& F, std::vector<GaussPoly> n_by_direction,
    std::vector<Rat> radii) {
    if (n_by_direction.empty())
        throw InconsistentDims("rank_one: no directions");
    if (radii.size() != n_by_direction.size())
        throw InconsistentDims("rank_one: radii size mismatch");
    DifferentialModule M;
    M.F = F;
    M.rank = 1;
    M.vars = n_by_direction[0].vars();
    M.trunc = n_by_direction[0].trunc();
    M.base_radii = std::move(radii);
    for (auto& g : n_by_direction) M.derivation.push_back({std::move(g)});
    M.basis_labels = {"1"};
    return M;
}

// ---------------------------------------------------------------------------
// from_covering
// ---------------------------------------------------------------------------

DifferentialModule from_covering(const ThickeningPresentation& pres,
                                 int trunc) {
    if (pres.generators.size() != 1)
        throw UnsupportedRelationShape(
            "only one-generator coverings are supported");
    const FieldPtr& K = pres.K;
    const int m = pres.m;
    const int d = pres.e;
    if (d < 1) throw UnsupportedRelationShape("covering of degree < 1");
    if (trunc < 1 || trunc + d > kTruncationHardCap)
        throw TruncationOverflow("truncation too large for this degree");
    const int wt = trunc + d;  // working truncation including u0-degrees
    const VarTablePtr& pv = pres.vars;
    const int uidx = gen_index(m, 0);

    GaussPoly F = relation(pres, 0, wt);

    // Split off the monic leading term; reject shapes the basis cannot carry.
    GaussPoly negT(K, pv, wt);
    {
        std::vector<int> lead(pv->size(), 0);
        lead[uidx] = d;
        Elt lc = F.coeff(lead) - K->one();
        if (!lc.indistinguishable_from_zero())
            throw UnsupportedRelationShape("relation is not monic");
        for (const auto& [e, c] : F.terms()) {
            for (int j = 1; j <= m; ++j)
                if (e[gen_index(m, j)] != 0)
                    throw UnsupportedRelationShape(
                        "relation involves a secondary generator");
            if (e[uidx] > d ||
                (e[uidx] == d &&
                 !(e == lead || c.indistinguishable_from_zero())))
                throw UnsupportedRelationShape(
                    "relation exceeds the generator degree");
            if (e == lead) continue;
            negT.set_coeff(e, -c);
        }
    }

    // Seed for the inverse of F_z: invert the derivative at the root of the
    // delta = 0 fibre, expanded in the power basis of the adjoined field.
    FPoly p0b;
    {
        std::vector<Elt> cs(std::size_t(d) + 1, K->zero());
        for (const auto& [e, c] : F.terms()) {
            bool delta_free = true;
            for (int j = 0; j <= m; ++j)
                if (e[j] != 0) delta_free = false;
            if (delta_free) cs[std::size_t(e[uidx])] = cs[e[uidx]] + c;
        }
        p0b = FPoly(K, std::move(cs));
    }
    std::vector<Elt> tail(p0b.coeffs().begin(), p0b.coeffs().begin() + d);
    FieldPtr L = adjoin_root(K, tail);
    Elt piL = L->uniformizer();
    Elt g0 = p0b.derivative().eval(piL);
    if (g0.indistinguishable_from_zero())
        throw JacobianSingular("derivative vanishes at the root");
    Elt cinv = g0.inv();
    long t = 0;
    {
        Valuation v = cinv.val();
        if (!v.is_infinite() && v < Valuation(0)) {
            long num = -(long)v.finite().num().convert_to<long>();
            t = (num + d - 1) / d;
        }
    }
    Elt cu = (cinv * embed(K->pi_pow(t), L)).canonical();

    DifferentialModule M;
    M.F = K;
    M.rank = d;
    M.vars = delta_vars(m);
    M.trunc = trunc;
    M.base_radii.assign(std::size_t(m) + 1, pres.level);
    for (int k = 0; k < d; ++k) {
        std::ostringstream os;
        if (k == 0)
            os << "1";
        else if (k == 1)
            os << "z";
        else
            os << "z^" << k;
        M.basis_labels.push_back(os.str());
    }

    // Exact relation data for the orbit-based spectral routines.
    {
        auto cd = std::make_shared<CoveringData>();
        cd->d = d;
        cd->m = m;
        auto to_zp = [&](const GaussPoly& g, int zcap) {
            std::vector<CoveringData::Coef> out(std::size_t(zcap) + 1);
            for (const auto& [e, c] : g.terms()) {
                if (c.indistinguishable_from_zero()) continue;
                int zdeg = e[uidx];
                if (zdeg > zcap)
                    throw UnsupportedRelationShape("reduction failed");
                std::vector<int> de(std::size_t(m) + 1);
                for (int jj = 0; jj <= m; ++jj) de[jj] = e[jj];
                out[std::size_t(zdeg)].emplace(std::move(de), c);
            }
            while (!out.empty() && out.back().empty()) out.pop_back();
            return out;
        };
        cd->negT = to_zp(negT, d - 1);
        cd->Fz = to_zp(F.derivative(uidx), std::max(0, d - 1));
        for (int j = 0; j <= m; ++j)
            cd->Fdelta.push_back(to_zp(F.derivative(j), d - 1));
        M.covering = std::move(cd);
    }

    // Series inverse of F_z modulo F and (delta)^{trunc+1}; this quotient is a
    // genuine ring, so the delta-adic Newton iteration is exact in it.
    const CoveringData& cd = *M.covering;
    auto ddeg_of = [&](const std::vector<int>& e) {
        int tot = 0;
        for (int v : e) tot += v;
        return tot;
    };
    auto dtrunc = [&](ZP a) {
        for (Coef& co : a)
            for (auto it = co.begin(); it != co.end();)
                it = ddeg_of(it->first) > trunc ? co.erase(it) : ++it;
        return a;
    };
    auto zp_plus = [&](ZP a, const ZP& b) {
        if (a.size() < b.size()) a.resize(b.size());
        for (std::size_t i = 0; i < b.size(); ++i)
            for (const auto& [e, c] : b[i]) coef_add(a[i], e, c);
        return a;
    };
    ZP one_zp(1);
    const std::vector<int> zero_exp(std::size_t(m) + 1, 0);
    one_zp[0].emplace(zero_exp, K->one());
    ZP X;
    X.resize(std::size_t(d));
    for (std::size_t i = 0; i < cu.digits().size() && int(i) < d; ++i) {
        Elt coef = cu.digits()[i] * K->pi_pow(-t);
        if (coef.indistinguishable_from_zero()) continue;
        X[i].emplace(zero_exp, coef);
    }
    const Rat prec_cut(Int(K->pprec()) * K->e_abs() / 2);
    auto small = [&](const ZP& a) {
        for (const Coef& co : a)
            for (const auto& [e, c] : co) {
                Valuation v = c.val();
                if (!v.is_infinite() && v < Valuation(prec_cut)) return false;
            }
        return true;
    };
    int iters = 1;
    while ((1 << iters) <= trunc + 1) ++iters;
    iters += 2;
    for (int it = 0; it < iters; ++it) {
        ZP E = dtrunc(zp_sub(one_zp, zp_mul(cd.Fz, X, cd.negT, d)));
        if (small(E)) break;
        X = dtrunc(zp_mul(X, zp_plus(one_zp, E), cd.negT, d));
    }
    if (!small(dtrunc(zp_sub(one_zp, zp_mul(cd.Fz, X, cd.negT, d)))))
        throw JacobianSingular("relation derivative is not invertible");

    GaussPoly mzero(K, M.vars, trunc);
    for (int j = 0; j <= m; ++j) {
        std::vector<GaussPoly> N(std::size_t(d) * d, mzero);
        ZP G = dtrunc(zp_mul(zp_scaled(cd.Fdelta[std::size_t(j)], -K->one()),
                             X, cd.negT, d));
        ZP P = G;  // z^{k-1} G mod F
        for (int k = 1; k < d; ++k) {
            Elt kf = K->from_int(k);
            for (int i = 0; i < int(P.size()); ++i) {
                if (i >= d) throw UnsupportedRelationShape("reduction failed");
                for (const auto& [e, c] : P[std::size_t(i)]) {
                    Elt w = c * kf;
                    if (w.indistinguishable_from_zero()) continue;
                    GaussPoly& entry = N[std::size_t(i) * d + k];
                    entry.set_coeff(e, entry.coeff(e) + w);
                }
            }
            if (k + 1 < d) {
                ZP shifted(P.size() + 1);
                for (std::size_t i = 0; i < P.size(); ++i)
                    shifted[i + 1] = std::move(P[i]);
                zp_reduce(shifted, cd.negT, d);
                P = dtrunc(std::move(shifted));
            }
        }
        M.derivation.push_back(std::move(N));
    }
    return M;
}

bool integrable(const DifferentialModule& M, const Rat& cutoff) {
    const int d = M.rank;
    GaussPoly zero(M.F, M.vars, M.trunc);
    for (int a = 0; a < M.directions(); ++a)
        for (int b = a + 1; b < M.directions(); ++b) {
            std::vector<GaussPoly> C =
                mat_mul(M.derivation[a], M.derivation[b], d, zero);
            std::vector<GaussPoly> D =
                mat_mul(M.derivation[b], M.derivation[a], d, zero);
            for (int i = 0; i < d * d; ++i) {
                GaussPoly r = M.derivation[b][i].derivative(a) -
                              M.derivation[a][i].derivative(b) + C[i] - D[i];
                if (!poly_below(r, cutoff)) return false;
            }
        }
    return true;
}

// ---------------------------------------------------------------------------
// Spectral estimation
// ---------------------------------------------------------------------------

SpectralProfile spectral_profile(const DifferentialModule& M, int j,
                                 int nmax) {
    if (j < 0 || j >= M.directions())
        throw ParameterOutOfRange("spectral_profile: no such direction");
    if (nmax <= 0) nmax = int(default_nmax(M));
    SpectralProfile prof;
    prof.direction = j;
    prof.nmax = nmax;
    const int d = M.rank;
    GaussPoly zero(M.F, M.vars, M.trunc);
    const std::vector<GaussPoly>& N = M.derivation[j];
    std::vector<GaussPoly> D = N;
    for (int n = 1; n <= nmax; ++n) {
        std::map<std::vector<int>, Rat> env;
        for (const GaussPoly& g : D)
            for (const auto& [e, c] : g.terms()) {
                Valuation v = c.val();
                if (v.is_infinite()) continue;
                auto it = env.find(e);
                if (it == env.end())
                    env.emplace(e, v.finite());
                else if (v.finite() < it->second)
                    it->second = v.finite();
            }
        prof.terms.push_back(std::move(env));
        if (n == nmax) break;
        std::vector<GaussPoly> ND = mat_mul(N, D, d, zero);
        for (int i = 0; i < d * d; ++i) D[i] = D[i].derivative(j) + ND[i];
    }
    return prof;
}

SpectralEstimate spectral_valuation(const SpectralProfile& prof,
                                    const DifferentialModule& M,
                                    const std::vector<Rat>& s, long snap_den) {
    if (int(s.size()) < M.directions())
        throw InconsistentDims("spectral_valuation: weight vector too short");
    if (snap_den <= 0) snap_den = default_snap(M);
    const int p = M.F->p();
    SpectralEstimate est;
    est.ef = Rat(Int(M.F->e_abs()), Int(p - 1)) - s[prof.direction];

    const int N = int(prof.terms.size());
    auto wval = [&](int n) -> std::optional<Rat> {  // n is 1-based
        const auto& env = prof.terms[std::size_t(n) - 1];
        std::optional<Rat> best;
        for (const auto& [e, v] : env) {
            Rat w = v;
            for (std::size_t j = 0; j < e.size(); ++j)
                if (e[j] != 0) w += s[j] * Rat(e[j]);
            if (!best || w < *best) best = w;
        }
        return best;
    };

    std::vector<std::optional<Rat>> ws;
    for (int n = 1; n <= N; ++n) ws.push_back(wval(n));
    SpectralEstimate out =
        estimate_from_ws(ws, est.ef, p, M.F->e_abs(), snap_den);
    return out;
}

std::vector<std::optional<Rat>> spectral_orbit(const DifferentialModule& M,
                                               int j, const std::vector<Rat>& s,
                                               int nmax, const Rat& band) {
    if (!M.covering)
        throw ParameterOutOfRange("spectral_orbit needs a covering module");
    if (j < 0 || j >= M.directions())
        throw ParameterOutOfRange("spectral_orbit: no such direction");
    if (int(s.size()) < M.directions())
        throw InconsistentDims("spectral_orbit: weight vector too short");
    if (nmax <= 0) nmax = int(default_nmax(M));
    Rat B = band;
    if (!(B.sign() > 0)) B = Rat(Int(16 + 4 * M.F->e_abs()));
    const CoveringData& cd = *M.covering;
    const FieldPtr& K = M.F;
    const int d = cd.d;

    ZP negT = cd.negT, Dz = cd.Fz, E = cd.Fdelta.at(std::size_t(j));
    std::vector<std::optional<Rat>> out;
    if (zp_empty(E)) {  // the relation does not involve this direction
        out.assign(std::size_t(nmax), std::nullopt);
        return out;
    }
    // fixed multipliers of the orbit recurrence
    ZP P1 = zp_mul(Dz, Dz, negT, d);                        // F_z^2
    ZP P2 = zp_mul(E, Dz, negT, d);                         // F_delta F_z
    ZP P3 = zp_sub(zp_mul(zp_ddelta(Dz, j, K), Dz, negT, d),
                   zp_mul(zp_dz(Dz, K), E, negT, d));       // d/dn of denom
    const Rat wideB = B + B;
    for (ZP* f : {&P1, &P2, &P3}) {
        auto mv = zp_min_weight(*f, s);
        if (mv) zp_prune(*f, s, *mv + wideB);
    }

    ZP h = zp_scaled(E, -K->one());  // h_1: d z/d delta_j = h_1 / F_z
    ZP W = Dz;                       // F_z^{2n-1}
    for (int n = 1; n <= nmax; ++n) {
        auto wh = zp_min_weight(h, s);
        auto wW = zp_min_weight(W, s);
        if (!wh || !wW) {
            if (n == 1) {
                out.assign(std::size_t(nmax), std::nullopt);
                return out;
            }
            throw PrecisionTooSmall(
                "spectral orbit lost below working precision");
        }
        out.push_back(*wh - *wW);
        if (n == nmax) break;
        ZP next = zp_sub(zp_mul(zp_ddelta(h, j, K), P1, negT, d),
                         zp_mul(zp_dz(h, K), P2, negT, d));
        ZP corr = zp_mul(h, P3, negT, d);
        next = zp_sub(next, zp_scaled(corr, K->from_int(2L * n - 1)));
        h = std::move(next);
        W = zp_mul(W, P1, negT, d);
        if (auto mv = zp_min_weight(h, s)) zp_prune(h, s, *mv + B);
        if (auto mv = zp_min_weight(W, s)) zp_prune(W, s, *mv + B);
    }
    return out;
}

SpectralEstimate spectral_valuation(const DifferentialModule& M, int j,
                                    const std::vector<Rat>& s, int nmax,
                                    long snap_den) {
    if (M.covering) {
        if (snap_den <= 0) snap_den = default_snap(M);
        Rat ef = Rat(Int(M.F->e_abs()), Int(M.F->p() - 1)) - s.at(std::size_t(j));
        auto ws = spectral_orbit(M, j, s, nmax);
        SpectralEstimate est =
            estimate_from_ws(ws, ef, M.F->p(), M.F->e_abs(), snap_den);
        return est;
    }
    return spectral_valuation(spectral_profile(M, j, nmax), M, s, snap_den);
}

RadiusReport radius_report(const DifferentialModule& M,
                           const std::vector<Rat>& s, int nmax,
                           long snap_den) {
    RadiusReport rep;
    rep.weights = s;
    rep.ir_exponent = Rat(0);
    for (int j = 0; j < M.directions(); ++j) {
        SpectralEstimate est = spectral_valuation(M, j, s, nmax, snap_den);
        rep.ir_exponent = rat_max(rep.ir_exponent, est.ef - est.value);
        rep.per_direction.push_back(std::move(est));
    }
    rep.ir_exponent_normalized = rep.ir_exponent / Rat(M.F->e_abs());
    return rep;
}

Rat break_search(const DifferentialModule& M, BreakMode mode, const Rat& lo0,
                 const Rat& hi0, int nmax, long snap_den) {
    if (!(lo0 < hi0)) throw ParameterOutOfRange("break_search: empty range");
    if (snap_den <= 0)
        snap_den = std::max<long>(8, long(M.rank) * M.F->p() * M.F->p());
    std::vector<Rat> base(std::size_t(M.directions()), Rat(0));
    if (mode == BreakMode::Log) base[0] = Rat(1);
    std::vector<SpectralProfile> profs;
    std::vector<OrbitFamily> fams;
    if (M.covering) {
        int nm = nmax > 0 ? nmax : int(default_nmax(M));
        for (int j = 0; j < M.directions(); ++j)
            fams.push_back(
                spectral_orbit_family(M, j, base, lo0, hi0, nm, Rat(0)));
    } else {
        for (int j = 0; j < M.directions(); ++j)
            profs.push_back(spectral_profile(M, j, nmax));
    }
    auto ir_trivial = [&](const Rat& t) {
        std::vector<Rat> w(std::size_t(M.directions()), t);
        if (mode == BreakMode::Log) w[0] = t + Rat(1);
        for (int j = 0; j < M.directions(); ++j) {
            SpectralEstimate est;
            if (M.covering) {
                const OrbitFamily& fam = fams[std::size_t(j)];
                Rat ef = Rat(Int(M.F->e_abs()), Int(M.F->p() - 1)) - w[std::size_t(j)];
                std::vector<std::optional<Rat>> ws;
                if (!fam.flat)
                    for (std::size_t n = 0; n < fam.h.size(); ++n) {
                        auto a = lines_eval(fam.h[n], t);
                        auto b = lines_eval(fam.W[n], t);
                        ws.push_back(a && b ? std::optional<Rat>(*a - *b)
                                            : std::nullopt);
                    }
                est = estimate_from_ws(ws, ef, M.F->p(), M.F->e_abs(),
                                       snap_den);
            } else {
                est = spectral_valuation(profs[j], M, w, snap_den);
            }
            if (est.value < est.ef) return false;
        }
        return true;
    };
    Rat lo = lo0, hi = hi0;
    if (ir_trivial(lo) || !ir_trivial(hi))
        throw NoThresholdInRange("no radius-one threshold in [" + lo0.str() +
                                 ", " + hi0.str() + "]");
    const Rat stop(Int(1), Int(256));
    while (hi - lo > stop) {
        Rat mid = simplest_in_interval(lo, hi);
        if (!(mid > lo && mid < hi)) mid = (lo + hi) / Rat(2);
        if (!(mid > lo && mid < hi)) break;
        if (ir_trivial(mid))
            hi = mid;
        else
            lo = mid;
    }
    Rat b = simplest_in_interval(lo, hi);
    if (b == lo)  // the threshold is strictly above the failing endpoint
        b = simplest_in_interval(lo + (hi - lo) / Rat(1000), hi);
    if (b.den() > Int(snap_den))
        throw NotConverged("break denominator exceeds the snap bound");
    return b;
}

// ---------------------------------------------------------------------------
// Pullbacks
// ---------------------------------------------------------------------------

DifferentialModule pullback(const DifferentialModule& M, const FieldPtr& F2,
                            const VarTablePtr& new_vars,
                            const std::vector<GaussPoly>& subs,
                            std::vector<Rat> new_radii,
                            const std::function<Elt(const Elt&)>& coeff_map) {
    const int old_dirs = M.directions();
    if (int(subs.size()) != old_dirs)
        throw InconsistentDims("pullback: one substitution per direction");
    const int new_dirs = new_vars->size();
    if (int(new_radii.size()) != new_dirs)
        throw InconsistentDims("pullback: radii size mismatch");
    const int trunc = M.trunc;
    GaussPoly zero(F2, new_vars, trunc);

    // power caches for the substituted directions
    std::vector<std::vector<GaussPoly>> pows(subs.size());
    for (std::size_t j = 0; j < subs.size(); ++j) {
        pows[j].push_back(GaussPoly::constant(F2->one(), new_vars, trunc));
        for (int k = 1; k <= trunc; ++k)
            pows[j].push_back(pows[j].back() * subs[j]);
    }
    auto comp = [&](const GaussPoly& P) {
        GaussPoly out = zero;
        for (const auto& [e, c] : P.terms()) {
            GaussPoly t = GaussPoly::constant(coeff_map(c), new_vars, trunc);
            for (int j = 0; j < old_dirs; ++j)
                if (e[j] != 0) t *= pows[j][std::size_t(e[j])];
            out += t;
        }
        return out;
    };

    const int d = M.rank;
    std::vector<std::vector<GaussPoly>> compN;
    for (int j = 0; j < old_dirs; ++j) {
        std::vector<GaussPoly> Nj(std::size_t(d) * d, zero);
        for (int i = 0; i < d * d; ++i)
            if (!M.derivation[j][i].is_zero()) Nj[i] = comp(M.derivation[j][i]);
        compN.push_back(std::move(Nj));
    }

    DifferentialModule R;
    R.F = F2;
    R.rank = d;
    R.vars = new_vars;
    R.trunc = trunc;
    R.base_radii = std::move(new_radii);
    R.basis_labels = M.basis_labels;
    for (int i = 0; i < new_dirs; ++i) {
        std::vector<GaussPoly> Ni(std::size_t(d) * d, zero);
        for (int j = 0; j < old_dirs; ++j) {
            GaussPoly f = subs[j].derivative(i);
            if (f.is_zero()) continue;
            for (int q = 0; q < d * d; ++q)
                if (!compN[j][q].is_zero()) Ni[q] += f * compN[j][q];
        }
        R.derivation.push_back(std::move(Ni));
    }
    return R;
}

namespace {

std::vector<GaussPoly> identity_subs(const DifferentialModule& M,
                                     const FieldPtr& F2,
                                     const VarTablePtr& vars) {
    std::vector<GaussPoly> subs;
    for (int j = 0; j < M.directions(); ++j)
        subs.push_back(GaussPoly::variable(F2, vars, j, M.trunc));
    return subs;
}

}  // namespace

DifferentialModule pullback_tame(const DifferentialModule& M, int n,
                                 const Elt& x0_root) {
    const int p = M.F->p();
    if (n < 1 || n % p == 0)
        throw ParameterOutOfRange("tame pullback degree must be prime to p");
    FieldPtr F2 = x0_root.field();
    if (!F2 || !F2->has_ancestor(M.F.get()))
        throw ParameterOutOfRange("tame centre must live over the module field");
    const Rat eq(Int(F2->e_over(M.F.get())));
    Valuation vr = x0_root.val();
    if (vr.is_infinite())
        throw ParameterOutOfRange("tame centre must be nonzero");
    const Rat b = Rat(n) * vr.finite() / eq;  // v-units of M.F
    const Rat a = M.base_radii.at(0);
    if (!(b < a))
        throw ParameterOutOfRange("tame centre lies inside the disc");

    std::vector<GaussPoly> subs = identity_subs(M, F2, M.vars);
    GaussPoly root = GaussPoly::constant(x0_root, M.vars, M.trunc) +
                     GaussPoly::variable(F2, M.vars, 0, M.trunc);
    subs[0] = root.pow(n) -
              GaussPoly::constant(x0_root.pow(n), M.vars, M.trunc);

    std::vector<Rat> radii;
    radii.push_back(eq * (a - b * Rat(Int(n - 1), Int(n))));
    for (std::size_t j = 1; j < M.base_radii.size(); ++j)
        radii.push_back(eq * M.base_radii[j]);
    return pullback(M, F2, M.vars, subs, std::move(radii),
                    [&](const Elt& c) { return embed(c, F2); });
}

DifferentialModule pullback_frobenius(const DifferentialModule& M,
                                      const Elt& beta, const Rat& b) {
    const int p = M.F->p();
    FieldPtr F2 = beta.field();
    if (!F2 || !F2->has_ancestor(M.F.get()))
        throw ParameterOutOfRange("centre must live over the module field");
    if (beta.val() != Valuation(0))
        throw ParameterOutOfRange("Frobenius centre must be a unit");
    const Rat eq(Int(F2->e_over(M.F.get())));
    const Rat a = M.base_radii.at(0);
    const Rat betaF(Int(M.F->e_abs()));
    if (!(b.sign() > 0) || !(b > a - betaF) || !(Rat(p) * b > a))
        throw ParameterOutOfRange("radius outside the Frobenius range");

    std::vector<GaussPoly> subs = identity_subs(M, F2, M.vars);
    GaussPoly cen = GaussPoly::constant(beta, M.vars, M.trunc) +
                    GaussPoly::variable(F2, M.vars, 0, M.trunc);
    subs[0] =
        cen.pow(p) - GaussPoly::constant(beta.pow(p), M.vars, M.trunc);

    std::vector<Rat> radii;
    radii.push_back(eq * b);
    for (std::size_t j = 1; j < M.base_radii.size(); ++j)
        radii.push_back(eq * M.base_radii[j]);
    return pullback(M, F2, M.vars, subs, std::move(radii),
                    [&](const Elt& c) { return embed(c, F2); });
}

DifferentialModule pullback_kstar(const DifferentialModule& M,
                                  const Elt& varpi) {
    const int p = M.F->p();
    FieldPtr F2 = varpi.field();
    if (!F2 || !F2->has_ancestor(M.F.get()) || F2->e_over(M.F.get()) != p)
        throw ParameterOutOfRange("rotation centre must be a degree-p root");
    Elt piK = embed(M.F->uniformizer(), F2);
    Elt resid = varpi.pow(p) + piK * varpi.pow(p - 1) - piK;
    if (!resid.indistinguishable_from_zero() &&
        !(resid.val() >= Valuation(Rat(Int(varpi.aprec()), Int(2)))))
        throw ParameterOutOfRange("centre does not satisfy z^p + pi z^{p-1} = pi");
    const Rat a1 = M.base_radii.at(0);  // = a + 1
    if (!(a1 > Rat(2)))
        throw ParameterOutOfRange("rotation requires direction-0 radius > 2");

    const int trunc = M.trunc;
    GaussPoly cen = GaussPoly::constant(varpi, M.vars, trunc) +
                    GaussPoly::variable(F2, M.vars, 0, trunc);
    GaussPoly A = cen.pow(p);
    GaussPoly one = GaussPoly::constant(F2->one(), M.vars, trunc);
    GaussPoly B = one - cen.pow(p - 1);
    Elt seed = (F2->one() - varpi.pow(p - 1)).inv();
    GaussPoly Binv = GaussPoly::constant(seed, M.vars, trunc);
    int iters = 1;
    while ((1 << iters) <= trunc) ++iters;
    ++iters;
    for (int it = 0; it < iters; ++it)
        Binv = Binv * (one + (one - B * Binv));
    GaussPoly S = A * Binv - GaussPoly::constant(piK, M.vars, trunc);
    const Rat cut(Int(F2->pprec()) * F2->e_abs() / 2);
    if (!poly_below(GaussPoly::constant(S.constant_term(), M.vars, trunc), cut))
        throw PrecisionTooSmall("rotation substitution is not centred");

    std::vector<GaussPoly> subs = identity_subs(M, F2, M.vars);
    subs[0] = S;
    std::vector<Rat> radii;
    radii.push_back(Rat(p) * a1 - Rat(2 * p - 2));
    for (std::size_t j = 1; j < M.base_radii.size(); ++j)
        radii.push_back(Rat(p) * (a1 - Rat(1)) - Rat(p - 1));
    return pullback(M, F2, M.vars, subs, std::move(radii),
                    [&](const Elt& c) { return embed(c, F2); });
}

DifferentialModule pullback_generic_pth_root(const DifferentialModule& M,
                                             int j0, int n) {
    const int p = M.F->p();
    const int m = M.directions() - 1;
    if (j0 < 1 || j0 > m)
        throw ParameterOutOfRange("direction must name a p-basis element");
    if (n < 1 || n % p == 0)
        throw ParameterOutOfRange("twist degree must be prime to p");
    const int mb = M.F->m();
    if (mb + 2 > 4)
        throw UnsupportedRelationShape("no room for two fresh transcendentals");
    FieldPtr F2 = widen_transcendentals(M.F, 2);
    VarTablePtr nv = delta_vars(m + 1);
    const int trunc = M.trunc;

    Elt xt = F2->transcendental(mb + 1);
    Elt bt = F2->transcendental(mb + 2);
    Elt pi2 = F2->uniformizer();

    // binomial part: sum_{k=1}^p C(p,k) beta^{p-k} eta_{j0}^k
    GaussPoly S(F2, nv, trunc);
    {
        Int binom = 1;
        for (int k = 1; k <= p; ++k) {
            binom = binom * (p - k + 1) / k;
            Elt coef = bt.pow(p - k).mul_int(binom);
            GaussPoly mono =
                GaussPoly::variable(F2, nv, j0, trunc).pow(k).scale(coef);
            S += mono;
        }
    }
    // twist part: (x + eta_{m+1})(pi + eta_0)^n - x pi^n
    GaussPoly twist =
        (GaussPoly::constant(xt, nv, trunc) +
         GaussPoly::variable(F2, nv, m + 1, trunc)) *
            (GaussPoly::constant(pi2, nv, trunc) +
             GaussPoly::variable(F2, nv, 0, trunc))
                .pow(n) -
        GaussPoly::constant(xt * pi2.pow(n), nv, trunc);
    S -= twist;

    std::vector<GaussPoly> subs;
    for (int j = 0; j <= m; ++j)
        subs.push_back(j == j0 ? S : GaussPoly::variable(F2, nv, j, trunc));

    std::vector<Rat> radii = M.base_radii;
    radii.push_back(M.base_radii.at(std::size_t(j0)));
    return pullback(M, F2, nv, subs, std::move(radii),
                    [&](const Elt& c) { return transport(c, F2); });
}

// ---------------------------------------------------------------------------
// p-th power radius bound
// ---------------------------------------------------------------------------

PthPowerCheck pth_power_radius_check(const Elt& b, const Elt& T) {
    if (!b.field() || b.field().get() != T.field().get())
        throw InconsistentDims("operands must share a field");
    const int p = b.field()->p();
    PthPowerCheck chk;
    chk.lhs = (b.pow(p) - T.pow(p)).val();
    Valuation dv = (b - T).val();
    Valuation branch1 = dv * Rat(p);
    Valuation branch2 =
        Valuation(Rat(Int(b.field()->e_abs()))) + dv + b.val() * Rat(p - 1);
    chk.bound = val_min(branch1, branch2);
    chk.ok = chk.lhs >= chk.bound;
    chk.tight = branch1 != branch2 && chk.lhs == chk.bound;
    return chk;
}

}  // namespace ramlab
