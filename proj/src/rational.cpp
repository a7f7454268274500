#include "ramlab/rational.hpp"

namespace ramlab {

Rat simplest_in_interval(const Rat& lo, const Rat& hi) {
    if (lo > hi) throw std::domain_error("simplest_in_interval: empty interval");
    if (lo == hi) return lo;
    if (lo.sign() <= 0 && hi.sign() >= 0) return Rat(0);
    if (hi.sign() < 0) return -simplest_in_interval(-hi, -lo);
    // 0 < lo < hi: if an integer lies in the interval, take the smallest one;
    // otherwise recurse on the reciprocal of the fractional parts.
    Int c = lo.ceil();
    if (Rat(c) <= hi) return Rat(c);
    Int q = lo.floor();
    Rat inner = simplest_in_interval(Rat(1) / (hi - Rat(q)), Rat(1) / (lo - Rat(q)));
    return Rat(q) + Rat(1) / inner;
}

Rat snap_denominator(const Rat& x, const Int& max_den) {
    if (x.den() <= max_den) return x;
    // Continued-fraction convergents of x; keep the last with small denominator,
    // with one semiconvergent refinement step.
    Int a = x.num(), b = x.den();
    Int p0 = 1, q0 = 0, p1 = a / b, q1 = 1;
    if (a < 0 && p1 * b != a) --p1;
    Int r = a - p1 * b;
    a = b; b = r;
    while (b != 0) {
        Int fl = a / b;
        Int p2 = fl * p1 + p0, q2 = fl * q1 + q0;
        if (q2 > max_den) {
            // Best semiconvergent within the bound.
            Int k = (max_den - q0) / q1;
            Int ps = k * p1 + p0, qs = k * q1 + q0;
            Rat cand1(p1, q1), cand2(ps, qs);
            return rat_abs(cand1 - x) <= rat_abs(cand2 - x) ? cand1 : cand2;
        }
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        r = a - fl * b; a = b; b = r;
    }
    return Rat(p1, q1);
}

}  // namespace ramlab
