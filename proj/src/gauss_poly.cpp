#include "ramlab/gauss_poly.hpp"

#include <sstream>

namespace ramlab {

GaussPoly::GaussPoly(FieldPtr F, VarTablePtr vars, int trunc)
    : F_(std::move(F)), vars_(std::move(vars)), trunc_(trunc) {
    if (trunc_ < 0 || trunc_ > kTruncationHardCap)
        throw TruncationOverflow("truncation order " + std::to_string(trunc_) +
                                 " outside [0," + std::to_string(kTruncationHardCap) + "]");
}

GaussPoly GaussPoly::constant(const Elt& c, VarTablePtr vars, int trunc) {
    GaussPoly g(c.field(), std::move(vars), trunc);
    if (!c.is_zero()) g.terms_.emplace(std::vector<int>(g.vars_->size(), 0), c);
    return g;
}

GaussPoly GaussPoly::variable(const FieldPtr& F, const VarTablePtr& vars, int index,
                              int trunc) {
    GaussPoly g(F, vars, trunc);
    if (index < 0 || index >= vars->size()) throw ParseError("variable index out of range");
    if (trunc >= 1) {
        std::vector<int> e(vars->size(), 0);
        e[index] = 1;
        g.terms_.emplace(std::move(e), F->one());
    }
    return g;
}

bool GaussPoly::is_zero() const {
    for (const auto& [e, c] : terms_)
        if (!c.is_zero()) return false;
    return true;
}

void GaussPoly::insert_term(const std::vector<int>& e, const Elt& c) {
    int deg = 0;
    for (int x : e) deg += x;
    if (deg > trunc_) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        if (!c.is_zero()) terms_.emplace(e, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

GaussPoly GaussPoly::operator+(const GaussPoly& o) const {
    if (F_.get() != o.F_.get()) {
        if (o.F_->has_ancestor(F_.get())) return embedded(o.F_) + o;
        if (F_->has_ancestor(o.F_.get())) return *this + o.embedded(F_);
        throw ParseError("polynomials over unrelated fields");
    }
    GaussPoly r = *this;
    r.trunc_ = std::min(trunc_, o.trunc_);
    for (const auto& [e, c] : o.terms_) r.insert_term(e, c);
    // enforce the smaller truncation on existing terms
    std::erase_if(r.terms_, [&](const auto& kv) {
        int deg = 0;
        for (int x : kv.first) deg += x;
        return deg > r.trunc_;
    });
    return r;
}

GaussPoly GaussPoly::operator-() const {
    GaussPoly r = *this;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
}

GaussPoly GaussPoly::operator-(const GaussPoly& o) const { return *this + (-o); }

GaussPoly GaussPoly::operator*(const GaussPoly& o) const {
    if (F_.get() != o.F_.get()) {
        if (o.F_->has_ancestor(F_.get())) return embedded(o.F_) * o;
        if (F_->has_ancestor(o.F_.get())) return *this * o.embedded(F_);
        throw ParseError("polynomials over unrelated fields");
    }
    GaussPoly r(F_, vars_, std::min(trunc_, o.trunc_));
    std::vector<int> e(vars_->size());
    for (const auto& [ea, ca] : terms_) {
        if (ca.is_zero()) continue;
        int da = 0;
        for (int x : ea) da += x;
        for (const auto& [eb, cb] : o.terms_) {
            int db = da;
            for (int x : eb) db += x;
            if (db > r.trunc_) continue;
            if (cb.is_zero()) continue;
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            r.insert_term(e, ca * cb);
        }
    }
    return r;
}

GaussPoly GaussPoly::scale(const Elt& c) const {
    GaussPoly r(F_, vars_, trunc_);
    if (c.is_zero()) return r;
    for (const auto& [e, co] : terms_) {
        Elt x = co * c;
        if (!x.is_zero()) r.terms_.emplace(e, std::move(x));
    }
    if (!r.terms_.empty()) r.F_ = r.terms_.begin()->second.field();
    return r;
}

GaussPoly GaussPoly::pow(long k) const {
    if (k < 0) throw ParseError("negative polynomial power");
    GaussPoly r = constant(F_->one(), vars_, trunc_);
    GaussPoly b = *this;
    while (k > 0) {
        if (k & 1) r = r * b;
        b = b * b;
        k >>= 1;
    }
    return r;
}

GaussPoly GaussPoly::derivative(int i) const {
    GaussPoly r(F_, vars_, trunc_);
    for (const auto& [e, c] : terms_) {
        if (e[i] == 0) continue;
        std::vector<int> ne = e;
        ne[i] -= 1;
        Elt nc = c.mul_int(Int(e[i]));
        if (!nc.is_zero()) r.insert_term(ne, nc);
    }
    return r;
}

GaussPoly GaussPoly::substitute(int i, const GaussPoly& value) const {
    GaussPoly r(F_, vars_, std::min(trunc_, value.trunc_));
    // group by exponent of variable i, then Horner in `value`
    std::map<int, GaussPoly> by_exp;
    for (const auto& [e, c] : terms_) {
        std::vector<int> ne = e;
        int k = ne[i];
        ne[i] = 0;
        auto it = by_exp.find(k);
        if (it == by_exp.end())
            it = by_exp.emplace(k, GaussPoly(F_, vars_, r.trunc_)).first;
        it->second.insert_term(ne, c);
    }
    if (by_exp.empty()) return r;
    int top = by_exp.rbegin()->first;
    for (int k = top; k >= 0; --k) {
        if (k != top) r = r * value;
        auto it = by_exp.find(k);
        if (it != by_exp.end()) r += it->second;
    }
    return r;
}

GaussPoly GaussPoly::substitute(int i, const Elt& value) const {
    return substitute(i, constant(value, vars_, trunc_));
}

GaussPoly GaussPoly::truncated(int new_trunc) const {
    GaussPoly r(F_, vars_, new_trunc);
    for (const auto& [e, c] : terms_) r.insert_term(e, c);
    return r;
}

GaussPoly GaussPoly::embedded(const FieldPtr& L) const {
    GaussPoly r(L, vars_, trunc_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, embed(c, L));
    return r;
}

GaussPoly GaussPoly::map_coeffs(const std::function<Elt(const Elt&)>& f) const {
    GaussPoly r(F_, vars_, trunc_);
    for (const auto& [e, c] : terms_) {
        Elt nc = f(c);
        if (!nc.is_zero()) r.terms_.emplace(e, std::move(nc));
    }
    if (!r.terms_.empty()) r.F_ = r.terms_.begin()->second.field();
    return r;
}

Elt GaussPoly::coeff(const std::vector<int>& exp) const {
    auto it = terms_.find(exp);
    return it == terms_.end() ? F_->zero() : it->second;
}

Elt GaussPoly::constant_term() const { return coeff(std::vector<int>(vars_->size(), 0)); }

void GaussPoly::set_coeff(const std::vector<int>& exp, Elt c) {
    int deg = 0;
    for (int x : exp) deg += x;
    if (deg > trunc_)
        throw TruncationOverflow("coefficient beyond truncation order");
    if (c.is_zero())
        terms_.erase(exp);
    else
        terms_[exp] = std::move(c);
}

int GaussPoly::total_degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) {
        if (c.is_zero()) continue;
        int deg = 0;
        for (int x : e) deg += x;
        d = std::max(d, deg);
    }
    return d;
}

Valuation GaussPoly::gauss_valuation(const WeightVector& w) const {
    Valuation best = Valuation::infinity();
    for (const auto& [e, c] : terms_) {
        Valuation vc = c.val();
        if (vc.is_infinite()) continue;
        Rat add(0);
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            if (i >= w.w.size() || !w.w[i])
                throw MissingWeight("variable " + vars_->name(int(i)) +
                                    " carries no weight");
            add += *w.w[i] * Rat(e[i]);
        }
        best = val_min(best, vc + Valuation(add));
    }
    return best;
}

bool GaussPoly::in_filtration(const WeightVector& w, const Rat& a) const {
    Valuation v = gauss_valuation(w);
    return v.is_infinite() || !(v < Valuation(a));
}

std::string GaussPoly::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.str() << ")";
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            os << "*" << vars_->name(int(i));
            if (e[i] > 1) os << "^" << e[i];
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Expression parsing
// ---------------------------------------------------------------------------

namespace {

struct Parser {
    const std::string& s;
    std::size_t pos = 0;
    const FieldPtr& F;
    const VarTablePtr& vars;
    int trunc;
    const std::function<std::optional<Elt>(const std::string&)>& symbols;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    GaussPoly expr() {
        GaussPoly r = term();
        for (;;) {
            skip();
            if (eat('+')) {
                r += term();
            } else if (eat('-')) {
                r -= term();
            } else {
                return r;
            }
        }
    }

    GaussPoly term() {
        GaussPoly r = factor();
        for (;;) {
            skip();
            if (eat('*'))
                r *= factor();
            else
                return r;
        }
    }

    GaussPoly factor() {
        GaussPoly b = atom();
        skip();
        if (eat('^')) {
            skip();
            std::size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (start == pos) throw ParseError("exponent expected at position " +
                                               std::to_string(pos));
            long k = std::stol(s.substr(start, pos - start));
            return b.pow(k);
        }
        return b;
    }

    GaussPoly atom() {
        skip();
        if (pos >= s.size()) throw ParseError("unexpected end of expression");
        char c = s[pos];
        if (c == '(') {
            ++pos;
            GaussPoly r = expr();
            if (!eat(')')) throw ParseError("missing ')'");
            return r;
        }
        if (c == '-') {
            ++pos;
            return -atom();
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            Int v(s.substr(start, pos - start));
            return GaussPoly::constant(F->from_int(v), vars, trunc);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            std::string name = s.substr(start, pos - start);
            if (vars && vars->has(name))
                return GaussPoly::variable(F, vars, vars->index(name), trunc);
            if (auto e = symbols(name)) return GaussPoly::constant(embed(*e, F), vars, trunc);
            throw ParseError("unknown symbol: " + name);
        }
        throw ParseError(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

GaussPoly parse_poly(const std::string& text, const FieldPtr& F, const VarTablePtr& vars,
                     int trunc,
                     const std::function<std::optional<Elt>(const std::string&)>& symbols) {
    Parser p{text, 0, F, vars, trunc, symbols};
    GaussPoly r = p.expr();
    p.skip();
    if (p.pos != text.size())
        throw ParseError("trailing input at position " + std::to_string(p.pos));
    return r;
}

Elt parse_elt(const std::string& text, const FieldPtr& F,
              const std::function<std::optional<Elt>(const std::string&)>& symbols) {
    auto vars = std::make_shared<VarTable>(std::vector<std::string>{});
    GaussPoly g = parse_poly(text, F, vars, kTruncationHardCap, symbols);
    return g.constant_term();
}

}  // namespace ramlab
