#pragma once

#include <functional>
#include <map>
#include <vector>

#include "ramlab/local_field.hpp"

namespace ramlab {

// Shared list of variable names for a polynomial ring.
class VarTable {
public:
    explicit VarTable(std::vector<std::string> names) : names_(std::move(names)) {}
    int size() const { return int(names_.size()); }
    const std::string& name(int i) const { return names_.at(i); }
    int index(const std::string& n) const {
        for (int i = 0; i < size(); ++i)
            if (names_[i] == n) return i;
        throw ParseError("unknown variable: " + n);
    }
    bool has(const std::string& n) const {
        for (const auto& s : names_)
            if (s == n) return true;
        return false;
    }

private:
    std::vector<std::string> names_;
};

using VarTablePtr = std::shared_ptr<const VarTable>;

// Weight assignment for a Gauss valuation: weights[i] is the valuation of
// variable i, in the same units as coefficient valuations.  A variable may be
// left unweighted; using it then raises MissingWeight.
struct WeightVector {
    std::vector<std::optional<Rat>> w;
    static WeightVector zero(int n) {
        WeightVector v;
        v.w.assign(n, Rat(0));
        return v;
    }
    WeightVector& set(int i, Rat r) {
        if (int(w.size()) <= i) w.resize(i + 1);
        w[i] = std::move(r);
        return *this;
    }
};

constexpr int kTruncationHardCap = 64;

// Sparse multivariate polynomial over a local field, truncated by total
// degree.  Terms of total degree > trunc are dropped by every operation, so
// objects model the quotient by the (vars)^{trunc+1} ideal.
class GaussPoly {
public:
    GaussPoly() = default;
    GaussPoly(FieldPtr F, VarTablePtr vars, int trunc = 24);

    static GaussPoly constant(const Elt& c, VarTablePtr vars, int trunc = 24);
    static GaussPoly variable(const FieldPtr& F, const VarTablePtr& vars,
                              int index, int trunc = 24);

    const FieldPtr& field() const { return F_; }
    const VarTablePtr& vars() const { return vars_; }
    int trunc() const { return trunc_; }
    bool is_zero() const;  // all coefficients exactly zero

    GaussPoly operator+(const GaussPoly& o) const;
    GaussPoly operator-(const GaussPoly& o) const;
    GaussPoly operator-() const;
    GaussPoly operator*(const GaussPoly& o) const;
    GaussPoly& operator+=(const GaussPoly& o) { return *this = *this + o; }
    GaussPoly& operator-=(const GaussPoly& o) { return *this = *this - o; }
    GaussPoly& operator*=(const GaussPoly& o) { return *this = *this * o; }
    GaussPoly scale(const Elt& c) const;
    GaussPoly pow(long k) const;

    // Formal partial derivative with respect to variable i.
    GaussPoly derivative(int i) const;

    // Substitute polynomial `value` for variable i (same ring).
    GaussPoly substitute(int i, const GaussPoly& value) const;
    // Evaluate variable i at a field element.
    GaussPoly substitute(int i, const Elt& value) const;

    GaussPoly truncated(int new_trunc) const;
    // Coefficients embedded into a larger field of the same tower, keeping the
    // variable set.
    GaussPoly embedded(const FieldPtr& L) const;
    // Apply f to every coefficient.
    GaussPoly map_coeffs(const std::function<Elt(const Elt&)>& f) const;

    Elt coeff(const std::vector<int>& exp) const;  // zero if absent
    Elt constant_term() const;
    void set_coeff(const std::vector<int>& exp, Elt c);
    const std::map<std::vector<int>, Elt>& terms() const { return terms_; }
    int total_degree() const;  // -1 for zero

    // Gauss valuation min_terms { v(coef) + sum e_i w_i }, valuations in
    // v_F units of the coefficient field.  Infinite for (effective) zero.
    Valuation gauss_valuation(const WeightVector& w) const;
    // Membership of every term in the weighted ideal of level a:
    // v(coef) + sum e_i w_i >= a, i.e. gauss_valuation >= a.
    bool in_filtration(const WeightVector& w, const Rat& a) const;

    std::string str() const;

private:
    void insert_term(const std::vector<int>& e, const Elt& c);
    FieldPtr F_;
    VarTablePtr vars_;
    int trunc_ = 24;
    std::map<std::vector<int>, Elt> terms_;
};

// Parse a polynomial expression (integers, named variables, + - * ^ and
// parentheses).  `symbols` resolves names not in the variable table to field
// elements (e.g. "p", "pi", "t1").
GaussPoly parse_poly(const std::string& text, const FieldPtr& F,
                     const VarTablePtr& vars, int trunc,
                     const std::function<std::optional<Elt>(const std::string&)>& symbols);

// Element-only expression (no ring variables allowed).
Elt parse_elt(const std::string& text, const FieldPtr& F,
              const std::function<std::optional<Elt>(const std::string&)>& symbols);

}  // namespace ramlab
