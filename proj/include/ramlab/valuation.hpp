#pragma once

#include "ramlab/rational.hpp"

namespace ramlab {

// Element of Q ∪ {+∞}, the value group of a discrete valuation plus the
// valuation of zero.  +∞ absorbs addition and wins every min().
class Valuation {
public:
    Valuation() : inf_(true) {}
    Valuation(Rat q) : inf_(false), q_(std::move(q)) {}
    Valuation(long n) : inf_(false), q_(n) {}
    static Valuation infinity() { return Valuation(); }

    bool is_infinite() const { return inf_; }
    const Rat& finite() const {
        if (inf_) throw std::domain_error("Valuation: infinite has no finite value");
        return q_;
    }

    Valuation operator+(const Valuation& o) const {
        if (inf_ || o.inf_) return infinity();
        return Valuation(q_ + o.q_);
    }
    Valuation operator-(const Valuation& o) const {
        if (o.inf_) throw std::domain_error("Valuation: cannot subtract infinity");
        if (inf_) return infinity();
        return Valuation(q_ - o.q_);
    }
    Valuation operator*(const Rat& c) const {
        if (inf_) return infinity();
        return Valuation(q_ * c);
    }

    bool operator==(const Valuation& o) const {
        if (inf_ != o.inf_) return false;
        return inf_ || q_ == o.q_;
    }
    bool operator!=(const Valuation& o) const { return !(*this == o); }
    bool operator<(const Valuation& o) const {
        if (inf_) return false;
        if (o.inf_) return true;
        return q_ < o.q_;
    }
    bool operator<=(const Valuation& o) const { return *this < o || *this == o; }
    bool operator>(const Valuation& o) const { return o < *this; }
    bool operator>=(const Valuation& o) const { return o <= *this; }

    std::string str() const { return inf_ ? "inf" : q_.str(); }

private:
    bool inf_;
    Rat q_;
};

inline Valuation val_min(const Valuation& a, const Valuation& b) { return a <= b ? a : b; }

}  // namespace ramlab
