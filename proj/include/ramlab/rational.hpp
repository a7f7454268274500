#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <stdexcept>
#include <string>

namespace ramlab {

using Int = boost::multiprecision::cpp_int;

// Exact rational number, always normalized (gcd(num,den)=1, den>0).
class Rat {
public:
    Rat() : num_(0), den_(1) {}
    Rat(long n) : num_(n), den_(1) {}
    Rat(Int n) : num_(std::move(n)), den_(1) {}
    Rat(Int n, Int d) : num_(std::move(n)), den_(std::move(d)) {
        if (den_ == 0) throw std::domain_error("Rat: zero denominator");
        normalize();
    }

    const Int& num() const { return num_; }
    const Int& den() const { return den_; }
    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ == 0 ? 0 : (num_ > 0 ? 1 : -1); }

    Rat operator-() const { return Rat(-num_, den_, raw_tag{}); }
    Rat operator+(const Rat& o) const {
        return Rat(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
    }
    Rat operator-(const Rat& o) const {
        return Rat(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
    }
    Rat operator*(const Rat& o) const { return Rat(num_ * o.num_, den_ * o.den_); }
    Rat operator/(const Rat& o) const {
        if (o.num_ == 0) throw std::domain_error("Rat: division by zero");
        return Rat(num_ * o.den_, den_ * o.num_);
    }
    Rat& operator+=(const Rat& o) { return *this = *this + o; }
    Rat& operator-=(const Rat& o) { return *this = *this - o; }
    Rat& operator*=(const Rat& o) { return *this = *this * o; }
    Rat& operator/=(const Rat& o) { return *this = *this / o; }

    bool operator==(const Rat& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rat& o) const { return !(*this == o); }
    std::strong_ordering operator<=>(const Rat& o) const {
        Int l = num_ * o.den_, r = o.num_ * den_;
        if (l < r) return std::strong_ordering::less;
        if (l > r) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    // Floor of the rational as an integer.
    Int floor() const {
        Int q = num_ / den_;
        if (num_ < 0 && q * den_ != num_) --q;
        return q;
    }
    Int ceil() const { return -(-*this).floor(); }

    double to_double() const {
        return num_.convert_to<double>() / den_.convert_to<double>();
    }

    std::string str() const {
        std::string s = num_.str();
        if (den_ != 1) s += "/" + den_.str();
        return s;
    }

private:
    struct raw_tag {};
    Rat(Int n, Int d, raw_tag) : num_(std::move(n)), den_(std::move(d)) {}
    void normalize() {
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        Int g = boost::multiprecision::gcd(num_ < 0 ? Int(-num_) : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
        if (num_ == 0) den_ = 1;
    }
    Int num_, den_;
};

inline Rat rat_min(const Rat& a, const Rat& b) { return a <= b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a >= b ? a : b; }
inline Rat rat_abs(const Rat& a) { return a.sign() < 0 ? -a : a; }

// Rational with the smallest denominator lying in [lo, hi] (Stern-Brocot walk).
// Among rationals with that denominator, returns the one closest to lo.
Rat simplest_in_interval(const Rat& lo, const Rat& hi);

// Best rational approximation to x with denominator <= max_den (continued fractions).
Rat snap_denominator(const Rat& x, const Int& max_den);

}  // namespace ramlab
