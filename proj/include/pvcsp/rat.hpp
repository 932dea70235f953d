#pragma once

#include <gmpxx.h>

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include "pvcsp/error.hpp"

namespace pvcsp {

// Exact rational number, always in lowest terms with positive denominator.
// A thin value wrapper around GMP's mpq_class: every operator returns a plain
// Rat so GMP's expression templates never leak into Eigen expressions.
class Rat {
public:
    Rat() : v_(0) {}
    Rat(long n) : v_(n) {} // NOLINT: implicit by design, Rat is a scalar
    Rat(int n) : v_(static_cast<long>(n)) {}
    Rat(long num, long den) {
        if (den == 0)
            throw UndefinedArithmetic("rational with zero denominator");
        v_ = mpq_class(num, den);
        v_.canonicalize();
    }
    explicit Rat(const mpq_class& q) : v_(q) { v_.canonicalize(); }
    explicit Rat(const mpz_class& num, const mpz_class& den) {
        if (den == 0)
            throw UndefinedArithmetic("rational with zero denominator");
        v_ = mpq_class(num, den);
        v_.canonicalize();
    }

    // Accepts "p", "-p", "p/q", "-p/q" with decimal digits; q > 0 after sign
    // normalization. Anything else is a ParseError.
    static Rat parse(std::string_view text);

    std::string str() const;

    mpz_class num() const { return v_.get_num(); }
    mpz_class den() const { return v_.get_den(); }

    bool is_zero() const { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const { return sgn(v_); }

    // Exact conversion; throws if the value is not an integer fitting long.
    long to_long() const;

    friend Rat operator+(const Rat& a, const Rat& b) { return make(a.v_ + b.v_); }
    friend Rat operator-(const Rat& a, const Rat& b) { return make(a.v_ - b.v_); }
    friend Rat operator*(const Rat& a, const Rat& b) { return make(a.v_ * b.v_); }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.is_zero())
            throw UndefinedArithmetic("division by zero");
        return make(a.v_ / b.v_);
    }
    Rat operator-() const { return make(-v_); }

    Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
    Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
    Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
    Rat& operator/=(const Rat& o) { *this = *this / o; return *this; }

    friend bool operator==(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) == 0; }
    friend bool operator!=(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) != 0; }
    friend bool operator<(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) < 0; }
    friend bool operator<=(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) <= 0; }
    friend bool operator>(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) > 0; }
    friend bool operator>=(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) >= 0; }

    friend Rat abs(const Rat& a) { return make(::abs(a.v_)); }

    friend std::ostream& operator<<(std::ostream& os, const Rat& r);

private:
    static Rat make(const mpq_class& q) {
        Rat r;
        r.v_ = q;
        return r;
    }
    mpq_class v_; // invariant: canonical (gcd(|num|, den) = 1, den > 0)
};

// Least common multiple of the denominators of a range of Rats, as mpz.
template <typename Range>
mpz_class denominator_lcm(const Range& values) {
    mpz_class l = 1;
    for (const Rat& r : values) {
        mpz_class d = r.den();
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
    }
    return l;
}

using RatVector = Eigen::Matrix<Rat, Eigen::Dynamic, 1>;
using RatMatrix = Eigen::Matrix<Rat, Eigen::Dynamic, Eigen::Dynamic>;

} // namespace pvcsp

namespace Eigen {

template <>
struct NumTraits<pvcsp::Rat> : GenericNumTraits<pvcsp::Rat> {
    using Real = pvcsp::Rat;
    using NonInteger = pvcsp::Rat;
    using Nested = pvcsp::Rat;
    using Literal = long;

    static inline Real epsilon() { return pvcsp::Rat(0); }
    static inline Real dummy_precision() { return pvcsp::Rat(0); }
    static inline int digits10() { return 0; }

    enum {
        IsInteger = 0,
        IsSigned = 1,
        IsComplex = 0,
        RequireInitialization = 1,
        ReadCost = 8,
        AddCost = 80,
        MulCost = 80,
    };
};

} // namespace Eigen

template <>
struct std::hash<pvcsp::Rat> {
    std::size_t operator()(const pvcsp::Rat& r) const noexcept {
        return std::hash<std::string>{}(r.str());
    }
};
