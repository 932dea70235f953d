#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "pvcsp/rat.hpp"

namespace pvcsp {

// Rational extended with a single positive infinity, under the conventions
// 0 * inf = 0 and c * inf = inf for c > 0. There is no negative infinity:
// any operation whose exact result would leave Q u {inf} throws
// UndefinedArithmetic (inf - inf, -inf, c * inf for c < 0, x / inf, x / 0).
class ExtRat {
public:
    ExtRat() : inf_(false), fin_(0) {}
    ExtRat(Rat r) : inf_(false), fin_(std::move(r)) {} // NOLINT: scalar-like
    ExtRat(long n) : inf_(false), fin_(n) {}
    ExtRat(int n) : inf_(false), fin_(n) {}

    static ExtRat infinity() {
        ExtRat e;
        e.inf_ = true;
        return e;
    }

    // Accepts the Rat grammar plus the literal "inf" (no sign).
    static ExtRat parse(std::string_view text);

    bool is_inf() const { return inf_; }
    bool is_zero() const { return !inf_ && fin_.is_zero(); }
    const Rat& finite() const {
        if (inf_)
            throw UndefinedArithmetic("finite() on inf");
        return fin_;
    }

    std::string str() const { return inf_ ? "inf" : fin_.str(); }

    friend ExtRat operator+(const ExtRat& a, const ExtRat& b) {
        if (a.inf_ || b.inf_)
            return infinity();
        return ExtRat(a.fin_ + b.fin_);
    }
    friend ExtRat operator-(const ExtRat& a, const ExtRat& b) {
        if (b.inf_)
            throw UndefinedArithmetic(a.inf_ ? "inf - inf" : "x - inf");
        if (a.inf_)
            return infinity();
        return ExtRat(a.fin_ - b.fin_);
    }
    ExtRat operator-() const {
        if (inf_)
            throw UndefinedArithmetic("-inf");
        return ExtRat(-fin_);
    }
    friend ExtRat operator*(const ExtRat& a, const ExtRat& b) {
        if (a.is_zero() || b.is_zero())
            return ExtRat(Rat(0));
        if (a.inf_ || b.inf_) {
            if ((a.inf_ || a.fin_.sign() > 0) && (b.inf_ || b.fin_.sign() > 0))
                return infinity();
            throw UndefinedArithmetic("negative multiple of inf");
        }
        return ExtRat(a.fin_ * b.fin_);
    }
    friend ExtRat operator/(const ExtRat& a, const ExtRat& b) {
        if (b.inf_)
            throw UndefinedArithmetic("division by inf");
        if (b.is_zero())
            throw UndefinedArithmetic("division by zero");
        if (a.inf_) {
            if (b.fin_.sign() < 0)
                throw UndefinedArithmetic("inf divided by negative");
            return infinity();
        }
        return ExtRat(a.fin_ / b.fin_);
    }

    ExtRat& operator+=(const ExtRat& o) { return *this = *this + o; }

    // Total order: inf is strictly greater than every finite value.
    friend bool operator==(const ExtRat& a, const ExtRat& b) {
        if (a.inf_ != b.inf_)
            return false;
        return a.inf_ || a.fin_ == b.fin_;
    }
    friend bool operator!=(const ExtRat& a, const ExtRat& b) { return !(a == b); }
    friend bool operator<(const ExtRat& a, const ExtRat& b) {
        if (a.inf_)
            return false;
        if (b.inf_)
            return true;
        return a.fin_ < b.fin_;
    }
    friend bool operator<=(const ExtRat& a, const ExtRat& b) { return a < b || a == b; }
    friend bool operator>(const ExtRat& a, const ExtRat& b) { return b < a; }
    friend bool operator>=(const ExtRat& a, const ExtRat& b) { return b <= a; }

    friend std::ostream& operator<<(std::ostream& os, const ExtRat& e);

private:
    bool inf_;
    Rat fin_;
};

} // namespace pvcsp
