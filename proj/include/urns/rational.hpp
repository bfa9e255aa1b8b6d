#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace urns {

// Exact rational on checked 128-bit integers. Wide enough for every exact
// enumeration the path budget admits; anything past that throws instead of
// silently losing precision.
class Rat {
  public:
    using int128 = __int128;

    Rat() : num_(0), den_(1) {}
    Rat(long long n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)

    Rat(int128 n, int128 d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) {
            n = checked_neg(n);
            d = checked_neg(d);
        }
        const int128 g = gcd128(n < 0 ? -n : n, d);
        num_ = g ? n / g : n;
        den_ = g ? d / g : d;
    }

    int128 num() const { return num_; }
    int128 den() const { return den_; }

    bool is_zero() const { return num_ == 0; }

    Rat operator+(const Rat& o) const {
        return Rat(checked_add(checked_mul(num_, o.den_), checked_mul(o.num_, den_)),
                   checked_mul(den_, o.den_));
    }
    Rat operator-(const Rat& o) const {
        return Rat(checked_add(checked_mul(num_, o.den_), checked_neg(checked_mul(o.num_, den_))),
                   checked_mul(den_, o.den_));
    }
    Rat operator*(const Rat& o) const {
        return Rat(checked_mul(num_, o.num_), checked_mul(den_, o.den_));
    }
    Rat operator/(const Rat& o) const {
        if (o.num_ == 0) throw std::domain_error("rational division by zero");
        return Rat(checked_mul(num_, o.den_), checked_mul(den_, o.num_));
    }
    Rat& operator+=(const Rat& o) { return *this = *this + o; }
    Rat& operator-=(const Rat& o) { return *this = *this - o; }
    Rat& operator*=(const Rat& o) { return *this = *this * o; }
    Rat& operator/=(const Rat& o) { return *this = *this / o; }

    bool operator==(const Rat& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rat& o) const { return !(*this == o); }
    bool operator<(const Rat& o) const {
        return checked_mul(num_, o.den_) < checked_mul(o.num_, den_);
    }
    bool operator<=(const Rat& o) const { return *this < o || *this == o; }
    bool operator>(const Rat& o) const { return o < *this; }
    bool operator>=(const Rat& o) const { return o <= *this; }

    Rat pow(unsigned exponent) const {
        Rat result(1);
        Rat base = *this;
        while (exponent) {
            if (exponent & 1u) result *= base;
            base *= base;
            exponent >>= 1u;
        }
        return result;
    }

    double to_double() const {
        return static_cast<double>(static_cast<long double>(num_) /
                                   static_cast<long double>(den_));
    }

    std::string to_string() const {
        std::string s = int128_to_string(num_);
        if (den_ != 1) s += "/" + int128_to_string(den_);
        return s;
    }

  private:
    static int128 gcd128(int128 a, int128 b) {
        while (b != 0) {
            const int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static int128 checked_add(int128 a, int128 b) {
        int128 r;
        if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("rational overflow");
        return r;
    }
    static int128 checked_mul(int128 a, int128 b) {
        int128 r;
        if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("rational overflow");
        return r;
    }
    static int128 checked_neg(int128 a) {
        int128 r;
        if (__builtin_sub_overflow(static_cast<int128>(0), a, &r))
            throw std::overflow_error("rational overflow");
        return r;
    }

    static std::string int128_to_string(int128 v) {
        if (v == 0) return "0";
        const bool neg = v < 0;
        std::string digits;
        while (v != 0) {
            const int d = static_cast<int>(neg ? -(v % 10) : v % 10);
            digits.push_back(static_cast<char>('0' + d));
            v /= 10;
        }
        if (neg) digits.push_back('-');
        return {digits.rbegin(), digits.rend()};
    }

    int128 num_;
    int128 den_;
};

}  // namespace urns
