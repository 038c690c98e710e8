#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cwrdm {

/// Exact rational number on 64-bit numerator/denominator.
///
/// Always stored reduced with a positive denominator. All intermediate
/// products go through 128-bit integers; a result that does not fit back
/// into 64 bits after reduction throws std::overflow_error instead of
/// silently wrapping.
class Rational {
 public:
  Rational() = default;
  Rational(long long numerator) : num_(numerator), den_(1) {}
  Rational(long long numerator, long long denominator) {
    if (denominator == 0) throw std::invalid_argument("Rational: zero denominator");
    assign(numerator, denominator);
  }

  long long num() const { return num_; }
  long long den() const { return den_; }
  bool is_zero() const { return num_ == 0; }

  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::invalid_argument("Rational: division by zero");
    return from_i128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// "p/q", or just "p" for integers.
  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  using i128 = __int128;

  long long num_ = 0;
  long long den_ = 1;

  static i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static long long narrow(i128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("Rational: 64-bit overflow");
    return static_cast<long long>(v);
  }

  static Rational from_i128(i128 n, i128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    if (n == 0) return Rational();
    i128 g = gcd128(n, d);
    Rational r;
    r.num_ = narrow(n / g);
    r.den_ = narrow(d / g);
    return r;
  }

  void assign(long long n, long long d) { *this = from_i128(n, d); }
};

}  // namespace cwrdm
