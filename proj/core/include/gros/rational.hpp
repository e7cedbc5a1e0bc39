#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace gros {

// Exact rational number on int64 with 128-bit intermediates.
// Invariants: den > 0 and gcd(|num|, den) == 1. Reduction happens on every
// construction and arithmetic op; values whose reduced form does not fit in
// int64 throw std::overflow_error instead of silently losing exactness.
struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rat() = default;
  constexpr Rat(std::int64_t n) : num(n), den(1) {}
  Rat(std::int64_t n, std::int64_t d) { *this = make(n, d); }

  static Rat make(__int128 n, __int128 d);

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_zero() const { return num == 0; }

  // Serialized as "num/den" ("num" when den == 1), parse accepts that form
  // plus plain integers and finite decimals such as "0.375".
  std::string str() const;
  static Rat parse(const std::string& text);

  friend Rat operator+(const Rat& a, const Rat& b) {
    return make(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                static_cast<__int128>(a.den) * b.den);
  }
  friend Rat operator-(const Rat& a, const Rat& b) {
    return make(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                static_cast<__int128>(a.den) * b.den);
  }
  friend Rat operator*(const Rat& a, const Rat& b) {
    return make(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
  }
  friend Rat operator/(const Rat& a, const Rat& b) {
    if (b.num == 0) throw std::domain_error("Rat: division by zero");
    return make(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
  }
  Rat operator-() const { return make(-static_cast<__int128>(num), den); }
  Rat& operator+=(const Rat& o) { return *this = *this + o; }
  Rat& operator-=(const Rat& o) { return *this = *this - o; }
  Rat& operator*=(const Rat& o) { return *this = *this * o; }

  friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend bool operator<(const Rat& a, const Rat& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
  friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
  friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }
};

namespace detail {

inline __int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline std::int64_t narrow128(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("Rat: value exceeds 64-bit range after reduction");
  return static_cast<std::int64_t>(v);
}

}  // namespace detail

inline Rat Rat::make(__int128 n, __int128 d) {
  if (d == 0) throw std::domain_error("Rat: zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 g = detail::gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  Rat r;
  r.num = detail::narrow128(n);
  r.den = detail::narrow128(d);
  return r;
}

inline std::string Rat::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

inline Rat Rat::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("Rat: empty string");
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::int64_t n = std::stoll(text.substr(0, slash));
    std::int64_t d = std::stoll(text.substr(slash + 1));
    return Rat(n, d);
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rat(std::stoll(text));
  bool neg = text[0] == '-';
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  if (neg) digits = digits.substr(1);
  std::size_t frac_len = text.size() - dot - 1;
  if (frac_len > 18) throw std::invalid_argument("Rat: too many decimal digits: " + text);
  __int128 den = 1;
  for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
  __int128 num = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') throw std::invalid_argument("Rat: bad decimal: " + text);
    num = num * 10 + (c - '0');
  }
  return make(neg ? -num : num, den);
}

inline std::int64_t gcd_i64(std::int64_t a, std::int64_t b) {
  return detail::narrow128(detail::gcd128(a, b));
}

inline std::int64_t lcm_i64(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) throw std::domain_error("lcm of zero");
  return detail::narrow128(static_cast<__int128>(a) / detail::gcd128(a, b) * b);
}

}  // namespace gros
