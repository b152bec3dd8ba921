#pragma once

// Dual arithmetic for the evidence calculus: exact rationals for oracles and
// identity checks, doubles for statistics.

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include "dsbn/error.hpp"

namespace dsbn {

using Rational = boost::multiprecision::cpp_rational;

template <class T>
struct Arith;

template <>
struct Arith<double> {
  static constexpr bool exact = false;
  /// Values this close to zero are treated as structural zeros (dropped from focal lists).
  static constexpr double zero_eps = 1e-12;
  /// Absolute tolerance for identity checks.
  static constexpr double tolerance = 1e-9;
  /// Smallest admissible combination normalizer.
  static constexpr double conflict_eps = 1e-12;

  static bool is_zero(double v) { return std::abs(v) <= zero_eps; }
  static bool near(double a, double b) { return std::abs(a - b) <= tolerance; }
  static bool positive(double v) { return v > zero_eps; }
  static bool negative(double v) { return v < -tolerance; }
  static double to_double(double v) { return v; }
  static double from_double(double v) { return v; }
  static double abs(double v) { return std::abs(v); }
  static std::string to_string(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
  }
};

template <>
struct Arith<Rational> {
  static constexpr bool exact = true;

  static bool is_zero(const Rational& v) { return v == 0; }
  static bool near(const Rational& a, const Rational& b) { return a == b; }
  static bool positive(const Rational& v) { return v > 0; }
  static bool negative(const Rational& v) { return v < 0; }
  static double to_double(const Rational& v) { return v.convert_to<double>(); }
  static Rational from_double(double v);
  static Rational abs(const Rational& v) { return v < 0 ? Rational(-v) : v; }
  static std::string to_string(const Rational& v) {
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    if (denominator(v) == 1) return numerator(v).str();
    return numerator(v).str() + "/" + denominator(v).str();
  }
};

template <class T>
concept Scalar = requires(const T& a, const T& b) {
  { a + b } -> std::convertible_to<T>;
  { a * b } -> std::convertible_to<T>;
  { a / b } -> std::convertible_to<T>;
  { Arith<T>::exact } -> std::convertible_to<bool>;
};

/// Parses "p/q", an integer, or a plain decimal literal ("0.375", "-1.5e-2") exactly.
inline Rational parse_rational(std::string_view text) {
  using boost::multiprecision::cpp_int;
  auto fail = [&] { throw InputError("not a number: '" + std::string(text) + "'"); };
  if (text.empty()) fail();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) fail();
    return num / den;
  }
  bool neg = false;
  std::size_t pos = 0;
  if (text[pos] == '+' || text[pos] == '-') {
    neg = text[pos] == '-';
    ++pos;
  }
  cpp_int mantissa = 0;
  long exponent = 0;
  bool any_digit = false;
  bool after_point = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      if (after_point) --exponent;
      any_digit = true;
    } else if (c == '.' && !after_point) {
      after_point = true;
    } else if (c == 'e' || c == 'E') {
      long e = 0;
      auto rest = text.substr(pos + 1);
      if (!rest.empty() && rest.front() == '+') rest.remove_prefix(1);
      auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), e);
      if (ec != std::errc{} || p != rest.data() + rest.size()) fail();
      exponent += e;
      pos = text.size();
      break;
    } else {
      fail();
    }
  }
  if (!any_digit) fail();
  Rational r(mantissa);
  cpp_int scale = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(std::labs(exponent)));
  if (exponent < 0) r /= Rational(scale);
  else r *= Rational(scale);
  return neg ? Rational(-r) : r;
}

/// Shortest round-trip decimal of v, read back exactly.
inline Rational Arith<Rational>::from_double(double v) {
  if (!std::isfinite(v)) throw InputError("non-finite value");
  return parse_rational(Arith<double>::to_string(v));
}

template <class T>
T parse_scalar(std::string_view text) {
  if constexpr (Arith<T>::exact) {
    return parse_rational(text);
  } else {
    return Arith<Rational>::to_double(parse_rational(text));
  }
}

}  // namespace dsbn
