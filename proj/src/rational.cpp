// Copyright 2026 The Factorlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "factorlab/rational.hpp"

#include <cctype>
#include <cmath>

#include "factorlab/errors.hpp"

namespace factorlab {

Rational to_rational(double v) {
  require(std::isfinite(v), ErrorKind::InvalidArgument, "cannot convert a non-finite double");
  // Rational(double) in boost is exact for binary floating point.
  return Rational(v);
}

namespace {

BigInt parse_digits(std::string_view s, std::string_view whole) {
  require(!s.empty(), ErrorKind::Parse, "bad rational '" + std::string(whole) + "'");
  for (char c : s)
    require(std::isdigit(static_cast<unsigned char>(c)) != 0, ErrorKind::Parse,
            "bad rational '" + std::string(whole) + "'");
  return BigInt(std::string(s));
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view t = text;
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.remove_prefix(1);
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.remove_suffix(1);
  bool negative = false;
  if (!t.empty() && (t.front() == '-' || t.front() == '+')) {
    negative = t.front() == '-';
    t.remove_prefix(1);
  }
  Rational r;
  if (auto slash = t.find('/'); slash != std::string_view::npos) {
    const BigInt num = parse_digits(t.substr(0, slash), text);
    const BigInt den = parse_digits(t.substr(slash + 1), text);
    require(den != 0, ErrorKind::Parse, "zero denominator in '" + std::string(text) + "'");
    r = Rational(num, den);
  } else {
    BigInt exp10 = 0;
    int exponent = 0;
    if (auto e = t.find_first_of("eE"); e != std::string_view::npos) {
      std::string_view ex = t.substr(e + 1);
      bool eneg = false;
      if (!ex.empty() && (ex.front() == '-' || ex.front() == '+')) {
        eneg = ex.front() == '-';
        ex.remove_prefix(1);
      }
      exp10 = parse_digits(ex, text);
      require(exp10 <= 4000, ErrorKind::Parse, "exponent too large in '" + std::string(text) + "'");
      exponent = static_cast<int>(exp10) * (eneg ? -1 : 1);
      t = t.substr(0, e);
    }
    std::string digits;
    int frac = 0;
    if (auto dot = t.find('.'); dot != std::string_view::npos) {
      digits = std::string(t.substr(0, dot)) + std::string(t.substr(dot + 1));
      frac = static_cast<int>(t.size() - dot - 1);
    } else {
      digits = std::string(t);
    }
    const BigInt mant = parse_digits(digits, text);
    const int shift = exponent - frac;
    BigInt scale = 1;
    for (int k = 0; k < std::abs(shift); ++k) scale *= 10;
    r = shift >= 0 ? Rational(mant * scale) : Rational(mant, scale);
  }
  return negative ? Rational(-r) : r;
}

std::string to_string(const Rational& r) { return r.str(); }

double to_double(const Rational& r) { return r.convert_to<double>(); }

BigInt ceil(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  BigInt q = num / den;
  if (q * den < num) q += 1;
  return q;
}

Rational abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

Rational abs_sum(std::span<const double> v) {
  Rational s = 0;
  for (double x : v) s += abs(to_rational(x));
  return s;
}

Rational max_abs(std::span<const double> v) {
  Rational m = 0;
  for (double x : v) {
    const Rational a = abs(to_rational(x));
    if (a > m) m = a;
  }
  return m;
}

Rational pow(const Rational& r, unsigned e) {
  Rational out = 1;
  for (unsigned k = 0; k < e; ++k) out *= r;
  return out;
}

Rational abs_power_sum(std::span<const double> v, unsigned e) {
  Rational s = 0;
  for (double x : v) s += pow(abs(to_rational(x)), e);
  return s;
}

}  // namespace factorlab
