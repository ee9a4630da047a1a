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

// Exact rational arithmetic for certificate rechecks. Every finite double is
// a dyadic rational, so converting one is exact.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <span>
#include <string>
#include <string_view>

namespace factorlab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Exact value of a finite double. Throws InvalidArgument on inf/nan.
Rational to_rational(double v);

/// Parses "a/b", integers and plain decimals ("0.01" is exactly 1/100).
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// ⌈r⌉ for r > 0.
BigInt ceil(const Rational& r);

Rational abs(const Rational& r);
/// Σ |v_k| exactly.
Rational abs_sum(std::span<const double> v);
/// max |v_k| exactly.
Rational max_abs(std::span<const double> v);
/// Σ |v_k|^e exactly (e >= 1 an integer).
Rational abs_power_sum(std::span<const double> v, unsigned e);
Rational pow(const Rational& r, unsigned e);

}  // namespace factorlab
