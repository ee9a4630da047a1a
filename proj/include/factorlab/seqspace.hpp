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

// Truncated sequence spaces with the unit vector basis.
//
// A SpaceSpec describes the space operators act on (the "dual side", S* in
// the factorization) together with the declared basis constants. Vectors on
// the predual side carry the conjugate exponents. Two kinds exist:
//
//   lp      ℓ^p_dim
//   lp_sum  ℓ^{outer_p}_{outer_dim}(ℓ^p_dim), flattened row-major so that
//           grid cell (i, j) (0-based) sits at coordinate i * dim + j.
//
// Coordinates are 0-based throughout the library. TwoParamIndex is the one
// exception: it names an element of N x N and is 1-based, matching the rank
// function of the order used to schedule the two-parameter construction.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace factorlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Conjugate exponent with 1' = inf and inf' = 1.
double conjugate_exponent(double p);

enum class Side { dual, predual };

struct SpaceSpec {
  enum class Kind { lp, lp_sum };

  Kind kind = Kind::lp;
  double p = kInf;  // exponent of ℓ^p, or of the inner space for lp_sum
  std::size_t dim = 2;
  double outer_p = 1.0;  // lp_sum only
  std::size_t outer_dim = 1;
  double K_u = 1.0;
  double K_s = 1.0;

  static SpaceSpec lp(double p, std::size_t dim);
  static SpaceSpec lp_sum(double outer_p, std::size_t outer_dim, double inner_p, std::size_t dim);

  /// Total number of coordinates.
  std::size_t size() const { return rows() * dim; }
  /// Number of outer coordinates (1 for plain ℓ^p).
  std::size_t rows() const { return kind == Kind::lp ? 1 : outer_dim; }

  /// Same geometry with conjugate exponents (the predual norm family).
  SpaceSpec conjugate() const;
  /// Same family and exponents, different dimensions.
  SpaceSpec resized(std::size_t new_outer_dim, std::size_t new_dim) const;

  /// Throws InvalidArgument on bad exponents, dimensions or constants.
  /// `pipeline` additionally enforces dim >= 2.
  void validate(bool pipeline = false) const;

  std::string describe() const;

  bool same_geometry(const SpaceSpec& other) const;
  friend bool operator==(const SpaceSpec&, const SpaceSpec&) = default;
};

/// Sorted, duplicate-free list of 0-based coordinates.
using IndexSet = std::vector<std::size_t>;

IndexSet make_index_set(std::vector<std::size_t> indices);
IndexSet index_range(std::size_t first, std::size_t last_exclusive);

/// A vector of coordinates tied to a space and a side.
struct VecRep {
  std::vector<double> coords;
  SpaceSpec space;
  Side side = Side::dual;

  VecRep() = default;
  VecRep(std::vector<double> c, SpaceSpec s, Side sd);

  static VecRep zeros(const SpaceSpec& s, Side sd);
  static VecRep unit(const SpaceSpec& s, Side sd, std::size_t k);

  std::span<const double> row(std::size_t i) const;
};

/// Element of N x N, 1-based.
struct TwoParamIndex {
  std::uint64_t i = 1;
  std::uint64_t j = 1;
  friend bool operator==(const TwoParamIndex&, const TwoParamIndex&) = default;
};

/// (i0, j0) precedes (i1, j1) iff (i0 + j0, i0) is lexicographically smaller.
bool precedes(const TwoParamIndex& a, const TwoParamIndex& b);
/// Order-preserving bijection N x N -> {1, 2, ...}.
std::uint64_t precede_rank(const TwoParamIndex& idx);
TwoParamIndex precede_unrank(std::uint64_t k);

/// ℓ^p norm of a coordinate array; inf and 1 use the vector kernels and
/// other exponents are evaluated with scaling so tiny entries do not
/// underflow.
double lp_norm(std::span<const double> x, double p);

/// Norm of raw coordinates in `space` on `side`.
double norm(const SpaceSpec& space, Side side, std::span<const double> x);
double norm(const VecRep& v);

/// Coordinate pairing <x, f> of a predual vector with a dual vector.
double pair(const VecRep& x, const VecRep& f);

/// Zero every coordinate outside A.
VecRep coord_projection(const IndexSet& A, const VecRep& v);

/// Keep exactly the grid cells listed in K (1-based (i, j)); lp_sum only.
VecRep rect_projection(std::span<const TwoParamIndex> K, const VecRep& y);

}  // namespace factorlab
