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

// Operator norms between truncated sequence spaces.
//
// Exact values are returned where a closed form exists:
//   * the domain is ℓ^1-like (outer and inner exponent 1 or a single
//     coordinate block): max over columns of the codomain norm;
//   * the codomain is ℓ^∞-like: max over rows of the predual norm;
//   * domain ℓ^1(X): max over column blocks; codomain ℓ^∞(Y): max over row
//     blocks (applied recursively);
//   * ℓ^2 -> ℓ^2: largest singular value;
//   * diagonal operators on one space: max |d_k|.
// Everything else gets a certified bracket: the lower end is the best ratio
// found by a nonlinear power iteration with several seeded starts, the upper
// end comes from interpolation or block-norm estimates.

#pragma once

#include <cstdint>
#include <span>

#include "factorlab/matrix.hpp"
#include "factorlab/seqspace.hpp"

namespace factorlab {

struct NormEstimate {
  double lower = 0.0;
  double upper = 0.0;
  bool exact = false;

  static NormEstimate exactly(double v) { return {v, v, true}; }
};

struct NormOptions {
  int restarts = 8;
  double tol = 1e-10;
  int max_iter = 200;
  std::uint64_t seed = 0x6a09e667f3bcc908ULL;
};

NormEstimate op_norm(const Operator& a, const NormOptions& opts = {});
NormEstimate op_norm(const DenseMatrix& a, const SpaceSpec& domain, const SpaceSpec& codomain,
                     const NormOptions& opts = {});

/// Norm of ‖x‖_codomain / ‖x‖_domain at a specific x (a lower bound).
double norm_ratio(const DenseMatrix& a, const SpaceSpec& domain, const SpaceSpec& codomain,
                  std::span<const double> x);

/// Norming functional: u with ‖u‖ = 1 in the dual norm and <u, v> = ‖v‖,
/// where v is measured in `space` on `side`. Returns zeros for v = 0.
std::vector<double> duality_map(std::span<const double> v, const SpaceSpec& space, Side side);

/// sup over the dual-side unit ball of |<phi, P_A x>|: the predual norm of
/// phi restricted to A.
double restricted_predual_norm(std::span<const double> phi, const IndexSet& A,
                               const SpaceSpec& space);
double restricted_predual_norm(const VecRep& phi, const IndexSet& A);

}  // namespace factorlab
