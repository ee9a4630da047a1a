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

// Factorization of the identity through H = T or H = Id - T.
//
// Blocks are indexed by labels: label j for the j-th block of a one-parameter
// system, grid cell (K0, K1) for a two-parameter one. The label space is ℓ^p
// (or ℓ^P(ℓ^p)) over those labels, in the same norm family as the space
// itself, and plays the role of the copy of the space that gets factored.
// Only the labels of the blocks in use are active; every identity below is
// the identity on the active labels.
//
// The span Y of the retained synth vectors is represented in the
// coordinates u of its preimage under B. Because blocks have disjoint
// supports and equal norms c, ‖Σ u_l synth_l / c‖ = ‖u‖ exactly, so norms of
// maps into or out of Y are norms of label-space matrices. The assembly
// checks this isometry numerically instead of assuming it.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "factorlab/blocks.hpp"
#include "factorlab/matrix.hpp"
#include "factorlab/opnorm.hpp"

namespace factorlab {

enum class Branch { T, IdMinusT };
std::string_view to_string(Branch b);

struct Selection {
  Branch branch = Branch::T;
  std::vector<std::size_t> retained;  // block indices, construction order
  std::vector<double> d;              // <probe_j, T synth_j> for every block
  std::size_t min_retained = 0;
  /// Two-parameter only: rows kept (0-based) and, per active row, whether
  /// the row met its majority threshold for each branch.
  std::vector<std::size_t> rows;
};

/// Default retention threshold: ⌈t/2⌉ for one parameter, 1 for two.
std::size_t default_min_retained(const BlockSystem& sys);

/// Picks H. The T branch wins ties (|d_j| = 1 counts for T). Throws
/// RetentionImpossible when neither branch keeps min_retained blocks.
Selection select_H(const Operator& T, const BlockSystem& sys,
                   std::optional<std::size_t> min_retained = std::nullopt);

/// Label space of a block system: ℓ^p_t, or ℓ^P_m(ℓ^p_L) with L the
/// largest inner label.
SpaceSpec label_space(const BlockSystem& sys);
/// Coordinate of block i in the label space.
std::size_t label_coord(const BlockSystem& sys, std::size_t i);

/// B: label space -> space, label(j) -> synth_j / ‖synth_j‖, over `subset`
/// (all blocks when empty).
DenseMatrix build_B(const BlockSystem& sys, const std::vector<std::size_t>& subset = {});
/// Q: space -> label space, x -> Σ (‖synth_j‖ / |B_j|) <probe_j, x> e_label(j).
DenseMatrix build_Q(const BlockSystem& sys, const std::vector<std::size_t>& subset = {});
/// P in Y-coordinates: x -> Σ_{j retained} (‖synth_j‖ / d_j) <probe_j, x> e_label(j),
/// where d_j = <probe_j, H synth_j>.
DenseMatrix build_P(const BlockSystem& sys, const std::vector<std::size_t>& retained,
                    const std::vector<double>& diag_values);

/// Max coordinate deviation between both sides of
///   PHy - y = Σ_i Σ_{j<i} a_j <b_i, H b_j*>/d_i b_i* + Σ_i <b_i, H Σ_{j>i} a_j b_j*>/d_i b_i*
/// over `samples` random y = Σ_{retained} a_j synth_j. The left side applies
/// H to y; the right side uses only block pairings.
double crucial_identity_check(const BlockSystem& sys, const Operator& H,
                              const std::vector<std::size_t>& retained, std::size_t samples,
                              std::uint64_t seed);

struct PhjInverse {
  DenseMatrix phj;      // PHJ in Y-coordinates (label x label)
  DenseMatrix inverse;  // inverse on the retained labels, zero elsewhere
  NormEstimate defect;  // ‖PHJ - Id_Y‖
  NormEstimate inverse_norm;
};

/// Inverts PHJ on the retained labels by LU. Throws DefectTooLarge when the
/// defect's upper bracket exceeds 1 - 1e-6.
PhjInverse invert_PHJ(const BlockSystem& sys, const Operator& H,
                      const std::vector<std::size_t>& retained, const NormOptions& opts = {});

struct Tolerances {
  double residual = 1e-9;
  double algebraic = 1e-10;
  double identity = 1e-12;
  double norm_slack = 1e-6;  // relative
};

struct FactorBundle {
  Branch branch = Branch::T;
  std::vector<std::size_t> retained;
  std::vector<double> diag_values;  // <probe_j, H synth_j>, retained order
  SpaceSpec space;
  SpaceSpec labels;
  DenseMatrix B, Q, P, J, V, M, N, phj_inverse;
  std::map<std::string, NormEstimate> norms;
};

struct VerificationReport {
  std::vector<Check> checks;
  double residual_identity = 0.0;
  NormEstimate neumann_defect;
  NormEstimate inverse_norm;
  double norm_product_MN = 0.0;  // product of upper brackets
  bool passed = false;
};

struct AssembleOptions {
  std::optional<std::size_t> min_retained;
  Tolerances tol;
  NormOptions norm;
  std::size_t identity_samples = 100;
  std::uint64_t seed = 1;
};

/// Selects H, builds every operator, inverts PHJ and checks every bound.
std::pair<FactorBundle, VerificationReport> assemble(const BlockSystem& sys, const Operator& T,
                                                     const AssembleOptions& opts = {});

}  // namespace factorlab
