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

// Inductive construction of two-point blocks b = e_{k0} - e_{k1}.
//
// Each block is used twice: as the vector T acts on ("synth") and as the
// functional that tests T's output ("probe"). Both have the same
// coordinates; only the side, and hence the norm, differs. In the
// one-parameter pipeline synth is b_j* in S* and probe is b_j in S. In the
// two-parameter pipeline the roles swap (T acts on the e-blocks and the
// f-blocks test), which the shared representation absorbs.
//
// Step i picks a pair from the current admissible set so that the new probe
// barely sees T applied to every earlier synth ("past"), then shrinks the
// admissible set so that T^T applied to the new probe has tiny mass on
// everything still admissible ("future").

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "factorlab/annihilate.hpp"
#include "factorlab/matrix.hpp"
#include "factorlab/seqspace.hpp"

namespace factorlab {

/// eta_i = K_u^{-1} 4^{-i-1}, i = 1, 2, ...
struct EtaSchedule {
  double K_u = 1.0;
  std::vector<double> values;  // values[i - 1] = eta_i

  static EtaSchedule make(double K_u, std::size_t count);
  double at(std::size_t i) const;  // 1-based
  /// Σ over all i >= 1, i.e. K_u^{-1} / 12.
  double infinite_sum() const { return 1.0 / (12.0 * K_u); }
};

struct BudgetPlan {
  std::size_t target_blocks = 0;
  std::size_t reserve = 0;
  std::vector<std::size_t> min_keep;  // min_keep[i - 1] for step i
  std::size_t required_dim = 0;       // inner dimension for sums
  std::size_t required_rows = 1;      // two-parameter only
};

/// min_keep(i) = 2 (target - i) + reserve; reserve defaults to 4 * target.
/// Throws DimensionTooSmall (with suggested_dim) when the space cannot
/// host the plan, InvalidArgument when target_blocks = 0.
BudgetPlan plan_budget(const SpaceSpec& space, std::size_t target_blocks,
                       std::optional<std::size_t> reserve = std::nullopt);

struct Block {
  std::size_t row = 0;  // 0-based outer coordinate (0 for ℓ^p)
  std::size_t k0 = 0;   // 0-based inner coordinates, k0 < k1
  std::size_t k1 = 0;
  std::size_t flat0 = 0;
  std::size_t flat1 = 0;
  TwoParamIndex label;  // (1, j) for ℓ^p, (K0, K1) for sums
  std::uint64_t rank = 0;
};

struct BlockSystem {
  SpaceSpec space;
  bool two_param = false;
  EtaSchedule eta;
  BudgetPlan plan;
  PastStrategy strategy = PastStrategy::automatic;
  std::vector<Block> blocks;
  /// admissible[s][r]: admissible inner indices of row r before step s + 1;
  /// admissible[t] is the set left after the last step.
  std::vector<std::vector<IndexSet>> admissible;
  std::vector<PastCertificate> past;
  std::vector<std::vector<FutureCertificate>> future;  // per step, per row
  std::vector<double> past_sums;  // Σ_{j<i} |<probe_i, T synth_j>|

  std::size_t size() const { return blocks.size(); }
  /// Coordinates of block i (0-based): +1 at flat0, -1 at flat1.
  std::vector<double> synth(std::size_t i) const;
  std::vector<double> probe(std::size_t i) const { return synth(i); }
  /// ‖synth‖ on the dual side, identical for every block.
  double synth_norm() const;
  /// ‖probe‖ on the predual side.
  double probe_norm() const;
};

using BlockSystem2D = BlockSystem;

struct BuildOptions {
  PastStrategy strategy = PastStrategy::automatic;
  std::optional<std::size_t> reserve;
};

/// One-parameter construction on ℓ^p_dim. Errors carry the 1-based step.
BlockSystem build_blocks_1d(const Operator& T, const SpaceSpec& space, std::size_t target_blocks,
                            const BuildOptions& opts = {});

/// Two-parameter construction on ℓ^P(ℓ^p_dim); blocks follow the rank order
/// of N x N. Errors carry the 1-based step (= rank) and the 0-based row.
BlockSystem build_blocks_2d(const Operator& T, const SpaceSpec& space, std::size_t target_blocks,
                            const BuildOptions& opts = {});

/// One verification line of a run report.
struct Check {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool passed = false;
  std::string detail;
};

/// Recomputes every structural property and both annihilation bounds from
/// the finished system and T, without reading the stored certificates.
std::vector<Check> verify_blocks(const Operator& T, const BlockSystem& sys);

struct ExactSummary {
  std::size_t checked = 0;
  std::size_t held = 0;
  std::size_t skipped = 0;  // norms without a rational evaluation
};

/// Re-evaluates every certificate and past sum in rational arithmetic.
ExactSummary exact_recheck(const Operator& T, const BlockSystem& sys);

}  // namespace factorlab
