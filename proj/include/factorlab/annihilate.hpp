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

// Subspace annihilation on finite index sets.
//
// "Past" selection picks 2m indices F from a candidate set so that every
// zero-sum signed combination of the unit vectors on F pairs to at most eta
// with each of a list of functionals. "Future" selection keeps as many
// candidate coordinates as possible while the functional's mass on them,
// measured in the predual norm, stays within eta. The condition-C
// certificate averages projected vectors over N disjoint sets.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factorlab/rational.hpp"
#include "factorlab/seqspace.hpp"

namespace factorlab {

enum class PastStrategy {
  automatic,  // best_pair when m = 1, bucket otherwise
  bucket,     // nested pigeonhole into half-open buckets of width eta / 2m
  best_pair,  // m = 1: the lexicographically first pair within eta
};

std::string_view to_string(PastStrategy s);
PastStrategy parse_past_strategy(std::string_view text);

struct PastCertificate {
  IndexSet F;              // sorted, |F| = 2m
  std::vector<int> signs;  // aligned with F, zero sum
  double achieved = 0.0;   // worst |<Σ ε_k e_k, x_j>| over zero-sum ε and all j
  double eta = 0.0;
  std::size_t functional_count = 0;
  PastStrategy strategy = PastStrategy::best_pair;
  std::optional<std::size_t> row;  // two-parameter variant only
};

struct FutureCertificate {
  IndexSet A;
  double achieved = 0.0;  // exact restricted predual norm of phi on A
  double eta = 0.0;
  std::vector<double> phi;
  std::optional<std::size_t> row;  // two-parameter variant only
};

struct ConditionCCertificate {
  std::vector<IndexSet> sets;
  std::vector<Rational> a;  // a_j = 1/N for j < N, zero afterwards
  Rational theta;
  Rational achieved;  // ‖Σ a_j P_{A_j} x_j‖_∞, exact
  std::size_t N = 0;
};

/// Worst pairing over all zero-sum sign patterns on F, for each functional:
/// (sum of the m largest values) - (sum of the m smallest values).
double worst_zero_sum_pairing(const IndexSet& F, std::span<const std::span<const double>> functionals);

/// `functionals` are coordinate arrays; every index of lambda0 must be in
/// range for each of them.
PastCertificate past_annihilate(const IndexSet& lambda0,
                                std::span<const std::span<const double>> functionals,
                                std::size_t m, double eta,
                                PastStrategy strategy = PastStrategy::automatic);
PastCertificate past_annihilate(const IndexSet& lambda0, std::span<const VecRep> functionals,
                                std::size_t m, double eta,
                                PastStrategy strategy = PastStrategy::automatic);

/// Same selection on the row-`row` slices (0-based) of two-parameter
/// vectors; lambda0 and the returned F hold inner indices.
PastCertificate past_annihilate_2d(std::size_t row, const IndexSet& lambda0,
                                   std::span<const VecRep> vectors, std::size_t M, double eta,
                                   PastStrategy strategy = PastStrategy::automatic);

/// Largest A ⊆ lambda with restricted_predual_norm(phi, A) <= eta, chosen by
/// ascending |phi_k| (smaller index first on ties). `space` must be a plain
/// ℓ^p space matching phi. Throws BudgetExhausted when |A| < min_keep.
FutureCertificate future_annihilate(const IndexSet& lambda, std::span<const double> phi,
                                    const SpaceSpec& space, double eta, std::size_t min_keep);

/// Row-wise future selection on a two-parameter functional: lambdas[i] and
/// the returned A's are inner indices of row i. min_keep[i] applies to row
/// i; BudgetExhausted carries the failing row.
std::vector<FutureCertificate> future_annihilate_2d(const std::vector<IndexSet>& lambdas,
                                                    std::span<const double> phi,
                                                    const SpaceSpec& space, double eta,
                                                    std::span<const std::size_t> min_keep);
std::vector<FutureCertificate> future_annihilate_2d(const std::vector<IndexSet>& lambdas,
                                                    std::span<const double> phi,
                                                    const SpaceSpec& space, double eta,
                                                    std::size_t min_keep);

/// Condition-C certificate on ℓ^∞_dim: N = ⌈1/theta⌉ and a_j = 1/N on the
/// first N sets. Sets must be disjoint and each ‖x_j‖_∞ <= 1.
ConditionCCertificate condition_c_certificate_linf(const std::vector<IndexSet>& sets,
                                                   const std::vector<std::vector<double>>& x,
                                                   const Rational& theta);

/// Exact rechecks of stored certificates from the double data they certify.
/// `checked` is false when the norm cannot be evaluated in rational
/// arithmetic (non-integer predual exponent).
struct ExactRecheck {
  bool checked = false;
  bool holds = false;
  std::string achieved;  // rational, as text
};

ExactRecheck exact_recheck_past(const PastCertificate& cert,
                                std::span<const std::span<const double>> functionals);
/// `space` is the space phi lives on (the inner space for row certificates).
ExactRecheck exact_recheck_future(const FutureCertificate& cert, const SpaceSpec& space);

}  // namespace factorlab
