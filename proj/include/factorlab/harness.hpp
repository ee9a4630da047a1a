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

// Experiment driver: JSON run configs in, JSON reports out.
//
// A report is a pure function of its config. Wall time is the one
// exception and is only written when `timing` is set.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "factorlab/annihilate.hpp"
#include "factorlab/factor.hpp"
#include "factorlab/matrix.hpp"
#include "factorlab/opnorm.hpp"
#include "factorlab/seqspace.hpp"

namespace factorlab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct GeneratorSpec {
  enum class Kind {
    identity,
    zero,
    scaled_identity,
    coordinate_projection,
    random_rank_k_projection,
    random_contraction,
    from_file,
  };
  Kind kind = Kind::identity;
  double scale = 1.0;     // scaled_identity
  double density = 0.5;   // coordinate_projection
  std::size_t rank = 1;   // random_rank_k_projection
  double norm_cap = 1.0;  // random_contraction
  std::string path;       // from_file
};

std::string_view to_string(GeneratorSpec::Kind k);

struct RunConfig {
  std::string name;
  SpaceSpec space;
  GeneratorSpec generator;
  std::size_t target_blocks = 0;
  std::optional<std::size_t> min_retained;
  std::optional<std::size_t> reserve;
  std::uint64_t seed = 1;
  PastStrategy strategy = PastStrategy::automatic;
  Tolerances tol;
  NormOptions norm;
  std::size_t identity_samples = 100;
  bool exact = false;
  bool timing = false;
};

/// Parses a config document. Throws Error(Parse) on unknown keys, wrong
/// types or missing required fields.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path);
Json config_to_json(const RunConfig& cfg);

/// Space descriptions: {"kind": "lp", "p": 2, "dim": 8} or
/// {"kind": "lp_sum", "outer_p": 1, "outer_dim": 4, "p": "inf", "dim": 8}.
/// Exponents are numbers or the string "inf".
SpaceSpec parse_space(const Json& doc);
Json space_to_json(const SpaceSpec& s);
/// Compact form "lp:P:DIM" or "lp_sum:OUTER_P:OUTER_DIM:P:DIM".
SpaceSpec parse_space_string(std::string_view text);

/// Deterministic in (spec, space, seed). Dense generators build a square
/// matrix on `space`; diagonal ones use diagonal storage.
Operator generate_operator(const GeneratorSpec& spec, const SpaceSpec& space, std::uint64_t seed);

struct RunReport {
  Json doc;
  bool pass = false;
  std::string stage;       // last stage reached, or the failing stage
  bool assembled = false;  // the three numbers below are meaningful
  double residual = 0.0;
  double norm_product = 0.0;
  double defect = 0.0;
  std::string dump() const;  // canonical serialization, newline terminated
};

RunReport run(const RunConfig& cfg);

/// A batch document either lists configs ({"configs": [...]}) or sweeps
/// seeds over a base config ({"base": {...}, "seeds": {"first": s, "count": n}}).
std::vector<RunConfig> expand_batch(const Json& doc);

struct BatchResult {
  std::vector<RunReport> reports;  // config order
  Json summary;
  bool all_pass = false;
};

/// Runs every config, `jobs` at a time (0 = hardware concurrency). The
/// summary is reduced in config order, so it does not depend on `jobs`.
BatchResult batch(const std::vector<RunConfig>& configs, std::size_t jobs = 0);

/// Randomized self-check of the annihilation routines on small inputs:
/// every returned certificate is recomputed from scratch, future sets are
/// checked for maximality against the sorted-prefix criterion, and
/// best_pair failures are confirmed by scanning every pair.
struct LemmaSuiteResult {
  std::size_t cases = 0;
  std::size_t past_checked = 0;
  std::size_t future_checked = 0;
  std::size_t discrepancies = 0;
  std::vector<std::string> messages;  // first few discrepancies
};
LemmaSuiteResult check_lemmas(std::uint64_t seed, std::size_t cases, std::size_t max_dim);

}  // namespace factorlab
