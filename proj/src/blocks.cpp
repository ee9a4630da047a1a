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

#include "factorlab/blocks.hpp"

#include <algorithm>
#include <cmath>

#include "factorlab/errors.hpp"
#include "factorlab/opnorm.hpp"
#include "factorlab/rational.hpp"
#include "factorlab/simd/kernels.hpp"

namespace factorlab {

EtaSchedule EtaSchedule::make(double K_u, std::size_t count) {
  require(K_u >= 1.0 && std::isfinite(K_u), ErrorKind::InvalidArgument, "K_u must be >= 1");
  EtaSchedule s;
  s.K_u = K_u;
  s.values.resize(count);
  for (std::size_t i = 1; i <= count; ++i)
    s.values[i - 1] = std::ldexp(1.0, -2 * static_cast<int>(i + 1)) / K_u;
  return s;
}

double EtaSchedule::at(std::size_t i) const {
  require(i >= 1 && i <= values.size(), ErrorKind::OutOfRange, "eta index out of range");
  return values[i - 1];
}

BudgetPlan plan_budget(const SpaceSpec& space, std::size_t target_blocks,
                       std::optional<std::size_t> reserve) {
  require(target_blocks >= 1, ErrorKind::InvalidArgument, "target_blocks must be at least 1");
  BudgetPlan plan;
  plan.target_blocks = target_blocks;
  plan.reserve = reserve.value_or(4 * target_blocks);
  plan.min_keep.resize(target_blocks);
  for (std::size_t i = 1; i <= target_blocks; ++i)
    plan.min_keep[i - 1] = 2 * (target_blocks - i) + plan.reserve;
  plan.required_dim = 2 * target_blocks + plan.reserve;
  if (space.kind == SpaceSpec::Kind::lp_sum) {
    for (std::uint64_t k = 1; k <= target_blocks; ++k)
      plan.required_rows = std::max<std::size_t>(plan.required_rows, precede_unrank(k).i);
    if (space.outer_dim < plan.required_rows) {
      Error e(ErrorKind::DimensionTooSmall,
              std::to_string(target_blocks) + " blocks reach row " +
                  std::to_string(plan.required_rows) + " but outer_dim is " +
                  std::to_string(space.outer_dim));
      e.suggested_dim = std::max(space.dim, plan.required_dim);
      throw e;
    }
  }
  if (space.dim < plan.required_dim) {
    Error e(ErrorKind::DimensionTooSmall,
            std::to_string(target_blocks) + " blocks with reserve " +
                std::to_string(plan.reserve) + " need dim >= " +
                std::to_string(plan.required_dim) + ", got " + std::to_string(space.dim));
    e.suggested_dim = plan.required_dim;
    throw e;
  }
  return plan;
}

std::vector<double> BlockSystem::synth(std::size_t i) const {
  require(i < blocks.size(), ErrorKind::OutOfRange, "block index out of range");
  std::vector<double> v(space.size(), 0.0);
  v[blocks[i].flat0] = 1.0;
  v[blocks[i].flat1] = -1.0;
  return v;
}

namespace {

std::vector<double> two_point(const SpaceSpec& space) {
  std::vector<double> v(space.size(), 0.0);
  v[0] = 1.0;
  v[1] = -1.0;
  return v;
}

double pairing(const Block& b, std::span<const double> y) { return y[b.flat0] - y[b.flat1]; }

void check_operator(const Operator& T, const SpaceSpec& space) {
  require(T.rows() == space.size() && T.cols() == space.size(), ErrorKind::DimensionMismatch,
          "operator is " + std::to_string(T.rows()) + "x" + std::to_string(T.cols()) +
              " but the space " + space.describe() + " has " + std::to_string(space.size()) +
              " coordinates");
}

Block make_block(const SpaceSpec& space, std::size_t row, std::size_t k0, std::size_t k1,
                 TwoParamIndex label, std::uint64_t rank) {
  Block b;
  b.row = row;
  b.k0 = k0;
  b.k1 = k1;
  b.flat0 = row * space.dim + k0;
  b.flat1 = row * space.dim + k1;
  b.label = label;
  b.rank = rank;
  return b;
}

IndexSet above(const IndexSet& s, std::size_t floor_exclusive) {
  IndexSet out;
  for (std::size_t k : s)
    if (k > floor_exclusive) out.push_back(k);
  return out;
}

// The construction needs Σ_j |<probe_i, T synth_j>| <= eta_i. The past
// selection bounds each term, so each gets an equal share.
double past_share(double eta, std::size_t earlier) {
  return earlier == 0 ? eta : eta / static_cast<double>(earlier);
}

}  // namespace

double BlockSystem::synth_norm() const {
  return norm(space, Side::dual, blocks.empty() ? two_point(space) : synth(0));
}

double BlockSystem::probe_norm() const {
  return norm(space, Side::predual, blocks.empty() ? two_point(space) : probe(0));
}

BlockSystem build_blocks_1d(const Operator& T, const SpaceSpec& space, std::size_t target_blocks,
                            const BuildOptions& opts) {
  require(space.kind == SpaceSpec::Kind::lp, ErrorKind::InvalidArgument,
          "build_blocks_1d needs an ℓ^p space");
  space.validate(true);
  check_operator(T, space);

  BlockSystem sys;
  sys.space = space;
  sys.plan = plan_budget(space, target_blocks, opts.reserve);
  sys.eta = EtaSchedule::make(space.K_u, target_blocks);
  sys.strategy = opts.strategy;

  IndexSet A = index_range(0, space.dim);
  sys.admissible.push_back({A});
  std::vector<std::vector<double>> images;  // T synth_j

  for (std::size_t i = 1; i <= target_blocks; ++i) {
    try {
      const double eta = sys.eta.at(i);
      std::vector<std::span<const double>> fs(images.begin(), images.end());
      PastCertificate pc = past_annihilate(A, fs, 1, past_share(eta, images.size()), opts.strategy);
      const Block b = make_block(space, 0, pc.F[0], pc.F[1], {1, i}, i);

      double sum = 0.0;
      for (const auto& y : images) sum += std::fabs(pairing(b, y));
      if (!(sum <= eta))
        fail(ErrorKind::InsufficientIndices,
             "past sum " + std::to_string(sum) + " exceeds eta " + std::to_string(eta));

      sys.blocks.push_back(b);
      const auto s = sys.synth(i - 1);
      images.push_back(T.apply(s));
      const auto phi = T.apply_transpose(s);
      FutureCertificate fc =
          future_annihilate(above(A, b.k1), phi, space, eta, sys.plan.min_keep[i - 1]);
      A = fc.A;

      sys.past.push_back(std::move(pc));
      sys.past_sums.push_back(sum);
      sys.future.push_back({std::move(fc)});
      sys.admissible.push_back({A});
    } catch (Error& e) {
      e.step = i;
      throw;
    }
  }
  return sys;
}

BlockSystem build_blocks_2d(const Operator& T, const SpaceSpec& space, std::size_t target_blocks,
                            const BuildOptions& opts) {
  require(space.kind == SpaceSpec::Kind::lp_sum, ErrorKind::InvalidArgument,
          "build_blocks_2d needs a two-parameter space");
  space.validate(true);
  check_operator(T, space);

  BlockSystem sys;
  sys.space = space;
  sys.two_param = true;
  sys.plan = plan_budget(space, target_blocks, opts.reserve);
  sys.eta = EtaSchedule::make(space.K_u, target_blocks);
  sys.strategy = opts.strategy;

  const std::size_t rows = space.outer_dim;
  std::vector<IndexSet> J(rows, index_range(0, space.dim));
  sys.admissible.push_back(J);

  // Last rank hosted by each row; rows without later blocks need no budget.
  std::vector<std::uint64_t> last_rank(rows, 0);
  for (std::uint64_t k = 1; k <= target_blocks; ++k) last_rank[precede_unrank(k).i - 1] = k;

  std::vector<VecRep> images;  // T synth_l
  std::size_t running_max = 0;

  for (std::uint64_t K = 1; K <= target_blocks; ++K) {
    const TwoParamIndex label = precede_unrank(K);
    const std::size_t r = label.i - 1;
    try {
      const double eta = sys.eta.at(K);
      PastCertificate pc =
          past_annihilate_2d(r, J[r], images, 1, past_share(eta, images.size()), opts.strategy);
      const Block b = make_block(space, r, pc.F[0], pc.F[1], label, K);

      double sum = 0.0;
      for (const auto& y : images) sum += std::fabs(pairing(b, y.coords));
      if (!(sum <= eta))
        fail(ErrorKind::InsufficientIndices,
             "past sum " + std::to_string(sum) + " exceeds eta " + std::to_string(eta));

      sys.blocks.push_back(b);
      const auto s = sys.synth(K - 1);
      images.emplace_back(T.apply(s), space, Side::dual);
      const auto phi = T.apply_transpose(s);

      running_max = std::max(running_max, b.k1);
      std::vector<IndexSet> lambdas(rows);
      std::vector<std::size_t> keep(rows, 0);
      for (std::size_t i = 0; i < rows; ++i) {
        lambdas[i] = above(J[i], running_max);
        if (last_rank[i] > K) keep[i] = sys.plan.min_keep[K - 1];
      }
      auto fcs = future_annihilate_2d(lambdas, phi, space, eta, keep);
      for (std::size_t i = 0; i < rows; ++i) J[i] = fcs[i].A;

      sys.past.push_back(std::move(pc));
      sys.past_sums.push_back(sum);
      sys.future.push_back(std::move(fcs));
      sys.admissible.push_back(J);
    } catch (Error& e) {
      e.step = K;
      if (!e.row) e.row = r;
      throw;
    }
  }
  return sys;
}

std::vector<Check> verify_blocks(const Operator& T, const BlockSystem& sys) {
  const std::size_t t = sys.size();
  const SpaceSpec& space = sys.space;
  std::vector<Check> out;

  {
    std::vector<std::size_t> used;
    for (const auto& b : sys.blocks) {
      used.push_back(b.flat0);
      used.push_back(b.flat1);
    }
    std::sort(used.begin(), used.end());
    const auto collisions = static_cast<double>(
        used.size() - static_cast<std::size_t>(std::unique(used.begin(), used.end()) - used.begin()));
    out.push_back({"blocks_disjoint", collisions, 0.0, collisions == 0.0, "repeated coordinates"});
  }

  {
    double dev = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
      const auto p = sys.probe(i);
      for (std::size_t j = 0; j < t; ++j) {
        const double want = i == j ? 2.0 : 0.0;
        dev = std::max(dev, std::fabs(simd::dot(p, sys.synth(j)) - want));
      }
    }
    out.push_back({"block_biorthogonality", dev, 0.0, dev == 0.0, "max |<b_i, b_j*> - 2 delta_ij|"});
  }

  {
    std::size_t bad = 0;
    for (std::size_t s = 0; s < t; ++s) {
      const auto& before = sys.admissible[s];
      const auto& after = sys.admissible[s + 1];
      for (std::size_t r = 0; r < before.size(); ++r)
        if (!std::includes(before[r].begin(), before[r].end(), after[r].begin(), after[r].end()))
          ++bad;
      const Block& b = sys.blocks[s];
      const auto& row_before = before[b.row];
      const auto& row_after = after[b.row];
      for (std::size_t k : {b.k0, b.k1}) {
        if (!std::binary_search(row_before.begin(), row_before.end(), k)) ++bad;
        if (std::binary_search(row_after.begin(), row_after.end(), k)) ++bad;
      }
    }
    out.push_back({"admissible_nesting", static_cast<double>(bad), 0.0, bad == 0,
                   "nesting or membership violations"});
  }

  {
    std::size_t bad = 0;
    std::size_t running = 0;
    for (std::size_t s = 0; s < t; ++s) {
      const Block& b = sys.blocks[s];
      if (b.k0 >= b.k1) ++bad;
      if (s > 0 && b.k0 <= running) ++bad;
      running = std::max(running, b.k1);
    }
    out.push_back({"support_monotone", static_cast<double>(bad), 0.0, bad == 0,
                   "blocks not beyond every earlier inner index"});
  }

  std::vector<std::vector<double>> images(t);
  for (std::size_t j = 0; j < t; ++j) images[j] = T.apply(sys.synth(j));

  {
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t i = 1; i < t; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < i; ++j) sum += std::fabs(pairing(sys.blocks[i], images[j]));
      const double ratio = sum / sys.eta.values[i];
      if (ratio > worst) {
        worst = ratio;
        at = i + 1;
      }
    }
    out.push_back({"past_off_diagonal", worst, 1.0, worst <= 1.0,
                   "max_i sum_{j<i} |<b_i, T b_j*>| / eta_i" +
                       (at ? " (worst at step " + std::to_string(at) + ")" : std::string())});
  }

  {
    double worst = 0.0;
    std::size_t at = 0;
    const SpaceSpec row_space = sys.two_param ? SpaceSpec::lp(space.p, space.dim) : space;
    for (std::size_t i = 0; i < t; ++i) {
      const auto phi = T.apply_transpose(sys.probe(i));
      const auto& next = sys.admissible[i + 1];
      for (std::size_t r = 0; r < next.size(); ++r) {
        const auto slice = std::span<const double>(phi).subspan(r * space.dim, space.dim);
        const double v = restricted_predual_norm(slice, next[r], row_space) / sys.eta.values[i];
        if (v > worst) {
          worst = v;
          at = i + 1;
        }
      }
    }
    out.push_back({"future_annihilation", worst, 1.0, worst <= 1.0,
                   "max_i max_row ‖T^T b_i restricted to A_{i+1}‖ / eta_i" +
                       (at ? " (worst at step " + std::to_string(at) + ")" : std::string())});
  }

  {
    double sum = 0.0;
    for (double v : sys.eta.values) sum += v;
    const double bound = sys.eta.infinite_sum();
    out.push_back({"eta_schedule_sum", sum, bound, sum <= bound, "sum of the eta values used"});
  }
  return out;
}

ExactSummary exact_recheck(const Operator& T, const BlockSystem& sys) {
  ExactSummary out;
  const std::size_t t = sys.size();
  std::vector<std::vector<double>> images(t);
  for (std::size_t j = 0; j < t; ++j) images[j] = T.apply(sys.synth(j));
  const SpaceSpec row_space = sys.two_param ? SpaceSpec::lp(sys.space.p, sys.space.dim) : sys.space;

  for (std::size_t i = 0; i < t; ++i) {
    const auto& pc = sys.past[i];
    const std::size_t r = sys.blocks[i].row;
    std::vector<std::span<const double>> fs;
    for (std::size_t j = 0; j < i; ++j) {
      std::span<const double> y(images[j]);
      fs.push_back(sys.two_param ? y.subspan(r * sys.space.dim, sys.space.dim) : y);
    }
    const auto pr = exact_recheck_past(pc, fs);
    ++out.checked;
    if (pr.holds) ++out.held;

    Rational sum = 0;
    for (std::size_t j = 0; j < i; ++j)
      sum += abs(to_rational(images[j][sys.blocks[i].flat0]) -
                 to_rational(images[j][sys.blocks[i].flat1]));
    ++out.checked;
    if (sum <= to_rational(sys.eta.values[i])) ++out.held;

    for (const auto& fc : sys.future[i]) {
      const auto fr = exact_recheck_future(fc, row_space);
      if (!fr.checked) {
        ++out.skipped;
        continue;
      }
      ++out.checked;
      if (fr.holds) ++out.held;
    }
  }
  return out;
}

}  // namespace factorlab
