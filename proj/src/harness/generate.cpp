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


#include <cmath>

#include <Eigen/Dense>

#include "factorlab/errors.hpp"
#include "factorlab/harness.hpp"
#include "factorlab/rng.hpp"
#include "internal.hpp"

namespace factorlab {

namespace {

constexpr double kMaxCondition = 1e3;
constexpr int kMaxDraws = 64;

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

DenseMatrix from_eigen(const Eigen::MatrixXd& m) {
  DenseMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = m(r, c);
  return out;
}

// Oblique projection U (V^T U)^{-1} V^T onto span U along ker V^T.
Operator rank_k_projection(std::size_t k, const SpaceSpec& space, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(space.size());
  require(k >= 1 && static_cast<Eigen::Index>(k) <= n, ErrorKind::InvalidArgument,
          "rank must lie in [1, " + std::to_string(n) + "]");
  const auto kk = static_cast<Eigen::Index>(k);
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    const Eigen::MatrixXd U = gaussian(rng, n, kk);
    const Eigen::MatrixXd V = gaussian(rng, n, kk);
    const Eigen::MatrixXd C = V.transpose() * U;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
    const auto& s = svd.singularValues();
    if (s(kk - 1) <= 0.0 || s(0) / s(kk - 1) > kMaxCondition) continue;
    const Eigen::MatrixXd P = U * C.partialPivLu().solve(V.transpose());
    return Operator::square(from_eigen(P), space);
  }
  fail(ErrorKind::InvalidArgument, "no well-conditioned rank-" + std::to_string(k) +
                                       " projection in " + std::to_string(kMaxDraws) + " draws");
}

Operator contraction(double cap, const SpaceSpec& space, Rng& rng, std::uint64_t norm_seed) {
  require(cap >= 0.0 && std::isfinite(cap), ErrorKind::InvalidArgument,
          "norm_cap must be finite and non-negative");
  const std::size_t n = space.size();
  DenseMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
  NormOptions opts;
  opts.seed = norm_seed;
  const double upper = op_norm(m, space, space, opts).upper;
  if (upper > 0.0) m *= cap / upper * (1.0 - 1e-12);
  return Operator::square(std::move(m), space);
}

}  // namespace

Operator generate_operator(const GeneratorSpec& spec, const SpaceSpec& space, std::uint64_t seed) {
  space.validate();
  Rng rng(detail::derive_seed(seed, 1));
  const std::size_t n = space.size();
  using K = GeneratorSpec::Kind;
  switch (spec.kind) {
    case K::identity:
      return Operator::identity(space);
    case K::zero:
      return Operator::diagonal(std::vector<double>(n, 0.0), space);
    case K::scaled_identity:
      require(std::isfinite(spec.scale), ErrorKind::InvalidArgument, "scale must be finite");
      return Operator::diagonal(std::vector<double>(n, spec.scale), space);
    case K::coordinate_projection: {
      require(spec.density >= 0.0 && spec.density <= 1.0, ErrorKind::InvalidArgument,
              "density must lie in [0, 1]");
      std::vector<double> d(n);
      for (double& v : d) v = rng.uniform() < spec.density ? 1.0 : 0.0;
      return Operator::diagonal(std::move(d), space);
    }
    case K::random_rank_k_projection:
      return rank_k_projection(spec.rank, space, rng);
    case K::random_contraction:
      return contraction(spec.norm_cap, space, rng, detail::derive_seed(seed, 2));
    case K::from_file: {
      DenseMatrix m = read_matrix_file(spec.path);
      require(m.rows() == n && m.cols() == n, ErrorKind::DimensionMismatch,
              spec.path + " holds a " + std::to_string(m.rows()) + "x" +
                  std::to_string(m.cols()) + " matrix but " + space.describe() + " needs " +
                  std::to_string(n) + "x" + std::to_string(n));
      return Operator::square(std::move(m), space);
    }
  }
  fail(ErrorKind::InvalidArgument, "unknown generator");
}

}  // namespace factorlab
