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

#include "factorlab/seqspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "factorlab/errors.hpp"
#include "factorlab/simd/kernels.hpp"

namespace factorlab {

namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::InsufficientIndices: return "InsufficientIndices";
    case ErrorKind::BudgetExhausted: return "BudgetExhausted";
    case ErrorKind::NotEnoughSets: return "NotEnoughSets";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::RetentionImpossible: return "RetentionImpossible";
    case ErrorKind::DefectTooLarge: return "DefectTooLarge";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

double conjugate_exponent(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

namespace {

bool valid_exponent(double p) { return p >= 1.0 && !std::isnan(p); }

std::string exponent_str(double p) {
  if (std::isinf(p)) return "inf";
  std::ostringstream os;
  os << p;
  return os.str();
}

}  // namespace

SpaceSpec SpaceSpec::lp(double p, std::size_t dim) {
  SpaceSpec s;
  s.kind = Kind::lp;
  s.p = p;
  s.dim = dim;
  s.validate();
  return s;
}

SpaceSpec SpaceSpec::lp_sum(double outer_p, std::size_t outer_dim, double inner_p,
                            std::size_t dim) {
  SpaceSpec s;
  s.kind = Kind::lp_sum;
  s.p = inner_p;
  s.dim = dim;
  s.outer_p = outer_p;
  s.outer_dim = outer_dim;
  s.validate();
  return s;
}

SpaceSpec SpaceSpec::conjugate() const {
  SpaceSpec s = *this;
  s.p = conjugate_exponent(p);
  if (kind == Kind::lp_sum) s.outer_p = conjugate_exponent(outer_p);
  return s;
}

SpaceSpec SpaceSpec::resized(std::size_t new_outer_dim, std::size_t new_dim) const {
  SpaceSpec s = *this;
  s.dim = new_dim;
  if (kind == Kind::lp_sum) s.outer_dim = new_outer_dim;
  s.validate();
  return s;
}

void SpaceSpec::validate(bool pipeline) const {
  require(valid_exponent(p), ErrorKind::InvalidArgument, "exponent must lie in [1, inf]");
  require(dim >= (pipeline ? 2u : 1u), ErrorKind::InvalidArgument,
          pipeline ? "dim must be at least 2" : "dim must be positive");
  require(K_u >= 1.0 && K_s >= 1.0 && std::isfinite(K_u) && std::isfinite(K_s),
          ErrorKind::InvalidArgument, "basis constants K_u, K_s must be finite and >= 1");
  if (kind == Kind::lp_sum) {
    require(valid_exponent(outer_p), ErrorKind::InvalidArgument,
            "outer exponent must lie in [1, inf]");
    require(outer_dim >= 1, ErrorKind::InvalidArgument, "outer_dim must be positive");
  }
}

std::string SpaceSpec::describe() const {
  std::ostringstream os;
  if (kind == Kind::lp) {
    os << "l^" << exponent_str(p) << "_" << dim;
  } else {
    os << "l^" << exponent_str(outer_p) << "_" << outer_dim << "(l^" << exponent_str(p) << "_"
       << dim << ")";
  }
  return os.str();
}

bool SpaceSpec::same_geometry(const SpaceSpec& other) const {
  if (kind != other.kind || p != other.p) return false;
  return kind == Kind::lp || outer_p == other.outer_p;
}

IndexSet make_index_set(std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return indices;
}

IndexSet index_range(std::size_t first, std::size_t last_exclusive) {
  IndexSet out;
  if (last_exclusive > first) out.reserve(last_exclusive - first);
  for (std::size_t k = first; k < last_exclusive; ++k) out.push_back(k);
  return out;
}

VecRep::VecRep(std::vector<double> c, SpaceSpec s, Side sd)
    : coords(std::move(c)), space(s), side(sd) {
  require(coords.size() == space.size(), ErrorKind::DimensionMismatch,
          "vector has " + std::to_string(coords.size()) + " coordinates, space " +
              space.describe() + " needs " + std::to_string(space.size()));
}

VecRep VecRep::zeros(const SpaceSpec& s, Side sd) {
  return VecRep(std::vector<double>(s.size(), 0.0), s, sd);
}

VecRep VecRep::unit(const SpaceSpec& s, Side sd, std::size_t k) {
  require(k < s.size(), ErrorKind::OutOfRange, "unit vector index out of range");
  VecRep v = zeros(s, sd);
  v.coords[k] = 1.0;
  return v;
}

std::span<const double> VecRep::row(std::size_t i) const {
  require(i < space.rows(), ErrorKind::OutOfRange, "row index out of range");
  return std::span<const double>(coords).subspan(i * space.dim, space.dim);
}

bool precedes(const TwoParamIndex& a, const TwoParamIndex& b) {
  const auto sa = a.i + a.j;
  const auto sb = b.i + b.j;
  return sa < sb || (sa == sb && a.i < b.i);
}

std::uint64_t precede_rank(const TwoParamIndex& idx) {
  require(idx.i >= 1 && idx.j >= 1, ErrorKind::OutOfRange, "two-parameter index is 1-based");
  // Pairs with a strictly smaller diagonal sum s' = 2..s-1 number (s-2)(s-1)/2.
  const u128 s = static_cast<u128>(idx.i) + idx.j;
  const u128 before = (s - 2) * (s - 1) / 2;
  return static_cast<std::uint64_t>(before + idx.i);
}

TwoParamIndex precede_unrank(std::uint64_t k) {
  require(k >= 1, ErrorKind::OutOfRange, "ranks start at 1");
  // Smallest t with t(t+1)/2 >= k; the diagonal sum is then t + 1.
  auto tri = [](u128 t) { return t * (t + 1) / 2; };
  u128 t = static_cast<u128>(
      std::floor((std::sqrt(8.0 * static_cast<double>(k) + 1.0) - 1.0) / 2.0));
  while (t > 0 && tri(t) >= k) --t;
  while (tri(t) < k) ++t;
  const u128 i = k - tri(t - 1);
  const u128 j = t + 1 - i;
  return {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)};
}

double lp_norm(std::span<const double> x, double p) {
  if (x.empty()) return 0.0;
  if (std::isinf(p)) return simd::max_abs(x);
  if (p == 1.0) return simd::abs_sum(x);
  if (p == 2.0) {
    const double ss = simd::sum_sq(x);
    if (ss > 1e-280 && ss < 1e280) return std::sqrt(ss);
  }
  const double m = simd::max_abs(x);
  if (m == 0.0 || std::isinf(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::pow(std::fabs(v) / m, p);
  return m * std::pow(s, 1.0 / p);
}

double norm(const SpaceSpec& space, Side side, std::span<const double> x) {
  require(x.size() == space.size(), ErrorKind::DimensionMismatch,
          "norm: vector length does not match " + space.describe());
  const double inner_p = side == Side::dual ? space.p : conjugate_exponent(space.p);
  if (space.kind == SpaceSpec::Kind::lp) return lp_norm(x, inner_p);
  const double outer = side == Side::dual ? space.outer_p : conjugate_exponent(space.outer_p);
  std::vector<double> row_norms(space.outer_dim);
  for (std::size_t i = 0; i < space.outer_dim; ++i)
    row_norms[i] = lp_norm(x.subspan(i * space.dim, space.dim), inner_p);
  return lp_norm(row_norms, outer);
}

double norm(const VecRep& v) { return norm(v.space, v.side, v.coords); }

double pair(const VecRep& x, const VecRep& f) {
  require(x.side == Side::predual && f.side == Side::dual, ErrorKind::InvalidArgument,
          "pair expects a predual vector and a dual vector");
  require(x.space.size() == f.space.size() && x.space.same_geometry(f.space),
          ErrorKind::DimensionMismatch, "pair: vectors live in different spaces");
  return simd::dot(x.coords, f.coords);
}

VecRep coord_projection(const IndexSet& A, const VecRep& v) {
  VecRep out = VecRep::zeros(v.space, v.side);
  for (std::size_t k : A) {
    require(k < v.coords.size(), ErrorKind::OutOfRange,
            "projection index " + std::to_string(k) + " out of range");
    out.coords[k] = v.coords[k];
  }
  return out;
}

VecRep rect_projection(std::span<const TwoParamIndex> K, const VecRep& y) {
  require(y.space.kind == SpaceSpec::Kind::lp_sum, ErrorKind::InvalidArgument,
          "rect_projection needs a two-parameter space");
  VecRep out = VecRep::zeros(y.space, y.side);
  for (const auto& cell : K) {
    require(cell.i >= 1 && cell.i <= y.space.outer_dim && cell.j >= 1 && cell.j <= y.space.dim,
            ErrorKind::OutOfRange, "rectangle cell outside the grid");
    const std::size_t flat = (cell.i - 1) * y.space.dim + (cell.j - 1);
    out.coords[flat] = y.coords[flat];
  }
  return out;
}

}  // namespace factorlab
