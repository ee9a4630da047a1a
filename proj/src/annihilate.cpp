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

#include "factorlab/annihilate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include "factorlab/errors.hpp"
#include "factorlab/opnorm.hpp"

namespace factorlab {

std::string_view to_string(PastStrategy s) {
  switch (s) {
    case PastStrategy::automatic: return "auto";
    case PastStrategy::bucket: return "bucket";
    case PastStrategy::best_pair: return "best_pair";
  }
  return "auto";
}

PastStrategy parse_past_strategy(std::string_view text) {
  if (text == "auto") return PastStrategy::automatic;
  if (text == "bucket") return PastStrategy::bucket;
  if (text == "best_pair") return PastStrategy::best_pair;
  fail(ErrorKind::Parse, "unknown strategy '" + std::string(text) +
                             "' (expected auto, bucket or best_pair)");
}

double worst_zero_sum_pairing(const IndexSet& F,
                              std::span<const std::span<const double>> functionals) {
  require(F.size() % 2 == 0, ErrorKind::InvalidArgument, "F must have even cardinality");
  const std::size_t m = F.size() / 2;
  double worst = 0.0;
  std::vector<double> vals(F.size());
  for (const auto& f : functionals) {
    for (std::size_t t = 0; t < F.size(); ++t) vals[t] = f[F[t]];
    std::sort(vals.begin(), vals.end());
    double hi = 0.0;
    double lo = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      lo += vals[t];
      hi += vals[F.size() - 1 - t];
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

namespace {

using Functionals = std::span<const std::span<const double>>;

std::vector<int> alternating_signs(std::size_t n) {
  std::vector<int> s(n);
  for (std::size_t t = 0; t < n; ++t) s[t] = t % 2 == 0 ? 1 : -1;
  return s;
}

// Scan pairs in lexicographic order; the first one whose discrepancy is
// within eta for every functional wins. The first functional screens
// candidates cheaply before the full check.
std::optional<std::pair<std::size_t, std::size_t>> first_pair(const IndexSet& lambda0,
                                                               Functionals fs, double eta) {
  if (fs.empty()) return std::pair{lambda0[0], lambda0[1]};
  const auto& lead = fs[0];
  for (std::size_t a = 0; a < lambda0.size(); ++a) {
    const std::size_t k = lambda0[a];
    for (std::size_t b = a + 1; b < lambda0.size(); ++b) {
      const std::size_t k2 = lambda0[b];
      if (!(std::fabs(lead[k] - lead[k2]) <= eta)) continue;
      bool ok = true;
      for (std::size_t j = 1; j < fs.size() && ok; ++j)
        ok = std::fabs(fs[j][k] - fs[j][k2]) <= eta;
      if (ok) return std::pair{k, k2};
    }
  }
  return std::nullopt;
}

// Bucket key of the half-open interval [w(l-1), wl) holding v. Values whose
// key would overflow fall back to exact-value classes.
std::pair<int, double> bucket_key(double v, double scale) {
  const double t = v * scale;
  if (std::isfinite(t)) return {0, std::floor(t)};
  return {1, v};
}

struct BucketSearch {
  const IndexSet& lambda0;
  Functionals fs;
  std::size_t need;
  double scale;
  std::size_t budget = 200000;

  // Depth-first over the chain of buckets, largest bucket first, ties by
  // smallest member. Returns the final bucket of a successful chain.
  std::optional<IndexSet> chain(std::size_t level, const IndexSet& members) {
    if (members.size() < need) return std::nullopt;
    if (level == fs.size()) return members;
    if (budget == 0) return std::nullopt;
    --budget;
    std::map<std::pair<int, double>, IndexSet> groups;
    for (std::size_t k : members) groups[bucket_key(fs[level][k], scale)].push_back(k);
    std::vector<const IndexSet*> viable;
    for (const auto& [key, g] : groups)
      if (g.size() >= need) viable.push_back(&g);
    std::sort(viable.begin(), viable.end(), [](const IndexSet* x, const IndexSet* y) {
      if (x->size() != y->size()) return x->size() > y->size();
      return x->front() < y->front();
    });
    for (const IndexSet* g : viable)
      if (auto found = chain(level + 1, *g)) return found;
    return std::nullopt;
  }
};

void check_functionals(const IndexSet& lambda0, Functionals fs) {
  if (lambda0.empty()) return;
  for (const auto& f : fs)
    require(lambda0.back() < f.size(), ErrorKind::OutOfRange,
            "candidate index " + std::to_string(lambda0.back()) +
                " exceeds a functional of length " + std::to_string(f.size()));
}

}  // namespace

PastCertificate past_annihilate(const IndexSet& lambda0_in, Functionals functionals,
                                std::size_t m, double eta, PastStrategy strategy) {
  require(m >= 1, ErrorKind::InvalidArgument, "m must be at least 1");
  require(eta > 0.0, ErrorKind::InvalidArgument, "eta must be positive");
  const IndexSet lambda0 = make_index_set(lambda0_in);
  check_functionals(lambda0, functionals);
  if (strategy == PastStrategy::automatic)
    strategy = m == 1 ? PastStrategy::best_pair : PastStrategy::bucket;
  require(strategy != PastStrategy::best_pair || m == 1, ErrorKind::InvalidArgument,
          "best_pair selects a single pair (m = 1)");
  if (lambda0.size() < 2 * m)
    fail(ErrorKind::InsufficientIndices, "only " + std::to_string(lambda0.size()) +
                                             " candidate indices for a block of size " +
                                             std::to_string(2 * m));

  PastCertificate cert;
  cert.eta = eta;
  cert.functional_count = functionals.size();
  cert.strategy = strategy;
  if (strategy == PastStrategy::best_pair) {
    const auto pr = first_pair(lambda0, functionals, eta);
    if (!pr)
      fail(ErrorKind::InsufficientIndices,
           "no pair among " + std::to_string(lambda0.size()) +
               " candidates has discrepancy within eta = " + std::to_string(eta));
    cert.F = {pr->first, pr->second};
  } else {
    const double scale = static_cast<double>(2 * m) / eta;
    BucketSearch search{lambda0, functionals, 2 * m, scale};
    const auto bucket = search.chain(0, lambda0);
    if (!bucket)
      fail(ErrorKind::InsufficientIndices,
           "no bucket chain of width eta/2m holds " + std::to_string(2 * m) + " of the " +
               std::to_string(lambda0.size()) + " candidates");
    cert.F.assign(bucket->begin(), bucket->begin() + static_cast<std::ptrdiff_t>(2 * m));
  }
  cert.signs = alternating_signs(cert.F.size());
  cert.achieved = worst_zero_sum_pairing(cert.F, functionals);
  if (!(cert.achieved <= eta))
    fail(ErrorKind::InsufficientIndices,
         "selected indices miss eta after rounding (achieved " + std::to_string(cert.achieved) +
             ")");
  return cert;
}

PastCertificate past_annihilate(const IndexSet& lambda0, std::span<const VecRep> functionals,
                                std::size_t m, double eta, PastStrategy strategy) {
  std::vector<std::span<const double>> fs;
  fs.reserve(functionals.size());
  for (const auto& f : functionals) {
    require(f.side == Side::dual, ErrorKind::InvalidArgument,
            "past_annihilate expects dual-side functionals");
    if (!fs.empty())
      require(f.space == functionals[0].space, ErrorKind::DimensionMismatch,
              "functionals must share one space");
    fs.emplace_back(f.coords);
  }
  return past_annihilate(lambda0, fs, m, eta, strategy);
}

PastCertificate past_annihilate_2d(std::size_t row, const IndexSet& lambda0,
                                   std::span<const VecRep> vectors, std::size_t M, double eta,
                                   PastStrategy strategy) {
  std::vector<std::span<const double>> slices;
  slices.reserve(vectors.size());
  for (const auto& y : vectors) {
    require(y.space.kind == SpaceSpec::Kind::lp_sum, ErrorKind::InvalidArgument,
            "past_annihilate_2d expects two-parameter vectors");
    if (!slices.empty())
      require(y.space == vectors[0].space, ErrorKind::DimensionMismatch,
              "vectors must share one space");
    require(row < y.space.outer_dim, ErrorKind::OutOfRange, "row out of range");
    slices.push_back(y.row(row));
  }
  PastCertificate cert = past_annihilate(lambda0, slices, M, eta, strategy);
  cert.row = row;
  return cert;
}

FutureCertificate future_annihilate(const IndexSet& lambda_in, std::span<const double> phi,
                                    const SpaceSpec& space, double eta, std::size_t min_keep) {
  require(space.kind == SpaceSpec::Kind::lp, ErrorKind::InvalidArgument,
          "future_annihilate works on one ℓ^p row; use future_annihilate_2d for sums");
  require(phi.size() == space.size(), ErrorKind::DimensionMismatch,
          "functional length does not match " + space.describe());
  require(eta > 0.0, ErrorKind::InvalidArgument, "eta must be positive");
  const IndexSet lambda = make_index_set(lambda_in);
  if (!lambda.empty())
    require(lambda.back() < phi.size(), ErrorKind::OutOfRange,
            "candidate index " + std::to_string(lambda.back()) + " out of range");

  std::vector<std::size_t> order(lambda.begin(), lambda.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::fabs(phi[x]) < std::fabs(phi[y]);
  });
  std::vector<double> sorted(order.size());
  for (std::size_t t = 0; t < order.size(); ++t) sorted[t] = std::fabs(phi[order[t]]);

  // The predual norm of an ascending prefix grows with its length, so the
  // longest feasible prefix is found by bisection.
  const double q = conjugate_exponent(space.p);
  auto prefix_ok = [&](std::size_t len) {
    return lp_norm(std::span<const double>(sorted).first(len), q) <= eta;
  };
  std::size_t lo = 0;
  std::size_t hi = sorted.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (prefix_ok(mid))
      lo = mid;
    else
      hi = mid - 1;
  }

  FutureCertificate cert;
  cert.eta = eta;
  cert.phi.assign(phi.begin(), phi.end());
  std::size_t len = lo;
  for (;;) {
    cert.A = make_index_set(std::vector<std::size_t>(order.begin(), order.begin() +
                                                         static_cast<std::ptrdiff_t>(len)));
    cert.achieved = restricted_predual_norm(phi, cert.A, space);
    if (cert.achieved <= eta || len == 0) break;
    --len;  // summation order differs from the prefix; give up the largest
  }
  if (cert.A.size() < min_keep) {
    fail(ErrorKind::BudgetExhausted,
         "only " + std::to_string(cert.A.size()) + " of " + std::to_string(lambda.size()) +
             " candidates fit within eta = " + std::to_string(eta) + ", need " +
             std::to_string(min_keep));
  }
  return cert;
}

std::vector<FutureCertificate> future_annihilate_2d(const std::vector<IndexSet>& lambdas,
                                                    std::span<const double> phi,
                                                    const SpaceSpec& space, double eta,
                                                    std::span<const std::size_t> min_keep) {
  require(space.kind == SpaceSpec::Kind::lp_sum, ErrorKind::InvalidArgument,
          "future_annihilate_2d expects a two-parameter space");
  require(phi.size() == space.size(), ErrorKind::DimensionMismatch,
          "functional length does not match " + space.describe());
  require(lambdas.size() == space.outer_dim && min_keep.size() == space.outer_dim,
          ErrorKind::DimensionMismatch, "need one admissible set and budget per row");
  const SpaceSpec inner = SpaceSpec::lp(space.p, space.dim);
  std::vector<FutureCertificate> out;
  out.reserve(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    try {
      out.push_back(
          future_annihilate(lambdas[i], phi.subspan(i * space.dim, space.dim), inner, eta,
                            min_keep[i]));
    } catch (Error& e) {
      if (e.kind() == ErrorKind::BudgetExhausted) e.row = i;
      throw;
    }
    out.back().row = i;
  }
  return out;
}

std::vector<FutureCertificate> future_annihilate_2d(const std::vector<IndexSet>& lambdas,
                                                    std::span<const double> phi,
                                                    const SpaceSpec& space, double eta,
                                                    std::size_t min_keep) {
  const std::vector<std::size_t> keep(lambdas.size(), min_keep);
  return future_annihilate_2d(lambdas, phi, space, eta, keep);
}

ConditionCCertificate condition_c_certificate_linf(const std::vector<IndexSet>& sets,
                                                   const std::vector<std::vector<double>>& x,
                                                   const Rational& theta) {
  require(theta > 0, ErrorKind::InvalidArgument, "theta must be positive");
  require(sets.size() == x.size(), ErrorKind::DimensionMismatch,
          "need one vector per index set");
  const BigInt n_big = ceil(Rational(1) / theta);
  require(n_big <= BigInt(std::numeric_limits<std::uint32_t>::max()), ErrorKind::InvalidArgument,
          "theta is too small");
  const auto N = static_cast<std::size_t>(n_big);
  if (sets.size() < N)
    fail(ErrorKind::NotEnoughSets, "theta = " + to_string(theta) + " needs N = " +
                                       std::to_string(N) + " disjoint sets, got " +
                                       std::to_string(sets.size()));

  const std::size_t dim = x.empty() ? 0 : x[0].size();
  std::vector<char> seen(dim, 0);
  for (std::size_t j = 0; j < sets.size(); ++j) {
    require(x[j].size() == dim, ErrorKind::DimensionMismatch, "vectors differ in length");
    for (double v : x[j])
      require(std::fabs(v) <= 1.0, ErrorKind::InvalidArgument, "vectors must have sup norm <= 1");
    for (std::size_t k : sets[j]) {
      require(k < dim, ErrorKind::OutOfRange, "set index out of range");
      require(!seen[k], ErrorKind::InvalidArgument, "index sets must be pairwise disjoint");
      seen[k] = 1;
    }
  }

  ConditionCCertificate cert;
  cert.sets = sets;
  cert.theta = theta;
  cert.N = N;
  const Rational share(1, static_cast<long long>(N));
  cert.a.assign(sets.size(), Rational(0));
  cert.achieved = 0;
  // Disjoint supports: coordinate k of Σ a_j P_{A_j} x_j is a_j x_j[k].
  for (std::size_t j = 0; j < N; ++j) {
    cert.a[j] = share;
    for (std::size_t k : sets[j]) {
      const Rational v = abs(share * to_rational(x[j][k]));
      if (v > cert.achieved) cert.achieved = v;
    }
  }
  return cert;
}

ExactRecheck exact_recheck_past(const PastCertificate& cert, Functionals functionals) {
  ExactRecheck r;
  r.checked = true;
  const std::size_t m = cert.F.size() / 2;
  Rational worst = 0;
  std::vector<Rational> vals(cert.F.size());
  for (const auto& f : functionals) {
    for (std::size_t t = 0; t < cert.F.size(); ++t) vals[t] = to_rational(f[cert.F[t]]);
    std::sort(vals.begin(), vals.end());
    Rational gap = 0;
    for (std::size_t t = 0; t < m; ++t) gap += vals[cert.F.size() - 1 - t] - vals[t];
    if (gap > worst) worst = gap;
  }
  r.holds = worst <= to_rational(cert.eta);
  r.achieved = to_string(worst);
  return r;
}

ExactRecheck exact_recheck_future(const FutureCertificate& cert, const SpaceSpec& space) {
  ExactRecheck r;
  std::vector<double> vals;
  vals.reserve(cert.A.size());
  for (std::size_t k : cert.A) vals.push_back(cert.phi.at(k));
  const double q = conjugate_exponent(space.p);
  const Rational eta = to_rational(cert.eta);
  if (q == 1.0) {
    const Rational s = abs_sum(vals);
    r = {true, s <= eta, to_string(s)};
  } else if (std::isinf(q)) {
    const Rational s = max_abs(vals);
    r = {true, s <= eta, to_string(s)};
  } else if (q == std::floor(q) && q <= 64.0) {
    const auto e = static_cast<unsigned>(q);
    const Rational s = abs_power_sum(vals, e);
    r = {true, s <= pow(eta, e), "(" + to_string(s) + ")^(1/" + std::to_string(e) + ")"};
  }
  return r;
}

}  // namespace factorlab
