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


#include <algorithm>
#include <cmath>
#include <sstream>

#include "factorlab/errors.hpp"
#include "factorlab/harness.hpp"
#include "factorlab/rng.hpp"

namespace factorlab {

namespace {

constexpr double kTol = 1e-9;

// Values drawn from a coarse grid so that exact and near collisions occur.
double grid_value(Rng& rng, double spread) {
  switch (rng.below(4)) {
    case 0: return 0.0;
    case 1: return spread * (static_cast<double>(rng.below(9)) - 4.0) / 4.0;
    default: return rng.uniform(-spread, spread);
  }
}

IndexSet random_subset(Rng& rng, std::size_t n, std::size_t min_size) {
  IndexSet s;
  for (std::size_t k = 0; k < n; ++k)
    if (rng.uniform() < 0.7) s.push_back(k);
  for (std::size_t k = 0; s.size() < min_size && k < n; ++k) {
    if (std::binary_search(s.begin(), s.end(), k)) continue;
    s.insert(std::lower_bound(s.begin(), s.end(), k), k);
  }
  return s;
}

double restricted_lq(std::span<const double> phi, const IndexSet& A, double q) {
  std::vector<double> v;
  v.reserve(A.size());
  for (std::size_t k : A) v.push_back(phi[k]);
  return lp_norm(v, q);
}

struct Suite {
  LemmaSuiteResult res;
  void discrepancy(const std::string& what) {
    ++res.discrepancies;
    if (res.messages.size() < 10) res.messages.push_back(what);
  }
};

void past_case(Suite& s, Rng& rng, std::size_t n, std::size_t case_no) {
  const std::size_t m = 1 + rng.below(2);
  const std::size_t nf = rng.below(4);
  const double spread = rng.uniform() < 0.5 ? 1.0 : 0.05;
  std::vector<std::vector<double>> data(nf, std::vector<double>(n));
  for (auto& f : data)
    for (double& v : f) v = grid_value(rng, spread);
  std::vector<std::span<const double>> fs(data.begin(), data.end());
  const IndexSet lambda0 = random_subset(rng, n, 2 * m);
  const double eta = std::ldexp(1.0, -static_cast<int>(1 + rng.below(8)));
  PastStrategy strategy = PastStrategy::automatic;
  if (m == 1 && rng.uniform() < 0.5) strategy = PastStrategy::best_pair;
  if (rng.uniform() < 0.3) strategy = PastStrategy::bucket;
  const PastStrategy effective =
      strategy == PastStrategy::automatic ? (m == 1 ? PastStrategy::best_pair : PastStrategy::bucket)
                                          : strategy;

  std::ostringstream tag;
  tag << "case " << case_no << " past (n=" << n << ", m=" << m << ", eta=" << eta << "): ";

  // First feasible pair in lexicographic order, by direct scan.
  auto scan_pair = [&]() -> std::optional<std::pair<std::size_t, std::size_t>> {
    for (std::size_t a = 0; a < lambda0.size(); ++a)
      for (std::size_t b = a + 1; b < lambda0.size(); ++b) {
        bool ok = true;
        for (const auto& f : data) ok = ok && std::fabs(f[lambda0[a]] - f[lambda0[b]]) <= eta;
        if (ok) return std::pair{lambda0[a], lambda0[b]};
      }
    return std::nullopt;
  };

  try {
    const PastCertificate c = past_annihilate(lambda0, fs, m, eta, strategy);
    ++s.res.past_checked;
    if (c.F.size() != 2 * m || c.signs.size() != 2 * m)
      return s.discrepancy(tag.str() + "wrong block size");
    int sign_sum = 0;
    for (std::size_t t = 0; t < c.F.size(); ++t) {
      if (!std::binary_search(lambda0.begin(), lambda0.end(), c.F[t]))
        return s.discrepancy(tag.str() + "index outside the candidates");
      if (t > 0 && c.F[t] <= c.F[t - 1]) return s.discrepancy(tag.str() + "F not strictly sorted");
      if (std::abs(c.signs[t]) != 1) return s.discrepancy(tag.str() + "sign not +-1");
      sign_sum += c.signs[t];
    }
    if (sign_sum != 0) return s.discrepancy(tag.str() + "signs do not sum to zero");
    double worst = 0.0;
    for (const auto& f : data) {
      double acc = 0.0;
      for (std::size_t t = 0; t < c.F.size(); ++t) acc += c.signs[t] * f[c.F[t]];
      worst = std::max(worst, std::fabs(acc));
    }
    if (worst > eta + kTol) return s.discrepancy(tag.str() + "pairing exceeds eta");
    if (c.achieved > eta + kTol || worst > c.achieved + kTol)
      return s.discrepancy(tag.str() + "reported value understates the pairing");
    if (effective == PastStrategy::best_pair) {
      const auto first = scan_pair();
      if (!first || first->first != c.F[0] || first->second != c.F[1])
        return s.discrepancy(tag.str() + "not the first feasible pair");
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientIndices)
      return s.discrepancy(tag.str() + "unexpected error " + std::string(to_string(e.kind())));
    ++s.res.past_checked;
    if (effective == PastStrategy::best_pair && scan_pair())
      return s.discrepancy(tag.str() + "gave up although a feasible pair exists");
  }
}

void future_case(Suite& s, Rng& rng, std::size_t n, std::size_t case_no) {
  static constexpr double kExponents[] = {1.0, 1.5, 2.0, 3.0, kInf};
  const double p = kExponents[rng.below(5)];
  const SpaceSpec space = SpaceSpec::lp(p, n);
  const double q = conjugate_exponent(p);
  std::vector<double> phi(n);
  const double spread = std::ldexp(1.0, -static_cast<int>(rng.below(6)));
  for (double& v : phi) v = grid_value(rng, spread);
  const IndexSet lambda = random_subset(rng, n, 1);
  const double eta = std::ldexp(1.0, -static_cast<int>(1 + rng.below(8)));

  std::ostringstream tag;
  tag << "case " << case_no << " future (n=" << n << ", p=" << p << ", eta=" << eta << "): ";
  try {
    const FutureCertificate c = future_annihilate(lambda, phi, space, eta, 0);
    ++s.res.future_checked;
    for (std::size_t t = 0; t < c.A.size(); ++t) {
      if (!std::binary_search(lambda.begin(), lambda.end(), c.A[t]))
        return s.discrepancy(tag.str() + "index outside lambda");
      if (t > 0 && c.A[t] <= c.A[t - 1]) return s.discrepancy(tag.str() + "A not strictly sorted");
    }
    const double got = restricted_lq(phi, c.A, q);
    if (got > eta + kTol) return s.discrepancy(tag.str() + "restricted norm exceeds eta");
    if (std::fabs(got - c.achieved) > kTol) return s.discrepancy(tag.str() + "achieved misreported");
    // The norm is symmetric and monotone, so no feasible set is larger than
    // the feasible prefix of lambda sorted by |phi|.
    if (c.A.size() < lambda.size()) {
      IndexSet sorted = lambda;
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(phi[a]) < std::fabs(phi[b]);
      });
      IndexSet next(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(c.A.size() + 1));
      if (restricted_lq(phi, make_index_set(next), q) <= eta - kTol)
        return s.discrepancy(tag.str() + "a larger feasible set exists");
    }
  } catch (const Error& e) {
    s.discrepancy(tag.str() + "unexpected error " + std::string(to_string(e.kind())));
  }
}

}  // namespace

LemmaSuiteResult check_lemmas(std::uint64_t seed, std::size_t cases, std::size_t max_dim) {
  require(max_dim >= 2, ErrorKind::InvalidArgument, "max_dim must be at least 2");
  Suite s;
  Rng rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    const std::size_t n = 2 + rng.below(max_dim - 1);
    if (i % 2 == 0) {
      past_case(s, rng, n, i);
    } else {
      future_case(s, rng, n, i);
    }
    ++s.res.cases;
  }
  return s.res;
}

}  // namespace factorlab
