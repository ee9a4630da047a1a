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
#include <vector>

#include "doctest.h"
#include "factorlab/rng.hpp"
#include "factorlab/simd/kernels.hpp"

using namespace factorlab;
using namespace factorlab::simd;

namespace {

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> v;
  if (avx2_kernels()) v.push_back(avx2_kernels());
  if (neon_kernels()) v.push_back(neon_kernels());
  return v;
}

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-10.0, 10.0);
  return x;
}

}  // namespace

TEST_CASE("vector kernels agree with the scalar reference") {
  const KernelTable& ref = scalar_kernels();
  Rng rng(11);
  for (const KernelTable* k : variants()) {
    for (std::size_t n = 0; n < 70; ++n) {
      const auto x = random_vec(rng, n);
      const auto y = random_vec(rng, n);
      CAPTURE(n);
      const double scale = 1.0 + ref.abs_sum(x.data(), n) * 10.0;
      CHECK(std::fabs(k->dot(x.data(), y.data(), n) - ref.dot(x.data(), y.data(), n)) <=
            1e-13 * scale * 10.0);
      CHECK(std::fabs(k->abs_sum(x.data(), n) - ref.abs_sum(x.data(), n)) <= 1e-13 * scale);
      CHECK(std::fabs(k->sum_sq(x.data(), n) - ref.sum_sq(x.data(), n)) <= 1e-12 * scale * scale);
      CHECK(k->max_abs(x.data(), n) == ref.max_abs(x.data(), n));
      CHECK(k->max_abs_diff(x.data(), y.data(), n) == ref.max_abs_diff(x.data(), y.data(), n));

      auto a = y;
      auto b = y;
      k->axpy(0.375, x.data(), a.data(), n);
      ref.axpy(0.375, x.data(), b.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(a[i] - b[i]) <= 1e-14 * (1 + std::fabs(b[i])));

      a = y;
      b = y;
      k->add_abs(x.data(), a.data(), n);
      ref.add_abs(x.data(), b.data(), n);
      CHECK(a == b);
    }
  }
}

TEST_CASE("max-type kernels handle NaN-free extremes and empty input") {
  const KernelTable& ref = scalar_kernels();
  CHECK(ref.max_abs(nullptr, 0) == 0.0);
  CHECK(ref.abs_sum(nullptr, 0) == 0.0);
  std::vector<double> x = {0.0, -5.0, 3.0, -5.0, 1e300, -1e300};
  for (const KernelTable* k : variants()) CHECK(k->max_abs(x.data(), x.size()) == 1e300);
  CHECK(ref.max_abs(x.data(), x.size()) == 1e300);
}

TEST_CASE("force_isa switches the dispatch and falls back to scalar") {
  const Isa before = active_isa();
  CHECK(force_isa(Isa::scalar) == Isa::scalar);
  CHECK(active_isa() == Isa::scalar);
  const std::vector<double> x = {1.0, -2.0, 3.0};
  CHECK(abs_sum(x) == 6.0);
  CHECK(max_abs(x) == 3.0);
  force_isa(before);
  CHECK(active_isa() == before);
}

TEST_CASE("dispatching wrappers reject mismatched lengths") {
  const std::vector<double> x = {1.0, 2.0};
  const std::vector<double> y = {1.0};
  CHECK_THROWS(dot(x, y));
}
