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

#include "../oracles/oracles.hpp"
#include "doctest.h"
#include "factorlab/errors.hpp"
#include "factorlab/factor.hpp"
#include "factorlab/rng.hpp"

using namespace factorlab;

namespace {

oracle::Mat rows_of(const DenseMatrix& m) {
  oracle::Mat a(m.rows(), oracle::Vec(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) a[i][j] = m(i, j);
  return a;
}

Operator perturbed(const SpaceSpec& s, std::uint64_t seed, std::size_t band, double size,
                   double low = 0.25) {
  Rng rng(seed);
  const std::size_t n = s.size();
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = rng.uniform() < 0.5 ? 1.0 : low;
  for (std::size_t i = 0; i < band; ++i)
    for (std::size_t j = 0; j < band; ++j) m(i, j) += rng.uniform(-size, size);
  return Operator::square(std::move(m), s);
}

// max |N H M - Id| over retained labels, by naive products.
double naive_residual(const FactorBundle& fb, const BlockSystem& sys, const Operator& H) {
  const auto nhm = oracle::matmul(oracle::matmul(rows_of(fb.N), rows_of(H.to_dense())),
                                  rows_of(fb.M));
  std::vector<bool> active(fb.labels.size(), false);
  for (std::size_t j : fb.retained) active[label_coord(sys, j)] = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < nhm.size(); ++i)
    for (std::size_t j = 0; j < nhm[i].size(); ++j) {
      const double want = (i == j && active[i]) ? 1.0 : 0.0;
      worst = std::max(worst, std::fabs(nhm[i][j] - want));
    }
  return worst;
}

void check_all(const VerificationReport& rep) {
  for (const auto& c : rep.checks) {
    CAPTURE(c.name);
    CAPTURE(c.measured);
    CAPTURE(c.bound);
    CHECK(c.passed);
  }
  CHECK(rep.passed);
}

}  // namespace

TEST_CASE("select_H examples") {
  const auto s = SpaceSpec::lp(kInf, 64);
  const auto sys = build_blocks_1d(Operator::identity(s), s, 8);

  const auto id = select_H(Operator::identity(s), sys);
  CHECK(id.branch == Branch::T);
  CHECK(id.retained.size() == 8);
  for (double d : id.d) CHECK(d == 2.0);

  const auto zero = select_H(Operator::diagonal(std::vector<double>(64, 0.0), s), sys);
  CHECK(zero.branch == Branch::IdMinusT);
  CHECK(zero.retained.size() == 8);

  const auto half = select_H(Operator::diagonal(std::vector<double>(64, 0.5), s), sys);
  CHECK(half.branch == Branch::T);
  for (double d : half.d) CHECK(d == 1.0);

  CHECK_THROWS_AS(select_H(Operator::identity(s), sys, 9), Error);
}

TEST_CASE("coordinate projections choose by majority of d_j") {
  const auto s = SpaceSpec::lp(kInf, 64);
  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> diag(64);
    for (double& v : diag) v = rng.uniform() < 0.3 ? 1.0 : 0.0;
    const Operator T = Operator::diagonal(diag, s);
    const auto sys = build_blocks_1d(T, s, 8);
    std::size_t big = 0;
    std::size_t small = 0;
    for (const auto& b : sys.blocks) {
      const double d = diag[b.flat0] + diag[b.flat1];  // |A ∩ B_j|
      big += d >= 1.0;
      small += std::fabs(2.0 - d) >= 1.0;
    }
    const auto sel = select_H(T, sys);
    if (big >= 4) {
      CHECK(sel.branch == Branch::T);
      CHECK(sel.retained.size() == big);
    } else {
      CHECK(sel.branch == Branch::IdMinusT);
      CHECK(sel.retained.size() == small);
    }
  }
}

TEST_CASE("B and Q scaling") {
  const auto linf = SpaceSpec::lp(kInf, 16);
  const auto sys = build_blocks_1d(Operator::identity(linf), linf, 2);
  const auto B = build_B(sys);
  const auto Q = build_Q(sys);
  CHECK(B(sys.blocks[0].flat0, 0) == 1.0);
  CHECK(B(sys.blocks[0].flat1, 0) == -1.0);
  CHECK(Q(0, sys.blocks[0].flat0) == 0.5);
  CHECK(Q(0, sys.blocks[0].flat1) == -0.5);

  const auto l1 = SpaceSpec::lp(1.0, 16);
  const auto sys1 = build_blocks_1d(Operator::identity(l1), l1, 2);
  CHECK(build_B(sys1)(sys1.blocks[1].flat0, 1) == 0.5);
  CHECK(build_Q(sys1)(1, sys1.blocks[1].flat0) == 1.0);

  // QB is the identity on the labels.
  const auto QB = oracle::matmul(rows_of(Q), rows_of(B));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(QB[i][j] == (i == j ? 1.0 : 0.0));
}

TEST_CASE("P vanishes off the blocks") {
  const auto s = SpaceSpec::lp(2.0, 32);
  const auto sys = build_blocks_1d(Operator::identity(s), s, 4);
  const std::vector<std::size_t> retained = {0, 1, 2, 3};
  const auto P = build_P(sys, retained, {2.0, 2.0, 2.0, 2.0});
  std::vector<double> x(32, 0.0);
  for (std::size_t k = 20; k < 32; ++k) x[k] = 1.0;
  for (double v : P.apply(x)) CHECK(v == 0.0);
  CHECK_THROWS_AS(build_P(sys, retained, {2.0, 2.0, 0.0, 2.0}), Error);
}

TEST_CASE("crucial identity: diagonal H leaves only rounding") {
  const auto s = SpaceSpec::lp(kInf, 64);
  const Operator H = Operator::diagonal(std::vector<double>(64, 0.75), s);
  const auto sys = build_blocks_1d(H, s, 6);
  CHECK(crucial_identity_check(sys, H, {0, 1, 2, 3, 4, 5}, 50, 1) <= 1e-15);
}

TEST_CASE("assemble: identity and zero on ℓ^∞_64") {
  const auto s = SpaceSpec::lp(kInf, 64);
  for (const Operator& T : {Operator::identity(s), Operator::diagonal(std::vector<double>(64, 0.0), s)}) {
    const auto sys = build_blocks_1d(T, s, 8);
    const auto [fb, rep] = assemble(sys, T);
    check_all(rep);
    CHECK(rep.residual_identity <= 1e-12);
    CHECK(rep.norm_product_MN <= 3.0);
    const Operator H = fb.branch == Branch::T ? T : T.identity_minus();
    CHECK(naive_residual(fb, sys, H) <= 1e-12);
  }
}

TEST_CASE("assemble with dense perturbations across exponents") {
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    CAPTURE(p);
    const auto s = SpaceSpec::lp(p, 192);
    const Operator T = perturbed(s, 11, 30, 1e-3);
    const auto sys = build_blocks_1d(T, s, 6);
    const auto [fb, rep] = assemble(sys, T);
    check_all(rep);
    const Operator H = fb.branch == Branch::T ? T : T.identity_minus();
    CHECK(naive_residual(fb, sys, H) <= 1e-9);
    CHECK(rep.neumann_defect.upper > 0.0);
  }
}

TEST_CASE("assemble picks Id - T when T is mostly small") {
  const auto s = SpaceSpec::lp(2.0, 192);
  const Operator T = perturbed(s, 12, 30, 1e-3, 0.1);
  const auto sys = build_blocks_1d(T, s, 8);
  const auto [fb, rep] = assemble(sys, T);
  check_all(rep);
}

TEST_CASE("two-parameter assembly") {
  for (double outer : {1.0, 2.0, kInf}) {
    CAPTURE(outer);
    const auto s = SpaceSpec::lp_sum(outer, 4, kInf, 96);
    const Operator T = perturbed(s, 13, 50, 1e-4);
    const auto sys = build_blocks_2d(T, s, 8);
    const auto labels = label_space(sys);
    CHECK(labels.kind == SpaceSpec::Kind::lp_sum);
    CHECK(labels.outer_dim == s.outer_dim);
    const auto [fb, rep] = assemble(sys, T);
    check_all(rep);
    const Operator H = fb.branch == Branch::T ? T : T.identity_minus();
    CHECK(naive_residual(fb, sys, H) <= 1e-9);
  }
}

TEST_CASE("large coupling between blocks is refused") {
  const auto s = SpaceSpec::lp(kInf, 64);
  const Operator zero = Operator::diagonal(std::vector<double>(64, 0.0), s);
  const auto sys = build_blocks_1d(zero, s, 4);
  DenseMatrix m = DenseMatrix::identity(64);
  m(sys.blocks[0].flat0, sys.blocks[1].flat0) = 3.0;
  const Operator T = Operator::square(m, s);
  try {
    assemble(sys, T);
    FAIL("expected DefectTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DefectTooLarge);
  }
}

TEST_CASE("invert_PHJ returns a two-sided inverse on the retained labels") {
  const auto s = SpaceSpec::lp(2.0, 128);
  const Operator T = perturbed(s, 14, 20, 1e-3);
  const auto sys = build_blocks_1d(T, s, 5);
  const auto sel = select_H(T, sys);
  const Operator H = sel.branch == Branch::T ? T : T.identity_minus();
  const auto inv = invert_PHJ(sys, H, sel.retained);
  const auto prod = oracle::matmul(rows_of(inv.phj), rows_of(inv.inverse));
  for (std::size_t a : sel.retained)
    for (std::size_t b : sel.retained) {
      const auto i = label_coord(sys, a);
      const auto j = label_coord(sys, b);
      CHECK(std::fabs(prod[i][j] - (i == j ? 1.0 : 0.0)) <= 1e-12);
    }
  CHECK(inv.inverse_norm.upper <= 1.5);
}
