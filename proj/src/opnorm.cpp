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

#include "factorlab/opnorm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "factorlab/errors.hpp"
#include "factorlab/rng.hpp"
#include "factorlab/simd/kernels.hpp"

namespace factorlab {
namespace {

// Norm geometry with the exponents already resolved for the side in use:
// ℓ^P_R(ℓ^p_n). Plain ℓ^p has R = 1, where P is irrelevant.
struct Geom {
  double P = 1.0;
  std::size_t R = 1;
  double p = 1.0;
  std::size_t n = 1;

  std::size_t size() const { return R * n; }
  Geom conj() const { return {conjugate_exponent(P), R, conjugate_exponent(p), n}; }
  Geom leaf() const { return {P, 1, p, n}; }
  // An exponent only matters when its dimension exceeds one.
  bool all_exponents(double e) const { return (R == 1 || P == e) && (n == 1 || p == e); }
};

Geom geom_of(const SpaceSpec& s, Side side) {
  Geom g;
  g.R = s.rows();
  g.n = s.dim;
  g.p = side == Side::dual ? s.p : conjugate_exponent(s.p);
  if (s.kind == SpaceSpec::Kind::lp_sum)
    g.P = side == Side::dual ? s.outer_p : conjugate_exponent(s.outer_p);
  else
    g.P = g.p;
  return g;
}

double gnorm(const Geom& g, std::span<const double> x) {
  if (g.R == 1) return lp_norm(x, g.p);
  std::vector<double> rows(g.R);
  for (std::size_t r = 0; r < g.R; ++r) rows[r] = lp_norm(x.subspan(r * g.n, g.n), g.p);
  return lp_norm(rows, g.P);
}

void leaf_duality(std::span<const double> v, double p, double scale, std::span<double> out) {
  const double nv = lp_norm(v, p);
  if (nv == 0.0) return;
  auto sgn = [](double t) { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); };
  if (std::isinf(p)) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.size(); ++k)
      if (std::fabs(v[k]) > std::fabs(v[best])) best = k;
    out[best] = scale * sgn(v[best]);
  } else if (p == 1.0) {
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = scale * sgn(v[k]);
  } else {
    for (std::size_t k = 0; k < v.size(); ++k)
      out[k] = scale * sgn(v[k]) * std::pow(std::fabs(v[k]) / nv, p - 1.0);
  }
}

std::vector<double> gduality(const Geom& g, std::span<const double> v) {
  std::vector<double> out(v.size(), 0.0);
  if (g.R == 1) {
    leaf_duality(v, g.p, 1.0, out);
    return out;
  }
  std::vector<double> rows(g.R);
  for (std::size_t r = 0; r < g.R; ++r) rows[r] = lp_norm(v.subspan(r * g.n, g.n), g.p);
  const double total = lp_norm(rows, g.P);
  if (total == 0.0) return out;
  std::span<double> o(out);
  if (std::isinf(g.P)) {
    const auto best = static_cast<std::size_t>(std::max_element(rows.begin(), rows.end()) -
                                               rows.begin());
    leaf_duality(v.subspan(best * g.n, g.n), g.p, 1.0, o.subspan(best * g.n, g.n));
    return out;
  }
  for (std::size_t r = 0; r < g.R; ++r) {
    if (rows[r] == 0.0) continue;
    const double w = g.P == 1.0 ? 1.0 : std::pow(rows[r] / total, g.P - 1.0);
    leaf_duality(v.subspan(r * g.n, g.n), g.p, w, o.subspan(r * g.n, g.n));
  }
  return out;
}

NormEstimate settle(double lower, double upper) {
  // Brackets that agree to rounding are reported as exact.
  if (lower > upper) lower = upper;
  if (upper - lower <= 1e-12 * upper) return NormEstimate::exactly(upper);
  return {lower, upper, false};
}

double max_col_norm(const DenseMatrix& a, const Geom& cod) {
  double best = 0.0;
  std::vector<double> col(a.rows());
  for (std::size_t c = 0; c < a.cols(); ++c) {
    for (std::size_t r = 0; r < a.rows(); ++r) col[r] = a(r, c);
    best = std::max(best, gnorm(cod, col));
  }
  return best;
}

double max_row_norm(const DenseMatrix& a, const Geom& dom) {
  const Geom d = dom.conj();
  double best = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) best = std::max(best, gnorm(d, a.row(r)));
  return best;
}

Eigen::MatrixXd to_eigen(const DenseMatrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a(r, c);
  return m;
}

// Largest singular value. Small sides go through a dense SVD; large square
// problems fall back to power iteration on the Gram matrix.
NormEstimate spectral_norm(const DenseMatrix& a, const NormOptions& opts) {
  if (std::min(a.rows(), a.cols()) <= 512) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(to_eigen(a));
    return NormEstimate::exactly(svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
  }
  Rng rng(opts.seed);
  std::vector<double> x(a.cols());
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  double prev = 0.0;
  double sigma = 0.0;
  bool converged = false;
  for (int it = 0; it < 20 * opts.max_iter; ++it) {
    const double nx = lp_norm(x, 2.0);
    for (double& v : x) v /= nx;
    const auto y = a.apply(x);
    sigma = lp_norm(y, 2.0);
    x = a.apply_transpose(y);
    if (std::fabs(sigma - prev) <= opts.tol * sigma) {
      converged = true;
      break;
    }
    prev = sigma;
  }
  const double one = max_col_norm(a, Geom{1, 1, 1, a.rows()});
  const double inf = max_row_norm(a, Geom{kInf, 1, kInf, a.cols()});
  const double upper = std::sqrt(one * inf);
  if (converged) return NormEstimate::exactly(sigma);
  return settle(sigma, upper);
}

// Upper bound for ℓ^{p1}_n -> ℓ^{p2}_m.
double leaf_upper(const DenseMatrix& a, double p1, double p2, const NormOptions& opts) {
  const Geom d{p1, 1, p1, a.cols()};
  const Geom c{p2, 1, p2, a.rows()};
  if (a.cols() <= 1 || p1 == 1.0) return max_col_norm(a, c);
  if (a.rows() <= 1 || std::isinf(p2)) return max_row_norm(a, d);
  if (p1 == 2.0 && p2 == 2.0) return spectral_norm(a, opts).upper;
  // Factor through ℓ^1 or ℓ^∞: ‖A‖ <= ‖id: ℓ^p1 -> ℓ^1‖‖A‖_{1->p2} and
  // ‖A‖ <= ‖A‖_{p1->∞}‖id: ℓ^∞ -> ℓ^p2‖.
  const double via_one =
      std::pow(static_cast<double>(a.cols()), 1.0 - 1.0 / p1) * max_col_norm(a, c);
  const double via_inf =
      max_row_norm(a, d) * std::pow(static_cast<double>(a.rows()), 1.0 / p2);
  double best = std::min(via_one, via_inf);
  if (p1 == p2) {
    const double one = max_col_norm(a, Geom{1, 1, 1, a.rows()});
    const double inf = max_row_norm(a, Geom{kInf, 1, kInf, a.cols()});
    best = std::min(best, std::pow(one, 1.0 / p1) * std::pow(inf, 1.0 - 1.0 / p1));
  }
  return best;
}

double bracket_upper(const DenseMatrix& a, const Geom& dom, const Geom& cod,
                     const NormOptions& opts) {
  if (dom.R == 1 && cod.R == 1) return leaf_upper(a, dom.p, cod.p, opts);
  // Triangle inequality block by block, then the norm of the nonnegative
  // matrix of block norms between the outer spaces.
  DenseMatrix w(cod.R, dom.R);
  for (std::size_t r = 0; r < cod.R; ++r)
    for (std::size_t c = 0; c < dom.R; ++c)
      w(r, c) = leaf_upper(a.block(r * cod.n, c * dom.n, cod.n, dom.n), dom.p, cod.p, opts);
  return leaf_upper(w, dom.R == 1 ? 1.0 : dom.P, cod.R == 1 ? kInf : cod.P, opts);
}

double ratio(const DenseMatrix& a, const Geom& dom, const Geom& cod, std::span<const double> x) {
  const double nx = gnorm(dom, x);
  if (nx == 0.0) return 0.0;
  return gnorm(cod, a.apply(x)) / nx;
}

// Nonlinear power iteration (Boyd): alternate norming functionals of Ax in
// the codomain and of A^T z in the domain's dual.
double power_lower(const DenseMatrix& a, const Geom& dom, const Geom& cod,
                   std::vector<double> x, const NormOptions& opts) {
  const Geom dom_dual = dom.conj();
  double best = 0.0;
  double prev = -1.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    const double nx = gnorm(dom, x);
    if (nx == 0.0) break;
    for (double& v : x) v /= nx;
    const auto y = a.apply(x);
    const double ny = gnorm(cod, y);
    best = std::max(best, ny);
    if (ny == 0.0 || std::fabs(ny - prev) <= opts.tol * ny) break;
    prev = ny;
    const auto w = a.apply_transpose(gduality(cod, y));
    auto next = gduality(dom_dual, w);
    if (gnorm(dom, next) == 0.0) break;
    x = std::move(next);
  }
  return best;
}

double bracket_lower(const DenseMatrix& a, const Geom& dom, const Geom& cod,
                     const NormOptions& opts) {
  double best = 0.0;
  // Best single column; unit vectors have norm one in every geometry here.
  std::size_t best_col = 0;
  {
    std::vector<double> col(a.rows());
    for (std::size_t c = 0; c < a.cols(); ++c) {
      for (std::size_t r = 0; r < a.rows(); ++r) col[r] = a(r, c);
      const double v = gnorm(cod, col);
      if (v > best) {
        best = v;
        best_col = c;
      }
    }
  }
  std::vector<std::vector<double>> starts;
  {
    std::vector<double> e(a.cols(), 0.0);
    e[best_col] = 1.0;
    starts.push_back(std::move(e));
    starts.emplace_back(a.cols(), 1.0);
    std::size_t best_row = 0;
    double best_abs = -1.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const double s = simd::abs_sum(a.row(r));
      if (s > best_abs) {
        best_abs = s;
        best_row = r;
      }
    }
    if (a.rows() > 0) {
      std::vector<double> s(a.cols());
      for (std::size_t c = 0; c < a.cols(); ++c) s[c] = a(best_row, c) >= 0 ? 1.0 : -1.0;
      starts.push_back(std::move(s));
    }
  }
  Rng rng(opts.seed);
  for (int k = 0; k < std::max(opts.restarts, 8); ++k) {
    std::vector<double> x(a.cols());
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    starts.push_back(std::move(x));
  }
  for (auto& s : starts) {
    best = std::max(best, ratio(a, dom, cod, s));
    best = std::max(best, power_lower(a, dom, cod, std::move(s), opts));
  }
  return best;
}

NormEstimate norm_rec(const DenseMatrix& a, const Geom& dom, const Geom& cod,
                      const NormOptions& opts) {
  if (a.rows() == 0 || a.cols() == 0 || max_abs_entry(a) == 0.0) return NormEstimate::exactly(0.0);
  if (dom.all_exponents(1.0)) return NormEstimate::exactly(max_col_norm(a, cod));
  if (cod.all_exponents(kInf)) return NormEstimate::exactly(max_row_norm(a, dom));
  if (dom.R > 1 && dom.P == 1.0) {
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t c = 0; c < dom.R; ++c) {
      const auto e = norm_rec(a.block(0, c * dom.n, a.rows(), dom.n), dom.leaf(), cod, opts);
      lo = std::max(lo, e.lower);
      hi = std::max(hi, e.upper);
    }
    return settle(lo, hi);
  }
  if (cod.R > 1 && std::isinf(cod.P)) {
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t r = 0; r < cod.R; ++r) {
      const auto e = norm_rec(a.block(r * cod.n, 0, cod.n, a.cols()), dom, cod.leaf(), opts);
      lo = std::max(lo, e.lower);
      hi = std::max(hi, e.upper);
    }
    return settle(lo, hi);
  }
  if (dom.all_exponents(2.0) && cod.all_exponents(2.0)) return spectral_norm(a, opts);
  const double upper = bracket_upper(a, dom, cod, opts);
  const double lower = bracket_lower(a, dom, cod, opts);
  return settle(lower, upper);
}

}  // namespace

NormEstimate op_norm(const DenseMatrix& a, const SpaceSpec& domain, const SpaceSpec& codomain,
                     const NormOptions& opts) {
  require(a.rows() == codomain.size() && a.cols() == domain.size(), ErrorKind::DimensionMismatch,
          "op_norm: matrix shape does not match " + domain.describe() + " -> " +
              codomain.describe());
  return norm_rec(a, geom_of(domain, Side::dual), geom_of(codomain, Side::dual), opts);
}

NormEstimate op_norm(const Operator& a, const NormOptions& opts) {
  if (a.is_diagonal()) {
    const auto& d = a.diag();
    return NormEstimate::exactly(d.empty() ? 0.0 : simd::max_abs(d));
  }
  return op_norm(a.matrix(), a.domain(), a.codomain(), opts);
}

double norm_ratio(const DenseMatrix& a, const SpaceSpec& domain, const SpaceSpec& codomain,
                  std::span<const double> x) {
  require(a.rows() == codomain.size() && a.cols() == domain.size() && x.size() == a.cols(),
          ErrorKind::DimensionMismatch, "norm_ratio: shape mismatch");
  return ratio(a, geom_of(domain, Side::dual), geom_of(codomain, Side::dual), x);
}

std::vector<double> duality_map(std::span<const double> v, const SpaceSpec& space, Side side) {
  require(v.size() == space.size(), ErrorKind::DimensionMismatch,
          "duality_map: vector length does not match " + space.describe());
  return gduality(geom_of(space, side), v);
}

double restricted_predual_norm(std::span<const double> phi, const IndexSet& A,
                               const SpaceSpec& space) {
  require(phi.size() == space.size(), ErrorKind::DimensionMismatch,
          "restricted_predual_norm: functional length does not match " + space.describe());
  std::vector<double> r(phi.size(), 0.0);
  for (std::size_t k : A) {
    require(k < phi.size(), ErrorKind::OutOfRange,
            "restricted_predual_norm: index " + std::to_string(k) + " out of range");
    r[k] = phi[k];
  }
  return norm(space, Side::predual, r);
}

double restricted_predual_norm(const VecRep& phi, const IndexSet& A) {
  return restricted_predual_norm(phi.coords, A, phi.space);
}

}  // namespace factorlab
