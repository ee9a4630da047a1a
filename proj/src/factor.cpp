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

#include "factorlab/factor.hpp"

#include <algorithm>
#include <cmath>

#include "factorlab/errors.hpp"
#include "factorlab/rational.hpp"
#include "factorlab/rng.hpp"
#include "factorlab/simd/kernels.hpp"

namespace factorlab {

std::string_view to_string(Branch b) { return b == Branch::T ? "T" : "Id-T"; }

namespace {

double pairing(const Block& b, std::span<const double> y) { return y[b.flat0] - y[b.flat1]; }

std::vector<std::size_t> all_blocks(const BlockSystem& sys) {
  std::vector<std::size_t> v(sys.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

std::size_t half_up(std::size_t n) { return (n + 1) / 2; }

DenseMatrix identity_on(const SpaceSpec& labels, const BlockSystem& sys,
                        const std::vector<std::size_t>& subset) {
  DenseMatrix I(labels.size(), labels.size());
  for (std::size_t j : subset) {
    const std::size_t l = label_coord(sys, j);
    I(l, l) = 1.0;
  }
  return I;
}

// H applied to every column of B: the n x L matrix HJ.
DenseMatrix apply_columns(const Operator& H, const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  std::vector<double> col(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    bool zero = true;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      col[r] = m(r, c);
      zero = zero && col[r] == 0.0;
    }
    if (zero) continue;
    const auto y = H.apply(col);
    for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = y[r];
  }
  return out;
}

struct Core {
  SpaceSpec labels;
  DenseMatrix J;   // space x labels
  DenseMatrix HJ;  // space x labels
  std::vector<double> diag;
  DenseMatrix P;  // labels x space
  PhjInverse inv;
};

Core build_core(const BlockSystem& sys, const Operator& H, const std::vector<std::size_t>& retained,
                const NormOptions& opts) {
  require(!retained.empty(), ErrorKind::InvalidArgument, "no retained blocks");
  Core c;
  c.labels = label_space(sys);
  c.J = build_B(sys, retained);
  c.HJ = apply_columns(H, c.J);
  c.diag.reserve(retained.size());
  const double norm_c = sys.synth_norm();
  // <probe_j, H synth_j> read off HJ, whose column is H synth_j / c.
  for (std::size_t j : retained)
    c.diag.push_back(
        pairing(sys.blocks[j], c.HJ.column(label_coord(sys, j))) * norm_c);
  c.P = build_P(sys, retained, c.diag);

  c.inv.phj = c.P * c.HJ;
  const DenseMatrix I = identity_on(c.labels, sys, retained);
  c.inv.defect = op_norm(c.inv.phj - I, c.labels, c.labels, opts);
  if (c.inv.defect.upper > 1.0 - 1e-6)
    fail(ErrorKind::DefectTooLarge, "‖PHJ - Id‖ <= " + std::to_string(c.inv.defect.upper) +
                                        " leaves no Neumann margin");

  const std::size_t R = retained.size();
  DenseMatrix sub(R, R);
  for (std::size_t a = 0; a < R; ++a)
    for (std::size_t b = 0; b < R; ++b)
      sub(a, b) = c.inv.phj(label_coord(sys, retained[a]), label_coord(sys, retained[b]));
  const DenseMatrix sub_inv = inverse(sub);
  c.inv.inverse = DenseMatrix(c.labels.size(), c.labels.size());
  for (std::size_t a = 0; a < R; ++a)
    for (std::size_t b = 0; b < R; ++b)
      c.inv.inverse(label_coord(sys, retained[a]), label_coord(sys, retained[b])) = sub_inv(a, b);
  c.inv.inverse_norm = op_norm(c.inv.inverse, c.labels, c.labels, opts);
  return c;
}

Check bound_check(const std::string& name, double measured, double bound, double slack,
                  const std::string& detail) {
  return {name, measured, bound, measured <= bound * (1.0 + slack), detail};
}

}  // namespace

std::size_t default_min_retained(const BlockSystem& sys) {
  return sys.two_param ? 1 : half_up(sys.size());
}

Selection select_H(const Operator& T, const BlockSystem& sys,
                   std::optional<std::size_t> min_retained) {
  require(sys.size() > 0, ErrorKind::InvalidArgument, "block system is empty");
  Selection sel;
  sel.min_retained = min_retained.value_or(default_min_retained(sys));
  sel.d.reserve(sys.size());
  for (std::size_t j = 0; j < sys.size(); ++j)
    sel.d.push_back(pairing(sys.blocks[j], T.apply(sys.synth(j))));

  auto t_ok = [&](std::size_t j) { return std::fabs(sel.d[j]) >= 1.0; };
  auto c_ok = [&](std::size_t j) { return std::fabs(2.0 - sel.d[j]) >= 1.0; };

  if (!sys.two_param) {
    std::vector<std::size_t> kt;
    std::vector<std::size_t> kc;
    for (std::size_t j = 0; j < sys.size(); ++j) {
      if (t_ok(j)) kt.push_back(j);
      if (c_ok(j)) kc.push_back(j);
    }
    if (kt.size() >= sel.min_retained) {
      sel.branch = Branch::T;
      sel.retained = std::move(kt);
    } else if (kc.size() >= sel.min_retained) {
      sel.branch = Branch::IdMinusT;
      sel.retained = std::move(kc);
    } else {
      fail(ErrorKind::RetentionImpossible,
           "min_retained = " + std::to_string(sel.min_retained) + " but T keeps " +
               std::to_string(kt.size()) + " and Id - T keeps " + std::to_string(kc.size()) +
               " of " + std::to_string(sys.size()) + " blocks");
    }
    return sel;
  }

  // Two parameters: a row counts for a branch when that branch keeps at
  // least half of the row's blocks; the branch wins when it counts in at
  // least half of the rows that hold blocks.
  std::map<std::size_t, std::vector<std::size_t>> by_row;
  for (std::size_t j = 0; j < sys.size(); ++j) by_row[sys.blocks[j].row].push_back(j);
  std::vector<std::size_t> rows_t;
  std::vector<std::size_t> rows_c;
  for (const auto& [row, members] : by_row) {
    const auto nt = static_cast<std::size_t>(std::count_if(members.begin(), members.end(), t_ok));
    const auto nc = static_cast<std::size_t>(std::count_if(members.begin(), members.end(), c_ok));
    if (nt >= half_up(members.size())) rows_t.push_back(row);
    if (nc >= half_up(members.size())) rows_c.push_back(row);
  }
  const bool take_t = rows_t.size() >= half_up(by_row.size());
  sel.branch = take_t ? Branch::T : Branch::IdMinusT;
  sel.rows = take_t ? rows_t : rows_c;
  for (std::size_t j = 0; j < sys.size(); ++j) {
    if (!std::binary_search(sel.rows.begin(), sel.rows.end(), sys.blocks[j].row)) continue;
    if (take_t ? t_ok(j) : c_ok(j)) sel.retained.push_back(j);
  }
  if (sel.retained.size() < sel.min_retained)
    fail(ErrorKind::RetentionImpossible,
         "min_retained = " + std::to_string(sel.min_retained) + " but the " +
             std::string(to_string(sel.branch)) + " branch keeps " +
             std::to_string(sel.retained.size()) + " blocks");
  return sel;
}

SpaceSpec label_space(const BlockSystem& sys) {
  require(sys.size() > 0, ErrorKind::InvalidArgument, "block system is empty");
  SpaceSpec s = sys.space;
  if (!sys.two_param) {
    s.dim = sys.size();
    return s;
  }
  std::size_t width = 1;
  for (const auto& b : sys.blocks) width = std::max<std::size_t>(width, b.label.j);
  s.dim = width;
  return s;
}

std::size_t label_coord(const BlockSystem& sys, std::size_t i) {
  require(i < sys.size(), ErrorKind::OutOfRange, "block index out of range");
  if (!sys.two_param) return i;
  std::size_t width = 1;
  for (const auto& b : sys.blocks) width = std::max<std::size_t>(width, b.label.j);
  const auto& lab = sys.blocks[i].label;
  return (lab.i - 1) * width + (lab.j - 1);
}

DenseMatrix build_B(const BlockSystem& sys, const std::vector<std::size_t>& subset_in) {
  const auto subset = subset_in.empty() ? all_blocks(sys) : subset_in;
  const SpaceSpec labels = label_space(sys);
  const double c = sys.synth_norm();
  DenseMatrix B(sys.space.size(), labels.size());
  for (std::size_t j : subset) {
    const std::size_t l = label_coord(sys, j);
    B(sys.blocks[j].flat0, l) = 1.0 / c;
    B(sys.blocks[j].flat1, l) = -1.0 / c;
  }
  return B;
}

DenseMatrix build_Q(const BlockSystem& sys, const std::vector<std::size_t>& subset_in) {
  const auto subset = subset_in.empty() ? all_blocks(sys) : subset_in;
  const SpaceSpec labels = label_space(sys);
  const double w = sys.synth_norm() / 2.0;  // ‖b_j*‖ / |B_j|
  DenseMatrix Q(labels.size(), sys.space.size());
  for (std::size_t j : subset) {
    const std::size_t l = label_coord(sys, j);
    Q(l, sys.blocks[j].flat0) = w;
    Q(l, sys.blocks[j].flat1) = -w;
  }
  return Q;
}

DenseMatrix build_P(const BlockSystem& sys, const std::vector<std::size_t>& retained,
                    const std::vector<double>& diag_values) {
  require(!retained.empty(), ErrorKind::InvalidArgument, "P needs at least one retained block");
  require(retained.size() == diag_values.size(), ErrorKind::DimensionMismatch,
          "one diagonal value per retained block");
  const SpaceSpec labels = label_space(sys);
  const double c = sys.synth_norm();
  DenseMatrix P(labels.size(), sys.space.size());
  for (std::size_t a = 0; a < retained.size(); ++a) {
    const std::size_t j = retained[a];
    require(diag_values[a] != 0.0, ErrorKind::InvalidArgument, "zero diagonal value");
    const double w = c / diag_values[a];
    const std::size_t l = label_coord(sys, j);
    P(l, sys.blocks[j].flat0) = w;
    P(l, sys.blocks[j].flat1) = -w;
  }
  return P;
}

double crucial_identity_check(const BlockSystem& sys, const Operator& H,
                              const std::vector<std::size_t>& retained, std::size_t samples,
                              std::uint64_t seed) {
  const std::size_t R = retained.size();
  std::vector<std::vector<double>> images(R);
  for (std::size_t a = 0; a < R; ++a) images[a] = H.apply(sys.synth(retained[a]));
  // pairings[i][j] = <probe_i, H synth_j>
  std::vector<std::vector<double>> pairings(R, std::vector<double>(R));
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < R; ++j)
      pairings[i][j] = pairing(sys.blocks[retained[i]], images[j]);

  Rng rng(seed);
  double worst = 0.0;
  const std::size_t n = sys.space.size();
  std::vector<double> a(R);
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& v : a) v = rng.uniform(-1.0, 1.0);
    std::vector<double> y(n, 0.0);
    for (std::size_t j = 0; j < R; ++j) {
      y[sys.blocks[retained[j]].flat0] += a[j];
      y[sys.blocks[retained[j]].flat1] -= a[j];
    }
    const auto hy = H.apply(y);
    std::vector<double> lhs(n, 0.0);
    std::vector<double> rhs(n, 0.0);
    for (std::size_t i = 0; i < R; ++i) {
      const Block& b = sys.blocks[retained[i]];
      const double d = pairings[i][i];
      const double coef_l = pairing(b, hy) / d;
      double below = 0.0;
      for (std::size_t j = 0; j < i; ++j) below += a[j] * pairings[i][j];
      double beyond = 0.0;
      for (std::size_t j = i + 1; j < R; ++j) beyond += a[j] * pairings[i][j];
      const double coef_r = below / d + beyond / d;
      lhs[b.flat0] += coef_l;
      lhs[b.flat1] -= coef_l;
      rhs[b.flat0] += coef_r;
      rhs[b.flat1] -= coef_r;
    }
    for (std::size_t k = 0; k < n; ++k) lhs[k] -= y[k];
    worst = std::max(worst, simd::max_abs_diff(lhs, rhs));
  }
  return worst;
}

PhjInverse invert_PHJ(const BlockSystem& sys, const Operator& H,
                      const std::vector<std::size_t>& retained, const NormOptions& opts) {
  return build_core(sys, H, retained, opts).inv;
}

std::pair<FactorBundle, VerificationReport> assemble(const BlockSystem& sys, const Operator& T,
                                                     const AssembleOptions& opts) {
  const Selection sel = select_H(T, sys, opts.min_retained);
  const Operator H = sel.branch == Branch::T ? T : T.identity_minus();
  const auto& retained = sel.retained;
  const double Ku = sys.space.K_u;
  const double Ks = sys.space.K_s;
  const Tolerances& tol = opts.tol;

  Core core = build_core(sys, H, retained, opts.norm);
  const SpaceSpec& labels = core.labels;
  const SpaceSpec& space = sys.space;
  const DenseMatrix I = identity_on(labels, sys, retained);

  FactorBundle fb;
  fb.branch = sel.branch;
  fb.retained = retained;
  fb.diag_values = core.diag;
  fb.space = space;
  fb.labels = labels;
  fb.B = core.J;
  fb.Q = build_Q(sys, retained);
  fb.P = core.P;
  fb.J = core.J;
  fb.phj_inverse = core.inv.inverse;
  fb.V = core.inv.inverse * core.P;
  fb.M = core.J;
  const DenseMatrix QY = fb.Q * fb.J;  // Q restricted to Y, in Y-coordinates
  fb.N = QY * fb.V;
  const DenseMatrix NHM = fb.N * core.HJ;

  auto& nm = fb.norms;
  nm["B"] = op_norm(fb.B, labels, space, opts.norm);
  nm["Q"] = op_norm(fb.Q, space, labels, opts.norm);
  nm["Q|Y"] = op_norm(QY, labels, labels, opts.norm);
  nm["P"] = op_norm(fb.P, space, labels, opts.norm);
  nm["J"] = op_norm(fb.J, labels, space, opts.norm);
  nm["V"] = op_norm(fb.V, space, labels, opts.norm);
  nm["M"] = nm["J"];
  nm["N"] = op_norm(fb.N, space, labels, opts.norm);
  nm["PHJ-Id"] = core.inv.defect;
  nm["(PHJ)^-1"] = core.inv.inverse_norm;
  nm["NHM-Id"] = op_norm(NHM - I, labels, labels, opts.norm);

  VerificationReport rep;
  auto& ck = rep.checks;

  ck.push_back({"QB_identity", max_abs_entry(fb.Q * fb.B - I), tol.identity,
                max_abs_entry(fb.Q * fb.B - I) <= tol.identity, "max entry of QB - Id"});

  {
    Rng rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    double dev = 0.0;
    std::vector<double> x(space.size());
    for (int s = 0; s < 5; ++s) {
      for (double& v : x) v = rng.uniform(-1.0, 1.0);
      const auto z = fb.B.apply(fb.Q.apply(x));
      const auto w = fb.B.apply(fb.Q.apply(z));
      dev = std::max(dev, simd::max_abs_diff(z, w));
    }
    ck.push_back({"BQ_idempotent", dev, tol.algebraic, dev <= tol.algebraic,
                  "max |(BQ)^2 x - BQ x| over random x"});
  }

  {
    Rng rng(opts.seed ^ 0x3c6ef372fe94f82bULL);
    double dev = 0.0;
    std::vector<double> u(labels.size());
    for (int s = 0; s < 10; ++s) {
      std::fill(u.begin(), u.end(), 0.0);
      for (std::size_t j : retained) u[label_coord(sys, j)] = rng.uniform(-1.0, 1.0);
      const double nu = norm(labels, Side::dual, u);
      const double ny = norm(space, Side::dual, fb.J.apply(u));
      dev = std::max(dev, std::fabs(ny - nu) / nu);
    }
    ck.push_back({"Y_isometry", dev, tol.identity, dev <= tol.identity,
                  "relative gap between ‖Ju‖ and ‖u‖"});
  }

  {
    std::size_t bad = 0;
    for (double dj : sel.d) {
      const Rational d = to_rational(dj);
      if (abs(d) < 1 && abs(Rational(2) - d) < 1) ++bad;
    }
    ck.push_back({"branch_totality", static_cast<double>(bad), 0.0, bad == 0,
                  "blocks with max(|d|, |2 - d|) < 1, exact"});
  }

  {
    double low = kInf;
    for (double d : core.diag) low = std::min(low, std::fabs(d));
    ck.push_back({"retained_diagonal", low, 1.0, low >= 1.0 - tol.identity,
                  "min |<b_j, H b_j*>| over retained blocks (lower bound check)"});
    ck.push_back({"min_retained", static_cast<double>(retained.size()),
                  static_cast<double>(sel.min_retained), retained.size() >= sel.min_retained,
                  "retained blocks (lower bound check)"});
  }

  const double slack = tol.norm_slack;
  const double bB = nm["B"].upper;
  const double bQY = nm["Q|Y"].upper;
  ck.push_back(bound_check("norm_B", bB, 2 * Ku * Ku * Ks, slack, "‖B‖ <= 2 K_u^2 K_s"));
  ck.push_back(bound_check("norm_Q", nm["Q"].upper, 2 * Ks * Ku, slack, "‖Q‖ <= 2 K_s K_u"));
  ck.push_back(bound_check("norm_B_times_Q_Y", bB * bQY, 4 * std::pow(Ku, 3) * Ks * Ks, slack,
                           "‖B‖ ‖Q|_Y‖ <= 4 K_u^3 K_s^2"));
  ck.push_back(bound_check("norm_P", nm["P"].upper, 8 * std::pow(Ku, 4) * Ks * Ks, slack,
                           "‖P‖ <= 8 K_u^4 K_s^2"));
  ck.push_back(bound_check("norm_J_times_V", nm["J"].upper * nm["V"].upper,
                           12 * std::pow(Ku, 4) * Ks * Ks, slack, "‖J‖ ‖V‖ <= 12 K_u^4 K_s^2"));
  rep.norm_product_MN = nm["M"].upper * nm["N"].upper;
  ck.push_back(bound_check("norm_M_times_N", rep.norm_product_MN,
                           48 * std::pow(Ku, 7) * std::pow(Ks, 4), slack,
                           "‖M‖ ‖N‖ <= 48 K_u^7 K_s^4"));

  rep.neumann_defect = core.inv.defect;
  rep.inverse_norm = core.inv.inverse_norm;
  ck.push_back({"neumann_defect", rep.neumann_defect.upper, 1.0 / 3.0,
                rep.neumann_defect.upper <= 1.0 / 3.0 + slack, "‖PHJ - Id_Y‖ <= 1/3"});
  ck.push_back({"inverse_norm", rep.inverse_norm.upper, 1.5,
                rep.inverse_norm.upper <= 1.5 + slack, "‖(PHJ)^-1‖ <= 3/2"});

  {
    double eta_sum = 0.0;
    for (double v : sys.eta.values) eta_sum += v;
    const double factor = sys.two_param ? 2.0 + 4.0 * std::pow(Ku, 3) * Ks : 2.0 + 2.0 * Ku;
    ck.push_back(bound_check("defect_certificate_bound", rep.neumann_defect.upper,
                             factor * eta_sum, slack,
                             "defect against the bound assembled from the eta schedule"));
  }

  rep.residual_identity = nm["NHM-Id"].upper;
  ck.push_back({"factorization_residual", rep.residual_identity, tol.residual,
                rep.residual_identity <= tol.residual, "‖N H M - Id‖ on the factored copy"});

  const double crucial =
      crucial_identity_check(sys, H, retained, opts.identity_samples, opts.seed);
  ck.push_back({"crucial_identity", crucial, tol.algebraic, crucial <= tol.algebraic,
                "max deviation between both sides of the PHy - y expansion"});

  rep.passed = std::all_of(ck.begin(), ck.end(), [](const Check& c) { return c.passed; });
  return {std::move(fb), std::move(rep)};
}

}  // namespace factorlab
