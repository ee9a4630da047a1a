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

#include "factorlab/matrix.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "factorlab/errors.hpp"
#include "factorlab/simd/kernels.hpp"

namespace factorlab {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, ErrorKind::DimensionMismatch,
          "matrix data does not match its shape");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> DenseMatrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix DenseMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr,
                               std::size_t nc) const {
  require(r0 + nr <= rows_ && c0 + nc <= cols_, ErrorKind::OutOfRange, "block out of range");
  DenseMatrix b(nr, nc);
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t c = 0; c < nc; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
  return b;
}

std::vector<double> DenseMatrix::apply(std::span<const double> x) const {
  require(x.size() == cols_, ErrorKind::DimensionMismatch, "apply: length mismatch");
  std::vector<double> y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) y[r] = simd::dot(row(r), x);
  return y;
}

std::vector<double> DenseMatrix::apply_transpose(std::span<const double> y) const {
  require(y.size() == rows_, ErrorKind::DimensionMismatch, "apply_transpose: length mismatch");
  std::vector<double> x(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    if (y[r] != 0.0) simd::axpy(y[r], row(r), x);
  return x;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, ErrorKind::DimensionMismatch,
          "matrix sum: shape mismatch");
  simd::axpy(1.0, other.data_, data_);
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, ErrorKind::DimensionMismatch,
          "matrix difference: shape mismatch");
  simd::axpy(-1.0, other.data_, data_);
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), ErrorKind::DimensionMismatch,
          "matrix product: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto out = c.row(r);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = a(r, k);
      if (v != 0.0) simd::axpy(v, b.row(k), out);
    }
  }
  return c;
}

DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) {
  a -= b;
  return a;
}

double max_abs_entry(const DenseMatrix& a) { return simd::max_abs(a.data()); }

DenseMatrix inverse(const DenseMatrix& a) {
  require(a.rows() == a.cols(), ErrorKind::DimensionMismatch, "inverse of a non-square matrix");
  const auto n = static_cast<Eigen::Index>(a.rows());
  if (n == 0) return {};
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = a(r, c);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double rcond = lu.rcond();
  require(rcond > 1e-14, ErrorKind::InvalidArgument, "matrix is numerically singular");
  const Eigen::MatrixXd inv = lu.inverse();
  DenseMatrix out(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) out(r, c) = inv(r, c);
  return out;
}

Operator::Operator(DenseMatrix m, SpaceSpec domain, SpaceSpec codomain)
    : storage_(Storage::dense), dense_(std::move(m)), domain_(domain), codomain_(codomain) {
  require(dense_.rows() == codomain_.size() && dense_.cols() == domain_.size(),
          ErrorKind::DimensionMismatch,
          "operator matrix is " + std::to_string(dense_.rows()) + "x" +
              std::to_string(dense_.cols()) + " but maps " + domain_.describe() + " -> " +
              codomain_.describe());
}

Operator Operator::square(DenseMatrix m, const SpaceSpec& space) {
  return Operator(std::move(m), space, space);
}

Operator Operator::diagonal(std::vector<double> diag, const SpaceSpec& space) {
  require(diag.size() == space.size(), ErrorKind::DimensionMismatch,
          "diagonal length does not match " + space.describe());
  Operator op;
  op.storage_ = Storage::diagonal;
  op.diag_ = std::move(diag);
  op.domain_ = space;
  op.codomain_ = space;
  return op;
}

Operator Operator::identity(const SpaceSpec& space) {
  return diagonal(std::vector<double>(space.size(), 1.0), space);
}

const DenseMatrix& Operator::matrix() const {
  require(storage_ == Storage::dense, ErrorKind::InvalidArgument, "operator is not dense");
  return dense_;
}

const std::vector<double>& Operator::diag() const {
  require(storage_ == Storage::diagonal, ErrorKind::InvalidArgument, "operator is not diagonal");
  return diag_;
}

double Operator::entry(std::size_t r, std::size_t c) const {
  require(r < rows() && c < cols(), ErrorKind::OutOfRange, "operator entry out of range");
  if (storage_ == Storage::dense) return dense_(r, c);
  return r == c ? diag_[r] : 0.0;
}

std::vector<double> Operator::apply(std::span<const double> x) const {
  if (storage_ == Storage::dense) return dense_.apply(x);
  require(x.size() == diag_.size(), ErrorKind::DimensionMismatch, "apply: length mismatch");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = diag_[i] * x[i];
  return y;
}

std::vector<double> Operator::apply_transpose(std::span<const double> y) const {
  if (storage_ == Storage::dense) return dense_.apply_transpose(y);
  return apply(y);
}

DenseMatrix Operator::to_dense() const {
  if (storage_ == Storage::dense) return dense_;
  DenseMatrix m(diag_.size(), diag_.size());
  for (std::size_t i = 0; i < diag_.size(); ++i) m(i, i) = diag_[i];
  return m;
}

Operator Operator::identity_minus() const {
  require(rows() == cols() && domain_ == codomain_, ErrorKind::DimensionMismatch,
          "Id - T needs an endomorphism");
  if (storage_ == Storage::diagonal) {
    std::vector<double> d(diag_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 1.0 - diag_[i];
    return diagonal(std::move(d), domain_);
  }
  DenseMatrix m = dense_;
  m *= -1.0;
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
  return Operator(std::move(m), domain_, codomain_);
}

namespace {

double parse_double(const std::string& tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    // from_chars does not accept "inf"/"+1e3" spellings on every library.
    std::istringstream is(tok);
    if (!(is >> v) || !is.eof()) fail(ErrorKind::Parse, "bad matrix entry '" + tok + "'");
  }
  return v;
}

}  // namespace

DenseMatrix read_matrix(std::istream& in) {
  long long rows = -1;
  long long cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    fail(ErrorKind::Parse, "matrix header must be 'rows cols'");
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(rows * cols));
  std::string tok;
  for (long long k = 0; k < rows * cols; ++k) {
    if (!(in >> tok))
      fail(ErrorKind::Parse, "matrix ended after " + std::to_string(k) + " of " +
                                 std::to_string(rows * cols) + " entries");
    data.push_back(parse_double(tok));
  }
  if (in >> tok) fail(ErrorKind::Parse, "trailing data after matrix entries");
  return DenseMatrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                     std::move(data));
}

DenseMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Parse, "cannot open matrix file " + path);
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const DenseMatrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      if (c) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

void write_matrix_file(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Parse, "cannot write matrix file " + path);
  write_matrix(out, m);
}

}  // namespace factorlab
