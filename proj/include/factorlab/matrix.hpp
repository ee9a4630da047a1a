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

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "factorlab/seqspace.hpp"

namespace factorlab {

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  DenseMatrix transpose() const;
  /// Entries (r0..r0+nr) x (c0..c0+nc).
  DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> apply_transpose(std::span<const double> y) const;

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double s);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
double max_abs_entry(const DenseMatrix& a);

/// Inverse of a square matrix by partial-pivot LU. Throws InvalidArgument
/// when the matrix is numerically singular.
DenseMatrix inverse(const DenseMatrix& a);

/// A linear map between two truncated spaces, acting on dual-side
/// coordinate vectors. Rows index the codomain and columns the domain.
/// Diagonal operators are stored as their diagonal so that projections on
/// large two-parameter grids stay cheap.
class Operator {
 public:
  enum class Storage { dense, diagonal };

  Operator() = default;
  Operator(DenseMatrix m, SpaceSpec domain, SpaceSpec codomain);
  static Operator square(DenseMatrix m, const SpaceSpec& space);
  static Operator diagonal(std::vector<double> diag, const SpaceSpec& space);
  static Operator identity(const SpaceSpec& space);

  Storage storage() const { return storage_; }
  bool is_diagonal() const { return storage_ == Storage::diagonal; }
  const SpaceSpec& domain() const { return domain_; }
  const SpaceSpec& codomain() const { return codomain_; }
  std::size_t rows() const { return codomain_.size(); }
  std::size_t cols() const { return domain_.size(); }

  /// Only valid for dense storage.
  const DenseMatrix& matrix() const;
  /// Only valid for diagonal storage.
  const std::vector<double>& diag() const;

  double entry(std::size_t r, std::size_t c) const;
  std::vector<double> apply(std::span<const double> x) const;
  /// Applies the transpose, i.e. the adjoint acting on predual coordinates.
  std::vector<double> apply_transpose(std::span<const double> y) const;
  DenseMatrix to_dense() const;

  /// Id - T; square operators only.
  Operator identity_minus() const;

 private:
  Storage storage_ = Storage::dense;
  DenseMatrix dense_;
  std::vector<double> diag_;
  SpaceSpec domain_;
  SpaceSpec codomain_;
};

// Text format: first line "rows cols", then the entries row-major,
// whitespace separated. Vectors are written as 1 x n matrices.
DenseMatrix read_matrix(std::istream& in);
DenseMatrix read_matrix_file(const std::string& path);
void write_matrix(std::ostream& out, const DenseMatrix& m);
void write_matrix_file(const std::string& path, const DenseMatrix& m);

}  // namespace factorlab
