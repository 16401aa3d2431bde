// Copyright 2026 The ban-seg Authors
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
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "ban/errors.hpp"

namespace ban {

/// Dense row-major matrix of doubles. Carries every feature, similarity and
/// gradient array in the pipeline.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept;
  void fill(double v);

  bool operator==(const Matrix&) const = default;

  std::string shape_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Value-level kernels. Every reduction runs in ascending index order so that
// results are reproducible bit for bit.

Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b without materializing the transpose.
Matrix matmul_transa(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
/// Softmax along each row, max-subtracted. Throws kNumeric on non-finite input.
Matrix row_softmax(const Matrix& m);
/// [a | b]; a's columns come first.
Matrix concat_cols(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix add_row_bias(const Matrix& a, const Matrix& bias);
Matrix relu(const Matrix& a);
/// Result row r is input row perm[r].
Matrix permute_rows(const Matrix& a, std::span<const std::size_t> perm);
/// Result column c is input column perm[c].
Matrix permute_cols(const Matrix& a, std::span<const std::size_t> perm);
double sum(const Matrix& a);
/// Largest |a-b| / max(|a|, |b|, floor) over all entries.
double max_rel_error(const Matrix& a, const Matrix& b, double floor = 1e-300);
double max_abs_diff(const Matrix& a, const Matrix& b);
/// max|a - b| / max(max|a|, max|b|, floor): error relative to the tensor scale.
double norm_rel_error(const Matrix& a, const Matrix& b, double floor = 1e-300);

void add_in_place(Matrix& acc, const Matrix& x);

}  // namespace ban
