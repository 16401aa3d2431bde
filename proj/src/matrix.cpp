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

#include "ban/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ban {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::kDimension,
         std::string(op) + ": shapes " + a.shape_string() + " and " + b.shape_string() + " differ");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    fail(ErrorKind::kDimension, "matrix data length " + std::to_string(data_.size()) +
                                    " does not match " + shape_string());
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) fail(ErrorKind::kDimension, "ragged initializer");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Matrix::shape_string() const {
  std::ostringstream os;
  os << rows_ << "x" << cols_;
  return os.str();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    fail(ErrorKind::kDimension, "matmul: " + a.shape_string() + " times " + b.shape_string());
  }
  Matrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out = c.row(i).data();
    const double* arow = a.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double s = arow[k];
      const double* brow = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) out[j] += s * brow[j];
    }
  }
  return c;
}

Matrix matmul_transa(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    fail(ErrorKind::kDimension, "matmul_transa: " + a.shape_string() + "^T times " + b.shape_string());
  }
  Matrix c(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* arow = a.row(k).data();
    const double* brow = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double s = arow[i];
      double* out = c.row(i).data();
      for (std::size_t j = 0; j < n; ++j) out[j] += s * brow[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

Matrix row_softmax(const Matrix& m) {
  if (!m.all_finite()) fail(ErrorKind::kNumeric, "row_softmax: non-finite input");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto in = m.row(i);
    auto o = out.row(i);
    if (in.empty()) continue;
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    for (double& v : o) v /= total;
  }
  return out;
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    fail(ErrorKind::kDimension, "concat_cols: " + a.shape_string() + " with " + b.shape_string());
  }
  Matrix c(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    std::copy(a.row(i).begin(), a.row(i).end(), out.begin());
    std::copy(b.row(i).begin(), b.row(i).end(), out.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix c = a;
  add_in_place(c, b);
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] *= bd[i];
  return c;
}

Matrix scale(const Matrix& a, double s) {
  Matrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

Matrix add_row_bias(const Matrix& a, const Matrix& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    fail(ErrorKind::kDimension, "add_row_bias: bias " + bias.shape_string() + " for " + a.shape_string());
  }
  Matrix c = a;
  const auto b = bias.row(0);
  for (std::size_t i = 0; i < c.rows(); ++i) {
    auto r = c.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
  }
  return c;
}

Matrix relu(const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data()) v = v > 0.0 ? v : 0.0;
  return c;
}

Matrix permute_rows(const Matrix& a, std::span<const std::size_t> perm) {
  if (perm.size() != a.rows()) fail(ErrorKind::kDimension, "permute_rows: permutation length mismatch");
  Matrix c(a.rows(), a.cols());
  for (std::size_t r = 0; r < perm.size(); ++r) {
    if (perm[r] >= a.rows()) fail(ErrorKind::kBounds, "permute_rows: index out of range");
    std::copy(a.row(perm[r]).begin(), a.row(perm[r]).end(), c.row(r).begin());
  }
  return c;
}

Matrix permute_cols(const Matrix& a, std::span<const std::size_t> perm) {
  if (perm.size() != a.cols()) fail(ErrorKind::kDimension, "permute_cols: permutation length mismatch");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < perm.size(); ++j) c(i, j) = a(i, perm[j]);
  return c;
}

double sum(const Matrix& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return total;
}

double max_rel_error(const Matrix& a, const Matrix& b, double floor) {
  require_same_shape(a, b, "max_rel_error");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a.data()[i];
    const double y = b.data()[i];
    const double denom = std::max({std::abs(x), std::abs(y), floor});
    const double diff = std::abs(x - y);
    if (diff == 0.0) continue;
    worst = std::max(worst, diff / denom);
  }
  return worst;
}

double norm_rel_error(const Matrix& a, const Matrix& b, double floor) {
  require_same_shape(a, b, "norm_rel_error");
  double diff = 0.0, scale = floor;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a.data()[i] - b.data()[i]));
    scale = std::max({scale, std::abs(a.data()[i]), std::abs(b.data()[i])});
  }
  return diff == 0.0 ? 0.0 : diff / scale;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

void add_in_place(Matrix& acc, const Matrix& x) {
  require_same_shape(acc, x, "add_in_place");
  auto ad = acc.data();
  auto xd = x.data();
  for (std::size_t i = 0; i < ad.size(); ++i) ad[i] += xd[i];
}

}  // namespace ban
