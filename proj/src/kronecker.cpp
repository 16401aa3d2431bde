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

#include "ban/kronecker.hpp"

namespace ban::kron {

Matrix vec(const Matrix& a) {
  Matrix v(a.rows() * a.cols(), 1);
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) v(j * a.rows() + i, 0) = a(i, j);
  return v;
}

Matrix unvec(const Matrix& v, std::size_t rows, std::size_t cols) {
  if (v.cols() != 1 || v.rows() != rows * cols) fail(ErrorKind::kDimension, "unvec: length mismatch");
  Matrix a(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) a(i, j) = v(j * rows + i, 0);
  return a;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q) k(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return k;
}

Matrix commutation(std::size_t m, std::size_t n) {
  Matrix k(m * n, m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) k(i * n + j, j * m + i) = 1.0;
  return k;
}

Matrix jacobian_x(const Matrix& x, const Matrix& y) {
  const std::size_t n = x.rows();
  const Matrix xty = matmul_transa(x, y);
  Matrix j = kronecker(transpose(xty), Matrix::identity(n));
  add_in_place(j, matmul(kronecker(transpose(y), x), commutation(n, x.cols())));
  return j;
}

Matrix jacobian_y(const Matrix& x, const Matrix& y) {
  return kronecker(Matrix::identity(y.cols()), matmul(x, transpose(x)));
}

Matrix grad_x(const Matrix& x, const Matrix& y, const Matrix& upstream) {
  const std::size_t n = x.rows();
  Matrix op = kronecker(matmul_transa(x, y), Matrix::identity(n));
  add_in_place(op, matmul(commutation(x.cols(), n), kronecker(y, transpose(x))));
  return unvec(matmul(op, vec(upstream)), n, x.cols());
}

Matrix grad_y(const Matrix& x, const Matrix& y, const Matrix& upstream) {
  const Matrix op = kronecker(Matrix::identity(y.cols()), matmul(x, transpose(x)));
  return unvec(matmul(op, vec(upstream)), y.rows(), y.cols());
}

}  // namespace ban::kron
