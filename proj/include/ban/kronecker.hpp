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

#include "ban/matrix.hpp"

namespace ban::kron {

// Literal vectorized-calculus forms of the simplified attention gradients.
// They materialize N*N_Y x N*N_X matrices and exist to cross-check the
// closed-form gradients at tiny sizes only.

/// Column-major stacking into an (rows*cols) x 1 matrix.
Matrix vec(const Matrix& a);
Matrix unvec(const Matrix& v, std::size_t rows, std::size_t cols);
Matrix kronecker(const Matrix& a, const Matrix& b);
/// K with K vec(A) = vec(A^T) for an m x n matrix A.
Matrix commutation(std::size_t m, std::size_t n);

/// d vec(Z) / d vec(X) for Z = X X^T Y: (X^T Y)^T (x) E_N + (Y^T (x) X) K_{N,N_X}.
Matrix jacobian_x(const Matrix& x, const Matrix& y);
/// d vec(Z) / d vec(Y) = E_{N_Y} (x) X X^T.
Matrix jacobian_y(const Matrix& x, const Matrix& y);

/// [(X^T Y) (x) E_N + K_{N_X,N} (Y (x) X^T)] vec(G), reshaped to N x N_X.
Matrix grad_x(const Matrix& x, const Matrix& y, const Matrix& upstream);
/// (E_{N_Y} (x) X X^T) vec(G), reshaped to N x N_Y.
Matrix grad_y(const Matrix& x, const Matrix& y, const Matrix& upstream);

}  // namespace ban::kron
