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

#include <cstdint>
#include <functional>
#include <random>

#include "ban/linear.hpp"
#include "ban/matrix.hpp"

namespace ban::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = uniform(rng, lo, hi);
  return m;
}

/// Reference product: the textbook triple loop.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

/// Central-difference gradient of a scalar function of one matrix.
inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& at,
                               double h = 1e-5) {
  Matrix grad(at.rows(), at.cols());
  Matrix probe = at;
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = f(probe);
    probe.data()[i] = orig - h;
    const double down = f(probe);
    probe.data()[i] = orig;
    grad.data()[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Central-difference gradient with respect to a parameter held by reference.
inline Matrix numeric_gradient(Parameter& p, const std::function<double()>& f, double h = 1e-5) {
  Matrix grad(p.value.rows(), p.value.cols());
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const double orig = p.value.data()[i];
    p.value.data()[i] = orig + h;
    const double up = f();
    p.value.data()[i] = orig - h;
    const double down = f();
    p.value.data()[i] = orig;
    grad.data()[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline std::vector<std::size_t> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
  return perm;
}

}  // namespace ban::testing
