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

#include "ban/linear.hpp"

#include <cmath>

namespace ban {

LinearMap::LinearMap(const std::string& name, std::size_t in_dim, std::size_t out_dim,
                     std::mt19937_64& rng) {
  if (in_dim == 0 || out_dim == 0) fail(ErrorKind::kConfig, "linear map " + name + " has a zero width");
  const double bound = std::sqrt(1.0 / static_cast<double>(in_dim));
  weight_.name = name + ".weight";
  weight_.value = Matrix(in_dim, out_dim);
  for (double& v : weight_.value.data()) v = uniform(rng, -bound, bound);
  bias_.name = name + ".bias";
  bias_.value = Matrix(1, out_dim);
  for (double& v : bias_.value.data()) v = uniform(rng, -bound, bound);
  weight_.zero_grad();
  bias_.zero_grad();
}

Var LinearMap::apply(Tape& tape, Var x) const {
  if (x.cols() != in_dim()) {
    fail(ErrorKind::kDimension, weight_.name + " expects " + std::to_string(in_dim()) + " input columns, got " +
                                    std::to_string(x.cols()));
  }
  return tape.add_row_bias(tape.matmul(x, tape.parameter(weight_)), tape.parameter(bias_));
}

Matrix LinearMap::apply(const Matrix& x) const {
  if (x.cols() != in_dim()) {
    fail(ErrorKind::kDimension, weight_.name + " expects " + std::to_string(in_dim()) + " input columns, got " +
                                    std::to_string(x.cols()));
  }
  return add_row_bias(matmul(x, weight_.value), bias_.value);
}

}  // namespace ban
