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
#include <random>
#include <string>
#include <vector>

#include "ban/tape.hpp"

namespace ban {

/// Uniform double in [lo, hi) drawn from the top 53 bits of a 64-bit engine.
/// Spelled out so streams are identical across standard libraries.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform(rng, 0.0, static_cast<double>(n)));
}

/// Affine map y = x W + b applied row-wise. W is in_dim x out_dim.
class LinearMap {
 public:
  LinearMap() = default;
  /// Weights and bias uniform in +-sqrt(1/in_dim).
  LinearMap(const std::string& name, std::size_t in_dim, std::size_t out_dim, std::mt19937_64& rng);

  std::size_t in_dim() const noexcept { return weight_.value.rows(); }
  std::size_t out_dim() const noexcept { return weight_.value.cols(); }

  Var apply(Tape& tape, Var x) const;
  Matrix apply(const Matrix& x) const;

  Parameter& weight() noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }
  const Parameter& weight() const noexcept { return weight_; }
  const Parameter& bias() const noexcept { return bias_; }

  void collect(std::vector<Parameter*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }
  void collect(std::vector<const Parameter*>& out) const {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  Parameter weight_;
  Parameter bias_;
};

}  // namespace ban
