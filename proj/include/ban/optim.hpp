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
#include <span>
#include <vector>

#include "ban/tape.hpp"

namespace ban {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// The rate halves every this many iterations; 0 disables the schedule.
  std::uint64_t halving_interval = 300000;
};

/// Learning rate in effect at a 0-based global iteration.
double scheduled_learning_rate(const AdamConfig& cfg, std::uint64_t iteration);

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::uint64_t step = 0;  // completed updates

  AdamState() = default;
  AdamState(AdamConfig cfg, std::span<Parameter* const> params);
};

/// One Adam update of every parameter from its `grad`. Throws kNumeric, with
/// the offending parameter named, before touching anything if a gradient is
/// not finite.
void adam_step(AdamState& state, std::span<Parameter* const> params);

}  // namespace ban
