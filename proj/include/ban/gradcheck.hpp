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
#include <string>
#include <vector>

#include "ban/losses.hpp"
#include "ban/model.hpp"

namespace ban {

struct GradcheckEntry {
  std::string check;  // which comparison
  std::string size;   // problem dimensions
  std::uint64_t seed = 0;
  double error = 0.0;  // max|a - b| / max(max|a|, max|b|, floor), per tensor
  double tolerance = 0.0;
  bool pass() const { return error < tolerance; }
};

/// Narrow widths so that every scalar parameter can be perturbed.
BackboneConfig gradcheck_backbone();

struct GradcheckOptions {
  std::vector<std::size_t> kronecker_sizes{1, 2, 3};  // N, N_X, N_Y each range over these
  std::size_t random_cases = 20;
  std::size_t model_seeds = 5;
  std::size_t model_points = 8;
  std::uint64_t seed = 0;
  BackboneConfig model = gradcheck_backbone();
  BiDirConfig attention;
  DiscriminativeParams loss;
  double step = 1e-5;
  /// The model loss is O(1) while attention-weight gradients at
  /// initialization are O(1e-7), so roundoff needs a wide step while ReLU
  /// kinks need a narrow one. Each tensor keeps its best step, and tensors
  /// smaller than the floor are compared in absolute terms.
  std::vector<double> model_steps{1e-4, 1e-5};
  double model_floor = 1e-6;
  double kronecker_tolerance = 1e-10;
  double finite_difference_tolerance = 1e-6;
  double model_tolerance = 1e-4;
  /// Test hook: added to the first analytic entry of every comparison.
  double corrupt = 0.0;
};

/// Closed-form vs literal Kronecker gradients, closed-form vs central
/// differences on random sizes, and full-model parameter gradients.
std::vector<GradcheckEntry> run_gradcheck(const GradcheckOptions& options);

/// One entry per parameter tensor of `model` on a random labeled cloud.
std::vector<GradcheckEntry> check_model_gradients(SegModel& model, std::size_t points, std::uint64_t seed,
                                                  const DiscriminativeParams& loss, std::span<const double> steps, double floor,
                                                  double tolerance, double corrupt = 0.0);

std::string gradcheck_table(const std::vector<GradcheckEntry>& entries);

}  // namespace ban
