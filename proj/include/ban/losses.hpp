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

#include <span>
#include <string>
#include <vector>

#include "ban/tape.hpp"

namespace ban {

enum class DistanceNorm { kL1, kL2 };

/// Margins and weights of the discriminative embedding loss.
struct DiscriminativeParams {
  double delta_v = 0.5;  // pull margin
  double delta_d = 1.5;  // push margin
  double alpha = 1.0;    // variance term weight
  double beta = 1.0;     // distance term weight
  double gamma = 0.001;  // regularizer weight
  DistanceNorm norm = DistanceNorm::kL1;

  /// Throws kConfig on negative margins or weights.
  void validate() const;
  /// Non-fatal issues, e.g. delta_d <= 2 delta_v.
  std::vector<std::string> warnings() const;
};

struct DiscriminativeTerms {
  double var = 0.0;
  double dist = 0.0;
  double reg = 0.0;
  double total = 0.0;
};

struct LossWithGrad {
  double value = 0.0;
  Matrix grad;
};

/// Mean over points of -log softmax(logits)[label]. Throws kLabel for labels
/// outside [0, cols).
LossWithGrad cross_entropy_with_grad(const Matrix& logits, std::span<const int> labels);
double cross_entropy(const Matrix& logits, std::span<const int> labels);
Var cross_entropy(Tape& tape, Var logits, std::span<const int> labels);

/// alpha L_var + beta L_dist + gamma L_reg over the instances named in
/// `instance_labels` (negative ids are ignored). Throws kInput when no point
/// carries an instance id.
///
///   L_var  = 1/C sum_c 1/N_c sum_{j in c} [ |mu_c - x_j| - delta_v ]_+^2
///   L_dist = 1/(C(C-1)) sum_{A != B} [ 2 delta_d - |mu_A - mu_B| ]_+^2
///   L_reg  = 1/C sum_c |mu_c|
DiscriminativeTerms discriminative_terms(const Matrix& embedding, std::span<const int> instance_labels,
                                         const DiscriminativeParams& params);
LossWithGrad discriminative_with_grad(const Matrix& embedding, std::span<const int> instance_labels,
                                      const DiscriminativeParams& params, DiscriminativeTerms* terms = nullptr);
Var discriminative(Tape& tape, Var embedding, std::span<const int> instance_labels,
                   const DiscriminativeParams& params, DiscriminativeTerms* terms = nullptr);

/// L = L_sem + L_ins.
Var total_loss(Tape& tape, Var semantic_loss, Var instance_loss);

}  // namespace ban
