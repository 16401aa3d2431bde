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
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ban/linear.hpp"

namespace ban {

// Cross-branch attention.
//
// One branch's features X define a point-to-point similarity matrix
// P = softmax_rows(theta(X) phi(X)^T); the other branch's features Y are
// propagated through it and the result is concatenated with Y itself:
//
//   attend(X, Y) = [ P g(Y) | Y ]
//
// Element-wise fusion (adding or concatenating S into I and vice versa) makes
// two points of the same class but different instances share one fused
// representation for both tasks, so one of the two heads has to fight it.
// Propagating through a similarity matrix and keeping Y untouched in the
// second column block avoids that.

struct AttentionWeights {
  LinearMap theta;  // N_X -> d_k
  LinearMap phi;    // N_X -> d_k
  LinearMap g;      // N_Y -> N_Y

  static AttentionWeights create(const std::string& name, std::size_t x_dim, std::size_t y_dim,
                                 std::size_t key_dim, std::mt19937_64& rng);

  /// Throws kDimension if the maps cannot be applied to X (x_dim) and Y (y_dim).
  void validate(std::size_t x_dim, std::size_t y_dim) const;

  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;
};

/// Row-stochastic N x N matrix; row i is point i's attention over all points.
struct SimilarityMatrix {
  Matrix p;
};

enum class BiDirMode : std::uint8_t {
  kBothStoiFirst,
  kBothItosFirst,
  kStoiOnly,
  kItosOnly,
  kSelfAttention,
  kNone,
};

std::string_view to_string(BiDirMode mode);
/// Accepts the names produced by to_string. Throws kConfig otherwise.
BiDirMode parse_bidir_mode(std::string_view name);
const std::vector<BiDirMode>& all_bidir_modes();

struct BiDirConfig {
  BiDirMode mode = BiDirMode::kBothStoiFirst;
  /// When set, the second attention of a "both" mode takes the first one's
  /// widened output as its X instead of the branch's original features.
  bool chain_features = false;
};

/// Weights for the two directions. `to_instance` produces the new instance
/// features (STOI, or instance self-attention); `to_semantic` produces the new
/// semantic features (ITOS, or semantic self-attention).
struct BiDirWeights {
  std::optional<AttentionWeights> to_instance;
  std::optional<AttentionWeights> to_semantic;

  static BiDirWeights create(const BiDirConfig& cfg, std::size_t n_s, std::size_t n_i, std::size_t key_dim,
                             std::mt19937_64& rng);
};

/// Output widths (semantic, instance) after bi_directional under `cfg`.
std::pair<std::size_t, std::size_t> bidir_output_widths(const BiDirConfig& cfg, std::size_t n_s, std::size_t n_i);

/// Order in which reductions over points are carried out: rows sorted
/// lexicographically by (x row, y row). Points that tie contribute identical
/// terms, so any permutation of the input yields the same sums bit for bit.
std::vector<std::size_t> reduction_order(const Matrix& x, const Matrix& y);

/// P from X. Throws kDimension if X does not fit the weights.
SimilarityMatrix similarity(const Matrix& x, const AttentionWeights& w);

/// Taped attention. When `p_out` is given it receives P in natural column order.
Var attend(Tape& tape, Var x, Var y, const AttentionWeights& w, SimilarityMatrix* p_out = nullptr);
Matrix attend(const Matrix& x, const Matrix& y, const AttentionWeights& w);

/// [P g(Y) | Y] for a caller-supplied P (e.g. identity), bypassing the softmax.
Matrix attend_with_similarity(const Matrix& p, const Matrix& y, const LinearMap& g);

struct BiDirOutput {
  Var semantic;
  Var instance;
  std::optional<SimilarityMatrix> p_sem;   // built from semantic features
  std::optional<SimilarityMatrix> p_inst;  // built from instance features
};

BiDirOutput bi_directional(Tape& tape, Var s, Var i, const BiDirConfig& cfg, const BiDirWeights& w);
std::pair<Matrix, Matrix> bi_directional(const Matrix& s, const Matrix& i, const BiDirConfig& cfg,
                                         const BiDirWeights& w);

// Simplified operator Z = X X^T Y (no softmax, no re-weighting, no
// concatenation) and its closed-form gradients for an upstream dL/dZ.

Matrix simplified_forward(const Matrix& x, const Matrix& y);
/// dL/dX = G Y^T X + Y G^T X.
Matrix simplified_grad_x(const Matrix& x, const Matrix& y, const Matrix& upstream);
/// dL/dY = X X^T G.
Matrix simplified_grad_y(const Matrix& x, const Matrix& y, const Matrix& upstream);

/// 1/N, the similarity of a uniform attention row.
double default_similarity_threshold(std::size_t n);

/// Marks points whose similarity to `point_index` is >= threshold.
std::vector<std::uint8_t> similarity_row(const SimilarityMatrix& p, std::size_t point_index, double threshold);

}  // namespace ban
