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
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "ban/attention.hpp"
#include "ban/data.hpp"
#include "json.hpp"

namespace ban {

struct BackboneConfig {
  std::size_t input_dim = 6;  // 6: xyz channels, 9: plus rgb
  std::vector<std::size_t> encoder_widths{64, 64, 128};
  std::size_t semantic_width = 128;  // N_S
  std::size_t instance_width = 128;  // N_I
  std::size_t embedding_width = 5;   // N_E
  std::size_t num_classes = 2;       // N_C
  std::size_t key_width = 64;        // d_k of theta/phi
  std::size_t head_hidden = 64;

  /// Throws kConfig on zero widths or fewer than two classes.
  void validate() const;
};

nlohmann::json to_json(const BackboneConfig& c);
BackboneConfig backbone_config_from_json(const nlohmann::json& j);

/// Per-point network outputs of one forward pass.
struct ForwardOutput {
  Var logits;     // N x N_C
  Var embedding;  // N x N_E
  std::optional<SimilarityMatrix> p_sem;
  std::optional<SimilarityMatrix> p_inst;
};

/// PointNet-style shared encoder (per-point MLP plus one broadcast global
/// max-pool feature), semantic and instance decoders, the bi-directional
/// attention module, and the two output heads.
class SegModel {
 public:
  SegModel(BackboneConfig config, BiDirConfig attention, std::uint64_t seed);

  const BackboneConfig& config() const noexcept { return config_; }
  const BiDirConfig& attention() const noexcept { return attention_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();

  /// Throws kConfig when the feature width does not match input_dim and
  /// kDimension for an empty input.
  ForwardOutput forward(Tape& tape, const Matrix& features) const;

  /// Semantic (S) and instance (I) decoder outputs before attention.
  std::pair<Var, Var> encode(Tape& tape, Var features) const;

 private:
  struct Head {
    LinearMap hidden;
    LinearMap out;
  };

  BackboneConfig config_;
  BiDirConfig attention_;
  std::vector<LinearMap> encoder_;
  LinearMap semantic_decoder_;
  LinearMap instance_decoder_;
  BiDirWeights bidir_;
  Head semantic_head_;
  Head instance_head_;
};

/// Features for a cloud treated as one block: xy relative to the cloud's
/// footprint center, z above its floor, xyz scaled into [0,1] by its extent,
/// then rgb when present.
Matrix point_features(const PointCloud& cloud);
/// Same channels for a subset of a scene: xy relative to (center_x,
/// center_y), z above scene_min, xyz scaled by the scene extent, then rgb.
Matrix point_features(const PointCloud& scene, std::span<const std::size_t> indices, double center_x,
                      double center_y, const Vec3& scene_min, const Vec3& scene_extent);
std::size_t feature_width(bool with_colors);

/// Value-only forward pass.
struct Prediction {
  Matrix logits;
  Matrix embedding;
  std::optional<SimilarityMatrix> p_sem;
  std::optional<SimilarityMatrix> p_inst;
};
Prediction predict(const SegModel& model, const Matrix& features);
Prediction predict(const SegModel& model, const PointCloud& cloud);

/// Argmax per row; ties go to the lowest class.
std::vector<int> argmax_rows(const Matrix& logits);

inline constexpr int kCheckpointVersion = 1;

/// Checkpoint document: {"format","version","backbone","attention","parameters",...}.
/// `extra` entries are merged at top level (optimizer state, run config).
nlohmann::json checkpoint_json(const SegModel& model, const nlohmann::json& extra = nlohmann::json::object());
/// Rebuilds the model. Throws kVersion on a format/version mismatch and
/// kParse on a malformed document.
SegModel model_from_checkpoint(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const SegModel& model,
                     const nlohmann::json& extra = nlohmann::json::object());
nlohmann::json read_checkpoint(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace ban
