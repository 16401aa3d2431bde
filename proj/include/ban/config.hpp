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
#include <string>
#include <vector>

#include "ban/attention.hpp"
#include "ban/clustering.hpp"
#include "ban/losses.hpp"
#include "ban/model.hpp"
#include "ban/optim.hpp"

namespace ban {

/// Environment variable naming the config file used when none is given.
inline constexpr const char* kConfigEnv = "BAN_CONFIG";

/// Every tunable of a run. Serialized as a sectioned key-value file:
///
///   [train]
///   epochs = 20
///   batch_size = 12
///
/// model.num_classes = 0 and model.input_dim come from the training data.
struct RunConfig {
  BackboneConfig model{.num_classes = 0};
  bool use_colors = true;  // feed rgb when the data has it
  BiDirConfig attention;
  DiscriminativeParams loss;
  AdamConfig optim;
  std::size_t epochs = 20;
  std::size_t batch_size = 12;
  std::uint64_t seed = 0;
  BlockParams blocks;
  MeanShiftParams cluster;
  MergeParams merge;
  double iou_threshold = 0.5;
  std::size_t threads = 1;
  std::string train_data;
  std::string test_data;
  std::string output;

  /// Throws kConfig on out-of-range values.
  void validate() const;

  /// Keys absent from the file keep their defaults; unknown keys are errors.
  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string to_ini() const;

  /// Applies `section.key=value`. Throws kConfig for unknown keys or bad values.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  /// All keys in file order, as `section.key`.
  static std::vector<std::string> keys();
};

}  // namespace ban
