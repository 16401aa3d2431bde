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
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ban/config.hpp"
#include "ban/data.hpp"
#include "ban/model.hpp"

namespace ban {

/// A directory of labeled scenes described by manifest.json.
struct Dataset {
  std::vector<std::string> class_names;
  std::vector<std::string> files;
  std::vector<PointCloud> scenes;
};

/// Writes `count` scenes (seeds spec.seed, spec.seed + 1, ...), the recipe as
/// spec.ini, and manifest.json. Returns the scene file paths.
std::vector<std::filesystem::path> generate_dataset(const SceneSpec& spec, std::size_t count,
                                                    const std::filesystem::path& dir);
/// Throws kIo for a missing manifest and kParse for a malformed one.
Dataset load_dataset(const std::filesystem::path& dir);

/// Drops colors when the configuration does not use them.
PointCloud model_view(const PointCloud& scene, bool use_colors);

struct TrainingSample {
  Matrix features;
  std::vector<int> semantic;
  std::vector<int> instance;
};

/// One sample per block sample set, scenes in order, blocks in grid order.
std::vector<TrainingSample> make_samples(const Dataset& data, const RunConfig& config);

/// Backbone for a dataset: input width from colors, classes from the names.
BackboneConfig backbone_for(const RunConfig& config, const Dataset& data);

struct LossParts {
  double semantic = 0.0;
  double instance = 0.0;
  double total = 0.0;
};

/// Cross entropy of the logits plus the discriminative loss of the embedding.
Var segmentation_loss(Tape& tape, const SegModel& model, const Matrix& features, std::span<const int> semantic,
                      std::span<const int> instance, const DiscriminativeParams& params, LossParts* parts = nullptr);

/// Evaluates every item on its own tape, then writes the batch-mean gradient
/// into the model parameters, summing items in batch order.
LossParts batch_gradients(SegModel& model, std::span<const TrainingSample* const> batch,
                          const DiscriminativeParams& params, std::size_t threads);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::uint64_t step = 0;  // optimizer updates so far
  LossParts loss;          // mean over the epoch's samples
  double learning_rate = 0.0;
  double seconds = 0.0;
};

nlohmann::json to_json(const EpochRecord& r);

struct TrainResult {
  std::vector<EpochRecord> epochs;  // epochs run by this call
  std::filesystem::path last;
  std::filesystem::path best;
};

/// Trains into out_dir: config.ini, train_log.jsonl (one record per epoch;
/// a fresh run truncates it, a resumed run appends), last.json after every epoch and best.json on improvement.
/// A non-finite loss or gradient throws kNumeric and leaves last.json as the
/// final good state. `resume` continues from a checkpoint written here.
TrainResult train(const RunConfig& config, const Dataset& data, const std::filesystem::path& out_dir,
                  const std::optional<std::filesystem::path>& resume = std::nullopt, std::ostream* progress = nullptr);

/// Model plus training metadata from a checkpoint written by train().
struct LoadedCheckpoint {
  SegModel model;
  nlohmann::json meta;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Throws kVersion when `model` differs from what `config` builds for `data`.
void require_compatible(const SegModel& model, const RunConfig& config, const Dataset& data,
                        const std::string& source);

}  // namespace ban
