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

#include <filesystem>
#include <ostream>
#include <utility>
#include <vector>

#include "ban/clustering.hpp"
#include "ban/config.hpp"
#include "ban/metrics.hpp"
#include "ban/training.hpp"

namespace ban {

/// Blocks -> network -> mean-shift per sample set -> block merging.
/// `scene_index` seeds the block sampling as in training.
SegmentationResult segment_scene(const SegModel& model, const PointCloud& scene, const RunConfig& config,
                                 std::size_t scene_index);

/// The same block and merging path fed with ground-truth labels instead of
/// network output.
SegmentationResult ground_truth_segmentation(const PointCloud& scene, const RunConfig& config,
                                             std::size_t scene_index);

struct Evaluation {
  MetricsReport report;
  std::vector<SegmentationResult> scenes;
};

/// Scores every scene of a labeled dataset. Without a model the ground truth
/// is used as the prediction.
Evaluation evaluate(const SegModel* model, const Dataset& data, const RunConfig& config);

/// metrics.txt, metrics.tsv and metrics.json.
void write_report(const MetricsReport& report, const std::filesystem::path& dir);

/// Binary masks of row `point_index` of the semantic and instance similarity
/// matrices, computed over the whole scene. The mask is stored as the
/// semantic label (1 similar, 0 not). Throws kBounds for a bad index and
/// kConfig when the model's mode builds no similarity matrices.
std::pair<PointCloud, PointCloud> export_similarity(const SegModel& model, const PointCloud& scene,
                                                    std::size_t point_index, double threshold);

struct AblationRow {
  BiDirMode mode;
  MetricsReport report;
};

/// Trains and evaluates every mode on the same data and seed; each mode gets
/// its own subdirectory with its effective config.
std::vector<AblationRow> ablate(const RunConfig& config, const Dataset& train_data, const Dataset& test_data,
                                const std::vector<BiDirMode>& modes, const std::filesystem::path& out_dir,
                                std::ostream* progress = nullptr);

/// Tab-separated: mode then the seven headline metrics.
std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace ban
