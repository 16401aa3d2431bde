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
#include <span>
#include <string>
#include <vector>

#include "ban/data.hpp"
#include "ban/matrix.hpp"

namespace ban {

enum class Kernel { kFlat, kGaussian };

std::string to_string(Kernel kernel);
Kernel parse_kernel(const std::string& name);

struct MeanShiftParams {
  double bandwidth = 0.6;
  Kernel kernel = Kernel::kFlat;
  std::size_t max_iterations = 300;
  double tolerance = 1e-4;  // convergence shift, in units of bandwidth
};

struct ClusterResult {
  std::vector<int> labels;  // dense ids from 0
  Matrix modes;             // one row per cluster
  std::size_t cluster_count() const noexcept { return modes.rows(); }
};

/// Rows are processed in canonical (lexicographic) order, so the result does
/// not depend on the input row order beyond cluster-id renaming.
/// Throws kConfig for a non-positive bandwidth.
ClusterResult mean_shift(const Matrix& embedding, const MeanShiftParams& params, std::size_t threads = 1);

struct BlockParams {
  double size = 1.0;    // footprint edge (m)
  double stride = 0.5;  // grid step (m)
  std::size_t points_per_block = 4096;
  std::uint64_t seed = 0;
};

struct Block {
  std::size_t grid_x = 0;
  std::size_t grid_y = 0;
  Vec3 origin{};                      // lower corner, scene coordinates
  std::vector<std::size_t> indices;   // every scene point inside the footprint
  /// Fixed-size sample sets covering `indices`; a block with more points than
  /// points_per_block yields several, the last topped up with replacement.
  std::vector<std::vector<std::size_t>> samples;
};

/// Blocks per axis: ceil((extent - size) / stride) + 1, at least 1.
std::size_t grid_count(double extent, double size, double stride);

/// Overlapping grid over the ground plane in x-major order; empty cells are
/// dropped. Throws kInput for an empty scene and kConfig for bad parameters.
std::vector<Block> split_blocks(const PointCloud& scene, const BlockParams& params);

/// Network input for one sample set: block-centered xy, floor-relative z,
/// scene-normalized xyz, then colors when present.
Matrix block_features(const PointCloud& scene, const Block& block, std::span<const std::size_t> sample,
                      const BlockParams& params);

struct BlockPrediction {
  std::vector<std::size_t> indices;  // scene point indices
  std::vector<int> instance;         // block-local instance ids
  std::vector<int> semantic;
};

struct MergeParams {
  double voxel_size = 0.5;
  double overlap_threshold = 0.3;  // share of a fragment's voxels
};

struct SegmentationResult {
  std::vector<int> semantic;
  std::vector<int> instance;  // dense ids from 0
  std::size_t uncovered = 0;  // points labeled from their nearest covered neighbor
  std::optional<Matrix> embedding;
};

/// Merges per-block instances into scene instances by voxel overlap voting,
/// processing blocks in the given order. A fragment only adopts global ids
/// of its own (majority) class.
SegmentationResult block_merging(const PointCloud& scene, std::span<const BlockPrediction> blocks,
                                 const MergeParams& params);

}  // namespace ban
