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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ban {

using Vec3 = std::array<double, 3>;

/// Labeled point set. Label arrays, when present, have one entry per point.
struct PointCloud {
  std::vector<Vec3> positions;                // meters
  std::optional<std::vector<Vec3>> colors;    // each channel in [0, 1]
  std::optional<std::vector<int>> semantic;   // class id per point
  std::optional<std::vector<int>> instance;   // instance id per point

  std::size_t size() const noexcept { return positions.size(); }
  bool labeled() const noexcept { return semantic.has_value() && instance.has_value(); }

  /// Throws kInput on non-finite positions or mismatched array lengths.
  void validate() const;
  /// Axis-aligned bounds; throws kInput when empty.
  std::pair<Vec3, Vec3> bounds() const;
};

enum class Shape { kBox, kPlane, kCylinder, kCluster };

struct ClassSpec {
  std::string name;
  Shape shape = Shape::kBox;
  Vec3 size{0.5, 0.5, 0.8};  // footprint x, footprint y, height (plane: z offset)
  int min_instances = 1;
  int max_instances = 1;
  int points_per_instance = 300;
  Vec3 color{0.5, 0.5, 0.5};
};

/// Recipe for a synthetic labeled scene. Same spec, same scene, bit for bit.
struct SceneSpec {
  std::vector<ClassSpec> classes;
  Vec3 extent{4.0, 4.0, 3.0};
  double noise = 0.005;   // Gaussian jitter (m)
  double min_gap = 0.6;   // minimum footprint separation between objects (m)
  bool with_colors = true;
  std::uint64_t seed = 0;

  /// Throws kSpec for an unusable recipe (no classes, bad ranges, ...).
  void validate() const;

  static SceneSpec preset(const std::string& name);
  static SceneSpec load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

std::string to_string(Shape shape);
Shape parse_shape(const std::string& name);

/// Fully labeled scene with dense instance ids. When a class allows two or
/// more instances, at least one class receives two or more.
PointCloud generate_scene(const SceneSpec& spec);

enum class CloudFormat { kText, kJson };

/// kJson for a ".json" extension, kText otherwise.
CloudFormat format_for(const std::filesystem::path& path);

// Text format: one point per line, whitespace separated
//   x y z [r g b] [sem] [inst]
// '#' starts a comment line. A "# fields: ..." comment names the columns;
// without it the layout is inferred from the column count of the first
// record (3: xyz, 4: +sem, 5: +sem inst, 6: +rgb, 7: +rgb sem, 8: all).
PointCloud load_cloud(const std::filesystem::path& path, std::optional<CloudFormat> format = std::nullopt);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                std::optional<CloudFormat> format = std::nullopt);

std::string cloud_to_text(const PointCloud& cloud);
PointCloud cloud_from_text(const std::string& text, const std::string& source = "<memory>");

}  // namespace ban
