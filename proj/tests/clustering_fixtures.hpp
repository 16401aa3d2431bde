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


// Clustering and merging fixtures shared by the unit and acceptance tests.

#pragma once

#include <map>
#include <random>
#include <vector>

#include "ban/clustering.hpp"
#include "ban/linear.hpp"

namespace ban::testing {

// k tight groups on a line, 10 bandwidths apart.
inline Matrix separated_groups(int k, std::size_t per_group, double bandwidth, std::mt19937_64& rng,
                               std::vector<int>* truth = nullptr) {
  Matrix m(static_cast<std::size_t>(k) * per_group, 5);
  for (int g = 0; g < k; ++g)
    for (std::size_t i = 0; i < per_group; ++i) {
      const std::size_t r = static_cast<std::size_t>(g) * per_group + i;
      for (std::size_t c = 0; c < 5; ++c) m(r, c) = uniform(rng, -0.1, 0.1) * bandwidth;
      m(r, 0) += 10.0 * bandwidth * g;
      if (truth) truth->push_back(g);
    }
  return m;
}

// Labels rewritten by order of first appearance, so that two partitions
// compare equal iff they group points identically.
inline std::vector<int> canonical(const std::vector<int>& labels) {
  std::map<int, int> seen;
  std::vector<int> out;
  for (int l : labels) out.push_back(seen.emplace(l, static_cast<int>(seen.size())).first->second);
  return out;
}

inline PointCloud line_scene(std::size_t n, double length) {
  PointCloud c;
  c.semantic.emplace();
  c.instance.emplace();
  for (std::size_t i = 0; i < n; ++i) {
    c.positions.push_back({length * static_cast<double>(i) / static_cast<double>(n - 1), 0.5, 0.2});
    c.semantic->push_back(0);
    c.instance->push_back(0);
  }
  return c;
}

inline BlockPrediction predict_range(const PointCloud& scene, double lo, double hi, int local_id,
                                     int cls = 0) {
  BlockPrediction b;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (scene.positions[i][0] < lo || scene.positions[i][0] > hi) continue;
    b.indices.push_back(i);
    b.instance.push_back(local_id);
    b.semantic.push_back(cls);
  }
  return b;
}

}  // namespace ban::testing
