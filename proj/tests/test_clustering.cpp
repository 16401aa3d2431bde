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

#include <algorithm>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "ban/clustering.hpp"
#include "ban/errors.hpp"
#include "doctest.h"
#include "clustering_fixtures.hpp"
#include "test_util.hpp"

using namespace ban;
using namespace ban::testing;

namespace {

Matrix ring(std::size_t n, double radius) {
  Matrix m(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    m(i, 0) = radius * std::cos(t);
    m(i, 1) = radius * std::sin(t);
  }
  return m;
}

}  // namespace

TEST_CASE("identical points form one cluster") {
  const Matrix e(20, 5, 0.25);
  const ClusterResult r = mean_shift(e, {});
  CHECK(r.cluster_count() == 1);
  CHECK(std::set<int>(r.labels.begin(), r.labels.end()) == std::set<int>{0});
}

TEST_CASE("separated groups are recovered intact") {
  std::mt19937_64 rng(1);
  for (int k : {1, 2, 3, 5}) {
    std::vector<int> truth;
    const Matrix e = separated_groups(k, 30, 0.6, rng, &truth);
    const ClusterResult r = mean_shift(e, {});
    CHECK(r.cluster_count() == static_cast<std::size_t>(k));
    CHECK(canonical(r.labels) == canonical(truth));
    for (int l : r.labels) CHECK((l >= 0 && l < k));
  }
}

TEST_CASE("gaussian kernel also separates distant groups") {
  std::mt19937_64 rng(2);
  std::vector<int> truth;
  const Matrix e = separated_groups(2, 25, 0.6, rng, &truth);
  MeanShiftParams p;
  p.kernel = Kernel::kGaussian;
  const ClusterResult r = mean_shift(e, p);
  CHECK(r.cluster_count() == 2);
  CHECK(canonical(r.labels) == canonical(truth));
}

TEST_CASE("mean-shift is invariant to point order") {
  std::mt19937_64 rng(3);
  std::vector<Matrix> fixtures = {ring(60, 1.0), separated_groups(3, 20, 0.6, rng)};
  Matrix blobs(80, 3);
  for (double& v : blobs.data()) v = uniform(rng, -2.0, 2.0);
  fixtures.push_back(blobs);
  for (const Matrix& e : fixtures) {
    const ClusterResult base = mean_shift(e, {});
    for (int trial = 0; trial < 10; ++trial) {
      const auto perm = random_permutation(e.rows(), rng);
      const ClusterResult r = mean_shift(permute_rows(e, perm), {});
      CHECK(r.modes == base.modes);
      for (std::size_t i = 0; i < perm.size(); ++i) CHECK(r.labels[i] == base.labels[perm[i]]);
    }
  }
}

TEST_CASE("cluster count does not grow with bandwidth") {
  std::mt19937_64 rng(4);
  std::vector<Matrix> fixtures = {ring(60, 1.5), separated_groups(4, 15, 0.3, rng)};
  Matrix blobs(60, 2);
  for (double& v : blobs.data()) v = uniform(rng, -3.0, 3.0);
  fixtures.push_back(blobs);
  for (const Matrix& e : fixtures) {
    std::size_t previous = e.rows() + 1;
    for (double bw : {0.3, 0.6, 1.2, 2.4, 4.8}) {
      MeanShiftParams p;
      p.bandwidth = bw;
      const std::size_t count = mean_shift(e, p).cluster_count();
      CHECK(count <= previous);
      previous = count;
    }
  }
}

TEST_CASE("threads do not change mean-shift results") {
  std::mt19937_64 rng(5);
  const Matrix e = separated_groups(3, 40, 0.6, rng);
  const ClusterResult a = mean_shift(e, {}, 1);
  const ClusterResult b = mean_shift(e, {}, 4);
  CHECK(a.labels == b.labels);
  CHECK(a.modes == b.modes);
}

TEST_CASE("mean-shift rejects a non-positive bandwidth") {
  MeanShiftParams p;
  p.bandwidth = 0.0;
  CHECK_THROWS_AS(mean_shift(Matrix(3, 2), p), Error);
  CHECK(mean_shift(Matrix(0, 5), {}).labels.empty());
}

TEST_CASE("grid count follows the closed form") {
  CHECK(grid_count(0.8, 1.0, 0.5) == 1);
  CHECK(grid_count(1.0, 1.0, 0.5) == 1);
  CHECK(grid_count(2.0, 1.0, 0.5) == 3);
  CHECK(grid_count(2.1, 1.0, 0.5) == 4);
  CHECK(grid_count(4.0, 1.0, 0.5) == 7);
}

TEST_CASE("a scene inside one footprint gives one block") {
  const PointCloud c = line_scene(50, 0.9);
  BlockParams p;
  p.points_per_block = 64;
  const auto blocks = split_blocks(c, p);
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].indices.size() == 50);
  REQUIRE(blocks[0].samples.size() == 1);
  CHECK(blocks[0].samples[0].size() == 64);
}

TEST_CASE("a 2 m by 1 m scene splits into the grid count and covers every point") {
  PointCloud c;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 400; ++i) c.positions.push_back({uniform(rng, 0, 2), uniform(rng, 0, 1), uniform(rng, 0, 1)});
  c.positions.push_back({0, 0, 0});
  c.positions.push_back({2, 1, 0});
  BlockParams p;
  p.points_per_block = 100;
  const auto blocks = split_blocks(c, p);
  CHECK(blocks.size() == grid_count(2.0, 1.0, 0.5) * grid_count(1.0, 1.0, 0.5));
  std::vector<int> seen(c.size(), 0);
  for (const Block& b : blocks) {
    std::set<std::size_t> sampled;
    for (const auto& s : b.samples) {
      CHECK(s.size() == 100);
      sampled.insert(s.begin(), s.end());
    }
    // Oversized blocks are covered by several sample sets.
    CHECK(sampled == std::set<std::size_t>(b.indices.begin(), b.indices.end()));
    CHECK(b.samples.size() == (b.indices.size() + 99) / 100);
    for (std::size_t i : b.indices) ++seen[i];
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int n) { return n >= 1; }));
  const auto again = split_blocks(c, p);
  for (std::size_t k = 0; k < blocks.size(); ++k) CHECK(again[k].samples == blocks[k].samples);
}

TEST_CASE("block features are centered on the block") {
  const PointCloud c = line_scene(11, 2.0);
  BlockParams p;
  p.points_per_block = 8;
  const auto blocks = split_blocks(c, p);
  const Block& b = blocks[1];
  const Matrix f = block_features(c, b, b.samples[0], p);
  CHECK(f.rows() == 8);
  CHECK(f.cols() == 6);
  for (std::size_t r = 0; r < 8; ++r) {
    CHECK(std::abs(f(r, 0)) <= 0.5 + 1e-12);
    CHECK(f(r, 3) == doctest::Approx(c.positions[b.samples[0][r]][0] / 2.0));
  }
}

TEST_CASE("splitting an empty scene is an input error") {
  try {
    split_blocks(PointCloud{}, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInput);
  }
}

TEST_CASE("single block merging reproduces the block with dense ids") {
  std::mt19937_64 rng(7);
  const PointCloud c = line_scene(40, 0.9);
  BlockPrediction b;
  for (std::size_t i = 0; i < c.size(); ++i) {
    b.indices.push_back(i);
    b.instance.push_back(i < 20 ? 42 : 7);
    b.semantic.push_back(i < 20 ? 1 : 0);
  }
  const std::vector<BlockPrediction> blocks = {b};
  const SegmentationResult r = block_merging(c, blocks, {});
  CHECK(canonical(r.instance) == canonical(b.instance));
  CHECK(std::set<int>(r.instance.begin(), r.instance.end()) == std::set<int>{0, 1});
  CHECK(r.semantic == b.semantic);
  CHECK(r.uncovered == 0);
}

TEST_CASE("an instance spanning two blocks merges into one") {
  const PointCloud c = line_scene(81, 2.0);
  const std::vector<BlockPrediction> blocks = {predict_range(c, 0.0, 1.2, 7), predict_range(c, 0.8, 2.0, 3)};
  const SegmentationResult r = block_merging(c, blocks, {});
  CHECK(std::set<int>(r.instance.begin(), r.instance.end()) == std::set<int>{0});
}

TEST_CASE("disjoint instances stay apart") {
  const PointCloud c = line_scene(81, 2.0);
  const std::vector<BlockPrediction> blocks = {predict_range(c, 0.0, 0.9, 0), predict_range(c, 1.1, 2.0, 0)};
  const SegmentationResult r = block_merging(c, blocks, {});
  CHECK(std::set<int>(r.instance.begin(), r.instance.end()) == std::set<int>{0, 1});
  CHECK(r.uncovered == 7);
  // Uncovered points take the labels of their nearest covered neighbor.
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double x = c.positions[i][0];
    if (std::abs(x - 1.0) > 0.01) CHECK(r.instance[i] == (x < 1.0 ? 0 : 1));
  }
}

TEST_CASE("fragments only adopt ids of their own class") {
  const PointCloud c = line_scene(81, 2.0);
  const std::vector<BlockPrediction> blocks = {predict_range(c, 0.0, 1.2, 0, 0), predict_range(c, 0.8, 2.0, 0, 1)};
  const SegmentationResult r = block_merging(c, blocks, {});
  CHECK(std::set<int>(r.instance.begin(), r.instance.end()) == std::set<int>{0, 1});
}

TEST_CASE("points sharing a block and local id never get two global ids") {
  std::mt19937_64 rng(8);
  PointCloud c;
  for (int i = 0; i < 300; ++i) c.positions.push_back({uniform(rng, 0, 3), uniform(rng, 0, 2), uniform(rng, 0, 1)});
  BlockParams bp;
  bp.points_per_block = 64;
  const auto blocks = split_blocks(c, bp);
  std::vector<BlockPrediction> preds;
  for (const Block& b : blocks) {
    for (const auto& s : b.samples) {
      BlockPrediction p;
      p.indices = s;
      for (std::size_t i : s) {
        p.instance.push_back(c.positions[i][0] < b.origin[0] + 0.5 ? 0 : 1);
        p.semantic.push_back(c.positions[i][1] < 1.0 ? 0 : 1);
      }
      preds.push_back(std::move(p));
    }
  }
  const SegmentationResult r = block_merging(c, preds, {});
  CHECK(r.uncovered == 0);
  const std::set<int> ids(r.instance.begin(), r.instance.end());
  CHECK(*ids.begin() == 0);
  CHECK(*ids.rbegin() == static_cast<int>(ids.size()) - 1);
}
