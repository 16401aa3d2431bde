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

#include "ban/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "ban/errors.hpp"
#include "ban/linear.hpp"
#include "ban/model.hpp"
#include "ban/parallel.hpp"

namespace ban {

namespace {

bool row_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

template <typename T>
int majority(const std::map<int, T>& votes) {
  int best = votes.begin()->first;
  T count = votes.begin()->second;
  for (const auto& [id, n] : votes) {
    if (n > count) {
      best = id;
      count = n;
    }
  }
  return best;
}

}  // namespace

std::string to_string(Kernel kernel) { return kernel == Kernel::kFlat ? "flat" : "gaussian"; }

Kernel parse_kernel(const std::string& name) {
  if (name == "flat") return Kernel::kFlat;
  if (name == "gaussian") return Kernel::kGaussian;
  fail(ErrorKind::kConfig, "unknown kernel '" + name + "' (flat, gaussian)");
}

ClusterResult mean_shift(const Matrix& embedding, const MeanShiftParams& params, std::size_t threads) {
  if (!(params.bandwidth > 0.0) || !std::isfinite(params.bandwidth)) {
    fail(ErrorKind::kConfig, "mean-shift bandwidth must be positive");
  }
  const std::size_t n = embedding.rows();
  const std::size_t d = embedding.cols();
  ClusterResult result;
  result.modes = Matrix(0, d);
  if (n == 0) return result;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return row_less(embedding.row(a), embedding.row(b)); });
  const Matrix x = permute_rows(embedding, order);

  const double bw = params.bandwidth;
  const double bw2 = bw * bw;
  Matrix ends(n, d);
  std::vector<std::size_t> support(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<double> m(x.row(i).begin(), x.row(i).end());
    std::vector<double> next(d);
    for (std::size_t it = 0; it < params.max_iterations; ++it) {
      std::fill(next.begin(), next.end(), 0.0);
      double weight = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const auto xj = x.row(j);
        const double dist2 = squared_distance(xj, m);
        double w = 0.0;
        if (params.kernel == Kernel::kFlat) {
          w = dist2 <= bw2 ? 1.0 : 0.0;
        } else {
          w = std::exp(-0.5 * dist2 / bw2);
        }
        if (w == 0.0) continue;
        for (std::size_t k = 0; k < d; ++k) next[k] += w * xj[k];
        weight += w;
      }
      if (weight == 0.0) break;
      for (double& v : next) v /= weight;
      const double shift = std::sqrt(squared_distance(next, m));
      m.swap(next);
      if (shift < params.tolerance * bw) break;
    }
    std::copy(m.begin(), m.end(), ends.row(i).begin());
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) count += squared_distance(x.row(j), m) <= bw2 ? 1 : 0;
    support[i] = count;
  });

  // Strongest modes first; a candidate within bw/2 of a kept mode is merged into it.
  std::vector<std::size_t> candidates(n);
  std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    if (support[a] != support[b]) return support[a] > support[b];
    return row_less(ends.row(a), ends.row(b));
  });
  const double merge2 = 0.25 * bw2;
  std::vector<std::size_t> kept;
  for (std::size_t c : candidates) {
    const bool distinct = std::all_of(kept.begin(), kept.end(),
                                      [&](std::size_t k) { return squared_distance(ends.row(c), ends.row(k)) >= merge2; });
    if (distinct) kept.push_back(c);
  }

  std::vector<std::size_t> nearest(n, 0);
  std::vector<std::size_t> members(kept.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = squared_distance(x.row(i), ends.row(kept[0]));
    for (std::size_t k = 1; k < kept.size(); ++k) {
      const double dist = squared_distance(x.row(i), ends.row(kept[k]));
      if (dist < best) {
        best = dist;
        nearest[i] = k;
      }
    }
    ++members[nearest[i]];
  }
  std::vector<int> dense(kept.size(), -1);
  std::vector<std::size_t> mode_rows;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (members[k] == 0) continue;
    dense[k] = static_cast<int>(mode_rows.size());
    mode_rows.push_back(kept[k]);
  }
  result.modes = Matrix(mode_rows.size(), d);
  for (std::size_t k = 0; k < mode_rows.size(); ++k) {
    const auto src = ends.row(mode_rows[k]);
    std::copy(src.begin(), src.end(), result.modes.row(k).begin());
  }
  result.labels.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) result.labels[order[r]] = dense[nearest[r]];
  return result;
}

std::size_t grid_count(double extent, double size, double stride) {
  if (extent <= size) return 1;
  // Guard against (2.0 - 1.0) / 0.5 landing a hair above an integer.
  return static_cast<std::size_t>(std::ceil((extent - size) / stride - 1e-9)) + 1;
}

std::vector<Block> split_blocks(const PointCloud& scene, const BlockParams& params) {
  if (scene.size() == 0) fail(ErrorKind::kInput, "cannot split an empty scene into blocks");
  if (!(params.size > 0.0) || !(params.stride > 0.0) || params.points_per_block == 0) {
    fail(ErrorKind::kConfig, "block size, stride and points per block must be positive");
  }
  const auto [lo, hi] = scene.bounds();
  const std::size_t nx = grid_count(hi[0] - lo[0], params.size, params.stride);
  const std::size_t ny = grid_count(hi[1] - lo[1], params.size, params.stride);
  const std::size_t ppb = params.points_per_block;

  std::vector<Block> blocks;
  for (std::size_t gx = 0; gx < nx; ++gx) {
    for (std::size_t gy = 0; gy < ny; ++gy) {
      Block b;
      b.grid_x = gx;
      b.grid_y = gy;
      b.origin = {lo[0] + static_cast<double>(gx) * params.stride, lo[1] + static_cast<double>(gy) * params.stride, lo[2]};
      for (std::size_t i = 0; i < scene.size(); ++i) {
        const Vec3& p = scene.positions[i];
        if (p[0] >= b.origin[0] && p[0] <= b.origin[0] + params.size && p[1] >= b.origin[1] &&
            p[1] <= b.origin[1] + params.size) {
          b.indices.push_back(i);
        }
      }
      if (b.indices.empty()) continue;

      std::seed_seq seq{params.seed, static_cast<std::uint64_t>(gx), static_cast<std::uint64_t>(gy)};
      std::mt19937_64 rng(seq);
      std::vector<std::size_t> pool = b.indices;
      if (pool.size() > ppb) {
        for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[uniform_index(rng, i)]);
      }
      for (std::size_t start = 0; start < pool.size(); start += ppb) {
        const std::size_t end = std::min(pool.size(), start + ppb);
        std::vector<std::size_t> sample(pool.begin() + static_cast<std::ptrdiff_t>(start),
                                        pool.begin() + static_cast<std::ptrdiff_t>(end));
        while (sample.size() < ppb) sample.push_back(b.indices[uniform_index(rng, b.indices.size())]);
        b.samples.push_back(std::move(sample));
      }
      blocks.push_back(std::move(b));
    }
  }
  return blocks;
}

Matrix block_features(const PointCloud& scene, const Block& block, std::span<const std::size_t> sample,
                      const BlockParams& params) {
  const auto [lo, hi] = scene.bounds();
  const Vec3 extent{hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]};
  return point_features(scene, sample, block.origin[0] + 0.5 * params.size, block.origin[1] + 0.5 * params.size, lo,
                        extent);
}

SegmentationResult block_merging(const PointCloud& scene, std::span<const BlockPrediction> blocks,
                                 const MergeParams& params) {
  if (!(params.voxel_size > 0.0)) fail(ErrorKind::kConfig, "voxel size must be positive");
  if (scene.size() == 0) fail(ErrorKind::kInput, "cannot merge blocks of an empty scene");
  const auto [lo, hi] = scene.bounds();
  using Voxel = std::array<long long, 3>;
  const auto voxel_of = [&, lo = lo](std::size_t idx) {
    const Vec3& p = scene.positions[idx];
    Voxel v{};
    for (std::size_t k = 0; k < 3; ++k) v[k] = static_cast<long long>(std::floor((p[k] - lo[k]) / params.voxel_size));
    return v;
  };

  std::map<Voxel, std::map<int, std::size_t>> volume;  // voxel -> global id -> point count
  std::vector<int> global_class;
  std::vector<std::map<int, std::size_t>> instance_votes(scene.size());
  std::vector<std::map<int, std::size_t>> semantic_votes(scene.size());

  for (const BlockPrediction& block : blocks) {
    if (block.instance.size() != block.indices.size() || block.semantic.size() != block.indices.size()) {
      fail(ErrorKind::kDimension, "block prediction arrays differ in length");
    }
    std::map<int, std::vector<std::size_t>> fragments;  // local id -> positions in block
    for (std::size_t r = 0; r < block.indices.size(); ++r) {
      if (block.indices[r] >= scene.size()) fail(ErrorKind::kBounds, "block refers to a point outside the scene");
      fragments[block.instance[r]].push_back(r);
    }
    std::map<int, int> assigned;
    for (const auto& [local, rows] : fragments) {
      std::map<int, std::size_t> classes;
      std::map<Voxel, bool> voxels;
      for (std::size_t r : rows) {
        ++classes[block.semantic[r]];
        voxels[voxel_of(block.indices[r])] = true;
      }
      const int cls = majority(classes);
      std::map<int, std::size_t> overlap;  // global id -> fragment voxels holding it
      for (const auto& [v, unused] : voxels) {
        const auto it = volume.find(v);
        if (it == volume.end()) continue;
        for (const auto& [g, count] : it->second) {
          if (global_class[static_cast<std::size_t>(g)] == cls) ++overlap[g];
        }
      }
      int target = -1;
      if (!overlap.empty()) {
        const int best = majority(overlap);
        const double share = static_cast<double>(overlap[best]) / static_cast<double>(voxels.size());
        if (share > params.overlap_threshold) target = best;
      }
      if (target < 0) {
        target = static_cast<int>(global_class.size());
        global_class.push_back(cls);
      }
      assigned[local] = target;
    }
    // The volume only sees this block once all of its fragments have voted.
    for (std::size_t r = 0; r < block.indices.size(); ++r) {
      const std::size_t idx = block.indices[r];
      const int g = assigned[block.instance[r]];
      ++volume[voxel_of(idx)][g];
      ++instance_votes[idx][g];
      ++semantic_votes[idx][block.semantic[r]];
    }
  }

  SegmentationResult out;
  out.semantic.assign(scene.size(), 0);
  out.instance.assign(scene.size(), -1);
  std::vector<std::size_t> covered;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (instance_votes[i].empty()) continue;
    out.instance[i] = majority(instance_votes[i]);
    out.semantic[i] = majority(semantic_votes[i]);
    covered.push_back(i);
  }
  if (covered.empty()) fail(ErrorKind::kInput, "no block predictions cover the scene");
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (!instance_votes[i].empty()) continue;
    std::size_t best = covered[0];
    double best_d = squared_distance(scene.positions[i], scene.positions[best]);
    for (std::size_t c : covered) {
      const double d = squared_distance(scene.positions[i], scene.positions[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    out.instance[i] = out.instance[best];
    out.semantic[i] = out.semantic[best];
    ++out.uncovered;
  }

  std::vector<int> dense(global_class.size(), -1);
  std::vector<bool> used(global_class.size(), false);
  for (int g : out.instance) used[static_cast<std::size_t>(g)] = true;
  int next = 0;
  for (std::size_t g = 0; g < used.size(); ++g)
    if (used[g]) dense[g] = next++;
  for (int& g : out.instance) g = dense[static_cast<std::size_t>(g)];
  return out;
}

}  // namespace ban
