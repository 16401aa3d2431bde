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


// Brute-force metric oracles shared by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "ban/metrics.hpp"

namespace ban::testing {

inline LabeledRegions random_regions(std::size_t n, int max_regions, int classes, std::mt19937_64& rng) {
  LabeledRegions r;
  std::uniform_int_distribution<int> reg(0, max_regions - 1), cls(0, classes - 1);
  std::map<int, int> class_of;
  for (std::size_t i = 0; i < n; ++i) {
    const int id = reg(rng) * 3;  // sparse ids
    if (!class_of.count(id)) class_of[id] = cls(rng);
    r.region.push_back(id);
    r.semantic.push_back(class_of[id]);
  }
  return r;
}

inline double brute_iou(const LabeledRegions& gt, int g, const LabeledRegions& pred, int p) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool a = gt.region[i] == g, b = pred.region[i] == p;
    inter += a && b;
    uni += a || b;
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline int brute_class(const LabeledRegions& r, int id) {
  std::map<int, int> votes;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r.region[i] == id) ++votes[r.semantic[i]];
  int best = votes.begin()->first;
  for (const auto& [c, n] : votes)
    if (n > votes[best]) best = c;
  return best;
}

// All-pairs IoU; the aggregation repeats the library's size-bucketed WCov sum.
inline Coverage brute_coverage(const LabeledRegions& gt, const LabeledRegions& pred, int only_class = -1) {
  const std::set<int> gts(gt.region.begin(), gt.region.end());
  const std::set<int> preds(pred.region.begin(), pred.region.end());
  Coverage c;
  double sum = 0.0;
  std::size_t total = 0;
  std::map<std::size_t, std::pair<double, std::size_t>> by_size;
  for (int g : gts) {
    if (only_class >= 0 && brute_class(gt, g) != only_class) continue;
    double best = 0.0;
    for (int p : preds) best = std::max(best, brute_iou(gt, g, pred, p));
    const auto size = static_cast<std::size_t>(std::count(gt.region.begin(), gt.region.end(), g));
    sum += best;
    total += size;
    by_size[size].first += best;
    ++by_size[size].second;
    ++c.regions;
  }
  if (c.regions == 0) return c;
  c.iou_sum = sum;
  c.cov = sum / static_cast<double>(c.regions);
  for (const auto& [size, b] : by_size)
    c.wcov += static_cast<double>(size * b.second) / static_cast<double>(total) * (b.first / static_cast<double>(b.second));
  return c;
}

// Maximum one-to-one matching over same-class pairs at the threshold, found
// by exhaustive search.
inline std::size_t brute_true_positives(const LabeledRegions& gt, const LabeledRegions& pred, int cls) {
  std::vector<int> gts, preds;
  for (int g : std::set<int>(gt.region.begin(), gt.region.end()))
    if (brute_class(gt, g) == cls) gts.push_back(g);
  for (int p : std::set<int>(pred.region.begin(), pred.region.end()))
    if (brute_class(pred, p) == cls) preds.push_back(p);
  std::vector<bool> taken(gts.size(), false);
  std::function<std::size_t(std::size_t)> best = [&](std::size_t k) -> std::size_t {
    if (k == preds.size()) return 0;
    std::size_t out = best(k + 1);
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (taken[j] || brute_iou(gt, gts[j], pred, preds[k]) < 0.5) continue;
      taken[j] = true;
      out = std::max(out, 1 + best(k + 1));
      taken[j] = false;
    }
    return out;
  };
  return best(0);
}

inline PrecisionRecall brute_prec_recall(const LabeledRegions& gt, const LabeledRegions& pred, int classes) {
  PrecisionRecall pr;
  double ps = 0.0, rs = 0.0;
  int present = 0;
  for (int c = 0; c < classes; ++c) {
    std::size_t n_gt = 0, n_pred = 0;
    for (int g : std::set<int>(gt.region.begin(), gt.region.end())) n_gt += brute_class(gt, g) == c;
    for (int p : std::set<int>(pred.region.begin(), pred.region.end())) n_pred += brute_class(pred, p) == c;
    if (n_gt == 0) continue;
    const auto tp = static_cast<double>(brute_true_positives(gt, pred, c));
    ps += n_pred == 0 ? 0.0 : tp / static_cast<double>(n_pred);
    rs += tp / static_cast<double>(n_gt);
    ++present;
  }
  pr.mprec = ps / present;
  pr.mrec = rs / present;
  return pr;
}

inline SemanticScores brute_semantic(const std::vector<int>& gt, const std::vector<int>& pred, int classes) {
  SemanticScores s;
  std::size_t correct = 0;
  double acc = 0.0, iou = 0.0;
  int present = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) correct += gt[i] == pred[i];
  for (int c = 0; c < classes; ++c) {
    std::size_t tp = 0, in_gt = 0, either = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      tp += gt[i] == c && pred[i] == c;
      in_gt += gt[i] == c;
      either += gt[i] == c || pred[i] == c;
    }
    if (in_gt == 0) continue;
    acc += static_cast<double>(tp) / static_cast<double>(in_gt);
    iou += static_cast<double>(tp) / static_cast<double>(either);
    ++present;
  }
  s.oacc = static_cast<double>(correct) / static_cast<double>(gt.size());
  s.macc = acc / present;
  s.miou = iou / present;
  return s;
}

}  // namespace ban::testing
