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

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace ban {

/// Per-point region (instance) ids and class ids. Region ids and classes
/// must be non-negative; every point belongs to exactly one region.
struct LabeledRegions {
  std::vector<int> region;
  std::vector<int> semantic;

  std::size_t size() const noexcept { return region.size(); }
  /// Throws kInput on length mismatch and kLabel on negative ids.
  void validate() const;
};

struct Coverage {
  double cov = 0.0;
  double wcov = 0.0;
  double iou_sum = 0.0;     // sum of best IoUs
  std::size_t regions = 0;  // ground-truth regions considered
};

/// Best IoU of every ground-truth region against any predicted region,
/// regardless of class. Throws kInput when point counts differ.
Coverage coverage(const LabeledRegions& gt, const LabeledRegions& pred);

/// Same, restricted per class to ground-truth regions of that class (the
/// class of a region is the majority class of its points).
std::vector<Coverage> coverage_by_class(const LabeledRegions& gt, const LabeledRegions& pred, std::size_t num_classes);

struct InstanceCounts {
  std::vector<std::size_t> true_positives;
  std::vector<std::size_t> predicted;
  std::vector<std::size_t> ground_truth;
};

/// Class-constrained greedy one-to-one matching by descending IoU, keeping
/// pairs with IoU >= threshold. Throws kConfig for a threshold outside (0, 1].
InstanceCounts match_instances(const LabeledRegions& gt, const LabeledRegions& pred, std::size_t num_classes,
                               double iou_threshold = 0.5);

struct PrecisionRecall {
  double mprec = 0.0;
  double mrec = 0.0;
  std::vector<double> precision;  // per class; 0 without predictions
  std::vector<double> recall;
};

/// Means run over classes with ground-truth instances.
PrecisionRecall precision_recall(const InstanceCounts& counts);
PrecisionRecall prec_recall(const LabeledRegions& gt, const LabeledRegions& pred, std::size_t num_classes,
                            double iou_threshold = 0.5);

struct SemanticScores {
  double oacc = 0.0;
  double macc = 0.0;
  double miou = 0.0;
  std::vector<double> accuracy;  // per class
  std::vector<double> iou;
};

using Confusion = std::vector<std::vector<std::size_t>>;  // [gt][pred]

Confusion confusion_matrix(std::span<const int> gt, std::span<const int> pred, std::size_t num_classes);
SemanticScores semantic_scores(const Confusion& confusion);
/// Throws kLabel for classes outside [0, num_classes).
SemanticScores semantic_scores(std::span<const int> gt, std::span<const int> pred, std::size_t num_classes);

struct ClassMetrics {
  std::string name;
  bool present = false;  // has ground truth somewhere
  double cov = 0.0;
  double wcov = 0.0;
  double prec = 0.0;
  double rec = 0.0;
  double acc = 0.0;
  double iou = 0.0;
};

struct MetricsReport {
  double mcov = 0.0;
  double mwcov = 0.0;
  double mprec = 0.0;
  double mrec = 0.0;
  double macc = 0.0;
  double miou = 0.0;
  double oacc = 0.0;
  std::size_t scenes = 0;
  std::vector<ClassMetrics> per_class;

  static const std::vector<std::string>& headline_names();
  std::vector<double> headline_values() const;

  std::string to_text() const;
  /// Tab-separated `metric value` rows, headline metrics first.
  std::string to_table() const;
  nlohmann::json to_json() const;
};

/// Accumulates scenes. Coverage is averaged per class over its ground-truth
/// regions (Cov) or over scenes containing the class (WCov); precision and
/// recall pool matches over scenes; semantic scores pool the confusion matrix.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(std::size_t num_classes, double iou_threshold = 0.5,
                              std::vector<std::string> class_names = {});

  void add(const LabeledRegions& gt, const LabeledRegions& pred);
  MetricsReport report() const;

 private:
  std::size_t num_classes_;
  double iou_threshold_;
  std::vector<std::string> names_;
  std::size_t scenes_ = 0;
  std::vector<double> cov_sum_;
  std::vector<std::size_t> cov_regions_;
  std::vector<double> wcov_sum_;
  std::vector<std::size_t> wcov_scenes_;
  InstanceCounts counts_;
  Confusion confusion_;
};

}  // namespace ban
