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

#include "ban/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>

#include "ban/errors.hpp"
#include "ban/format.hpp"

namespace ban {

namespace {

struct Region {
  std::size_t size = 0;
  int cls = 0;
};

struct Overlap {
  std::map<int, Region> gt;
  std::map<int, Region> pred;
  std::map<std::pair<int, int>, std::size_t> intersection;  // (gt, pred) -> shared points

  double iou(int g, int p) const {
    const auto it = intersection.find({g, p});
    if (it == intersection.end()) return 0.0;
    const std::size_t uni = gt.at(g).size + pred.at(p).size - it->second;
    return static_cast<double>(it->second) / static_cast<double>(uni);
  }
};

std::map<int, Region> regions_of(const LabeledRegions& r) {
  std::map<int, std::map<int, std::size_t>> votes;
  std::map<int, Region> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    ++out[r.region[i]].size;
    ++votes[r.region[i]][r.semantic[i]];
  }
  for (auto& [id, reg] : out) {
    const auto& v = votes[id];
    auto best = v.begin();
    for (auto it = v.begin(); it != v.end(); ++it)
      if (it->second > best->second) best = it;
    reg.cls = best->first;
  }
  return out;
}

Overlap overlap_of(const LabeledRegions& gt, const LabeledRegions& pred) {
  gt.validate();
  pred.validate();
  if (gt.size() != pred.size()) {
    fail(ErrorKind::kInput, "ground truth has " + std::to_string(gt.size()) + " points, prediction " +
                                std::to_string(pred.size()));
  }
  Overlap o;
  o.gt = regions_of(gt);
  o.pred = regions_of(pred);
  for (std::size_t i = 0; i < gt.size(); ++i) ++o.intersection[{gt.region[i], pred.region[i]}];
  return o;
}

double best_iou(const Overlap& o, int g) {
  double best = 0.0;
  for (const auto& [p, unused] : o.pred) best = std::max(best, o.iou(g, p));
  return best;
}

// Cov is the plain mean. WCov groups regions by size so that equal-sized
// regions give exactly the same value as Cov.
Coverage coverage_of(const Overlap& o, const std::vector<int>& regions) {
  Coverage c;
  c.regions = regions.size();
  if (regions.empty()) return c;
  double sum = 0.0;
  std::size_t total = 0;
  std::map<std::size_t, std::pair<double, std::size_t>> by_size;  // size -> (IoU sum, count)
  for (int g : regions) {
    const double iou = best_iou(o, g);
    const std::size_t size = o.gt.at(g).size;
    sum += iou;
    total += size;
    auto& bucket = by_size[size];
    bucket.first += iou;
    ++bucket.second;
  }
  c.iou_sum = sum;
  c.cov = sum / static_cast<double>(regions.size());
  for (const auto& [size, bucket] : by_size) {
    const double weight = static_cast<double>(size * bucket.second) / static_cast<double>(total);
    c.wcov += weight * (bucket.first / static_cast<double>(bucket.second));
  }
  return c;
}

void check_classes(const LabeledRegions& r, std::size_t num_classes) {
  for (int c : r.semantic) {
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes) {
      fail(ErrorKind::kLabel, "class " + std::to_string(c) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

double mean_over_present(const std::vector<double>& values, const std::vector<bool>& present) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (!present[c]) continue;
    sum += values[c];
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace

void LabeledRegions::validate() const {
  if (region.size() != semantic.size()) fail(ErrorKind::kInput, "region and class arrays differ in length");
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (region[i] < 0 || semantic[i] < 0) {
      fail(ErrorKind::kLabel, "negative label at point " + std::to_string(i));
    }
  }
}

Coverage coverage(const LabeledRegions& gt, const LabeledRegions& pred) {
  const Overlap o = overlap_of(gt, pred);
  std::vector<int> all;
  for (const auto& [g, unused] : o.gt) all.push_back(g);
  return coverage_of(o, all);
}

std::vector<Coverage> coverage_by_class(const LabeledRegions& gt, const LabeledRegions& pred, std::size_t num_classes) {
  check_classes(gt, num_classes);
  const Overlap o = overlap_of(gt, pred);
  std::vector<std::vector<int>> members(num_classes);
  for (const auto& [g, reg] : o.gt) members[static_cast<std::size_t>(reg.cls)].push_back(g);
  std::vector<Coverage> out;
  for (const auto& m : members) out.push_back(coverage_of(o, m));
  return out;
}

InstanceCounts match_instances(const LabeledRegions& gt, const LabeledRegions& pred, std::size_t num_classes,
                               double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) fail(ErrorKind::kConfig, "IoU threshold must lie in (0, 1]");
  check_classes(gt, num_classes);
  check_classes(pred, num_classes);
  const Overlap o = overlap_of(gt, pred);
  InstanceCounts counts;
  counts.true_positives.assign(num_classes, 0);
  counts.predicted.assign(num_classes, 0);
  counts.ground_truth.assign(num_classes, 0);
  for (const auto& [g, reg] : o.gt) ++counts.ground_truth[static_cast<std::size_t>(reg.cls)];
  for (const auto& [p, reg] : o.pred) ++counts.predicted[static_cast<std::size_t>(reg.cls)];

  std::vector<std::tuple<double, int, int>> pairs;  // (IoU, pred, gt)
  for (const auto& [key, shared] : o.intersection) {
    const auto [g, p] = key;
    if (o.gt.at(g).cls != o.pred.at(p).cls) continue;
    const double iou = o.iou(g, p);
    if (iou >= iou_threshold) pairs.emplace_back(iou, p, g);
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::make_pair(std::get<1>(a), std::get<2>(a)) < std::make_pair(std::get<1>(b), std::get<2>(b));
  });
  std::map<int, bool> used_pred, used_gt;
  for (const auto& [iou, p, g] : pairs) {
    if (used_pred[p] || used_gt[g]) continue;
    used_pred[p] = used_gt[g] = true;
    ++counts.true_positives[static_cast<std::size_t>(o.gt.at(g).cls)];
  }
  return counts;
}

PrecisionRecall precision_recall(const InstanceCounts& counts) {
  const std::size_t n = counts.ground_truth.size();
  PrecisionRecall pr;
  pr.precision.assign(n, 0.0);
  pr.recall.assign(n, 0.0);
  std::vector<bool> present(n, false);
  for (std::size_t c = 0; c < n; ++c) {
    present[c] = counts.ground_truth[c] > 0;
    if (counts.predicted[c] > 0) {
      pr.precision[c] = static_cast<double>(counts.true_positives[c]) / static_cast<double>(counts.predicted[c]);
    }
    if (present[c]) {
      pr.recall[c] = static_cast<double>(counts.true_positives[c]) / static_cast<double>(counts.ground_truth[c]);
    }
  }
  pr.mprec = mean_over_present(pr.precision, present);
  pr.mrec = mean_over_present(pr.recall, present);
  return pr;
}

PrecisionRecall prec_recall(const LabeledRegions& gt, const LabeledRegions& pred, std::size_t num_classes,
                            double iou_threshold) {
  return precision_recall(match_instances(gt, pred, num_classes, iou_threshold));
}

Confusion confusion_matrix(std::span<const int> gt, std::span<const int> pred, std::size_t num_classes) {
  if (gt.size() != pred.size()) fail(ErrorKind::kInput, "semantic label arrays differ in length");
  Confusion m(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (int c : {gt[i], pred[i]}) {
      if (c < 0 || static_cast<std::size_t>(c) >= num_classes) {
        fail(ErrorKind::kLabel, "class " + std::to_string(c) + " outside [0, " + std::to_string(num_classes) + ")");
      }
    }
    ++m[static_cast<std::size_t>(gt[i])][static_cast<std::size_t>(pred[i])];
  }
  return m;
}

SemanticScores semantic_scores(const Confusion& confusion) {
  const std::size_t n = confusion.size();
  SemanticScores s;
  s.accuracy.assign(n, 0.0);
  s.iou.assign(n, 0.0);
  std::vector<bool> present(n, false);
  std::size_t correct = 0, total = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t row = 0, col = 0;
    for (std::size_t k = 0; k < n; ++k) {
      row += confusion[c][k];
      col += confusion[k][c];
    }
    const std::size_t tp = confusion[c][c];
    correct += tp;
    total += row;
    present[c] = row > 0;
    if (row > 0) {
      s.accuracy[c] = static_cast<double>(tp) / static_cast<double>(row);
      s.iou[c] = static_cast<double>(tp) / static_cast<double>(row + col - tp);
    }
  }
  s.oacc = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  s.macc = mean_over_present(s.accuracy, present);
  s.miou = mean_over_present(s.iou, present);
  return s;
}

SemanticScores semantic_scores(std::span<const int> gt, std::span<const int> pred, std::size_t num_classes) {
  return semantic_scores(confusion_matrix(gt, pred, num_classes));
}

const std::vector<std::string>& MetricsReport::headline_names() {
  static const std::vector<std::string> names = {"mCov", "mWCov", "mPrec", "mRec", "mAcc", "mIoU", "oAcc"};
  return names;
}

std::vector<double> MetricsReport::headline_values() const { return {mcov, mwcov, mprec, mrec, macc, miou, oacc}; }

std::string MetricsReport::to_text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "scenes: " << scenes << "\n\n";
  const auto names = headline_names();
  const auto values = headline_values();
  for (std::size_t k = 0; k < names.size(); ++k) os << std::left << std::setw(8) << names[k] << values[k] << "\n";
  os << "\n" << std::left << std::setw(14) << "class" << "   Cov  WCov  Prec   Rec   Acc   IoU\n";
  for (const ClassMetrics& c : per_class) {
    os << std::left << std::setw(14) << c.name;
    if (!c.present) {
      os << "  (no ground truth)\n";
      continue;
    }
    os << std::right << std::setprecision(3);
    for (double v : {c.cov, c.wcov, c.prec, c.rec, c.acc, c.iou}) os << std::setw(6) << v;
    os << std::setprecision(4) << "\n";
  }
  return os.str();
}

std::string MetricsReport::to_table() const {
  std::string out = "metric\tvalue\n";
  const auto names = headline_names();
  const auto values = headline_values();
  for (std::size_t k = 0; k < names.size(); ++k) out += names[k] + "\t" + format_double(values[k]) + "\n";
  for (const ClassMetrics& c : per_class) {
    if (!c.present) continue;
    const std::pair<const char*, double> cells[] = {{"Cov", c.cov},   {"WCov", c.wcov}, {"Prec", c.prec},
                                                    {"Rec", c.rec},   {"Acc", c.acc},   {"IoU", c.iou}};
    for (const auto& [name, v] : cells) out += c.name + "." + name + "\t" + format_double(v) + "\n";
  }
  return out;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["scenes"] = scenes;
  const auto names = headline_names();
  const auto values = headline_values();
  for (std::size_t k = 0; k < names.size(); ++k) j["metrics"][names[k]] = values[k];
  j["per_class"] = nlohmann::json::array();
  for (const ClassMetrics& c : per_class) {
    j["per_class"].push_back({{"class", c.name},
                              {"present", c.present},
                              {"Cov", c.cov},
                              {"WCov", c.wcov},
                              {"Prec", c.prec},
                              {"Rec", c.rec},
                              {"Acc", c.acc},
                              {"IoU", c.iou}});
  }
  return j;
}

MetricsAccumulator::MetricsAccumulator(std::size_t num_classes, double iou_threshold,
                                       std::vector<std::string> class_names)
    : num_classes_(num_classes), iou_threshold_(iou_threshold), names_(std::move(class_names)) {
  if (num_classes_ == 0) fail(ErrorKind::kConfig, "metrics need at least one class");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) fail(ErrorKind::kConfig, "IoU threshold must lie in (0, 1]");
  names_.resize(num_classes_);
  for (std::size_t c = 0; c < num_classes_; ++c)
    if (names_[c].empty()) names_[c] = "class" + std::to_string(c);
  cov_sum_.assign(num_classes_, 0.0);
  cov_regions_.assign(num_classes_, 0);
  wcov_sum_.assign(num_classes_, 0.0);
  wcov_scenes_.assign(num_classes_, 0);
  counts_.true_positives.assign(num_classes_, 0);
  counts_.predicted.assign(num_classes_, 0);
  counts_.ground_truth.assign(num_classes_, 0);
  confusion_.assign(num_classes_, std::vector<std::size_t>(num_classes_, 0));
}

void MetricsAccumulator::add(const LabeledRegions& gt, const LabeledRegions& pred) {
  const std::vector<Coverage> cov = coverage_by_class(gt, pred, num_classes_);
  const InstanceCounts counts = match_instances(gt, pred, num_classes_, iou_threshold_);
  const Confusion confusion = confusion_matrix(gt.semantic, pred.semantic, num_classes_);
  for (std::size_t c = 0; c < num_classes_; ++c) {
    if (cov[c].regions > 0) {
      cov_sum_[c] += cov[c].iou_sum;
      cov_regions_[c] += cov[c].regions;
      wcov_sum_[c] += cov[c].wcov;
      ++wcov_scenes_[c];
    }
    counts_.true_positives[c] += counts.true_positives[c];
    counts_.predicted[c] += counts.predicted[c];
    counts_.ground_truth[c] += counts.ground_truth[c];
    for (std::size_t k = 0; k < num_classes_; ++k) confusion_[c][k] += confusion[c][k];
  }
  ++scenes_;
}

MetricsReport MetricsAccumulator::report() const {
  MetricsReport r;
  r.scenes = scenes_;
  const PrecisionRecall pr = precision_recall(counts_);
  const SemanticScores sem = semantic_scores(confusion_);
  std::vector<double> cov(num_classes_, 0.0), wcov(num_classes_, 0.0);
  std::vector<bool> present(num_classes_, false);
  for (std::size_t c = 0; c < num_classes_; ++c) {
    present[c] = cov_regions_[c] > 0;
    if (present[c]) {
      cov[c] = cov_sum_[c] / static_cast<double>(cov_regions_[c]);
      wcov[c] = wcov_sum_[c] / static_cast<double>(wcov_scenes_[c]);
    }
    ClassMetrics m;
    m.name = names_[c];
    m.present = present[c];
    m.cov = cov[c];
    m.wcov = wcov[c];
    m.prec = pr.precision[c];
    m.rec = pr.recall[c];
    m.acc = sem.accuracy[c];
    m.iou = sem.iou[c];
    r.per_class.push_back(m);
  }
  r.mcov = mean_over_present(cov, present);
  r.mwcov = mean_over_present(wcov, present);
  r.mprec = pr.mprec;
  r.mrec = pr.mrec;
  r.macc = sem.macc;
  r.miou = sem.miou;
  r.oacc = sem.oacc;
  return r;
}

}  // namespace ban
