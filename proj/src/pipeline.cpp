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

#include "ban/pipeline.hpp"

#include <fstream>

#include "ban/errors.hpp"
#include "ban/format.hpp"
#include "ban/parallel.hpp"

namespace ban {

namespace fs = std::filesystem;

namespace {

struct Job {
  const Block* block;
  const std::vector<std::size_t>* sample;
};

std::vector<Job> jobs_of(const std::vector<Block>& blocks) {
  std::vector<Job> jobs;
  for (const Block& b : blocks)
    for (const auto& s : b.samples) jobs.push_back({&b, &s});
  return jobs;
}

BlockParams block_params(const RunConfig& config, std::size_t scene_index) {
  BlockParams bp = config.blocks;
  bp.seed = config.seed * 1000003 + scene_index;
  return bp;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::kIo, "cannot write " + path.string());
  os << text;
}

}  // namespace

SegmentationResult segment_scene(const SegModel& model, const PointCloud& scene, const RunConfig& config,
                                 std::size_t scene_index) {
  const bool colors = model.config().input_dim == feature_width(true);
  if (colors && !scene.colors) fail(ErrorKind::kConfig, "the model expects colors but the scene has none");
  const PointCloud view = model_view(scene, colors);
  const BlockParams bp = block_params(config, scene_index);
  const std::vector<Block> blocks = split_blocks(view, bp);
  const std::vector<Job> jobs = jobs_of(blocks);
  std::vector<BlockPrediction> preds(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t k) {
    const Prediction p = predict(model, block_features(view, *jobs[k].block, *jobs[k].sample, bp));
    BlockPrediction& out = preds[k];
    out.indices = *jobs[k].sample;
    out.semantic = argmax_rows(p.logits);
    out.instance = mean_shift(p.embedding, config.cluster).labels;
  });
  return block_merging(view, preds, config.merge);
}

SegmentationResult ground_truth_segmentation(const PointCloud& scene, const RunConfig& config,
                                             std::size_t scene_index) {
  if (!scene.labeled()) fail(ErrorKind::kInput, "ground-truth segmentation needs a labeled scene");
  const std::vector<Block> blocks = split_blocks(scene, block_params(config, scene_index));
  std::vector<BlockPrediction> preds;
  for (const Job& job : jobs_of(blocks)) {
    BlockPrediction p;
    p.indices = *job.sample;
    for (std::size_t i : p.indices) {
      p.semantic.push_back((*scene.semantic)[i]);
      p.instance.push_back((*scene.instance)[i]);
    }
    preds.push_back(std::move(p));
  }
  return block_merging(scene, preds, config.merge);
}

Evaluation evaluate(const SegModel* model, const Dataset& data, const RunConfig& config) {
  config.validate();
  std::size_t num_classes = std::max<std::size_t>(2, data.class_names.size());
  if (model) num_classes = std::max(num_classes, model->config().num_classes);
  MetricsAccumulator acc(num_classes, config.iou_threshold, data.class_names);
  Evaluation ev;
  for (std::size_t s = 0; s < data.scenes.size(); ++s) {
    const PointCloud& scene = data.scenes[s];
    if (!scene.labeled()) fail(ErrorKind::kInput, "evaluation scene " + data.files[s] + " has no labels");
    ev.scenes.push_back(model ? segment_scene(*model, scene, config, s) : ground_truth_segmentation(scene, config, s));
    const SegmentationResult& r = ev.scenes.back();
    acc.add({*scene.instance, *scene.semantic}, {r.instance, r.semantic});
  }
  ev.report = acc.report();
  return ev;
}

void write_report(const MetricsReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "metrics.txt", report.to_text());
  write_text(dir / "metrics.tsv", report.to_table());
  write_text(dir / "metrics.json", report.to_json().dump(2) + "\n");
}

std::pair<PointCloud, PointCloud> export_similarity(const SegModel& model, const PointCloud& scene,
                                                    std::size_t point_index, double threshold) {
  if (point_index >= scene.size()) {
    fail(ErrorKind::kBounds, "point index " + std::to_string(point_index) + " outside a scene of " +
                                 std::to_string(scene.size()) + " points");
  }
  const bool colors = model.config().input_dim == feature_width(true);
  if (colors && !scene.colors) fail(ErrorKind::kConfig, "the model expects colors but the scene has none");
  const Prediction p = predict(model, point_features(model_view(scene, colors)));
  if (!p.p_sem || !p.p_inst) {
    fail(ErrorKind::kConfig, "attention mode " + std::string(to_string(model.attention().mode)) +
                                 " builds no similarity matrices");
  }
  const auto as_cloud = [&](const SimilarityMatrix& m) {
    PointCloud c;
    c.positions = scene.positions;
    c.colors = scene.colors;
    c.semantic.emplace();
    for (std::uint8_t v : similarity_row(m, point_index, threshold)) c.semantic->push_back(v);
    return c;
  };
  return {as_cloud(*p.p_sem), as_cloud(*p.p_inst)};
}

std::vector<AblationRow> ablate(const RunConfig& config, const Dataset& train_data, const Dataset& test_data,
                                const std::vector<BiDirMode>& modes, const fs::path& out_dir,
                                std::ostream* progress) {
  std::vector<AblationRow> rows;
  for (BiDirMode mode : modes) {
    RunConfig c = config;
    c.attention.mode = mode;
    const fs::path dir = out_dir / std::string(to_string(mode));
    if (progress) *progress << "== " << to_string(mode) << "\n";
    const TrainResult trained = train(c, train_data, dir, std::nullopt, progress);
    const LoadedCheckpoint ck = load_checkpoint(trained.last);
    const Evaluation ev = evaluate(&ck.model, test_data, c);
    write_report(ev.report, dir);
    rows.push_back({mode, ev.report});
  }
  write_text(out_dir / "ablation.tsv", ablation_table(rows));
  config.save(out_dir / "config.ini");
  return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::string out = "mode";
  for (const auto& name : MetricsReport::headline_names()) out += "\t" + name;
  out += "\n";
  for (const AblationRow& r : rows) {
    out += std::string(to_string(r.mode));
    for (double v : r.report.headline_values()) out += "\t" + format_double(v);
    out += "\n";
  }
  return out;
}

}  // namespace ban
