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

#include "ban/training.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>

#include "ban/clustering.hpp"
#include "ban/errors.hpp"
#include "ban/linear.hpp"
#include "ban/losses.hpp"
#include "ban/optim.hpp"
#include "ban/parallel.hpp"

namespace ban {

namespace fs = std::filesystem;

namespace {

constexpr int kDatasetVersion = 1;

std::string scene_file_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04zu.txt", k);
  return buf;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::kIo, "cannot write " + path.string());
  os << j.dump(2) << "\n";
}

nlohmann::json optimizer_json(const AdamState& s) {
  nlohmann::json j{{"step", s.step}, {"first", nlohmann::json::array()}, {"second", nlohmann::json::array()}};
  for (const Matrix& m : s.first_moment) j["first"].push_back(matrix_to_json(m));
  for (const Matrix& m : s.second_moment) j["second"].push_back(matrix_to_json(m));
  return j;
}

void restore_optimizer(AdamState& s, const nlohmann::json& j) {
  const auto& first = j.at("first");
  const auto& second = j.at("second");
  if (first.size() != s.first_moment.size() || second.size() != s.second_moment.size()) {
    fail(ErrorKind::kVersion, "checkpoint optimizer state does not match the model");
  }
  for (std::size_t n = 0; n < first.size(); ++n) {
    s.first_moment[n] = matrix_from_json(first[n]);
    s.second_moment[n] = matrix_from_json(second[n]);
  }
  s.step = j.at("step").get<std::uint64_t>();
}

}  // namespace

std::vector<fs::path> generate_dataset(const SceneSpec& spec, std::size_t count, const fs::path& dir) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  nlohmann::json manifest{{"format", "ban-dataset"}, {"version", kDatasetVersion}};
  manifest["classes"] = nlohmann::json::array();
  for (const ClassSpec& c : spec.classes) manifest["classes"].push_back(c.name);
  manifest["colors"] = spec.with_colors;
  manifest["scenes"] = nlohmann::json::array();
  std::vector<fs::path> written;
  for (std::size_t k = 0; k < count; ++k) {
    SceneSpec s = spec;
    s.seed = spec.seed + k;
    const PointCloud cloud = generate_scene(s);
    const std::string name = scene_file_name(k);
    save_cloud(cloud, dir / name);
    manifest["scenes"].push_back({{"file", name}, {"points", cloud.size()}, {"seed", s.seed}});
    written.push_back(dir / name);
  }
  spec.save(dir / "spec.ini");
  write_json(dir / "manifest.json", manifest);
  return written;
}

Dataset load_dataset(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  std::ifstream is(path);
  if (!is) fail(ErrorKind::kIo, "cannot open " + path.string());
  Dataset d;
  try {
    const nlohmann::json j = nlohmann::json::parse(is);
    if (j.at("format") != "ban-dataset") fail(ErrorKind::kParse, path.string() + ": not a dataset manifest");
    if (j.at("version") != kDatasetVersion) fail(ErrorKind::kVersion, path.string() + ": unsupported version");
    d.class_names = j.at("classes").get<std::vector<std::string>>();
    for (const auto& s : j.at("scenes")) d.files.push_back(s.at("file").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  for (const std::string& f : d.files) d.scenes.push_back(load_cloud(dir / f));
  return d;
}

PointCloud model_view(const PointCloud& scene, bool use_colors) {
  PointCloud v = scene;
  if (!use_colors) v.colors.reset();
  return v;
}

BackboneConfig backbone_for(const RunConfig& config, const Dataset& data) {
  if (data.scenes.empty()) fail(ErrorKind::kInput, "dataset holds no scenes");
  BackboneConfig b = config.model;
  const bool colors = config.use_colors && data.scenes.front().colors.has_value();
  for (const PointCloud& s : data.scenes) {
    if (colors && !s.colors) fail(ErrorKind::kInput, "some scenes lack colors; set model.use_colors = false");
  }
  b.input_dim = feature_width(colors);
  if (b.num_classes == 0) b.num_classes = std::max<std::size_t>(2, data.class_names.size());
  if (b.num_classes < data.class_names.size()) {
    fail(ErrorKind::kConfig, "model.num_classes is smaller than the dataset's class count");
  }
  b.validate();
  return b;
}

std::vector<TrainingSample> make_samples(const Dataset& data, const RunConfig& config) {
  const BackboneConfig backbone = backbone_for(config, data);
  const bool colors = backbone.input_dim == feature_width(true);
  std::vector<TrainingSample> out;
  for (std::size_t s = 0; s < data.scenes.size(); ++s) {
    const PointCloud scene = model_view(data.scenes[s], colors);
    if (!scene.labeled()) fail(ErrorKind::kInput, "scene " + std::to_string(s) + " has no labels");
    BlockParams bp = config.blocks;
    bp.seed = config.seed * 1000003 + s;
    for (const Block& block : split_blocks(scene, bp)) {
      for (const auto& sample : block.samples) {
        TrainingSample t;
        t.features = block_features(scene, block, sample, bp);
        for (std::size_t i : sample) {
          t.semantic.push_back((*scene.semantic)[i]);
          t.instance.push_back((*scene.instance)[i]);
        }
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

Var segmentation_loss(Tape& tape, const SegModel& model, const Matrix& features, std::span<const int> semantic,
                      std::span<const int> instance, const DiscriminativeParams& params, LossParts* parts) {
  const ForwardOutput out = model.forward(tape, features);
  const Var sem = cross_entropy(tape, out.logits, semantic);
  const Var ins = discriminative(tape, out.embedding, instance, params);
  const Var total = total_loss(tape, sem, ins);
  if (parts) *parts = {sem.value()(0, 0), ins.value()(0, 0), total.value()(0, 0)};
  return total;
}

LossParts batch_gradients(SegModel& model, std::span<const TrainingSample* const> batch,
                          const DiscriminativeParams& params, std::size_t threads) {
  if (batch.empty()) fail(ErrorKind::kInput, "empty batch");
  const std::vector<Parameter*> ps = model.parameters();
  std::vector<std::vector<Matrix>> grads(batch.size());
  std::vector<LossParts> parts(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t k) {
    Tape tape;
    const TrainingSample& s = *batch[k];
    tape.backward(segmentation_loss(tape, model, s.features, s.semantic, s.instance, params, &parts[k]));
    for (const Parameter* p : ps) grads[k].push_back(tape.gradient_of(*p));
  });
  model.zero_grad();
  LossParts mean;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    for (std::size_t n = 0; n < ps.size(); ++n) add_in_place(ps[n]->grad, grads[k][n]);
    mean.semantic += parts[k].semantic * inv;
    mean.instance += parts[k].instance * inv;
    mean.total += parts[k].total * inv;
  }
  for (Parameter* p : ps) p->grad = scale(p->grad, inv);
  return mean;
}

nlohmann::json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"step", r.step},
          {"l_sem", r.loss.semantic},
          {"l_ins", r.loss.instance},
          {"total", r.loss.total},
          {"lr", r.learning_rate}};
}

void require_compatible(const SegModel& model, const RunConfig& config, const Dataset& data,
                        const std::string& source) {
  if (to_json(model.config()) != to_json(backbone_for(config, data)) || model.attention().mode != config.attention.mode ||
      model.attention().chain_features != config.attention.chain_features) {
    fail(ErrorKind::kVersion, "checkpoint " + source + " does not match the configured model");
  }
}

LoadedCheckpoint load_checkpoint(const fs::path& path) {
  nlohmann::json doc = read_checkpoint(path);
  SegModel model = model_from_checkpoint(doc);
  doc.erase("parameters");
  return {std::move(model), std::move(doc)};
}

TrainResult train(const RunConfig& config, const Dataset& data, const fs::path& out_dir,
                  const std::optional<fs::path>& resume, std::ostream* progress) {
  config.validate();
  const BackboneConfig backbone = backbone_for(config, data);
  const std::vector<TrainingSample> samples = make_samples(data, config);
  if (samples.empty()) fail(ErrorKind::kInput, "no training samples");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + out_dir.string() + ": " + ec.message());
  config.save(out_dir / "config.ini");

  std::optional<SegModel> model;
  std::size_t start_epoch = 0;
  double best_total = std::numeric_limits<double>::infinity();
  nlohmann::json optimizer;
  if (resume) {
    LoadedCheckpoint ck = load_checkpoint(*resume);
    require_compatible(ck.model, config, data, resume->string());
    model.emplace(std::move(ck.model));
    start_epoch = ck.meta.at("epoch").get<std::size_t>();
    best_total = ck.meta.at("best_total").get<double>();
    optimizer = ck.meta.at("optimizer");
  } else {
    model.emplace(backbone, config.attention, config.seed);
  }
  const std::vector<Parameter*> params = model->parameters();
  AdamState adam(config.optim, params);
  if (!optimizer.is_null()) restore_optimizer(adam, optimizer);

  const fs::path log_path = out_dir / "train_log.jsonl";
  // A fresh run starts a new log; a resumed one appends to it.
  std::ofstream log(log_path, resume ? std::ios::app : std::ios::trunc);
  if (!log) fail(ErrorKind::kIo, "cannot write " + log_path.string());

  TrainResult result;
  result.last = out_dir / "last.json";
  result.best = out_dir / "best.json";
  const auto meta = [&](std::size_t epoch) {
    return nlohmann::json{{"epoch", epoch},
                          {"step", adam.step},
                          {"best_total", best_total},
                          {"seed", config.seed},
                          {"classes", data.class_names},
                          {"optimizer", optimizer_json(adam)}};
  };

  for (std::size_t epoch = start_epoch + 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::seed_seq seq{config.seed, static_cast<std::uint64_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = scheduled_learning_rate(adam.config, adam.step);
    try {
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        std::vector<const TrainingSample*> batch;
        for (std::size_t k = start; k < std::min(order.size(), start + config.batch_size); ++k) {
          batch.push_back(&samples[order[k]]);
        }
        const LossParts parts = batch_gradients(*model, batch, config.loss, config.threads);
        adam_step(adam, params);
        const double w = static_cast<double>(batch.size()) / static_cast<double>(samples.size());
        rec.loss.semantic += parts.semantic * w;
        rec.loss.instance += parts.instance * w;
        rec.loss.total += parts.total * w;
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kNumeric) {
        log << nlohmann::json{{"event", "abort"}, {"epoch", epoch}, {"reason", e.what()}}.dump() << "\n";
      }
      throw;
    }
    rec.step = adam.step;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log << to_json(rec).dump() << "\n";
    log.flush();
    if (rec.loss.total < best_total) {
      best_total = rec.loss.total;
      save_checkpoint(result.best, *model, meta(epoch));
    }
    save_checkpoint(result.last, *model, meta(epoch));
    result.epochs.push_back(rec);
    if (progress) {
      *progress << "epoch " << epoch << "/" << config.epochs << std::fixed << std::setprecision(4)
                << "  l_sem " << rec.loss.semantic << "  l_ins " << rec.loss.instance << "  total "
                << rec.loss.total << std::setprecision(1) << "  (" << rec.seconds << " s)" << std::endl;
    }
  }
  return result;
}

}  // namespace ban
