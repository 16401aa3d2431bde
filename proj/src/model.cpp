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

#include "ban/model.hpp"

#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace ban {

void BackboneConfig::validate() const {
  if (input_dim == 0 || encoder_widths.empty() || semantic_width == 0 || instance_width == 0 ||
      embedding_width == 0 || key_width == 0 || head_hidden == 0) {
    fail(ErrorKind::kConfig, "backbone widths must all be >= 1");
  }
  for (std::size_t w : encoder_widths) {
    if (w == 0) fail(ErrorKind::kConfig, "encoder widths must be >= 1");
  }
  if (num_classes < 2) fail(ErrorKind::kConfig, "need at least two semantic classes");
}

nlohmann::json to_json(const BackboneConfig& c) {
  return {{"input_dim", c.input_dim},
          {"encoder_widths", c.encoder_widths},
          {"semantic_width", c.semantic_width},
          {"instance_width", c.instance_width},
          {"embedding_width", c.embedding_width},
          {"num_classes", c.num_classes},
          {"key_width", c.key_width},
          {"head_hidden", c.head_hidden}};
}

BackboneConfig backbone_config_from_json(const nlohmann::json& j) {
  BackboneConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.encoder_widths = j.at("encoder_widths").get<std::vector<std::size_t>>();
  c.semantic_width = j.at("semantic_width").get<std::size_t>();
  c.instance_width = j.at("instance_width").get<std::size_t>();
  c.embedding_width = j.at("embedding_width").get<std::size_t>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.key_width = j.at("key_width").get<std::size_t>();
  c.head_hidden = j.at("head_hidden").get<std::size_t>();
  c.validate();
  return c;
}

SegModel::SegModel(BackboneConfig config, BiDirConfig attention, std::uint64_t seed)
    : config_(std::move(config)), attention_(attention) {
  config_.validate();
  std::mt19937_64 rng(seed);
  std::size_t width = config_.input_dim;
  for (std::size_t k = 0; k < config_.encoder_widths.size(); ++k) {
    encoder_.emplace_back("encoder." + std::to_string(k), width, config_.encoder_widths[k], rng);
    width = config_.encoder_widths[k];
  }
  // Per-point features concatenated with the broadcast global feature.
  semantic_decoder_ = LinearMap("semantic_decoder", 2 * width, config_.semantic_width, rng);
  instance_decoder_ = LinearMap("instance_decoder", 2 * width, config_.instance_width, rng);
  bidir_ = BiDirWeights::create(attention_, config_.semantic_width, config_.instance_width, config_.key_width, rng);
  const auto [sem_in, inst_in] = bidir_output_widths(attention_, config_.semantic_width, config_.instance_width);
  semantic_head_ = {LinearMap("semantic_head.hidden", sem_in, config_.head_hidden, rng),
                    LinearMap("semantic_head.out", config_.head_hidden, config_.num_classes, rng)};
  instance_head_ = {LinearMap("instance_head.hidden", inst_in, config_.head_hidden, rng),
                    LinearMap("instance_head.out", config_.head_hidden, config_.embedding_width, rng)};
}

std::vector<Parameter*> SegModel::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : encoder_) l.collect(out);
  semantic_decoder_.collect(out);
  instance_decoder_.collect(out);
  if (bidir_.to_instance) bidir_.to_instance->collect(out);
  if (bidir_.to_semantic) bidir_.to_semantic->collect(out);
  semantic_head_.hidden.collect(out);
  semantic_head_.out.collect(out);
  instance_head_.hidden.collect(out);
  instance_head_.out.collect(out);
  return out;
}

std::vector<const Parameter*> SegModel::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& l : encoder_) l.collect(out);
  semantic_decoder_.collect(out);
  instance_decoder_.collect(out);
  if (bidir_.to_instance) bidir_.to_instance->collect(out);
  if (bidir_.to_semantic) bidir_.to_semantic->collect(out);
  semantic_head_.hidden.collect(out);
  semantic_head_.out.collect(out);
  instance_head_.hidden.collect(out);
  instance_head_.out.collect(out);
  return out;
}

std::size_t SegModel::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->value.size();
  return n;
}

void SegModel::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

std::pair<Var, Var> SegModel::encode(Tape& tape, Var features) const {
  Var h = features;
  for (const auto& layer : encoder_) h = tape.relu(layer.apply(tape, h));
  const Var global = tape.broadcast_rows(tape.column_max(h), h.rows());
  const Var joint = tape.concat_cols(h, global);
  return {tape.relu(semantic_decoder_.apply(tape, joint)), tape.relu(instance_decoder_.apply(tape, joint))};
}

ForwardOutput SegModel::forward(Tape& tape, const Matrix& features) const {
  if (features.rows() == 0) fail(ErrorKind::kDimension, "forward: empty point set");
  if (features.cols() != config_.input_dim) {
    fail(ErrorKind::kConfig, "model expects " + std::to_string(config_.input_dim) + " input channels, got " +
                                 std::to_string(features.cols()));
  }
  const auto [s, i] = encode(tape, tape.constant(features));
  BiDirOutput fused = bi_directional(tape, s, i, attention_, bidir_);
  const Var sem_hidden = tape.relu(semantic_head_.hidden.apply(tape, fused.semantic));
  const Var inst_hidden = tape.relu(instance_head_.hidden.apply(tape, fused.instance));
  ForwardOutput out;
  out.logits = semantic_head_.out.apply(tape, sem_hidden);
  out.embedding = instance_head_.out.apply(tape, inst_hidden);
  out.p_sem = std::move(fused.p_sem);
  out.p_inst = std::move(fused.p_inst);
  return out;
}

std::size_t feature_width(bool with_colors) { return with_colors ? 9 : 6; }

Matrix point_features(const PointCloud& scene, std::span<const std::size_t> indices, double center_x,
                      double center_y, const Vec3& scene_min, const Vec3& scene_extent) {
  const std::size_t width = feature_width(scene.colors.has_value());
  Matrix f(indices.size(), width);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t idx = indices[r];
    if (idx >= scene.size()) fail(ErrorKind::kBounds, "point index " + std::to_string(idx) + " outside the scene");
    const Vec3& p = scene.positions[idx];
    auto row = f.row(r);
    row[0] = p[0] - center_x;
    row[1] = p[1] - center_y;
    row[2] = p[2] - scene_min[2];
    for (std::size_t k = 0; k < 3; ++k) {
      row[3 + k] = scene_extent[k] > 0.0 ? (p[k] - scene_min[k]) / scene_extent[k] : 0.0;
    }
    if (scene.colors) {
      const Vec3& c = (*scene.colors)[idx];
      row[6] = c[0];
      row[7] = c[1];
      row[8] = c[2];
    }
  }
  return f;
}

Matrix point_features(const PointCloud& cloud) {
  const auto [lo, hi] = cloud.bounds();
  std::vector<std::size_t> all(cloud.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Vec3 extent{hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]};
  return point_features(cloud, all, 0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), lo, extent);
}

Prediction predict(const SegModel& model, const Matrix& features) {
  Tape tape;
  ForwardOutput f = model.forward(tape, features);
  return {f.logits.value(), f.embedding.value(), std::move(f.p_sem), std::move(f.p_inst)};
}

Prediction predict(const SegModel& model, const PointCloud& cloud) {
  cloud.validate();
  return predict(model, point_features(cloud));
}

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(logits.rows(), 0);
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] > row[best]) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()},
          {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

nlohmann::json checkpoint_json(const SegModel& model, const nlohmann::json& extra) {
  nlohmann::json doc = extra;
  doc["format"] = "ban-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["backbone"] = to_json(model.config());
  doc["attention"] = {{"mode", std::string(to_string(model.attention().mode))},
                      {"chain_features", model.attention().chain_features}};
  auto& params = doc["parameters"] = nlohmann::json::array();
  for (const Parameter* p : model.parameters()) {
    nlohmann::json entry = matrix_to_json(p->value);
    entry["name"] = p->name;
    params.push_back(std::move(entry));
  }
  return doc;
}

SegModel model_from_checkpoint(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "ban-checkpoint") fail(ErrorKind::kVersion, "not a ban checkpoint");
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      fail(ErrorKind::kVersion, "checkpoint version " + std::to_string(version) + ", this build reads " +
                                    std::to_string(kCheckpointVersion));
    }
    BiDirConfig attention;
    attention.mode = parse_bidir_mode(doc.at("attention").at("mode").get<std::string>());
    attention.chain_features = doc.at("attention").at("chain_features").get<bool>();
    SegModel model(backbone_config_from_json(doc.at("backbone")), attention, 0);
    const auto& stored = doc.at("parameters");
    auto params = model.parameters();
    if (stored.size() != params.size()) {
      fail(ErrorKind::kVersion, "checkpoint holds " + std::to_string(stored.size()) + " tensors, model expects " +
                                    std::to_string(params.size()));
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
      const auto& entry = stored[k];
      if (entry.at("name") != params[k]->name) {
        fail(ErrorKind::kVersion, "checkpoint tensor " + entry.at("name").get<std::string>() + " where " +
                                      params[k]->name + " was expected");
      }
      Matrix value = matrix_from_json(entry);
      if (value.rows() != params[k]->value.rows() || value.cols() != params[k]->value.cols()) {
        fail(ErrorKind::kVersion, "checkpoint tensor " + params[k]->name + " has shape " + value.shape_string());
      }
      params[k]->value = std::move(value);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const SegModel& model, const nlohmann::json& extra) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) fail(ErrorKind::kIo, "cannot write " + tmp.string());
    os << checkpoint_json(model, extra).dump() << "\n";
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::kIo, "cannot open checkpoint " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace ban
