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

#include "ban/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <functional>
#include <sstream>
#include <type_traits>

#include "ban/errors.hpp"
#include "ban/format.hpp"

namespace ban {

namespace {

template <typename T>
T parse_as(const std::string& key, const std::string& text) {
  const auto v = parse_number<T>(text);
  if (!v) fail(ErrorKind::kConfig, key + ": '" + text + "' is not a valid number");
  return *v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  fail(ErrorKind::kConfig, key + ": expected true or false, got '" + text + "'");
}

std::vector<std::size_t> parse_widths(const std::string& key, const std::string& text) {
  // Widths may be separated by spaces or commas.
  std::string spaced = text;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream is(spaced);
  std::vector<std::size_t> out;
  for (std::string tok; is >> tok;) out.push_back(parse_as<std::size_t>(key, tok));
  if (out.empty()) fail(ErrorKind::kConfig, key + ": expected at least one width");
  return out;
}

std::string widths_text(const std::vector<std::size_t>& w) {
  std::string out;
  for (std::size_t x : w) out += (out.empty() ? "" : " ") + std::to_string(x);
  return out;
}

template <typename T>
std::string value_text(const T& v) {
  if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
  else if constexpr (std::is_floating_point_v<T>) return format_double(v);
  else if constexpr (std::is_same_v<T, std::string>) return v;
  else return std::to_string(v);
}

template <typename T>
T value_from(const std::string& key, const std::string& text) {
  if constexpr (std::is_same_v<T, bool>) return parse_bool(key, text);
  else if constexpr (std::is_same_v<T, std::string>) return text;
  else return parse_as<T>(key, text);
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T>
Field plain(std::string key, T RunConfig::*member) {
  return {key, [member](const RunConfig& c) { return value_text(c.*member); },
          [member, key](RunConfig& c, const std::string& v) { c.*member = value_from<T>(key, v); }};
}

template <typename S, typename T>
Field nested(std::string key, S RunConfig::*outer, T S::*member) {
  return {key, [outer, member](const RunConfig& c) { return value_text(c.*outer.*member); },
          [outer, member, key](RunConfig& c, const std::string& v) { c.*outer.*member = value_from<T>(key, v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      Field{"model.encoder", [](const RunConfig& c) { return widths_text(c.model.encoder_widths); },
       [](RunConfig& c, const std::string& v) { c.model.encoder_widths = parse_widths("model.encoder", v); }},
      nested("model.semantic_width", &RunConfig::model, &BackboneConfig::semantic_width),
      nested("model.instance_width", &RunConfig::model, &BackboneConfig::instance_width),
      nested("model.embedding_width", &RunConfig::model, &BackboneConfig::embedding_width),
      nested("model.key_width", &RunConfig::model, &BackboneConfig::key_width),
      nested("model.head_hidden", &RunConfig::model, &BackboneConfig::head_hidden),
      nested("model.num_classes", &RunConfig::model, &BackboneConfig::num_classes),
      plain("model.use_colors", &RunConfig::use_colors),
      Field{"attention.mode", [](const RunConfig& c) { return std::string(to_string(c.attention.mode)); },
       [](RunConfig& c, const std::string& v) { c.attention.mode = parse_bidir_mode(v); }},
      nested("attention.chain_features", &RunConfig::attention, &BiDirConfig::chain_features),
      nested("loss.delta_v", &RunConfig::loss, &DiscriminativeParams::delta_v),
      nested("loss.delta_d", &RunConfig::loss, &DiscriminativeParams::delta_d),
      nested("loss.alpha", &RunConfig::loss, &DiscriminativeParams::alpha),
      nested("loss.beta", &RunConfig::loss, &DiscriminativeParams::beta),
      nested("loss.gamma", &RunConfig::loss, &DiscriminativeParams::gamma),
      Field{"loss.norm", [](const RunConfig& c) { return std::string(c.loss.norm == DistanceNorm::kL1 ? "l1" : "l2"); },
       [](RunConfig& c, const std::string& v) {
         if (v == "l1") {
           c.loss.norm = DistanceNorm::kL1;
         } else if (v == "l2") {
           c.loss.norm = DistanceNorm::kL2;
         } else {
           fail(ErrorKind::kConfig, "loss.norm: expected l1 or l2, got '" + v + "'");
         }
       }},
      nested("optim.learning_rate", &RunConfig::optim, &AdamConfig::learning_rate),
      nested("optim.beta1", &RunConfig::optim, &AdamConfig::beta1),
      nested("optim.beta2", &RunConfig::optim, &AdamConfig::beta2),
      nested("optim.epsilon", &RunConfig::optim, &AdamConfig::epsilon),
      nested("optim.halving_interval", &RunConfig::optim, &AdamConfig::halving_interval),
      plain("train.epochs", &RunConfig::epochs),
      plain("train.batch_size", &RunConfig::batch_size),
      plain("train.seed", &RunConfig::seed),
      nested("blocks.size", &RunConfig::blocks, &BlockParams::size),
      nested("blocks.stride", &RunConfig::blocks, &BlockParams::stride),
      nested("blocks.points", &RunConfig::blocks, &BlockParams::points_per_block),
      nested("cluster.bandwidth", &RunConfig::cluster, &MeanShiftParams::bandwidth),
      Field{"cluster.kernel", [](const RunConfig& c) { return to_string(c.cluster.kernel); },
       [](RunConfig& c, const std::string& v) { c.cluster.kernel = parse_kernel(v); }},
      nested("cluster.max_iterations", &RunConfig::cluster, &MeanShiftParams::max_iterations),
      nested("merge.voxel_size", &RunConfig::merge, &MergeParams::voxel_size),
      nested("merge.overlap_threshold", &RunConfig::merge, &MergeParams::overlap_threshold),
      plain("eval.iou_threshold", &RunConfig::iou_threshold),
      plain("run.threads", &RunConfig::threads),
      plain("paths.train", &RunConfig::train_data),
      plain("paths.test", &RunConfig::test_data),
      plain("paths.output", &RunConfig::output),
  };
  return all;
}

const Field& field(const std::string& key) {
  for (const Field& f : fields())
    if (f.key == key) return f;
  fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  const auto positive = [](double v, const std::string& what) {
    if (!(v > 0.0)) fail(ErrorKind::kConfig, what + " must be positive");
  };
  positive(static_cast<double>(epochs), "train.epochs");
  positive(static_cast<double>(batch_size), "train.batch_size");
  positive(static_cast<double>(blocks.points_per_block), "blocks.points");
  positive(blocks.size, "blocks.size");
  positive(blocks.stride, "blocks.stride");
  positive(cluster.bandwidth, "cluster.bandwidth");
  positive(merge.voxel_size, "merge.voxel_size");
  positive(optim.learning_rate, "optim.learning_rate");
  positive(static_cast<double>(threads), "run.threads");
  positive(optim.epsilon, "optim.epsilon");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) fail(ErrorKind::kConfig, "eval.iou_threshold must lie in (0, 1]");
  if (!(merge.overlap_threshold >= 0.0 && merge.overlap_threshold < 1.0)) {
    fail(ErrorKind::kConfig, "merge.overlap_threshold must lie in [0, 1)");
  }
  if (!(optim.beta1 >= 0.0 && optim.beta1 < 1.0 && optim.beta2 >= 0.0 && optim.beta2 < 1.0)) {
    fail(ErrorKind::kConfig, "optim.beta1 and optim.beta2 must lie in [0, 1)");
  }
  if (model.num_classes == 1) fail(ErrorKind::kConfig, "model.num_classes must be 0 (from data) or >= 2");
  loss.validate();
  BackboneConfig probe = model;
  probe.num_classes = 2;
  probe.validate();
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  if (!std::filesystem::is_regular_file(path)) fail(ErrorKind::kIo, "cannot read config " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::kConfig, e.what());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) fail(ErrorKind::kConfig, path.string() + ": key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      try {
        c.set(section + "." + key, value.data());
      } catch (const Error& e) {
        fail(ErrorKind::kConfig, path.string() + ": " + e.detail());
      }
    }
  }
  c.validate();
  return c;
}

std::string RunConfig::to_ini() const {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string s = f.key.substr(0, dot);
    if (s != section) {
      out += (out.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += f.key.substr(dot + 1) + " = " + f.get(*this) + "\n";
  }
  return out;
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::kIo, "cannot write " + path.string());
  os << to_ini();
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) fail(ErrorKind::kConfig, "override '" + assignment + "' is not section.key=value");
  const auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) { field(key).set(*this, value); }

std::string RunConfig::get(const std::string& key) const { return field(key).get(*this); }

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.push_back(f.key);
  return out;
}

}  // namespace ban
