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

#include "ban/data.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "ban/errors.hpp"
#include "ban/format.hpp"
#include "ban/linear.hpp"
#include "json.hpp"

namespace ban {

namespace {

constexpr double kPi = 3.14159265358979323846;

double gaussian(std::mt19937_64& rng) {
  // Box-Muller on our own uniforms keeps the stream library independent.
  const double u1 = uniform(rng, 0.0, 1.0);
  const double u2 = uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * kPi * u2);
}

struct Footprint {
  double x0, y0, x1, y1;
};

double footprint_gap(const Footprint& a, const Footprint& b) {
  const double dx = std::max({0.0, a.x0 - b.x1, b.x0 - a.x1});
  const double dy = std::max({0.0, a.y0 - b.y1, b.y0 - a.y1});
  return std::hypot(dx, dy);
}

Vec3 sample_box_surface(std::mt19937_64& rng, const Vec3& lo, const Vec3& size) {
  // Four sides and the top, chosen by area.
  const double sx = size[0], sy = size[1], sz = size[2];
  const double areas[5] = {sy * sz, sy * sz, sx * sz, sx * sz, sx * sy};
  const double total = areas[0] + areas[1] + areas[2] + areas[3] + areas[4];
  double pick = uniform(rng, 0.0, total);
  int face = 0;
  while (face < 4 && pick >= areas[face]) pick -= areas[face++];
  const double u = uniform(rng, 0.0, 1.0);
  const double v = uniform(rng, 0.0, 1.0);
  switch (face) {
    case 0: return {lo[0], lo[1] + u * sy, lo[2] + v * sz};
    case 1: return {lo[0] + sx, lo[1] + u * sy, lo[2] + v * sz};
    case 2: return {lo[0] + u * sx, lo[1], lo[2] + v * sz};
    case 3: return {lo[0] + u * sx, lo[1] + sy, lo[2] + v * sz};
    default: return {lo[0] + u * sx, lo[1] + v * sy, lo[2] + sz};
  }
}

Vec3 sample_cylinder_surface(std::mt19937_64& rng, const Vec3& lo, const Vec3& size) {
  const double r = 0.5 * std::min(size[0], size[1]);
  const double cx = lo[0] + 0.5 * size[0];
  const double cy = lo[1] + 0.5 * size[1];
  const double side = 2.0 * kPi * r * size[2];
  const double top = kPi * r * r;
  const double t = uniform(rng, 0.0, 2.0 * kPi);
  if (uniform(rng, 0.0, side + top) < side) {
    return {cx + r * std::cos(t), cy + r * std::sin(t), lo[2] + uniform(rng, 0.0, size[2])};
  }
  const double rr = r * std::sqrt(uniform(rng, 0.0, 1.0));
  return {cx + rr * std::cos(t), cy + rr * std::sin(t), lo[2] + size[2]};
}

Vec3 sample_cluster(std::mt19937_64& rng, const Vec3& lo, const Vec3& size) {
  Vec3 p{};
  for (int k = 0; k < 3; ++k) {
    const double c = lo[k] + 0.5 * size[k];
    p[k] = std::clamp(c + 0.25 * size[k] * gaussian(rng), lo[k], lo[k] + size[k]);
  }
  return p;
}

Vec3 parse_vec3(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  Vec3 v{};
  std::string tok;
  for (int k = 0; k < 3; ++k) {
    if (!(is >> tok)) fail(ErrorKind::kSpec, key + ": expected three numbers, got '" + text + "'");
    const auto x = parse_number<double>(tok);
    if (!x) fail(ErrorKind::kSpec, key + ": '" + tok + "' is not a number");
    v[static_cast<std::size_t>(k)] = *x;
  }
  if (is >> tok) fail(ErrorKind::kSpec, key + ": trailing text in '" + text + "'");
  return v;
}

std::string vec3_text(const Vec3& v) {
  return format_double(v[0]) + " " + format_double(v[1]) + " " + format_double(v[2]);
}

enum Column { kX, kY, kZ, kR, kG, kB, kSem, kInst };

std::vector<Column> columns_for_count(std::size_t n) {
  switch (n) {
    case 3: return {kX, kY, kZ};
    case 4: return {kX, kY, kZ, kSem};
    case 5: return {kX, kY, kZ, kSem, kInst};
    case 6: return {kX, kY, kZ, kR, kG, kB};
    case 7: return {kX, kY, kZ, kR, kG, kB, kSem};
    case 8: return {kX, kY, kZ, kR, kG, kB, kSem, kInst};
    default: return {};
  }
}

std::vector<Column> parse_fields(const std::string& spec, const std::string& where) {
  static const std::map<std::string, Column> names = {{"x", kX}, {"y", kY}, {"z", kZ}, {"r", kR},
                                                      {"g", kG}, {"b", kB}, {"sem", kSem}, {"inst", kInst}};
  std::istringstream is(spec);
  std::vector<Column> cols;
  std::string tok;
  while (is >> tok) {
    const auto it = names.find(tok);
    if (it == names.end()) fail(ErrorKind::kParse, where + ": unknown field '" + tok + "'");
    cols.push_back(it->second);
  }
  const auto has = [&](Column c) { return std::find(cols.begin(), cols.end(), c) != cols.end(); };
  if (!has(kX) || !has(kY) || !has(kZ)) fail(ErrorKind::kParse, where + ": fields must include x y z");
  if (has(kR) != has(kG) || has(kG) != has(kB)) fail(ErrorKind::kParse, where + ": colors need all of r g b");
  return cols;
}

std::vector<std::string> field_names(const PointCloud& c) {
  std::vector<std::string> f = {"x", "y", "z"};
  if (c.colors) f.insert(f.end(), {"r", "g", "b"});
  if (c.semantic) f.push_back("sem");
  if (c.instance) f.push_back("inst");
  return f;
}

}  // namespace

void PointCloud::validate() const {
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (double v : positions[i]) {
      if (!std::isfinite(v)) fail(ErrorKind::kInput, "point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
  if (colors && colors->size() != positions.size()) fail(ErrorKind::kInput, "color count does not match points");
  if (semantic && semantic->size() != positions.size()) {
    fail(ErrorKind::kInput, "semantic label count does not match points");
  }
  if (instance && instance->size() != positions.size()) {
    fail(ErrorKind::kInput, "instance label count does not match points");
  }
}

std::pair<Vec3, Vec3> PointCloud::bounds() const {
  if (positions.empty()) fail(ErrorKind::kInput, "bounds of an empty cloud");
  Vec3 lo = positions[0], hi = positions[0];
  for (const Vec3& p : positions) {
    for (std::size_t k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  return {lo, hi};
}

std::string to_string(Shape shape) {
  switch (shape) {
    case Shape::kBox: return "box";
    case Shape::kPlane: return "plane";
    case Shape::kCylinder: return "cylinder";
    case Shape::kCluster: return "cluster";
  }
  return "box";
}

Shape parse_shape(const std::string& name) {
  if (name == "box") return Shape::kBox;
  if (name == "plane") return Shape::kPlane;
  if (name == "cylinder") return Shape::kCylinder;
  if (name == "cluster") return Shape::kCluster;
  fail(ErrorKind::kSpec, "unknown shape '" + name + "'");
}

void SceneSpec::validate() const {
  if (classes.empty()) fail(ErrorKind::kSpec, "scene spec has no classes");
  for (double e : extent) {
    if (!(e > 0.0)) fail(ErrorKind::kSpec, "scene extent must be positive");
  }
  if (noise < 0.0 || min_gap < 0.0) fail(ErrorKind::kSpec, "noise and min_gap must be >= 0");
  int total = 0;
  for (const ClassSpec& c : classes) {
    if (c.min_instances < 0 || c.max_instances < c.min_instances) {
      fail(ErrorKind::kSpec, "class " + c.name + ": bad instance range");
    }
    if (c.points_per_instance < 1) fail(ErrorKind::kSpec, "class " + c.name + ": points must be >= 1");
    for (double s : c.size) {
      if (s < 0.0) fail(ErrorKind::kSpec, "class " + c.name + ": negative size");
    }
    if (c.shape != Shape::kPlane && (c.size[0] <= 0.0 || c.size[1] <= 0.0)) {
      fail(ErrorKind::kSpec, "class " + c.name + ": object footprint must be positive");
    }
    if (c.size[0] > extent[0] || c.size[1] > extent[1]) {
      fail(ErrorKind::kSpec, "class " + c.name + ": object larger than the scene");
    }
    total += c.max_instances;
  }
  if (total < 1) fail(ErrorKind::kSpec, "scene spec allows no instances");
}

SceneSpec SceneSpec::preset(const std::string& name) {
  SceneSpec s;
  if (name == "two-chairs") {
    s.extent = {2.0, 1.0, 1.0};
    s.classes = {{"chair", Shape::kBox, {0.4, 0.4, 0.8}, 2, 2, 300, {0.8, 0.3, 0.2}}};
    return s;
  }
  if (name == "floor-and-chairs") {
    // Two classes; every scene holds two chairs with at least 0.6 m between them.
    s.extent = {2.0, 1.0, 1.0};
    s.min_gap = 0.6;
    s.classes = {{"floor", Shape::kPlane, {2.0, 1.0, 0.0}, 1, 1, 600, {0.55, 0.5, 0.45}},
                 {"chair", Shape::kBox, {0.4, 0.4, 0.6}, 2, 2, 300, {0.55, 0.5, 0.45}}};
    return s;
  }
  if (name == "room") {
    s.extent = {4.0, 4.0, 3.0};
    s.classes = {{"floor", Shape::kPlane, {4.0, 4.0, 0.0}, 1, 1, 2000, {0.6, 0.6, 0.6}},
                 {"table", Shape::kBox, {1.0, 0.6, 0.75}, 1, 2, 500, {0.5, 0.35, 0.2}},
                 {"chair", Shape::kBox, {0.45, 0.45, 0.9}, 2, 4, 300, {0.2, 0.3, 0.7}},
                 {"lamp", Shape::kCylinder, {0.3, 0.3, 1.6}, 0, 2, 200, {0.9, 0.9, 0.4}},
                 {"clutter", Shape::kCluster, {0.4, 0.4, 0.4}, 0, 3, 150, {0.3, 0.6, 0.3}}};
    return s;
  }
  fail(ErrorKind::kSpec, "unknown scene preset '" + name + "'");
}

SceneSpec SceneSpec::load(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::kSpec, path.string() + ": " + e.what());
  }
  SceneSpec s;
  try {
    if (const auto preset_name = tree.get_optional<std::string>("scene.preset")) s = preset(*preset_name);
    if (const auto v = tree.get_optional<std::string>("scene.extent")) s.extent = parse_vec3(*v, "scene.extent");
    s.noise = tree.get("scene.noise", s.noise);
    s.min_gap = tree.get("scene.min_gap", s.min_gap);
    s.with_colors = tree.get("scene.colors", s.with_colors);
    s.seed = tree.get("scene.seed", s.seed);
    std::vector<ClassSpec> classes;
    for (const auto& [section, body] : tree) {
      if (section.rfind("class.", 0) != 0) continue;
      ClassSpec c;
      c.name = section.substr(6);
      c.shape = parse_shape(body.get<std::string>("shape", "box"));
      if (const auto v = body.get_optional<std::string>("size")) c.size = parse_vec3(*v, section + ".size");
      if (const auto v = body.get_optional<std::string>("color")) c.color = parse_vec3(*v, section + ".color");
      c.points_per_instance = body.get("points", c.points_per_instance);
      std::istringstream range(body.get<std::string>("instances", "1 1"));
      if (!(range >> c.min_instances >> c.max_instances)) {
        fail(ErrorKind::kSpec, section + ".instances: expected 'min max'");
      }
      classes.push_back(std::move(c));
    }
    if (!classes.empty()) s.classes = std::move(classes);
  } catch (const pt::ptree_error& e) {
    fail(ErrorKind::kSpec, path.string() + ": " + e.what());
  }
  s.validate();
  return s;
}

void SceneSpec::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::kIo, "cannot write " + path.string());
  os << "[scene]\n"
     << "extent = " << vec3_text(extent) << "\n"
     << "noise = " << format_double(noise) << "\n"
     << "min_gap = " << format_double(min_gap) << "\n"
     << "colors = " << (with_colors ? "true" : "false") << "\n"
     << "seed = " << seed << "\n";
  for (const ClassSpec& c : classes) {
    os << "\n[class." << c.name << "]\n"
       << "shape = " << to_string(c.shape) << "\n"
       << "size = " << vec3_text(c.size) << "\n"
       << "instances = " << c.min_instances << " " << c.max_instances << "\n"
       << "points = " << c.points_per_instance << "\n"
       << "color = " << vec3_text(c.color) << "\n";
  }
}

PointCloud generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);

  std::vector<int> counts;
  for (const ClassSpec& c : spec.classes) {
    counts.push_back(c.min_instances +
                     static_cast<int>(uniform_index(rng, static_cast<std::size_t>(c.max_instances - c.min_instances + 1))));
  }
  // Guarantee a same-class, different-instance pair whenever the spec allows one.
  const bool has_pair = std::any_of(counts.begin(), counts.end(), [](int n) { return n >= 2; });
  if (!has_pair) {
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
      if (spec.classes[c].max_instances >= 2) {
        counts[c] = 2;
        break;
      }
    }
  }
  if (std::all_of(counts.begin(), counts.end(), [](int n) { return n == 0; })) {
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
      if (spec.classes[c].max_instances >= 1) {
        counts[c] = 1;
        break;
      }
    }
  }

  PointCloud cloud;
  cloud.semantic.emplace();
  cloud.instance.emplace();
  if (spec.with_colors) cloud.colors.emplace();
  // Lay out every object first; a dead end restarts the whole layout.
  std::vector<std::vector<Vec3>> origin(spec.classes.size());
  bool laid_out = false;
  for (int restart = 0; restart < 100 && !laid_out; ++restart) {
    std::vector<Footprint> placed;
    laid_out = true;
    for (std::size_t c = 0; c < spec.classes.size() && laid_out; ++c) {
      const ClassSpec& cls = spec.classes[c];
      origin[c].assign(static_cast<std::size_t>(counts[c]), Vec3{});
      if (cls.shape == Shape::kPlane) continue;
      for (int k = 0; k < counts[c] && laid_out; ++k) {
        bool ok = false;
        for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
          const double x = uniform(rng, 0.0, spec.extent[0] - cls.size[0]);
          const double y = uniform(rng, 0.0, spec.extent[1] - cls.size[1]);
          const Footprint f{x, y, x + cls.size[0], y + cls.size[1]};
          ok = std::all_of(placed.begin(), placed.end(),
                           [&](const Footprint& o) { return footprint_gap(f, o) >= spec.min_gap; });
          if (ok) {
            placed.push_back(f);
            origin[c][static_cast<std::size_t>(k)] = {x, y, 0.0};
          }
        }
        laid_out = ok;
      }
    }
  }
  if (!laid_out) fail(ErrorKind::kSpec, "cannot place all objects with the requested gap");

  int next_instance = 0;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const ClassSpec& cls = spec.classes[c];
    for (int k = 0; k < counts[c]; ++k) {
      Vec3 lo = origin[c][static_cast<std::size_t>(k)], size = cls.size;
      if (cls.shape == Shape::kPlane) {
        // Plane instances split the footprint into strips along x.
        const double strip = spec.extent[0] / counts[c];
        lo = {strip * k, 0.0, cls.size[2]};
        size = {strip, spec.extent[1], 0.0};
      }
      for (int n = 0; n < cls.points_per_instance; ++n) {
        Vec3 p{};
        switch (cls.shape) {
          case Shape::kPlane: p = {lo[0] + uniform(rng, 0.0, size[0]), lo[1] + uniform(rng, 0.0, size[1]), lo[2]}; break;
          case Shape::kBox: p = sample_box_surface(rng, lo, size); break;
          case Shape::kCylinder: p = sample_cylinder_surface(rng, lo, size); break;
          case Shape::kCluster: p = sample_cluster(rng, lo, size); break;
        }
        for (double& v : p) v += spec.noise * gaussian(rng);
        cloud.positions.push_back(p);
        if (cloud.colors) {
          Vec3 col = cls.color;
          for (double& v : col) v = std::clamp(v + 0.05 * gaussian(rng), 0.0, 1.0);
          cloud.colors->push_back(col);
        }
        cloud.semantic->push_back(static_cast<int>(c));
        cloud.instance->push_back(next_instance);
      }
      ++next_instance;
    }
  }
  return cloud;
}

CloudFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".json" ? CloudFormat::kJson : CloudFormat::kText;
}

std::string cloud_to_text(const PointCloud& cloud) {
  cloud.validate();
  std::string out = "# fields:";
  for (const auto& f : field_names(cloud)) out += " " + f;
  out += "\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    out += format_double(p[0]) + " " + format_double(p[1]) + " " + format_double(p[2]);
    if (cloud.colors) {
      const Vec3& c = (*cloud.colors)[i];
      out += " " + format_double(c[0]) + " " + format_double(c[1]) + " " + format_double(c[2]);
    }
    if (cloud.semantic) out += " " + std::to_string((*cloud.semantic)[i]);
    if (cloud.instance) out += " " + std::to_string((*cloud.instance)[i]);
    out += "\n";
  }
  return out;
}

PointCloud cloud_from_text(const std::string& text, const std::string& source) {
  std::istringstream is(text);
  std::string line;
  std::vector<Column> cols;
  bool have_layout = false;
  PointCloud cloud;
  std::size_t line_no = 0;

  while (std::getline(is, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const auto pos = line.find("fields:");
      if (pos != std::string::npos && !have_layout && cloud.size() == 0) {
        cols = parse_fields(line.substr(pos + 7), where);
        have_layout = true;
      }
      continue;
    }
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    if (!have_layout) {
      cols = columns_for_count(tokens.size());
      if (cols.empty()) fail(ErrorKind::kParse, where + ": cannot infer a layout from " + std::to_string(tokens.size()) + " columns");
      have_layout = true;
    }
    if (cloud.size() == 0) {
      const auto has = [&](Column c) { return std::find(cols.begin(), cols.end(), c) != cols.end(); };
      if (has(kR)) cloud.colors.emplace();
      if (has(kSem)) cloud.semantic.emplace();
      if (has(kInst)) cloud.instance.emplace();
    }
    if (tokens.size() != cols.size()) {
      fail(ErrorKind::kParse, where + ": record " + std::to_string(cloud.size()) + " has " +
                                  std::to_string(tokens.size()) + " fields, expected " + std::to_string(cols.size()));
    }
    Vec3 p{}, c{};
    int sem = 0, inst = 0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == kSem || cols[k] == kInst) {
        const auto v = parse_number<int>(tokens[k]);
        if (!v) fail(ErrorKind::kParse, where + ": '" + tokens[k] + "' is not an integer label");
        (cols[k] == kSem ? sem : inst) = *v;
        continue;
      }
      const auto v = parse_number<double>(tokens[k]);
      if (!v) fail(ErrorKind::kParse, where + ": '" + tokens[k] + "' is not a number");
      switch (cols[k]) {
        case kX: p[0] = *v; break;
        case kY: p[1] = *v; break;
        case kZ: p[2] = *v; break;
        case kR: c[0] = *v; break;
        case kG: c[1] = *v; break;
        case kB: c[2] = *v; break;
        default: break;
      }
    }
    cloud.positions.push_back(p);
    if (cloud.colors) cloud.colors->push_back(c);
    if (cloud.semantic) cloud.semantic->push_back(sem);
    if (cloud.instance) cloud.instance->push_back(inst);
  }
  cloud.validate();
  return cloud;
}

PointCloud load_cloud(const std::filesystem::path& path, std::optional<CloudFormat> format) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  if (format.value_or(format_for(path)) == CloudFormat::kText) return cloud_from_text(buf.str(), path.string());

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::kParse, path.string() + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    if (j.at("format") != "ban-cloud") fail(ErrorKind::kParse, path.string() + ": not a ban-cloud document");
    if (j.at("version") != 1) fail(ErrorKind::kVersion, path.string() + ": unsupported cloud version");
    std::string fields;
    for (const auto& f : j.at("fields")) fields += " " + f.get<std::string>();
    const std::vector<Column> cols = parse_fields(fields, path.string());
    std::ostringstream text;
    text << "# fields:" << fields << "\n";
    std::size_t index = 0;
    for (const auto& rec : j.at("points")) {
      if (rec.size() != cols.size()) {
        fail(ErrorKind::kParse, path.string() + ": record " + std::to_string(index) + " has " +
                                    std::to_string(rec.size()) + " fields, expected " + std::to_string(cols.size()));
      }
      for (std::size_t k = 0; k < rec.size(); ++k) {
        text << (k ? " " : "");
        if (cols[k] == kSem || cols[k] == kInst) {
          text << rec[k].get<int>();
        } else {
          text << format_double(rec[k].get<double>());
        }
      }
      text << "\n";
      ++index;
    }
    return cloud_from_text(text.str(), path.string());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, std::optional<CloudFormat> format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::kIo, "cannot write " + path.string());
  if (format.value_or(format_for(path)) == CloudFormat::kText) {
    os << cloud_to_text(cloud);
    return;
  }
  cloud.validate();
  nlohmann::json j;
  j["format"] = "ban-cloud";
  j["version"] = 1;
  j["fields"] = field_names(cloud);
  auto& pts = j["points"] = nlohmann::json::array();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    nlohmann::json rec = {cloud.positions[i][0], cloud.positions[i][1], cloud.positions[i][2]};
    if (cloud.colors) {
      for (double v : (*cloud.colors)[i]) rec.push_back(v);
    }
    if (cloud.semantic) rec.push_back((*cloud.semantic)[i]);
    if (cloud.instance) rec.push_back((*cloud.instance)[i]);
    pts.push_back(std::move(rec));
  }
  os << j.dump() << "\n";
}

}  // namespace ban
