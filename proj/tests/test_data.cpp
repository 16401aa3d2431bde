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

#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "ban/data.hpp"
#include "ban/errors.hpp"
#include "doctest.h"

using namespace ban;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ban_test_data";
  fs::create_directories(dir);
  return dir / name;
}

PointCloud random_cloud(std::size_t n, bool colors, bool labels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-5.0, 5.0), unit(0.0, 1.0);
  PointCloud c;
  if (colors) c.colors.emplace();
  if (labels) {
    c.semantic.emplace();
    c.instance.emplace();
  }
  for (std::size_t i = 0; i < n; ++i) {
    c.positions.push_back({pos(rng), pos(rng), pos(rng)});
    if (colors) c.colors->push_back({unit(rng), unit(rng), unit(rng)});
    if (labels) {
      c.semantic->push_back(static_cast<int>(rng() % 4));
      c.instance->push_back(static_cast<int>(rng() % 9));
    }
  }
  return c;
}

bool same_cloud(const PointCloud& a, const PointCloud& b) {
  return a.positions == b.positions && a.colors == b.colors && a.semantic == b.semantic &&
         a.instance == b.instance;
}

}  // namespace

TEST_CASE("one class with one instance labels every point alike") {
  SceneSpec spec;
  spec.extent = {2.0, 2.0, 1.0};
  spec.classes = {{"box", Shape::kBox, {0.5, 0.5, 0.5}, 1, 1, 200, {0.5, 0.5, 0.5}}};
  const PointCloud c = generate_scene(spec);
  REQUIRE(c.labeled());
  CHECK(c.size() == 200);
  CHECK(std::set<int>(c.semantic->begin(), c.semantic->end()).size() == 1);
  CHECK(std::set<int>(c.instance->begin(), c.instance->end()) == std::set<int>{0});
}

TEST_CASE("two-chairs preset yields two instances of one class") {
  const PointCloud c = generate_scene(SceneSpec::preset("two-chairs"));
  CHECK(std::set<int>(c.semantic->begin(), c.semantic->end()).size() == 1);
  CHECK(std::set<int>(c.instance->begin(), c.instance->end()) == std::set<int>{0, 1});
}

TEST_CASE("generation is bit-identical for a fixed seed and differs across seeds") {
  SceneSpec spec = SceneSpec::preset("room");
  spec.seed = 17;
  const PointCloud a = generate_scene(spec);
  const PointCloud b = generate_scene(spec);
  CHECK(same_cloud(a, b));
  spec.seed = 18;
  CHECK_FALSE(same_cloud(a, generate_scene(spec)));
}

TEST_CASE("generated scenes are valid, dense, and hold a same-class pair") {
  for (const char* name : {"two-chairs", "floor-and-chairs", "room"}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      SceneSpec spec = SceneSpec::preset(name);
      spec.seed = seed;
      const PointCloud c = generate_scene(spec);
      CHECK_NOTHROW(c.validate());
      const std::set<int> ids(c.instance->begin(), c.instance->end());
      CHECK(*ids.begin() == 0);
      CHECK(*ids.rbegin() == static_cast<int>(ids.size()) - 1);
      std::map<int, std::set<int>> per_class;
      for (std::size_t i = 0; i < c.size(); ++i) per_class[(*c.semantic)[i]].insert((*c.instance)[i]);
      bool pair = false;
      for (const auto& [cls, inst] : per_class) pair = pair || inst.size() >= 2;
      CHECK(pair);
      for (const auto& col : *c.colors)
        for (double v : col) CHECK((v >= 0.0 && v <= 1.0));
    }
  }
}

TEST_CASE("specs without classes or with unknown presets are rejected") {
  SceneSpec empty;
  CHECK_THROWS_AS(generate_scene(empty), Error);
  try {
    generate_scene(empty);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSpec);
  }
  CHECK_THROWS_AS(SceneSpec::preset("cathedral"), Error);
}

TEST_CASE("scene specs round-trip through their file form") {
  SceneSpec spec = SceneSpec::preset("room");
  spec.seed = 99;
  spec.noise = 0.01;
  const fs::path path = scratch("room.ini");
  spec.save(path);
  const SceneSpec back = SceneSpec::load(path);
  CHECK(same_cloud(generate_scene(spec), generate_scene(back)));
}

TEST_CASE("text and json clouds round-trip exactly") {
  for (bool colors : {false, true})
    for (bool labels : {false, true}) {
      const PointCloud c = random_cloud(50, colors, labels, colors * 2 + labels);
      CHECK(same_cloud(cloud_from_text(cloud_to_text(c)), c));
      for (const char* name : {"c.txt", "c.json"}) {
        const fs::path path = scratch(name);
        save_cloud(c, path);
        CHECK(same_cloud(load_cloud(path), c));
      }
    }
}

TEST_CASE("missing label columns leave labels absent") {
  const PointCloud c = cloud_from_text("0 0 0\n1 2 3\n");
  CHECK(c.size() == 2);
  CHECK_FALSE(c.semantic.has_value());
  CHECK_FALSE(c.instance.has_value());
  CHECK_FALSE(c.colors.has_value());

  const PointCloud d = cloud_from_text("# fields: x y z sem\n0 0 0 3\n");
  CHECK(d.semantic == std::vector<int>{3});
  CHECK_FALSE(d.instance.has_value());
}

TEST_CASE("a truncated record names its line and index") {
  const std::string text = "# fields: x y z sem inst\n0 0 0 1 2\n1 1 1 1 2\n2 2\n";
  try {
    cloud_from_text(text, "scene.txt");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    const std::string msg = e.what();
    CHECK(msg.find("scene.txt:4") != std::string::npos);
    CHECK(msg.find("record 2") != std::string::npos);
  }
  CHECK_THROWS_AS(cloud_from_text("0 0 zero\n"), Error);
}

TEST_CASE("validate catches mismatched label arrays and non-finite points") {
  PointCloud c = random_cloud(5, false, true, 3);
  c.semantic->pop_back();
  CHECK_THROWS_AS(c.validate(), Error);
  PointCloud d = random_cloud(5, false, false, 4);
  d.positions[2][1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(d.validate(), Error);
}
