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


#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>

#include "ban/config.hpp"
#include "ban/errors.hpp"
#include "doctest.h"

using namespace ban;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ban_test_config";
  fs::create_directories(dir);
  return dir / name;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kContract;
}

}  // namespace

TEST_CASE("defaults carry the desk-scale schedule and validate") {
  const RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.cluster.bandwidth == 0.6);
  CHECK(c.blocks.size == 1.0);
  CHECK(c.blocks.points_per_block == 4096);
  CHECK(c.batch_size == 12);
  CHECK(c.optim.learning_rate == 0.001);
  CHECK(c.epochs == 20);
  CHECK(c.attention.mode == BiDirMode::kBothStoiFirst);
}

TEST_CASE("every key round-trips through an INI file") {
  RunConfig c;
  c.apply_override("model.encoder=16,16,32");
  c.apply_override("attention.mode=itos-only");
  c.apply_override("loss.norm=l2");
  c.apply_override("cluster.kernel=gaussian");
  c.apply_override("optim.learning_rate=0.0025");
  c.apply_override("train.seed=42");
  c.apply_override("paths.output=/tmp/run one");
  const fs::path path = scratch("roundtrip.ini");
  c.save(path);
  const RunConfig back = RunConfig::load(path);
  CHECK(back.to_ini() == c.to_ini());
  for (const std::string& key : RunConfig::keys()) CHECK_MESSAGE(back.get(key) == c.get(key), key);
  CHECK(back.model.encoder_widths == std::vector<std::size_t>{16, 16, 32});
  CHECK(back.output == "/tmp/run one");
}

TEST_CASE("keys cover each section") {
  const auto keys = RunConfig::keys();
  for (const char* k : {"model.encoder", "attention.mode", "loss.delta_v", "optim.halving_interval", "train.epochs",
                        "blocks.points", "cluster.bandwidth", "merge.overlap_threshold", "eval.iou_threshold",
                        "run.threads", "paths.train"}) {
    CHECK_MESSAGE(std::find(keys.begin(), keys.end(), k) != keys.end(), k);
  }
}

TEST_CASE("absent keys keep defaults") {
  const fs::path path = scratch("partial.ini");
  std::ofstream(path) << "[train]\nepochs = 3\n";
  const RunConfig c = RunConfig::load(path);
  CHECK(c.epochs == 3);
  CHECK(c.to_ini() != RunConfig{}.to_ini());
  RunConfig expected;
  expected.epochs = 3;
  CHECK(c.to_ini() == expected.to_ini());
}

TEST_CASE("bad keys and values are config errors") {
  RunConfig c;
  CHECK(kind_of([&] { c.apply_override("model.depth=3"); }) == ErrorKind::kConfig);
  CHECK(kind_of([&] { c.apply_override("train.epochs"); }) == ErrorKind::kConfig);
  CHECK(kind_of([&] { c.apply_override("train.epochs=many"); }) == ErrorKind::kConfig);
  CHECK(kind_of([&] { c.apply_override("attention.mode=sideways"); }) == ErrorKind::kConfig);
  CHECK(kind_of([&] { c.get("nope.nope"); }) == ErrorKind::kConfig);

  const fs::path path = scratch("unknown.ini");
  std::ofstream(path) << "[train]\nepochs = 3\nwarmup = 2\n";
  CHECK(kind_of([&] { RunConfig::load(path); }) == ErrorKind::kConfig);
}

TEST_CASE("validation rejects out-of-range values") {
  const auto invalid = [](const std::string& assignment) {
    RunConfig c;
    c.apply_override(assignment);
    return kind_of([&] { c.validate(); }) == ErrorKind::kConfig;
  };
  CHECK(invalid("cluster.bandwidth=0"));
  CHECK(invalid("train.batch_size=0"));
  CHECK(invalid("eval.iou_threshold=1.5"));
  CHECK(invalid("merge.overlap_threshold=1"));
  CHECK(invalid("optim.beta1=1"));
  CHECK(invalid("model.num_classes=1"));
  CHECK(invalid("loss.delta_v=-1"));
}

TEST_CASE("a missing file is an io error") {
  CHECK(kind_of([] { RunConfig::load(scratch("absent.ini")); }) == ErrorKind::kIo);
}
