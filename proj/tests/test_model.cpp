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
#include <random>

#include "ban/errors.hpp"
#include "ban/gradcheck.hpp"
#include "ban/model.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ban;
using ban::testing::random_matrix;
using ban::testing::random_permutation;

namespace {

BackboneConfig small_config() {
  BackboneConfig c = gradcheck_backbone();
  c.num_classes = 2;
  return c;
}

}  // namespace

TEST_CASE("a single point gives one-row outputs and unit similarities") {
  for (BiDirMode mode : all_bidir_modes()) {
    const SegModel model(BackboneConfig{}, {mode}, 1);
    std::mt19937_64 rng(1);
    const Prediction p = predict(model, random_matrix(1, 6, rng));
    CHECK(p.logits.rows() == 1);
    CHECK(p.logits.cols() == 2);
    CHECK(p.embedding.rows() == 1);
    CHECK(p.embedding.cols() == 5);
    CHECK(p.p_sem.has_value() == (mode != BiDirMode::kNone && mode != BiDirMode::kItosOnly));
    CHECK(p.p_inst.has_value() == (mode != BiDirMode::kNone && mode != BiDirMode::kStoiOnly));
    if (p.p_sem) CHECK(p.p_sem->p == Matrix(1, 1, 1.0));
    if (p.p_inst) CHECK(p.p_inst->p == Matrix(1, 1, 1.0));
  }
}

TEST_CASE("output shapes hold for every N") {
  const SegModel model(small_config(), {}, 2);
  std::mt19937_64 rng(2);
  for (std::size_t n : {1, 2, 5, 17}) {
    INFO("N = ", n);
    const Prediction p = predict(model, random_matrix(n, 6, rng));
    CHECK(p.logits.rows() == n);
    CHECK(p.embedding.rows() == n);
    CHECK(p.p_sem->p.rows() == n);
    CHECK(p.p_sem->p.cols() == n);
  }
}

TEST_CASE("permuting the input permutes every output bit for bit") {
  std::mt19937_64 rng(3);
  for (BiDirMode mode : all_bidir_modes()) {
    const SegModel model(BackboneConfig{}, {mode}, 3);
    const Matrix f = random_matrix(24, 6, rng);
    const Prediction base = predict(model, f);
    for (int trial = 0; trial < 3; ++trial) {
      const auto perm = random_permutation(24, rng);
      const Prediction q = predict(model, permute_rows(f, perm));
      CHECK(q.logits == permute_rows(base.logits, perm));
      CHECK(q.embedding == permute_rows(base.embedding, perm));
      if (base.p_sem) CHECK(q.p_sem->p == permute_cols(permute_rows(base.p_sem->p, perm), perm));
    }
  }
}

TEST_CASE("identical points get identical rows") {
  const SegModel model(BackboneConfig{}, {}, 4);
  std::mt19937_64 rng(4);
  Matrix f = random_matrix(6, 6, rng);
  for (std::size_t c = 0; c < 6; ++c) f(4, c) = f(1, c);
  const Prediction p = predict(model, f);
  for (std::size_t c = 0; c < p.logits.cols(); ++c) CHECK(p.logits(4, c) == p.logits(1, c));
  for (std::size_t c = 0; c < p.embedding.cols(); ++c) CHECK(p.embedding(4, c) == p.embedding(1, c));
}

TEST_CASE("wrong feature width is a config error, an empty cloud a dimension error") {
  const SegModel model(small_config(), {}, 5);
  Tape tape;
  try {
    model.forward(tape, Matrix(3, 9));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
  CHECK_THROWS_AS(model.forward(tape, Matrix(0, 6)), Error);
}

TEST_CASE("parameters are enumerable and zeroable") {
  SegModel model(BackboneConfig{}, {}, 6);
  std::size_t count = 0;
  for (Parameter* p : model.parameters()) {
    count += p->value.size();
    CHECK(p->value.all_finite());
    p->grad(0, 0) = 1.0;
  }
  CHECK(count == model.parameter_count());
  model.zero_grad();
  for (Parameter* p : model.parameters()) CHECK(p->grad == Matrix(p->grad.rows(), p->grad.cols()));
  const SegModel none(BackboneConfig{}, {BiDirMode::kNone}, 6);
  CHECK(none.parameter_count() < model.parameter_count());
}

TEST_CASE("every parameter gradient matches finite differences") {
  for (BiDirMode mode : all_bidir_modes()) {
    SegModel model(small_config(), {mode}, 7);
    for (const GradcheckEntry& e : check_model_gradients(model, 8, 7, {}, GradcheckOptions{}.model_steps, 1e-6, 1e-4)) {
      INFO(e.check, " ", to_string(mode));
      CHECK(e.error < 1e-4);
    }
  }
}

TEST_CASE("checkpoints round-trip and reject other versions") {
  const SegModel model(small_config(), {BiDirMode::kStoiOnly}, 8);
  const auto path = std::filesystem::temp_directory_path() / "ban_test_model.json";
  save_checkpoint(path, model, {{"epoch", 3}});
  nlohmann::json doc = read_checkpoint(path);
  CHECK(doc["epoch"] == 3);
  const SegModel back = model_from_checkpoint(doc);
  CHECK(back.attention().mode == BiDirMode::kStoiOnly);
  std::mt19937_64 rng(8);
  const Matrix f = random_matrix(7, 6, rng);
  CHECK(predict(back, f).logits == predict(model, f).logits);

  doc["version"] = kCheckpointVersion + 1;
  try {
    model_from_checkpoint(doc);
    FAIL("expected a version error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kVersion);
  }
}
