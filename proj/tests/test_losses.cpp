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

#include <cmath>
#include <map>
#include <random>

#include "ban/losses.hpp"
#include "ban/optim.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ban;
using ban::testing::numeric_gradient;
using ban::testing::random_matrix;
using ban::testing::random_permutation;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ban::Error");
  return ErrorKind::kContract;
}

double l1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

// Straightforward three-term evaluation with L1 distances.
DiscriminativeTerms discriminative_oracle(const Matrix& e, const std::vector<int>& labels,
                                          const DiscriminativeParams& p) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < labels.size(); ++j) groups[labels[j]].push_back(j);
  std::vector<std::vector<double>> means;
  for (const auto& [id, pts] : groups) {
    std::vector<double> mu(e.cols(), 0.0);
    for (std::size_t j : pts)
      for (std::size_t k = 0; k < e.cols(); ++k) mu[k] += e(j, k) / static_cast<double>(pts.size());
    means.push_back(mu);
  }
  const double c = static_cast<double>(means.size());
  DiscriminativeTerms t;
  std::size_t ci = 0;
  for (const auto& [id, pts] : groups) {
    double inner = 0.0;
    for (std::size_t j : pts) {
      std::vector<double> d(e.cols());
      for (std::size_t k = 0; k < e.cols(); ++k) d[k] = means[ci][k] - e(j, k);
      const double h = std::max(0.0, l1(d) - p.delta_v);
      inner += h * h;
    }
    t.var += inner / static_cast<double>(pts.size()) / c;
    ++ci;
  }
  for (std::size_t a = 0; a < means.size(); ++a)
    for (std::size_t b = 0; b < means.size(); ++b) {
      if (a == b) continue;
      std::vector<double> d(e.cols());
      for (std::size_t k = 0; k < e.cols(); ++k) d[k] = means[a][k] - means[b][k];
      const double h = std::max(0.0, 2.0 * p.delta_d - l1(d));
      t.dist += h * h / (c * (c - 1.0));
    }
  for (const auto& mu : means) t.reg += l1(mu) / c;
  t.total = p.alpha * t.var + p.beta * t.dist + p.gamma * t.reg;
  return t;
}

}  // namespace

TEST_CASE("cross entropy: uniform logits give ln(N_C)") {
  const Matrix logits(4, 3, 0.7);
  const std::vector<int> labels = {0, 1, 2, 1};
  CHECK(cross_entropy(logits, labels) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
}

TEST_CASE("cross entropy: confident correct logits approach zero") {
  const Matrix logits = Matrix::from_rows({{60, 0}, {0, 60}});
  const std::vector<int> labels = {0, 1};
  CHECK(cross_entropy(logits, labels) < 1e-20);
}

TEST_CASE("cross entropy matches the per-point formula and its gradient") {
  std::mt19937_64 rng(1);
  const Matrix logits = random_matrix(6, 3, rng, -3, 3);
  const std::vector<int> labels = {0, 2, 1, 1, 0, 2};
  double expected = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < 3; ++j) z += std::exp(logits(i, j));
    expected += -std::log(std::exp(logits(i, static_cast<std::size_t>(labels[i]))) / z) / 6.0;
  }
  const LossWithGrad l = cross_entropy_with_grad(logits, labels);
  CHECK(l.value == doctest::Approx(expected).epsilon(1e-13));
  CHECK(l.value >= 0.0);
  const Matrix numeric = numeric_gradient([&](const Matrix& m) { return cross_entropy(m, labels); }, logits);
  CHECK(max_rel_error(l.grad, numeric, 1e-8) < 1e-6);
}

TEST_CASE("cross entropy rejects out-of-range labels") {
  const std::vector<int> bad = {0, 3};
  const std::vector<int> neg = {-1, 0};
  CHECK(kind_of([&] { cross_entropy(Matrix(2, 3), bad); }) == ErrorKind::kLabel);
  CHECK(kind_of([&] { cross_entropy(Matrix(2, 3), neg); }) == ErrorKind::kLabel);
}

TEST_CASE("discriminative: one collapsed instance at the origin costs nothing") {
  const Matrix e(5, 3, 0.0);
  const std::vector<int> labels(5, 4);
  const DiscriminativeTerms t = discriminative_terms(e, labels, {});
  CHECK(t.total == 0.0);
}

TEST_CASE("discriminative: separated tight clusters leave only the regularizer") {
  DiscriminativeParams p;
  // Means at (+-2, 0): L1 separation 4 > 2 delta_d = 3; spread 0.1 < delta_v.
  const Matrix e = Matrix::from_rows({{2.1, 0}, {1.9, 0}, {-2.1, 0}, {-1.9, 0}});
  const std::vector<int> labels = {0, 0, 1, 1};
  const DiscriminativeTerms t = discriminative_terms(e, labels, p);
  CHECK(t.var == 0.0);
  CHECK(t.dist == 0.0);
  CHECK(std::abs(t.total - p.gamma * 2.0) < 1e-12);
}

TEST_CASE("discriminative matches the direct three-term evaluation") {
  std::mt19937_64 rng(2);
  const DiscriminativeParams p;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix e = random_matrix(10, 5, rng, -2, 2);
    std::vector<int> labels(10);
    for (std::size_t j = 0; j < 10; ++j) labels[j] = static_cast<int>(j % 3) * 7;
    const DiscriminativeTerms got = discriminative_terms(e, labels, p);
    const DiscriminativeTerms want = discriminative_oracle(e, labels, p);
    CHECK(got.var == doctest::Approx(want.var).epsilon(1e-12));
    CHECK(got.dist == doctest::Approx(want.dist).epsilon(1e-12));
    CHECK(got.reg == doctest::Approx(want.reg).epsilon(1e-12));
    CHECK(got.total == doctest::Approx(want.total).epsilon(1e-12));
    CHECK(got.total >= 0.0);
  }
}

TEST_CASE("discriminative: a single instance has no distance term; none is an error") {
  std::mt19937_64 rng(3);
  const Matrix e = random_matrix(4, 2, rng);
  const std::vector<int> one(4, 0);
  CHECK(discriminative_terms(e, one, {}).dist == 0.0);
  const std::vector<int> none(4, -1);
  CHECK(kind_of([&] { discriminative_terms(e, none, {}); }) == ErrorKind::kInput);
}

TEST_CASE("discriminative is invariant to point order and id relabeling") {
  std::mt19937_64 rng(4);
  const Matrix e = random_matrix(9, 4, rng, -1.5, 1.5);
  const std::vector<int> labels = {0, 1, 2, 0, 1, 2, 0, 1, 2};
  const double base = discriminative_terms(e, labels, {}).total;
  const auto perm = random_permutation(9, rng);
  std::vector<int> permuted(9);
  for (std::size_t r = 0; r < 9; ++r) permuted[r] = labels[perm[r]];
  CHECK(discriminative_terms(permute_rows(e, perm), permuted, {}).total == doctest::Approx(base).epsilon(1e-13));
  std::vector<int> renamed(labels);
  for (int& l : renamed) l = 40 - 10 * l;
  CHECK(discriminative_terms(e, renamed, {}).total == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("translating every embedding changes only the regularizer") {
  std::mt19937_64 rng(5);
  const Matrix e = random_matrix(8, 3, rng);
  const std::vector<int> labels = {0, 0, 1, 1, 2, 2, 0, 1};
  const DiscriminativeTerms a = discriminative_terms(e, labels, {});
  Matrix moved = e;
  for (std::size_t i = 0; i < 8; ++i) moved(i, 1) += 3.0;
  const DiscriminativeTerms b = discriminative_terms(moved, labels, {});
  CHECK(b.var == doctest::Approx(a.var).epsilon(1e-12));
  CHECK(b.dist == doctest::Approx(a.dist).epsilon(1e-12));
  CHECK(b.reg != doctest::Approx(a.reg));
}

TEST_CASE("discriminative gradients match finite differences") {
  std::mt19937_64 rng(6);
  for (DistanceNorm norm : {DistanceNorm::kL1, DistanceNorm::kL2}) {
    DiscriminativeParams p;
    p.norm = norm;
    p.gamma = 0.1;
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix e = random_matrix(8, 3, rng, -1.2, 1.2);
      const std::vector<int> labels = {0, 1, 2, 0, 1, 2, 0, 1};
      const LossWithGrad l = discriminative_with_grad(e, labels, p);
      const Matrix numeric = numeric_gradient([&](const Matrix& m) { return discriminative_terms(m, labels, p).total; }, e);
      CHECK(max_rel_error(l.grad, numeric, 1e-7) < 1e-4);
    }
  }
}

TEST_CASE("total loss is the sum of both terms and both gradients flow") {
  std::mt19937_64 rng(7);
  const Matrix logits = random_matrix(6, 3, rng);
  const Matrix emb = random_matrix(6, 2, rng);
  const std::vector<int> sem = {0, 1, 2, 0, 1, 2};
  const std::vector<int> inst = {0, 0, 1, 1, 2, 2};
  Tape tape;
  const Var lv = tape.variable(logits);
  const Var ev = tape.variable(emb);
  const Var total = total_loss(tape, cross_entropy(tape, lv, sem), discriminative(tape, ev, inst, {}));
  CHECK(total.value()(0, 0) ==
        doctest::Approx(cross_entropy(logits, sem) + discriminative_terms(emb, inst, {}).total).epsilon(1e-15));
  tape.backward(total);
  CHECK(lv.grad() == cross_entropy_with_grad(logits, sem).grad);
  CHECK(ev.grad() == discriminative_with_grad(emb, inst, {}).grad);

  Tape t2;
  const Var zero = t2.constant(Matrix(1, 1, 0.0));
  const Var ce = cross_entropy(t2, t2.constant(logits), sem);
  CHECK(total_loss(t2, ce, zero).value()(0, 0) == ce.value()(0, 0));
}

TEST_CASE("discriminative params warn when the push margin is too small") {
  DiscriminativeParams p;
  CHECK(p.warnings().empty());
  p.delta_d = 0.9;
  CHECK(p.warnings().size() == 1);
  p.alpha = -1.0;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::kConfig);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  Parameter p{"p", Matrix::from_rows({{1.5, -2.0}}), Matrix(1, 2)};
  std::vector<Parameter*> params = {&p};
  AdamState state({}, params);
  for (int k = 0; k < 3; ++k) adam_step(state, params);
  CHECK(p.value == Matrix::from_rows({{1.5, -2.0}}));
  CHECK(state.step == 3);
}

TEST_CASE("adam minimizes a scalar quadratic") {
  Parameter p{"x", Matrix(1, 1, 0.0), Matrix(1, 1)};
  std::vector<Parameter*> params = {&p};
  AdamConfig cfg;
  cfg.learning_rate = 0.05;
  AdamState state(cfg, params);
  int steps = 0;
  for (; steps < 2000; ++steps) {
    p.grad(0, 0) = 2.0 * (p.value(0, 0) - 3.0);
    adam_step(state, params);
  }
  CHECK(std::abs(p.value(0, 0) - 3.0) < 1e-3);
}

TEST_CASE("learning rate halves every 300k iterations") {
  const AdamConfig cfg;
  CHECK(scheduled_learning_rate(cfg, 0) == 0.001);
  CHECK(scheduled_learning_rate(cfg, 299999) == 0.001);
  CHECK(scheduled_learning_rate(cfg, 300000) == 0.0005);
  CHECK(scheduled_learning_rate(cfg, 600000) == 0.00025);
}

TEST_CASE("adam refuses non-finite gradients") {
  Parameter p{"w", Matrix(1, 1, 1.0), Matrix(1, 1, std::nan(""))};
  std::vector<Parameter*> params = {&p};
  AdamState state({}, params);
  CHECK(kind_of([&] { adam_step(state, params); }) == ErrorKind::kNumeric);
  CHECK(p.value(0, 0) == 1.0);
  CHECK(state.step == 0);
}
