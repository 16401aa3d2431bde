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

#include "ban/gradcheck.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <random>

#include "ban/attention.hpp"
#include "ban/kronecker.hpp"
#include "ban/linear.hpp"
#include "ban/training.hpp"

namespace ban {

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = uniform(rng, -1.0, 1.0);
  return m;
}

void corrupt_first(Matrix& m, double delta) {
  if (delta != 0.0 && m.size() > 0) m.data()[0] += delta;
}

std::string dims(std::size_t n, std::size_t nx, std::size_t ny) {
  return "N=" + std::to_string(n) + " NX=" + std::to_string(nx) + " NY=" + std::to_string(ny);
}

// <G, X X^T Y>, the scalar whose gradient the closed forms give for upstream G.
double contracted(const Matrix& x, const Matrix& y, const Matrix& g) {
  const Matrix z = simplified_forward(x, y);
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) s += z.data()[k] * g.data()[k];
  return s;
}

Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& at, double h) {
  Matrix grad(at.rows(), at.cols());
  Matrix probe = at;
  for (std::size_t k = 0; k < at.size(); ++k) {
    const double orig = probe.data()[k];
    probe.data()[k] = orig + h;
    const double up = f(probe);
    probe.data()[k] = orig - h;
    const double down = f(probe);
    probe.data()[k] = orig;
    grad.data()[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace

BackboneConfig gradcheck_backbone() {
  BackboneConfig c;
  c.encoder_widths = {8, 8, 16};
  c.semantic_width = 12;
  c.instance_width = 12;
  c.embedding_width = 5;
  c.num_classes = 3;
  c.key_width = 6;
  c.head_hidden = 8;
  return c;
}

std::vector<GradcheckEntry> check_model_gradients(SegModel& model, std::size_t points, std::uint64_t seed,
                                                  const DiscriminativeParams& loss, std::span<const double> steps, double floor,
                                                  double tolerance, double corrupt) {
  std::mt19937_64 rng(seed);
  const Matrix features = random_matrix(points, model.config().input_dim, rng);
  std::vector<int> semantic(points), instance(points);
  for (std::size_t i = 0; i < points; ++i) {
    semantic[i] = static_cast<int>(uniform_index(rng, model.config().num_classes));
    instance[i] = static_cast<int>(i % 3);
  }
  const auto evaluate = [&] {
    Tape tape;
    return segmentation_loss(tape, model, features, semantic, instance, loss).value()(0, 0);
  };

  Tape tape;
  tape.backward(segmentation_loss(tape, model, features, semantic, instance, loss));
  std::vector<GradcheckEntry> out;
  for (Parameter* p : model.parameters()) {
    Matrix analytic = tape.gradient_of(*p);
    corrupt_first(analytic, corrupt);
    // ReLU kinks spoil large steps and roundoff spoils small ones; keep the best step.
    double error = std::numeric_limits<double>::infinity();
    for (const double step : steps) {
      Matrix numeric(p->value.rows(), p->value.cols());
      for (std::size_t k = 0; k < p->value.size(); ++k) {
        const double orig = p->value.data()[k];
        p->value.data()[k] = orig + step;
        const double up = evaluate();
        p->value.data()[k] = orig - step;
        const double down = evaluate();
        p->value.data()[k] = orig;
        numeric.data()[k] = (up - down) / (2.0 * step);
      }
      error = std::min(error, norm_rel_error(analytic, numeric, floor));
    }
    out.push_back({"model:" + p->name, std::to_string(points) + " points, " + p->value.shape_string(), seed,
                   error, tolerance});
  }
  return out;
}

std::vector<GradcheckEntry> run_gradcheck(const GradcheckOptions& o) {
  std::vector<GradcheckEntry> out;
  std::mt19937_64 rng(o.seed);

  for (std::size_t n : o.kronecker_sizes) {
    GradcheckEntry ex{"closed-form vs kronecker dX", "N=" + std::to_string(n) + ", NX,NY in sizes", o.seed, 0.0,
                      o.kronecker_tolerance};
    GradcheckEntry ey{"closed-form vs kronecker dY", ex.size, o.seed, 0.0, o.kronecker_tolerance};
    for (std::size_t nx : o.kronecker_sizes)
      for (std::size_t ny : o.kronecker_sizes) {
        const Matrix x = random_matrix(n, nx, rng);
        const Matrix y = random_matrix(n, ny, rng);
        const Matrix g = random_matrix(n, ny, rng);
        Matrix gx = simplified_grad_x(x, y, g);
        Matrix gy = simplified_grad_y(x, y, g);
        corrupt_first(gx, o.corrupt);
        corrupt_first(gy, o.corrupt);
        ex.error = std::max(ex.error, norm_rel_error(gx, kron::grad_x(x, y, g)));
        ey.error = std::max(ey.error, norm_rel_error(gy, kron::grad_y(x, y, g)));
      }
    out.push_back(ex);
    out.push_back(ey);
  }

  for (std::size_t c = 0; c < o.random_cases; ++c) {
    const std::uint64_t case_seed = o.seed * 7919 + c;
    std::mt19937_64 r(case_seed);
    const std::size_t n = 1 + uniform_index(r, 6);
    const std::size_t nx = 1 + uniform_index(r, 4);
    const std::size_t ny = 1 + uniform_index(r, 4);
    const Matrix x = random_matrix(n, nx, r);
    const Matrix y = random_matrix(n, ny, r);
    const Matrix g = random_matrix(n, ny, r);
    Matrix gx = simplified_grad_x(x, y, g);
    Matrix gy = simplified_grad_y(x, y, g);
    corrupt_first(gx, o.corrupt);
    corrupt_first(gy, o.corrupt);
    const Matrix nx_grad = central_difference([&](const Matrix& m) { return contracted(m, y, g); }, x, o.step);
    const Matrix ny_grad = central_difference([&](const Matrix& m) { return contracted(x, m, g); }, y, o.step);
    const double err = std::max(norm_rel_error(gx, nx_grad), norm_rel_error(gy, ny_grad));
    out.push_back({"closed-form vs finite differences", dims(n, nx, ny), case_seed, err,
                   o.finite_difference_tolerance});
  }

  for (std::size_t s = 0; s < o.model_seeds; ++s) {
    const std::uint64_t model_seed = o.seed + s;
    SegModel model(o.model, o.attention, model_seed);
    auto entries = check_model_gradients(model, o.model_points, model_seed, o.loss, o.model_steps, o.model_floor,
                                         o.model_tolerance, o.corrupt);
    out.insert(out.end(), entries.begin(), entries.end());
  }
  return out;
}

std::string gradcheck_table(const std::vector<GradcheckEntry>& entries) {
  std::string out = "result\terror\ttolerance\tseed\tcheck\tsize\n";
  char buf[64];
  for (const GradcheckEntry& e : entries) {
    std::snprintf(buf, sizeof(buf), "%s\t%.3e\t%.0e\t", e.pass() ? "pass" : "FAIL", e.error, e.tolerance);
    out += buf + std::to_string(e.seed) + "\t" + e.check + "\t" + e.size + "\n";
  }
  return out;
}

}  // namespace ban
