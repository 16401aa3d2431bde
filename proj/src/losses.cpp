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

#include "ban/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ban {

namespace {

double norm_of(std::span<const double> v, DistanceNorm norm) {
  double s = 0.0;
  if (norm == DistanceNorm::kL1) {
    for (double x : v) s += std::abs(x);
    return s;
  }
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// d|v| / dv, with 0 where the norm is not differentiable.
void norm_grad(std::span<const double> v, double length, DistanceNorm norm, std::span<double> out) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (norm == DistanceNorm::kL1) {
      out[k] = v[k] > 0.0 ? 1.0 : (v[k] < 0.0 ? -1.0 : 0.0);
    } else {
      out[k] = length > 0.0 ? v[k] / length : 0.0;
    }
  }
}

struct Grouping {
  std::vector<std::vector<std::size_t>> members;  // point indices per instance, ascending id
  Matrix means;                                   // C x N_E
};

Grouping group_instances(const Matrix& embedding, std::span<const int> labels) {
  if (labels.size() != embedding.rows()) {
    fail(ErrorKind::kDimension, "discriminative: " + std::to_string(labels.size()) + " labels for " +
                                    std::to_string(embedding.rows()) + " points");
  }
  std::map<int, std::vector<std::size_t>> by_id;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] >= 0) by_id[labels[j]].push_back(j);
  }
  if (by_id.empty()) fail(ErrorKind::kInput, "discriminative: no instance present");
  Grouping g;
  g.means = Matrix(by_id.size(), embedding.cols());
  std::size_t c = 0;
  for (auto& [id, pts] : by_id) {
    auto mu = g.means.row(c);
    for (std::size_t j : pts) {
      const auto x = embedding.row(j);
      for (std::size_t k = 0; k < mu.size(); ++k) mu[k] += x[k];
    }
    for (double& v : mu) v /= static_cast<double>(pts.size());
    g.members.push_back(std::move(pts));
    ++c;
  }
  return g;
}

}  // namespace

void DiscriminativeParams::validate() const {
  if (delta_v < 0.0 || delta_d < 0.0) fail(ErrorKind::kConfig, "discriminative margins must be >= 0");
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) fail(ErrorKind::kConfig, "discriminative weights must be >= 0");
}

std::vector<std::string> DiscriminativeParams::warnings() const {
  std::vector<std::string> out;
  if (!(delta_d > 2.0 * delta_v)) {
    out.push_back("delta_d <= 2*delta_v: pulled clusters may still overlap after the push term is satisfied");
  }
  return out;
}

LossWithGrad cross_entropy_with_grad(const Matrix& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows()) {
    fail(ErrorKind::kDimension, "cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                                    std::to_string(logits.rows()) + " points");
  }
  if (logits.rows() == 0) fail(ErrorKind::kInput, "cross_entropy: no points");
  const Matrix p = row_softmax(logits);
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  LossWithGrad out{0.0, scale(p, inv_n)};
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= logits.cols()) {
      fail(ErrorKind::kLabel, "semantic label " + std::to_string(label) + " at point " + std::to_string(i) +
                                  " outside [0, " + std::to_string(logits.cols()) + ")");
    }
    // log-sum-exp directly on logits keeps tiny probabilities exact.
    const auto row = logits.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    out.value += (mx + std::log(z) - row[static_cast<std::size_t>(label)]) * inv_n;
    out.grad(i, static_cast<std::size_t>(label)) -= inv_n;
  }
  return out;
}

double cross_entropy(const Matrix& logits, std::span<const int> labels) {
  return cross_entropy_with_grad(logits, labels).value;
}

Var cross_entropy(Tape& tape, Var logits, std::span<const int> labels) {
  LossWithGrad l = cross_entropy_with_grad(logits.value(), labels);
  return tape.scalar_loss(logits, l.value, std::move(l.grad));
}

DiscriminativeTerms discriminative_terms(const Matrix& embedding, std::span<const int> instance_labels,
                                         const DiscriminativeParams& params) {
  DiscriminativeTerms t;
  discriminative_with_grad(embedding, instance_labels, params, &t);
  return t;
}

LossWithGrad discriminative_with_grad(const Matrix& embedding, std::span<const int> instance_labels,
                                      const DiscriminativeParams& params, DiscriminativeTerms* terms) {
  params.validate();
  const Grouping g = group_instances(embedding, instance_labels);
  const std::size_t num = g.members.size();
  const std::size_t dim = embedding.cols();
  const double inv_c = 1.0 / static_cast<double>(num);

  LossWithGrad out{0.0, Matrix(embedding.rows(), dim)};
  Matrix grad_means(num, dim);
  std::vector<double> diff(dim), unit(dim);
  DiscriminativeTerms t;

  for (std::size_t c = 0; c < num; ++c) {
    const auto mu = g.means.row(c);
    const double inv_nc = 1.0 / static_cast<double>(g.members[c].size());
    for (std::size_t j : g.members[c]) {
      const auto x = embedding.row(j);
      for (std::size_t k = 0; k < dim; ++k) diff[k] = mu[k] - x[k];
      const double d = norm_of(diff, params.norm);
      const double hinge = std::max(0.0, d - params.delta_v);
      if (hinge == 0.0) continue;
      t.var += inv_c * inv_nc * hinge * hinge;
      norm_grad(diff, d, params.norm, unit);
      const double coef = params.alpha * inv_c * inv_nc * 2.0 * hinge;
      auto gx = out.grad.row(j);
      auto gm = grad_means.row(c);
      for (std::size_t k = 0; k < dim; ++k) {
        gx[k] -= coef * unit[k];
        gm[k] += coef * unit[k];
      }
    }
  }

  if (num > 1) {
    const double inv_pairs = 1.0 / static_cast<double>(num * (num - 1));
    for (std::size_t a = 0; a < num; ++a) {
      for (std::size_t b = 0; b < num; ++b) {
        if (a == b) continue;
        for (std::size_t k = 0; k < dim; ++k) diff[k] = g.means(a, k) - g.means(b, k);
        const double d = norm_of(diff, params.norm);
        const double hinge = std::max(0.0, 2.0 * params.delta_d - d);
        if (hinge == 0.0) continue;
        t.dist += inv_pairs * hinge * hinge;
        norm_grad(diff, d, params.norm, unit);
        const double coef = params.beta * inv_pairs * 2.0 * hinge;
        for (std::size_t k = 0; k < dim; ++k) {
          grad_means(a, k) -= coef * unit[k];
          grad_means(b, k) += coef * unit[k];
        }
      }
    }
  }

  for (std::size_t c = 0; c < num; ++c) {
    const auto mu = g.means.row(c);
    const double d = norm_of(mu, params.norm);
    t.reg += inv_c * d;
    norm_grad(mu, d, params.norm, unit);
    for (std::size_t k = 0; k < dim; ++k) grad_means(c, k) += params.gamma * inv_c * unit[k];
  }

  for (std::size_t c = 0; c < num; ++c) {
    const double inv_nc = 1.0 / static_cast<double>(g.members[c].size());
    for (std::size_t j : g.members[c]) {
      auto gx = out.grad.row(j);
      for (std::size_t k = 0; k < dim; ++k) gx[k] += inv_nc * grad_means(c, k);
    }
  }

  t.total = params.alpha * t.var + params.beta * t.dist + params.gamma * t.reg;
  out.value = t.total;
  if (terms != nullptr) *terms = t;
  return out;
}

Var discriminative(Tape& tape, Var embedding, std::span<const int> instance_labels,
                   const DiscriminativeParams& params, DiscriminativeTerms* terms) {
  LossWithGrad l = discriminative_with_grad(embedding.value(), instance_labels, params, terms);
  return tape.scalar_loss(embedding, l.value, std::move(l.grad));
}

Var total_loss(Tape& tape, Var semantic_loss, Var instance_loss) { return tape.add(semantic_loss, instance_loss); }

}  // namespace ban
