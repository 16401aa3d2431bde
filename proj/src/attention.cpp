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

#include "ban/attention.hpp"

#include <algorithm>
#include <numeric>

namespace ban {

namespace {

bool row_less(const Matrix& x, const Matrix& y, std::size_t a, std::size_t b) {
  const auto xa = x.row(a);
  const auto xb = x.row(b);
  for (std::size_t k = 0; k < xa.size(); ++k) {
    if (xa[k] != xb[k]) return xa[k] < xb[k];
  }
  const auto ya = y.row(a);
  const auto yb = y.row(b);
  for (std::size_t k = 0; k < ya.size(); ++k) {
    if (ya[k] != yb[k]) return ya[k] < yb[k];
  }
  return false;
}

bool is_both(BiDirMode m) { return m == BiDirMode::kBothStoiFirst || m == BiDirMode::kBothItosFirst; }

}  // namespace

AttentionWeights AttentionWeights::create(const std::string& name, std::size_t x_dim, std::size_t y_dim,
                                          std::size_t key_dim, std::mt19937_64& rng) {
  AttentionWeights w;
  w.theta = LinearMap(name + ".theta", x_dim, key_dim, rng);
  w.phi = LinearMap(name + ".phi", x_dim, key_dim, rng);
  w.g = LinearMap(name + ".g", y_dim, y_dim, rng);
  return w;
}

void AttentionWeights::validate(std::size_t x_dim, std::size_t y_dim) const {
  if (theta.in_dim() != x_dim || phi.in_dim() != x_dim) {
    fail(ErrorKind::kDimension, "attention X width " + std::to_string(x_dim) + " does not match theta/phi input " +
                                    std::to_string(theta.in_dim()));
  }
  if (theta.out_dim() != phi.out_dim()) fail(ErrorKind::kDimension, "theta and phi key widths differ");
  if (g.in_dim() != y_dim || g.out_dim() != y_dim) {
    fail(ErrorKind::kDimension, "attention Y width " + std::to_string(y_dim) + " does not match g " +
                                    std::to_string(g.in_dim()) + "->" + std::to_string(g.out_dim()));
  }
}

void AttentionWeights::collect(std::vector<Parameter*>& out) {
  theta.collect(out);
  phi.collect(out);
  g.collect(out);
}

void AttentionWeights::collect(std::vector<const Parameter*>& out) const {
  theta.collect(out);
  phi.collect(out);
  g.collect(out);
}

std::string_view to_string(BiDirMode mode) {
  switch (mode) {
    case BiDirMode::kBothStoiFirst: return "both-stoi-first";
    case BiDirMode::kBothItosFirst: return "both-itos-first";
    case BiDirMode::kStoiOnly: return "stoi-only";
    case BiDirMode::kItosOnly: return "itos-only";
    case BiDirMode::kSelfAttention: return "self-attention";
    case BiDirMode::kNone: return "none";
  }
  return "unknown";
}

BiDirMode parse_bidir_mode(std::string_view name) {
  for (BiDirMode m : all_bidir_modes()) {
    if (to_string(m) == name) return m;
  }
  fail(ErrorKind::kConfig, "unknown attention mode '" + std::string(name) + "'");
}

const std::vector<BiDirMode>& all_bidir_modes() {
  static const std::vector<BiDirMode> modes = {BiDirMode::kNone,          BiDirMode::kStoiOnly,
                                               BiDirMode::kItosOnly,      BiDirMode::kBothStoiFirst,
                                               BiDirMode::kBothItosFirst, BiDirMode::kSelfAttention};
  return modes;
}

BiDirWeights BiDirWeights::create(const BiDirConfig& cfg, std::size_t n_s, std::size_t n_i, std::size_t key_dim,
                                  std::mt19937_64& rng) {
  BiDirWeights w;
  const bool chain = cfg.chain_features && is_both(cfg.mode);
  switch (cfg.mode) {
    case BiDirMode::kNone:
      break;
    case BiDirMode::kStoiOnly:
      w.to_instance = AttentionWeights::create("stoi", n_s, n_i, key_dim, rng);
      break;
    case BiDirMode::kItosOnly:
      w.to_semantic = AttentionWeights::create("itos", n_i, n_s, key_dim, rng);
      break;
    case BiDirMode::kBothStoiFirst:
      w.to_instance = AttentionWeights::create("stoi", n_s, n_i, key_dim, rng);
      w.to_semantic = AttentionWeights::create("itos", chain ? 2 * n_i : n_i, n_s, key_dim, rng);
      break;
    case BiDirMode::kBothItosFirst:
      w.to_semantic = AttentionWeights::create("itos", n_i, n_s, key_dim, rng);
      w.to_instance = AttentionWeights::create("stoi", chain ? 2 * n_s : n_s, n_i, key_dim, rng);
      break;
    case BiDirMode::kSelfAttention:
      w.to_instance = AttentionWeights::create("self_inst", n_i, n_i, key_dim, rng);
      w.to_semantic = AttentionWeights::create("self_sem", n_s, n_s, key_dim, rng);
      break;
  }
  return w;
}

std::pair<std::size_t, std::size_t> bidir_output_widths(const BiDirConfig& cfg, std::size_t n_s, std::size_t n_i) {
  switch (cfg.mode) {
    case BiDirMode::kNone: return {n_s, n_i};
    case BiDirMode::kStoiOnly: return {n_s, 2 * n_i};
    case BiDirMode::kItosOnly: return {2 * n_s, n_i};
    default: return {2 * n_s, 2 * n_i};
  }
}

std::vector<std::size_t> reduction_order(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) fail(ErrorKind::kDimension, "reduction_order: row counts differ");
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row_less(x, y, a, b); });
  return order;
}

Var attend(Tape& tape, Var x, Var y, const AttentionWeights& w, SimilarityMatrix* p_out) {
  if (x.rows() != y.rows()) {
    fail(ErrorKind::kDimension, "attend: X has " + std::to_string(x.rows()) + " rows, Y has " +
                                    std::to_string(y.rows()));
  }
  if (x.rows() == 0) fail(ErrorKind::kDimension, "attend: no points");
  w.validate(x.cols(), y.cols());

  // Columns of the logits (and rows of g(Y)) are laid out in reduction order
  // so the softmax normalizer and P g(Y) sum over points in a fixed order.
  std::vector<std::size_t> order = reduction_order(x.value(), y.value());
  const Var query = w.theta.apply(tape, x);
  const Var key = tape.permute_rows(w.phi.apply(tape, x), order);
  const Var p_ordered = tape.row_softmax(tape.matmul(query, tape.transpose(key)));
  const Var values = tape.permute_rows(w.g.apply(tape, y), order);
  const Var propagated = tape.matmul(p_ordered, values);

  if (p_out != nullptr) {
    const Matrix& pc = p_ordered.value();
    p_out->p = Matrix(pc.rows(), pc.cols());
    for (std::size_t i = 0; i < pc.rows(); ++i)
      for (std::size_t c = 0; c < pc.cols(); ++c) p_out->p(i, order[c]) = pc(i, c);
  }
  return tape.concat_cols(propagated, y);
}

SimilarityMatrix similarity(const Matrix& x, const AttentionWeights& w) {
  if (x.rows() == 0) fail(ErrorKind::kDimension, "similarity: no points");
  if (!x.all_finite()) fail(ErrorKind::kNumeric, "similarity: non-finite features");
  w.validate(x.cols(), w.g.in_dim());
  Tape tape;
  const Var xv = tape.constant(x);
  SimilarityMatrix out;
  // Y does not influence P; pass zeros of g's width so the same code path runs.
  attend(tape, xv, tape.constant(Matrix(x.rows(), w.g.in_dim())), w, &out);
  return out;
}

Matrix attend(const Matrix& x, const Matrix& y, const AttentionWeights& w) {
  Tape tape;
  return attend(tape, tape.constant(x), tape.constant(y), w).value();
}

Matrix attend_with_similarity(const Matrix& p, const Matrix& y, const LinearMap& g) {
  if (p.rows() != p.cols() || p.cols() != y.rows()) {
    fail(ErrorKind::kDimension, "attend_with_similarity: P " + p.shape_string() + " with Y " + y.shape_string());
  }
  return concat_cols(matmul(p, g.apply(y)), y);
}

BiDirOutput bi_directional(Tape& tape, Var s, Var i, const BiDirConfig& cfg, const BiDirWeights& w) {
  if (s.rows() != i.rows()) {
    fail(ErrorKind::kDimension, "bi_directional: S has " + std::to_string(s.rows()) + " rows, I has " +
                                    std::to_string(i.rows()));
  }
  auto need = [](const std::optional<AttentionWeights>& aw, const char* which) -> const AttentionWeights& {
    if (!aw) fail(ErrorKind::kConfig, std::string("bi_directional: missing ") + which + " weights for this mode");
    return *aw;
  };

  BiDirOutput out{s, i, std::nullopt, std::nullopt};
  SimilarityMatrix p_sem;
  SimilarityMatrix p_inst;
  switch (cfg.mode) {
    case BiDirMode::kNone:
      break;
    case BiDirMode::kStoiOnly:
      out.instance = attend(tape, s, i, need(w.to_instance, "STOI"), &p_sem);
      out.p_sem = std::move(p_sem);
      break;
    case BiDirMode::kItosOnly:
      out.semantic = attend(tape, i, s, need(w.to_semantic, "ITOS"), &p_inst);
      out.p_inst = std::move(p_inst);
      break;
    case BiDirMode::kBothStoiFirst: {
      out.instance = attend(tape, s, i, need(w.to_instance, "STOI"), &p_sem);
      const Var x = cfg.chain_features ? out.instance : i;
      out.semantic = attend(tape, x, s, need(w.to_semantic, "ITOS"), &p_inst);
      out.p_sem = std::move(p_sem);
      out.p_inst = std::move(p_inst);
      break;
    }
    case BiDirMode::kBothItosFirst: {
      out.semantic = attend(tape, i, s, need(w.to_semantic, "ITOS"), &p_inst);
      const Var x = cfg.chain_features ? out.semantic : s;
      out.instance = attend(tape, x, i, need(w.to_instance, "STOI"), &p_sem);
      out.p_sem = std::move(p_sem);
      out.p_inst = std::move(p_inst);
      break;
    }
    case BiDirMode::kSelfAttention:
      out.instance = attend(tape, i, i, need(w.to_instance, "instance self-attention"), &p_inst);
      out.semantic = attend(tape, s, s, need(w.to_semantic, "semantic self-attention"), &p_sem);
      out.p_sem = std::move(p_sem);
      out.p_inst = std::move(p_inst);
      break;
  }
  return out;
}

std::pair<Matrix, Matrix> bi_directional(const Matrix& s, const Matrix& i, const BiDirConfig& cfg,
                                         const BiDirWeights& w) {
  Tape tape;
  const BiDirOutput out = bi_directional(tape, tape.constant(s), tape.constant(i), cfg, w);
  return {out.semantic.value(), out.instance.value()};
}

Matrix simplified_forward(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) {
    fail(ErrorKind::kDimension, "simplified_forward: X " + x.shape_string() + " with Y " + y.shape_string());
  }
  return matmul(x, matmul_transa(x, y));
}

Matrix simplified_grad_x(const Matrix& x, const Matrix& y, const Matrix& upstream) {
  if (x.rows() != y.rows() || upstream.rows() != y.rows() || upstream.cols() != y.cols()) {
    fail(ErrorKind::kDimension, "simplified_grad_x: X " + x.shape_string() + ", Y " + y.shape_string() +
                                    ", dL/dZ " + upstream.shape_string());
  }
  // d(X X^T Y) = dX (X^T Y) + X dX^T Y; the first term pulls back to G (X^T Y)^T
  // and the second to Y G^T X.
  Matrix left = matmul(upstream, transpose(matmul_transa(x, y)));
  Matrix right = matmul(y, matmul_transa(upstream, x));
  return add(left, right);
}

Matrix simplified_grad_y(const Matrix& x, const Matrix& y, const Matrix& upstream) {
  if (x.rows() != y.rows() || upstream.rows() != y.rows() || upstream.cols() != y.cols()) {
    fail(ErrorKind::kDimension, "simplified_grad_y: X " + x.shape_string() + ", Y " + y.shape_string() +
                                    ", dL/dZ " + upstream.shape_string());
  }
  return matmul(x, matmul_transa(x, upstream));
}

double default_similarity_threshold(std::size_t n) { return n == 0 ? 0.0 : 1.0 / static_cast<double>(n); }

std::vector<std::uint8_t> similarity_row(const SimilarityMatrix& p, std::size_t point_index, double threshold) {
  if (point_index >= p.p.rows()) {
    fail(ErrorKind::kBounds, "point index " + std::to_string(point_index) + " outside [0, " +
                                 std::to_string(p.p.rows()) + ")");
  }
  std::vector<std::uint8_t> mask(p.p.cols(), 0);
  const auto row = p.p.row(point_index);
  for (std::size_t j = 0; j < row.size(); ++j) mask[j] = row[j] >= threshold ? 1 : 0;
  return mask;
}

}  // namespace ban
