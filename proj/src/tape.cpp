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

#include "ban/tape.hpp"

#include <algorithm>
#include <cmath>

namespace ban {

const Matrix& Var::value() const {
  if (tape_ == nullptr) fail(ErrorKind::kContract, "value of an unbound Var");
  return tape_->value(*this);
}

const Matrix& Var::grad() const {
  if (tape_ == nullptr) fail(ErrorKind::kContract, "grad of an unbound Var");
  return tape_->grad(*this);
}

Var Tape::push(Node node) {
  if (!node.value.all_finite()) {
    fail(ErrorKind::kNumeric, "non-finite value produced by tape op " +
                                  std::to_string(static_cast<int>(node.op)));
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owner(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) fail(ErrorKind::kContract, "Var belongs to another tape");
}

const Tape::Node& Tape::node(Var v) const {
  check_owner(v);
  return nodes_[v.id_];
}

const Matrix& Tape::grad(Var v) const {
  return node(v).grad;
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

Var Tape::parameter(const Parameter& p) {
  Node n;
  n.value = p.value;
  n.needs_grad = true;
  n.param = &p;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  Node n;
  n.op = Op::kMatMul;
  n.a = static_cast<std::int64_t>(a.id_);
  n.b = static_cast<std::int64_t>(b.id_);
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  n.value = ban::matmul(node(a).value, node(b).value);
  return push(std::move(n));
}

Var Tape::transpose(Var a) {
  Node n;
  n.op = Op::kTranspose;
  n.a = static_cast<std::int64_t>(a.id_);
  n.needs_grad = node(a).needs_grad;
  n.value = ban::transpose(node(a).value);
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  Node n;
  n.op = Op::kAdd;
  n.a = static_cast<std::int64_t>(a.id_);
  n.b = static_cast<std::int64_t>(b.id_);
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  n.value = ban::add(node(a).value, node(b).value);
  return push(std::move(n));
}

Var Tape::add_row_bias(Var a, Var bias) {
  Node n;
  n.op = Op::kAddRowBias;
  n.a = static_cast<std::int64_t>(a.id_);
  n.b = static_cast<std::int64_t>(bias.id_);
  n.needs_grad = node(a).needs_grad || node(bias).needs_grad;
  n.value = ban::add_row_bias(node(a).value, node(bias).value);
  return push(std::move(n));
}

Var Tape::relu(Var a) {
  Node n;
  n.op = Op::kRelu;
  n.a = static_cast<std::int64_t>(a.id_);
  n.needs_grad = node(a).needs_grad;
  n.value = ban::relu(node(a).value);
  return push(std::move(n));
}

Var Tape::row_softmax(Var a) {
  Node n;
  n.op = Op::kRowSoftmax;
  n.a = static_cast<std::int64_t>(a.id_);
  n.needs_grad = node(a).needs_grad;
  n.value = ban::row_softmax(node(a).value);
  return push(std::move(n));
}

Var Tape::concat_cols(Var a, Var b) {
  Node n;
  n.op = Op::kConcatCols;
  n.a = static_cast<std::int64_t>(a.id_);
  n.b = static_cast<std::int64_t>(b.id_);
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  n.value = ban::concat_cols(node(a).value, node(b).value);
  return push(std::move(n));
}

Var Tape::column_max(Var a) {
  const Matrix& in = node(a).value;
  if (in.rows() == 0) fail(ErrorKind::kDimension, "column_max of an empty matrix");
  Node n;
  n.op = Op::kColumnMax;
  n.a = static_cast<std::int64_t>(a.id_);
  n.needs_grad = node(a).needs_grad;
  n.value = Matrix(1, in.cols());
  n.index.assign(in.cols(), 0);
  for (std::size_t j = 0; j < in.cols(); ++j) {
    double best = in(0, j);
    for (std::size_t i = 1; i < in.rows(); ++i) {
      if (in(i, j) > best) {
        best = in(i, j);
        n.index[j] = i;
      }
    }
    n.value(0, j) = best;
  }
  return push(std::move(n));
}

Var Tape::broadcast_rows(Var a, std::size_t rows) {
  const Matrix& in = node(a).value;
  if (in.rows() != 1) fail(ErrorKind::kDimension, "broadcast_rows expects a row vector, got " + in.shape_string());
  Node n;
  n.op = Op::kBroadcastRows;
  n.a = static_cast<std::int64_t>(a.id_);
  n.needs_grad = node(a).needs_grad;
  n.value = Matrix(rows, in.cols());
  for (std::size_t i = 0; i < rows; ++i) std::copy(in.row(0).begin(), in.row(0).end(), n.value.row(i).begin());
  return push(std::move(n));
}

Var Tape::permute_rows(Var a, std::vector<std::size_t> perm) {
  Node n;
  n.op = Op::kPermuteRows;
  n.a = static_cast<std::int64_t>(a.id_);
  n.needs_grad = node(a).needs_grad;
  n.value = ban::permute_rows(node(a).value, perm);
  n.index = std::move(perm);
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  Node n;
  n.op = Op::kSum;
  n.a = static_cast<std::int64_t>(a.id_);
  n.needs_grad = node(a).needs_grad;
  n.value = Matrix(1, 1, ban::sum(node(a).value));
  return push(std::move(n));
}

Var Tape::scale(Var a, double s) {
  Node n;
  n.op = Op::kScale;
  n.a = static_cast<std::int64_t>(a.id_);
  n.needs_grad = node(a).needs_grad;
  n.scalar = s;
  n.value = ban::scale(node(a).value, s);
  return push(std::move(n));
}

Var Tape::hadamard(Var a, Var b) {
  Node n;
  n.op = Op::kHadamard;
  n.a = static_cast<std::int64_t>(a.id_);
  n.b = static_cast<std::int64_t>(b.id_);
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  n.value = ban::hadamard(node(a).value, node(b).value);
  return push(std::move(n));
}

Var Tape::scalar_loss(Var input, double value, Matrix input_grad) {
  const Matrix& in = node(input).value;
  if (input_grad.rows() != in.rows() || input_grad.cols() != in.cols()) {
    fail(ErrorKind::kDimension, "scalar_loss gradient shape " + input_grad.shape_string() +
                                    " does not match input " + in.shape_string());
  }
  Node n;
  n.op = Op::kScalarLoss;
  n.a = static_cast<std::int64_t>(input.id_);
  n.needs_grad = node(input).needs_grad;
  n.value = Matrix(1, 1, value);
  n.aux = std::move(input_grad);
  return push(std::move(n));
}

Matrix& Tape::grad_slot(std::int64_t id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  check_owner(loss);
  const Matrix& out = nodes_[loss.id_].value;
  if (out.rows() != 1 || out.cols() != 1) {
    fail(ErrorKind::kContract, "backward requires a scalar loss, got " + out.shape_string());
  }
  for (Node& n : nodes_) n.grad = Matrix();
  nodes_[loss.id_].grad = Matrix(1, 1, 1.0);

  for (std::size_t k = loss.id_ + 1; k-- > 0;) {
    Node& n = nodes_[k];
    if (n.grad.empty() || !n.needs_grad) continue;
    const Matrix& g = n.grad;
    auto wants = [&](std::int64_t id) { return id >= 0 && nodes_[static_cast<std::size_t>(id)].needs_grad; };

    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatMul: {
        const Matrix& a = nodes_[static_cast<std::size_t>(n.a)].value;
        const Matrix& b = nodes_[static_cast<std::size_t>(n.b)].value;
        if (wants(n.a)) add_in_place(grad_slot(n.a), ban::matmul(g, ban::transpose(b)));
        if (wants(n.b)) add_in_place(grad_slot(n.b), matmul_transa(a, g));
        break;
      }
      case Op::kTranspose:
        if (wants(n.a)) add_in_place(grad_slot(n.a), ban::transpose(g));
        break;
      case Op::kAdd:
        if (wants(n.a)) add_in_place(grad_slot(n.a), g);
        if (wants(n.b)) add_in_place(grad_slot(n.b), g);
        break;
      case Op::kAddRowBias:
        if (wants(n.a)) add_in_place(grad_slot(n.a), g);
        if (wants(n.b)) {
          Matrix& gb = grad_slot(n.b);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
        }
        break;
      case Op::kRelu:
        if (wants(n.a)) {
          Matrix& ga = grad_slot(n.a);
          for (std::size_t i = 0; i < g.size(); ++i)
            if (n.value.data()[i] > 0.0) ga.data()[i] += g.data()[i];
        }
        break;
      case Op::kRowSoftmax:
        if (wants(n.a)) {
          Matrix& ga = grad_slot(n.a);
          for (std::size_t i = 0; i < g.rows(); ++i) {
            const auto y = n.value.row(i);
            const auto gy = g.row(i);
            double dot = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j) dot += gy[j] * y[j];
            auto out = ga.row(i);
            for (std::size_t j = 0; j < y.size(); ++j) out[j] += y[j] * (gy[j] - dot);
          }
        }
        break;
      case Op::kConcatCols: {
        const std::size_t left = nodes_[static_cast<std::size_t>(n.a)].value.cols();
        if (wants(n.a)) {
          Matrix& ga = grad_slot(n.a);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < left; ++j) ga(i, j) += g(i, j);
        }
        if (wants(n.b)) {
          Matrix& gb = grad_slot(n.b);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = left; j < g.cols(); ++j) gb(i, j - left) += g(i, j);
        }
        break;
      }
      case Op::kColumnMax:
        if (wants(n.a)) {
          Matrix& ga = grad_slot(n.a);
          for (std::size_t j = 0; j < g.cols(); ++j) ga(n.index[j], j) += g(0, j);
        }
        break;
      case Op::kBroadcastRows:
        if (wants(n.a)) {
          Matrix& ga = grad_slot(n.a);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) ga(0, j) += g(i, j);
        }
        break;
      case Op::kPermuteRows:
        if (wants(n.a)) {
          Matrix& ga = grad_slot(n.a);
          for (std::size_t r = 0; r < n.index.size(); ++r) {
            auto dst = ga.row(n.index[r]);
            const auto src = g.row(r);
            for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
          }
        }
        break;
      case Op::kSum:
        if (wants(n.a)) {
          Matrix& ga = grad_slot(n.a);
          for (double& v : ga.data()) v += g(0, 0);
        }
        break;
      case Op::kScale:
        if (wants(n.a)) {
          Matrix& ga = grad_slot(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += n.scalar * g.data()[i];
        }
        break;
      case Op::kHadamard: {
        const Matrix& a = nodes_[static_cast<std::size_t>(n.a)].value;
        const Matrix& b = nodes_[static_cast<std::size_t>(n.b)].value;
        if (wants(n.a)) add_in_place(grad_slot(n.a), ban::hadamard(g, b));
        if (wants(n.b)) add_in_place(grad_slot(n.b), ban::hadamard(g, a));
        break;
      }
      case Op::kScalarLoss:
        if (wants(n.a)) {
          Matrix& ga = grad_slot(n.a);
          for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] += g(0, 0) * n.aux.data()[i];
        }
        break;
    }
  }
  for (Node& n : nodes_) {
    if (n.op == Op::kLeaf && n.needs_grad && n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  }
}

void Tape::accumulate_into(const Parameter& p, Matrix& out) const {
  for (const Node& n : nodes_) {
    if (n.param == &p && !n.grad.empty()) add_in_place(out, n.grad);
  }
}

Matrix Tape::gradient_of(const Parameter& p) const {
  Matrix out(p.value.rows(), p.value.cols());
  accumulate_into(p, out);
  return out;
}

}  // namespace ban
