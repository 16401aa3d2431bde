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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ban/matrix.hpp"

namespace ban {

/// A named trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  void zero_grad() { grad = Matrix(value.rows(), value.cols()); }
};

class Tape;

/// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape over a fixed set of matrix primitives.
///
/// Nodes are appended in evaluation order; backward() walks them in exact
/// reverse. Gradients sum over every use of a node. One tape belongs to one
/// thread.
class Tape {
 public:
  enum class Op : std::uint8_t {
    kLeaf,
    kMatMul,
    kTranspose,
    kAdd,
    kAddRowBias,
    kRelu,
    kRowSoftmax,
    kConcatCols,
    kColumnMax,
    kBroadcastRows,
    kPermuteRows,
    kSum,
    kScale,
    kHadamard,
    kScalarLoss,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Input with no gradient tracking.
  Var constant(Matrix value);
  /// Input whose gradient is tracked and readable after backward().
  Var variable(Matrix value);
  /// Binds a parameter; its gradient is later exported with accumulate_into().
  Var parameter(const Parameter& p);

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var add_row_bias(Var a, Var bias);
  Var relu(Var a);
  Var row_softmax(Var a);
  Var concat_cols(Var a, Var b);
  Var column_max(Var a);
  Var broadcast_rows(Var a, std::size_t rows);
  Var permute_rows(Var a, std::vector<std::size_t> perm);
  Var sum(Var a);
  Var scale(Var a, double s);
  Var hadamard(Var a, Var b);
  /// Scalar-valued node whose derivative with respect to `input` was computed
  /// alongside the value. Used by the fused loss functions.
  Var scalar_loss(Var input, double value, Matrix input_grad);

  /// Runs reverse accumulation from a 1x1 node. Throws kContract otherwise.
  void backward(Var loss);

  /// Adds the gradient of every binding of `p` to `out` (shaped like p).
  void accumulate_into(const Parameter& p, Matrix& out) const;
  Matrix gradient_of(const Parameter& p) const;

  const Matrix& value(Var v) const { return nodes_[v.id_].value; }
  const Matrix& grad(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Op op = Op::kLeaf;
    std::int64_t a = -1;
    std::int64_t b = -1;
    bool needs_grad = false;
    Matrix value;
    Matrix grad;
    Matrix aux;
    std::vector<std::size_t> index;
    double scalar = 0.0;
    const Parameter* param = nullptr;
  };

  Var push(Node node);
  const Node& node(Var v) const;
  void check_owner(Var v) const;
  Matrix& grad_slot(std::int64_t id);

  std::vector<Node> nodes_;
};

}  // namespace ban
