// Copyright 2026 The ALVC Workbench Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal reverse-mode differentiation over dense double matrices. A Tape
// records operations in evaluation order; backward() walks it in reverse.
// Rows are sequence positions throughout.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace alvc::ad {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

struct Var {
  std::size_t id;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf without gradient.
  Var constant(Matrix value);
  /// Leaf aliasing external storage. When `grad_sink` is non-null, backward()
  /// adds this leaf's gradient into it. Both must outlive the tape.
  Var parameter(const Matrix& value, Matrix* grad_sink);

  const Matrix& value(Var v) const;
  /// Gradient after backward(); zero matrix if the node needs none.
  const Matrix& grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);             // a * b
  Var matmul_nt(Var a, Var b);          // a * b^T
  Var add(Var a, Var b);                // same shape
  Var add_row(Var a, Var row);          // row (1 x c) broadcast over rows of a
  Var scale(Var a, double s);
  Var hadamard_const(Var a, const Matrix& m);  // a .* m, m constant
  Var relu(Var a);
  /// Row-wise (x - mean) / sqrt(var + eps) * gain + bias.
  Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
  /// Row-wise softmax over entries where `allowed` is nonzero. Rows with no
  /// allowed entry produce zeros.
  Var masked_softmax(Var x, const Matrix& allowed);
  Var log_softmax(Var x);
  /// Row i of the result is row ids[i] of `table`.
  Var gather_rows(Var table, std::span<const int> ids);
  Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
  Var concat_cols(std::span<const Var> parts);
  /// 1x1: -sum_i weights[i] * x(i, targets[i]).
  Var weighted_nll(Var log_probs, std::span<const int> targets, std::span<const double> weights);

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates.
  void backward(Var root);

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    Matrix* grad_sink = nullptr;
    bool requires_grad = false;
    std::function<void(Tape&, std::size_t)> backward;
  };

  const Matrix& val(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.external != nullptr ? *n.external : n.value;
  }
  Matrix& grad_ref(std::size_t id);
  Var push(Matrix value, bool requires_grad, std::function<void(Tape&, std::size_t)> back);

  std::vector<Node> nodes_;
  Matrix empty_;
};

}  // namespace alvc::ad
