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

#include "alvc/autodiff.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace alvc::ad {

Var Tape::push(Matrix value, bool requires_grad,
               std::function<void(Tape&, std::size_t)> back) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(back);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::parameter(const Matrix& value, Matrix* grad_sink) {
  Node n;
  n.external = &value;
  n.grad_sink = grad_sink;
  n.requires_grad = grad_sink != nullptr;
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

const Matrix& Tape::value(Var v) const { return val(v.id); }

const Matrix& Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  return n.grad.size() == 0 && val(v.id).size() != 0 ? empty_ : n.grad;
}

Matrix& Tape::grad_ref(std::size_t id) {
  Node& n = nodes_[id];
  const Matrix& v = val(id);
  if (n.grad.rows() != v.rows() || n.grad.cols() != v.cols()) {
    n.grad = Matrix::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

Var Tape::matmul(Var a, Var b) {
  const bool rg = requires_grad(a) || requires_grad(b);
  return push(val(a.id) * val(b.id), rg, [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    if (t.requires_grad(a)) t.grad_ref(a.id).noalias() += g * t.val(b.id).transpose();
    if (t.requires_grad(b)) t.grad_ref(b.id).noalias() += t.val(a.id).transpose() * g;
  });
}

Var Tape::matmul_nt(Var a, Var b) {
  const bool rg = requires_grad(a) || requires_grad(b);
  return push(val(a.id) * val(b.id).transpose(), rg, [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    if (t.requires_grad(a)) t.grad_ref(a.id).noalias() += g * t.val(b.id);
    if (t.requires_grad(b)) t.grad_ref(b.id).noalias() += g.transpose() * t.val(a.id);
  });
}

Var Tape::add(Var a, Var b) {
  assert(val(a.id).rows() == val(b.id).rows() && val(a.id).cols() == val(b.id).cols());
  const bool rg = requires_grad(a) || requires_grad(b);
  return push(val(a.id) + val(b.id), rg, [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    if (t.requires_grad(a)) t.grad_ref(a.id) += g;
    if (t.requires_grad(b)) t.grad_ref(b.id) += g;
  });
}

Var Tape::add_row(Var a, Var row) {
  assert(val(row.id).rows() == 1 && val(row.id).cols() == val(a.id).cols());
  const bool rg = requires_grad(a) || requires_grad(row);
  Matrix out = val(a.id);
  out.rowwise() += val(row.id).row(0);
  return push(std::move(out), rg, [a, row](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    if (t.requires_grad(a)) t.grad_ref(a.id) += g;
    if (t.requires_grad(row)) t.grad_ref(row.id) += g.colwise().sum();
  });
}

Var Tape::scale(Var a, double s) {
  return push(val(a.id) * s, requires_grad(a), [a, s](Tape& t, std::size_t self) {
    t.grad_ref(a.id) += t.nodes_[self].grad * s;
  });
}

Var Tape::hadamard_const(Var a, const Matrix& m) {
  return push(val(a.id).cwiseProduct(m), requires_grad(a), [a, m](Tape& t, std::size_t self) {
    t.grad_ref(a.id) += t.nodes_[self].grad.cwiseProduct(m);
  });
}

Var Tape::relu(Var a) {
  return push(val(a.id).cwiseMax(0.0), requires_grad(a), [a](Tape& t, std::size_t self) {
    const Matrix& x = t.val(a.id);
    t.grad_ref(a.id) += (x.array() > 0.0).select(t.nodes_[self].grad, 0.0);
  });
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
  const Matrix& in = val(x.id);
  const Eigen::Index rows = in.rows();
  const Eigen::Index cols = in.cols();
  Matrix xhat(rows, cols);
  Eigen::VectorXd inv_std(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = in.row(r).mean();
    const double var = (in.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (in.row(r).array() - mean) * inv_std(r);
  }
  Matrix out = xhat;
  out.array().rowwise() *= val(gain.id).row(0).array();
  out.rowwise() += val(bias.id).row(0);
  const bool rg = requires_grad(x) || requires_grad(gain) || requires_grad(bias);
  return push(std::move(out), rg,
              [x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                  Tape& t, std::size_t self) {
                const Matrix& g = t.nodes_[self].grad;
                if (t.requires_grad(gain)) {
                  t.grad_ref(gain.id) += g.cwiseProduct(xhat).colwise().sum();
                }
                if (t.requires_grad(bias)) t.grad_ref(bias.id) += g.colwise().sum();
                if (t.requires_grad(x)) {
                  Matrix dxhat = g;
                  dxhat.array().rowwise() *= t.val(gain.id).row(0).array();
                  const double n = static_cast<double>(dxhat.cols());
                  Matrix& dx = t.grad_ref(x.id);
                  for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
                    const double m1 = dxhat.row(r).sum() / n;
                    const double m2 = dxhat.row(r).dot(xhat.row(r)) / n;
                    dx.row(r).array() +=
                        inv_std(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
                  }
                }
              });
}

Var Tape::masked_softmax(Var x, const Matrix& allowed) {
  const Matrix& in = val(x.id);
  assert(allowed.rows() == in.rows() && allowed.cols() == in.cols());
  Matrix y = Matrix::Zero(in.rows(), in.cols());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
      if (allowed(r, c) != 0.0) mx = std::max(mx, in(r, c));
    }
    if (!std::isfinite(mx)) continue;
    double z = 0.0;
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
      if (allowed(r, c) != 0.0) {
        y(r, c) = std::exp(in(r, c) - mx);
        z += y(r, c);
      }
    }
    y.row(r) /= z;
  }
  Matrix saved = y;
  return push(std::move(y), requires_grad(x), [x, y = std::move(saved)](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    const Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
    Matrix dx = g;
    dx.colwise() -= dots;
    t.grad_ref(x.id) += y.cwiseProduct(dx);
  });
}

Var Tape::log_softmax(Var x) {
  const Matrix& in = val(x.id);
  Matrix y(in.rows(), in.cols());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    const double mx = in.row(r).maxCoeff();
    const double lse = mx + std::log((in.row(r).array() - mx).exp().sum());
    y.row(r) = in.row(r).array() - lse;
  }
  return push(y, requires_grad(x), [x](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    const Matrix p = t.nodes_[self].value.array().exp();
    Matrix dx = g;
    dx -= (p.array().colwise() * g.rowwise().sum().array()).matrix();
    t.grad_ref(x.id) += dx;
  });
}

Var Tape::gather_rows(Var table, std::span<const int> ids) {
  const Matrix& tab = val(table.id);
  Matrix out(static_cast<Eigen::Index>(ids.size()), tab.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= tab.rows()) throw std::out_of_range("gather_rows: bad id");
    out.row(static_cast<Eigen::Index>(i)) = tab.row(ids[i]);
  }
  std::vector<int> saved(ids.begin(), ids.end());
  return push(std::move(out), requires_grad(table),
              [table, saved = std::move(saved)](Tape& t, std::size_t self) {
                const Matrix& g = t.nodes_[self].grad;
                Matrix& dt = t.grad_ref(table.id);
                for (std::size_t i = 0; i < saved.size(); ++i) {
                  dt.row(saved[i]) += g.row(static_cast<Eigen::Index>(i));
                }
              });
}

Var Tape::slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  return push(val(a.id).middleCols(start, count), requires_grad(a),
              [a, start, count](Tape& t, std::size_t self) {
                t.grad_ref(a.id).middleCols(start, count) += t.nodes_[self].grad;
              });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  Eigen::Index rows = parts.empty() ? 0 : val(parts[0].id).rows();
  Eigen::Index cols = 0;
  bool rg = false;
  for (Var p : parts) {
    cols += val(p.id).cols();
    rg = rg || requires_grad(p);
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    out.middleCols(at, val(p.id).cols()) = val(p.id);
    at += val(p.id).cols();
  }
  std::vector<Var> saved(parts.begin(), parts.end());
  return push(std::move(out), rg, [saved = std::move(saved)](Tape& t, std::size_t self) {
    Eigen::Index at = 0;
    for (Var p : saved) {
      const Eigen::Index c = t.val(p.id).cols();
      if (t.requires_grad(p)) t.grad_ref(p.id) += t.nodes_[self].grad.middleCols(at, c);
      at += c;
    }
  });
}

Var Tape::weighted_nll(Var log_probs, std::span<const int> targets,
                       std::span<const double> weights) {
  const Matrix& lp = val(log_probs.id);
  assert(targets.size() == weights.size() &&
         static_cast<Eigen::Index>(targets.size()) == lp.rows());
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (weights[i] != 0.0) s -= weights[i] * lp(static_cast<Eigen::Index>(i), targets[i]);
  }
  Matrix out(1, 1);
  out(0, 0) = s;
  std::vector<int> tg(targets.begin(), targets.end());
  std::vector<double> w(weights.begin(), weights.end());
  return push(std::move(out), requires_grad(log_probs),
              [log_probs, tg = std::move(tg), w = std::move(w)](Tape& t, std::size_t self) {
                const double g = t.nodes_[self].grad(0, 0);
                Matrix& d = t.grad_ref(log_probs.id);
                for (std::size_t i = 0; i < tg.size(); ++i) {
                  d(static_cast<Eigen::Index>(i), tg[i]) -= w[i] * g;
                }
              });
}

void Tape::backward(Var root) {
  if (val(root.id).rows() != 1 || val(root.id).cols() != 1) {
    throw std::invalid_argument("backward: root must be 1x1");
  }
  grad_ref(root.id)(0, 0) += 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, i);
    if (n.grad_sink != nullptr) *n.grad_sink += n.grad;
  }
}

}  // namespace alvc::ad
