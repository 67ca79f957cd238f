/*
 * Copyright 2026 The MFGAT Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "mfgat/rng.hpp"
#include "mfgat/tensor.hpp"

namespace mfgat::ad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  const Tensor& value() const;
  const Tensor& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  std::size_t index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

// Records one forward pass. Each recorded node holds its value, a gradient
// buffer of the same shape and a closure that pushes its gradient to its
// parents. A tape belongs to one thread and is used for one forward/backward
// pass; `backward` may be called once.
class Tape {
 public:
  // self-index -> pushes tape.grad(self) into the parents' gradients
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::uint64_t id() const { return id_; }

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  // Registers a computed node. `requires_grad` should be true iff some parent
  // requires it; `backward` may be empty in that case.
  Var record(Tensor value, bool requires_grad, BackwardFn backward, std::string op);

  const Tensor& value(std::size_t i) const { return nodes_[i].value; }
  const Tensor& grad(std::size_t i) const { return nodes_[i].grad; }
  Tensor& grad_mut(std::size_t i) { return nodes_[i].grad; }
  bool requires_grad(std::size_t i) const { return nodes_[i].requires_grad; }
  const std::string& op(std::size_t i) const { return nodes_[i].op; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and runs every closure in reverse order.
  void backward(const Var& loss);
  bool consumed() const { return consumed_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
    std::string op;
  };

  std::uint64_t id_;
  std::deque<Node> nodes_;
  bool consumed_ = false;
};

using Mask = std::vector<std::uint8_t>;

enum class Mode { train, eval };

// Throws InvalidInput unless both handles live on the same tape.
Tape& same_tape(const Var& a, const Var& b);

// Linear algebra.
Var matmul(const Var& a, const Var& b);
// a * b^T, the row-vector form of W x for weights stored out x in.
Var matmul_nt(const Var& a, const Var& b);
Var transpose(const Var& a);

// Elementwise with 2-D broadcasting: each dimension of the operands must
// match or be 1. Gradients are summed back over broadcast dimensions.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);

// a * w^T + b with w stored as out x in and b as 1 x out.
Var linear(const Var& x, const Var& w, const Var& b);

// Nonlinearities. Subgradient at 0 is 1 for all three.
Var leaky_relu(const Var& x, double slope);
Var relu(const Var& x);
Var elu(const Var& x, double alpha = 1.0);

// Row-wise softmax restricted to mask-true entries. `mask` has rows*cols
// entries (row-major); masked-out outputs are exactly 0. Every row needs at
// least one true entry.
Var masked_softmax(const Var& scores, const Mask& mask);

// Row-wise (x - mean) / (std + eps) * gamma + beta with the population std.
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps);

// Train mode zeroes each entry with probability p; survivors are scaled by
// 1/(1-p) unless `rescale` is false. Eval mode returns x itself.
Var dropout(const Var& x, double p, Mode mode, RngStream& rng, bool rescale = true);

// -log softmax(logits)[label] for a 1 x C row.
Var cross_entropy(const Var& logits, std::size_t label);

// Structure.
Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice(const Var& a, std::size_t row0, std::size_t nrows, std::size_t col0, std::size_t ncols);

// Reductions.
Var sum(const Var& a);
Var mean(const Var& a);
Var row_sum(const Var& a);

}  // namespace mfgat::ad
