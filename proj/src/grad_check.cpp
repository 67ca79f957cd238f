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


#include "mfgat/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "mfgat/error.hpp"

namespace mfgat::ad {
namespace {

Var run(const ScalarFn& f, Tape& tape, const std::vector<Tensor>& params) {
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Tensor& p : params) leaves.push_back(tape.leaf(p));
  Var loss = f(tape, leaves);
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw InvalidInput("grad_check: function must return a 1x1 value, got " +
                       loss.value().shape_string());
  }
  return loss;
}

}  // namespace

double evaluate_scalar(const ScalarFn& f, const std::vector<Tensor>& params) {
  Tape tape;
  return run(f, tape, params).value()(0, 0);
}

std::vector<Tensor> analytic_gradients(const ScalarFn& f, const std::vector<Tensor>& params) {
  Tape tape;
  Var loss = run(f, tape, params);
  tape.backward(loss);
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) grads.push_back(tape.grad(i));
  return grads;
}

GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor> params, double h) {
  if (!(h > 0)) throw InvalidInput("grad_check: step h must be positive");
  const double base = evaluate_scalar(f, params);
  if (evaluate_scalar(f, params) != base) {
    throw InvalidInput("grad_check: function is not deterministic; fix its RNG state");
  }
  const std::vector<Tensor> analytic = analytic_gradients(f, params);

  GradCheckResult result;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& theta = params[p];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + h;
      const double up = evaluate_scalar(f, params);
      theta[i] = saved - h;
      const double down = evaluate_scalar(f, params);
      theta[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[p][i];
      const double err =
          std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      if (err > result.max_rel_error || !std::isfinite(err)) {
        result = {err, p, i, a, numeric};
      }
    }
  }
  return result;
}

}  // namespace mfgat::ad
