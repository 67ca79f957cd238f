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

#include <functional>
#include <string>
#include <vector>

#include "mfgat/autodiff.hpp"

namespace mfgat::ad {

// Builds a scalar (1x1) loss on `tape` from leaves holding the parameters,
// in the same order as the tensors handed to grad_check.
using ScalarFn = std::function<Var(Tape& tape, const std::vector<Var>& params)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_entry = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Reverse-mode gradients of `f` at `params`.
std::vector<Tensor> analytic_gradients(const ScalarFn& f, const std::vector<Tensor>& params);

// Evaluates f on a fresh tape.
double evaluate_scalar(const ScalarFn& f, const std::vector<Tensor>& params);

// Compares reverse-mode gradients against central differences
// (f(theta+h) - f(theta-h)) / 2h entry by entry. The per-entry error is
// |analytic - numeric| / max(1, |analytic|, |numeric|); the maximum is
// returned. `f` must be deterministic: it is evaluated twice at the base
// point and InvalidInput is thrown if the two values differ.
GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor> params, double h = 1e-5);

}  // namespace mfgat::ad
