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
#include <string>
#include <vector>

#include "mfgat/grad_check.hpp"

namespace mfgat {

struct GradcheckCase {
  std::string name;
  double threshold = 1e-6;
  ad::ScalarFn fn;
  std::vector<Tensor> params;
};

struct GradcheckRow {
  std::string name;
  double max_rel_error = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

inline constexpr double kPrimitiveThreshold = 1e-6;
inline constexpr double kEndToEndThreshold = 1e-4;

// One case per differentiable primitive (loss = sum(op(inputs) * R) with a
// fixed random R), the composite layers, and the full MFGAT loss on a random
// 6-node graph. Inputs are drawn from `seed` and kept away from kinks.
std::vector<GradcheckCase> default_gradcheck_cases(std::uint64_t seed = 7);

GradcheckRow run_gradcheck_case(const GradcheckCase& c, double h = 1e-5);
std::vector<GradcheckRow> run_gradcheck(const std::vector<GradcheckCase>& cases, double h = 1e-5);

}  // namespace mfgat
