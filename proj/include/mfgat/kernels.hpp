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

#include "mfgat/tensor.hpp"

namespace mfgat::kernels {

// Dense kernels come in two flavours: a plain serial reference and an OpenMP
// version parallel over output rows. Both evaluate every output entry with the
// same summation order, so their results are bitwise identical; tests rely on
// that. `gemm` dispatches on the process-wide mode.
enum class Mode { serial, parallel };

void set_mode(Mode mode);
Mode mode();

// c (+)= op(a) * op(b), op = transpose when the flag is set.
void gemm_serial(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c,
                 bool accumulate);
void gemm_parallel(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c,
                   bool accumulate);
void gemm(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c,
          bool accumulate);

// dst += src, elementwise.
void axpy_serial(double alpha, const Tensor& src, Tensor& dst);
void axpy_parallel(double alpha, const Tensor& src, Tensor& dst);

// Below this many multiply-adds the parallel kernel stays on one thread.
inline constexpr std::size_t kParallelThreshold = 1 << 15;

}  // namespace mfgat::kernels
