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


#include "mfgat/kernels.hpp"

#include <atomic>
#include <vector>

#include "mfgat/error.hpp"

namespace mfgat::kernels {
namespace {

std::atomic<Mode> g_mode{Mode::parallel};

struct GemmShape {
  std::size_t m, k, n;
};

GemmShape check_shapes(const Tensor& a, bool ta, const Tensor& b, bool tb, Tensor& c,
                       bool accumulate) {
  std::size_t m = ta ? a.cols() : a.rows();
  std::size_t ka = ta ? a.rows() : a.cols();
  std::size_t kb = tb ? b.cols() : b.rows();
  std::size_t n = tb ? b.rows() : b.cols();
  if (ka != kb) {
    throw InvalidInput("gemm: inner dimensions differ (" + a.shape_string() + " vs " +
                       b.shape_string() + ")");
  }
  if (accumulate) {
    if (c.rows() != m || c.cols() != n) throw InvalidInput("gemm: output shape mismatch");
  } else if (c.rows() != m || c.cols() != n) {
    c = Tensor(m, n);
  }
  return {m, ka, n};
}

// One output row. Each entry sums over k in ascending order into a scratch
// row, then lands in c; shared by both kernels.
inline void gemm_row(std::size_t i, const Tensor& a, bool ta, const Tensor& b, bool tb,
                     Tensor& c, bool accumulate, const GemmShape& s, double* scratch) {
  for (std::size_t j = 0; j < s.n; ++j) scratch[j] = 0.0;
  for (std::size_t k = 0; k < s.k; ++k) {
    const double aik = ta ? a(k, i) : a(i, k);
    if (tb) {
      for (std::size_t j = 0; j < s.n; ++j) scratch[j] += aik * b(j, k);
    } else {
      const double* brow = b.data() + k * s.n;
      for (std::size_t j = 0; j < s.n; ++j) scratch[j] += aik * brow[j];
    }
  }
  double* crow = c.data() + i * s.n;
  if (accumulate) {
    for (std::size_t j = 0; j < s.n; ++j) crow[j] += scratch[j];
  } else {
    for (std::size_t j = 0; j < s.n; ++j) crow[j] = scratch[j];
  }
}

}  // namespace

void set_mode(Mode mode) { g_mode.store(mode); }
Mode mode() { return g_mode.load(); }

void gemm_serial(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c,
                 bool accumulate) {
  const GemmShape s = check_shapes(a, trans_a, b, trans_b, c, accumulate);
  std::vector<double> scratch(s.n);
  for (std::size_t i = 0; i < s.m; ++i)
    gemm_row(i, a, trans_a, b, trans_b, c, accumulate, s, scratch.data());
}

void gemm_parallel(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c,
                   bool accumulate) {
  const GemmShape s = check_shapes(a, trans_a, b, trans_b, c, accumulate);
  const bool big = s.m * s.k * s.n >= kParallelThreshold;
#pragma omp parallel if (big)
  {
    std::vector<double> scratch(s.n);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < s.m; ++i)
      gemm_row(i, a, trans_a, b, trans_b, c, accumulate, s, scratch.data());
  }
}

void gemm(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c,
          bool accumulate) {
  if (mode() == Mode::parallel) {
    gemm_parallel(a, trans_a, b, trans_b, c, accumulate);
  } else {
    gemm_serial(a, trans_a, b, trans_b, c, accumulate);
  }
}

void axpy_serial(double alpha, const Tensor& src, Tensor& dst) {
  if (!src.same_shape(dst)) throw InvalidInput("axpy: shape mismatch");
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += alpha * src[i];
}

void axpy_parallel(double alpha, const Tensor& src, Tensor& dst) {
  if (!src.same_shape(dst)) throw InvalidInput("axpy: shape mismatch");
  const std::size_t n = src.size();
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) dst[i] += alpha * src[i];
}

}  // namespace mfgat::kernels
