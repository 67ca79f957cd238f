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


// Serial reference kernels against their OpenMP counterparts.
//
//   ./build/bench/bench_kernels --benchmark_filter=gemm
//   OMP_NUM_THREADS=4 ./build/bench/bench_kernels

#include <benchmark/benchmark.h>

#include <set>

#include "mfgat/kernels.hpp"
#include "mfgat/training.hpp"

using namespace mfgat;

namespace {

Tensor random_tensor(RngStream& rng, std::size_t r, std::size_t c) {
  Tensor t(r, c);
  for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

template <auto Kernel>
void BM_gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream rng(1);
  const Tensor a = random_tensor(rng, n, n), b = random_tensor(rng, n, n);
  Tensor c(n, n);
  for (auto _ : state) {
    Kernel(a, false, b, true, c, false);
    benchmark::DoNotOptimize(c.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <auto Kernel>
void BM_axpy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream rng(2);
  const Tensor src = random_tensor(rng, n, 64);
  Tensor dst(n, 64);
  for (auto _ : state) {
    Kernel(1e-3, src, dst);
    benchmark::DoNotOptimize(dst.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 64));
}

// Protein-sized graphs: about 40 nodes, a ring plus random chords, 3 one-hot features.
std::vector<GraphRecord> graphs(std::size_t count) {
  RngStream rng(3);
  std::vector<GraphRecord> out;
  for (std::size_t g = 0; g < count; ++g) {
    GraphRecord rec;
    const std::size_t n = 30 + rng.below(20);
    rec.label = g % 2;
    rec.features = Tensor(n, 3);
    for (std::size_t i = 0; i < n; ++i) rec.features(i, rng.below(3)) = 1.0;
    std::set<Edge> edges;
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::uint32_t>((i + 1) % n);
      edges.insert({std::min(i, j), std::max(i, j)});
    }
    while (edges.size() < 2 * n) {
      const auto a = static_cast<std::uint32_t>(rng.below(n)), b = static_cast<std::uint32_t>(rng.below(n));
      if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
    }
    rec.edges.assign(edges.begin(), edges.end());
    out.push_back(std::move(rec));
  }
  return out;
}

template <bool Parallel>
void BM_batch_gradient(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const std::vector<GraphRecord> data = graphs(batch);
  std::vector<const GraphRecord*> ptrs;
  for (const auto& g : data) ptrs.push_back(&g);
  ModelConfig cfg;
  cfg.input_dim = 3;
  RngStream rng(4);
  const ModelParams params = build_model(cfg, rng);
  const RngStream base(5);
  for (auto _ : state) {
    BatchGradient g = Parallel ? batch_gradient_parallel(params, cfg, ptrs, base)
                               : batch_gradient_serial(params, cfg, ptrs, base);
    benchmark::DoNotOptimize(g.loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}

}  // namespace

BENCHMARK(BM_gemm<kernels::gemm_serial>)->Name("gemm/serial")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_gemm<kernels::gemm_parallel>)->Name("gemm/parallel")->Arg(64)->Arg(256)->Arg(512)->UseRealTime();
BENCHMARK(BM_axpy<kernels::axpy_serial>)->Name("axpy/serial")->Arg(1 << 14);
BENCHMARK(BM_axpy<kernels::axpy_parallel>)->Name("axpy/parallel")->Arg(1 << 14)->UseRealTime();
BENCHMARK(BM_batch_gradient<false>)->Name("batch_gradient/serial")->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch_gradient<true>)
    ->Name("batch_gradient/parallel")
    ->Arg(32)
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
