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

// Shared fixtures: random graphs, node permutations and a small synthetic
// dataset whose class is readable from the node-label mix.

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "mfgat/datasets.hpp"
#include "mfgat/rng.hpp"
#include "mfgat/tensor.hpp"

namespace testsupport {

using mfgat::Dataset;
using mfgat::Edge;
using mfgat::GraphRecord;
using mfgat::RngStream;
using mfgat::Tensor;

inline Tensor random_tensor(RngStream& rng, std::size_t r, std::size_t c, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t(r, c);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// `n` nodes, exactly `m` distinct undirected edges (m <= n(n-1)/2).
inline std::vector<Edge> random_edges(RngStream& rng, std::size_t n, std::size_t m) {
  std::set<Edge> chosen;
  while (chosen.size() < m) {
    auto a = static_cast<std::uint32_t>(rng.below(n));
    auto b = static_cast<std::uint32_t>(rng.below(n));
    if (a != b) chosen.insert({std::min(a, b), std::max(a, b)});
  }
  return {chosen.begin(), chosen.end()};
}

inline GraphRecord random_graph(RngStream& rng, std::size_t n, std::size_t m, std::size_t dim) {
  GraphRecord g;
  g.features = random_tensor(rng, n, dim);
  g.edges = random_edges(rng, n, m);
  return g;
}

inline std::vector<std::size_t> random_permutation(RngStream& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  rng.shuffle(p);
  return p;
}

// Node i of `g` becomes node perm[i].
inline GraphRecord permute(const GraphRecord& g, const std::vector<std::size_t>& perm) {
  GraphRecord out = g;
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    for (std::size_t c = 0; c < g.features.cols(); ++c) out.features(perm[i], c) = g.features(i, c);
  out.edges.clear();
  for (auto [a, b] : g.edges) {
    auto pa = static_cast<std::uint32_t>(perm[a]);
    auto pb = static_cast<std::uint32_t>(perm[b]);
    out.edges.push_back({std::min(pa, pb), std::max(pa, pb)});
  }
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

inline Tensor permute_rows(const Tensor& t, const std::vector<std::size_t>& perm) {
  Tensor out(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t c = 0; c < t.cols(); ++c) out(perm[i], c) = t(i, c);
  return out;
}

// Two classes, alternating. Graphs are rings with a couple of chords; class 1
// graphs are dominated by node label 2, class 0 graphs by node label 0.
inline Dataset synthetic_dataset(std::size_t num_graphs, std::uint64_t seed,
                                 const std::string& name = "SYNTH") {
  RngStream rng(seed);
  Dataset ds;
  ds.name = name;
  ds.num_classes = 2;
  ds.feature_dim = 3;
  ds.encoding = "one-hot node labels";
  ds.class_values = {0, 1};
  ds.node_label_alphabet = {0, 1, 2};
  for (std::size_t g = 0; g < num_graphs; ++g) {
    GraphRecord rec;
    rec.label = g % 2;
    rec.graph_id = g + 1;
    const std::size_t n = 6 + rng.below(9);
    std::set<Edge> edges;
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::uint32_t>((i + 1) % n);
      edges.insert({std::min(i, j), std::max(i, j)});
    }
    for (int k = 0; k < 2; ++k) {
      auto a = static_cast<std::uint32_t>(rng.below(n));
      auto b = static_cast<std::uint32_t>(rng.below(n));
      if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
    }
    rec.edges.assign(edges.begin(), edges.end());
    const long major = rec.label == 1 ? 2 : 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform01();
      rec.node_labels.push_back(u < 0.6 ? major : (u < 0.8 ? 1 : 2 - major));
    }
    rec.features = mfgat::one_hot_encode(rec.node_labels, ds.node_label_alphabet);
    ds.graphs.push_back(std::move(rec));
  }
  return ds;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("mfgat_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport
