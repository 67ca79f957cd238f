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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfgat/tensor.hpp"

namespace mfgat {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

// One graph. Edges are undirected, 0-based local indices, stored once with
// first < second, sorted, no self-loops.
struct GraphRecord {
  Tensor features;                 // n x d
  std::vector<Edge> edges;
  std::size_t label = 0;           // contiguous class index
  std::size_t graph_id = 0;        // 1-based id from the source files
  std::vector<long> node_labels;   // raw categorical labels, empty if absent

  std::size_t num_nodes() const { return features.rows(); }
};

enum class FeatureSource { node_labels, node_attributes };

struct Dataset {
  std::string name;
  std::vector<GraphRecord> graphs;
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;
  std::string encoding;            // human-readable description of the features
  std::vector<long> class_values;  // original graph label of each class index
  std::vector<long> node_label_alphabet;
  FeatureSource feature_source = FeatureSource::node_labels;

  std::size_t size() const { return graphs.size(); }
};

struct ParseOptions {
  FeatureSource features = FeatureSource::node_labels;
  // Check the encoded dimension against the published feature counts of the
  // known benchmark datasets.
  bool validate_known_dims = true;
};

// Reads DS_A.txt, DS_graph_indicator.txt, DS_graph_labels.txt and
// DS_node_labels.txt / DS_node_attributes.txt from `dir`.
//
// Errors: MissingInput for an absent directory or file; FormatError (with
// file and line) for malformed content; ValidationError when a known
// dataset encodes to an unexpected feature dimension.
Dataset parse_tudataset(const std::filesystem::path& dir, const std::string& name,
                        const ParseOptions& options = {});

// Writes the canonical undirected form back out (both directions per edge).
void write_tudataset(const Dataset& dataset, const std::filesystem::path& dir);

// Sorted set of distinct labels.
std::vector<long> label_alphabet(std::span<const long> labels);

// n x |alphabet| one-hot rows; throws InvalidInput for labels outside it.
Tensor one_hot_encode(std::span<const long> labels, std::span<const long> alphabet);

// Published feature dimension for PROTEINS / NCI1 / Mutagenicity.
std::optional<std::size_t> known_feature_dim(const std::string& dataset_name);

struct DatasetStats {
  std::string name;
  std::size_t num_graphs = 0;
  std::size_t num_classes = 0;
  double avg_nodes = 0.0;
  double avg_edges = 0.0;
  std::size_t feature_dim = 0;
};

DatasetStats dataset_stats(const Dataset& dataset);

inline constexpr const char* kStatsCsvHeader =
    "dataset,num_graphs,num_classes,avg_nodes,avg_edges,feature_dim";
std::string stats_csv_row(const DatasetStats& stats);

struct SplitSpec {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<std::size_t> train, val, test;
};

// Positive fractions summing to 1 within 1e-9, else InvalidInput.
void validate_split(const SplitSpec& spec);

// Shuffles [0, n) with the seed, cuts at floor(n*train) and
// floor(n*train) + floor(n*val); the rest is test.
Split split_indices(std::size_t n, const SplitSpec& spec);
Split split_dataset(const Dataset& dataset, const SplitSpec& spec);

// Parses "0.7,0.1,0.2".
SplitSpec parse_split_fractions(const std::string& text, std::uint64_t seed = 0);

std::vector<GraphRecord> select(const Dataset& dataset, std::span<const std::size_t> indices);

}  // namespace mfgat
