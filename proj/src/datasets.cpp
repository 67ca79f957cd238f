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


#include "mfgat/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "mfgat/error.hpp"
#include "mfgat/rng.hpp"

namespace mfgat {
namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Comma-separated fields with optional surrounding blanks.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Reads non-empty lines; blank lines are skipped but still counted so error
// messages carry the physical line number.
class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path), in_(path) {
    if (!fs::exists(path)) throw MissingInput("missing file: " + path.string());
    if (!in_) throw MissingInput("cannot open: " + path.string());
  }

  bool next(std::string_view& line) {
    while (std::getline(in_, buffer_)) {
      ++line_no_;
      line = trim(buffer_);
      if (!line.empty()) return true;
    }
    return false;
  }

  std::size_t line_no() const { return line_no_; }
  std::string file() const { return path_.filename().string(); }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(file(), line_no_, what); }

  long parse_int(std::string_view field) const {
    long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      fail("expected an integer, got '" + std::string(field) + "'");
    }
    return v;
  }

  double parse_real(std::string_view field) const {
    double v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      fail("expected a real number, got '" + std::string(field) + "'");
    }
    return v;
  }

 private:
  fs::path path_;
  std::ifstream in_;
  std::string buffer_;
  std::size_t line_no_ = 0;
};

std::vector<long> read_int_column(const fs::path& path) {
  LineReader reader(path);
  std::vector<long> out;
  std::string_view line;
  while (reader.next(line)) {
    auto fields = split_fields(line);
    if (fields.size() != 1) reader.fail("expected one integer per line");
    out.push_back(reader.parse_int(fields[0]));
  }
  return out;
}

fs::path file_for(const fs::path& dir, const std::string& name, const char* suffix) {
  return dir / (name + "_" + suffix + ".txt");
}

}  // namespace

std::vector<long> label_alphabet(std::span<const long> labels) {
  std::vector<long> alphabet(labels.begin(), labels.end());
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  return alphabet;
}

Tensor one_hot_encode(std::span<const long> labels, std::span<const long> alphabet) {
  Tensor out(labels.size(), alphabet.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::lower_bound(alphabet.begin(), alphabet.end(), labels[i]);
    if (it == alphabet.end() || *it != labels[i]) {
      throw InvalidInput("one_hot_encode: label " + std::to_string(labels[i]) +
                         " not in alphabet");
    }
    out(i, static_cast<std::size_t>(it - alphabet.begin())) = 1.0;
  }
  return out;
}

std::optional<std::size_t> known_feature_dim(const std::string& dataset_name) {
  static const std::map<std::string, std::size_t> dims = {
      {"PROTEINS", 3}, {"NCI1", 37}, {"Mutagenicity", 14}};
  auto it = dims.find(dataset_name);
  if (it == dims.end()) return std::nullopt;
  return it->second;
}

Dataset parse_tudataset(const fs::path& dir, const std::string& name,
                        const ParseOptions& options) {
  if (!fs::is_directory(dir)) throw MissingInput("dataset directory not found: " + dir.string());

  const fs::path indicator_path = file_for(dir, name, "graph_indicator");
  const fs::path graph_labels_path = file_for(dir, name, "graph_labels");
  const fs::path adjacency_path = file_for(dir, name, "A");
  const fs::path node_labels_path = file_for(dir, name, "node_labels");
  const fs::path node_attr_path = file_for(dir, name, "node_attributes");

  const std::vector<long> graph_labels = read_int_column(graph_labels_path);
  const std::size_t num_graphs = graph_labels.size();
  if (num_graphs == 0) throw FormatError(graph_labels_path.filename().string(), 0, "no graphs");

  // Node k (1-based) -> graph, and its local index inside that graph.
  std::vector<std::size_t> node_graph;
  std::vector<std::uint32_t> node_local;
  std::vector<std::size_t> graph_sizes(num_graphs, 0);
  {
    LineReader reader(indicator_path);
    std::string_view line;
    while (reader.next(line)) {
      auto fields = split_fields(line);
      if (fields.size() != 1) reader.fail("expected one graph id per line");
      long g = reader.parse_int(fields[0]);
      if (g < 1 || static_cast<std::size_t>(g) > num_graphs) {
        reader.fail("graph id " + std::to_string(g) + " outside 1.." + std::to_string(num_graphs));
      }
      const std::size_t gi = static_cast<std::size_t>(g - 1);
      node_graph.push_back(gi);
      node_local.push_back(static_cast<std::uint32_t>(graph_sizes[gi]++));
    }
  }
  const std::size_t num_nodes = node_graph.size();
  for (std::size_t g = 0; g < num_graphs; ++g) {
    if (graph_sizes[g] == 0) {
      throw FormatError(indicator_path.filename().string(), 0,
                        "graph " + std::to_string(g + 1) + " has no nodes");
    }
  }

  std::vector<std::vector<Edge>> graph_edges(num_graphs);
  {
    LineReader reader(adjacency_path);
    std::string_view line;
    while (reader.next(line)) {
      auto fields = split_fields(line);
      if (fields.size() != 2) reader.fail("expected 'i, j'");
      const long i = reader.parse_int(fields[0]);
      const long j = reader.parse_int(fields[1]);
      for (long id : {i, j}) {
        if (id < 1 || static_cast<std::size_t>(id) > num_nodes) {
          reader.fail("node id " + std::to_string(id) + " has no graph-indicator entry");
        }
      }
      const std::size_t gi = node_graph[static_cast<std::size_t>(i - 1)];
      if (gi != node_graph[static_cast<std::size_t>(j - 1)]) {
        reader.fail("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                    ") joins two different graphs");
      }
      std::uint32_t a = node_local[static_cast<std::size_t>(i - 1)];
      std::uint32_t b = node_local[static_cast<std::size_t>(j - 1)];
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      graph_edges[gi].emplace_back(a, b);
    }
  }

  Dataset ds;
  ds.name = name;
  ds.feature_source = options.features;
  ds.class_values = label_alphabet(graph_labels);
  ds.num_classes = ds.class_values.size();

  // Per-graph feature rows, filled in node order.
  std::vector<Tensor> features(num_graphs);
  std::vector<std::vector<long>> raw_labels(num_graphs);

  const bool have_labels = fs::exists(node_labels_path);
  const bool have_attrs = fs::exists(node_attr_path);
  if (!have_labels && !have_attrs) {
    throw MissingInput("missing file: " + node_labels_path.string() + " (and no " +
                       node_attr_path.filename().string() + ")");
  }
  if (have_labels) {
    std::vector<long> labels = read_int_column(node_labels_path);
    if (labels.size() != num_nodes) {
      throw FormatError(node_labels_path.filename().string(), labels.size(),
                        "has " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(num_nodes) + " nodes");
    }
    for (std::size_t k = 0; k < num_nodes; ++k) raw_labels[node_graph[k]].push_back(labels[k]);
    ds.node_label_alphabet = label_alphabet(labels);
  }

  if (options.features == FeatureSource::node_labels) {
    if (!have_labels) throw MissingInput("missing file: " + node_labels_path.string());
    ds.feature_dim = ds.node_label_alphabet.size();
    for (std::size_t g = 0; g < num_graphs; ++g)
      features[g] = one_hot_encode(raw_labels[g], ds.node_label_alphabet);
    std::ostringstream enc;
    enc << "one-hot node labels over alphabet of " << ds.feature_dim << " values";
    ds.encoding = enc.str();
  } else {
    if (!have_attrs) throw MissingInput("missing file: " + node_attr_path.string());
    LineReader reader(node_attr_path);
    std::vector<std::vector<double>> rows;
    std::string_view line;
    while (reader.next(line)) {
      auto fields = split_fields(line);
      std::vector<double> row;
      for (auto f : fields) row.push_back(reader.parse_real(f));
      if (!rows.empty() && row.size() != rows.front().size()) {
        reader.fail("attribute count differs from the first line");
      }
      rows.push_back(std::move(row));
    }
    if (rows.size() != num_nodes) {
      throw FormatError(reader.file(), reader.line_no(),
                        "has " + std::to_string(rows.size()) + " rows for " +
                            std::to_string(num_nodes) + " nodes");
    }
    ds.feature_dim = rows.front().size();
    for (std::size_t g = 0; g < num_graphs; ++g) features[g] = Tensor(graph_sizes[g], ds.feature_dim);
    for (std::size_t k = 0; k < num_nodes; ++k) {
      auto dst = features[node_graph[k]].row_span(node_local[k]);
      std::copy(rows[k].begin(), rows[k].end(), dst.begin());
    }
    ds.encoding = "raw node attributes (" + std::to_string(ds.feature_dim) + " reals)";
  }

  if (options.validate_known_dims && options.features == FeatureSource::node_labels) {
    if (auto expected = known_feature_dim(name); expected && *expected != ds.feature_dim) {
      throw ValidationError(name + ": encoded feature dimension " +
                            std::to_string(ds.feature_dim) + " but expected " +
                            std::to_string(*expected));
    }
  }

  ds.graphs.resize(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    GraphRecord& rec = ds.graphs[g];
    rec.features = std::move(features[g]);
    auto& edges = graph_edges[g];
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    rec.edges = std::move(edges);
    rec.graph_id = g + 1;
    rec.node_labels = std::move(raw_labels[g]);
    auto it = std::lower_bound(ds.class_values.begin(), ds.class_values.end(), graph_labels[g]);
    rec.label = static_cast<std::size_t>(it - ds.class_values.begin());
  }
  return ds;
}

void write_tudataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string& name = dataset.name;
  std::ofstream a(file_for(dir, name, "A"));
  std::ofstream ind(file_for(dir, name, "graph_indicator"));
  std::ofstream gl(file_for(dir, name, "graph_labels"));
  std::ofstream nl;
  std::ofstream na;
  const bool write_labels = std::all_of(dataset.graphs.begin(), dataset.graphs.end(),
                                        [](const GraphRecord& g) {
                                          return g.node_labels.size() == g.num_nodes();
                                        });
  if (write_labels) {
    nl.open(file_for(dir, name, "node_labels"));
  } else {
    na.open(file_for(dir, name, "node_attributes"));
    na << std::setprecision(17);
  }
  std::size_t offset = 1;
  for (std::size_t g = 0; g < dataset.graphs.size(); ++g) {
    const GraphRecord& rec = dataset.graphs[g];
    for (const auto& [u, v] : rec.edges) {
      a << offset + u << ", " << offset + v << "\n";
      a << offset + v << ", " << offset + u << "\n";
    }
    for (std::size_t k = 0; k < rec.num_nodes(); ++k) {
      ind << g + 1 << "\n";
      if (write_labels) {
        nl << rec.node_labels[k] << "\n";
      } else {
        auto row = rec.features.row_span(k);
        for (std::size_t c = 0; c < row.size(); ++c) na << (c ? ", " : "") << row[c];
        na << "\n";
      }
    }
    gl << dataset.class_values.at(rec.label) << "\n";
    offset += rec.num_nodes();
  }
}

DatasetStats dataset_stats(const Dataset& dataset) {
  if (dataset.graphs.empty()) throw InvalidInput("dataset_stats: empty dataset");
  DatasetStats s;
  s.name = dataset.name;
  s.num_graphs = dataset.graphs.size();
  s.num_classes = dataset.num_classes;
  s.feature_dim = dataset.feature_dim;
  double nodes = 0, edges = 0;
  for (const GraphRecord& g : dataset.graphs) {
    nodes += static_cast<double>(g.num_nodes());
    edges += static_cast<double>(g.edges.size());
  }
  s.avg_nodes = nodes / static_cast<double>(s.num_graphs);
  s.avg_edges = edges / static_cast<double>(s.num_graphs);
  return s;
}

std::string stats_csv_row(const DatasetStats& s) {
  std::ostringstream out;
  out << s.name << "," << s.num_graphs << "," << s.num_classes << "," << std::fixed
      << std::setprecision(4) << s.avg_nodes << "," << s.avg_edges << "," << s.feature_dim;
  return out.str();
}

void validate_split(const SplitSpec& spec) {
  if (!(spec.train > 0 && spec.val > 0 && spec.test > 0)) {
    throw InvalidInput("split: fractions must be positive");
  }
  if (std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
    throw InvalidInput("split: fractions must sum to 1");
  }
}

Split split_indices(std::size_t n, const SplitSpec& spec) {
  validate_split(spec);
  if (n < 3) throw InvalidInput("split: need at least 3 graphs");
  // The small nudge keeps products such as 100 * 0.7 from landing just
  // below an integer.
  const double nd = static_cast<double>(n);
  const auto n_train = static_cast<std::size_t>(std::floor(nd * spec.train + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(nd * spec.val + 1e-9));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
    throw InvalidInput("split: " + std::to_string(n) + " graphs leave an empty split");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  RngStream rng(spec.seed);
  rng.shuffle(order);
  Split s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

Split split_dataset(const Dataset& dataset, const SplitSpec& spec) {
  return split_indices(dataset.size(), spec);
}

SplitSpec parse_split_fractions(const std::string& text, std::uint64_t seed) {
  std::vector<double> parts;
  for (auto f : split_fields(text)) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size()) {
      throw InvalidInput("split: cannot parse '" + text + "'");
    }
    parts.push_back(v);
  }
  if (parts.size() != 3) throw InvalidInput("split: expected three fractions, got '" + text + "'");
  SplitSpec spec{parts[0], parts[1], parts[2], seed};
  validate_split(spec);
  return spec;
}

std::vector<GraphRecord> select(const Dataset& dataset, std::span<const std::size_t> indices) {
  std::vector<GraphRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(dataset.graphs.at(i));
  return out;
}

}  // namespace mfgat
