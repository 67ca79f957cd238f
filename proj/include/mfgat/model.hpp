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

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mfgat/autodiff.hpp"
#include "mfgat/datasets.hpp"
#include "mfgat/rng.hpp"

namespace mfgat {

enum class ModelKind { mfgat, fgat, gat, gcn, sage };
enum class ViewWeighting { scalar, per_dimension };
enum class Activation { elu, relu, identity };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);
std::string to_string(ViewWeighting w);
ViewWeighting parse_view_weighting(const std::string& text);
std::string to_string(Activation a);
Activation parse_activation(const std::string& text);

struct ModelConfig {
  ModelKind kind = ModelKind::mfgat;
  std::size_t input_dim = 0;  // taken from the dataset
  std::size_t num_views = 3;
  std::size_t hidden_dim = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 1;
  std::size_t num_classes = 2;
  double dropout = 0.1;
  double leaky_slope = 0.2;
  double norm_eps = 1e-5;
  bool dropout_rescale = true;
  // Feed the unified view representation through the FGAT stack and derive
  // per-view node states with view-specific projections afterwards. When
  // false every view runs through the (shared) stack on its own.
  bool unified_path = true;
  ViewWeighting view_weighting = ViewWeighting::scalar;
  Activation attention_activation = Activation::elu;

  // Effective view count: 1 for every single-view model.
  std::size_t views() const { return kind == ModelKind::mfgat ? num_views : 1; }
};

// Throws InvalidInput naming the offending field.
void validate(const ModelConfig& config);

// Flat key=value form shared by checkpoints, config files and reports.
std::vector<std::pair<std::string, std::string>> to_key_values(const ModelConfig& config);
// Overwrites the fields named in `kv`; unknown keys are ignored.
void apply_key_values(ModelConfig& config, const std::map<std::string, std::string>& kv);

struct NamedTensor {
  std::string name;
  Tensor value;
  bool trainable = true;
};

// Every learnable tensor of a model, in declaration order.
class ModelParams {
 public:
  void add(std::string name, Tensor value, bool trainable = true);

  std::size_t size() const { return tensors_.size(); }
  std::size_t scalar_count() const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index_of(const std::string& name) const;

  NamedTensor& operator[](std::size_t i) { return tensors_[i]; }
  const NamedTensor& operator[](std::size_t i) const { return tensors_[i]; }
  Tensor& get(const std::string& name) { return tensors_[index_of(name)].value; }
  const Tensor& get(const std::string& name) const { return tensors_[index_of(name)].value; }
  void set_trainable(const std::string& name, bool trainable);

  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    if (a.tensors_.size() != b.tensors_.size()) return false;
    for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
      const auto& x = a.tensors_[i];
      const auto& y = b.tensors_[i];
      if (x.name != y.name || x.trainable != y.trainable || !(x.value == y.value)) return false;
    }
    return true;
  }

 private:
  std::vector<NamedTensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Allocates and initializes all parameters for `config`:
// Glorot-uniform weights, zero biases, LayerNorm gamma = 1 / beta = 0,
// view and fusion weights = 1, readout scoring vectors = 0 and view
// projections = identity.
ModelParams build_model(const ModelConfig& config, RngStream& rng);

// Closed-form parameter count for `config` (see README for the formula).
std::size_t expected_parameter_count(const ModelConfig& config);

// ---------------------------------------------------------------------------
// Graph structure helpers

// Dense masks and propagation matrices derived from an edge list.
struct GraphStructure {
  std::size_t num_nodes = 0;
  ad::Mask attention_mask;  // n*n, neighbors plus self
  Tensor gcn_propagation;   // D^-1/2 (A+I) D^-1/2
  Tensor mean_neighbors;    // row-normalized A without self loops

  static GraphStructure from_edges(std::size_t num_nodes, const std::vector<Edge>& edges);
};

// ---------------------------------------------------------------------------
// Layers over tape variables. Parameter handles are leaves on the same tape.

struct ViewTransform {
  ad::Var weight;  // hidden x in
  ad::Var bias;    // 1 x hidden
};

struct GatConvParams {
  ad::Var weight;     // out x in
  ad::Var attention;  // heads x 2*(out/heads)
};

struct FgatSubmodule {
  GatConvParams conv;
  ad::Var linear_weight;
  ad::Var linear_bias;
  ad::Var gamma;
  ad::Var beta;
};

struct MultiViewReadout {
  ad::Var scoring;  // m x d, row j scores nodes of view j
  ad::Var fusion;   // 1 x m*d
};

struct ForwardContext {
  ad::Mode mode = ad::Mode::eval;
  RngStream* rng = nullptr;  // required in train mode when dropout > 0
};

// Row i of view j is W_j x_i + b_j.
std::vector<ad::Var> transform_views(const ad::Var& x, const std::vector<ViewTransform>& transforms);

// Weighted sum over views. `weights` is 1 x m (scalar per view) or m x d
// (per-dimension weights).
ad::Var unify_views(const std::vector<ad::Var>& views, const ad::Var& weights);

// Single- or multi-head graph attention over neighbors plus self. With
// `attention_out` non-null the per-head attention matrices are returned.
ad::Var gat_conv(const ad::Var& x, const GraphStructure& graph, const GatConvParams& params,
                 double slope, Activation activation,
                 std::vector<Tensor>* attention_out = nullptr);

// LayerNorm(x + Dropout(Linear(GatConv(x)))), row-wise.
ad::Var fgat_submodule_forward(const ad::Var& x, const GraphStructure& graph,
                               const FgatSubmodule& sub, const ModelConfig& config,
                               const ForwardContext& ctx);

// Two sub-modules applied in sequence.
ad::Var fgat_layer_forward(const ad::Var& x, const GraphStructure& graph,
                           const FgatSubmodule& first, const FgatSubmodule& second,
                           const ModelConfig& config, const ForwardContext& ctx);

// Per view: softmax(X_j a_j) weighted sum of node rows; concatenate views;
// scale elementwise by the fusion weights. Returns 1 x m*d.
ad::Var multi_view_readout(const std::vector<ad::Var>& views, const MultiViewReadout& readout);

// ReLU(D^-1/2 (A+I) D^-1/2 X W^T).
ad::Var gcn_conv(const ad::Var& x, const GraphStructure& graph, const ad::Var& weight);

// ReLU(X W_self^T + mean_{j in N(i)} x_j W_nb^T); isolated nodes aggregate 0.
ad::Var sage_conv(const ad::Var& x, const GraphStructure& graph, const ad::Var& self_weight,
                  const ad::Var& neighbor_weight);

// ---------------------------------------------------------------------------
// Whole-model forward

// Parameters enrolled on one tape, addressable by name.
class BoundParams {
 public:
  // Without gradient tracking no backward closures are recorded.
  BoundParams(ad::Tape& tape, const ModelParams& params, bool track_gradients = true);
  // Adopts existing leaves, one per tensor of `params` in order.
  BoundParams(const ModelParams& params, std::vector<ad::Var> vars);
  const ad::Var& operator[](const std::string& name) const;
  const std::vector<ad::Var>& vars() const { return vars_; }

 private:
  const ModelParams* params_;
  std::vector<ad::Var> vars_;
};

// Full pipeline for one graph, returning 1 x num_classes logits on the tape.
ad::Var classify_forward(ad::Tape& tape, const BoundParams& params, const GraphRecord& graph,
                         const ModelConfig& config, const ForwardContext& ctx);

// Eval-mode logits without keeping a tape around.
Tensor predict_logits(const ModelParams& params, const ModelConfig& config,
                      const GraphRecord& graph);

// Argmax with ties to the lower index.
std::size_t argmax_row(const Tensor& logits);

}  // namespace mfgat
