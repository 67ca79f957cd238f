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


#include "mfgat/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "mfgat/error.hpp"

namespace mfgat {

using ad::Var;

// ---------------------------------------------------------------------------
// Enums and config

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::mfgat: return "mfgat";
    case ModelKind::fgat: return "fgat";
    case ModelKind::gat: return "gat";
    case ModelKind::gcn: return "gcn";
    case ModelKind::sage: return "sage";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "mfgat") return ModelKind::mfgat;
  if (text == "fgat") return ModelKind::fgat;
  if (text == "gat") return ModelKind::gat;
  if (text == "gcn") return ModelKind::gcn;
  if (text == "sage" || text == "graphsage") return ModelKind::sage;
  throw InvalidInput("model: unknown kind '" + text + "'");
}

std::string to_string(ViewWeighting w) {
  return w == ViewWeighting::scalar ? "scalar" : "per_dimension";
}

ViewWeighting parse_view_weighting(const std::string& text) {
  if (text == "scalar") return ViewWeighting::scalar;
  if (text == "per_dimension") return ViewWeighting::per_dimension;
  throw InvalidInput("view_weighting: unknown value '" + text + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::elu: return "elu";
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
  }
  return "?";
}

Activation parse_activation(const std::string& text) {
  if (text == "elu") return Activation::elu;
  if (text == "relu") return Activation::relu;
  if (text == "identity") return Activation::identity;
  throw InvalidInput("attention_activation: unknown value '" + text + "'");
}

void validate(const ModelConfig& c) {
  auto bad = [](const std::string& field, const std::string& why) {
    throw InvalidInput("model config field '" + field + "': " + why);
  };
  if (c.input_dim < 1) bad("input_dim", "must be >= 1");
  if (c.num_views < 1) bad("num_views", "must be >= 1");
  if (c.hidden_dim < 1) bad("hidden_dim", "must be >= 1");
  if (c.num_layers < 1) bad("num_layers", "must be >= 1");
  if (c.num_heads < 1) bad("num_heads", "must be >= 1");
  if (c.hidden_dim % c.num_heads != 0) bad("num_heads", "must divide hidden_dim");
  if (c.num_classes < 1) bad("num_classes", "must be >= 1");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) bad("dropout", "must lie in [0,1)");
  if (!(c.leaky_slope > 0.0 && c.leaky_slope < 1.0)) bad("leaky_slope", "must lie in (0,1)");
  if (!(c.norm_eps > 0.0)) bad("norm_eps", "must be > 0");
}

namespace {

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidInput("model config field '" + key + "': not a count: '" + text + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidInput("model config field '" + key + "': not a number: '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw InvalidInput("model config field '" + key + "': not a boolean: '" + text + "'");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> to_key_values(const ModelConfig& c) {
  return {
      {"model", to_string(c.kind)},
      {"input_dim", std::to_string(c.input_dim)},
      {"views", std::to_string(c.num_views)},
      {"hidden", std::to_string(c.hidden_dim)},
      {"layers", std::to_string(c.num_layers)},
      {"heads", std::to_string(c.num_heads)},
      {"num_classes", std::to_string(c.num_classes)},
      {"dropout", format_real(c.dropout)},
      {"leaky_slope", format_real(c.leaky_slope)},
      {"norm_eps", format_real(c.norm_eps)},
      {"dropout_rescale", c.dropout_rescale ? "true" : "false"},
      {"unified_path", c.unified_path ? "true" : "false"},
      {"view_weighting", to_string(c.view_weighting)},
      {"attention_activation", to_string(c.attention_activation)},
  };
}

void apply_key_values(ModelConfig& c, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "model") c.kind = parse_model_kind(value);
    else if (key == "input_dim") c.input_dim = parse_count(key, value);
    else if (key == "views") c.num_views = parse_count(key, value);
    else if (key == "hidden") c.hidden_dim = parse_count(key, value);
    else if (key == "layers") c.num_layers = parse_count(key, value);
    else if (key == "heads") c.num_heads = parse_count(key, value);
    else if (key == "num_classes") c.num_classes = parse_count(key, value);
    else if (key == "dropout") c.dropout = parse_real(key, value);
    else if (key == "leaky_slope") c.leaky_slope = parse_real(key, value);
    else if (key == "norm_eps") c.norm_eps = parse_real(key, value);
    else if (key == "dropout_rescale") c.dropout_rescale = parse_bool(key, value);
    else if (key == "unified_path") c.unified_path = parse_bool(key, value);
    else if (key == "view_weighting") c.view_weighting = parse_view_weighting(value);
    else if (key == "attention_activation") c.attention_activation = parse_activation(value);
  }
}

// ---------------------------------------------------------------------------
// Parameters

void ModelParams::add(std::string name, Tensor value, bool trainable) {
  if (index_.count(name)) throw InvalidInput("duplicate parameter '" + name + "'");
  index_.emplace(name, tensors_.size());
  tensors_.push_back({std::move(name), std::move(value), trainable});
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.value.size();
  return n;
}

std::size_t ModelParams::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidInput("no parameter named '" + name + "'");
  return it->second;
}

void ModelParams::set_trainable(const std::string& name, bool trainable) {
  tensors_[index_of(name)].trainable = trainable;
}

namespace {

Tensor glorot(std::size_t rows, std::size_t cols, RngStream& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t(rows, cols);
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
  return t;
}

// Attention rows are independent vectors, each with fan_in 2*dh and fan_out 1.
Tensor glorot_rows(std::size_t rows, std::size_t cols, RngStream& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(cols + 1));
  Tensor t(rows, cols);
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
  return t;
}

std::string sub_prefix(std::size_t layer, std::size_t sub) {
  return "fgat." + std::to_string(layer) + "." + std::to_string(sub) + ".";
}

void add_fgat_stack(ModelParams& p, const ModelConfig& c, RngStream& rng) {
  const std::size_t h = c.hidden_dim;
  const std::size_t dh = h / c.num_heads;
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    for (std::size_t s = 0; s < 2; ++s) {
      const std::string pre = sub_prefix(l, s);
      p.add(pre + "conv.weight", glorot(h, h, rng));
      p.add(pre + "conv.attention", glorot_rows(c.num_heads, 2 * dh, rng));
      p.add(pre + "linear.weight", glorot(h, h, rng));
      p.add(pre + "linear.bias", Tensor::zeros(1, h));
      p.add(pre + "norm.gamma", Tensor::ones(1, h));
      p.add(pre + "norm.beta", Tensor::zeros(1, h));
    }
  }
}

void add_head(ModelParams& p, const ModelConfig& c, std::size_t views, RngStream& rng) {
  const std::size_t h = c.hidden_dim;
  p.add("readout.scoring", Tensor::zeros(views, h));
  p.add("readout.fusion", Tensor::ones(1, views * h));
  p.add("classifier.weight", glorot(c.num_classes, views * h, rng));
  p.add("classifier.bias", Tensor::zeros(1, c.num_classes));
}

}  // namespace

ModelParams build_model(const ModelConfig& c, RngStream& rng) {
  validate(c);
  ModelParams p;
  const std::size_t h = c.hidden_dim, d = c.input_dim;
  const std::size_t dh = h / c.num_heads;
  switch (c.kind) {
    case ModelKind::mfgat: {
      const std::size_t m = c.num_views;
      for (std::size_t j = 0; j < m; ++j) {
        p.add("view." + std::to_string(j) + ".weight", glorot(h, d, rng));
        p.add("view." + std::to_string(j) + ".bias", Tensor::zeros(1, h));
      }
      p.add("view_agg.weight", c.view_weighting == ViewWeighting::scalar ? Tensor::ones(1, m)
                                                                          : Tensor::ones(m, h));
      add_fgat_stack(p, c, rng);
      if (c.unified_path) {
        for (std::size_t j = 0; j < m; ++j) {
          p.add("proj." + std::to_string(j) + ".weight", Tensor::identity(h));
          p.add("proj." + std::to_string(j) + ".bias", Tensor::zeros(1, h));
        }
      }
      add_head(p, c, m, rng);
      break;
    }
    case ModelKind::fgat:
      p.add("input.weight", glorot(h, d, rng));
      p.add("input.bias", Tensor::zeros(1, h));
      add_fgat_stack(p, c, rng);
      add_head(p, c, 1, rng);
      break;
    case ModelKind::gat:
      for (std::size_t l = 0; l < c.num_layers; ++l) {
        const std::string pre = "gat." + std::to_string(l) + ".";
        p.add(pre + "conv.weight", glorot(h, l == 0 ? d : h, rng));
        p.add(pre + "conv.attention", glorot_rows(c.num_heads, 2 * dh, rng));
      }
      add_head(p, c, 1, rng);
      break;
    case ModelKind::gcn:
      for (std::size_t l = 0; l < c.num_layers; ++l)
        p.add("gcn." + std::to_string(l) + ".weight", glorot(h, l == 0 ? d : h, rng));
      add_head(p, c, 1, rng);
      break;
    case ModelKind::sage:
      for (std::size_t l = 0; l < c.num_layers; ++l) {
        const std::string pre = "sage." + std::to_string(l) + ".";
        p.add(pre + "self_weight", glorot(h, l == 0 ? d : h, rng));
        p.add(pre + "neighbor_weight", glorot(h, l == 0 ? d : h, rng));
      }
      add_head(p, c, 1, rng);
      break;
  }
  return p;
}

std::size_t expected_parameter_count(const ModelConfig& c) {
  const std::size_t h = c.hidden_dim, d = c.input_dim, L = c.num_layers, C = c.num_classes;
  const std::size_t sub = 2 * h * h + 5 * h;  // conv W + a, linear W + b, gamma + beta
  const std::size_t stack = L * 2 * sub;
  auto head = [&](std::size_t m) { return 2 * m * h + C * m * h + C; };
  switch (c.kind) {
    case ModelKind::mfgat: {
      const std::size_t m = c.num_views;
      const std::size_t agg = c.view_weighting == ViewWeighting::scalar ? m : m * h;
      const std::size_t proj = c.unified_path ? m * (h * h + h) : 0;
      return m * (h * d + h) + agg + stack + proj + head(m);
    }
    case ModelKind::fgat: return h * d + h + stack + head(1);
    case ModelKind::gat: return (h * d + 2 * h) + (L - 1) * (h * h + 2 * h) + head(1);
    case ModelKind::gcn: return h * d + (L - 1) * h * h + head(1);
    case ModelKind::sage: return 2 * h * d + (L - 1) * 2 * h * h + head(1);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Graph structure

GraphStructure GraphStructure::from_edges(std::size_t n, const std::vector<Edge>& edges) {
  GraphStructure g;
  g.num_nodes = n;
  g.attention_mask.assign(n * n, 0);
  std::vector<std::vector<std::uint32_t>> nbrs(n);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw InvalidInput("edge endpoint outside [0, n)");
    if (u == v) continue;
    nbrs[u].push_back(v);
    nbrs[v].push_back(u);
  }
  for (auto& nb : nbrs) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  g.gcn_propagation = Tensor(n, n);
  g.mean_neighbors = Tensor(n, n);
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i)
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(nbrs[i].size() + 1));
  for (std::size_t i = 0; i < n; ++i) {
    g.attention_mask[i * n + i] = 1;
    g.gcn_propagation(i, i) = inv_sqrt_deg[i] * inv_sqrt_deg[i];
    const double inv_deg = nbrs[i].empty() ? 0.0 : 1.0 / static_cast<double>(nbrs[i].size());
    for (std::uint32_t j : nbrs[i]) {
      g.attention_mask[i * n + j] = 1;
      g.gcn_propagation(i, j) = inv_sqrt_deg[i] * inv_sqrt_deg[j];
      g.mean_neighbors(i, j) = inv_deg;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Layers

namespace {

Var activate(const Var& x, Activation a) {
  switch (a) {
    case Activation::elu: return ad::elu(x);
    case Activation::relu: return ad::relu(x);
    case Activation::identity: return x;
  }
  return x;
}

}  // namespace

std::vector<Var> transform_views(const Var& x, const std::vector<ViewTransform>& transforms) {
  if (transforms.empty()) throw InvalidInput("transform_views: no transforms");
  const std::size_t out = transforms.front().weight.rows();
  std::vector<Var> views;
  views.reserve(transforms.size());
  for (const ViewTransform& t : transforms) {
    if (t.weight.rows() != out || t.bias.cols() != out || t.bias.rows() != 1) {
      throw InvalidInput("transform_views: transforms disagree on output dimension");
    }
    if (t.weight.cols() != x.cols()) {
      throw InvalidInput("transform_views: weight expects " + std::to_string(t.weight.cols()) +
                         " inputs, features have " + std::to_string(x.cols()));
    }
    views.push_back(ad::linear(x, t.weight, t.bias));
  }
  return views;
}

Var unify_views(const std::vector<Var>& views, const Var& weights) {
  if (views.empty()) throw InvalidInput("unify_views: no views");
  const std::size_t m = views.size();
  const bool scalar = weights.rows() == 1 && weights.cols() == m;
  const bool per_dim = weights.rows() == m && weights.cols() == views.front().cols();
  if (!scalar && !per_dim) {
    throw InvalidInput("unify_views: weights " + weights.value().shape_string() + " do not fit " +
                       std::to_string(m) + " views of width " +
                       std::to_string(views.front().cols()));
  }
  Var acc;
  for (std::size_t j = 0; j < m; ++j) {
    if (!views[j].value().same_shape(views.front().value())) {
      throw InvalidInput("unify_views: views differ in shape");
    }
    Var w = scalar ? ad::slice(weights, 0, 1, j, 1) : ad::slice(weights, j, 1, 0, weights.cols());
    Var term = ad::mul(views[j], w);
    acc = j == 0 ? term : ad::add(acc, term);
  }
  return acc;
}

Var gat_conv(const Var& x, const GraphStructure& graph, const GatConvParams& params, double slope,
             Activation activation, std::vector<Tensor>* attention_out) {
  const std::size_t n = x.rows();
  if (n != graph.num_nodes) throw InvalidInput("gat_conv: feature rows != graph nodes");
  const std::size_t out = params.weight.rows();
  const std::size_t heads = params.attention.rows();
  if (heads == 0 || out % heads != 0 || params.attention.cols() != 2 * (out / heads)) {
    throw InvalidInput("gat_conv: attention shape " + params.attention.value().shape_string() +
                       " does not match output dimension " + std::to_string(out));
  }
  const std::size_t dh = out / heads;
  Var projected = ad::matmul_nt(x, params.weight);  // rows are W x_i
  std::vector<Var> head_outputs;
  for (std::size_t k = 0; k < heads; ++k) {
    Var hk = heads == 1 ? projected : ad::slice(projected, 0, n, k * dh, dh);
    // a^T [W x_i || W x_j] = a_src . W x_i + a_dst . W x_j
    Var a_src = ad::slice(params.attention, k, 1, 0, dh);
    Var a_dst = ad::slice(params.attention, k, 1, dh, dh);
    Var src = ad::matmul_nt(hk, a_src);  // n x 1
    Var dst = ad::matmul_nt(a_dst, hk);  // 1 x n
    Var scores = ad::leaky_relu(ad::add(src, dst), slope);
    Var alpha = ad::masked_softmax(scores, graph.attention_mask);
    if (attention_out) attention_out->push_back(alpha.value());
    head_outputs.push_back(ad::matmul(alpha, hk));
  }
  Var agg = heads == 1 ? head_outputs.front() : ad::concat_cols(head_outputs);
  return activate(agg, activation);
}

Var fgat_submodule_forward(const Var& x, const GraphStructure& graph, const FgatSubmodule& sub,
                           const ModelConfig& config, const ForwardContext& ctx) {
  if (x.cols() != sub.linear_weight.rows() || sub.conv.weight.rows() != sub.linear_weight.cols()) {
    throw InvalidInput("fgat_submodule_forward: input width " + std::to_string(x.cols()) +
                       " does not match the residual path");
  }
  Var conv = gat_conv(x, graph, sub.conv, config.leaky_slope, config.attention_activation);
  Var f = ad::linear(conv, sub.linear_weight, sub.linear_bias);
  if (ctx.mode == ad::Mode::train && config.dropout > 0) {
    if (!ctx.rng) throw InvalidInput("fgat_submodule_forward: train mode needs an RNG");
    f = ad::dropout(f, config.dropout, ctx.mode, *ctx.rng, config.dropout_rescale);
  }
  return ad::layer_norm(ad::add(x, f), sub.gamma, sub.beta, config.norm_eps);
}

Var fgat_layer_forward(const Var& x, const GraphStructure& graph, const FgatSubmodule& first,
                       const FgatSubmodule& second, const ModelConfig& config,
                       const ForwardContext& ctx) {
  Var y = fgat_submodule_forward(x, graph, first, config, ctx);
  return fgat_submodule_forward(y, graph, second, config, ctx);
}

Var multi_view_readout(const std::vector<Var>& views, const MultiViewReadout& readout) {
  if (views.empty()) throw InvalidInput("multi_view_readout: no views");
  const std::size_t n = views.front().rows();
  const std::size_t d = views.front().cols();
  const std::size_t m = views.size();
  if (n == 0) throw InvalidInput("multi_view_readout: empty graph");
  if (readout.scoring.rows() != m || readout.scoring.cols() != d) {
    throw InvalidInput("multi_view_readout: scoring must be " + std::to_string(m) + "x" +
                       std::to_string(d));
  }
  if (readout.fusion.rows() != 1 || readout.fusion.cols() != m * d) {
    throw InvalidInput("multi_view_readout: fusion must be 1x" + std::to_string(m * d));
  }
  const ad::Mask all(n, 1);
  std::vector<Var> summaries;
  summaries.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!views[j].value().same_shape(views.front().value())) {
      throw InvalidInput("multi_view_readout: views differ in shape");
    }
    Var a = ad::slice(readout.scoring, j, 1, 0, d);
    Var scores = ad::matmul_nt(a, views[j]);  // 1 x n
    Var weights = ad::masked_softmax(scores, all);
    summaries.push_back(ad::matmul(weights, views[j]));
  }
  Var pooled = m == 1 ? summaries.front() : ad::concat_cols(summaries);
  return ad::mul(pooled, readout.fusion);
}

Var gcn_conv(const Var& x, const GraphStructure& graph, const Var& weight) {
  if (x.rows() != graph.num_nodes) throw InvalidInput("gcn_conv: feature rows != graph nodes");
  Var prop = x.tape()->constant(graph.gcn_propagation);
  return ad::relu(ad::matmul(prop, ad::matmul_nt(x, weight)));
}

Var sage_conv(const Var& x, const GraphStructure& graph, const Var& self_weight,
              const Var& neighbor_weight) {
  if (x.rows() != graph.num_nodes) throw InvalidInput("sage_conv: feature rows != graph nodes");
  Var mean_op = x.tape()->constant(graph.mean_neighbors);
  Var nb = ad::matmul(mean_op, x);
  return ad::relu(ad::add(ad::matmul_nt(x, self_weight), ad::matmul_nt(nb, neighbor_weight)));
}

// ---------------------------------------------------------------------------
// Whole model

BoundParams::BoundParams(ad::Tape& tape, const ModelParams& params, bool track_gradients)
    : params_(&params) {
  vars_.reserve(params.size());
  for (const NamedTensor& t : params)
    vars_.push_back(tape.leaf(t.value, track_gradients && t.trainable));
}

BoundParams::BoundParams(const ModelParams& params, std::vector<Var> vars)
    : params_(&params), vars_(std::move(vars)) {
  if (vars_.size() != params.size()) {
    throw InvalidInput("BoundParams: " + std::to_string(vars_.size()) + " vars for " +
                       std::to_string(params.size()) + " tensors");
  }
}

const Var& BoundParams::operator[](const std::string& name) const {
  return vars_[params_->index_of(name)];
}

namespace {

FgatSubmodule bind_submodule(const BoundParams& p, std::size_t layer, std::size_t sub) {
  const std::string pre = sub_prefix(layer, sub);
  return {{p[pre + "conv.weight"], p[pre + "conv.attention"]},
          p[pre + "linear.weight"],
          p[pre + "linear.bias"],
          p[pre + "norm.gamma"],
          p[pre + "norm.beta"]};
}

Var fgat_stack(const Var& x, const GraphStructure& gs, const BoundParams& p,
               const ModelConfig& c, const ForwardContext& ctx) {
  Var h = x;
  for (std::size_t l = 0; l < c.num_layers; ++l)
    h = fgat_layer_forward(h, gs, bind_submodule(p, l, 0), bind_submodule(p, l, 1), c, ctx);
  return h;
}

Var maybe_dropout(const Var& x, const ModelConfig& c, const ForwardContext& ctx) {
  if (ctx.mode != ad::Mode::train || c.dropout == 0) return x;
  if (!ctx.rng) throw InvalidInput("train mode needs an RNG");
  return ad::dropout(x, c.dropout, ctx.mode, *ctx.rng, c.dropout_rescale);
}

}  // namespace

Var classify_forward(ad::Tape& tape, const BoundParams& p, const GraphRecord& graph,
                     const ModelConfig& c, const ForwardContext& ctx) {
  if (graph.num_nodes() == 0) throw InvalidInput("classify_forward: empty graph");
  if (graph.features.cols() != c.input_dim) {
    throw InvalidInput("classify_forward: graph has " + std::to_string(graph.features.cols()) +
                       " features, model expects " + std::to_string(c.input_dim));
  }
  const GraphStructure gs = GraphStructure::from_edges(graph.num_nodes(), graph.edges);
  Var x = tape.constant(graph.features);
  const MultiViewReadout readout{p["readout.scoring"], p["readout.fusion"]};
  std::vector<Var> node_states;

  switch (c.kind) {
    case ModelKind::mfgat: {
      std::vector<ViewTransform> transforms;
      for (std::size_t j = 0; j < c.num_views; ++j) {
        const std::string pre = "view." + std::to_string(j) + ".";
        transforms.push_back({p[pre + "weight"], p[pre + "bias"]});
      }
      std::vector<Var> views = transform_views(x, transforms);
      if (c.unified_path) {
        Var h = fgat_stack(unify_views(views, p["view_agg.weight"]), gs, p, c, ctx);
        for (std::size_t j = 0; j < c.num_views; ++j) {
          const std::string pre = "proj." + std::to_string(j) + ".";
          node_states.push_back(ad::linear(h, p[pre + "weight"], p[pre + "bias"]));
        }
      } else {
        for (const Var& v : views) node_states.push_back(fgat_stack(v, gs, p, c, ctx));
      }
      break;
    }
    case ModelKind::fgat: {
      Var h = ad::linear(x, p["input.weight"], p["input.bias"]);
      node_states.push_back(fgat_stack(h, gs, p, c, ctx));
      break;
    }
    case ModelKind::gat: {
      Var h = x;
      for (std::size_t l = 0; l < c.num_layers; ++l) {
        const std::string pre = "gat." + std::to_string(l) + ".";
        h = gat_conv(h, gs, {p[pre + "conv.weight"], p[pre + "conv.attention"]}, c.leaky_slope,
                     c.attention_activation);
        h = maybe_dropout(h, c, ctx);
      }
      node_states.push_back(h);
      break;
    }
    case ModelKind::gcn: {
      Var h = x;
      for (std::size_t l = 0; l < c.num_layers; ++l)
        h = maybe_dropout(gcn_conv(h, gs, p["gcn." + std::to_string(l) + ".weight"]), c, ctx);
      node_states.push_back(h);
      break;
    }
    case ModelKind::sage: {
      Var h = x;
      for (std::size_t l = 0; l < c.num_layers; ++l) {
        const std::string pre = "sage." + std::to_string(l) + ".";
        h = maybe_dropout(sage_conv(h, gs, p[pre + "self_weight"], p[pre + "neighbor_weight"]), c,
                          ctx);
      }
      node_states.push_back(h);
      break;
    }
  }
  Var pooled = multi_view_readout(node_states, readout);
  return ad::linear(pooled, p["classifier.weight"], p["classifier.bias"]);
}

Tensor predict_logits(const ModelParams& params, const ModelConfig& config,
                      const GraphRecord& graph) {
  ad::Tape tape;
  BoundParams bound(tape, params, false);
  Var logits = classify_forward(tape, bound, graph, config, {ad::Mode::eval, nullptr});
  return logits.value();
}

std::size_t argmax_row(const Tensor& logits) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < logits.cols(); ++c)
    if (logits(0, c) > logits(0, best)) best = c;
  return best;
}

}  // namespace mfgat
