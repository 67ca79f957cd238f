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


#include "mfgat/gradcheck_suite.hpp"

#include <algorithm>
#include <memory>
#include <set>

#include "mfgat/model.hpp"

namespace mfgat {

using ad::Tape;
using ad::Var;

namespace {

// Entries in +-[0.1, 1]: far enough from 0 that relu/leaky_relu kinks never
// fall inside a finite-difference step.
Tensor away_from_zero(RngStream& rng, std::size_t r, std::size_t c) {
  Tensor t(r, c);
  for (double& v : t.values()) {
    const double mag = rng.uniform(0.1, 1.0);
    v = rng.bernoulli(0.5) ? mag : -mag;
  }
  return t;
}

Tensor uniform(RngStream& rng, std::size_t r, std::size_t c, double lo, double hi) {
  Tensor t(r, c);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Scalarizes a node by a fixed random weighting so every output entry carries
// a distinct gradient.
Var weighted_sum(const Var& y, const Tensor& weights) {
  return ad::sum(ad::mul(y, y.tape()->constant(weights)));
}

GradcheckCase primitive(std::string name, std::vector<Tensor> params, const Tensor& weights,
                        std::function<Var(Tape&, const std::vector<Var>&)> op) {
  GradcheckCase c;
  c.name = std::move(name);
  c.threshold = kPrimitiveThreshold;
  c.params = std::move(params);
  c.fn = [op = std::move(op), weights](Tape& t, const std::vector<Var>& p) {
    return weighted_sum(op(t, p), weights);
  };
  return c;
}

GraphRecord random_graph(RngStream& rng, std::size_t nodes, std::size_t edges, std::size_t dim) {
  GraphRecord g;
  g.features = uniform(rng, nodes, dim, -1.0, 1.0);
  std::set<Edge> chosen;
  while (chosen.size() < edges) {
    auto a = static_cast<std::uint32_t>(rng.below(nodes));
    auto b = static_cast<std::uint32_t>(rng.below(nodes));
    if (a == b) continue;
    chosen.insert({std::min(a, b), std::max(a, b)});
  }
  g.edges.assign(chosen.begin(), chosen.end());
  g.node_labels.assign(nodes, 0);
  return g;
}

}  // namespace

std::vector<GradcheckCase> default_gradcheck_cases(std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<GradcheckCase> cases;
  auto R = [&](std::size_t r, std::size_t c) { return uniform(rng, r, c, -1.0, 1.0); };
  auto X = [&](std::size_t r, std::size_t c) { return away_from_zero(rng, r, c); };

  cases.push_back(primitive("matmul", {X(3, 4), X(4, 2)}, R(3, 2),
                            [](Tape&, auto& p) { return ad::matmul(p[0], p[1]); }));
  cases.push_back(primitive("matmul_nt", {X(3, 4), X(2, 4)}, R(3, 2),
                            [](Tape&, auto& p) { return ad::matmul_nt(p[0], p[1]); }));
  cases.push_back(primitive("transpose", {X(3, 4)}, R(4, 3),
                            [](Tape&, auto& p) { return ad::transpose(p[0]); }));
  cases.push_back(primitive("add", {X(3, 4), X(3, 4)}, R(3, 4),
                            [](Tape&, auto& p) { return ad::add(p[0], p[1]); }));
  cases.push_back(primitive("add_broadcast", {X(3, 1), X(1, 4)}, R(3, 4),
                            [](Tape&, auto& p) { return ad::add(p[0], p[1]); }));
  cases.push_back(primitive("sub_broadcast", {X(3, 4), X(1, 4)}, R(3, 4),
                            [](Tape&, auto& p) { return ad::sub(p[0], p[1]); }));
  cases.push_back(primitive("mul", {X(3, 4), X(3, 4)}, R(3, 4),
                            [](Tape&, auto& p) { return ad::mul(p[0], p[1]); }));
  cases.push_back(primitive("mul_broadcast", {X(3, 4), X(3, 1)}, R(3, 4),
                            [](Tape&, auto& p) { return ad::mul(p[0], p[1]); }));
  cases.push_back(primitive("scale", {X(3, 4)}, R(3, 4),
                            [](Tape&, auto& p) { return ad::scale(p[0], -1.7); }));
  cases.push_back(primitive("linear", {X(3, 4), X(5, 4), X(1, 5)}, R(3, 5),
                            [](Tape&, auto& p) { return ad::linear(p[0], p[1], p[2]); }));
  cases.push_back(primitive("leaky_relu", {X(3, 4)}, R(3, 4),
                            [](Tape&, auto& p) { return ad::leaky_relu(p[0], 0.2); }));
  cases.push_back(primitive("relu", {X(3, 4)}, R(3, 4),
                            [](Tape&, auto& p) { return ad::relu(p[0]); }));
  cases.push_back(primitive("elu", {X(3, 4)}, R(3, 4),
                            [](Tape&, auto& p) { return ad::elu(p[0]); }));

  ad::Mask mask(4 * 5, 0);
  for (std::size_t r = 0; r < 4; ++r) {
    mask[r * 5 + r] = 1;
    for (std::size_t c = 0; c < 5; ++c)
      if (rng.bernoulli(0.5)) mask[r * 5 + c] = 1;
  }
  cases.push_back(primitive("masked_softmax", {X(4, 5)}, R(4, 5),
                            [mask](Tape&, auto& p) { return ad::masked_softmax(p[0], mask); }));

  cases.push_back(primitive("layer_norm", {X(3, 5), X(1, 5), X(1, 5)}, R(3, 5),
                            [](Tape&, auto& p) { return ad::layer_norm(p[0], p[1], p[2], 1e-5); }));
  cases.push_back(primitive("dropout", {X(4, 5)}, R(4, 5), [](Tape&, auto& p) {
    RngStream local(99);  // same mask on every evaluation
    return ad::dropout(p[0], 0.3, ad::Mode::train, local);
  }));
  cases.push_back(primitive("cross_entropy", {X(1, 4)}, R(1, 1),
                            [](Tape&, auto& p) { return ad::cross_entropy(p[0], 2); }));
  cases.push_back(primitive("concat_cols", {X(3, 2), X(3, 3)}, R(3, 5),
                            [](Tape&, auto& p) { return ad::concat_cols({p[0], p[1]}); }));
  cases.push_back(primitive("concat_rows", {X(2, 3), X(1, 3)}, R(3, 3),
                            [](Tape&, auto& p) { return ad::concat_rows({p[0], p[1]}); }));
  cases.push_back(primitive("slice", {X(4, 5)}, R(2, 3),
                            [](Tape&, auto& p) { return ad::slice(p[0], 1, 2, 2, 3); }));
  cases.push_back(primitive("sum", {X(3, 4)}, R(1, 1),
                            [](Tape&, auto& p) { return ad::sum(p[0]); }));
  cases.push_back(primitive("mean", {X(3, 4)}, R(1, 1),
                            [](Tape&, auto& p) { return ad::mean(p[0]); }));
  cases.push_back(primitive("row_sum", {X(3, 4)}, R(3, 1),
                            [](Tape&, auto& p) { return ad::row_sum(p[0]); }));

  // Composite layers on a small random graph.
  const auto g = std::make_shared<GraphRecord>(random_graph(rng, 6, 8, 4));
  const auto gs = std::make_shared<GraphStructure>(
      GraphStructure::from_edges(g->num_nodes(), g->edges));
  auto composite = [&](std::string name, std::vector<Tensor> params, const Tensor& weights,
                       std::function<Var(Tape&, const std::vector<Var>&)> op) {
    GradcheckCase c = primitive(std::move(name), std::move(params), weights, std::move(op));
    c.threshold = kEndToEndThreshold;
    return c;
  };

  cases.push_back(composite("gat_conv", {X(6, 4), X(6, 4), X(2, 6)}, R(6, 6),
                            [gs](Tape&, auto& p) {
                              return gat_conv(p[0], *gs, {p[1], p[2]}, 0.2, Activation::elu);
                            }));
  ModelConfig sub_cfg;
  sub_cfg.hidden_dim = 4;
  sub_cfg.dropout = 0.2;
  cases.push_back(composite(
      "fgat_submodule", {X(6, 4), X(4, 4), X(1, 8), X(4, 4), X(1, 4), X(1, 4), X(1, 4)}, R(6, 4),
      [gs, sub_cfg](Tape&, auto& p) {
        RngStream local(5);
        FgatSubmodule sub{{p[1], p[2]}, p[3], p[4], p[5], p[6]};
        return fgat_submodule_forward(p[0], *gs, sub, sub_cfg, {ad::Mode::train, &local});
      }));
  cases.push_back(composite("multi_view_readout", {X(6, 4), X(6, 4), X(2, 4), X(1, 8)}, R(1, 8),
                            [](Tape&, auto& p) {
                              return multi_view_readout({p[0], p[1]}, {p[2], p[3]});
                            }));
  cases.push_back(composite("gcn_conv", {X(6, 4), X(5, 4)}, R(6, 5),
                            [gs](Tape&, auto& p) { return gcn_conv(p[0], *gs, p[1]); }));
  cases.push_back(composite("sage_conv", {X(6, 4), X(5, 4), X(5, 4)}, R(6, 5),
                            [gs](Tape&, auto& p) { return sage_conv(p[0], *gs, p[1], p[2]); }));

  // Whole model: cross-entropy of MFGAT logits, dropout active.
  ModelConfig cfg;
  cfg.input_dim = 4;
  cfg.num_views = 3;
  cfg.hidden_dim = 6;
  cfg.num_layers = 2;
  cfg.num_heads = 2;
  cfg.num_classes = 3;
  cfg.dropout = 0.1;
  g->label = 1;
  RngStream init = rng.child(1);
  auto model = std::make_shared<ModelParams>(build_model(cfg, init));
  GradcheckCase e2e;
  e2e.name = "mfgat_end_to_end";
  e2e.threshold = kEndToEndThreshold;
  for (const NamedTensor& t : *model) {
    Tensor v = t.value;
    for (double& x : v.values()) x += rng.uniform(-0.3, 0.3);  // leave the init's symmetric point
    e2e.params.push_back(std::move(v));
  }
  e2e.fn = [model, g, cfg](Tape& tape, const std::vector<Var>& p) {
    BoundParams bound(*model, p);
    RngStream local(11);
    Var logits = classify_forward(tape, bound, *g, cfg, {ad::Mode::train, &local});
    return ad::cross_entropy(logits, g->label);
  };
  cases.push_back(std::move(e2e));
  return cases;
}

GradcheckRow run_gradcheck_case(const GradcheckCase& c, double h) {
  const ad::GradCheckResult r = ad::grad_check(c.fn, c.params, h);
  return {c.name, r.max_rel_error, c.threshold, r.max_rel_error < c.threshold};
}

std::vector<GradcheckRow> run_gradcheck(const std::vector<GradcheckCase>& cases, double h) {
  std::vector<GradcheckRow> rows;
  rows.reserve(cases.size());
  for (const GradcheckCase& c : cases) rows.push_back(run_gradcheck_case(c, h));
  return rows;
}

}  // namespace mfgat
