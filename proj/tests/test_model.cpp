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


#include <doctest.h>

#include <cmath>
#include <set>

#include "mfgat/error.hpp"
#include "mfgat/model.hpp"
#include "support.hpp"

using namespace mfgat;
using ad::Tape;
using ad::Var;
using testsupport::permute;
using testsupport::permute_rows;
using testsupport::random_graph;
using testsupport::random_permutation;
using testsupport::random_tensor;

namespace {

double elu(double v) { return v > 0 ? v : std::expm1(v); }
double leaky(double v, double s) { return v >= 0 ? v : s * v; }

// Graph attention written out per node pair: e_ij = LeakyReLU(a^T [Wx_i || Wx_j])
// over j in N(i) + {i}, softmax, weighted sum, ELU; heads concatenated.
Tensor reference_gat(const Tensor& x, const std::vector<Edge>& edges, const Tensor& w,
                     const Tensor& a, double slope) {
  const std::size_t n = x.rows(), out = w.rows(), heads = a.rows(), dh = out / heads;
  std::vector<std::set<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i) nb[i].insert(i);
  for (auto [u, v] : edges) {
    nb[u].insert(v);
    nb[v].insert(u);
  }
  Tensor wx(n, out);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < out; ++o)
      for (std::size_t k = 0; k < x.cols(); ++k) wx(i, o) += w(o, k) * x(i, k);
  Tensor y(n, out);
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> e;
      for (std::size_t j : nb[i]) {
        std::vector<double> cat;
        for (std::size_t c = 0; c < dh; ++c) cat.push_back(wx(i, h * dh + c));
        for (std::size_t c = 0; c < dh; ++c) cat.push_back(wx(j, h * dh + c));
        double s = 0.0;
        for (std::size_t c = 0; c < 2 * dh; ++c) s += a(h, c) * cat[c];
        e.push_back(leaky(s, slope));
      }
      double z = 0.0;
      for (double v : e) z += std::exp(v);
      std::size_t idx = 0;
      for (std::size_t j : nb[i]) {
        const double alpha = std::exp(e[idx++]) / z;
        for (std::size_t c = 0; c < dh; ++c) y(i, h * dh + c) += alpha * wx(j, h * dh + c);
      }
    }
  for (double& v : y.values()) v = elu(v);
  return y;
}

FgatSubmodule random_submodule(Tape& t, RngStream& rng, std::size_t d, std::size_t heads = 1) {
  return {{t.constant(random_tensor(rng, d, d)), t.constant(random_tensor(rng, heads, 2 * d / heads))},
          t.constant(random_tensor(rng, d, d)),
          t.constant(random_tensor(rng, 1, d)),
          t.constant(random_tensor(rng, 1, d, 0.5, 1.5)),
          t.constant(random_tensor(rng, 1, d))};
}

ModelConfig small_config(ModelKind kind, std::size_t views = 3) {
  ModelConfig c;
  c.kind = kind;
  c.input_dim = 4;
  c.num_views = views;
  c.hidden_dim = 6;
  c.num_layers = 2;
  c.num_classes = 3;
  return c;
}

// Puts every parameter away from its structured init so symmetry cannot hide bugs.
void jitter(ModelParams& p, RngStream& rng) {
  for (std::size_t i = 0; i < p.size(); ++i)
    for (double& v : p[i].value.values()) v += rng.uniform(-0.3, 0.3);
}

}  // namespace

TEST_CASE("transform_views examples") {
  Tape t;
  Var x = t.constant(Tensor{{1, 2}});
  auto one = transform_views(x, {{t.constant(Tensor{{0, 1}, {1, 0}}), t.constant(Tensor::row({1, 1}))}});
  CHECK(one[0].value() == Tensor{{3, 2}});

  auto id = transform_views(x, {{t.constant(Tensor::identity(2)), t.constant(Tensor::zeros(1, 2))}});
  CHECK(id[0].value() == x.value());

  RngStream rng(1);
  Var many = t.constant(random_tensor(rng, 4, 2));
  auto b_only = transform_views(many, {{t.constant(Tensor::zeros(3, 2)), t.constant(Tensor::row({7, 8, 9}))}});
  for (std::size_t r = 0; r < 4; ++r) CHECK(ad::slice(b_only[0], r, 1, 0, 3).value() == Tensor::row({7, 8, 9}));

  CHECK_THROWS_AS(transform_views(x, {{t.constant(Tensor::identity(2)), t.constant(Tensor::zeros(1, 2))},
                                      {t.constant(Tensor::identity(3)), t.constant(Tensor::zeros(1, 3))}}),
                  InvalidInput);
}

TEST_CASE("unify_views examples") {
  Tape t;
  Var v1 = t.constant(Tensor{{1, 2}});
  Var v2 = t.constant(Tensor{{3, 4}});
  CHECK(unify_views({v1, v2}, t.constant(Tensor::row({0.5, 2}))).value() == Tensor{{6.5, 9}});
  CHECK(unify_views({v1}, t.constant(Tensor::row({1}))).value() == v1.value());
  CHECK(unify_views({v2, v2}, t.constant(Tensor::row({0.25, 0.75}))).value() == v2.value());
  // Per-dimension weights: one row per view.
  CHECK(unify_views({v1, v2}, t.constant(Tensor{{1, 0}, {0, 1}})).value() == Tensor{{1, 4}});
  CHECK_THROWS_AS(unify_views({v1, v2}, t.constant(Tensor::row({1}))), InvalidInput);
}

TEST_CASE("gat_conv examples") {
  Tape t;
  const Var id = t.constant(Tensor::identity(2));

  SUBCASE("isolated node attends to itself") {
    const GraphStructure gs = GraphStructure::from_edges(1, {});
    std::vector<Tensor> att;
    Var y = gat_conv(t.constant(Tensor{{-0.5, 2}}), gs, {id, t.constant(Tensor::row({1, 2, 3, 4}))}, 0.2,
                     Activation::elu, &att);
    CHECK(att[0] == Tensor{{1}});
    CHECK(y.value() == Tensor{{std::expm1(-0.5), 2}});
  }
  SUBCASE("identical neighbors share attention") {
    const GraphStructure gs = GraphStructure::from_edges(3, {{0, 1}, {0, 2}});
    std::vector<Tensor> att;
    gat_conv(t.constant(Tensor{{0, 0}, {1, 1}, {1, 1}}), gs, {id, t.constant(Tensor::row({0.3, 0.1, 0.7, -0.2}))},
             0.2, Activation::elu, &att);
    CHECK(att[0](0, 1) == doctest::Approx(att[0](0, 2)).epsilon(1e-15));
    const GraphStructure pair = GraphStructure::from_edges(2, {{0, 1}});
    att.clear();
    gat_conv(t.constant(Tensor{{1, 1}, {1, 1}}), pair, {id, t.constant(Tensor::row({0.3, 0.1, 0.7, -0.2}))}, 0.2,
             Activation::elu, &att);
    CHECK(att[0](0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(att[0](0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("hand-evaluated scores") {
    // Node 0 = [0,0] (also its own neighbor), node 1 = [1,0]; a = [0,0,1,0]
    // scores LeakyReLU([0, 1]) = [0, 1], alpha = [1, e] / (1 + e).
    const GraphStructure gs = GraphStructure::from_edges(2, {{0, 1}});
    std::vector<Tensor> att;
    gat_conv(t.constant(Tensor{{0, 0}, {1, 0}}), gs, {id, t.constant(Tensor::row({0, 0, 1, 0}))}, 0.2,
             Activation::elu, &att);
    const double e = std::exp(1.0);
    CHECK(att[0](0, 0) == doctest::Approx(1.0 / (1.0 + e)).epsilon(1e-15));
    CHECK(att[0](0, 1) == doctest::Approx(e / (1.0 + e)).epsilon(1e-15));
    CHECK(att[0](0, 0) == doctest::Approx(0.26894).epsilon(1e-4));
    CHECK(att[0](0, 1) == doctest::Approx(0.73106).epsilon(1e-4));
  }
}

TEST_CASE("gat_conv matches the pairwise formula") {
  RngStream rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(8);
    const std::size_t m = rng.below(n * (n - 1) / 2 + 1);
    const std::size_t heads = 1 + rng.below(3);
    const GraphRecord g = random_graph(rng, n, m, 3);
    const Tensor w = random_tensor(rng, 2 * heads, 3);
    const Tensor a = random_tensor(rng, heads, 4);
    Tape t;
    std::vector<Tensor> att;
    Var y = gat_conv(t.constant(g.features), GraphStructure::from_edges(n, g.edges),
                     {t.constant(w), t.constant(a)}, 0.2, Activation::elu, &att);
    CHECK(max_abs_diff(y.value(), reference_gat(g.features, g.edges, w, a, 0.2)) < 1e-12);
    for (const Tensor& alpha : att)
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += alpha(i, j);
        CHECK(std::abs(s - 1.0) <= 1e-12);
      }
  }
}

TEST_CASE("fgat sub-module and layer") {
  RngStream rng(3);
  Tape t;
  const GraphRecord g = random_graph(rng, 5, 6, 8);
  const GraphStructure gs = GraphStructure::from_edges(5, g.edges);
  ModelConfig cfg;
  cfg.hidden_dim = 8;
  Var x = t.constant(g.features);
  FgatSubmodule a = random_submodule(t, rng, 8), b = random_submodule(t, rng, 8);

  Var y = fgat_submodule_forward(x, gs, a, cfg, {});
  CHECK(y.rows() == 5);
  CHECK(y.cols() == 8);
  CHECK(fgat_layer_forward(x, gs, a, b, cfg, {}).value().cols() == 8);
  CHECK(fgat_submodule_forward(x, gs, a, cfg, {}).value() == y.value());

  FgatSubmodule zero_f = a;
  zero_f.linear_weight = t.constant(Tensor::zeros(8, 8));
  zero_f.linear_bias = t.constant(Tensor::zeros(1, 8));
  zero_f.gamma = t.constant(Tensor::ones(1, 8));
  zero_f.beta = t.constant(Tensor::zeros(1, 8));
  const Tensor ln = ad::layer_norm(x, zero_f.gamma, zero_f.beta, cfg.norm_eps).value();
  CHECK(max_abs_diff(fgat_submodule_forward(x, gs, zero_f, cfg, {}).value(), ln) == 0.0);

  RngStream drop(1);
  CHECK_THROWS_AS(fgat_submodule_forward(x, gs, a, cfg, {ad::Mode::train, nullptr}), InvalidInput);
  CHECK(fgat_submodule_forward(x, gs, a, cfg, {ad::Mode::train, &drop}).value().all_finite());
}

TEST_CASE("multi_view_readout examples") {
  Tape t;
  Var single = t.constant(Tensor::row({2, -1}));
  Var other = t.constant(Tensor::row({0.5, 4}));
  Var y = multi_view_readout({single, other}, {t.constant(Tensor{{0.3, -0.2}, {1, 1}}),
                                               t.constant(Tensor::row({1, 2, 3, 4}))});
  CHECK(y.value() == Tensor::row({2, -2, 1.5, 16}));

  Var two_nodes = t.constant(Tensor{{1}, {3}});
  CHECK(multi_view_readout({two_nodes}, {t.constant(Tensor{{0}}), t.constant(Tensor::row({2}))}).value() ==
        Tensor{{4}});
}

TEST_CASE("gcn_conv examples") {
  Tape t;
  RngStream rng(2);
  const Tensor w = random_tensor(rng, 3, 2);
  Var wv = t.constant(w);

  Var x1 = t.constant(Tensor{{0.4, -0.7}});
  CHECK(max_abs_diff(gcn_conv(x1, GraphStructure::from_edges(1, {}), wv).value(),
                     ad::relu(ad::matmul_nt(x1, wv)).value()) < 1e-15);

  // Two connected nodes: every entry of D^-1/2 (A+I) D^-1/2 is 1/2.
  const GraphStructure pair = GraphStructure::from_edges(2, {{0, 1}});
  CHECK(max_abs_diff(pair.gcn_propagation, Tensor{{0.5, 0.5}, {0.5, 0.5}}) < 1e-15);
  Var x2 = t.constant(Tensor{{1, 2}, {3, -1}});
  const Tensor avg = ad::relu(ad::matmul_nt(t.constant(Tensor{{2, 0.5}}), wv)).value();
  const Tensor y = gcn_conv(x2, pair, wv).value();
  CHECK(max_abs_diff(ad::slice(t.constant(y), 0, 1, 0, 3).value(), avg) < 1e-15);
  CHECK(max_abs_diff(ad::slice(t.constant(y), 1, 1, 0, 3).value(), avg) < 1e-15);

  Var pos = t.constant(Tensor{{1, 0}, {0, 2}});
  for (double v : gcn_conv(pos, pair, t.constant(Tensor::identity(2))).value().values()) CHECK(v >= 0.0);
}

TEST_CASE("sage_conv examples") {
  Tape t;
  Var x = t.constant(Tensor{{1, -2}});
  Var w_self = t.constant(Tensor{{2, 0}, {0, 3}});
  Var w_nb = t.constant(Tensor{{5, 5}, {5, 5}});
  CHECK(sage_conv(x, GraphStructure::from_edges(1, {}), w_self, w_nb).value() == Tensor{{2, 0}});

  Var same = t.constant(Tensor{{0.6, -0.4}, {0.6, -0.4}, {0.6, -0.4}});
  Var half = t.constant(Tensor{{0.5, 0}, {0, 0.5}});
  CHECK(max_abs_diff(sage_conv(same, GraphStructure::from_edges(3, {{0, 1}, {0, 2}, {1, 2}}), half, half).value(),
                     Tensor{{0.6, 0}, {0.6, 0}, {0.6, 0}}) < 1e-15);

  Var star = t.constant(Tensor{{9, 9}, {1, 0}, {0, 1}});
  Tensor y = sage_conv(star, GraphStructure::from_edges(3, {{0, 1}, {0, 2}}), t.constant(Tensor::zeros(2, 2)),
                       t.constant(Tensor::identity(2)))
                 .value();
  CHECK(y(0, 0) == 0.5);
  CHECK(y(0, 1) == 0.5);
}

TEST_CASE("parameter count") {
  ModelConfig c;
  c.input_dim = 3;
  c.num_views = 3;
  c.hidden_dim = 64;
  c.num_layers = 2;
  c.num_classes = 2;
  // Shapes by hand: 3 views (64x3 + 64) = 768, view weights 3,
  // 2 layers x 2 sub-modules x (64x64 + 2x64 + 64x64 + 64 + 64 + 64) = 34048,
  // 3 projections (64x64 + 64) = 12480, readout 3x64 + 192 = 384,
  // classifier 2x192 + 2 = 386.
  CHECK(768 + 3 + 34048 + 12480 + 384 + 386 == 48069);
  RngStream rng(0);
  const ModelParams p = build_model(c, rng);
  CHECK(p.scalar_count() == 48069);
  CHECK(expected_parameter_count(c) == 48069);

  RngStream pick(5);
  for (int trial = 0; trial < 60; ++trial) {
    ModelConfig r;
    r.kind = static_cast<ModelKind>(pick.below(5));
    r.input_dim = 1 + pick.below(6);
    r.num_views = 1 + pick.below(5);
    r.num_heads = 1 + pick.below(2);
    r.hidden_dim = r.num_heads * (1 + pick.below(5));
    r.num_layers = 1 + pick.below(3);
    r.num_classes = 2 + pick.below(3);
    r.unified_path = pick.bernoulli(0.5);
    r.view_weighting = pick.bernoulli(0.5) ? ViewWeighting::scalar : ViewWeighting::per_dimension;
    RngStream init(trial);
    const ModelParams params = build_model(r, init);
    std::size_t enumerated = 0;
    for (const NamedTensor& t : params) enumerated += t.value.rows() * t.value.cols();
    CHECK(enumerated == expected_parameter_count(r));
  }
}

TEST_CASE("initialization") {
  ModelConfig c = small_config(ModelKind::mfgat);
  RngStream a(9), b(9);
  const ModelParams pa = build_model(c, a);
  CHECK(pa == build_model(c, b));
  CHECK(pa.get("view_agg.weight") == Tensor::ones(1, 3));
  CHECK(pa.get("readout.scoring") == Tensor::zeros(3, 6));
  CHECK(pa.get("readout.fusion") == Tensor::ones(1, 18));
  CHECK(pa.get("proj.1.weight") == Tensor::identity(6));
  CHECK(pa.get("fgat.0.1.norm.gamma") == Tensor::ones(1, 6));
  CHECK(pa.get("fgat.1.0.linear.bias") == Tensor::zeros(1, 6));
  const double limit = std::sqrt(6.0 / (4 + 6));
  for (double v : pa.get("view.0.weight").values()) CHECK(std::abs(v) <= limit);

  c.num_views = 1;
  RngStream one(1);
  CHECK(build_model(c, one).get("view_agg.weight").cols() == 1);
  c.view_weighting = ViewWeighting::per_dimension;
  c.num_views = 2;
  RngStream two(1);
  CHECK(build_model(c, two).get("view_agg.weight") == Tensor::ones(2, 6));
}

TEST_CASE("config validation names the field") {
  auto message = [](ModelConfig c) {
    try {
      validate(c);
    } catch (const InvalidInput& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  ModelConfig c = small_config(ModelKind::mfgat);
  CHECK(message(c).empty());
  ModelConfig bad = c;
  bad.num_views = 0;
  CHECK(message(bad).find("views") != std::string::npos);
  bad = c;
  bad.dropout = 1.0;
  CHECK(message(bad).find("dropout") != std::string::npos);
  bad = c;
  bad.hidden_dim = 0;
  CHECK(message(bad).find("hidden") != std::string::npos);
  bad = c;
  bad.num_layers = 0;
  CHECK(message(bad).find("layers") != std::string::npos);
  bad = c;
  bad.num_heads = 4;  // 6 % 4 != 0
  CHECK(message(bad).find("heads") != std::string::npos);
  RngStream rng(0);
  CHECK_THROWS_AS(build_model(bad, rng), InvalidInput);
}

TEST_CASE("config key=value round trip") {
  ModelConfig c = small_config(ModelKind::sage, 5);
  c.dropout = 0.35;
  c.unified_path = false;
  c.view_weighting = ViewWeighting::per_dimension;
  c.attention_activation = Activation::relu;
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : to_key_values(c)) kv[k] = v;
  ModelConfig back;
  apply_key_values(back, kv);
  CHECK(to_key_values(back) == to_key_values(c));
  CHECK_THROWS_AS(apply_key_values(back, {{"model", "transformer"}}), InvalidInput);
  CHECK_THROWS_AS(apply_key_values(back, {{"hidden", "x"}}), InvalidInput);
}

TEST_CASE("classify_forward basics") {
  RngStream rng(12);
  for (ModelKind kind : {ModelKind::mfgat, ModelKind::fgat, ModelKind::gat, ModelKind::gcn, ModelKind::sage}) {
    CAPTURE(to_string(kind));
    const ModelConfig c = small_config(kind);
    ModelParams p = build_model(c, rng);
    jitter(p, rng);
    const GraphRecord g = random_graph(rng, 7, 9, 4);
    const Tensor logits = predict_logits(p, c, g);
    CHECK(logits.rows() == 1);
    CHECK(logits.cols() == 3);
    CHECK(logits.all_finite());
    CHECK(predict_logits(p, c, g) == logits);

    Tape t;
    const double total = ad::masked_softmax(t.constant(logits), ad::Mask(3, 1)).value().sum();
    CHECK(std::abs(total - 1.0) < 1e-15);

    GraphRecord wrong = g;
    wrong.features = Tensor(7, 5);
    CHECK_THROWS_AS(predict_logits(p, c, wrong), InvalidInput);
  }
  CHECK(argmax_row(Tensor::row({0.3, 0.9, 0.9})) == 1);
  CHECK(argmax_row(Tensor::row({2.0, 2.0})) == 0);
}

TEST_CASE("alternative wirings run") {
  RngStream rng(4);
  ModelConfig c = small_config(ModelKind::mfgat);
  const GraphRecord g = random_graph(rng, 6, 7, 4);
  for (bool unified : {true, false})
    for (ViewWeighting w : {ViewWeighting::scalar, ViewWeighting::per_dimension}) {
      c.unified_path = unified;
      c.view_weighting = w;
      ModelParams p = build_model(c, rng);
      CHECK(p.scalar_count() == expected_parameter_count(c));
      CHECK(predict_logits(p, c, g).all_finite());
    }
}

TEST_CASE("permutation equivariance and invariance") {
  RngStream rng(2024);
  const ModelConfig cfg = small_config(ModelKind::mfgat);
  ModelParams params = build_model(cfg, rng);
  jitter(params, rng);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.below(8);
    const std::size_t m = rng.below(n * (n - 1) / 2 + 1);
    GraphRecord g = random_graph(rng, n, m, 4);
    const auto perm = random_permutation(rng, n);
    const GraphRecord pg = permute(g, perm);
    const GraphStructure gs = GraphStructure::from_edges(n, g.edges);
    const GraphStructure pgs = GraphStructure::from_edges(n, pg.edges);

    Tape t;
    const Tensor w = random_tensor(rng, 6, 4), a = random_tensor(rng, 2, 6);
    const GatConvParams conv{t.constant(w), t.constant(a)};
    const Tensor y = gat_conv(t.constant(g.features), gs, conv, 0.2, Activation::elu).value();
    const Tensor py = gat_conv(t.constant(pg.features), pgs, conv, 0.2, Activation::elu).value();
    CHECK(max_abs_diff(py, permute_rows(y, perm)) <= 1e-9);

    const Tensor h = random_tensor(rng, n, 6);
    FgatSubmodule s1 = random_submodule(t, rng, 6), s2 = random_submodule(t, rng, 6);
    const Tensor ly = fgat_layer_forward(t.constant(h), gs, s1, s2, cfg, {}).value();
    const Tensor lpy = fgat_layer_forward(t.constant(permute_rows(h, perm)), pgs, s1, s2, cfg, {}).value();
    CHECK(max_abs_diff(lpy, permute_rows(ly, perm)) <= 1e-9);

    const MultiViewReadout ro{t.constant(random_tensor(rng, 2, 6)), t.constant(random_tensor(rng, 1, 12))};
    const Tensor h2 = random_tensor(rng, n, 6);
    const Tensor r = multi_view_readout({t.constant(h), t.constant(h2)}, ro).value();
    const Tensor pr =
        multi_view_readout({t.constant(permute_rows(h, perm)), t.constant(permute_rows(h2, perm))}, ro).value();
    CHECK(max_abs_diff(r, pr) <= 1e-9);

    CHECK(max_abs_diff(predict_logits(params, cfg, g), predict_logits(params, cfg, pg)) <= 1e-9);
  }
}

TEST_CASE("receptive field of two FGAT layers on a path") {
  // Each layer holds two attention hops, so two layers see 4 hops.
  RngStream rng(8);
  std::vector<Edge> path;
  for (std::uint32_t i = 0; i + 1 < 9; ++i) path.push_back({i, i + 1});
  const GraphStructure gs = GraphStructure::from_edges(9, path);
  ModelConfig cfg;
  cfg.hidden_dim = 4;
  Tape t;
  std::vector<FgatSubmodule> subs;
  for (int k = 0; k < 4; ++k) subs.push_back(random_submodule(t, rng, 4));
  auto run = [&](const Tensor& x) {
    Var h = t.constant(x);
    h = fgat_layer_forward(h, gs, subs[0], subs[1], cfg, {});
    return fgat_layer_forward(h, gs, subs[2], subs[3], cfg, {}).value();
  };
  const Tensor x = random_tensor(rng, 9, 4);
  Tensor bumped = x;
  bumped(0, 1) += 0.75;
  const Tensor y = run(x), yb = run(bumped);
  for (std::size_t v = 0; v < 9; ++v) {
    double diff = 0.0;
    for (std::size_t c = 0; c < 4; ++c) diff = std::max(diff, std::abs(y(v, c) - yb(v, c)));
    CAPTURE(v);
    if (v <= 4) CHECK(diff > 0.0);
    else CHECK(diff == 0.0);
  }
}

TEST_CASE("single-view MFGAT with identity projection equals FGAT") {
  RngStream rng(77);
  ModelConfig m = small_config(ModelKind::mfgat, 1);
  ModelConfig f = small_config(ModelKind::fgat);
  ModelParams mp = build_model(m, rng);
  jitter(mp, rng);
  mp.get("view_agg.weight") = Tensor::ones(1, 1);
  mp.get("proj.0.weight") = Tensor::identity(6);
  mp.get("proj.0.bias") = Tensor::zeros(1, 6);
  mp.set_trainable("proj.0.weight", false);
  mp.set_trainable("proj.0.bias", false);

  ModelParams fp = build_model(f, rng);
  for (const NamedTensor& t : fp) {
    std::string src = t.name;
    if (src.rfind("input.", 0) == 0) src = "view.0." + src.substr(6);
    fp.get(t.name) = mp.get(src);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(10);
    const GraphRecord g = random_graph(rng, n, rng.below(n * (n - 1) / 2 + 1), 4);
    CHECK(predict_logits(mp, m, g) == predict_logits(fp, f, g));
  }
}

TEST_CASE("graph structure helpers") {
  const GraphStructure gs = GraphStructure::from_edges(3, {{0, 1}});
  CHECK(gs.attention_mask == ad::Mask{1, 1, 0, 1, 1, 0, 0, 0, 1});
  CHECK(gs.mean_neighbors == Tensor{{0, 1, 0}, {1, 0, 0}, {0, 0, 0}});
  CHECK(gs.gcn_propagation(2, 2) == 1.0);
  CHECK_THROWS_AS(GraphStructure::from_edges(2, {{0, 2}}), InvalidInput);
}
