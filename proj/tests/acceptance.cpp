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


// Acceptance checks, one per criterion. Each prints a single PASS/FAIL/SKIP
// line. Exit status: 0 pass, 1 fail, 77 skip (ctest SKIP_RETURN_CODE).
//
// Criteria 1, 4, 5 and 6 read the public benchmark files from
// $MFGAT_DATA_DIR/<NAME>/<NAME>_*.txt and skip when the variable is unset.
// MFGAT_ACCEPTANCE_REDUCED=1 runs 5 and 6 at 50 epochs with the accuracy
// floors lowered by 0.03.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "CLI11.hpp"
#include "mfgat/cli.hpp"
#include "mfgat/gradcheck_suite.hpp"
#include "mfgat/training.hpp"
#include "support.hpp"

using namespace mfgat;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Pinned targets and tolerances

struct TableRow {
  const char* name;
  std::size_t graphs;
  std::size_t feature_dim;
  double avg_nodes;
  double avg_edges;
};
constexpr TableRow kTable[] = {
    {"PROTEINS", 1113, 3, 39.06, 72.82},
    {"NCI1", 4110, 37, 29.87, 32.30},
    {"Mutagenicity", 4337, 14, 30.32, 30.77},
};
constexpr double kStatsTol = 0.01;
constexpr double kStatsSeconds = 30.0;

constexpr double kPrimitiveTol = 1e-6;
constexpr double kEndToEndTol = 1e-4;
constexpr double kGradcheckStep = 1e-5;
constexpr double kGradcheckSeconds = 60.0;

constexpr double kSoftmaxTol = 1e-12;
constexpr double kPermutationTol = 1e-9;
constexpr int kPermutations = 100;

constexpr std::size_t kOverfitGraphs = 20;
constexpr std::size_t kOverfitEpochs = 200;
constexpr double kOverfitLr = 0.01;
constexpr double kOverfitSeconds = 120.0;

struct Floor {
  const char* name;
  double min_accuracy;
};
constexpr Floor kFloors[] = {{"PROTEINS", 0.70}, {"NCI1", 0.63}, {"Mutagenicity", 0.74}};
constexpr double kReducedSlack = 0.03;
constexpr std::size_t kReducedEpochs = 50;
constexpr double kRunSeconds = 30.0 * 60.0;
constexpr std::uint64_t kSeeds[] = {0, 1, 2, 3, 4};

constexpr std::size_t kAblationViews[] = {1, 3, 5, 10};
constexpr int kAblationWins = 2;

constexpr int kSkip = 77;

// ---------------------------------------------------------------------------

struct Outcome {
  enum Status { pass, fail, skip } status;
  std::string detail;
};

std::string num(double v, const char* fmt = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::optional<fs::path> data_dir() {
  const char* env = std::getenv("MFGAT_DATA_DIR");
  if (env == nullptr || *env == '\0') return std::nullopt;
  return fs::path(env);
}

bool reduced_mode() {
  const char* env = std::getenv("MFGAT_ACCEPTANCE_REDUCED");
  return env != nullptr && std::string(env) == "1";
}

Dataset load(const fs::path& root, const std::string& name) {
  return parse_tudataset(root / name, name);
}

Outcome skip_without_data() {
  return {Outcome::skip, "MFGAT_DATA_DIR is not set; benchmark files unavailable"};
}

// ---------------------------------------------------------------------------

Outcome dataset_fidelity() {
  const auto root = data_dir();
  if (!root) return skip_without_data();
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  for (const TableRow& want : kTable) {
    const DatasetStats s = dataset_stats(load(*root, want.name));
    const bool row_ok = s.num_graphs == want.graphs && s.feature_dim == want.feature_dim &&
                        std::abs(s.avg_nodes - want.avg_nodes) <= kStatsTol &&
                        std::abs(s.avg_edges - want.avg_edges) <= kStatsTol;
    ok = ok && row_ok;
    detail += std::string(want.name) + " " + std::to_string(s.num_graphs) + "/" +
              std::to_string(s.feature_dim) + "/" + num(s.avg_nodes, "%.2f") + "/" +
              num(s.avg_edges, "%.2f") + (row_ok ? "" : " MISMATCH") + "; ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < kStatsSeconds;
  return {ok ? Outcome::pass : Outcome::fail,
          detail + num(secs, "%.1f") + " s (limit " + num(kStatsSeconds) + " s, tol " + num(kStatsTol) + ")"};
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_gradcheck(default_gradcheck_cases(), kGradcheckStep);
  double worst_primitive = 0.0, end_to_end = 0.0;
  std::string failed;
  for (const GradcheckRow& r : rows) {
    const bool is_e2e = r.name == "mfgat_end_to_end";
    const double tol = is_e2e ? kEndToEndTol : kPrimitiveTol;
    (is_e2e ? end_to_end : worst_primitive) = std::max(is_e2e ? end_to_end : worst_primitive, r.max_rel_error);
    if (!(r.max_rel_error < tol)) failed += " " + r.name;
  }
  const double secs = seconds_since(t0);
  const bool ok = failed.empty() && secs < kGradcheckSeconds;
  return {ok ? Outcome::pass : Outcome::fail,
          std::to_string(rows.size()) + " cases, worst op " + num(worst_primitive) + " (tol " +
              num(kPrimitiveTol) + "), end-to-end " + num(end_to_end) + " (tol " + num(kEndToEndTol) + "), " +
              num(secs, "%.2f") + " s" + (failed.empty() ? "" : "; failed:" + failed)};
}

FgatSubmodule random_submodule(ad::Tape& t, RngStream& rng, std::size_t d) {
  using testsupport::random_tensor;
  return {{t.constant(random_tensor(rng, d, d)), t.constant(random_tensor(rng, 1, 2 * d))},
          t.constant(random_tensor(rng, d, d)),
          t.constant(random_tensor(rng, 1, d)),
          t.constant(random_tensor(rng, 1, d, 0.5, 1.5)),
          t.constant(random_tensor(rng, 1, d))};
}

Outcome structural_invariants() {
  using testsupport::permute;
  using testsupport::permute_rows;
  using testsupport::random_tensor;
  RngStream rng(31337);

  // Softmax rows over random masks, including large-magnitude scores.
  double softmax_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t r = 1 + rng.below(12), c = 1 + rng.below(12);
    const double spread = trial % 2 ? 1.0 : 500.0;
    ad::Mask mask(r * c);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) mask[i * c + j] = rng.uniform01() < 0.5;
      mask[i * c + rng.below(c)] = 1;
    }
    ad::Tape t;
    const Tensor p = ad::masked_softmax(t.constant(random_tensor(rng, r, c, -spread, spread)), mask).value();
    for (std::size_t i = 0; i < r; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) s += p(i, j);
      softmax_err = std::max(softmax_err, std::abs(s - 1.0));
    }
  }

  // Equivariance of the layers, invariance of readout and the full classifier.
  ModelConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden_dim = 6;
  cfg.num_classes = 3;
  ModelParams params = build_model(cfg, rng);
  for (std::size_t i = 0; i < params.size(); ++i)
    for (double& v : params[i].value.values()) v += rng.uniform(-0.3, 0.3);
  double perm_err = 0.0;
  for (int trial = 0; trial < kPermutations; ++trial) {
    const std::size_t n = 3 + rng.below(10);
    const GraphRecord g = testsupport::random_graph(rng, n, rng.below(n * (n - 1) / 2 + 1), 4);
    const auto perm = testsupport::random_permutation(rng, n);
    const GraphRecord pg = permute(g, perm);
    const GraphStructure gs = GraphStructure::from_edges(n, g.edges);
    const GraphStructure pgs = GraphStructure::from_edges(n, pg.edges);
    auto track = [&](const Tensor& a, const Tensor& b) { perm_err = std::max(perm_err, max_abs_diff(a, b)); };

    ad::Tape t;
    const GatConvParams conv{t.constant(random_tensor(rng, 6, 4)), t.constant(random_tensor(rng, 2, 6))};
    track(gat_conv(t.constant(pg.features), pgs, conv, 0.2, Activation::elu).value(),
          permute_rows(gat_conv(t.constant(g.features), gs, conv, 0.2, Activation::elu).value(), perm));

    const Tensor h = random_tensor(rng, n, 6), h2 = random_tensor(rng, n, 6);
    const FgatSubmodule s1 = random_submodule(t, rng, 6), s2 = random_submodule(t, rng, 6);
    track(fgat_layer_forward(t.constant(permute_rows(h, perm)), pgs, s1, s2, cfg, {}).value(),
          permute_rows(fgat_layer_forward(t.constant(h), gs, s1, s2, cfg, {}).value(), perm));

    const MultiViewReadout ro{t.constant(random_tensor(rng, 2, 6)), t.constant(random_tensor(rng, 1, 12))};
    track(multi_view_readout({t.constant(h), t.constant(h2)}, ro).value(),
          multi_view_readout({t.constant(permute_rows(h, perm)), t.constant(permute_rows(h2, perm))}, ro).value());
    track(predict_logits(params, cfg, g), predict_logits(params, cfg, pg));
  }

  // One view, unit view weight and a frozen identity projection: the multi-view
  // model must produce the single-view model's logits exactly.
  ModelConfig m = cfg, f = cfg;
  m.num_views = 1;
  f.kind = ModelKind::fgat;
  ModelParams mp = build_model(m, rng);
  for (std::size_t i = 0; i < mp.size(); ++i)
    for (double& v : mp[i].value.values()) v += rng.uniform(-0.3, 0.3);
  mp.get("view_agg.weight") = Tensor::ones(1, 1);
  mp.get("proj.0.weight") = Tensor::identity(cfg.hidden_dim);
  mp.get("proj.0.bias") = Tensor::zeros(1, cfg.hidden_dim);
  mp.set_trainable("proj.0.weight", false);
  mp.set_trainable("proj.0.bias", false);
  ModelParams fp = build_model(f, rng);
  for (const NamedTensor& nt : fp) {
    std::string src = nt.name;
    if (src.rfind("input.", 0) == 0) src = "view.0." + src.substr(6);
    fp.get(nt.name) = mp.get(src);
  }
  int identical = 0;
  for (int trial = 0; trial < kPermutations; ++trial) {
    const std::size_t n = 2 + rng.below(12);
    const GraphRecord g = testsupport::random_graph(rng, n, rng.below(n * (n - 1) / 2 + 1), 4);
    identical += predict_logits(mp, m, g) == predict_logits(fp, f, g);
  }

  const bool ok = softmax_err <= kSoftmaxTol && perm_err <= kPermutationTol && identical == kPermutations;
  return {ok ? Outcome::pass : Outcome::fail,
          "softmax row error " + num(softmax_err) + " (tol " + num(kSoftmaxTol) + "), permutation error " +
              num(perm_err) + " over " + std::to_string(kPermutations) + " graphs (tol " + num(kPermutationTol) +
              "), single-view equivalence " + std::to_string(identical) + "/" + std::to_string(kPermutations) +
              " bitwise"};
}

Outcome training_sanity() {
  const auto root = data_dir();
  if (!root) return skip_without_data();
  const Dataset ds = load(*root, "PROTEINS");
  // A shuffled subset so both classes appear (the files are sorted by class).
  RngStream rng(0);
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  idx.resize(kOverfitGraphs);
  const std::vector<GraphRecord> subset = select(ds, idx);

  TrainConfig tc;
  tc.max_epochs = kOverfitEpochs;
  tc.patience = kOverfitEpochs;
  tc.lr = kOverfitLr;
  tc.seed = 0;
  const ModelConfig mc = resolve_for_dataset(ModelConfig{}, ds);
  const auto t0 = std::chrono::steady_clock::now();
  const FitResult r = fit(subset, subset, mc, tc);
  const double secs = seconds_since(t0);
  std::size_t first_perfect = 0;
  for (const EpochRecord& e : r.report.epochs)
    if (e.train_accuracy == 1.0) {
      first_perfect = e.epoch;
      break;
    }
  const bool ok = first_perfect > 0 && !r.report.diverged && secs < kOverfitSeconds;
  return {ok ? Outcome::pass : Outcome::fail,
          std::to_string(kOverfitGraphs) + " graphs, " +
              (first_perfect ? "train accuracy 1.0 at epoch " + std::to_string(first_perfect)
                             : "best val accuracy " + num(r.report.best_val_accuracy, "%.4f")) +
              " (limit " + std::to_string(kOverfitEpochs) + "), " + num(secs, "%.1f") + " s (limit " +
              num(kOverfitSeconds) + " s)"};
}

TrainConfig reproduction_config() {
  TrainConfig tc;
  if (reduced_mode()) tc.max_epochs = kReducedEpochs;
  return tc;
}

Outcome reproduction() {
  const auto root = data_dir();
  if (!root) return skip_without_data();
  const bool reduced = reduced_mode();
  const double slack = reduced ? kReducedSlack : 0.0;
  std::string detail = reduced ? "reduced mode; " : "";
  bool ok = true;
  for (const Floor& f : kFloors) {
    const Dataset ds = load(*root, f.name);
    std::vector<double> acc;
    double slowest = 0.0;
    for (std::uint64_t seed : kSeeds) {
      TrainConfig tc = reproduction_config();
      tc.seed = seed;
      tc.split.seed = seed;
      const FitResult r = train_and_test(ds, ModelConfig{}, tc);
      acc.push_back(r.report.test_accuracy.value_or(0.0));
      slowest = std::max(slowest, r.report.wall_time_s);
      ok = ok && !r.report.diverged;
    }
    const double med = median(acc);
    const bool row_ok = med >= f.min_accuracy - slack && slowest <= kRunSeconds;
    ok = ok && row_ok;
    detail += std::string(f.name) + " median " + num(med, "%.4f") + " (floor " +
              num(f.min_accuracy - slack, "%.2f") + ", slowest run " + num(slowest, "%.0f") + " s)" +
              (row_ok ? "" : " BELOW") + "; ";
  }
  return {ok ? Outcome::pass : Outcome::fail, detail + "limit " + num(kRunSeconds, "%.0f") + " s per run"};
}

Outcome ablation_trend() {
  const auto root = data_dir();
  if (!root) return skip_without_data();
  int wins = 0;
  std::string detail = reduced_mode() ? "reduced mode; " : "";
  for (const Floor& f : kFloors) {
    const Dataset ds = load(*root, f.name);
    const auto rows = ablate_views(ds, ModelConfig{}, reproduction_config(),
                                   {std::begin(kAblationViews), std::end(kAblationViews)},
                                   {std::begin(kSeeds), std::end(kSeeds)}, omp_get_max_threads());
    double one = 0.0, three = 0.0;
    detail += std::string(f.name) + " medians";
    for (const AblationRow& r : rows) {
      if (r.views == 1) one = r.median_accuracy;
      if (r.views == 3) three = r.median_accuracy;
      detail += " m=" + std::to_string(r.views) + ":" + num(r.median_accuracy, "%.4f");
    }
    wins += three >= one;
    detail += "; ";
  }
  return {wins >= kAblationWins ? Outcome::pass : Outcome::fail,
          detail + "m=3 >= m=1 on " + std::to_string(wins) + "/3 (need " + std::to_string(kAblationWins) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  // A TUDataset-format fixture on disk, trained twice through the CLI with the
  // same config and seed, then once more in-process.
  const fs::path root = testsupport::temp_dir("acceptance_determinism");
  write_tudataset(testsupport::synthetic_dataset(60, 2026, "SYNTH"), root / "SYNTH");
  auto run = [&](const std::string& out) {
    const std::vector<std::string> args = {
        "mfgat", "train", "--dataset-dir", root.string(), "--dataset", "SYNTH", "--hidden", "16",
        "--epochs", "15", "--batch", "8", "--seed", "3", "--out", (root / out).string()};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream sink;
    return cli::run_cli(static_cast<int>(argv.size()), argv.data(), sink, sink);
  };
  if (run("a") != 0 || run("b") != 0) return {Outcome::fail, "training run exited non-zero"};
  const std::string a = slurp(root / "a" / "SYNTH_mfgat_seed3.json");
  const std::string b = slurp(root / "b" / "SYNTH_mfgat_seed3.json");
  const bool reports_equal = !a.empty() && a == b;
  const bool ckpt_equal = slurp(root / "a" / "SYNTH_mfgat_seed3.ckpt") == slurp(root / "b" / "SYNTH_mfgat_seed3.ckpt");

  const Dataset ds = parse_tudataset(root / "SYNTH", "SYNTH");
  TrainConfig tc;
  tc.max_epochs = 15;
  tc.seed = 9;
  tc.split.seed = 9;
  const std::string j1 = to_json(train_and_test(ds, ModelConfig{}, tc).report).dump(2);
  const std::string j2 = to_json(train_and_test(ds, ModelConfig{}, tc).report).dump(2);

  const bool ok = reports_equal && ckpt_equal && j1 == j2;
  return {ok ? Outcome::pass : Outcome::fail,
          std::string("CLI reports ") + (reports_equal ? "identical" : "differ") + " (" + std::to_string(a.size()) +
              " bytes), checkpoints " + (ckpt_equal ? "identical" : "differ") + ", in-process reports " +
              (j1 == j2 ? "identical" : "differ")};
}

struct Criterion {
  const char* title;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"dataset fidelity", dataset_fidelity},
      {"gradient correctness", gradient_correctness},
      {"structural invariants", structural_invariants},
      {"training sanity", training_sanity},
      {"benchmark accuracy", reproduction},
      {"view ablation trend", ablation_trend},
      {"determinism", determinism},
  };
  return all;
}

int report(std::size_t index) {
  const Criterion& c = criteria()[index - 1];
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {Outcome::fail, std::string("error: ") + e.what()};
  }
  static const char* tags[] = {"PASS", "FAIL", "SKIP"};
  std::printf("[%s] %zu %s: %s\n", tags[o.status], index, c.title, o.detail.c_str());
  std::fflush(stdout);
  return o.status == Outcome::pass ? 0 : (o.status == Outcome::skip ? kSkip : 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::size_t only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-7)")->check(CLI::Range(1, 7));
  CLI11_PARSE(app, argc, argv);
  if (only != 0) return report(only);
  int worst = 0;
  for (std::size_t i = 1; i <= criteria().size(); ++i) {
    const int rc = report(i);
    if (rc == 1) worst = 1;
  }
  return worst;
}
