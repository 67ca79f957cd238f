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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfgat/datasets.hpp"
#include "mfgat/model.hpp"
#include "json.hpp"

namespace mfgat {

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::size_t step = 0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const ModelParams& params, double lr);
};

// theta -= lr * m_hat / (sqrt(v_hat) + eps) for every trainable tensor. The
// step counter is bumped before bias correction. Throws DivergenceError on a
// non-finite gradient, leaving params untouched.
void adam_step(ModelParams& params, const std::vector<Tensor>& grads, AdamState& state);

// ---------------------------------------------------------------------------
// Gradients

struct BatchGradient {
  std::vector<Tensor> grads;  // mean over the batch, one per parameter tensor
  double loss = 0.0;          // mean cross-entropy over the batch
  std::size_t correct = 0;    // train-mode argmax hits
};

// Forward + backward on one graph; dropout draws come from `rng`.
BatchGradient graph_gradient(const ModelParams& params, const ModelConfig& config,
                             const GraphRecord& graph, ad::Mode mode, RngStream& rng);

// Mean gradient over `batch`. Graph k uses dropout stream base.child(k), so
// the result does not depend on scheduling; the parallel version reduces
// per-graph results in index order and matches the serial one bit for bit.
BatchGradient batch_gradient_serial(const ModelParams& params, const ModelConfig& config,
                                    const std::vector<const GraphRecord*>& batch,
                                    const RngStream& base);
BatchGradient batch_gradient_parallel(const ModelParams& params, const ModelConfig& config,
                                      const std::vector<const GraphRecord*>& batch,
                                      const RngStream& base);

// ---------------------------------------------------------------------------
// Early stopping

// Tracks validation accuracy; only strict improvements move the best epoch,
// so ties resolve toward the earlier epoch.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  // Returns true when training should stop after `epoch` (1-based).
  bool update(std::size_t epoch, double val_accuracy);
  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  double best_ = -1.0;
  bool improved_ = false;
};

// ---------------------------------------------------------------------------
// Fit / evaluate

struct TrainConfig {
  std::size_t max_epochs = 200;
  double lr = 0.01;
  std::size_t batch_size = 32;
  std::size_t patience = 20;
  SplitSpec split;
  std::uint64_t seed = 0;
  std::size_t cv_folds = 5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  // Evaluate accuracy on the training graphs in eval mode every epoch.
  bool track_train_accuracy = true;
  bool parallel_batches = true;
};

void validate(const TrainConfig& config);
std::vector<std::pair<std::string, std::string>> to_key_values(const TrainConfig& config);
void apply_key_values(TrainConfig& config, const std::map<std::string, std::string>& kv);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct RunReport {
  std::vector<EpochRecord> epochs;
  std::size_t stopped_epoch = 0;
  std::size_t best_val_epoch = 0;
  double best_val_accuracy = 0.0;
  std::optional<double> test_accuracy;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::string status = "ok";
  std::vector<std::pair<std::string, std::string>> config;  // fully resolved echo
  double wall_time_s = 0.0;
};

// Wall time is left out unless asked for, so identical runs serialize to
// identical bytes.
nlohmann::ordered_json to_json(const RunReport& report, bool include_timing = false);

struct FitResult {
  ModelParams params;  // parameters of the best validation epoch
  RunReport report;
};

// Per-graph forward/backward with mean gradients over `batch_size` graphs per
// Adam step. Val accuracy after every epoch; best-val parameters are
// restored; stops after `patience` epochs without strict improvement or at
// max_epochs. A non-finite loss ends the run with report.diverged set and the
// last good (best-val) parameters.
FitResult fit(const std::vector<GraphRecord>& train, const std::vector<GraphRecord>& val,
              const ModelConfig& model_config, const TrainConfig& train_config);

// Fraction of graphs whose argmax logit (ties to the lower index) equals the
// label. Eval mode. Throws InvalidInput for an empty list.
double evaluate_accuracy(const ModelParams& params, const ModelConfig& config,
                         const std::vector<GraphRecord>& graphs);

// ModelConfig with data-derived dims filled in from the dataset.
ModelConfig resolve_for_dataset(ModelConfig config, const Dataset& dataset);

// Splits with train_config.split (its own seed), fits, evaluates
// the test split and records it in the report.
FitResult train_and_test(const Dataset& dataset, const ModelConfig& model_config,
                         const TrainConfig& train_config);

// ---------------------------------------------------------------------------
// Cross-validation

// k contiguous folds; the first n % k folds get one extra element.
std::vector<std::vector<std::size_t>> kfold_partition(const std::vector<std::size_t>& indices,
                                                      std::size_t k);

struct CrossValidationResult {
  std::size_t best_index = 0;
  ModelConfig best_config;
  std::vector<double> mean_fold_accuracy;           // per grid entry
  std::vector<std::vector<RunReport>> fold_reports;  // [grid entry][fold]
  FitResult final_fit;                               // retrained on the train split
};

// k-fold CV over the train+val portion of the split for each grid entry; the
// highest mean fold accuracy wins (first wins ties). The winner is retrained
// on the train split with the val split for early stopping.
CrossValidationResult cross_validate(const Dataset& dataset, const std::vector<ModelConfig>& grid,
                                     const TrainConfig& train_config);

// ---------------------------------------------------------------------------
// View-count ablation

struct AblationCell {
  std::size_t views = 0;
  std::uint64_t seed = 0;
  double test_accuracy = 0.0;
  std::size_t stopped_epoch = 0;
  double wall_time_s = 0.0;
  RunReport report;
};

struct AblationRow {
  std::size_t views = 0;
  std::vector<AblationCell> runs;  // in seed order
  double median_accuracy = 0.0;
};

double median(std::vector<double> values);

// Trains base_config with each view count (ascending, deduplicated) and each
// seed; the seed drives both the split and the training run. Cells run on up
// to `jobs` threads.
std::vector<AblationRow> ablate_views(const Dataset& dataset, const ModelConfig& base_config,
                                      const TrainConfig& train_config,
                                      std::vector<std::size_t> view_counts,
                                      const std::vector<std::uint64_t>& seeds, int jobs = 1);

inline constexpr const char* kRunCsvHeader =
    "model,dataset,views,seed,test_accuracy,stopped_epoch,wall_time_s";

}  // namespace mfgat
