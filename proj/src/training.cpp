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


#include "mfgat/training.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>

#include "mfgat/error.hpp"

namespace mfgat {

// ---------------------------------------------------------------------------
// Adam

AdamState AdamState::for_params(const ModelParams& params, double lr) {
  AdamState s;
  s.lr = lr;
  for (const NamedTensor& t : params) {
    s.first_moment.emplace_back(t.value.rows(), t.value.cols());
    s.second_moment.emplace_back(t.value.rows(), t.value.cols());
  }
  return s;
}

void adam_step(ModelParams& params, const std::vector<Tensor>& grads, AdamState& state) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size()) {
    throw InvalidInput("adam_step: parameter/gradient/state counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads[i].same_shape(params[i].value)) {
      throw InvalidInput("adam_step: gradient shape mismatch for '" + params[i].name + "'");
    }
    if (params[i].trainable && !grads[i].all_finite()) {
      throw DivergenceError("adam_step: non-finite gradient for '" + params[i].name + "'");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    Tensor& theta = params[i].value;
    Tensor& m = state.first_moment[i];
    Tensor& v = state.second_moment[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      theta[k] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Gradients

BatchGradient graph_gradient(const ModelParams& params, const ModelConfig& config,
                             const GraphRecord& graph, ad::Mode mode, RngStream& rng) {
  ad::Tape tape;
  BoundParams bound(tape, params);
  ad::Var logits = classify_forward(tape, bound, graph, config, {mode, &rng});
  ad::Var loss = ad::cross_entropy(logits, graph.label);
  tape.backward(loss);
  BatchGradient out;
  out.loss = loss.value()(0, 0);
  out.correct = argmax_row(logits.value()) == graph.label ? 1 : 0;
  out.grads.reserve(params.size());
  for (const ad::Var& v : bound.vars()) out.grads.push_back(v.grad());
  return out;
}

namespace {

BatchGradient reduce(std::vector<BatchGradient>& parts) {
  BatchGradient out;
  const double scale = 1.0 / static_cast<double>(parts.size());
  out.grads = std::move(parts.front().grads);
  out.loss = parts.front().loss;
  out.correct = parts.front().correct;
  for (std::size_t k = 1; k < parts.size(); ++k) {
    for (std::size_t i = 0; i < out.grads.size(); ++i) {
      Tensor& acc = out.grads[i];
      const Tensor& g = parts[k].grads[i];
      for (std::size_t e = 0; e < acc.size(); ++e) acc[e] += g[e];
    }
    out.loss += parts[k].loss;
    out.correct += parts[k].correct;
  }
  for (Tensor& g : out.grads)
    for (double& v : g.values()) v *= scale;
  out.loss *= scale;
  return out;
}

}  // namespace

BatchGradient batch_gradient_serial(const ModelParams& params, const ModelConfig& config,
                                    const std::vector<const GraphRecord*>& batch,
                                    const RngStream& base) {
  if (batch.empty()) throw InvalidInput("batch_gradient: empty batch");
  std::vector<BatchGradient> parts(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    RngStream rng = base.child(k);
    parts[k] = graph_gradient(params, config, *batch[k], ad::Mode::train, rng);
  }
  return reduce(parts);
}

BatchGradient batch_gradient_parallel(const ModelParams& params, const ModelConfig& config,
                                      const std::vector<const GraphRecord*>& batch,
                                      const RngStream& base) {
  if (batch.empty()) throw InvalidInput("batch_gradient: empty batch");
  std::vector<BatchGradient> parts(batch.size());
  std::vector<std::exception_ptr> errors(batch.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      RngStream rng = base.child(static_cast<std::uint64_t>(k));
      parts[k] = graph_gradient(params, config, *batch[k], ad::Mode::train, rng);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reduce(parts);
}

// ---------------------------------------------------------------------------
// Early stopping

bool EarlyStopper::update(std::size_t epoch, double val_accuracy) {
  improved_ = val_accuracy > best_;
  if (improved_) {
    best_ = val_accuracy;
    best_epoch_ = epoch;
    return false;
  }
  return epoch - best_epoch_ >= patience_;
}

// ---------------------------------------------------------------------------
// Config plumbing

namespace {

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidInput("train config field '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

bool parse_flag(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw InvalidInput("train config field '" + key + "': not a boolean: '" + text + "'");
}

}  // namespace

void validate(const TrainConfig& c) {
  auto bad = [](const std::string& field, const std::string& why) {
    throw InvalidInput("train config field '" + field + "': " + why);
  };
  if (c.max_epochs < 1) bad("epochs", "must be >= 1");
  if (c.patience < 1) bad("patience", "must be >= 1");
  if (c.batch_size < 1) bad("batch", "must be >= 1");
  if (!(c.lr > 0)) bad("lr", "must be > 0");
  if (!(c.beta1 >= 0 && c.beta1 < 1)) bad("beta1", "must lie in [0,1)");
  if (!(c.beta2 >= 0 && c.beta2 < 1)) bad("beta2", "must lie in [0,1)");
  if (!(c.adam_eps > 0)) bad("adam_eps", "must be > 0");
  validate_split(c.split);
}

std::vector<std::pair<std::string, std::string>> to_key_values(const TrainConfig& c) {
  return {
      {"epochs", std::to_string(c.max_epochs)},
      {"lr", format_real(c.lr)},
      {"batch", std::to_string(c.batch_size)},
      {"patience", std::to_string(c.patience)},
      {"split", format_real(c.split.train) + "," + format_real(c.split.val) + "," +
                    format_real(c.split.test)},
      {"split_seed", std::to_string(c.split.seed)},
      {"seed", std::to_string(c.seed)},
      {"cv_folds", std::to_string(c.cv_folds)},
      {"beta1", format_real(c.beta1)},
      {"beta2", format_real(c.beta2)},
      {"adam_eps", format_real(c.adam_eps)},
      {"track_train_accuracy", c.track_train_accuracy ? "true" : "false"},
  };
}

void apply_key_values(TrainConfig& c, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "epochs") c.max_epochs = parse_number<std::size_t>(key, value);
    else if (key == "lr") c.lr = parse_number<double>(key, value);
    else if (key == "batch") c.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "patience") c.patience = parse_number<std::size_t>(key, value);
    else if (key == "split") {
      const std::uint64_t seed = c.split.seed;
      c.split = parse_split_fractions(value, seed);
    } else if (key == "split_seed") c.split.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "cv_folds") c.cv_folds = parse_number<std::size_t>(key, value);
    else if (key == "beta1") c.beta1 = parse_number<double>(key, value);
    else if (key == "beta2") c.beta2 = parse_number<double>(key, value);
    else if (key == "adam_eps") c.adam_eps = parse_number<double>(key, value);
    else if (key == "track_train_accuracy") c.track_train_accuracy = parse_flag(key, value);
  }
}

nlohmann::ordered_json to_json(const RunReport& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["status"] = r.status;
  j["diverged"] = r.diverged;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.config) cfg[k] = v;
  j["config"] = cfg;
  j["stopped_epoch"] = r.stopped_epoch;
  j["best_val_epoch"] = r.best_val_epoch;
  j["best_val_accuracy"] = r.best_val_accuracy;
  j["test_accuracy"] = r.test_accuracy ? nlohmann::ordered_json(*r.test_accuracy)
                                       : nlohmann::ordered_json(nullptr);
  if (include_timing) j["wall_time_s"] = r.wall_time_s;
  nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
  for (const EpochRecord& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"train_accuracy", e.train_accuracy},
                      {"val_accuracy", e.val_accuracy}});
  }
  j["epochs"] = epochs;
  return j;
}

// ---------------------------------------------------------------------------
// Fit / evaluate

double evaluate_accuracy(const ModelParams& params, const ModelConfig& config,
                         const std::vector<GraphRecord>& graphs) {
  if (graphs.empty()) throw InvalidInput("evaluate_accuracy: no graphs");
  for (const GraphRecord& g : graphs) {
    if (g.features.cols() != config.input_dim) {
      throw ValidationError("evaluate_accuracy: graph " + std::to_string(g.graph_id) + " has " +
                            std::to_string(g.features.cols()) + " features, model expects " +
                            std::to_string(config.input_dim));
    }
  }
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(graphs.size());
  std::vector<std::exception_ptr> errors(graphs.size());
  long correct = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : correct)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const Tensor logits = predict_logits(params, config, graphs[i]);
      if (argmax_row(logits) == graphs[i].label) ++correct;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return static_cast<double>(correct) / static_cast<double>(graphs.size());
}

namespace {

bool finite_params(const ModelParams& p) {
  return std::all_of(p.begin(), p.end(), [](const NamedTensor& t) { return t.value.all_finite(); });
}

}  // namespace

FitResult fit(const std::vector<GraphRecord>& train, const std::vector<GraphRecord>& val,
              const ModelConfig& model_config, const TrainConfig& tc) {
  validate(model_config);
  validate(tc);
  if (train.empty() || val.empty()) throw InvalidInput("fit: empty train or val split");
  const auto start = std::chrono::steady_clock::now();

  const RngStream root(tc.seed);
  RngStream init_rng = root.child(1);
  RngStream shuffle_rng = root.child(2);
  const RngStream dropout_root = root.child(3);

  ModelParams params = build_model(model_config, init_rng);
  AdamState adam = AdamState::for_params(params, tc.lr);
  adam.beta1 = tc.beta1;
  adam.beta2 = tc.beta2;
  adam.eps = tc.adam_eps;

  RunReport report;
  report.seed = tc.seed;
  report.config = to_key_values(model_config);
  for (auto& kv : to_key_values(tc)) report.config.push_back(kv);

  ModelParams best = params;
  EarlyStopper stopper(tc.patience);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t startb = 0; startb < order.size() && !report.diverged;
         startb += tc.batch_size, ++batch_index) {
      const std::size_t endb = std::min(order.size(), startb + tc.batch_size);
      std::vector<const GraphRecord*> batch;
      for (std::size_t k = startb; k < endb; ++k) batch.push_back(&train[order[k]]);
      const RngStream base = dropout_root.child((static_cast<std::uint64_t>(epoch) << 32) | batch_index);
      BatchGradient bg = tc.parallel_batches
                             ? batch_gradient_parallel(params, model_config, batch, base)
                             : batch_gradient_serial(params, model_config, batch, base);
      if (!std::isfinite(bg.loss)) {
        report.diverged = true;
        report.status = "diverged: non-finite loss at epoch " + std::to_string(epoch);
        break;
      }
      try {
        adam_step(params, bg.grads, adam);
      } catch (const DivergenceError& e) {
        report.diverged = true;
        report.status = std::string("diverged: ") + e.what();
        break;
      }
      loss_sum += bg.loss * static_cast<double>(batch.size());
      correct += bg.correct;
    }
    if (!report.diverged && !finite_params(params)) {
      report.diverged = true;
      report.status = "diverged: non-finite parameters at epoch " + std::to_string(epoch);
    }
    if (report.diverged) {
      report.stopped_epoch = epoch;
      break;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.train_accuracy = tc.track_train_accuracy
                             ? evaluate_accuracy(params, model_config, train)
                             : static_cast<double>(correct) / static_cast<double>(train.size());
    rec.val_accuracy = evaluate_accuracy(params, model_config, val);
    report.epochs.push_back(rec);
    report.stopped_epoch = epoch;

    const bool stop = stopper.update(epoch, rec.val_accuracy);
    if (stopper.improved()) best = params;
    if (stop) break;
  }

  report.best_val_epoch = stopper.best_epoch();
  report.best_val_accuracy = std::max(0.0, stopper.best_value());
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(best), std::move(report)};
}

ModelConfig resolve_for_dataset(ModelConfig config, const Dataset& dataset) {
  config.input_dim = dataset.feature_dim;
  config.num_classes = dataset.num_classes;
  return config;
}

FitResult train_and_test(const Dataset& dataset, const ModelConfig& model_config,
                         const TrainConfig& tc) {
  const Split split = split_dataset(dataset, tc.split);
  const ModelConfig cfg = resolve_for_dataset(model_config, dataset);
  const auto start = std::chrono::steady_clock::now();
  FitResult res = fit(select(dataset, split.train), select(dataset, split.val), cfg, tc);
  res.report.config.insert(res.report.config.begin(), {"dataset", dataset.name});
  res.report.test_accuracy = evaluate_accuracy(res.params, cfg, select(dataset, split.test));
  res.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

// ---------------------------------------------------------------------------
// Cross-validation

std::vector<std::vector<std::size_t>> kfold_partition(const std::vector<std::size_t>& indices,
                                                      std::size_t k) {
  if (k < 2) throw InvalidInput("kfold: need at least 2 folds");
  if (indices.size() < k) {
    throw InvalidInput("kfold: " + std::to_string(indices.size()) + " items cannot fill " +
                       std::to_string(k) + " folds");
  }
  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = indices.size() / k, extra = indices.size() % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].assign(indices.begin() + pos, indices.begin() + pos + len);
    pos += len;
  }
  return folds;
}

CrossValidationResult cross_validate(const Dataset& dataset, const std::vector<ModelConfig>& grid,
                                     const TrainConfig& tc) {
  if (grid.empty()) throw InvalidInput("cross_validate: empty grid");
  const Split split = split_dataset(dataset, tc.split);
  std::vector<std::size_t> pool = split.train;
  pool.insert(pool.end(), split.val.begin(), split.val.end());
  const auto folds = kfold_partition(pool, tc.cv_folds);

  CrossValidationResult out;
  double best = -1.0;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const ModelConfig cfg = resolve_for_dataset(grid[gi], dataset);
    std::vector<RunReport> reports;
    double acc_sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<std::size_t> train_idx;
      for (std::size_t o = 0; o < folds.size(); ++o)
        if (o != f) train_idx.insert(train_idx.end(), folds[o].begin(), folds[o].end());
      FitResult r = fit(select(dataset, train_idx), select(dataset, folds[f]), cfg, tc);
      acc_sum += r.report.best_val_accuracy;
      reports.push_back(std::move(r.report));
    }
    const double mean_acc = acc_sum / static_cast<double>(folds.size());
    out.mean_fold_accuracy.push_back(mean_acc);
    out.fold_reports.push_back(std::move(reports));
    if (mean_acc > best) {
      best = mean_acc;
      out.best_index = gi;
    }
  }
  out.best_config = resolve_for_dataset(grid[out.best_index], dataset);
  out.final_fit = fit(select(dataset, split.train), select(dataset, split.val), out.best_config, tc);
  out.final_fit.report.test_accuracy =
      evaluate_accuracy(out.final_fit.params, out.best_config, select(dataset, split.test));
  return out;
}

// ---------------------------------------------------------------------------
// Ablation

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median: no values");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<AblationRow> ablate_views(const Dataset& dataset, const ModelConfig& base_config,
                                      const TrainConfig& tc, std::vector<std::size_t> view_counts,
                                      const std::vector<std::uint64_t>& seeds, int jobs) {
  if (view_counts.empty()) throw InvalidInput("ablate_views: no view counts");
  if (seeds.empty()) throw InvalidInput("ablate_views: no seeds");
  std::sort(view_counts.begin(), view_counts.end());
  view_counts.erase(std::unique(view_counts.begin(), view_counts.end()), view_counts.end());

  const std::size_t cells = view_counts.size() * seeds.size();
  std::vector<AblationCell> results(cells);
  std::vector<std::exception_ptr> errors(cells);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(cells);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    try {
      const std::size_t vi = static_cast<std::size_t>(c) / seeds.size();
      const std::size_t si = static_cast<std::size_t>(c) % seeds.size();
      ModelConfig cfg = base_config;
      cfg.num_views = view_counts[vi];
      TrainConfig run = tc;
      run.seed = seeds[si];
      run.split.seed = seeds[si];
      FitResult r = train_and_test(dataset, cfg, run);
      AblationCell& cell = results[c];
      cell.views = view_counts[vi];
      cell.seed = seeds[si];
      cell.test_accuracy = r.report.test_accuracy.value_or(0.0);
      cell.stopped_epoch = r.report.stopped_epoch;
      cell.wall_time_s = r.report.wall_time_s;
      cell.report = std::move(r.report);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<AblationRow> rows;
  for (std::size_t vi = 0; vi < view_counts.size(); ++vi) {
    AblationRow row;
    row.views = view_counts[vi];
    std::vector<double> accs;
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      row.runs.push_back(std::move(results[vi * seeds.size() + si]));
      accs.push_back(row.runs.back().test_accuracy);
    }
    row.median_accuracy = median(accs);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mfgat
