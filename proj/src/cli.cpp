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


#include "mfgat/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "mfgat/checkpoint.hpp"
#include "mfgat/datasets.hpp"
#include "mfgat/error.hpp"
#include "mfgat/gradcheck_suite.hpp"
#include "mfgat/model.hpp"
#include "mfgat/training.hpp"

namespace fs = std::filesystem;

namespace mfgat::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("--" + key + ": cannot parse '" + text + "'");
  }
  return v;
}

std::string real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingInput("cannot write " + path.string());
  return out;
}

// Keys a config file may set besides the ModelConfig/TrainConfig ones.
const std::set<std::string> kExperimentKeys = {"dataset", "dataset_dir", "seeds"};

std::set<std::string> known_keys() {
  std::set<std::string> keys = kExperimentKeys;
  for (const auto& [k, v] : to_key_values(ModelConfig{})) keys.insert(k);
  for (const auto& [k, v] : to_key_values(TrainConfig{})) keys.insert(k);
  return keys;
}

// Flags shared by train and ablate; each stores raw text under its config key
// so flags and config files go through one parser.
struct Experiment {
  std::map<std::string, std::string> raw;
  std::vector<std::pair<CLI::Option*, std::string>> bound;
  std::string config_path;
  std::string out_dir = "runs";
  int jobs = 1;

  void flag(CLI::App* app, const std::string& name, const std::string& key,
            const std::string& help) {
    bound.emplace_back(app->add_option(name, raw[key], help), key);
  }

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "key=value file; flags override it");
    flag(app, "--dataset-dir", "dataset_dir", "dataset root (default $MFGAT_DATA_DIR)");
    flag(app, "--dataset", "dataset", "dataset name(s), comma separated");
    flag(app, "--model", "model", "mfgat | fgat | gat | gcn | sage");
    flag(app, "--views", "views", "number of views (ablate: comma-separated list)");
    flag(app, "--hidden", "hidden", "hidden dimension");
    flag(app, "--layers", "layers", "number of FGAT layers");
    flag(app, "--heads", "heads", "attention heads");
    flag(app, "--dropout", "dropout", "dropout rate");
    flag(app, "--lr", "lr", "Adam learning rate");
    flag(app, "--epochs", "epochs", "maximum epochs");
    flag(app, "--patience", "patience", "early-stopping patience");
    flag(app, "--batch", "batch", "graphs per optimizer step");
    flag(app, "--seed", "seed", "run seed");
    flag(app, "--seeds", "seeds", "comma-separated run seeds");
    flag(app, "--split", "split", "train,val,test fractions");
    flag(app, "--split-seed", "split_seed", "fixed split seed (default: the run seed)");
    flag(app, "--view-weighting", "view_weighting", "scalar | per_dimension");
    flag(app, "--unified-path", "unified_path", "true | false");
    app->add_option("--out", out_dir, "output directory")->capture_default_str();
    app->add_option("--jobs", jobs, "worker threads for independent runs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
};

struct Resolved {
  std::map<std::string, std::string> kv;
  ModelConfig model;
  TrainConfig train;
  std::vector<std::string> datasets;
  fs::path dataset_dir;
  std::vector<std::uint64_t> seeds;
  bool fixed_split_seed = false;
};

Resolved resolve(const Experiment& ex, const std::set<std::string>& list_keys = {}) {
  Resolved r;
  if (!ex.config_path.empty()) r.kv = read_key_value_file(ex.config_path);
  for (const auto& [opt, key] : ex.bound)
    if (opt->count() > 0) r.kv[key] = ex.raw.at(key);

  const std::set<std::string> known = known_keys();
  for (const auto& [k, v] : r.kv)
    if (!known.count(k)) throw UsageError("unknown config key '" + k + "'");

  std::map<std::string, std::string> scalar_kv;
  for (const auto& [k, v] : r.kv)
    if (!list_keys.count(k)) scalar_kv[k] = v;
  apply_key_values(r.model, scalar_kv);
  apply_key_values(r.train, scalar_kv);

  if (auto it = r.kv.find("dataset"); it != r.kv.end()) r.datasets = split_list(it->second);
  if (r.datasets.empty()) throw UsageError("no dataset given (--dataset)");

  if (auto it = r.kv.find("dataset_dir"); it != r.kv.end()) {
    r.dataset_dir = it->second;
  } else if (const char* env = std::getenv("MFGAT_DATA_DIR"); env && *env) {
    r.dataset_dir = env;
  } else {
    throw UsageError("no dataset directory: pass --dataset-dir or set MFGAT_DATA_DIR");
  }

  if (auto it = r.kv.find("seeds"); it != r.kv.end()) {
    for (const std::string& s : split_list(it->second))
      r.seeds.push_back(parse_unsigned<std::uint64_t>("seeds", s));
    if (r.seeds.empty()) throw UsageError("--seeds: empty list");
  } else {
    r.seeds.push_back(r.train.seed);
  }
  r.fixed_split_seed = r.kv.count("split_seed") > 0;
  validate(r.train);
  return r;
}

Dataset load_dataset(const fs::path& root, const std::string& name) {
  fs::path dir = root / name;
  if (!fs::is_directory(dir) && fs::exists(root / (name + "_A.txt"))) dir = root;
  return parse_tudataset(dir, name);
}

// "# key=value" lines: the resolved settings behind a CSV or plot file.
void write_echo(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [k, v] : kv) os << "# " << k << "=" << v << "\n";
}

std::vector<std::pair<std::string, std::string>> echo_of(const Resolved& r,
                                                         const std::string& views_text = "") {
  std::vector<std::pair<std::string, std::string>> kv;
  std::string datasets, seeds;
  for (const auto& d : r.datasets) datasets += (datasets.empty() ? "" : ",") + d;
  for (auto s : r.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
  kv.emplace_back("dataset", datasets);
  for (auto& p : to_key_values(r.model)) {
    if (p.first == "views" && !views_text.empty()) p.second = views_text;
    kv.push_back(p);
  }
  for (auto& p : to_key_values(r.train))
    if (p.first != "seed" && (p.first != "split_seed" || r.fixed_split_seed)) kv.push_back(p);
  kv.emplace_back("seeds", seeds);
  return kv;
}

std::string run_csv_row(const std::string& model, const std::string& dataset, std::size_t views,
                        const std::string& seed, double acc, double stopped, double wall) {
  char wall_buf[32];
  std::snprintf(wall_buf, sizeof wall_buf, "%.3f", wall);
  return model + "," + dataset + "," + std::to_string(views) + "," + seed + "," + real(acc) + "," +
         real(stopped) + "," + wall_buf;
}

// Runs body(i) for i in [0, n) on up to `jobs` threads; rethrows the first
// failure by index.
template <typename F>
void fan_out(std::size_t n, int jobs, F&& body) {
  std::vector<std::exception_ptr> errors(n);
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_inspect(const Experiment& ex, bool write_csv, std::ostream& out) {
  Resolved r = resolve(ex);
  std::vector<DatasetStats> stats;
  for (const std::string& name : r.datasets) stats.push_back(dataset_stats(load_dataset(r.dataset_dir, name)));

  out << std::left << std::setw(14) << "dataset" << std::right << std::setw(8) << "graphs"
      << std::setw(9) << "classes" << std::setw(11) << "avg_nodes" << std::setw(11) << "avg_edges"
      << std::setw(9) << "features" << "\n";
  for (const DatasetStats& s : stats) {
    out << std::left << std::setw(14) << s.name << std::right << std::setw(8) << s.num_graphs
        << std::setw(9) << s.num_classes << std::setw(11) << std::fixed << std::setprecision(2)
        << s.avg_nodes << std::setw(11) << s.avg_edges << std::setw(9) << s.feature_dim << "\n";
  }
  if (write_csv) {
    const fs::path path = fs::path(ex.out_dir) / "stats.csv";
    std::ofstream csv = open_output(path);
    csv << kStatsCsvHeader << "\n";
    for (const DatasetStats& s : stats) csv << stats_csv_row(s) << "\n";
  }
  return kOk;
}

int cmd_train(const Experiment& ex, std::ostream& out) {
  Resolved r = resolve(ex);
  {
    // Dimensions come from the dataset; check everything else before loading it.
    ModelConfig probe = r.model;
    probe.input_dim = 1;
    probe.num_classes = 2;
    validate(probe);
  }
  const fs::path out_dir = ex.out_dir;
  fs::create_directories(out_dir);
  {
    std::ofstream cfg = open_output(out_dir / "config.txt");
    for (const auto& [k, v] : r.kv) cfg << k << "=" << v << "\n";
  }
  const std::string model_name = to_string(r.model.kind);

  std::ofstream runs = open_output(out_dir / "runs.csv");
  std::ofstream summary = open_output(out_dir / "summary.csv");
  write_echo(runs, echo_of(r));
  write_echo(summary, echo_of(r));
  runs << kRunCsvHeader << "\n";
  summary << kRunCsvHeader << "\n";

  bool diverged = false;
  for (const std::string& name : r.datasets) {
    const Dataset ds = load_dataset(r.dataset_dir, name);
    std::vector<FitResult> results(r.seeds.size());
    fan_out(r.seeds.size(), ex.jobs, [&](std::size_t i) {
      TrainConfig tc = r.train;
      tc.seed = r.seeds[i];
      if (!r.fixed_split_seed) tc.split.seed = r.seeds[i];
      results[i] = train_and_test(ds, r.model, tc);
    });

    std::vector<double> accs, stops, walls;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const FitResult& res = results[i];
      const RunReport& rep = res.report;
      const std::string stem = name + "_" + model_name + "_seed" + std::to_string(r.seeds[i]);
      open_output(out_dir / (stem + ".json")) << to_json(rep).dump(2) << "\n";

      Checkpoint ckpt;
      ckpt.config = resolve_for_dataset(r.model, ds);
      ckpt.params = res.params;
      TrainConfig tc = r.train;
      tc.seed = r.seeds[i];
      if (!r.fixed_split_seed) tc.split.seed = r.seeds[i];
      ckpt.meta = {{"dataset", name},
                   {"seed", std::to_string(tc.seed)},
                   {"split", real(tc.split.train) + "," + real(tc.split.val) + "," + real(tc.split.test)},
                   {"split_seed", std::to_string(tc.split.seed)},
                   {"test_accuracy", real(rep.test_accuracy.value_or(0.0))}};
      save_checkpoint(out_dir / (stem + ".ckpt"), ckpt);

      const double acc = rep.test_accuracy.value_or(0.0);
      accs.push_back(acc);
      stops.push_back(static_cast<double>(rep.stopped_epoch));
      walls.push_back(rep.wall_time_s);
      runs << run_csv_row(model_name, name, r.model.views(), std::to_string(r.seeds[i]), acc,
                          static_cast<double>(rep.stopped_epoch), rep.wall_time_s)
           << "\n";
      out << name << " " << model_name << " seed " << r.seeds[i] << " test_accuracy " << fixed4(acc)
          << " stopped_epoch " << rep.stopped_epoch
          << (rep.diverged ? " DIVERGED (" + rep.status + ")" : "") << "\n";
      diverged = diverged || rep.diverged;
    }
    summary << run_csv_row(model_name, name, r.model.views(), "median", median(accs),
                           median(stops), median(walls))
            << "\n";
    out << name << " " << model_name << " median test_accuracy " << fixed4(median(accs)) << " over "
        << accs.size() << " seed(s)\n";
  }
  return diverged ? kDivergence : kOk;
}

struct EvaluateArgs {
  std::string checkpoint, dataset_dir, dataset, split, split_seed, subset = "test";
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  auto meta = [&](const std::string& key) {
    auto it = ckpt.meta.find(key);
    return it == ckpt.meta.end() ? std::string() : it->second;
  };
  const std::string name = a.dataset.empty() ? meta("dataset") : a.dataset;
  if (name.empty()) throw UsageError("no dataset given and the checkpoint does not name one");
  fs::path root = a.dataset_dir;
  if (root.empty()) {
    const char* env = std::getenv("MFGAT_DATA_DIR");
    if (!env || !*env) throw UsageError("no dataset directory: pass --dataset-dir or set MFGAT_DATA_DIR");
    root = env;
  }
  const std::string split_text = a.split.empty() ? meta("split") : a.split;
  const std::string seed_text = a.split_seed.empty() ? meta("split_seed") : a.split_seed;
  const std::uint64_t split_seed = seed_text.empty() ? 0 : parse_unsigned<std::uint64_t>("split-seed", seed_text);
  const SplitSpec spec = split_text.empty() ? SplitSpec{0.7, 0.1, 0.2, split_seed}
                                            : parse_split_fractions(split_text, split_seed);

  const Dataset ds = load_dataset(root, name);
  if (ds.feature_dim != ckpt.config.input_dim) {
    throw ValidationError("checkpoint expects " + std::to_string(ckpt.config.input_dim) +
                          " node features but " + name + " has " + std::to_string(ds.feature_dim));
  }
  if (ds.num_classes != ckpt.config.num_classes) {
    throw ValidationError("checkpoint expects " + std::to_string(ckpt.config.num_classes) +
                          " classes but " + name + " has " + std::to_string(ds.num_classes));
  }
  const Split split = split_dataset(ds, spec);
  std::vector<std::size_t> idx;
  if (a.subset == "test") idx = split.test;
  else if (a.subset == "val") idx = split.val;
  else if (a.subset == "train") idx = split.train;
  else {
    idx.resize(ds.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  }
  out << fixed4(evaluate_accuracy(ckpt.params, ckpt.config, select(ds, idx))) << "\n";
  return kOk;
}

int cmd_ablate(const Experiment& ex, std::ostream& out) {
  Resolved r = resolve(ex, {"views"});
  std::vector<std::size_t> views;
  std::string views_text = "1,3,5,10";
  if (auto it = r.kv.find("views"); it != r.kv.end()) views_text = it->second;
  for (const std::string& v : split_list(views_text)) views.push_back(parse_unsigned<std::size_t>("views", v));
  if (views.empty()) throw UsageError("--views: empty list");
  if (!r.kv.count("seeds") && !r.kv.count("seed")) r.seeds = {0, 1, 2, 3, 4};
  r.model.kind = ModelKind::mfgat;

  const fs::path out_dir = ex.out_dir;
  fs::create_directories(out_dir);
  std::ofstream runs = open_output(out_dir / "ablation_runs.csv");
  std::ofstream summary = open_output(out_dir / "ablation_summary.csv");
  std::ofstream plot = open_output(out_dir / "ablation.dat");
  const auto echo = echo_of(r, views_text);
  write_echo(runs, echo);
  write_echo(summary, echo);
  write_echo(plot, echo);
  runs << kRunCsvHeader << "\n";
  summary << kRunCsvHeader << "\n";
  plot << "# dataset views median_test_accuracy\n";

  for (const std::string& name : r.datasets) {
    const Dataset ds = load_dataset(r.dataset_dir, name);
    const auto rows = ablate_views(ds, r.model, r.train, views, r.seeds, ex.jobs);
    for (const AblationRow& row : rows) {
      std::vector<double> stops, walls;
      for (const AblationCell& c : row.runs) {
        runs << run_csv_row("mfgat", name, c.views, std::to_string(c.seed), c.test_accuracy,
                            static_cast<double>(c.stopped_epoch), c.wall_time_s)
             << "\n";
        stops.push_back(static_cast<double>(c.stopped_epoch));
        walls.push_back(c.wall_time_s);
      }
      summary << run_csv_row("mfgat", name, row.views, "median", row.median_accuracy,
                             median(stops), median(walls))
              << "\n";
      plot << name << " " << row.views << " " << real(row.median_accuracy) << "\n";
      out << name << " views " << row.views << " median test_accuracy "
          << fixed4(row.median_accuracy) << "\n";
    }
  }
  return kOk;
}

}  // namespace

int report_gradcheck(const std::vector<GradcheckCase>& cases, double h, std::ostream& out,
                     std::ostream& err) {
  const std::vector<GradcheckRow> rows = run_gradcheck(cases, h);
  std::vector<std::string> failed;
  out << std::left << std::setw(22) << "case" << std::right << std::setw(14) << "max_rel_err"
      << std::setw(11) << "threshold" << "  result\n";
  for (const GradcheckRow& row : rows) {
    char err_buf[32], thr_buf[32];
    std::snprintf(err_buf, sizeof err_buf, "%.3e", row.max_rel_error);
    std::snprintf(thr_buf, sizeof thr_buf, "%.0e", row.threshold);
    out << std::left << std::setw(22) << row.name << std::right << std::setw(14) << err_buf
        << std::setw(11) << thr_buf << "  " << (row.passed ? "PASS" : "FAIL") << "\n";
    if (!row.passed) failed.push_back(row.name);
  }
  if (failed.empty()) return kOk;
  err << "gradcheck failed for:";
  for (const auto& f : failed) err << " " << f;
  err << "\n";
  return kGradcheck;
}

std::map<std::string, std::string> read_key_value_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("config file not found: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path.filename().string(), line_no, "expected key=value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-view graph attention networks for graph classification", "mfgat"};
  app.require_subcommand(1);

  Experiment inspect_ex, train_ex, ablate_ex;
  bool inspect_csv = false;
  CLI::App* inspect = app.add_subcommand("inspect", "dataset statistics");
  inspect_ex.add_to(inspect);
  inspect->add_flag("--csv", inspect_csv, "also write <out>/stats.csv");

  CLI::App* train = app.add_subcommand("train", "train and test one model per seed");
  train_ex.add_to(train);

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "accuracy of a saved checkpoint");
  evaluate->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file")->required();
  evaluate->add_option("--dataset-dir", eval_args.dataset_dir, "dataset root (default $MFGAT_DATA_DIR)");
  evaluate->add_option("--dataset", eval_args.dataset, "dataset name (default: from checkpoint)");
  evaluate->add_option("--split", eval_args.split, "fractions (default: from checkpoint)");
  evaluate->add_option("--split-seed", eval_args.split_seed, "split seed (default: from checkpoint)");
  evaluate->add_option("--subset", eval_args.subset, "test | val | train | all")
      ->check(CLI::IsMember({"test", "val", "train", "all"}))
      ->capture_default_str();

  CLI::App* ablate = app.add_subcommand("ablate", "view-count ablation");
  ablate_ex.add_to(ablate);

  std::uint64_t gc_seed = 7;
  double gc_h = 1e-5;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  gradcheck->add_option("--seed", gc_seed, "input seed")->capture_default_str();
  gradcheck->add_option("--step", gc_h, "central-difference step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "mfgat: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*inspect) return cmd_inspect(inspect_ex, inspect_csv, out);
    if (*train) return cmd_train(train_ex, out);
    if (*evaluate) return cmd_evaluate(eval_args, out);
    if (*ablate) return cmd_ablate(ablate_ex, out);
    if (*gradcheck) return report_gradcheck(default_gradcheck_cases(gc_seed), gc_h, out, err);
  } catch (const UsageError& e) {
    err << "mfgat: " << e.what() << "\n";
    return kUsage;
  } catch (const MissingInput& e) {
    err << "mfgat: " << e.what() << "\n";
    return kInput;
  } catch (const FormatError& e) {
    err << "mfgat: " << e.what() << "\n";
    return kInput;
  } catch (const ValidationError& e) {
    err << "mfgat: " << e.what() << "\n";
    return kValidation;
  } catch (const InvalidInput& e) {
    err << "mfgat: " << e.what() << "\n";
    return kValidation;
  } catch (const DivergenceError& e) {
    err << "mfgat: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    err << "mfgat: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace mfgat::cli
