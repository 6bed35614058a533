// Command-line driver: synth / train / transform / eval / gradcheck.
//
// Exit codes (stable scripting contract):
//   0 success, 2 config error, 3 data/IO error, 4 numerical divergence,
//   5 gradcheck failure, 1 anything else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dgcca/config.hpp"
#include "dgcca/data.hpp"
#include "dgcca/errors.hpp"
#include "dgcca/eval.hpp"
#include "dgcca/gcca.hpp"
#include "dgcca/rng.hpp"
#include "dgcca/serialize.hpp"
#include "dgcca/trainer.hpp"
#include "dgcca/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace dgcca;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitGradcheck = 5;

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// One run owns its output directory; the lock file keeps concurrent runs
// from interleaving artifacts.
class RunDir {
 public:
  RunDir(const fs::path& dir, bool force) : dir_(dir) {
    if (fs::exists(dir_) && !fs::is_directory(dir_)) {
      throw DataError("output path exists and is not a directory: " + dir_.string());
    }
    if (fs::exists(dir_) && !fs::is_empty(dir_) && !force) {
      throw DataError("output directory is not empty (use --force): " + dir_.string());
    }
    fs::create_directories(dir_);
    lock_ = dir_ / ".dgcca.lock";
    std::FILE* f = std::fopen(lock_.c_str(), "wx");
    if (f == nullptr) {
      throw DataError("output directory is locked by another run: " + dir_.string());
    }
    std::fclose(f);
  }
  ~RunDir() {
    std::error_code ec;
    fs::remove(lock_, ec);
  }
  RunDir(const RunDir&) = delete;
  RunDir& operator=(const RunDir&) = delete;

  const fs::path& path() const { return dir_; }

 private:
  fs::path dir_;
  fs::path lock_;
};

// Run manifests are named run_manifest.json so they never collide with a
// dataset's own manifest.json when a command writes into a dataset directory.
void write_manifest(const fs::path& dir, json manifest) {
  manifest["tool"] = "dgcca";
  manifest["tool_version"] = kVersion;
  manifest["written_at"] = timestamp_utc();
  std::ofstream out(dir / "run_manifest.json");
  if (!out) throw DataError("cannot write run manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  Index n = 200;
  double noise = 0.05;
  double jitter = 0.15;
  std::uint64_t seed = 0;
  std::string out;
  bool force = false;
};

int cmd_synth(const SynthArgs& args) {
  SyntheticOptions options;
  options.n_per_component = args.n;
  options.noise = args.noise;
  options.angle_jitter = args.jitter;
  options.seed = args.seed;

  MultiviewDataset dataset;
  try {
    dataset = generate_synthetic_mixture(options);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  RunDir run(args.out, args.force);
  save_dataset(dataset, run.path());
  json manifest;
  manifest["command"] = "synth";
  manifest["seed"] = args.seed;
  manifest["n_per_component"] = args.n;
  manifest["noise"] = args.noise;
  manifest["angle_jitter"] = args.jitter;
  manifest["artifacts"] = {"manifest.json (dataset)", "view_*.mvmx", "labels.mvlb"};
  write_manifest(run.path(), std::move(manifest));
  std::cout << "wrote dataset: " << dataset.num_views() << " views, N="
            << dataset.num_samples() << " -> " << run.path().string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  bool force = false;
};

int cmd_train(const TrainArgs& args) {
  const TrainConfig config = load_train_config(args.config);
  const MultiviewDataset dataset = load_dataset(args.data);

  RunDir run(args.out, args.force);
  std::ofstream epochs_log(run.path() / "epochs.jsonl");
  std::ofstream timing_log(run.path() / "timing.jsonl");
  if (!epochs_log || !timing_log) {
    throw DataError("cannot open run logs in " + run.path().string());
  }

  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochRecord& rec) {
    json r;
    r["epoch"] = rec.epoch;
    r["train_err"] = rec.train_err;
    r["tune_err"] = rec.tune_err ? json(*rec.tune_err) : json(nullptr);
    epochs_log << r.dump() << '\n';
    epochs_log.flush();
    json t;
    t["epoch"] = rec.epoch;
    t["seconds"] = rec.seconds;
    timing_log << t.dump() << '\n';
    timing_log.flush();
  };
  hooks.on_warning = [](const std::string& message) {
    std::cerr << "warning: " << message << "\n";
  };

  const DgccaModel model = train_dgcca(dataset.views, config, hooks);
  save_model(model, run.path() / "model");

  json manifest;
  manifest["command"] = "train";
  manifest["config_path"] = args.config;
  manifest["data_path"] = args.data;
  manifest["seed"] = config.seed;
  manifest["config"] = json::parse(train_config_to_json_string(config));
  manifest["artifacts"] = {"model/", "epochs.jsonl", "timing.jsonl"};
  manifest["final_reconstruction_error"] = model.reconstruction_error;
  write_manifest(run.path(), std::move(manifest));

  std::cout << "trained " << model.networks.size() << " networks for "
            << model.history.size() << " epochs; final reconstruction error "
            << model.reconstruction_error << "\n"
            << "model -> " << (run.path() / "model").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// transform

struct TransformArgs {
  std::string model;
  std::string data;
  std::string out;
  bool force = false;
};

int cmd_transform(const TransformArgs& args) {
  const DgccaModel model = load_model(args.model);
  const MultiviewDataset dataset = load_dataset(args.data);

  const std::vector<Matrix> projections = transform(model, dataset.views);

  RunDir run(args.out, args.force);
  json files = json::array();
  for (std::size_t j = 0; j < projections.size(); ++j) {
    const std::string file = "embedding_" + std::to_string(j) + ".mvmx";
    write_matrix_mvmx(run.path() / file, projections[j]);
    files.push_back({{"view", dataset.view_names[j]},
                     {"file", file},
                     {"rows", projections[j].rows()},
                     {"cols", projections[j].cols()}});
  }
  json manifest;
  manifest["command"] = "transform";
  manifest["model_path"] = args.model;
  manifest["data_path"] = args.data;
  manifest["embeddings"] = files;
  write_manifest(run.path(), std::move(manifest));
  std::cout << "wrote " << projections.size() << " embeddings (" << model.config.r
            << " x " << dataset.num_samples() << ") -> " << run.path().string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string metric = "knn";
  std::string embeddings;
  std::string labels;
  std::string data;
  std::string model;
  int view = -1;
  int k = 4;
  double ridge = 1e-3;
  double split = -1.0;  // fraction held out for scoring; default by metric
  std::uint64_t seed = 0;
  std::string out;
};

// Resolves (points, labels) from either an embedding matrix plus a label
// file, or a dataset (raw view or transformed view).
void resolve_eval_inputs(const EvalArgs& args, Matrix& points,
                         std::vector<std::int32_t>& labels) {
  if (!args.embeddings.empty()) {
    points = read_matrix_mvmx(args.embeddings);
    std::vector<std::int32_t> all_labels;
    if (!args.labels.empty()) {
      all_labels = read_labels(args.labels);
    } else if (!args.data.empty()) {
      all_labels = load_dataset(args.data).labels;
    } else {
      throw ConfigError("eval: --embeddings needs --labels or --data for labels");
    }
    if (static_cast<Index>(all_labels.size()) == points.cols()) {
      labels = all_labels;
    } else if (!args.model.empty()) {
      // G covers the model's training columns; align labels through them.
      const DgccaModel model = load_model(args.model);
      if (static_cast<Index>(model.train_indices.size()) != points.cols()) {
        throw DataError("eval: embedding columns match neither the labels nor "
                        "the model's training split");
      }
      labels.reserve(model.train_indices.size());
      for (Index idx : model.train_indices) {
        if (idx < 0 || idx >= static_cast<Index>(all_labels.size())) {
          throw DataError("eval: model train index out of label range");
        }
        labels.push_back(all_labels[idx]);
      }
    } else {
      throw DataError("eval: label count does not match embedding columns "
                      "(pass --model to align through its training split)");
    }
    return;
  }

  if (args.data.empty()) {
    throw ConfigError("eval: need --embeddings or --data");
  }
  const MultiviewDataset dataset = load_dataset(args.data);
  if (!dataset.has_labels()) throw DataError("eval: dataset has no labels");
  if (args.view < 0 || args.view >= static_cast<int>(dataset.num_views())) {
    throw ConfigError("eval: --view must select a dataset view");
  }
  labels = dataset.labels;
  if (args.model.empty()) {
    points = dataset.views[static_cast<std::size_t>(args.view)];
  } else {
    const DgccaModel model = load_model(args.model);
    points = transform(model, dataset.views)[static_cast<std::size_t>(args.view)];
  }
}

int cmd_eval(const EvalArgs& args) {
  if (args.metric != "knn" && args.metric != "probe") {
    throw ConfigError("eval: unknown metric '" + args.metric + "' (knn|probe)");
  }
  Matrix points;
  std::vector<std::int32_t> labels;
  resolve_eval_inputs(args, points, labels);

  const double split = args.split >= 0.0 ? args.split
                       : (args.metric == "probe" ? 0.5 : 0.0);
  if (split < 0.0 || split >= 1.0) {
    throw ConfigError("eval: --split must lie in [0, 1)");
  }

  // Fit on the retained columns; score on the held-out ones (all columns
  // when split == 0).
  const Index n = points.cols();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(args.seed);
  rng.shuffle(order);
  const Index n_eval = static_cast<Index>(std::floor(split * static_cast<double>(n)));
  std::vector<Index> fit_idx(order.begin() + n_eval, order.end());
  std::vector<Index> eval_idx =
      n_eval == 0 ? fit_idx : std::vector<Index>(order.begin(), order.begin() + n_eval);

  auto take = [&](const std::vector<Index>& idx, Matrix& m,
                  std::vector<std::int32_t>& l) {
    m.resize(points.rows(), static_cast<Index>(idx.size()));
    l.clear();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      m.col(static_cast<Index>(i)) = points.col(idx[i]);
      l.push_back(labels[static_cast<std::size_t>(idx[i])]);
    }
  };
  Matrix fit_points, eval_points;
  std::vector<std::int32_t> fit_labels, eval_labels;
  take(fit_idx, fit_points, fit_labels);
  take(eval_idx, eval_points, eval_labels);

  EvalReport report;
  try {
    if (args.metric == "knn") {
      const auto predictions = knn_classify(fit_points, fit_labels, eval_points, args.k);
      std::int32_t max_label = 0;
      for (std::int32_t l : labels) max_label = std::max(max_label, l);
      report = evaluate_predictions(eval_labels, predictions, max_label + 1, "knn",
                                    static_cast<double>(args.k));
    } else {
      const LinearProbe probe = fit_linear_probe(fit_points, fit_labels, args.ridge);
      report = score(probe, eval_points, eval_labels);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const std::string text = report.to_json_string();
  std::cout << text << "\n";
  if (!args.out.empty()) {
    std::ofstream out(args.out);
    if (!out) throw DataError("cannot write report: " + args.out);
    out << text << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
  std::uint64_t seed = 0;
  int views = 3;
  std::vector<Index> dims;
  Index samples_per_view = 20;
  Index n = 12;
  Index r = 2;
  double eps = 1e-6;
  double step = 1e-5;
  bool identical = false;  // degenerate case: every view is the same matrix
  bool negate = false;     // test hook: flips the analytic sign to force failure
};

int cmd_gradcheck(const GradcheckArgs& args) {
  if (args.views < 2) throw ConfigError("gradcheck: need at least 2 views");
  if (args.r < 1 || args.n < args.r) throw ConfigError("gradcheck: need N >= r >= 1");

  std::vector<Index> dims = args.dims;
  if (dims.empty()) dims.assign(static_cast<std::size_t>(args.views), 5);
  if (dims.size() == 1) dims.assign(static_cast<std::size_t>(args.views), dims[0]);
  if (dims.size() != static_cast<std::size_t>(args.views)) {
    throw ConfigError("gradcheck: --dims must list one width per view");
  }

  Rng rng(args.seed);
  GccaInput input;
  input.eps = args.eps;
  input.r = args.r;
  for (Index d : dims) {
    if (d < args.r) throw ConfigError("gradcheck: view width below r");
    if (args.identical && !input.views.empty()) {
      if (d != dims[0]) {
        throw ConfigError("gradcheck: --identical needs equal --dims");
      }
      input.views.push_back(input.views.front());
      continue;
    }
    Matrix y(d, args.n);
    for (Index i = 0; i < d; ++i) {
      for (Index c = 0; c < args.n; ++c) y(i, c) = rng.gaussian();
    }
    input.views.push_back(mean_center_columns(y));
  }

  const GccaSolution sol = solve_gcca(input);
  if (sol.degenerate_eigengap) {
    std::cout << "eigengap " << sol.eigengap
              << " below 1e-6: instance is ill-conditioned, no verdict\n";
    return kExitGradcheck;
  }
  std::vector<Matrix> analytic = gcca_gradient(input, sol);
  if (args.negate) {
    for (Matrix& g : analytic) g = -g;
  }

  double max_rel = 0.0;
  long checked = 0;
  long skipped_small = 0;
  for (std::size_t j = 0; j < input.views.size(); ++j) {
    const Matrix& y = input.views[j];
    for (Index s = 0; s < args.samples_per_view; ++s) {
      const Index row = static_cast<Index>(rng.below(static_cast<std::uint64_t>(y.rows())));
      const Index col = static_cast<Index>(rng.below(static_cast<std::uint64_t>(y.cols())));
      const double fd = finite_difference_objective(input, j, row, col, args.step);
      const double an = analytic[j](row, col);
      const double scale = std::max(std::abs(fd), std::abs(an));
      if (scale <= 1e-6) {
        ++skipped_small;
        continue;
      }
      max_rel = std::max(max_rel, std::abs(fd - an) / scale);
      ++checked;
    }
  }

  const bool pass = max_rel <= 1e-4;
  std::cout << "checked " << checked << " entries (" << skipped_small
            << " skipped below magnitude 1e-6) across " << input.views.size()
            << " views; max relative error " << max_rel << "\n"
            << (pass ? "PASS" : "FAIL") << " (tolerance 1e-4)\n";
  return pass ? kExitOk : kExitGradcheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized and Deep Generalized CCA"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate the synthetic multiview mixture dataset");
  synth_cmd->add_option("--n", synth.n, "points per mixture component (min 50)");
  synth_cmd->add_option("--noise", synth.noise, "coordinate noise scale");
  synth_cmd->add_option("--jitter", synth.jitter, "per-view latent-angle jitter (revolutions)");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--out", synth.out, "output dataset directory")->required();
  synth_cmd->add_flag("--force", synth.force, "overwrite a non-empty output directory");

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train a DGCCA model from a config file");
  train_cmd->add_option("--config", train.config, "JSON training config")->required();
  train_cmd->add_option("--data", train.data, "dataset directory")->required();
  train_cmd->add_option("--out", train.out, "run output directory")->required();
  train_cmd->add_flag("--force", train.force, "overwrite a non-empty output directory");

  TransformArgs trans;
  CLI::App* trans_cmd = app.add_subcommand("transform", "project data through a trained model");
  trans_cmd->add_option("--model", trans.model, "model directory")->required();
  trans_cmd->add_option("--data", trans.data, "dataset directory")->required();
  trans_cmd->add_option("--out", trans.out, "output directory")->required();
  trans_cmd->add_flag("--force", trans.force, "overwrite a non-empty output directory");

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate embeddings with KNN or a linear probe");
  eval_cmd->add_option("--metric", eval.metric, "knn|probe");
  eval_cmd->add_option("--embeddings", eval.embeddings, "MVMX matrix of points (columns)");
  eval_cmd->add_option("--labels", eval.labels, "MVLB label file");
  eval_cmd->add_option("--data", eval.data, "dataset directory (labels and/or raw views)");
  eval_cmd->add_option("--model", eval.model, "model directory (transform views / align G labels)");
  eval_cmd->add_option("--view", eval.view, "view index when evaluating a dataset view");
  eval_cmd->add_option("--k", eval.k, "KNN neighbor count");
  eval_cmd->add_option("--ridge", eval.ridge, "probe ridge constant");
  eval_cmd->add_option("--split", eval.split, "held-out scoring fraction (default: probe 0.5, knn 0)");
  eval_cmd->add_option("--seed", eval.seed, "split seed");
  eval_cmd->add_option("--out", eval.out, "also write the report JSON here");

  GradcheckArgs grad;
  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "verify analytic GCCA gradients against finite differences");
  grad_cmd->add_option("--seed", grad.seed, "instance seed");
  grad_cmd->add_option("--views", grad.views, "number of views");
  grad_cmd->add_option("--dims", grad.dims, "per-view widths, comma-separated (one value broadcasts)")
      ->delimiter(',');
  grad_cmd->add_option("--samples", grad.samples_per_view, "entries sampled per view");
  grad_cmd->add_option("--N", grad.n, "columns per view");
  grad_cmd->add_option("--r", grad.r, "shared dimensionality");
  grad_cmd->add_option("--eps", grad.eps, "covariance regularization");
  grad_cmd->add_option("--step", grad.step, "finite-difference step");
  grad_cmd->add_flag("--identical", grad.identical,
                     "degenerate case: make every view the same matrix");
  grad_cmd->add_flag("--negate", grad.negate, "test hook: negate analytic gradients")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (train_cmd->parsed()) return cmd_train(train);
    if (trans_cmd->parsed()) return cmd_transform(trans);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (grad_cmd->parsed()) return cmd_gradcheck(grad);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
