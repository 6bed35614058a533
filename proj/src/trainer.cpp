#include "dgcca/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dgcca/errors.hpp"
#include "dgcca/gcca.hpp"
#include "dgcca/rng.hpp"
#include "dgcca/serialize.hpp"

namespace dgcca {

using json = nlohmann::json;

void validate(const TrainConfig& config) {
  if (config.views.size() < 2) {
    throw ConfigError("config: need at least two views");
  }
  for (std::size_t j = 0; j < config.views.size(); ++j) {
    const ViewConfig& view = config.views[j];
    if (view.widths.size() < 2) {
      throw ConfigError("config: view " + std::to_string(j) +
                        " needs input and output widths");
    }
    for (Index w : view.widths) {
      if (w < 1) throw ConfigError("config: layer widths must be >= 1");
    }
    if (view.identity_init) {
      for (Index w : view.widths) {
        if (w != view.widths[0]) {
          throw ConfigError("config: identity init requires equal layer widths");
        }
      }
    }
    if (view.widths.back() < config.r) {
      throw ConfigError("config: view " + std::to_string(j) +
                        " output width is smaller than r");
    }
  }
  if (config.r < 1) throw ConfigError("config: r must be >= 1");
  if (config.eps < 0.0) throw ConfigError("config: eps must be nonnegative");
  if (config.batch_size < std::max<Index>(config.r, 2)) {
    throw ConfigError("config: batch size must be >= max(r, 2)");
  }
  if (config.epochs < 0) throw ConfigError("config: epochs must be >= 0");
  if (config.tuning_fraction < 0.0 || config.tuning_fraction > 0.5) {
    throw ConfigError("config: tuning fraction must lie in [0, 0.5]");
  }
  if (config.l1 < 0.0 || config.l2 < 0.0) {
    throw ConfigError("config: regularization constants must be nonnegative");
  }
  if (config.full_train_eval_every < 0) {
    throw ConfigError("config: full_train_eval_every must be >= 0");
  }
  if (!config.weights.empty() && config.weights.size() != config.views.size()) {
    throw ConfigError("config: weight count must match view count");
  }
  try {
    validate(config.optimizer);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

namespace {

Index min_batch(const TrainConfig& config) {
  return std::max<Index>(config.r + 1, 16);
}

void check_views_against_config(const std::vector<Matrix>& views,
                                const TrainConfig& config) {
  if (views.size() != config.views.size()) {
    throw DataError("trainer: dataset has " + std::to_string(views.size()) +
                    " views, config expects " + std::to_string(config.views.size()));
  }
  const Index n = views.empty() ? 0 : views[0].cols();
  for (std::size_t j = 0; j < views.size(); ++j) {
    require_finite(views[j], "trainer view");
    if (views[j].rows() != config.views[j].widths.front()) {
      throw DataError("trainer: view " + std::to_string(j) + " has " +
                      std::to_string(views[j].rows()) + " features, config expects " +
                      std::to_string(config.views[j].widths.front()));
    }
    if (views[j].cols() != n) {
      throw DataError("trainer: views disagree on sample count");
    }
  }
}

Matrix gather_columns(const Matrix& m, const std::vector<Index>& indices,
                      std::size_t begin, std::size_t count) {
  Matrix out(m.rows(), static_cast<Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    out.col(static_cast<Index>(i)) = m.col(indices[begin + i]);
  }
  return out;
}

struct ParamViews {
  std::vector<Eigen::Map<Vector>> params;
  std::vector<Index> sizes;
};

// Flat view of every trainable tensor, view-major then layer-major with the
// weight matrix before its bias. The optimizer state follows this order.
ParamViews flatten_params(std::vector<MlpNetwork>& nets) {
  ParamViews out;
  for (MlpNetwork& net : nets) {
    for (std::size_t k = 0; k < net.depth(); ++k) {
      out.params.emplace_back(net.weights[k].data(), net.weights[k].size());
      out.sizes.push_back(net.weights[k].size());
      out.params.emplace_back(net.biases[k].data(), net.biases[k].size());
      out.sizes.push_back(net.biases[k].size());
    }
  }
  return out;
}

std::vector<Eigen::Map<const Vector>> flatten_grads(
    const std::vector<ParamGradients>& grads) {
  std::vector<Eigen::Map<const Vector>> out;
  for (const ParamGradients& g : grads) {
    for (std::size_t k = 0; k < g.weights.size(); ++k) {
      out.emplace_back(g.weights[k].data(), g.weights[k].size());
      out.emplace_back(g.biases[k].data(), g.biases[k].size());
    }
  }
  return out;
}

GccaSolution solve_on_outputs(const std::vector<Matrix>& outputs,
                              const TrainConfig& config) {
  GccaInput input;
  input.views = outputs;
  input.weights = config.weights;
  input.eps = config.eps;
  input.r = config.r;
  return solve_gcca(input);
}

// Forward all views over the given columns, center the outputs on their own
// means, and solve GCCA on them (frozen networks).
GccaSolution frozen_pass(const std::vector<MlpNetwork>& nets,
                         const std::vector<Matrix>& views,
                         const std::vector<Index>& indices,
                         const TrainConfig& config) {
  std::vector<Matrix> outputs;
  outputs.reserve(nets.size());
  for (std::size_t j = 0; j < nets.size(); ++j) {
    const Matrix cols = gather_columns(views[j], indices, 0, indices.size());
    outputs.push_back(mean_center_columns(forward(nets[j], cols).output()));
  }
  return solve_on_outputs(outputs, config);
}

void warn(const TrainHooks& hooks, const std::string& message) {
  if (hooks.on_warning) hooks.on_warning(message);
}

}  // namespace

DgccaModel train_dgcca(const std::vector<Matrix>& views, const TrainConfig& config,
                       const TrainHooks& hooks) {
  validate(config);
  check_views_against_config(views, config);
  const std::size_t num_views = views.size();
  const Index n = views[0].cols();

  Rng root(config.seed);
  Rng split_rng = root.fork(0);
  Rng shuffle_rng = root.fork(1);

  // Held-out tuning split; the training indices stay in ascending order so
  // G's columns map monotonically onto the original dataset.
  const Index n_tune = static_cast<Index>(
      std::floor(config.tuning_fraction * static_cast<double>(n)));
  std::vector<Index> all(n);
  std::iota(all.begin(), all.end(), Index{0});
  split_rng.shuffle(all);
  std::vector<Index> tune_indices(all.begin(), all.begin() + n_tune);
  std::sort(tune_indices.begin(), tune_indices.end());
  std::vector<Index> train_indices(all.begin() + n_tune, all.end());
  std::sort(train_indices.begin(), train_indices.end());
  const Index n_train = static_cast<Index>(train_indices.size());

  if (n_train < std::max<Index>(config.r + 1, 2)) {
    throw DataError("trainer: training split too small for r");
  }
  if (n_tune > 0 && n_tune < std::max<Index>(config.r + 1, 2)) {
    throw DataError("trainer: tuning split too small for r; adjust tuning fraction");
  }
  // Usable batches are full ones, or a lone short batch of at least
  // max(r + 1, 16) columns when the data does not fill batch_size.
  if (config.epochs > 0 && n_train < config.batch_size && n_train < min_batch(config)) {
    throw DataError("trainer: training split yields no usable batch (need " +
                    std::to_string(std::min(config.batch_size, min_batch(config))) +
                    " columns)");
  }

  DgccaModel model;
  model.config = config;
  model.train_indices = train_indices;
  model.tune_indices = tune_indices;
  for (std::size_t j = 0; j < num_views; ++j) {
    const ViewConfig& vc = config.views[j];
    model.networks.push_back(
        vc.identity_init
            ? identity_network(vc.widths, vc.activation)
            : init_network(vc.widths, vc.activation, root.fork(2 + j).next_u64()));
  }

  ParamViews flat = flatten_params(model.networks);
  Optimizer optimizer(config.optimizer, flat.sizes);
  const Regularization reg{config.l1, config.l2};

  for (long epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    std::vector<Index> order = train_indices;
    if (config.shuffle) shuffle_rng.shuffle(order);

    double err_sum = 0.0;
    long batches = 0;
    for (Index begin = 0; begin < n_train; begin += config.batch_size) {
      const Index count = std::min<Index>(config.batch_size, n_train - begin);
      // full batches always run; a short remainder must clear max(r + 1, 16)
      if (count < config.batch_size && count < min_batch(config)) break;

      std::vector<ForwardTrace> traces(num_views);
      std::vector<Matrix> outputs(num_views);
      for (std::size_t j = 0; j < num_views; ++j) {
        const Matrix batch = gather_columns(views[j], order,
                                            static_cast<std::size_t>(begin),
                                            static_cast<std::size_t>(count));
        traces[j] = forward(model.networks[j], batch);
        if (!traces[j].output().allFinite()) {
          throw DivergenceError("epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batches + 1) + ": view " +
                                std::to_string(j) + " produced non-finite outputs");
        }
        outputs[j] = mean_center_columns(traces[j].output());
      }

      GccaSolution sol;
      try {
        sol = solve_on_outputs(outputs, config);
      } catch (const std::exception& e) {
        // Singular covariances and overflowed products both surface here;
        // either way the batch solve failed and the context matters.
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches + 1) + ": " + e.what());
      }
      if (!std::isfinite(sol.reconstruction_error)) {
        throw DivergenceError("epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batches + 1) +
                              ": non-finite reconstruction error");
      }
      if (sol.degenerate_eigengap) {
        warn(hooks, "epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(batches + 1) + ": eigengap " +
                        std::to_string(sol.eigengap) +
                        " below 1e-6; gradient direction is ill-conditioned");
      }
      err_sum += sol.reconstruction_error;
      ++batches;

      // Algorithm-1 sign: descend the reconstruction error. This is -1/2 of
      // the eigenvalue-sum gradient; the factor is absorbed by the rate.
      std::vector<ParamGradients> grads(num_views);
      for (std::size_t j = 0; j < num_views; ++j) {
        const Matrix& u = sol.u[j];
        const double w = config.weights.empty() ? 1.0 : config.weights[j];
        const Matrix output_grad =
            w * (u * (u.transpose() * outputs[j]) - u * sol.g);
        grads[j] = backward(model.networks[j], traces[j], output_grad, reg);
      }
      try {
        optimizer.apply_update(flat.params, flatten_grads(grads));
      } catch (const DivergenceError& e) {
        throw DivergenceError("epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batches) + ": " + e.what());
      }
    }
    if (batches == 0) {
      throw DataError("trainer: no usable batches in epoch " + std::to_string(epoch));
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_err = err_sum / static_cast<double>(batches);
    if (config.full_train_eval_every > 0 &&
        epoch % config.full_train_eval_every == 0) {
      record.train_err =
          frozen_pass(model.networks, views, train_indices, config).reconstruction_error;
    }
    if (n_tune > 0) {
      record.tune_err =
          frozen_pass(model.networks, views, tune_indices, config).reconstruction_error;
    }
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start)
            .count();
    if (!std::isfinite(record.train_err) ||
        (record.tune_err && !std::isfinite(*record.tune_err))) {
      throw DivergenceError("epoch " + std::to_string(epoch) +
                            ": non-finite epoch error");
    }
    model.history.push_back(record);
    if (hooks.on_epoch) hooks.on_epoch(record);
  }

  // Final full pass over the training split fixes U_j, G, and the stored
  // per-view output means used by transform on new data.
  std::vector<Matrix> final_outputs(num_views);
  for (std::size_t j = 0; j < num_views; ++j) {
    const Matrix cols = gather_columns(views[j], train_indices, 0, train_indices.size());
    const Matrix out = forward(model.networks[j], cols).output();
    model.output_means.push_back(out.rowwise().mean());
    final_outputs[j] = mean_center_columns(out);
  }
  GccaSolution final_sol = solve_on_outputs(final_outputs, config);
  if (final_sol.degenerate_eigengap) {
    warn(hooks, "final pass: eigengap " + std::to_string(final_sol.eigengap) +
                    " below 1e-6; G basis is arbitrary within the eigenspace");
  }
  model.u = std::move(final_sol.u);
  model.g = std::move(final_sol.g);
  model.eigenvalues = std::move(final_sol.eigenvalues);
  model.reconstruction_error = final_sol.reconstruction_error;
  return model;
}

namespace {

void check_transform_views(const DgccaModel& model, const std::vector<Matrix>& views) {
  if (views.size() != model.networks.size()) {
    throw DataError("transform: view count mismatch");
  }
  const Index n = views.empty() ? 0 : views[0].cols();
  for (std::size_t j = 0; j < views.size(); ++j) {
    if (views[j].rows() != model.networks[j].input_width()) {
      throw DataError("transform: view " + std::to_string(j) + " dimension mismatch");
    }
    if (views[j].cols() != n) {
      throw DataError("transform: views disagree on sample count");
    }
  }
}

}  // namespace

std::vector<Matrix> transform(const DgccaModel& model, const std::vector<Matrix>& views) {
  check_transform_views(model, views);
  std::vector<Matrix> projections;
  projections.reserve(views.size());
  for (std::size_t j = 0; j < views.size(); ++j) {
    Matrix out = forward(model.networks[j], views[j]).output();
    out.colwise() -= model.output_means[j];
    projections.push_back(model.u[j].transpose() * out);
  }
  return projections;
}

double tuning_reconstruction_error(const DgccaModel& model,
                                   const std::vector<Matrix>& tuning_views) {
  check_transform_views(model, tuning_views);
  if (tuning_views[0].cols() < model.config.r) {
    throw DataError("tuning_reconstruction_error: tuning set smaller than r");
  }
  std::vector<Matrix> outputs;
  outputs.reserve(tuning_views.size());
  for (std::size_t j = 0; j < tuning_views.size(); ++j) {
    Matrix out = forward(model.networks[j], tuning_views[j]).output();
    out.colwise() -= model.output_means[j];
    outputs.push_back(std::move(out));
  }
  return solve_on_outputs(outputs, model.config).reconstruction_error;
}

namespace {

json view_config_to_json(const ViewConfig& vc) {
  json j;
  j["widths"] = vc.widths;
  j["activation"] = std::string(activation_name(vc.activation));
  if (vc.identity_init) j["init"] = "identity";
  return j;
}

json train_config_to_json(const TrainConfig& config) {
  json j;
  j["r"] = config.r;
  j["eps"] = config.eps;
  j["batch_size"] = config.batch_size;
  j["epochs"] = config.epochs;
  j["seed"] = config.seed;
  j["shuffle"] = config.shuffle;
  j["tuning_fraction"] = config.tuning_fraction;
  j["l1"] = config.l1;
  j["l2"] = config.l2;
  j["full_train_eval_every"] = config.full_train_eval_every;
  if (!config.weights.empty()) j["weights"] = config.weights;
  json opt;
  opt["kind"] = std::string(optimizer_name(config.optimizer.kind));
  opt["learning_rate"] = config.optimizer.learning_rate;
  opt["momentum"] = config.optimizer.momentum;
  opt["beta1"] = config.optimizer.beta1;
  opt["beta2"] = config.optimizer.beta2;
  opt["epsilon"] = config.optimizer.epsilon;
  j["optimizer"] = opt;
  json views = json::array();
  for (const ViewConfig& vc : config.views) views.push_back(view_config_to_json(vc));
  j["views"] = views;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig config;
  config.r = j.at("r").get<Index>();
  config.eps = j.at("eps").get<double>();
  config.batch_size = j.at("batch_size").get<Index>();
  config.epochs = j.at("epochs").get<long>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.shuffle = j.at("shuffle").get<bool>();
  config.tuning_fraction = j.at("tuning_fraction").get<double>();
  config.l1 = j.at("l1").get<double>();
  config.l2 = j.at("l2").get<double>();
  config.full_train_eval_every = j.at("full_train_eval_every").get<long>();
  if (j.contains("weights")) config.weights = j["weights"].get<std::vector<double>>();
  const json& opt = j.at("optimizer");
  config.optimizer.kind = optimizer_from_name(opt.at("kind").get<std::string>());
  config.optimizer.learning_rate = opt.at("learning_rate").get<double>();
  config.optimizer.momentum = opt.at("momentum").get<double>();
  config.optimizer.beta1 = opt.at("beta1").get<double>();
  config.optimizer.beta2 = opt.at("beta2").get<double>();
  config.optimizer.epsilon = opt.at("epsilon").get<double>();
  for (const json& vj : j.at("views")) {
    ViewConfig vc;
    vc.widths = vj.at("widths").get<std::vector<Index>>();
    vc.activation = activation_from_name(vj.at("activation").get<std::string>());
    vc.identity_init = vj.value("init", "glorot") == "identity";
    config.views.push_back(std::move(vc));
  }
  return config;
}

}  // namespace

void save_model(const DgccaModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["format_version"] = 1;
  manifest["kind"] = "dgcca-model";
  manifest["num_views"] = model.networks.size();
  manifest["r"] = model.config.r;
  manifest["reconstruction_error"] = model.reconstruction_error;
  manifest["eigenvalues"] = std::vector<double>(
      model.eigenvalues.data(), model.eigenvalues.data() + model.eigenvalues.size());
  manifest["train_indices"] = model.train_indices;
  manifest["tune_indices"] = model.tune_indices;
  manifest["config"] = train_config_to_json(model.config);
  json history = json::array();
  for (const EpochRecord& rec : model.history) {
    json r;
    r["epoch"] = rec.epoch;
    r["train_err"] = rec.train_err;
    if (rec.tune_err) r["tune_err"] = *rec.tune_err;
    history.push_back(std::move(r));
  }
  manifest["history"] = history;

  for (std::size_t j = 0; j < model.networks.size(); ++j) {
    write_network(dir / ("net_" + std::to_string(j) + ".mvnn"), model.networks[j]);
    write_matrix_mvmx(dir / ("u_" + std::to_string(j) + ".mvmx"), model.u[j]);
    write_matrix_mvmx(dir / ("mean_" + std::to_string(j) + ".mvmx"),
                      model.output_means[j]);
  }
  write_matrix_mvmx(dir / "g.mvmx", model.g);

  std::ofstream out(dir / "model.json");
  if (!out) throw DataError("cannot write model.json in " + dir.string());
  out << manifest.dump(2) << '\n';
}

DgccaModel load_model(const std::filesystem::path& dir) {
  std::ifstream in(dir / "model.json");
  if (!in) throw DataError("missing model.json in " + dir.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError("malformed model.json in " + dir.string() + ": " + e.what());
  }
  if (manifest.value("format_version", 0) != 1) {
    throw DataError("unsupported model format version in " + dir.string());
  }

  DgccaModel model;
  model.config = train_config_from_json(manifest.at("config"));
  model.reconstruction_error = manifest.at("reconstruction_error").get<double>();
  const auto eigenvalues = manifest.at("eigenvalues").get<std::vector<double>>();
  model.eigenvalues = Eigen::Map<const Vector>(eigenvalues.data(),
                                               static_cast<Index>(eigenvalues.size()));
  model.train_indices = manifest.at("train_indices").get<std::vector<Index>>();
  model.tune_indices = manifest.at("tune_indices").get<std::vector<Index>>();
  for (const json& rec : manifest.at("history")) {
    EpochRecord r;
    r.epoch = rec.at("epoch").get<long>();
    r.train_err = rec.at("train_err").get<double>();
    if (rec.contains("tune_err")) r.tune_err = rec["tune_err"].get<double>();
    model.history.push_back(r);
  }

  const auto num_views = manifest.at("num_views").get<std::size_t>();
  for (std::size_t j = 0; j < num_views; ++j) {
    model.networks.push_back(read_network(dir / ("net_" + std::to_string(j) + ".mvnn")));
    model.u.push_back(read_matrix_mvmx(dir / ("u_" + std::to_string(j) + ".mvmx")));
    Matrix mean = read_matrix_mvmx(dir / ("mean_" + std::to_string(j) + ".mvmx"));
    if (mean.cols() != 1) throw DataError("model mean file must be a column vector");
    model.output_means.push_back(mean.col(0));
    if (model.u[j].rows() != model.networks[j].output_width() ||
        model.u[j].cols() != model.config.r ||
        model.output_means[j].size() != model.networks[j].output_width()) {
      throw DataError("model component shapes are inconsistent in " + dir.string());
    }
  }
  model.g = read_matrix_mvmx(dir / "g.mvmx");
  if (model.g.rows() != model.config.r ||
      model.g.cols() != static_cast<Index>(model.train_indices.size())) {
    throw DataError("model G shape inconsistent in " + dir.string());
  }
  return model;
}

}  // namespace dgcca
