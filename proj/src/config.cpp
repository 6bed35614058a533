#include "dgcca/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dgcca/errors.hpp"

namespace dgcca {

using json = nlohmann::json;

namespace {

void reject_unknown_keys(const json& object, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown config key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get_as(const json& object, const std::string& key, const std::string& where) {
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' in " + where +
                      " is missing or has the wrong type");
  }
}

template <typename T>
T get_or(const json& object, const std::string& key, const std::string& where,
         T fallback) {
  if (!object.contains(key)) return fallback;
  return get_as<T>(object, key, where);
}

OptimizerOptions parse_optimizer(const json& j) {
  reject_unknown_keys(
      j, {"kind", "learning_rate", "momentum", "beta1", "beta2", "epsilon"},
      "optimizer");
  OptimizerOptions opts;
  const std::string kind = get_or<std::string>(j, "kind", "optimizer", "sgd");
  try {
    opts.kind = optimizer_from_name(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  opts.learning_rate = get_or<double>(j, "learning_rate", "optimizer", 0.005);
  opts.momentum = get_or<double>(j, "momentum", "optimizer", 0.9);
  opts.beta1 = get_or<double>(j, "beta1", "optimizer", 0.9);
  opts.beta2 = get_or<double>(j, "beta2", "optimizer", 0.999);
  opts.epsilon = get_or<double>(j, "epsilon", "optimizer", 1e-8);
  return opts;
}

ViewConfig parse_view(const json& j, std::size_t index) {
  const std::string where = "views[" + std::to_string(index) + "]";
  reject_unknown_keys(j, {"widths", "activation", "init"}, where);
  ViewConfig view;
  view.widths = get_as<std::vector<Index>>(j, "widths", where);
  const std::string activation = get_or<std::string>(j, "activation", where, "sigmoid");
  try {
    view.activation = activation_from_name(activation);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(e.what()) + " in " + where);
  }
  const std::string init = get_or<std::string>(j, "init", where, "glorot");
  if (init == "identity") {
    view.identity_init = true;
  } else if (init != "glorot") {
    throw ConfigError("unknown init scheme '" + init + "' in " + where +
                      " (expected 'glorot' or 'identity')");
  }
  return view;
}

}  // namespace

TrainConfig parse_train_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  reject_unknown_keys(j,
                      {"r", "eps", "batch_size", "epochs", "seed", "shuffle",
                       "tuning_fraction", "optimizer", "l1", "l2", "weights",
                       "full_train_eval_every", "views"},
                      "config root");

  TrainConfig config;
  config.r = get_as<Index>(j, "r", "config root");
  config.epochs = get_as<long>(j, "epochs", "config root");
  config.eps = get_or<double>(j, "eps", "config root", 1e-8);
  config.batch_size = get_or<Index>(j, "batch_size", "config root", 100);
  config.seed = get_or<std::uint64_t>(j, "seed", "config root", 0);
  config.shuffle = get_or<bool>(j, "shuffle", "config root", true);
  config.tuning_fraction = get_or<double>(j, "tuning_fraction", "config root", 0.0);
  config.l1 = get_or<double>(j, "l1", "config root", 0.0);
  config.l2 = get_or<double>(j, "l2", "config root", 0.0);
  config.full_train_eval_every =
      get_or<long>(j, "full_train_eval_every", "config root", 0);
  if (j.contains("weights")) {
    config.weights = get_as<std::vector<double>>(j, "weights", "config root");
  }
  if (j.contains("optimizer")) {
    if (!j["optimizer"].is_object()) {
      throw ConfigError("config key 'optimizer' must be an object");
    }
    config.optimizer = parse_optimizer(j["optimizer"]);
  }

  if (!j.contains("views") || !j["views"].is_array()) {
    throw ConfigError("config key 'views' must be an array of view objects");
  }
  std::size_t index = 0;
  for (const json& vj : j["views"]) {
    if (!vj.is_object()) {
      throw ConfigError("views[" + std::to_string(index) + "] must be an object");
    }
    config.views.push_back(parse_view(vj, index));
    ++index;
  }

  validate(config);
  return config;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_train_config(buffer.str());
}

std::string train_config_to_json_string(const TrainConfig& config) {
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
  for (const ViewConfig& view : config.views) {
    json vj;
    vj["widths"] = view.widths;
    vj["activation"] = std::string(activation_name(view.activation));
    if (view.identity_init) vj["init"] = "identity";
    views.push_back(std::move(vj));
  }
  j["views"] = views;
  return j.dump(2);
}

}  // namespace dgcca
