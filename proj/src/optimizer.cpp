#include "dgcca/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dgcca/errors.hpp"

namespace dgcca {

OptimizerKind optimizer_from_name(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "sgd_momentum") return OptimizerKind::sgd_momentum;
  if (name == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

std::string_view optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::sgd_momentum: return "sgd_momentum";
    case OptimizerKind::adam: return "adam";
  }
  throw std::invalid_argument("unknown optimizer value");
}

void validate(const OptimizerOptions& opts) {
  // A zero rate freezes the parameters, which the linear-GCCA reduction relies on.
  if (opts.learning_rate < 0.0 || !std::isfinite(opts.learning_rate)) {
    throw std::invalid_argument("optimizer: learning rate must be nonnegative");
  }
  if (opts.momentum < 0.0 || opts.momentum >= 1.0) {
    throw std::invalid_argument("optimizer: momentum must lie in [0, 1)");
  }
  if (opts.beta1 < 0.0 || opts.beta1 >= 1.0 || opts.beta2 < 0.0 || opts.beta2 >= 1.0) {
    throw std::invalid_argument("optimizer: adam betas must lie in [0, 1)");
  }
  if (!(opts.epsilon > 0.0)) {
    throw std::invalid_argument("optimizer: adam epsilon must be positive");
  }
}

Optimizer::Optimizer(const OptimizerOptions& opts, const std::vector<Index>& block_sizes)
    : opts_(opts), block_sizes_(block_sizes) {
  validate(opts);
  const bool needs_first = opts.kind != OptimizerKind::sgd;
  const bool needs_second = opts.kind == OptimizerKind::adam;
  for (Index size : block_sizes) {
    if (size < 1) throw std::invalid_argument("optimizer: block sizes must be >= 1");
    if (needs_first) first_moment_.push_back(Vector::Zero(size));
    if (needs_second) second_moment_.push_back(Vector::Zero(size));
  }
}

void Optimizer::apply_update(const std::vector<Eigen::Map<Vector>>& params,
                             const std::vector<Eigen::Map<const Vector>>& grads) {
  if (params.size() != block_sizes_.size() || grads.size() != block_sizes_.size()) {
    throw std::invalid_argument("optimizer: block count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != block_sizes_[i] || grads[i].size() != block_sizes_[i]) {
      throw std::invalid_argument("optimizer: block size mismatch");
    }
    if (!grads[i].allFinite()) {
      throw DivergenceError("optimizer: non-finite gradient in block " +
                            std::to_string(i) + " at step " +
                            std::to_string(step_ + 1));
    }
  }

  ++step_;
  const double lr = opts_.learning_rate;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::Map<Vector> p = params[i];
    const Eigen::Map<const Vector>& g = grads[i];
    switch (opts_.kind) {
      case OptimizerKind::sgd:
        p -= lr * g;
        break;
      case OptimizerKind::sgd_momentum: {
        Vector& vel = first_moment_[i];
        vel = opts_.momentum * vel + g;
        p -= lr * vel;
        break;
      }
      case OptimizerKind::adam: {
        Vector& m = first_moment_[i];
        Vector& v = second_moment_[i];
        m = opts_.beta1 * m + (1.0 - opts_.beta1) * g;
        v = opts_.beta2 * v + (1.0 - opts_.beta2) * g.cwiseProduct(g);
        const double m_scale = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_));
        const double v_scale = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_));
        p -= (lr / m_scale) * m.cwiseQuotient(
                 ((v / v_scale).cwiseSqrt().array() + opts_.epsilon).matrix());
        break;
      }
    }
  }
}

}  // namespace dgcca
