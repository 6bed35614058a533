#pragma once

#include <string_view>
#include <vector>

#include "dgcca/linalg.hpp"

namespace dgcca {

enum class OptimizerKind { sgd, sgd_momentum, adam };

OptimizerKind optimizer_from_name(std::string_view name);
std::string_view optimizer_name(OptimizerKind kind);

struct OptimizerOptions {
  OptimizerKind kind = OptimizerKind::sgd;
  double learning_rate = 0.005;
  double momentum = 0.9;     // sgd_momentum only
  double beta1 = 0.9;        // adam
  double beta2 = 0.999;      // adam
  double epsilon = 1e-8;     // adam
};

void validate(const OptimizerOptions& opts);

/// Update rule over a fixed list of flat parameter blocks. Moment buffers
/// are allocated per block at construction; the step count advances by
/// exactly one per apply_update call.
class Optimizer {
 public:
  Optimizer(const OptimizerOptions& opts, const std::vector<Index>& block_sizes);

  /// In-place update of every block from its gradient. Blocks and gradients
  /// must match the construction sizes. Throws DivergenceError if any
  /// gradient entry is non-finite.
  void apply_update(const std::vector<Eigen::Map<Vector>>& params,
                    const std::vector<Eigen::Map<const Vector>>& grads);

  long step_count() const { return step_; }
  const OptimizerOptions& options() const { return opts_; }

 private:
  OptimizerOptions opts_;
  long step_ = 0;
  std::vector<Index> block_sizes_;
  std::vector<Vector> first_moment_;   // adam m / momentum velocity
  std::vector<Vector> second_moment_;  // adam v
};

}  // namespace dgcca
