#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dgcca/network.hpp"
#include "dgcca/optimizer.hpp"

namespace dgcca {

struct ViewConfig {
  std::vector<Index> widths;  // [d_j, c_1, ..., o_j]
  Activation activation = Activation::sigmoid;
  bool identity_init = false;  // requires equal widths; used for the linear reduction
};

struct TrainConfig {
  std::vector<ViewConfig> views;
  Index r = 2;
  double eps = 1e-8;
  std::vector<double> weights;  // empty = unweighted
  OptimizerOptions optimizer;
  double l1 = 0.0;
  double l2 = 0.0;
  Index batch_size = 100;
  long epochs = 0;
  std::uint64_t seed = 0;
  double tuning_fraction = 0.0;
  bool shuffle = true;
  // When positive, every k-th epoch replaces the batch-mean training error
  // with an exact full-pass recomputation.
  long full_train_eval_every = 0;
};

void validate(const TrainConfig& config);

struct EpochRecord {
  long epoch = 0;  // 1-based
  double train_err = 0.0;
  std::optional<double> tune_err;
  double seconds = 0.0;  // wall time; not part of the deterministic surface
};

struct DgccaModel {
  std::vector<MlpNetwork> networks;
  std::vector<Matrix> u;             // o_j x r, from the final full-data pass
  std::vector<Vector> output_means;  // per-view output-layer means, same pass
  Matrix g;                          // r x N_train
  Vector eigenvalues;
  double reconstruction_error = 0.0;
  std::vector<Index> train_indices;  // original columns behind G, ascending
  std::vector<Index> tune_indices;
  std::vector<EpochRecord> history;
  TrainConfig config;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
  std::function<void(const std::string&)> on_warning;
};

/// Runs the minibatch DGCCA loop: per epoch, (seeded) shuffle of the training
/// columns, batches of `batch_size` (a short final batch is dropped when
/// smaller than max(r + 1, 16)); per batch, forward every view, mean-center
/// the outputs, solve GCCA, feed dF/dO_j = w_j (U_j U_j^T O_j - U_j G) to
/// backprop and update. A tuning split of `tuning_fraction` is held out and
/// its reconstruction error (GCCA re-solved on frozen outputs) is recorded
/// every epoch. Finishes with a full pass over the training split to fix
/// U_j, G, and the stored per-view output means.
DgccaModel train_dgcca(const std::vector<Matrix>& views, const TrainConfig& config,
                       const TrainHooks& hooks = {});

/// Projects new data: U_j^T (f_j(X_j) - stored mean) per view, each r x N.
/// A pure per-sample function, so batching does not change results.
std::vector<Matrix> transform(const DgccaModel& model, const std::vector<Matrix>& views);

/// Heldout screening quantity: forwards the tuning views, centers with the
/// stored training means, re-solves GCCA on the frozen outputs, and returns
/// the reconstruction error.
double tuning_reconstruction_error(const DgccaModel& model,
                                   const std::vector<Matrix>& tuning_views);

void save_model(const DgccaModel& model, const std::filesystem::path& dir);
DgccaModel load_model(const std::filesystem::path& dir);

}  // namespace dgcca
