#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dgcca/linalg.hpp"

namespace dgcca {

/// J column-aligned views of the same N samples, optionally labeled.
struct MultiviewDataset {
  std::vector<Matrix> views;
  std::vector<std::string> view_names;
  std::vector<std::int32_t> labels;  // empty = unlabeled
  std::string note;

  std::size_t num_views() const { return views.size(); }
  Index num_samples() const { return views.empty() ? 0 : views[0].cols(); }
  bool has_labels() const { return !labels.empty(); }
};

void validate(const MultiviewDataset& dataset);

/// Synthetic two-component multiview mixture. Each point carries a shared
/// component label and a shared latent angle t in [0,1); every view embeds
/// the pair through a different planar curve family:
///   circles — radius 1 vs 2, angle 2*pi*t
///   moons   — four interleaved half-moon arcs around a ring, component =
///             arc parity, position along the arc from t
///   spiral  — two-arm spiral (1.25 turns), arms offset by pi
/// Each view observes the shared angle through independent gaussian jitter
/// (`angle_jitter`, in revolutions) and adds isotropic coordinate noise
/// (`noise`). With the defaults no view is linearly separable, while the
/// component identity remains the dominant factor shared by all three.
struct SyntheticOptions {
  Index n_per_component = 200;  // minimum 50
  double noise = 0.05;
  double angle_jitter = 0.15;
  std::uint64_t seed = 0;
};

MultiviewDataset generate_synthetic_mixture(const SyntheticOptions& options);

struct SplitSpec {
  double train_fraction = 0.8;
  double tune_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct DatasetSplit {
  MultiviewDataset train, tune, test;
  // Original column indices of each split, ascending.
  std::vector<Index> train_indices, tune_indices, test_indices;
};

/// Disjoint, exhaustive, seeded split; stratified by label when labels are
/// present. Fractions must be positive and sum to 1 within 1e-12.
DatasetSplit split_dataset(const MultiviewDataset& dataset, const SplitSpec& spec);

/// Selects the given columns (and labels) of every view.
MultiviewDataset subset(const MultiviewDataset& dataset, const std::vector<Index>& indices);

/// Dataset directory layout: manifest.json describing views, sample count,
/// label presence and format version; one MVMX file per view; optional MVLB
/// label file.
void save_dataset(const MultiviewDataset& dataset, const std::filesystem::path& dir);
MultiviewDataset load_dataset(const std::filesystem::path& dir);

}  // namespace dgcca
