#include "dgcca/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dgcca/errors.hpp"
#include "dgcca/rng.hpp"
#include "dgcca/serialize.hpp"

namespace dgcca {

using json = nlohmann::json;

void validate(const MultiviewDataset& dataset) {
  if (dataset.views.empty()) throw DataError("dataset has no views");
  const Index n = dataset.views[0].cols();
  for (const Matrix& v : dataset.views) {
    require_finite(v, "dataset view");
    if (v.cols() != n) throw DataError("dataset views disagree on sample count");
  }
  if (dataset.view_names.size() != dataset.views.size()) {
    throw DataError("dataset view-name count mismatch");
  }
  if (dataset.has_labels()) {
    if (static_cast<Index>(dataset.labels.size()) != n) {
      throw DataError("label count does not match sample count");
    }
    for (std::int32_t label : dataset.labels) {
      if (label < 0) throw DataError("labels must be nonnegative");
    }
  }
}

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_unit(double t) { return t - std::floor(t); }

}  // namespace

MultiviewDataset generate_synthetic_mixture(const SyntheticOptions& options) {
  if (options.n_per_component < 50) {
    throw std::invalid_argument("generator: need at least 50 points per component");
  }
  if (options.noise < 0.0 || options.angle_jitter < 0.0) {
    throw std::invalid_argument("generator: noise and jitter must be nonnegative");
  }

  const Index n = 2 * options.n_per_component;
  Rng rng(options.seed);

  MultiviewDataset dataset;
  dataset.view_names = {"circles", "moons", "spiral"};
  dataset.views.assign(3, Matrix(2, n));
  dataset.labels.resize(n);
  dataset.note = "synthetic two-component multiview mixture";

  for (Index i = 0; i < n; ++i) {
    const std::int32_t component = static_cast<std::int32_t>(i % 2);
    dataset.labels[i] = component;
    const double t = rng.uniform();

    // Each view sees the shared angle through its own jitter.
    const double t1 = wrap_unit(t + options.angle_jitter * rng.gaussian());
    const double t2 = wrap_unit(t + options.angle_jitter * rng.gaussian());
    const double t3 = wrap_unit(t + options.angle_jitter * rng.gaussian());

    // circles: radius 1 vs 2
    {
      const double radius = 1.0 + component;
      const double theta = 2.0 * kPi * t1;
      dataset.views[0](0, i) = radius * std::cos(theta) + options.noise * rng.gaussian();
      dataset.views[0](1, i) = radius * std::sin(theta) + options.noise * rng.gaussian();
    }

    // moons: four 150-degree arcs of unit radius whose centers sit on a ring
    // of radius 0.45; arcs alternate component around the ring, so each
    // component is a point-symmetric pair of crescents.
    {
      const int arc = component + 2 * (t2 >= 0.5 ? 1 : 0);
      const double along = wrap_unit(2.0 * t2);
      const double phi = arc * (kPi / 2.0);
      const double beta = phi + (along - 0.5) * (5.0 * kPi / 6.0);
      dataset.views[1](0, i) =
          0.45 * std::cos(phi) + std::cos(beta) + options.noise * rng.gaussian();
      dataset.views[1](1, i) =
          0.45 * std::sin(phi) + std::sin(beta) + options.noise * rng.gaussian();
    }

    // spiral: two arms offset by pi, 1.25 turns, radius growing with t
    {
      const double angle = kPi / 4.0 + 2.5 * kPi * t3 + kPi * component;
      const double radius = 0.3 + 2.0 * t3;
      dataset.views[2](0, i) =
          radius * std::cos(angle) + 2.0 * options.noise * rng.gaussian();
      dataset.views[2](1, i) =
          radius * std::sin(angle) + 2.0 * options.noise * rng.gaussian();
    }
  }

  validate(dataset);
  return dataset;
}

MultiviewDataset subset(const MultiviewDataset& dataset, const std::vector<Index>& indices) {
  MultiviewDataset out;
  out.view_names = dataset.view_names;
  out.note = dataset.note;
  for (const Matrix& v : dataset.views) {
    Matrix sub(v.rows(), static_cast<Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] < 0 || indices[i] >= v.cols()) {
        throw std::invalid_argument("subset: column index out of range");
      }
      sub.col(static_cast<Index>(i)) = v.col(indices[i]);
    }
    out.views.push_back(std::move(sub));
  }
  if (dataset.has_labels()) {
    out.labels.reserve(indices.size());
    for (Index idx : indices) out.labels.push_back(dataset.labels[idx]);
  }
  return out;
}

namespace {

// Largest-remainder allocation of n items to the three fractions; ties go to
// the earlier split so the result is deterministic.
std::array<Index, 3> allocate_counts(Index n, const SplitSpec& spec) {
  const double fractions[3] = {spec.train_fraction, spec.tune_fraction,
                               spec.test_fraction};
  std::array<Index, 3> counts{};
  double remainders[3];
  Index assigned = 0;
  for (int s = 0; s < 3; ++s) {
    const double exact = fractions[s] * static_cast<double>(n);
    counts[s] = static_cast<Index>(std::floor(exact));
    remainders[s] = exact - std::floor(exact);
    assigned += counts[s];
  }
  while (assigned < n) {
    int best = 0;
    for (int s = 1; s < 3; ++s) {
      if (remainders[s] > remainders[best]) best = s;
    }
    ++counts[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  return counts;
}

}  // namespace

DatasetSplit split_dataset(const MultiviewDataset& dataset, const SplitSpec& spec) {
  validate(dataset);
  const double sum = spec.train_fraction + spec.tune_fraction + spec.test_fraction;
  if (spec.train_fraction <= 0.0 || spec.tune_fraction <= 0.0 ||
      spec.test_fraction <= 0.0 || std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("split: fractions must be positive and sum to 1");
  }
  const Index n = dataset.num_samples();
  if (n < 3) throw std::invalid_argument("split: need at least 3 samples");

  // Group indices by stratum (single stratum when unlabeled), shuffle each
  // with the seeded stream, then allocate per-stratum counts.
  std::vector<std::vector<Index>> strata;
  if (dataset.has_labels()) {
    const std::int32_t max_label =
        *std::max_element(dataset.labels.begin(), dataset.labels.end());
    strata.resize(static_cast<std::size_t>(max_label) + 1);
    for (Index i = 0; i < n; ++i) strata[dataset.labels[i]].push_back(i);
  } else {
    strata.emplace_back(n);
    std::iota(strata[0].begin(), strata[0].end(), Index{0});
  }

  Rng rng(spec.seed);
  DatasetSplit split;
  for (auto& stratum : strata) {
    if (stratum.empty()) continue;
    rng.shuffle(stratum);
    const auto counts = allocate_counts(static_cast<Index>(stratum.size()), spec);
    std::size_t cursor = 0;
    std::vector<Index>* targets[3] = {&split.train_indices, &split.tune_indices,
                                      &split.test_indices};
    for (int s = 0; s < 3; ++s) {
      for (Index i = 0; i < counts[s]; ++i) {
        targets[s]->push_back(stratum[cursor++]);
      }
    }
  }
  for (auto* indices : {&split.train_indices, &split.tune_indices, &split.test_indices}) {
    if (indices->empty()) {
      throw std::invalid_argument("split: a split came out empty; adjust fractions");
    }
    std::sort(indices->begin(), indices->end());
  }
  split.train = subset(dataset, split.train_indices);
  split.tune = subset(dataset, split.tune_indices);
  split.test = subset(dataset, split.test_indices);
  return split;
}

void save_dataset(const MultiviewDataset& dataset, const std::filesystem::path& dir) {
  validate(dataset);
  std::filesystem::create_directories(dir);

  json manifest;
  manifest["format_version"] = 1;
  manifest["kind"] = "multiview-dataset";
  manifest["num_samples"] = dataset.num_samples();
  manifest["note"] = dataset.note;
  json views = json::array();
  for (std::size_t j = 0; j < dataset.views.size(); ++j) {
    const std::string file = "view_" + std::to_string(j) + ".mvmx";
    write_matrix_mvmx(dir / file, dataset.views[j]);
    views.push_back({{"name", dataset.view_names[j]},
                     {"rows", dataset.views[j].rows()},
                     {"file", file}});
  }
  manifest["views"] = views;
  if (dataset.has_labels()) {
    write_labels(dir / "labels.mvlb", dataset.labels);
    manifest["labels_file"] = "labels.mvlb";
  }

  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

MultiviewDataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError("missing manifest.json in " + dir.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError("malformed manifest in " + dir.string() + ": " + e.what());
  }
  if (!manifest.contains("format_version") ||
      manifest["format_version"].get<int>() != 1) {
    throw DataError("unsupported dataset format version in " + dir.string());
  }

  MultiviewDataset dataset;
  dataset.note = manifest.value("note", "");
  const Index n = manifest.at("num_samples").get<Index>();
  for (const json& view : manifest.at("views")) {
    Matrix m = read_matrix_mvmx(dir / view.at("file").get<std::string>());
    if (m.rows() != view.at("rows").get<Index>() || m.cols() != n) {
      throw DataError("view shape disagrees with manifest: " +
                      view.at("file").get<std::string>());
    }
    dataset.views.push_back(std::move(m));
    dataset.view_names.push_back(view.at("name").get<std::string>());
  }
  if (manifest.contains("labels_file")) {
    dataset.labels = read_labels(dir / manifest["labels_file"].get<std::string>());
    if (static_cast<Index>(dataset.labels.size()) != n) {
      throw DataError("label count does not match sample count in " + dir.string());
    }
  }
  validate(dataset);
  return dataset;
}

}  // namespace dgcca
