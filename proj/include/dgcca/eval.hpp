#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dgcca/linalg.hpp"

namespace dgcca {

struct EvalReport {
  std::string metric;              // "knn" or "probe"
  double param = 0.0;              // k for knn, ridge for probe
  long n_eval = 0;
  double accuracy = 0.0;           // trace(confusion) / n_eval
  Eigen::MatrixXi confusion;       // counts[true][predicted]

  std::string to_json_string() const;
};

/// counts[i][j] = #(true label i, predicted label j). Labels must lie in
/// [0, num_classes).
Eigen::MatrixXi confusion_matrix(const std::vector<std::int32_t>& truth,
                                 const std::vector<std::int32_t>& predicted,
                                 int num_classes);

EvalReport evaluate_predictions(const std::vector<std::int32_t>& truth,
                                const std::vector<std::int32_t>& predicted,
                                int num_classes, const std::string& metric,
                                double param);

/// Euclidean k-nearest-neighbor classification with deterministic ties:
/// neighbors are ordered by (squared distance, training index) and the vote
/// winner on a tied count is the lowest label id.
std::vector<std::int32_t> knn_classify(const Matrix& train_points,
                                       const std::vector<std::int32_t>& train_labels,
                                       const Matrix& query_points, int k);

/// One-vs-rest ridge regression to +-1 targets over features augmented with
/// a constant bias row; prediction is the argmax class score (ties to the
/// lowest class id). Closed form, deterministic.
struct LinearProbe {
  Matrix coefficients;               // (d + 1) x num_classes
  std::vector<std::int32_t> classes; // ascending
  double ridge = 0.0;
};

LinearProbe fit_linear_probe(const Matrix& points,
                             const std::vector<std::int32_t>& labels, double ridge);

std::vector<std::int32_t> predict(const LinearProbe& probe, const Matrix& points);

EvalReport score(const LinearProbe& probe, const Matrix& points,
                 const std::vector<std::int32_t>& labels);

}  // namespace dgcca
