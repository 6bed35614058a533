#include "dgcca/eval.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dgcca/errors.hpp"

namespace dgcca {

std::string EvalReport::to_json_string() const {
  nlohmann::json j;
  j["metric"] = metric;
  j[metric == "knn" ? "k" : "ridge"] = param;
  j["n_eval"] = n_eval;
  j["accuracy"] = accuracy;
  std::vector<std::vector<int>> rows;
  for (Eigen::Index i = 0; i < confusion.rows(); ++i) {
    std::vector<int> row;
    for (Eigen::Index c = 0; c < confusion.cols(); ++c) row.push_back(confusion(i, c));
    rows.push_back(std::move(row));
  }
  j["confusion"] = rows;
  return j.dump(2);
}

Eigen::MatrixXi confusion_matrix(const std::vector<std::int32_t>& truth,
                                 const std::vector<std::int32_t>& predicted,
                                 int num_classes) {
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument("confusion_matrix: length mismatch");
  }
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(num_classes, num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= num_classes || predicted[i] < 0 ||
        predicted[i] >= num_classes) {
      throw std::invalid_argument("confusion_matrix: label out of range");
    }
    ++counts(truth[i], predicted[i]);
  }
  return counts;
}

EvalReport evaluate_predictions(const std::vector<std::int32_t>& truth,
                                const std::vector<std::int32_t>& predicted,
                                int num_classes, const std::string& metric,
                                double param) {
  EvalReport report;
  report.metric = metric;
  report.param = param;
  report.n_eval = static_cast<long>(truth.size());
  report.confusion = confusion_matrix(truth, predicted, num_classes);
  report.accuracy = report.n_eval == 0
                        ? 0.0
                        : static_cast<double>(report.confusion.trace()) /
                              static_cast<double>(report.n_eval);
  return report;
}

std::vector<std::int32_t> knn_classify(const Matrix& train_points,
                                       const std::vector<std::int32_t>& train_labels,
                                       const Matrix& query_points, int k) {
  const Index n = train_points.cols();
  if (n == 0) throw std::invalid_argument("knn: empty training set");
  if (static_cast<Index>(train_labels.size()) != n) {
    throw std::invalid_argument("knn: label count mismatch");
  }
  if (k < 1 || static_cast<Index>(k) > n) {
    throw std::invalid_argument("knn: k out of range [1, N]");
  }
  if (query_points.rows() != train_points.rows()) {
    throw std::invalid_argument("knn: dimension mismatch");
  }

  std::vector<std::int32_t> predictions(query_points.cols());
  std::vector<std::pair<double, Index>> neighbors(n);
  for (Index q = 0; q < query_points.cols(); ++q) {
    for (Index i = 0; i < n; ++i) {
      double d2 = 0.0;
      for (Index row = 0; row < train_points.rows(); ++row) {
        const double diff = train_points(row, i) - query_points(row, q);
        d2 += diff * diff;
      }
      neighbors[i] = {d2, i};
    }
    std::partial_sort(neighbors.begin(), neighbors.begin() + k, neighbors.end());

    std::map<std::int32_t, int> votes;
    for (int i = 0; i < k; ++i) ++votes[train_labels[neighbors[i].second]];
    std::int32_t winner = votes.begin()->first;
    int best = votes.begin()->second;
    for (const auto& [label, count] : votes) {
      if (count > best) {  // map iterates ascending, so ties keep the lowest id
        winner = label;
        best = count;
      }
    }
    predictions[q] = winner;
  }
  return predictions;
}

LinearProbe fit_linear_probe(const Matrix& points,
                             const std::vector<std::int32_t>& labels, double ridge) {
  const Index n = points.cols();
  if (static_cast<Index>(labels.size()) != n) {
    throw std::invalid_argument("probe: label count mismatch");
  }
  if (!(ridge > 0.0)) throw std::invalid_argument("probe: ridge must be positive");

  LinearProbe probe;
  probe.ridge = ridge;
  probe.classes = labels;
  std::sort(probe.classes.begin(), probe.classes.end());
  probe.classes.erase(std::unique(probe.classes.begin(), probe.classes.end()),
                      probe.classes.end());
  if (probe.classes.size() < 2) {
    throw std::invalid_argument("probe: need at least two classes in training data");
  }

  const Index d = points.rows();
  Matrix x(d + 1, n);
  x.topRows(d) = points;
  x.row(d).setOnes();

  const Matrix gram = x * x.transpose() + ridge * Matrix::Identity(d + 1, d + 1);
  const Eigen::LDLT<Matrix> solver(gram);
  probe.coefficients.resize(d + 1, static_cast<Index>(probe.classes.size()));
  for (std::size_t c = 0; c < probe.classes.size(); ++c) {
    Vector target(n);
    for (Index i = 0; i < n; ++i) {
      target(i) = labels[i] == probe.classes[c] ? 1.0 : -1.0;
    }
    probe.coefficients.col(static_cast<Index>(c)) = solver.solve(x * target);
  }
  return probe;
}

std::vector<std::int32_t> predict(const LinearProbe& probe, const Matrix& points) {
  if (points.rows() + 1 != probe.coefficients.rows()) {
    throw std::invalid_argument("probe: dimension mismatch");
  }
  const Index n = points.cols();
  Matrix x(points.rows() + 1, n);
  x.topRows(points.rows()) = points;
  x.row(points.rows()).setOnes();
  const Matrix scores = probe.coefficients.transpose() * x;  // classes x n

  std::vector<std::int32_t> predictions(n);
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    for (Index c = 1; c < scores.rows(); ++c) {
      if (scores(c, i) > scores(best, i)) best = c;
    }
    predictions[i] = probe.classes[static_cast<std::size_t>(best)];
  }
  return predictions;
}

EvalReport score(const LinearProbe& probe, const Matrix& points,
                 const std::vector<std::int32_t>& labels) {
  const std::vector<std::int32_t> predictions = predict(probe, points);
  const int num_classes = probe.classes.back() + 1;
  int max_label = 0;
  for (std::int32_t label : labels) max_label = std::max(max_label, label);
  return evaluate_predictions(labels, predictions,
                              std::max(num_classes, max_label + 1), "probe",
                              probe.ridge);
}

}  // namespace dgcca
