// Acceptance suite: end-to-end checks of the solver, gradients, training
// pipeline, oracle equivalences, CLI determinism, and the synthetic-mixture
// experiment. Prints one PASS/FAIL line per criterion and exits nonzero if
// any hard criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dgcca/data.hpp"
#include "dgcca/errors.hpp"
#include "dgcca/eval.hpp"
#include "dgcca/gcca.hpp"
#include "dgcca/linalg.hpp"
#include "dgcca/network.hpp"
#include "dgcca/rng.hpp"
#include "dgcca/serialize.hpp"
#include "dgcca/trainer.hpp"
#include "../support/test_util.hpp"

using namespace dgcca;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
  std::cout << "[" << std::setw(2) << id << "] " << (pass ? "PASS" : "FAIL") << "  "
            << name << " — " << detail << "\n";
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// shared fixtures

GccaInput random_instance(std::uint64_t seed, std::size_t j, Index o_lo, Index o_hi,
                          Index n, Index r, double eps) {
  Rng rng(seed);
  GccaInput input;
  input.r = r;
  input.eps = eps;
  for (std::size_t view = 0; view < j; ++view) {
    const Index o = o_lo + static_cast<Index>(rng.below(
                               static_cast<std::uint64_t>(o_hi - o_lo + 1)));
    input.views.push_back(mean_center_columns(testutil::random_matrix(o, n, rng)));
  }
  return input;
}

// split-half probe accuracy: fit a ridge probe on one half of the columns,
// score the other half
double probe_accuracy(const Matrix& points, const std::vector<std::int32_t>& labels,
                      std::uint64_t seed) {
  const Index n = points.cols();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(order);
  const Index half = n / 2;
  Matrix fit_points(points.rows(), n - half), eval_points(points.rows(), half);
  std::vector<std::int32_t> fit_labels, eval_labels;
  for (Index i = 0; i < half; ++i) {
    eval_points.col(i) = points.col(order[i]);
    eval_labels.push_back(labels[order[i]]);
  }
  for (Index i = half; i < n; ++i) {
    fit_points.col(i - half) = points.col(order[i]);
    fit_labels.push_back(labels[order[i]]);
  }
  const LinearProbe probe = fit_linear_probe(fit_points, fit_labels, 1e-3);
  return score(probe, eval_points, eval_labels).accuracy;
}

// ---------------------------------------------------------------------------
// criteria 1 + 2: gradients against finite differences, optimality identities

void criterion_gradients_and_identities() {
  const auto start = Clock::now();
  struct Shape {
    std::size_t j;
    Index n, r;
    double eps;
  };
  const std::vector<Shape> shapes = {
      {2, 10, 1, 1e-8}, {2, 18, 2, 1e-4}, {3, 12, 2, 1e-8}, {3, 25, 3, 1e-4},
      {3, 40, 1, 1e-8}, {5, 15, 2, 1e-8}, {5, 30, 3, 1e-4}, {2, 22, 3, 1e-8},
      {3, 33, 2, 1e-4}, {5, 40, 2, 1e-8}, {3, 14, 3, 1e-8}, {5, 11, 1, 1e-4}};

  int instances_checked = 0;
  int instances_skipped = 0;
  long entries_checked = 0;
  double max_rel = 0.0;
  bool identities_ok = true;
  double max_orth = 0.0, max_identity_gap = 0.0;

  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const Shape& shape = shapes[i];
    const GccaInput input =
        random_instance(1000 + i, shape.j, 3, 8, shape.n, shape.r, shape.eps);
    const GccaSolution sol = solve_gcca(input);

    // criterion 2 on every solved instance: orthonormal G always; the trace
    // identity is an eps = 0 theorem (the ridge shifts the direct evaluation
    // down by O(eps)), so it is pinned at 1e-8 on the eps = 0 companion of
    // each instance and the ridged instances get the signed O(eps) bound.
    const double orth =
        (sol.g * sol.g.transpose() - Matrix::Identity(input.r, input.r))
            .cwiseAbs()
            .maxCoeff();
    max_orth = std::max(max_orth, orth);
    if (orth > 1e-8) identities_ok = false;
    {
      GccaInput exact = input;
      exact.eps = 0.0;
      const GccaSolution exact_sol = solve_gcca(exact);
      const double gap =
          std::abs(reconstruction_error_direct(exact_sol, exact) -
                   (static_cast<double>(exact.r) * exact.total_weight() -
                    exact_sol.eigenvalues.sum()));
      max_identity_gap = std::max(max_identity_gap, gap);
      if (gap > 1e-8) identities_ok = false;

      const double ridged_gap = reconstruction_error_direct(sol, input) -
                                (static_cast<double>(input.r) * input.total_weight() -
                                 sol.eigenvalues.sum());
      if (ridged_gap > 1e-12 ||
          ridged_gap < -10.0 * input.eps * static_cast<double>(input.r) *
                           static_cast<double>(input.views.size())) {
        identities_ok = false;
      }
    }

    if (sol.degenerate_eigengap) {
      ++instances_skipped;
      continue;
    }
    const std::vector<Matrix> grads = gcca_gradient(input, sol);
    Rng pick(2000 + i);
    for (std::size_t view = 0; view < input.views.size(); ++view) {
      for (int sample = 0; sample < 20; ++sample) {
        const Index row = static_cast<Index>(
            pick.below(static_cast<std::uint64_t>(input.views[view].rows())));
        const Index col = static_cast<Index>(
            pick.below(static_cast<std::uint64_t>(input.views[view].cols())));
        const double fd = finite_difference_objective(input, view, row, col, 1e-5);
        const double an = grads[view](row, col);
        const double scale = std::max(std::abs(fd), std::abs(an));
        if (scale <= 1e-6) continue;
        max_rel = std::max(max_rel, std::abs(fd - an) / scale);
        ++entries_checked;
      }
    }
    ++instances_checked;
  }

  const double elapsed = seconds_since(start);
  std::ostringstream detail1;
  detail1 << instances_checked << " instances (" << instances_skipped
          << " skipped by the eigengap guard), " << entries_checked
          << " entries, max relative error " << max_rel << ", " << std::fixed
          << std::setprecision(1) << elapsed << " s";
  report(1, instances_checked >= 10 && max_rel <= 1e-4 && elapsed < 30.0,
         "analytic gradient vs central finite differences (1e-4)", detail1.str());

  std::ostringstream detail2;
  detail2 << "max |G G^T - I| = " << max_orth
          << ", max trace-identity gap at eps=0 = " << max_identity_gap
          << " (ridged instances bounded by O(eps))";
  report(2, identities_ok, "GCCA optimality identities (1e-8)", detail2.str());
}

// ---------------------------------------------------------------------------
// criterion 3: identical views

void criterion_identical_views() {
  Rng rng(7);
  const Matrix y = mean_center_columns(testutil::random_matrix(4, 12, rng));
  bool pass = true;
  double worst_err = 0.0, worst_grad = 0.0;
  for (Index r : {Index{3}, Index{4}}) {
    GccaInput input;
    input.views = {y, y, y};
    input.eps = 0.0;
    input.r = r;
    const GccaSolution sol = solve_gcca(input);
    worst_err = std::max(worst_err, std::abs(sol.reconstruction_error));
    for (const Matrix& grad : gcca_gradient(input, sol)) {
      worst_grad = std::max(worst_grad, grad.cwiseAbs().maxCoeff());
    }
  }
  pass = worst_err <= 1e-8 && worst_grad <= 1e-8;
  std::ostringstream detail;
  detail << "max |error| = " << worst_err << ", max |gradient| = " << worst_grad;
  report(3, pass, "identical views: zero error and zero gradients (1e-8)", detail.str());
}

// ---------------------------------------------------------------------------
// criterion 4: frozen-identity reduction to linear GCCA

void criterion_reduction() {
  SyntheticOptions options;
  options.n_per_component = 100;
  options.seed = 77;
  const MultiviewDataset data = generate_synthetic_mixture(options);

  TrainConfig config;
  config.views.assign(3, ViewConfig{{2, 2}, Activation::identity, true});
  config.r = 2;
  config.eps = 1e-8;
  config.epochs = 3;
  config.batch_size = 64;
  config.shuffle = false;
  config.optimizer.kind = OptimizerKind::sgd;
  config.optimizer.learning_rate = 0.0;
  const DgccaModel model = train_dgcca(data.views, config);

  GccaInput input;
  for (const Matrix& v : data.views) input.views.push_back(mean_center_columns(v));
  input.eps = config.eps;
  input.r = 2;
  const GccaSolution reference = solve_gcca(input);

  double worst = std::abs(model.reconstruction_error - reference.reconstruction_error);
  worst = std::max(worst, testutil::projector_distance(model.g, reference.g));
  for (std::size_t j = 0; j < 3; ++j) {
    worst = std::max(worst, (model.u[j] - reference.u[j]).cwiseAbs().maxCoeff());
  }
  const std::vector<Matrix> projections = transform(model, data.views);
  for (std::size_t j = 0; j < 3; ++j) {
    const Matrix expected = reference.u[j].transpose() * input.views[j];
    worst = std::max(worst, (projections[j] - expected).cwiseAbs().maxCoeff());
  }
  std::ostringstream detail;
  detail << "max deviation from linear GCCA = " << worst;
  report(4, worst <= 1e-10, "frozen-identity DGCCA reduces to linear GCCA (1e-10)",
         detail.str());
}

// ---------------------------------------------------------------------------
// criteria 5 + 6: the synthetic multiview mixture experiment

void criterion_synthetic_experiment() {
  const auto start = Clock::now();
  int passing_seeds = 0;
  int monotone_seeds = 0;
  std::ostringstream rows;

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticOptions options;
    options.n_per_component = 200;
    options.seed = seed;
    const MultiviewDataset data = generate_synthetic_mixture(options);

    bool raw_ok = true;
    double worst_raw = 0.0;
    for (const Matrix& view : data.views) {
      const double acc = probe_accuracy(view, data.labels, seed);
      worst_raw = std::max(worst_raw, acc);
      raw_ok = raw_ok && acc <= 0.65;
    }

    GccaInput linear_input;
    for (const Matrix& v : data.views) {
      linear_input.views.push_back(mean_center_columns(v));
    }
    linear_input.eps = 1e-8;
    linear_input.r = 2;
    const GccaSolution linear_sol = solve_gcca(linear_input);
    const double linear_acc = probe_accuracy(linear_sol.g, data.labels, seed);

    TrainConfig config;
    config.views.assign(3, ViewConfig{{2, 10, 10, 10, 2}, Activation::sigmoid, false});
    config.r = 2;
    config.eps = 1e-8;
    config.batch_size = 100;
    config.epochs = 800;
    config.seed = seed;
    config.tuning_fraction = 0.15;
    config.optimizer.kind = OptimizerKind::adam;
    config.optimizer.learning_rate = 5e-3;
    const DgccaModel model = train_dgcca(data.views, config);

    std::vector<std::int32_t> train_labels;
    for (Index idx : model.train_indices) train_labels.push_back(data.labels[idx]);
    const double deep_acc = probe_accuracy(model.g, train_labels, seed);

    const bool seed_pass = raw_ok && linear_acc <= 0.70 && deep_acc >= 0.95;
    if (seed_pass) ++passing_seeds;

    // criterion 6 on passing seeds: mean tune error over the last 10% of
    // epochs strictly below the first epoch's value
    bool monotone = false;
    if (!model.history.empty() && model.history.front().tune_err) {
      const std::size_t tail =
          std::max<std::size_t>(1, model.history.size() / 10);
      double tail_sum = 0.0;
      for (std::size_t i = model.history.size() - tail; i < model.history.size(); ++i) {
        tail_sum += model.history[i].tune_err.value();
      }
      monotone = tail_sum / static_cast<double>(tail) <
                 model.history.front().tune_err.value();
    }
    if (seed_pass && monotone) ++monotone_seeds;

    rows << "      seed " << seed << ": raw<=" << std::setprecision(3) << worst_raw
         << " linear=" << linear_acc << " dgcca=" << deep_acc
         << (seed_pass ? "" : "  [seed fails]") << (monotone ? "" : "  [not monotone]")
         << "\n";
  }

  const double elapsed = seconds_since(start);
  std::ostringstream detail5;
  detail5 << passing_seeds << "/5 seeds pass (need >= 4), " << std::fixed
          << std::setprecision(1) << elapsed << " s (budget 600)\n"
          << rows.str() << "     ";
  report(5, passing_seeds >= 4 && elapsed < 600.0,
         "synthetic mixture: raw <= 0.65, linear GCCA <= 0.70, DGCCA >= 0.95",
         detail5.str());
  report(6, monotone_seeds == passing_seeds && passing_seeds > 0,
         "tuning error decreases over training on every passing seed",
         std::to_string(monotone_seeds) + "/" + std::to_string(passing_seeds) +
             " passing seeds are monotone");
}

// ---------------------------------------------------------------------------
// criterion 7: eigensolver vs Jacobi oracle

void criterion_eigensolver_oracle() {
  double max_value_err = 0.0;
  double max_angle = 0.0;
  for (int i = 0; i < 100; ++i) {
    Rng rng(5000 + i);
    const Index n = 2 + static_cast<Index>(rng.below(9));  // 2..10
    const Matrix m = testutil::random_symmetric(n, rng);
    const SymEigResult eig = sym_eig_topk(m, n);
    const oracle::JacobiResult ref =
        oracle::jacobi_eigendecomposition(testutil::to_oracle(m));
    for (Index k = 0; k < n; ++k) {
      max_value_err =
          std::max(max_value_err, std::abs(eig.eigenvalues(k) - ref.eigenvalues[k]));
      double dot = 0.0;
      for (Index c = 0; c < n; ++c) {
        dot += eig.eigenvectors(k, c) * ref.eigenvectors[k][c];
      }
      max_angle = std::max(max_angle, std::acos(std::min(1.0, std::abs(dot))));
    }
  }
  std::ostringstream detail;
  detail << "100 matrices (2..10): max eigenvalue error " << max_value_err
         << ", max eigenvector angle " << max_angle;
  report(7, max_value_err <= 1e-8 && max_angle <= 1e-6,
         "eigensolver agrees with the from-scratch Jacobi oracle", detail.str());
}

// ---------------------------------------------------------------------------
// criterion 8: KNN vs brute force

std::vector<std::int32_t> knn_brute_force(const Matrix& train,
                                          const std::vector<std::int32_t>& labels,
                                          const Matrix& queries, int k) {
  std::vector<std::int32_t> out(queries.cols());
  for (Index q = 0; q < queries.cols(); ++q) {
    std::vector<std::pair<double, Index>> order;
    for (Index i = 0; i < train.cols(); ++i) {
      double d2 = 0.0;
      for (Index row = 0; row < train.rows(); ++row) {
        const double diff = train(row, i) - queries(row, q);
        d2 += diff * diff;
      }
      order.emplace_back(d2, i);
    }
    std::stable_sort(order.begin(), order.end());
    std::vector<int> votes;
    for (int i = 0; i < k; ++i) {
      const std::int32_t label = labels[order[static_cast<std::size_t>(i)].second];
      if (static_cast<std::size_t>(label) >= votes.size()) {
        votes.resize(static_cast<std::size_t>(label) + 1, 0);
      }
      ++votes[static_cast<std::size_t>(label)];
    }
    int best = -1;
    std::int32_t winner = 0;
    for (std::size_t label = 0; label < votes.size(); ++label) {
      if (votes[label] > best) {
        best = votes[label];
        winner = static_cast<std::int32_t>(label);
      }
    }
    out[q] = winner;
  }
  return out;
}

void criterion_knn_oracle() {
  int fixtures = 0;
  bool all_equal = true;
  for (int i = 0; i < 40; ++i) {
    Rng rng(6000 + i);
    const Index n = 10 + static_cast<Index>(rng.below(40));
    const Index d = 1 + static_cast<Index>(rng.below(5));
    const Matrix train = testutil::random_matrix(d, n, rng);
    const Matrix queries = testutil::random_matrix(d, 8, rng);
    std::vector<std::int32_t> labels;
    for (Index p = 0; p < n; ++p) {
      labels.push_back(static_cast<std::int32_t>(rng.below(4)));
    }
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    all_equal = all_equal && knn_classify(train, labels, queries, k) ==
                                 knn_brute_force(train, labels, queries, k);
    ++fixtures;
  }
  // engineered ties: integer lattice points around integer queries
  for (int i = 0; i < 10; ++i) {
    Rng rng(6500 + i);
    Matrix train(2, 12);
    std::vector<std::int32_t> labels;
    for (Index p = 0; p < 12; ++p) {
      train(0, p) = static_cast<double>(rng.below(3));
      train(1, p) = static_cast<double>(rng.below(3));
      labels.push_back(static_cast<std::int32_t>(rng.below(3)));
    }
    Matrix queries(2, 4);
    for (Index q = 0; q < 4; ++q) {
      queries(0, q) = static_cast<double>(rng.below(3));
      queries(1, q) = static_cast<double>(rng.below(3));
    }
    for (int k : {1, 3, 5, 12}) {
      all_equal = all_equal && knn_classify(train, labels, queries, k) ==
                                   knn_brute_force(train, labels, queries, k);
    }
    ++fixtures;
  }
  report(8, all_equal && fixtures == 50,
         "knn matches the exhaustive brute force exactly",
         std::to_string(fixtures) + " fixtures including engineered ties");
}

// ---------------------------------------------------------------------------
// criterion 9: CLI determinism

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  const std::string ca((std::istreambuf_iterator<char>(fa)),
                       std::istreambuf_iterator<char>());
  const std::string cb((std::istreambuf_iterator<char>(fb)),
                       std::istreambuf_iterator<char>());
  return ca == cb;
}

void criterion_cli_determinism() {
  const char* binary = std::getenv("DGCCA_BIN");
  if (binary == nullptr) {
    report(9, false, "cmd_train determinism",
           "DGCCA_BIN not set; cannot drive the CLI");
    return;
  }
  const fs::path base = fs::temp_directory_path() / "dgcca_acceptance_determinism";
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path data = base / "data";
  const fs::path config_path = base / "config.json";
  {
    std::ofstream config(config_path);
    config << R"({
      "r": 2, "eps": 1e-8, "epochs": 30, "batch_size": 64, "seed": 11,
      "tuning_fraction": 0.15,
      "optimizer": {"kind": "adam", "learning_rate": 0.005},
      "views": [
        {"widths": [2, 8, 2], "activation": "sigmoid"},
        {"widths": [2, 8, 2], "activation": "sigmoid"},
        {"widths": [2, 8, 2], "activation": "sigmoid"}
      ]
    })";
  }
  auto shell = [&](const std::string& cmd) {
    return std::system((std::string(binary) + " " + cmd + " > /dev/null 2>&1").c_str());
  };
  bool pass = shell("synth --n 100 --seed 8 --out " + data.string()) == 0;
  pass = pass && shell("train --config " + config_path.string() + " --data " +
                       data.string() + " --out " + (base / "run_a").string()) == 0;
  pass = pass && shell("train --config " + config_path.string() + " --data " +
                       data.string() + " --out " + (base / "run_b").string()) == 0;

  std::vector<std::string> files = {"epochs.jsonl", "model/model.json", "model/g.mvmx"};
  for (int j = 0; j < 3; ++j) {
    files.push_back("model/net_" + std::to_string(j) + ".mvnn");
    files.push_back("model/u_" + std::to_string(j) + ".mvmx");
    files.push_back("model/mean_" + std::to_string(j) + ".mvmx");
  }
  std::string first_diff;
  for (const std::string& file : files) {
    if (pass && !same_bytes(base / "run_a" / file, base / "run_b" / file)) {
      pass = false;
      first_diff = file;
    }
  }
  report(9, pass, "cmd_train twice produces bitwise-identical models and logs",
         pass ? std::to_string(files.size()) + " artifacts compared byte-for-byte"
              : (first_diff.empty() ? "CLI run failed" : "differs: " + first_diff));
  fs::remove_all(base);
}

// ---------------------------------------------------------------------------
// criterion 10: complexity smoke check (recorded, not hard-failed)

void criterion_complexity() {
  const Index d = 10, r = 2;
  auto time_gradient = [&](Index n) {
    GccaInput input = random_instance(9100, 3, d, d, n, r, 1e-8);
    const GccaSolution sol = solve_gcca(input);
    const auto start = Clock::now();
    double sink = 0.0;
    const int reps = 50;
    for (int i = 0; i < reps; ++i) {
      const std::vector<Matrix> grads = gcca_gradient(input, sol);
      sink += grads[0](0, 0);
    }
    (void)sink;
    return seconds_since(start) / reps;
  };
  auto time_solve = [&](Index n) {
    GccaInput input = random_instance(9200, 3, d, d, n, r, 1e-8);
    const auto start = Clock::now();
    const int reps = 5;
    for (int i = 0; i < reps; ++i) {
      const GccaSolution sol = solve_gcca(input);
      (void)sol;
    }
    return seconds_since(start) / reps;
  };

  // warm up allocators and caches before timing
  (void)time_gradient(256);
  const double grad_1x = time_gradient(512);
  const double grad_2x = time_gradient(1024);
  const double solve_1x = time_solve(512);
  const double solve_2x = time_solve(1024);
  const double grad_ratio = grad_2x / grad_1x;
  std::ostringstream detail;
  detail << std::setprecision(3) << "gradient step " << grad_1x * 1e3 << " ms -> "
         << grad_2x * 1e3 << " ms (x" << grad_ratio << ", threshold 3, informational); "
         << "full solve x" << solve_2x / solve_1x << " (eigensolver overhead)";
  // recorded, not hard-failed
  report(10, true, "per-batch gradient time scales linearly in N", detail.str());
  if (grad_ratio > 3.0) {
    std::cout << "     note: gradient ratio " << grad_ratio
              << " exceeded 3; recorded for review\n";
  }
}

}  // namespace

int main() {
  std::cout << "acceptance suite (tolerances pinned in code)\n";
  const auto start = Clock::now();
  criterion_gradients_and_identities();
  criterion_identical_views();
  criterion_reduction();
  criterion_synthetic_experiment();
  criterion_eigensolver_oracle();
  criterion_knn_oracle();
  criterion_cli_determinism();
  criterion_complexity();
  std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " +
                std::to_string(failures))
            << " (" << std::fixed << std::setprecision(1) << seconds_since(start)
            << " s total)\n";
  return failures == 0 ? 0 : 1;
}
