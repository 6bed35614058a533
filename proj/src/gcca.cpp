#include "dgcca/gcca.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dgcca/errors.hpp"

namespace dgcca {

namespace {
constexpr double kEigengapFloor = 1e-6;
}

double GccaInput::total_weight() const {
  if (weights.empty()) return static_cast<double>(views.size());
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void validate(const GccaInput& input) {
  if (input.views.size() < 2) {
    throw std::invalid_argument("gcca: need at least two views");
  }
  const Index n = input.views[0].cols();
  Index min_rows = input.views[0].rows();
  for (std::size_t j = 0; j < input.views.size(); ++j) {
    const Matrix& y = input.views[j];
    require_finite(y, "gcca view");
    if (y.rows() < 1 || y.cols() < 1) {
      throw std::invalid_argument("gcca: empty view " + std::to_string(j));
    }
    if (y.cols() != n) {
      throw std::invalid_argument("gcca: views disagree on sample count");
    }
    min_rows = std::min(min_rows, y.rows());
  }
  if (input.r < 1 || input.r > std::min(n, min_rows)) {
    throw std::invalid_argument("gcca: r must lie in [1, min(N, min_j o_j)]");
  }
  if (input.eps < 0.0) {
    throw std::invalid_argument("gcca: eps must be nonnegative");
  }
  if (!input.weights.empty()) {
    if (input.weights.size() != input.views.size()) {
      throw std::invalid_argument("gcca: weight count must match view count");
    }
    bool any_positive = false;
    for (double w : input.weights) {
      if (w < 0.0 || !std::isfinite(w)) {
        throw std::invalid_argument("gcca: weights must be finite and nonnegative");
      }
      any_positive |= w > 0.0;
    }
    if (!any_positive) {
      throw std::invalid_argument("gcca: at least one weight must be positive");
    }
  }
}

GccaSolution solve_gcca(const GccaInput& input) {
  validate(input);
  const std::size_t num_views = input.num_views();
  const Index n = input.num_samples();
  const Index r = input.r;

  // C_jj^-1 Y_j is reused for both P_j and U_j.
  std::vector<Matrix> whitened(num_views);
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < num_views; ++j) {
    const Matrix& y = input.views[j];
    const Matrix cov = y * y.transpose();
    whitened[j] = regularized_inverse_psd(cov, input.eps) * y;
    if (input.weight(j) != 0.0) {
      m.noalias() += input.weight(j) * (y.transpose() * whitened[j]);
    }
  }
  m = (0.5 * (m + m.transpose())).eval();  // eval: m aliases its own transpose

  const Index k = std::min<Index>(r + 1, n);
  const SymEigResult eig = sym_eig_topk(m, k);

  GccaSolution sol;
  sol.g = eig.eigenvectors.topRows(r);
  sol.eigenvalues = eig.eigenvalues.head(r);
  sol.objective = sol.eigenvalues.sum();
  sol.reconstruction_error = static_cast<double>(r) * input.total_weight() - sol.objective;
  sol.eigengap = (k > r) ? eig.eigenvalues(r - 1) - eig.eigenvalues(r)
                         : std::numeric_limits<double>::infinity();
  sol.degenerate_eigengap = sol.eigengap < kEigengapFloor;
  sol.u.reserve(num_views);
  for (std::size_t j = 0; j < num_views; ++j) {
    sol.u.push_back(whitened[j] * sol.g.transpose());
  }
  return sol;
}

namespace {

void check_shapes(const GccaInput& input, const GccaSolution& sol) {
  if (sol.u.size() != input.views.size()) {
    throw std::invalid_argument("gcca: solution/input view count mismatch");
  }
  if (sol.g.rows() != input.r || sol.g.cols() != input.num_samples()) {
    throw std::invalid_argument("gcca: solution G shape mismatch");
  }
  for (std::size_t j = 0; j < sol.u.size(); ++j) {
    if (sol.u[j].rows() != input.views[j].rows() || sol.u[j].cols() != input.r) {
      throw std::invalid_argument("gcca: solution U shape mismatch at view " +
                                  std::to_string(j));
    }
  }
}

}  // namespace

std::vector<Matrix> gcca_gradient(const GccaInput& input, const GccaSolution& sol) {
  check_shapes(input, sol);
  std::vector<Matrix> grads;
  grads.reserve(input.views.size());
  for (std::size_t j = 0; j < input.views.size(); ++j) {
    const Matrix& u = sol.u[j];
    grads.push_back(2.0 * input.weight(j) *
                    (u * sol.g - u * (u.transpose() * input.views[j])));
  }
  return grads;
}

double finite_difference_objective(const GccaInput& input, std::size_t view,
                                   Index row, Index col, double h) {
  if (view >= input.views.size()) {
    throw std::invalid_argument("finite_difference_objective: view index out of range");
  }
  const Matrix& y = input.views[view];
  if (row < 0 || row >= y.rows() || col < 0 || col >= y.cols()) {
    throw std::invalid_argument("finite_difference_objective: entry index out of range");
  }
  if (h <= 0.0) {
    throw std::invalid_argument("finite_difference_objective: step must be positive");
  }

  const GccaSolution base = solve_gcca(input);
  if (base.eigengap < kEigengapFloor) {
    throw NumericError(
        "finite_difference_objective: eigengap " + std::to_string(base.eigengap) +
        " below 1e-6; objective is not differentiable at this point");
  }

  GccaInput perturbed = input;
  perturbed.views[view](row, col) = y(row, col) + h;
  const double plus = solve_gcca(perturbed).objective;
  perturbed.views[view](row, col) = y(row, col) - h;
  const double minus = solve_gcca(perturbed).objective;
  return (plus - minus) / (2.0 * h);
}

double reconstruction_error_direct(const GccaSolution& sol, const GccaInput& input) {
  check_shapes(input, sol);
  double total = 0.0;
  for (std::size_t j = 0; j < input.views.size(); ++j) {
    total += input.weight(j) *
             (sol.g - sol.u[j].transpose() * input.views[j]).squaredNorm();
  }
  return total;
}

}  // namespace dgcca
