#include "dgcca/linalg.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "dgcca/errors.hpp"

namespace dgcca {

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

SymEigResult sym_eig_topk(const Matrix& m, Index k) {
  require_finite(m, "sym_eig_topk");
  if (!is_symmetric(m)) {
    throw std::invalid_argument("sym_eig_topk: matrix is not symmetric");
  }
  const Index n = m.rows();
  if (k < 1 || k > n) {
    throw std::invalid_argument("sym_eig_topk: k out of range [1, n]");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError("sym_eig_topk: eigendecomposition did not converge");
  }

  // Eigen reports eigenvalues ascending; flip to descending and keep the top k.
  SymEigResult result;
  result.eigenvalues.resize(k);
  result.eigenvectors.resize(k, n);
  for (Index i = 0; i < k; ++i) {
    result.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
    result.eigenvectors.row(i) = solver.eigenvectors().col(n - 1 - i).transpose();
  }
  return result;
}

Matrix regularized_inverse_psd(const Matrix& c, double eps) {
  require_finite(c, "regularized_inverse_psd");
  if (!is_symmetric(c)) {
    throw std::invalid_argument("regularized_inverse_psd: matrix is not symmetric");
  }
  if (eps < 0.0) {
    throw std::invalid_argument("regularized_inverse_psd: eps must be nonnegative");
  }

  const Index d = c.rows();
  const SymEigResult eig = sym_eig_topk(c, d);
  const double norm = std::max(std::abs(eig.eigenvalues(0)),
                               std::abs(eig.eigenvalues(d - 1)));
  if (eig.eigenvalues(d - 1) < -1e-8 * norm) {
    throw NumericError("regularized_inverse_psd: matrix is not PSD (eigenvalue " +
                       std::to_string(eig.eigenvalues(d - 1)) + ")");
  }

  Vector shifted = eig.eigenvalues.array() + eps;
  const double floor = 1e-12 * std::max(1.0, shifted(0));
  if (shifted(d - 1) <= floor) {
    throw NumericError(
        "regularized_inverse_psd: c + eps*I is numerically singular "
        "(increase eps)");
  }

  Matrix inv = eig.eigenvectors.transpose() * shifted.cwiseInverse().asDiagonal() *
               eig.eigenvectors;
  return 0.5 * (inv + inv.transpose());
}

Matrix mean_center_columns(const Matrix& y) {
  require_finite(y, "mean_center_columns");
  return y.colwise() - y.rowwise().mean();
}

}  // namespace dgcca
