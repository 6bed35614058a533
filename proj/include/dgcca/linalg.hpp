#pragma once

#include <Eigen/Dense>

namespace dgcca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Top-k spectrum of a symmetric matrix. Eigenvalues are sorted descending;
/// the rows of `eigenvectors` (k x n) are the corresponding orthonormal
/// eigenvectors.
struct SymEigResult {
  Vector eigenvalues;
  Matrix eigenvectors;
};

/// True when m equals its transpose within a relative tolerance of
/// `rel_tol * max(1, max|m|)`.
bool is_symmetric(const Matrix& m, double rel_tol = 1e-10);

/// Throws std::invalid_argument if any entry of m is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

/// k largest eigenvalues and eigenvectors of a symmetric matrix.
/// Throws std::invalid_argument for non-symmetric input or k out of [1, n],
/// NumericError if the decomposition fails to converge.
SymEigResult sym_eig_topk(const Matrix& m, Index k);

/// (c + eps*I)^-1 for symmetric PSD c, computed by inverting the shifted
/// spectrum so the same eigensolver backs both the decomposition and the
/// inverse. Throws NumericError for non-PSD input (an eigenvalue below
/// -1e-8*||c||) or when c + eps*I is numerically singular.
Matrix regularized_inverse_psd(const Matrix& c, double eps);

/// Subtracts each row's mean: result = y - rowmean(y) * 1^T.
Matrix mean_center_columns(const Matrix& y);

}  // namespace dgcca
