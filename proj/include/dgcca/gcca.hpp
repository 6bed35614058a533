#pragma once

#include <vector>

#include "dgcca/linalg.hpp"

namespace dgcca {

/// One GCCA problem instance: J views Y_j (o_j x N, column-aligned), an
/// optional per-view weight vector (empty means unweighted), a covariance
/// ridge eps, and the shared dimensionality r. Views are expected to be
/// mean-centered by the caller.
struct GccaInput {
  std::vector<Matrix> views;
  std::vector<double> weights;  // empty = all ones
  double eps = 0.0;
  Index r = 1;

  std::size_t num_views() const { return views.size(); }
  Index num_samples() const { return views.empty() ? 0 : views[0].cols(); }
  double weight(std::size_t j) const { return weights.empty() ? 1.0 : weights[j]; }
  double total_weight() const;
};

/// Throws std::invalid_argument when the instance violates its invariants:
/// J >= 2, shared N, finite entries, 1 <= r <= min(N, min_j o_j), eps >= 0,
/// weights (if present) nonnegative with at least one positive entry.
void validate(const GccaInput& input);

/// Solution of the GCCA problem: shared representation G (r x N, orthonormal
/// rows), per-view projections U_j (o_j x r), the top-r eigenvalues of
/// M = sum_j w_j P_j, their sum L, and the reconstruction error
/// sum_j w_j ||G - U_j^T Y_j||_F^2 = r*sum_j w_j - L.
struct GccaSolution {
  Matrix g;
  std::vector<Matrix> u;
  Vector eigenvalues;
  double objective = 0.0;
  double reconstruction_error = 0.0;
  /// lambda_r - lambda_{r+1}; +inf when r == N. The sum-of-top-r-eigenvalues
  /// objective is non-differentiable where this vanishes, so a gap below
  /// 1e-6 marks the solution as degenerate (an arbitrary basis was picked).
  double eigengap = 0.0;
  bool degenerate_eigengap = false;
};

/// Solves the GCCA problem: C_jj = Y_j Y_j^T + eps*I, P_j = Y_j^T C_jj^-1 Y_j,
/// M = sum_j w_j P_j; the rows of G are the top-r eigenvectors of M and
/// U_j = C_jj^-1 Y_j G^T.
GccaSolution solve_gcca(const GccaInput& input);

/// Analytic gradient of the eigenvalue-sum objective L with respect to each
/// view: dL/dY_j = w_j * (2 U_j G - 2 U_j U_j^T Y_j).
std::vector<Matrix> gcca_gradient(const GccaInput& input, const GccaSolution& sol);

/// Central-difference estimate of dL/d(Y_view)[row, col] with step h,
/// recomputing the full solve at Y +- h*E. Throws NumericError when the
/// eigengap at the base point is below 1e-6 (L is not differentiable there,
/// so the check is ill-conditioned).
double finite_difference_objective(const GccaInput& input, std::size_t view,
                                   Index row, Index col, double h);

/// Direct evaluation of sum_j w_j ||G - U_j^T Y_j||_F^2.
double reconstruction_error_direct(const GccaSolution& sol, const GccaInput& input);

}  // namespace dgcca
