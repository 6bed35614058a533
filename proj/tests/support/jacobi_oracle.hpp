#pragma once

// From-scratch cyclic Jacobi eigensolver and plain-loop matrix helpers.
// This is the independent oracle for the library's symmetric eigensolver and
// for the GCCA optimum, so it deliberately avoids Eigen and every dgcca::
// code path: storage is std::vector, products are written out by hand.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat zeros(std::size_t rows, std::size_t cols) {
  return Mat(rows, std::vector<double>(cols, 0.0));
}

inline Mat identity(std::size_t n) {
  Mat m = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  const std::size_t rows = a.size(), inner = b.size(), cols = b[0].size();
  Mat c = zeros(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a[i][k];
      for (std::size_t j = 0; j < cols; ++j) c[i][j] += aik * b[k][j];
    }
  }
  return c;
}

inline Mat transpose(const Mat& a) {
  Mat t = zeros(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  }
  return t;
}

struct JacobiResult {
  std::vector<double> eigenvalues;  // descending
  Mat eigenvectors;                 // row i is the eigenvector of eigenvalue i
};

// Full-spectrum cyclic Jacobi, run to convergence of the off-diagonal mass.
inline JacobiResult jacobi_eigendecomposition(Mat a) {
  const std::size_t n = a.size();
  for (const auto& row : a) {
    if (row.size() != n) throw std::invalid_argument("jacobi: matrix must be square");
  }
  Mat v = identity(n);

  auto off_diagonal = [&]() {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) sum += a[i][j] * a[i][j];
    }
    return sum;
  };

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a[i][j]));
  }
  const double tol = 1e-30 * std::max(1.0, scale * scale);

  for (int sweep = 0; sweep < 200 && off_diagonal() > tol; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
          const double vpi = v[p][i], vqi = v[q][i];
          v[p][i] = c * vpi - s * vqi;
          v[q][i] = s * vpi + c * vqi;
        }
      }
    }
  }

  // Sort pairs descending by eigenvalue (insertion sort keeps this dependency-free).
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t key = order[i];
    std::size_t j = i;
    while (j > 0 && a[order[j - 1]][order[j - 1]] < a[key][key]) {
      order[j] = order[j - 1];
      --j;
    }
    order[j] = key;
  }

  JacobiResult result;
  result.eigenvalues.resize(n);
  result.eigenvectors = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    result.eigenvalues[i] = a[order[i]][order[i]];
    result.eigenvectors[i] = v[order[i]];
  }
  return result;
}

// Inverse of a symmetric positive definite matrix through the Jacobi
// spectrum (optionally ridged), keeping the oracle self-contained.
inline Mat spd_inverse(const Mat& m, double eps) {
  const JacobiResult eig = jacobi_eigendecomposition(m);
  const std::size_t n = m.size();
  Mat inv = zeros(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lambda = eig.eigenvalues[k] + eps;
    if (lambda <= 0.0) throw std::invalid_argument("spd_inverse: not positive definite");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        inv[i][j] += eig.eigenvectors[k][i] * eig.eigenvectors[k][j] / lambda;
      }
    }
  }
  return inv;
}

}  // namespace oracle
