#pragma once

#include <utility>

#include "cpdkit/tensor.hpp"

namespace cpdkit {

/// Thin singular value decomposition M = U diag(s) V^T with k = min(rows, cols)
/// columns and non-increasing singular values.
struct ThinSVD {
  Matrix u;
  Vector s;
  Matrix v;

  Matrix reconstruct() const { return u * s.asDiagonal() * v.transpose(); }
};

ThinSVD thin_svd(const Matrix& m);

/// Moore-Penrose inverse via thin SVD; singular values at or below
/// rel_tol * sigma_max are treated as zero.
Matrix pseudoinverse(const Matrix& m, double rel_tol = 1e-12);

/// Rescales every column to unit 2-norm and reports the original norms.
/// Exactly-zero columns are left zero with recorded norm 0.
std::pair<Matrix, Vector> normalize_columns(const Matrix& m);

/// Solves A * Z ~= RHS for A given a symmetric positive semidefinite Z, using
/// a pivoted Cholesky factorization; on detected rank deficiency falls back to
/// a Tikhonov-regularized solve with delta = 1e-12 * trace(Z) / R.
Matrix solve_gram_system(const Matrix& z, const Matrix& rhs);

/// Orthonormal basis of the orthogonal complement of a unit vector, built by
/// Householder completion; the result has size(v) rows and size(v)-1 columns.
Matrix orthonormal_complement(const Vector& v);

/// Orthonormal basis with the same span as the full-column-rank input.
Matrix column_space_basis(const Matrix& m);

}  // namespace cpdkit
