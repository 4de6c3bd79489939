#include "cpdkit/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace cpdkit {

namespace {

void check_finite(const Matrix& m, const char* who) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

}  // namespace

ThinSVD thin_svd(const Matrix& m) {
  check_finite(m, "thin_svd");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return ThinSVD{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Matrix pseudoinverse(const Matrix& m, double rel_tol) {
  check_finite(m, "pseudoinverse");
  if (rel_tol < 0.0) throw std::invalid_argument("pseudoinverse: rel_tol must be >= 0");
  ThinSVD svd = thin_svd(m);
  const double smax = svd.s.size() > 0 ? svd.s[0] : 0.0;
  Vector inv = Vector::Zero(svd.s.size());
  for (Index i = 0; i < svd.s.size(); ++i)
    if (svd.s[i] > rel_tol * smax && svd.s[i] > 0.0) inv[i] = 1.0 / svd.s[i];
  return svd.v * inv.asDiagonal() * svd.u.transpose();
}

std::pair<Matrix, Vector> normalize_columns(const Matrix& m) {
  Matrix out = m;
  Vector norms(m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    const double nj = m.col(j).norm();
    norms[j] = nj;
    if (nj > 0.0) out.col(j) /= nj;
  }
  return {std::move(out), std::move(norms)};
}

namespace {

// Diagonally pivoted Cholesky P Z P^T = L L^T with physical row/column swaps.
// Returns the detected rank; pivoting stops once the largest remaining
// diagonal drops at or below 1e-12 * (largest diagonal of Z).
Index pivoted_cholesky(Matrix w, Matrix& l, std::vector<Index>& perm) {
  const Index n = w.rows();
  perm.resize(n);
  for (Index i = 0; i < n; ++i) perm[i] = i;
  const double stop = 1e-12 * std::max(0.0, w.diagonal().maxCoeff());

  Index k = 0;
  for (; k < n; ++k) {
    Index p = k;
    for (Index i = k + 1; i < n; ++i)
      if (w(i, i) > w(p, p)) p = i;
    if (!(w(p, p) > stop)) break;
    if (p != k) {
      w.row(k).swap(w.row(p));
      w.col(k).swap(w.col(p));
      std::swap(perm[k], perm[p]);
    }
    w(k, k) = std::sqrt(w(k, k));
    const Index rest = n - k - 1;
    if (rest > 0) {
      w.col(k).tail(rest) /= w(k, k);
      w.bottomRightCorner(rest, rest).noalias() -=
          w.col(k).tail(rest) * w.col(k).tail(rest).transpose();
    }
  }
  l = w.triangularView<Eigen::Lower>();
  return k;
}

}  // namespace

Matrix solve_gram_system(const Matrix& z, const Matrix& rhs) {
  check_finite(z, "solve_gram_system");
  check_finite(rhs, "solve_gram_system");
  const Index n = z.rows();
  if (z.cols() != n) throw std::invalid_argument("solve_gram_system: Z must be square");
  if (rhs.cols() != n) throw std::invalid_argument("solve_gram_system: RHS column mismatch");
  if ((z - z.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + z.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("solve_gram_system: Z is not symmetric");

  Matrix l;
  std::vector<Index> perm;
  const Index rank = pivoted_cholesky(z, l, perm);

  if (rank == n) {
    // Z = P^T L L^T P; solve L L^T (P A^T) = P RHS^T by two triangular solves.
    Matrix b(n, rhs.rows());
    for (Index i = 0; i < n; ++i) b.row(i) = rhs.col(perm[i]).transpose();
    l.triangularView<Eigen::Lower>().solveInPlace(b);
    l.triangularView<Eigen::Lower>().transpose().solveInPlace(b);
    Matrix a(rhs.rows(), n);
    for (Index i = 0; i < n; ++i) a.col(perm[i]) = b.row(i).transpose();
    return a;
  }

  const double delta = 1e-12 * z.trace() / static_cast<double>(n);
  if (delta <= 0.0) {
    // Z vanished entirely; the minimum-norm regularized solution is zero.
    return Matrix::Zero(rhs.rows(), n);
  }
  Matrix reg = z;
  reg.diagonal().array() += delta;
  Eigen::LDLT<Matrix> ldlt(reg);
  return ldlt.solve(rhs.transpose()).transpose();
}

Matrix orthonormal_complement(const Vector& v) {
  const Index s = v.size();
  if (std::abs(v.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("orthonormal_complement: input must be a unit vector");
  if (s < 2) return Matrix(s, 0);

  // Householder reflector H with H v = alpha e_1; the trailing columns of the
  // symmetric orthogonal H are then orthonormal and orthogonal to v.
  const double alpha = v[0] >= 0.0 ? -1.0 : 1.0;
  Vector w = v;
  w[0] -= alpha;
  const double wtw = w.squaredNorm();
  Matrix h = Matrix::Identity(s, s);
  if (wtw > 1e-30) h -= (2.0 / wtw) * (w * w.transpose());
  return h.rightCols(s - 1);
}

Matrix column_space_basis(const Matrix& m) {
  check_finite(m, "column_space_basis");
  if (m.cols() > m.rows())
    throw std::invalid_argument("column_space_basis: need cols <= rows");
  ThinSVD svd = thin_svd(m);
  const double smax = svd.s.size() > 0 ? svd.s[0] : 0.0;
  if (svd.s.size() == 0 || svd.s[svd.s.size() - 1] <= 1e-12 * smax)
    throw std::invalid_argument("column_space_basis: rank-deficient input");
  return svd.u;
}

}  // namespace cpdkit
