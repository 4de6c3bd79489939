#include "cpdkit/conditioning.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cpdkit/linalg.hpp"

namespace cpdkit {

namespace {

constexpr double kUnboundedCutoff = 1e-14;
constexpr Index kDirectSizeCap = 1'000'000;

void require_normalized(const KruskalModel& m) {
  for (const auto& f : m.factors)
    for (Index r = 0; r < f.cols(); ++r)
      if (std::abs(f.col(r).norm() - 1.0) > 1e-8)
        throw std::invalid_argument("condition number requires unit-norm factor columns");
}

// Kronecker chain over modes descending (vec of the rank-1 tensor with the
// first index fastest); `replace` swaps in a different vector at one mode.
Vector kron_chain(const std::vector<Matrix>& factors, Index r, Index replace_mode,
                  const Vector& replacement) {
  Vector chain = replace_mode == 0 ? replacement : Vector(factors[0].col(r));
  for (Index n = 1; n < static_cast<Index>(factors.size()); ++n) {
    const Vector col = n == replace_mode ? replacement : Vector(factors[n].col(r));
    Vector next(chain.size() * col.size());
    for (Index i = 0; i < col.size(); ++i)
      next.segment(i * chain.size(), chain.size()) = col[i] * chain;
    chain = std::move(next);
  }
  return chain;
}

double smallest_singular_value(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()[svd.singularValues().size() - 1];
}

double reciprocal_or_inf(double smin) {
  if (smin < kUnboundedCutoff) return std::numeric_limits<double>::infinity();
  return 1.0 / smin;
}

}  // namespace

Matrix terracini_matrix(const KruskalModel& m) {
  if (m.order() < 3) throw std::invalid_argument("terracini_matrix needs order >= 3");
  require_normalized(m);

  Index rows = 1;
  for (Index d : m.dims()) {
    rows *= d;
    if (rows > kDirectSizeCap)
      throw std::invalid_argument(
          "terracini_matrix: tensor too large for the dense construction");
  }
  Index cols_per_component = 1;
  for (Index d : m.dims()) cols_per_component += d - 1;
  Matrix u(rows, cols_per_component * m.rank());

  Index col = 0;
  const Vector none;
  for (Index r = 0; r < m.rank(); ++r) {
    u.col(col++) = kron_chain(m.factors, r, -1, none);
    for (Index n = 0; n < m.order(); ++n) {
      const Vector a = m.factors[n].col(r).normalized();
      const Matrix q = orthonormal_complement(a);
      for (Index j = 0; j < q.cols(); ++j) u.col(col++) = kron_chain(m.factors, r, n, q.col(j));
    }
  }
  return u;
}

double condition_number_direct(const KruskalModel& m) {
  return reciprocal_or_inf(smallest_singular_value(terracini_matrix(m)));
}

double condition_number_compressed(const KruskalModel& m) {
  if (m.order() < 3) throw std::invalid_argument("condition number needs order >= 3");
  require_normalized(m);
  const Index rank = m.rank();
  for (Index d : m.dims())
    if (rank > d)
      throw std::invalid_argument(
          "condition_number_compressed requires rank <= every mode length; use the direct path");

  // Project each factor onto an orthonormal basis of its column space; the
  // condition number is invariant under this orthogonal transformation.
  std::vector<Matrix> reduced(m.order());
  for (Index n = 0; n < m.order(); ++n) {
    const Matrix q = column_space_basis(m.factors[n]);  // throws when rank-deficient
    reduced[n] = q.transpose() * m.factors[n];          // R x R, unit columns
  }

  // Corner block: all tangent directions that survive in the R^N corner.
  Index corner_cols = m.rank();
  for (Index n = 0; n < m.order(); ++n) corner_cols += m.rank() * (rank - 1);
  Index corner_rows = 1;
  for (Index n = 0; n < m.order(); ++n) corner_rows *= rank;
  Matrix corner(corner_rows, corner_cols);

  Index col = 0;
  const Vector none;
  for (Index r = 0; r < rank; ++r) {
    corner.col(col++) = kron_chain(reduced, r, -1, none);
    for (Index n = 0; n < m.order(); ++n) {
      const Vector a = reduced[n].col(r).normalized();
      const Matrix q = orthonormal_complement(a);
      for (Index j = 0; j < q.cols(); ++j)
        corner.col(col++) = kron_chain(reduced, r, n, q.col(j));
    }
  }
  double smin = smallest_singular_value(corner);

  // Complement directions sticking out of each factor's column space reduce
  // to the Khatri-Rao product of the other projected factors, one identical
  // slab per leftover dimension.
  for (Index n = 0; n < m.order(); ++n) {
    if (m.factors[n].rows() <= rank) continue;
    std::vector<Matrix> others;
    for (Index k = m.order() - 1; k >= 0; --k)
      if (k != n) others.push_back(reduced[k]);
    smin = std::min(smin, smallest_singular_value(khatri_rao(others)));
  }
  return reciprocal_or_inf(smin);
}

double condition_number(const KruskalModel& m) {
  const Index rank = m.rank();
  bool compressible = true;
  for (Index d : m.dims()) compressible &= rank <= d;
  if (compressible) {
    try {
      return condition_number_compressed(m);
    } catch (const std::invalid_argument&) {
      // rank-deficient factors; fall through to the dense path
    }
  }
  return condition_number_direct(m);
}

}  // namespace cpdkit
