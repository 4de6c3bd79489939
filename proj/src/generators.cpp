#include "cpdkit/generators.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "cpdkit/linalg.hpp"
#include "cpdkit/rng.hpp"

namespace cpdkit {

namespace {

Matrix uniform_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform();
  return m;
}

Matrix gaussian_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

// Random orthonormal basis with a deterministic sign convention.
Matrix random_orthonormal(Rng& rng, Index rows, Index cols) {
  Matrix g = gaussian_matrix(rng, rows, cols);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Index j = 0; j < cols; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace

std::pair<DenseTensor, KruskalModel> random_cp(const std::vector<Index>& shape, Index rank,
                                               std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("random_cp: rank must be >= 1");
  Rng rng(seed);
  std::vector<Matrix> factors;
  for (Index d : shape) factors.push_back(uniform_matrix(rng, d, rank));
  KruskalModel raw(Vector::Ones(rank), std::move(factors));
  DenseTensor x = reconstruct(raw);
  return {std::move(x), normalize_model(raw)};
}

std::pair<DenseTensor, KruskalModel> collinear_cp(const std::vector<Index>& shape, Index rank,
                                                  double collinearity, std::uint64_t seed) {
  if (!(collinearity >= 0.0 && collinearity < 1.0))
    throw std::invalid_argument("collinear_cp: collinearity must lie in [0, 1)");
  for (Index d : shape)
    if (rank > d)
      throw std::invalid_argument("collinear_cp: rank must not exceed any mode length");

  // Upper Cholesky factor K of the compound-symmetry Gram (1-C) I + C 11^T,
  // so A = Q K has Gram exactly K^T K.
  Matrix gram = Matrix::Constant(rank, rank, collinearity);
  gram.diagonal().setConstant(1.0);
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("collinear_cp: Gram matrix is not positive definite");
  Matrix k = llt.matrixU();

  Rng rng(seed);
  std::vector<Matrix> factors;
  for (Index d : shape) factors.push_back(random_orthonormal(rng, d, rank) * k);

  Vector lambda(rank);
  for (Index r = 0; r < rank; ++r) lambda[r] = static_cast<double>(r + 1);
  KruskalModel model(std::move(lambda), std::move(factors));
  DenseTensor x = reconstruct(model);
  return {std::move(x), std::move(model)};
}

DenseTensor add_gaussian_noise(const DenseTensor& x, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
  if (sigma == 0.0) return x;
  Rng rng(seed);
  DenseTensor out = x;
  for (Index i = 0; i < out.size(); ++i) out[i] += sigma * rng.normal();
  return out;
}

std::pair<DenseTensor, KruskalModel> planted_orthogonal_cp(const std::vector<Index>& shape,
                                                           Index rank_full, double eps_perp,
                                                           std::uint64_t seed) {
  if (rank_full < 2 || rank_full % 2 != 0)
    throw std::invalid_argument("planted_orthogonal_cp: rank_full must be even and >= 2");
  if (eps_perp < 0.0) throw std::invalid_argument("planted_orthogonal_cp: eps_perp must be >= 0");
  for (Index d : shape)
    if (rank_full > d)
      throw std::invalid_argument("planted_orthogonal_cp: rank_full must not exceed mode lengths");

  const Index half = rank_full / 2;
  Rng rng(seed);

  std::vector<Matrix> planted, hidden;
  for (Index d : shape) {
    Matrix first = uniform_matrix(rng, d, half);
    Matrix raw = uniform_matrix(rng, d, half);
    const Matrix q = column_space_basis(first);
    Matrix second = raw - q * (q.transpose() * raw);
    if (eps_perp > 0.0) {
      Matrix noise = gaussian_matrix(rng, d, half);
      second += (eps_perp / noise.norm()) * noise;
    }
    second = normalize_columns(second).first;
    planted.push_back(std::move(first));
    hidden.push_back(std::move(second));
  }

  KruskalModel planted_model = normalize_model(KruskalModel(Vector::Ones(half), planted));
  KruskalModel hidden_model(Vector::Ones(half), std::move(hidden));
  DenseTensor x = reconstruct(planted_model);
  x.data() += reconstruct(hidden_model).data();
  return {std::move(x), std::move(planted_model)};
}

KruskalModel perturb_model(const KruskalModel& m, double eps, std::uint64_t seed) {
  if (eps < 0.0) throw std::invalid_argument("perturb_model: eps must be >= 0");
  if (eps == 0.0) return m;
  Rng rng(seed);
  KruskalModel out = m;
  for (auto& f : out.factors) {
    Matrix delta = gaussian_matrix(rng, f.rows(), f.cols());
    f += (eps / delta.norm()) * delta;
    f = normalize_columns(f).first;
  }
  return out;
}

}  // namespace cpdkit
