#include "cpdkit/kruskal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpdkit/linalg.hpp"

namespace cpdkit {

KruskalModel::KruskalModel(Vector lambda_, std::vector<Matrix> factors_)
    : lambda(std::move(lambda_)), factors(std::move(factors_)) {
  if (factors.empty()) throw std::invalid_argument("KruskalModel needs at least one factor");
  for (const auto& f : factors)
    if (f.cols() != lambda.size())
      throw std::invalid_argument("KruskalModel factor column count must equal rank");
}

std::vector<Index> KruskalModel::dims() const {
  std::vector<Index> d;
  d.reserve(factors.size());
  for (const auto& f : factors) d.push_back(f.rows());
  return d;
}

DenseTensor reconstruct(const KruskalModel& m) {
  DenseTensor out(m.dims());
  const Index n_modes = m.order();
  Vector chain;
  for (Index r = 0; r < m.rank(); ++r) {
    chain = m.lambda[r] * m.factors[0].col(r);
    for (Index n = 1; n < n_modes; ++n) {
      const auto& col = m.factors[n].col(r);
      Vector next(chain.size() * col.size());
      for (Index i = 0; i < col.size(); ++i)
        next.segment(i * chain.size(), chain.size()) = col[i] * chain;
      chain = std::move(next);
    }
    out.data() += chain;
  }
  return out;
}

std::pair<double, double> residual_and_fitness(const KruskalModel& m, const DenseTensor& x) {
  if (m.dims() != x.shape())
    throw std::invalid_argument("residual_and_fitness: shape mismatch");
  const double xnorm = x.norm();
  if (xnorm == 0.0)
    throw std::invalid_argument("residual_and_fitness: fitness undefined for zero tensor");
  const DenseTensor y = reconstruct(m);
  const double r = (x.data() - y.data()).norm();
  return {r, 1.0 - r / xnorm};
}

std::pair<double, double> residual_and_fitness_gram(const KruskalModel& m,
                                                    const DenseTensor& x) {
  if (m.dims() != x.shape())
    throw std::invalid_argument("residual_and_fitness_gram: shape mismatch");
  const double xnorm = x.norm();
  if (xnorm == 0.0)
    throw std::invalid_argument("residual_and_fitness_gram: fitness undefined for zero tensor");

  const Index last = m.order() - 1;
  const Matrix mt = mttkrp(x, m.factors, last);
  const Matrix b = m.factors[last] * m.lambda.asDiagonal();

  Matrix gamma = Matrix::Ones(m.rank(), m.rank());
  for (Index n = 0; n < m.order(); ++n)
    gamma = gamma.cwiseProduct(m.factors[n].transpose() * m.factors[n]);
  const Matrix ll = m.lambda * m.lambda.transpose();

  const double cross = (mt.cwiseProduct(b)).sum();
  const double ynorm2 = (gamma.cwiseProduct(ll)).sum();
  const double r2 = std::max(0.0, xnorm * xnorm - 2.0 * cross + ynorm2);
  const double r = std::sqrt(r2);
  return {r, 1.0 - r / xnorm};
}

KruskalModel normalize_model(const KruskalModel& m) {
  KruskalModel out = m;
  for (Index n = 0; n < out.order(); ++n) {
    auto [q, norms] = normalize_columns(out.factors[n]);
    out.factors[n] = std::move(q);
    out.lambda = out.lambda.cwiseProduct(norms);
  }
  for (Index r = 0; r < out.rank(); ++r) {
    if (out.lambda[r] < 0.0) {
      out.lambda[r] = -out.lambda[r];
      out.factors[0].col(r) = -out.factors[0].col(r);
    }
  }
  return out;
}

RecoveryError factor_recovery_detail(const KruskalModel& m, const KruskalModel& ref) {
  if (m.rank() != ref.rank())
    throw std::invalid_argument("factor_recovery_error: rank mismatch");
  if (m.dims() != ref.dims())
    throw std::invalid_argument("factor_recovery_error: shape mismatch");

  const KruskalModel a = normalize_model(m);
  const KruskalModel b = normalize_model(ref);
  const Index rk = a.rank();
  const Index n_modes = a.order();

  // Congruence of components: c(r, z) = prod_n |<a_r^(n), b_z^(n)>|.
  Matrix congruence = Matrix::Ones(rk, rk);
  for (Index n = 0; n < n_modes; ++n)
    congruence = congruence.cwiseProduct(
        (a.factors[n].transpose() * b.factors[n]).cwiseAbs());

  std::vector<Index> perm(rk, -1);
  std::vector<bool> row_used(rk, false), col_used(rk, false);
  for (Index step = 0; step < rk; ++step) {
    double best = -1.0;
    Index br = 0, bz = 0;
    for (Index r = 0; r < rk; ++r) {
      if (row_used[r]) continue;
      for (Index z = 0; z < rk; ++z) {
        if (col_used[z]) continue;
        if (congruence(r, z) > best) {
          best = congruence(r, z);
          br = r;
          bz = z;
        }
      }
    }
    perm[br] = bz;
    row_used[br] = true;
    col_used[bz] = true;
  }

  RecoveryError err;
  err.permutation = perm;
  err.per_mode.assign(n_modes, 0.0);

  // Align signs: choose per-mode flips whose product is +1 per component,
  // sacrificing the mode with the weakest overlap when the parity is odd.
  std::vector<Matrix> aligned(n_modes);
  for (Index n = 0; n < n_modes; ++n) aligned[n] = Matrix(a.factors[n].rows(), rk);
  Vector lam_ref(rk);
  for (Index r = 0; r < rk; ++r) {
    const Index z = perm[r];
    lam_ref[r] = b.lambda[z];
    std::vector<double> dots(n_modes);
    std::vector<int> signs(n_modes);
    int parity = 1;
    for (Index n = 0; n < n_modes; ++n) {
      dots[n] = a.factors[n].col(r).dot(b.factors[n].col(z));
      signs[n] = dots[n] < 0.0 ? -1 : 1;
      parity *= signs[n];
    }
    if (parity < 0) {
      Index weakest = 0;
      for (Index n = 1; n < n_modes; ++n)
        if (std::abs(dots[n]) < std::abs(dots[weakest])) weakest = n;
      signs[weakest] = -signs[weakest];
    }
    for (Index n = 0; n < n_modes; ++n)
      aligned[n].col(r) = static_cast<double>(signs[n]) * b.factors[n].col(z);
  }

  for (Index n = 0; n < n_modes; ++n)
    err.per_mode[n] = (a.factors[n] - aligned[n]).norm();
  err.lambda_mismatch = (a.lambda - lam_ref).norm();
  return err;
}

double RecoveryError::total() const {
  double worst = 0.0;
  for (double e : per_mode) worst = std::max(worst, e);
  return worst + lambda_mismatch;
}

double factor_recovery_error(const KruskalModel& m, const KruskalModel& ref) {
  return factor_recovery_detail(m, ref).total();
}

}  // namespace cpdkit
