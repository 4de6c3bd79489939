#pragma once

#include <utility>
#include <vector>

#include "cpdkit/tensor.hpp"

namespace cpdkit {

/// Kruskal (CP) model: weights lambda plus one I_n x R factor matrix per mode.
struct KruskalModel {
  Vector lambda;
  std::vector<Matrix> factors;

  KruskalModel() = default;
  KruskalModel(Vector lambda_, std::vector<Matrix> factors_);

  Index rank() const { return lambda.size(); }
  Index order() const { return static_cast<Index>(factors.size()); }
  std::vector<Index> dims() const;
};

/// Dense tensor y_{i1..iN} = sum_r lambda_r prod_n a^(n)_{in r}.
DenseTensor reconstruct(const KruskalModel& m);

/// Absolute residual r = ||X - Y||_F and fitness f = 1 - r / ||X||_F, computed
/// by full reconstruction. Throws when ||X|| = 0.
std::pair<double, double> residual_and_fitness(const KruskalModel& m, const DenseTensor& x);

/// Same quantities through the Gram identity
/// r^2 = ||X||^2 - 2 <mttkrp(X,.,N) , A^(N) diag(lambda)> + <Gamma, lam lam^T>;
/// cheaper per trace row but loses accuracy once r is near machine precision.
std::pair<double, double> residual_and_fitness_gram(const KruskalModel& m,
                                                    const DenseTensor& x);

/// Unit-normalizes every factor column, absorbing the norms into lambda.
/// Signs are pushed into the first factor so lambda stays nonnegative;
/// zero columns get lambda_r = 0 and are left zero.
KruskalModel normalize_model(const KruskalModel& m);

/// Per-mode factor errors after greedy congruence matching of components,
/// with sign alignment across modes (sign flips multiply to +1 per component).
struct RecoveryError {
  std::vector<double> per_mode;  // ||A^(n) - Ahat^(n) Pi||_F per mode
  double lambda_mismatch = 0.0;  // ||lambda - lambda_hat o pi||_2
  std::vector<Index> permutation;

  double total() const;  // max over modes plus the lambda mismatch
};

RecoveryError factor_recovery_detail(const KruskalModel& m, const KruskalModel& ref);

/// max_n ||A^(n) - Ahat^(n) Pi||_F + lambda mismatch, both models normalized
/// and components matched by maximal congruence.
double factor_recovery_error(const KruskalModel& m, const KruskalModel& ref);

}  // namespace cpdkit
