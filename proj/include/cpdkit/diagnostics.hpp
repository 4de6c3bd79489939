#pragma once

#include <utility>
#include <vector>

#include "cpdkit/kruskal.hpp"
#include "cpdkit/solver.hpp"

namespace cpdkit {

/// Unique real positive root of x^(N-1) - sum_{i=0}^{N-2} x^i: the predicted
/// per-subiteration convergence order. N = 2 gives 1 (the matrix case).
double theoretical_rate(Index order);

/// Log-log regression estimate of the order alpha in e_{k+1} ~ C e_k^alpha.
struct RateEstimate {
  double alpha = 0.0;
  std::vector<Index> window;  // indices of the error samples used
  double fit_residual = 0.0;  // RMS residual of the regression
};

/// Fits consecutive pairs whose errors lie within [1e-12, 1e-2]; throws
/// "insufficient samples" when fewer than three samples qualify.
RateEstimate empirical_order(const std::vector<double>& errors);

/// Per-mode normalized defect of the fixed-point condition
/// A^(n) diag(lambda) = X_(n) (KR of the other factors' pseudoinverse
/// transposes). Vanishes at AMDM stationary points.
std::vector<double> stationarity_residual(const KruskalModel& m, const DenseTensor& x);

/// Per-mode ||G^(n) - I||_F where g_{ji} evaluates the tensor's multilinear
/// form on rows of the factor pseudoinverses. Requires R <= min I_n.
std::vector<double> orthonormality_defect(const KruskalModel& m, const DenseTensor& x);

/// Worst deviation of the pseudoinverse-transformed tensor from the
/// elementary-eigenvector slices z_{jk..jp..jk} = delta_{jk jp}.
double spectral_diagonalization_defect(const KruskalModel& m, const DenseTensor& x);

struct SingularTuple {
  double sigma = 0.0;
  std::vector<Vector> vectors;  // unit mode vectors
  Index sweeps = 0;
};

/// Rank-1 AMDM run to a fixed point; sigma = 1 / prod ||v^(n)|| in the
/// critical-point scaling, which equals the converged weight.
SingularTuple rank1_singular_tuple(const DenseTensor& x, const SolverConfig& cfg);

/// Pair (||(Y_(n) - X_(n)) z||, ||X_(n) z_perp||) with z_perp the projection
/// of z onto the orthogonal complement of span(KR of the other factors).
std::pair<double, double> backward_error(const KruskalModel& m, const DenseTensor& x,
                                         Index mode, const Vector& z);

}  // namespace cpdkit
