#pragma once

#include <cstdint>
#include <utility>

#include "cpdkit/kruskal.hpp"

namespace cpdkit {

/// Exact-rank tensor from uniform(0,1) factors; returns the tensor and the
/// normalized ground-truth model.
std::pair<DenseTensor, KruskalModel> random_cp(const std::vector<Index>& shape, Index rank,
                                               std::uint64_t seed);

/// Factors with unit columns and constant pairwise inner product C, built as
/// Q * chol((1-C) I + C 11^T) with Q a seeded random orthonormal basis;
/// weights are lambda_r = r + 1.
std::pair<DenseTensor, KruskalModel> collinear_cp(const std::vector<Index>& shape, Index rank,
                                                  double collinearity, std::uint64_t seed);

/// X plus iid Normal(0, sigma^2) entries.
DenseTensor add_gaussian_noise(const DenseTensor& x, double sigma, std::uint64_t seed);

/// Planted tensor: first rank_full/2 components random, second half built in
/// the orthogonal complement of the first half's column space per mode, with
/// Gaussian noise of Frobenius norm eps_perp added per factor before column
/// normalization. Returns the full tensor and the first-half model.
std::pair<DenseTensor, KruskalModel> planted_orthogonal_cp(const std::vector<Index>& shape,
                                                           Index rank_full, double eps_perp,
                                                           std::uint64_t seed);

/// Additive Gaussian perturbation with per-factor Frobenius norm eps,
/// followed by column renormalization.
KruskalModel perturb_model(const KruskalModel& m, double eps, std::uint64_t seed);

}  // namespace cpdkit
