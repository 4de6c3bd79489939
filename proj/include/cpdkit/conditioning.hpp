#pragma once

#include "cpdkit/kruskal.hpp"

namespace cpdkit {

/// Dense Terracini matrix of a normalized model: for every component r one
/// elementary-direction column (the Kronecker chain of its unit factor
/// columns) plus, per mode, the chain with that mode's column replaced by an
/// orthonormal basis of its complement. Shape prod(I_k) x (sum(I_k - 1) + 1) R.
Matrix terracini_matrix(const KruskalModel& m);

/// Normalized CPD condition number 1 / sigma_min of the Terracini matrix.
/// Returns +infinity once sigma_min drops below 1e-14. The dense construction
/// is capped at prod(I_k) <= 1e6 entries per column set.
double condition_number_direct(const KruskalModel& m);

/// Same value through the orthogonally compressed form (cost O(R^(N+4))):
/// factors are projected onto their column-space bases, leaving an R^N corner
/// block plus one Khatri-Rao slab per mode with I_n > R.
/// Requires R <= I_k for all k and full-column-rank factors.
double condition_number_compressed(const KruskalModel& m);

/// Compressed when its preconditions hold, otherwise direct.
double condition_number(const KruskalModel& m);

}  // namespace cpdkit
