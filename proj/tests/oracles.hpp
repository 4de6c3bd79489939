#pragma once

// Brute-force reference implementations used only by the test suites. These
// stay independent of the library kernels they check: everything here works
// from explicit index enumeration.

#include <vector>

#include "cpdkit/tensor.hpp"

namespace oracle {

using cpdkit::DenseTensor;
using cpdkit::Index;
using cpdkit::Matrix;
using cpdkit::Vector;

inline std::vector<Index> unflatten(Index flat, const std::vector<Index>& shape) {
  std::vector<Index> idx(shape.size());
  for (std::size_t n = 0; n < shape.size(); ++n) {
    idx[n] = flat % shape[n];
    flat /= shape[n];
  }
  return idx;
}

// Kolda mode-n unfolding by direct evaluation of the index map
// j = sum_{k != n} i_k * J_k with J_k = prod_{m<k, m != n} I_m.
inline Matrix matricize(const DenseTensor& t, Index mode) {
  const auto& shape = t.shape();
  Index cols = 1;
  for (Index m = 0; m < t.order(); ++m)
    if (m != mode) cols *= shape[m];
  Matrix out(shape[mode], cols);
  for (Index flat = 0; flat < t.size(); ++flat) {
    const auto idx = unflatten(flat, shape);
    Index j = 0, jk = 1;
    for (Index k = 0; k < t.order(); ++k) {
      if (k == mode) continue;
      j += idx[k] * jk;
      jk *= shape[k];
    }
    out(idx[mode], j) = t[flat];
  }
  return out;
}

inline Matrix khatri_rao_desc_skip(const std::vector<Matrix>& factors, Index skip) {
  std::vector<Matrix> ms;
  for (Index m = static_cast<Index>(factors.size()) - 1; m >= 0; --m)
    if (m != skip) ms.push_back(factors[m]);
  if (ms.empty()) return Matrix::Ones(1, factors[skip].cols());
  return cpdkit::khatri_rao(ms);
}

// Reference MTTKRP: materialize the unfolding and the Khatri-Rao product.
inline Matrix mttkrp(const DenseTensor& t, const std::vector<Matrix>& factors, Index mode) {
  return oracle::matricize(t, mode) * khatri_rao_desc_skip(factors, mode);
}

inline double multilinear_eval(const DenseTensor& t, const std::vector<Vector>& vs) {
  double acc = 0.0;
  for (Index flat = 0; flat < t.size(); ++flat) {
    const auto idx = unflatten(flat, t.shape());
    double p = t[flat];
    for (std::size_t n = 0; n < vs.size(); ++n) p *= vs[n][idx[n]];
    acc += p;
  }
  return acc;
}

// Rank-R reconstruction by explicit index enumeration.
inline DenseTensor reconstruct(const Vector& lambda, const std::vector<Matrix>& factors) {
  std::vector<Index> shape;
  for (const auto& f : factors) shape.push_back(f.rows());
  DenseTensor t(shape);
  for (Index flat = 0; flat < t.size(); ++flat) {
    const auto idx = unflatten(flat, shape);
    double acc = 0.0;
    for (Index r = 0; r < lambda.size(); ++r) {
      double p = lambda[r];
      for (std::size_t n = 0; n < factors.size(); ++n) p *= factors[n](idx[n], r);
      acc += p;
    }
    t[flat] = acc;
  }
  return t;
}

}  // namespace oracle
