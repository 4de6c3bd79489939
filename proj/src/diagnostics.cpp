#include "cpdkit/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "cpdkit/linalg.hpp"

namespace cpdkit {

double theoretical_rate(Index order) {
  if (order < 2) throw std::invalid_argument("theoretical_rate needs order >= 2");
  if (order == 2) return 1.0;
  auto poly = [order](double x) {
    double p = std::pow(x, static_cast<double>(order - 1));
    double xe = 1.0;
    for (Index i = 0; i <= order - 2; ++i) {
      p -= xe;
      xe *= x;
    }
    return p;
  };
  double lo = 1.0, hi = 2.0;
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    (poly(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RateEstimate empirical_order(const std::vector<double>& errors) {
  for (double e : errors)
    if (!(e > 0.0)) throw std::invalid_argument("empirical_order needs positive errors");

  constexpr double lo = 1e-12, hi = 1e-2;
  auto in_window = [&](double e) { return e >= lo && e <= hi; };

  std::vector<std::pair<double, double>> points;  // (log e_k, log e_{k+1})
  std::vector<Index> used;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    if (in_window(errors[k]) && in_window(errors[k + 1])) {
      points.emplace_back(std::log(errors[k]), std::log(errors[k + 1]));
      if (used.empty() || used.back() != static_cast<Index>(k)) used.push_back(k);
      used.push_back(k + 1);
    }
  }
  if (used.size() < 3)
    throw std::invalid_argument("empirical_order: insufficient samples in the window");

  // least-squares slope of log e_{k+1} against log e_k
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30)
    throw std::invalid_argument("empirical_order: degenerate sample spacing");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;

  double rss = 0.0;
  for (auto [x, y] : points) {
    const double resid = y - slope * x - intercept;
    rss += resid * resid;
  }

  RateEstimate est;
  est.alpha = slope;
  est.window = std::move(used);
  est.fit_residual = std::sqrt(rss / n);
  return est;
}

namespace {

// Pseudoinverse-transposes of every factor, shaped I_n x R like the factors;
// throws on rank deficiency.
std::vector<Matrix> pinv_transposes(const KruskalModel& m) {
  std::vector<Matrix> out;
  out.reserve(m.factors.size());
  for (const auto& f : m.factors) {
    ThinSVD svd = thin_svd(f);
    if (svd.s[svd.s.size() - 1] <= 1e-12 * svd.s[0])
      throw std::invalid_argument("rank-deficient factor");
    out.push_back(svd.u * svd.s.cwiseInverse().asDiagonal() * svd.v.transpose());
  }
  return out;
}

}  // namespace

std::vector<double> stationarity_residual(const KruskalModel& m, const DenseTensor& x) {
  if (m.dims() != x.shape()) throw std::invalid_argument("stationarity_residual: shape mismatch");
  const KruskalModel nm = normalize_model(m);
  const std::vector<Matrix> us = pinv_transposes(nm);
  std::vector<double> out(nm.order());
  for (Index n = 0; n < nm.order(); ++n) {
    std::vector<Matrix> companions = us;
    companions[n] = nm.factors[n];  // shape placeholder; ignored by mttkrp
    const Matrix rhs = mttkrp(x, companions, n);
    const Matrix target = nm.factors[n] * nm.lambda.asDiagonal();
    out[n] = (target - rhs).norm() / target.norm();
  }
  return out;
}

namespace {

// Transformed tensor Z = X x_1 U^(1)T ... x_N U^(N)T of shape R^N, with the
// weights absorbed symmetrically (lambda^(1/N) per mode) so that the
// fixed-point identities come out against I rather than diag(lambda).
DenseTensor pinv_transformed(const KruskalModel& m, const DenseTensor& x) {
  const Index rank = m.rank();
  for (Index n = 0; n < m.order(); ++n)
    if (x.dim(n) < rank)
      throw std::invalid_argument("requires rank <= every mode length");
  KruskalModel absorbed = normalize_model(m);
  const Vector scale =
      absorbed.lambda.array().pow(1.0 / static_cast<double>(m.order())).matrix();
  for (auto& f : absorbed.factors) f = f * scale.asDiagonal();
  absorbed.lambda.setOnes();
  return multimode_transform(x, pinv_transposes(absorbed));
}

}  // namespace

std::vector<double> orthonormality_defect(const KruskalModel& m, const DenseTensor& x) {
  if (m.dims() != x.shape()) throw std::invalid_argument("orthonormality_defect: shape mismatch");
  const DenseTensor z = pinv_transformed(m, x);
  const Index rank = m.rank();
  std::vector<double> out(m.order());
  std::vector<Index> idx(m.order());
  for (Index n = 0; n < m.order(); ++n) {
    Matrix g(rank, rank);
    for (Index i = 0; i < rank; ++i) {
      std::fill(idx.begin(), idx.end(), i);
      for (Index j = 0; j < rank; ++j) {
        idx[n] = j;
        g(j, i) = z.at(idx);
      }
    }
    out[n] = (g - Matrix::Identity(rank, rank)).norm();
  }
  return out;
}

double spectral_diagonalization_defect(const KruskalModel& m, const DenseTensor& x) {
  if (m.dims() != x.shape())
    throw std::invalid_argument("spectral_diagonalization_defect: shape mismatch");
  const DenseTensor z = pinv_transformed(m, x);
  const Index rank = m.rank();
  double worst = 0.0;
  std::vector<Index> idx(m.order());
  for (Index p = 0; p < m.order(); ++p)
    for (Index i = 0; i < rank; ++i) {
      std::fill(idx.begin(), idx.end(), i);
      for (Index j = 0; j < rank; ++j) {
        idx[p] = j;
        const double want = i == j ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(z.at(idx) - want));
      }
    }
  return worst;
}

SingularTuple rank1_singular_tuple(const DenseTensor& x, const SolverConfig& cfg) {
  SolverConfig r1 = cfg;
  r1.algorithm = Algorithm::amdm;
  r1.rank = 1;
  RunResult res = run(x, r1);
  if (!res.converged)
    throw std::runtime_error("rank1_singular_tuple: no fixed point within the sweep budget");
  SingularTuple tuple;
  tuple.sigma = res.model.lambda[0];
  for (const auto& f : res.model.factors) tuple.vectors.push_back(f.col(0));
  tuple.sweeps = res.sweeps_run;
  return tuple;
}

std::pair<double, double> backward_error(const KruskalModel& m, const DenseTensor& x,
                                         Index mode, const Vector& z) {
  if (m.dims() != x.shape()) throw std::invalid_argument("backward_error: shape mismatch");
  const Matrix xn = matricize(x, mode);
  if (z.size() != xn.cols()) throw std::invalid_argument("backward_error: probe length mismatch");

  std::vector<Matrix> others;
  for (Index k = m.order() - 1; k >= 0; --k)
    if (k != mode) others.push_back(m.factors[k]);
  const Matrix kr = khatri_rao(others);

  // orthonormal basis of span(kr) through the thin SVD, tolerant of rank loss
  ThinSVD svd = thin_svd(kr);
  Index rank = 0;
  for (Index i = 0; i < svd.s.size(); ++i)
    if (svd.s[i] > 1e-12 * svd.s[0]) ++rank;
  const Matrix q = svd.u.leftCols(rank);
  const Vector z_perp = z - q * (q.transpose() * z);

  const Matrix yn = m.factors[mode] * m.lambda.asDiagonal() * kr.transpose();
  return {((yn - xn) * z).norm(), (xn * z_perp).norm()};
}

}  // namespace cpdkit
