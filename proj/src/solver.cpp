#include "cpdkit/solver.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "cpdkit/conditioning.hpp"
#include "cpdkit/rng.hpp"

namespace cpdkit {

namespace {

/// Thrown by the subsweep updates when a non-finite value appears; run()
/// converts it into a best-so-far result instead of propagating.
struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Matrix uniform_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform();
  return m;
}

void require_finite(const Matrix& m, const SolverState& state, Index mode, const char* where) {
  if (!m.allFinite())
    throw NonFiniteError(std::string(where) + " produced a non-finite value at mode " +
                         std::to_string(mode + 1) + ", sweep " +
                         std::to_string(state.sweep + 1));
}

/// Installs the unnormalized solve result as factor `mode`: renormalizes,
/// re-randomizes collapsed columns, replaces lambda with the column norms,
/// and refreshes the factor's spectrum. Returns the relative factor change.
double install_factor(SolverState& state, Index mode, Matrix unnormalized) {
  auto [q, norms] = normalize_columns(unnormalized);
  for (Index r = 0; r < norms.size(); ++r) {
    if (norms[r] < 1e-150) {
      Rng rng(derive_seed(state.reinit_seed, static_cast<std::uint64_t>(state.column_reinits)));
      Vector fresh(q.rows());
      for (Index i = 0; i < q.rows(); ++i) fresh[i] = rng.uniform();
      q.col(r) = fresh / fresh.norm();
      norms[r] = 0.0;
      ++state.column_reinits;
    }
  }
  const Matrix& old = state.model.factors[mode];
  const double denom = old.norm();
  const double delta = denom > 0.0 ? (q - old).norm() / denom : (q - old).norm();
  state.model.factors[mode] = std::move(q);
  state.model.lambda = std::move(norms);
  state.refresh_spectrum(mode);
  return delta;
}

}  // namespace

ThresholdSchedule ThresholdSchedule::fixed(Index t) {
  if (t < 0) throw std::invalid_argument("fixed threshold must be >= 0");
  ThresholdSchedule s;
  s.kind = Kind::fixed;
  s.fixed_t = t;
  return s;
}

ThresholdSchedule ThresholdSchedule::decay(Index t0, Index period) {
  if (t0 < 0 || period < 1) throw std::invalid_argument("decay schedule needs t0 >= 0, period >= 1");
  ThresholdSchedule s;
  s.kind = Kind::decay;
  s.decay_t0 = t0;
  s.decay_period = period;
  return s;
}

ThresholdSchedule ThresholdSchedule::relative(double tau) {
  if (!(tau > 1.0)) throw std::invalid_argument("relative schedule needs tau > 1");
  ThresholdSchedule s;
  s.kind = Kind::relative;
  s.relative_tau = tau;
  return s;
}

void SolverConfig::validate() const {
  if (rank < 1) throw std::invalid_argument("rank must be >= 1");
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
  if (tol_change < 0.0 || tol_resid < 0.0) throw std::invalid_argument("tolerances must be >= 0");
  if (pinv_rel_tol < 0.0) throw std::invalid_argument("pinv_rel_tol must be >= 0");
}

void SolverState::refresh_spectrum(Index mode) {
  spectra[mode] = thin_svd(model.factors[mode]);
}

SolverState make_initial_state(const DenseTensor& x, const SolverConfig& cfg,
                               const std::optional<KruskalModel>& init) {
  cfg.validate();
  SolverState state;
  state.reinit_seed = derive_seed(cfg.seed, 0x5eed);
  if (init.has_value()) {
    if (init->dims() != x.shape() || init->rank() != cfg.rank)
      throw std::invalid_argument("initial model is not shape-compatible");
    state.model = normalize_model(*init);
  } else {
    Rng rng(cfg.seed);
    std::vector<Matrix> factors;
    for (Index d : x.shape()) factors.push_back(uniform_matrix(rng, d, cfg.rank));
    state.model = normalize_model(KruskalModel(Vector::Ones(cfg.rank), std::move(factors)));
  }
  state.spectra.resize(state.model.order());
  for (Index n = 0; n < state.model.order(); ++n) state.refresh_spectrum(n);
  return state;
}

double als_update(SolverState& state, const DenseTensor& x, Index mode) {
  const auto& factors = state.model.factors;
  const Index rank = state.model.rank();
  Matrix gamma = Matrix::Ones(rank, rank);
  for (Index m = 0; m < state.model.order(); ++m)
    if (m != mode) gamma = gamma.cwiseProduct(factors[m].transpose() * factors[m]);
  Matrix rhs = mttkrp(x, factors, mode);
  require_finite(rhs, state, mode, "als_update");
  require_finite(gamma, state, mode, "als_update");
  Matrix b = solve_gram_system(gamma, rhs);
  require_finite(b, state, mode, "als_update");
  return install_factor(state, mode, std::move(b));
}

double amdm_update(SolverState& state, const DenseTensor& x, Index mode, double pinv_rel_tol) {
  const Index rank = state.model.rank();
  for (Index m = 0; m < state.model.order(); ++m)
    if (state.model.factors[m].rows() < rank)
      throw std::invalid_argument("amdm_update requires rank <= every mode length");

  std::vector<Matrix> companions = state.model.factors;
  for (Index m = 0; m < state.model.order(); ++m) {
    if (m == mode) continue;
    ThinSVD svd = thin_svd(state.model.factors[m]);
    const double smax = svd.s[0];
    Vector inv = Vector::Zero(svd.s.size());
    for (Index i = 0; i < svd.s.size(); ++i) {
      if (svd.s[i] > pinv_rel_tol * smax && svd.s[i] > 0.0)
        inv[i] = 1.0 / svd.s[i];
      else
        ++state.pinv_truncations;
    }
    // pseudoinverse-transpose U diag(1/s) V^T, shaped like the factor
    companions[m] = svd.u * inv.asDiagonal() * svd.v.transpose();
  }
  Matrix b = mttkrp(x, companions, mode);
  require_finite(b, state, mode, "amdm_update");
  return install_factor(state, mode, std::move(b));
}

Vector pseudo_spectrum(const Vector& s, Index t) {
  if (t < 0 || t > s.size())
    throw std::invalid_argument("pseudo_spectrum threshold out of range");
  const double smax = s.size() > 0 ? s[0] : 0.0;
  Vector out = s;
  for (Index i = 0; i < t; ++i) out[i] = s[i] > 1e-12 * smax && s[i] > 0.0 ? 1.0 / s[i] : 0.0;
  return out;
}

double general_amdm_update(SolverState& state, const DenseTensor& x, Index mode,
                           const std::vector<Index>& thresholds) {
  const Index rank = state.model.rank();
  if (static_cast<Index>(thresholds.size()) != state.model.order())
    throw std::invalid_argument("general_amdm_update expects one threshold per mode");

  std::vector<Matrix> lhs = state.model.factors;
  Matrix z = Matrix::Ones(rank, rank);
  for (Index m = 0; m < state.model.order(); ++m) {
    if (m == mode) continue;
    const ThinSVD& sp = state.spectra[m];
    const Vector sps = pseudo_spectrum(sp.s, thresholds[m]);
    lhs[m] = sp.u * sps.asDiagonal() * sp.v.transpose();
    const Matrix zm = sp.v * sps.cwiseProduct(sp.s).asDiagonal() * sp.v.transpose();
    z = z.cwiseProduct(zm);
  }
  Matrix rhs = mttkrp(x, lhs, mode);
  require_finite(rhs, state, mode, "general_amdm_update");
  require_finite(z, state, mode, "general_amdm_update");
  Matrix b = solve_gram_system(z, rhs);
  require_finite(b, state, mode, "general_amdm_update");
  return install_factor(state, mode, std::move(b));
}

std::vector<Index> evaluate_schedule(const ThresholdSchedule& sched, Index sweep,
                                     const std::vector<ThinSVD>& spectra, Index rank) {
  std::vector<Index> out(spectra.size(), 0);
  for (std::size_t n = 0; n < spectra.size(); ++n) {
    const Index cap = std::min<Index>(spectra[n].u.rows(), rank);
    Index t = 0;
    switch (sched.kind) {
      case ThresholdSchedule::Kind::fixed:
        t = sched.fixed_t;
        break;
      case ThresholdSchedule::Kind::decay:
        t = std::max<Index>(sched.decay_t0 - sweep / sched.decay_period, 0);
        break;
      case ThresholdSchedule::Kind::relative: {
        const Vector& s = spectra[n].s;
        const double smax = s.size() > 0 ? s[0] : 0.0;
        for (Index i = 0; i < s.size(); ++i)
          if (s[i] > 0.0 && smax / s[i] < sched.relative_tau) ++t;
        break;
      }
    }
    out[n] = std::clamp<Index>(t, 0, cap);
  }
  return out;
}

RunResult run(const DenseTensor& x, const SolverConfig& cfg,
              const std::optional<KruskalModel>& init) {
  SolverState state = make_initial_state(x, cfg, init);
  const Index n_modes = state.model.order();
  const double xnorm = x.norm();

  RunResult result;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  auto condition_or_nan = [&]() -> double {
    if (!cfg.trace_condition) return std::numeric_limits<double>::quiet_NaN();
    try {
      return condition_number(state.model);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  double prev_resid = residual_and_fitness(state.model, x).first;
  double best_resid = prev_resid;
  KruskalModel best_model = state.model;

  std::deque<double> recent_deltas;
  bool converged = false;

  for (Index sweep = 0; sweep < cfg.max_sweeps && !converged; ++sweep) {
    state.sweep = sweep;
    std::vector<Index> thresholds(n_modes, 0);
    if (cfg.algorithm == Algorithm::amdm) {
      for (Index n = 0; n < n_modes; ++n)
        thresholds[n] = std::min<Index>(x.dim(n), cfg.rank);
    } else if (cfg.algorithm == Algorithm::general) {
      thresholds = evaluate_schedule(cfg.schedule, sweep, state.spectra, cfg.rank);
    }

    double sweep_delta = 0.0;
    const Index reinits_before = state.column_reinits;
    try {
      for (Index n = 0; n < n_modes; ++n) {
        double delta = 0.0;
        switch (cfg.algorithm) {
          case Algorithm::als:
            delta = als_update(state, x, n);
            break;
          case Algorithm::amdm:
            delta = amdm_update(state, x, n, cfg.pinv_rel_tol);
            break;
          case Algorithm::general:
            delta = general_amdm_update(state, x, n, thresholds);
            break;
        }
        sweep_delta = std::max(sweep_delta, delta);
        recent_deltas.push_back(delta);
        if (static_cast<Index>(recent_deltas.size()) > n_modes) recent_deltas.pop_front();

        if (cfg.granularity == TraceGranularity::per_subsweep) {
          auto [r, f] = residual_and_fitness(state.model, x);
          result.trace.push_back({sweep, n + 1, r, f, condition_or_nan(), delta,
                                  thresholds[n], elapsed(),
                                  state.column_reinits > reinits_before});
        }

        // Algorithm-2-style mid-sweep break: a full cycle of small updates.
        if (static_cast<Index>(recent_deltas.size()) == n_modes) {
          bool all_small = true;
          for (double d : recent_deltas) all_small &= d < cfg.tol_change;
          if (all_small) {
            converged = true;
            break;
          }
        }
      }
    } catch (const NonFiniteError& e) {
      result.aborted = true;
      result.abort_reason = e.what();
      result.model = normalize_model(best_model);
      result.sweeps_run = sweep + 1;
      result.column_reinits = state.column_reinits;
      result.pinv_truncations = state.pinv_truncations;
      return result;
    }

    auto [r, f] = residual_and_fitness(state.model, x);
    if (cfg.granularity == TraceGranularity::per_sweep) {
      Index t_row = 0;
      for (Index n = 0; n < n_modes; ++n) t_row = std::max(t_row, thresholds[n]);
      result.trace.push_back({sweep, 0, r, f, condition_or_nan(), sweep_delta, t_row,
                              elapsed(), state.column_reinits > reinits_before});
    }

    if (r < best_resid) {
      best_resid = r;
      best_model = state.model;
    }
    if (xnorm > 0.0 && std::abs(prev_resid - r) / xnorm < cfg.tol_resid) converged = true;
    prev_resid = r;
    result.sweeps_run = sweep + 1;
  }

  result.converged = converged;
  result.model = state.model;
  result.column_reinits = state.column_reinits;
  result.pinv_truncations = state.pinv_truncations;
  return result;
}

}  // namespace cpdkit
