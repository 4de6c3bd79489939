#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpdkit/kruskal.hpp"
#include "cpdkit/linalg.hpp"
#include "cpdkit/tensor.hpp"

namespace cpdkit {

enum class Algorithm { als, amdm, general };

/// Per-factor singular-value threshold schedule for General-AMDM.
/// fixed keeps t constant; decay lowers t0 by one every `period` sweeps down
/// to 0; relative counts the singular values within a factor of `tau` of the
/// largest. Every variant is clamped per mode to [0, min(I_n, R)].
struct ThresholdSchedule {
  enum class Kind { fixed, decay, relative };
  Kind kind = Kind::fixed;
  Index fixed_t = 0;
  Index decay_t0 = 0;
  Index decay_period = 1;
  double relative_tau = 100.0;

  static ThresholdSchedule fixed(Index t);
  static ThresholdSchedule decay(Index t0, Index period);
  static ThresholdSchedule relative(double tau);
};

enum class TraceGranularity { per_sweep, per_subsweep };

struct SolverConfig {
  Algorithm algorithm = Algorithm::amdm;
  Index rank = 1;
  Index max_sweeps = 100;
  double tol_change = 1e-10;   // max relative factor change per sweep
  double tol_resid = 1e-12;    // relative residual change between sweeps
  ThresholdSchedule schedule;  // used by Algorithm::general
  double pinv_rel_tol = 1e-12;
  std::uint64_t seed = 0;
  TraceGranularity granularity = TraceGranularity::per_sweep;
  bool trace_condition = false;  // record the CPD condition number per row

  void validate() const;
};

/// One diagnostics row; `mode` is 1-based for subsweep rows and 0 for
/// per-sweep rows. `cond` is NaN when not computed.
struct TraceRecord {
  Index sweep = 0;
  Index mode = 0;
  double residual = 0.0;
  double fitness = 0.0;
  double cond = std::numeric_limits<double>::quiet_NaN();
  double delta = 0.0;
  Index threshold = 0;
  double seconds = 0.0;
  bool column_reinit = false;  // a collapsed column was re-randomized
};

/// Mutable state threaded through the subsweep updates: the normalized model,
/// per-factor thin SVDs, and bookkeeping counters.
struct SolverState {
  KruskalModel model;
  std::vector<ThinSVD> spectra;
  Index sweep = 0;
  Index column_reinits = 0;
  Index pinv_truncations = 0;
  std::uint64_t reinit_seed = 0;

  void refresh_spectrum(Index mode);
};

struct RunResult {
  KruskalModel model;
  std::vector<TraceRecord> trace;
  bool converged = false;
  bool aborted = false;
  std::string abort_reason;
  Index sweeps_run = 0;
  Index column_reinits = 0;
  Index pinv_truncations = 0;
};

/// Initial state: uniform(0,1) factors from the seed when no init is given,
/// then normalized with explicit weights.
SolverState make_initial_state(const DenseTensor& x, const SolverConfig& cfg,
                               const std::optional<KruskalModel>& init = std::nullopt);

/// ALS subsweep: solve A^(n) Gamma = MTTKRP via the Gram normal equations,
/// then renormalize the factor and absorb the column norms into lambda.
/// Returns the relative factor change.
double als_update(SolverState& state, const DenseTensor& x, Index mode);

/// AMDM subsweep (basic update): A^(n) = X_(n) applied to the
/// pseudoinverse-transposes of the other factors.
double amdm_update(SolverState& state, const DenseTensor& x, Index mode,
                   double pinv_rel_tol = 1e-12);

/// First t singular values inverted (values below 1e-12 * s_max map to zero),
/// the rest passed through.
Vector pseudo_spectrum(const Vector& s, Index t);

/// General-AMDM subsweep: per companion mode m builds
/// L_m = U diag(s_ps) V^T and Z_m = V diag(s_ps * s) V^T, then solves
/// A^(n) (hadamard of Z_m) = mttkrp(X, {L_m}, n).
double general_amdm_update(SolverState& state, const DenseTensor& x, Index mode,
                           const std::vector<Index>& thresholds);

/// Schedule evaluation at a (0-based) sweep index; one threshold per mode,
/// clamped to [0, min(I_n, R)].
std::vector<Index> evaluate_schedule(const ThresholdSchedule& sched, Index sweep,
                                     const std::vector<ThinSVD>& spectra, Index rank);

/// Full solver driver: sweeps modes 0..N-1 with the configured update,
/// evaluating the schedule once per sweep and stopping on max_sweeps, factor
/// change below tol_change, or relative residual change below tol_resid.
RunResult run(const DenseTensor& x, const SolverConfig& cfg,
              const std::optional<KruskalModel>& init = std::nullopt);

}  // namespace cpdkit
