#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cpdkit/generators.hpp"
#include "cpdkit/solver.hpp"

namespace cpdkit {

/// Trial concurrency cap from CPDKIT_THREADS (default 1).
Index experiment_threads();

/// Runs fn(trial) for trial in [0, n) on up to `threads` workers; results are
/// expected to land in preallocated per-trial slots so ordering stays
/// deterministic.
void parallel_trials(Index n, Index threads, const std::function<void(Index)>& fn);

struct ExactRateTrial {
  std::uint64_t seed = 0;
  double alpha_factor = std::numeric_limits<double>::quiet_NaN();
  double alpha_residual = std::numeric_limits<double>::quiet_NaN();
  Index window_factor = 0;
  Index window_residual = 0;
};

struct ExactRateResult {
  Index order = 0;
  Index mode_length = 0;
  Index rank = 0;
  double theoretical = 0.0;
  std::vector<ExactRateTrial> trials;
  double median_alpha_factor = std::numeric_limits<double>::quiet_NaN();
  double median_alpha_residual = std::numeric_limits<double>::quiet_NaN();
};

/// AMDM subiteration convergence order on exact-rank random tensors: records
/// the updated factor's recovery error and the relative residual after every
/// subsweep, then fits the order on each trial and takes the median.
ExactRateResult exact_rate_experiment(Index order, Index mode_length, Index rank, Index trials,
                                      std::uint64_t seed, Index max_sweeps = 25);

struct LargeRankResult {
  std::vector<double> general_rel_residual;  // per sweep
  std::vector<double> als_rel_residual;
};

/// Exact CP rank above the mode lengths: General-AMDM with the relative
/// threshold schedule against ALS from the same initialization.
LargeRankResult large_rank_experiment(Index mode_length, Index rank, Index sweeps,
                                      std::uint64_t seed);

struct PlantedProbabilityPoint {
  double eps_perp = 0.0;
  double probability = 0.0;
  Index tensors = 0;
  Index guesses = 0;
};

/// Probability (over tensors) that at least one of `guesses` perturbed starts
/// recovers the planted half to within 1e-9, per eps_perp value.
std::vector<PlantedProbabilityPoint> planted_probability_experiment(
    Index mode_length, Index rank_exact, Index rank_solve, Index tensors, Index guesses,
    double init_eps, const std::vector<double>& eps_perp_values, std::uint64_t seed,
    Index max_sweeps = 80);

struct NoisyCollinearRun {
  std::string label;
  RunResult result;
  double final_fitness = 0.0;
  double final_condition = std::numeric_limits<double>::quiet_NaN();
};

struct NoisyCollinearResult {
  std::vector<NoisyCollinearRun> runs;  // als, amdm, hybrid
};

/// Collinear tensor plus Gaussian noise solved by ALS, AMDM, and the decaying
/// hybrid from the same initialization; per-sweep fitness and condition
/// numbers are kept in each run's trace.
NoisyCollinearResult noisy_collinear_experiment(Index mode_length, Index rank,
                                                double collinearity, double noise_sigma,
                                                Index sweeps, std::uint64_t seed,
                                                bool trace_condition = true);

}  // namespace cpdkit
