#include "cpdkit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <thread>

#include "cpdkit/conditioning.hpp"
#include "cpdkit/diagnostics.hpp"
#include "cpdkit/rng.hpp"

namespace cpdkit {

Index experiment_threads() {
  const char* env = std::getenv("CPDKIT_THREADS");
  if (!env) return 1;
  const long v = std::strtol(env, nullptr, 10);
  return v >= 1 ? static_cast<Index>(v) : 1;
}

void parallel_trials(Index n, Index threads, const std::function<void(Index)>& fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (Index t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (Index i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

namespace {

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

ExactRateResult exact_rate_experiment(Index order, Index mode_length, Index rank, Index trials,
                                      std::uint64_t seed, Index max_sweeps) {
  if (order < 2) throw std::invalid_argument("exact_rate_experiment needs order >= 2");
  ExactRateResult result;
  result.order = order;
  result.mode_length = mode_length;
  result.rank = rank;
  result.theoretical = theoretical_rate(order);
  result.trials.resize(trials);

  const std::vector<Index> dims(order, mode_length);

  parallel_trials(trials, experiment_threads(), [&](Index trial) {
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(trial));
    auto [x, truth] = random_cp(dims, rank, trial_seed);
    const double xnorm = x.norm();

    SolverConfig cfg;
    cfg.algorithm = Algorithm::amdm;
    cfg.rank = rank;
    cfg.seed = derive_seed(trial_seed, 1);
    cfg.max_sweeps = max_sweeps;

    SolverState state = make_initial_state(x, cfg);
    std::vector<double> factor_errors, rel_residuals;
    bool done = false;
    for (Index sweep = 0; sweep < max_sweeps && !done; ++sweep) {
      for (Index n = 0; n < order; ++n) {
        amdm_update(state, x, n);
        const RecoveryError err = factor_recovery_detail(state.model, truth);
        factor_errors.push_back(std::max(err.per_mode[n], 1e-300));
        const double r = residual_and_fitness(state.model, x).first / xnorm;
        rel_residuals.push_back(std::max(r, 1e-300));
        if (r < 1e-15) {
          done = true;
          break;
        }
      }
    }

    ExactRateTrial& t = result.trials[trial];
    t.seed = trial_seed;
    try {
      RateEstimate est = empirical_order(factor_errors);
      t.alpha_factor = est.alpha;
      t.window_factor = static_cast<Index>(est.window.size());
    } catch (const std::invalid_argument&) {
    }
    try {
      RateEstimate est = empirical_order(rel_residuals);
      t.alpha_residual = est.alpha;
      t.window_residual = static_cast<Index>(est.window.size());
    } catch (const std::invalid_argument&) {
    }
  });

  std::vector<double> af, ar;
  for (const auto& t : result.trials) {
    af.push_back(t.alpha_factor);
    ar.push_back(t.alpha_residual);
  }
  result.median_alpha_factor = median(af);
  result.median_alpha_residual = median(ar);
  return result;
}

LargeRankResult large_rank_experiment(Index mode_length, Index rank, Index sweeps,
                                      std::uint64_t seed) {
  const std::vector<Index> dims(3, mode_length);
  auto [x, truth] = random_cp(dims, rank, derive_seed(seed, 0));
  const double xnorm = x.norm();

  SolverConfig cfg;
  cfg.rank = rank;
  cfg.seed = derive_seed(seed, 1);
  cfg.max_sweeps = sweeps;
  cfg.tol_change = 0.0;  // run the full budget so the traces align
  cfg.tol_resid = 0.0;

  LargeRankResult out;
  cfg.algorithm = Algorithm::general;
  cfg.schedule = ThresholdSchedule::relative(100.0);
  for (const auto& rec : run(x, cfg).trace)
    if (rec.mode == 0) out.general_rel_residual.push_back(rec.residual / xnorm);

  cfg.algorithm = Algorithm::als;
  for (const auto& rec : run(x, cfg).trace)
    if (rec.mode == 0) out.als_rel_residual.push_back(rec.residual / xnorm);
  return out;
}

std::vector<PlantedProbabilityPoint> planted_probability_experiment(
    Index mode_length, Index rank_exact, Index rank_solve, Index tensors, Index guesses,
    double init_eps, const std::vector<double>& eps_perp_values, std::uint64_t seed,
    Index max_sweeps) {
  if (rank_solve * 2 != rank_exact)
    throw std::invalid_argument(
        "planted_probability_experiment expects rank_solve = rank_exact / 2");
  const std::vector<Index> dims(3, mode_length);

  std::vector<PlantedProbabilityPoint> points;
  for (double eps_perp : eps_perp_values) {
    std::vector<int> converged(tensors, 0);
    parallel_trials(tensors, experiment_threads(), [&](Index trial) {
      const std::uint64_t tensor_seed =
          derive_seed(seed, static_cast<std::uint64_t>(trial) * 131 + 7);
      auto [x, planted] = planted_orthogonal_cp(dims, rank_exact, eps_perp, tensor_seed);

      for (Index g = 0; g < guesses && !converged[trial]; ++g) {
        KruskalModel init =
            perturb_model(planted, init_eps, derive_seed(tensor_seed, 1000 + g));
        SolverConfig cfg;
        cfg.algorithm = Algorithm::amdm;
        cfg.rank = rank_solve;
        cfg.max_sweeps = max_sweeps;
        cfg.tol_change = 1e-14;
        cfg.seed = derive_seed(tensor_seed, 2000 + g);
        RunResult res = run(x, cfg, init);
        if (factor_recovery_error(res.model, planted) < 1e-9) converged[trial] = 1;
      }
    });
    PlantedProbabilityPoint p;
    p.eps_perp = eps_perp;
    p.tensors = tensors;
    p.guesses = guesses;
    Index hits = 0;
    for (int c : converged) hits += c;
    p.probability = static_cast<double>(hits) / static_cast<double>(tensors);
    points.push_back(p);
  }
  return points;
}

NoisyCollinearResult noisy_collinear_experiment(Index mode_length, Index rank,
                                                double collinearity, double noise_sigma,
                                                Index sweeps, std::uint64_t seed,
                                                bool trace_condition) {
  const std::vector<Index> dims(3, mode_length);
  auto [clean, truth] = collinear_cp(dims, rank, collinearity, derive_seed(seed, 0));
  DenseTensor x = add_gaussian_noise(clean, noise_sigma, derive_seed(seed, 1));

  SolverConfig base;
  base.rank = rank;
  base.seed = derive_seed(seed, 2);
  base.max_sweeps = sweeps;
  base.tol_change = 0.0;
  base.tol_resid = 0.0;
  base.trace_condition = trace_condition;

  NoisyCollinearResult out;
  auto push = [&](const std::string& label, Algorithm alg, ThresholdSchedule sched) {
    SolverConfig cfg = base;
    cfg.algorithm = alg;
    cfg.schedule = sched;
    NoisyCollinearRun r;
    r.label = label;
    r.result = run(x, cfg);
    auto [resid, fit] = residual_and_fitness(r.result.model, x);
    r.final_fitness = fit;
    try {
      r.final_condition = condition_number(normalize_model(r.result.model));
    } catch (const std::exception&) {
    }
    out.runs.push_back(std::move(r));
  };

  push("als", Algorithm::als, ThresholdSchedule::fixed(0));
  push("amdm", Algorithm::amdm, ThresholdSchedule::fixed(0));
  push("hybrid", Algorithm::general, ThresholdSchedule::decay(rank, 10));
  return out;
}

}  // namespace cpdkit
