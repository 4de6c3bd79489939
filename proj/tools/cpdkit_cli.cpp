#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cpdkit/conditioning.hpp"
#include "cpdkit/diagnostics.hpp"
#include "cpdkit/experiments.hpp"
#include "cpdkit/generators.hpp"
#include "cpdkit/io.hpp"
#include "cpdkit/rng.hpp"
#include "cpdkit/solver.hpp"

namespace {

using namespace cpdkit;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<Index> parse_dims(const std::string& text) {
  std::vector<Index> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    dims.push_back(std::stol(item));
  }
  if (dims.empty()) throw CLI::ValidationError("--dims", "expected a comma-separated list");
  for (Index d : dims)
    if (d < 1) throw CLI::ValidationError("--dims", "mode lengths must be >= 1");
  return dims;
}

ThresholdSchedule parse_schedule(const std::string& text) {
  std::stringstream ss(text);
  std::string kind;
  std::getline(ss, kind, ':');
  std::vector<std::string> args;
  std::string a;
  while (std::getline(ss, a, ':')) args.push_back(a);
  if (kind == "fixed" && args.size() == 1) return ThresholdSchedule::fixed(std::stol(args[0]));
  if (kind == "decay" && args.size() == 2)
    return ThresholdSchedule::decay(std::stol(args[0]), std::stol(args[1]));
  if (kind == "reltol" && args.size() == 1)
    return ThresholdSchedule::relative(std::stod(args[0]));
  throw CLI::ValidationError("--schedule", "expected fixed:T, decay:T0:K, or reltol:TAU");
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

int run_generate(const std::string& family, const std::string& dims_spec, Index rank,
                 double collinearity, double eps_perp, double noise, std::uint64_t seed,
                 const std::string& out_prefix) {
  const std::vector<Index> dims = parse_dims(dims_spec);
  DenseTensor x({1});
  KruskalModel model;
  if (family == "random") {
    std::tie(x, model) = random_cp(dims, rank, seed);
  } else if (family == "collinear") {
    std::tie(x, model) = collinear_cp(dims, rank, collinearity, seed);
  } else if (family == "planted") {
    std::tie(x, model) = planted_orthogonal_cp(dims, rank, eps_perp, seed);
  } else {
    throw CLI::ValidationError("--family", "expected random, collinear, or planted");
  }
  if (noise > 0.0) x = add_gaussian_noise(x, noise, derive_seed(seed, 0xA01));
  write_tensor(out_prefix + ".tnsr", x);
  write_model(out_prefix, model);

  std::cout << "family " << family << "\n";
  std::cout << "dims";
  for (Index d : dims) std::cout << ' ' << d;
  std::cout << "\nrank " << rank << "\n";
  if (family == "collinear") std::cout << "collinearity " << fmt(collinearity) << "\n";
  if (family == "planted") {
    std::cout << "eps_perp " << fmt(eps_perp) << "\n";
    std::cout << "model_rank " << model.rank() << "\n";
  }
  if (noise > 0.0) std::cout << "noise " << fmt(noise) << "\n";
  std::cout << "seed " << seed << "\n";
  std::cout << "wrote " << out_prefix << ".tnsr and model files\n";
  return 0;
}

int run_decompose(const std::string& input, const std::string& alg_name, Index rank,
                  Index max_sweeps, double tol, double tol_resid, const std::string& schedule,
                  double pinv_tol, std::uint64_t seed, const std::string& init_prefix,
                  const std::string& out_prefix, std::string trace_path,
                  const std::string& granularity, bool with_cond) {
  DenseTensor x = read_tensor(input);

  SolverConfig cfg;
  if (alg_name == "als")
    cfg.algorithm = Algorithm::als;
  else if (alg_name == "amdm")
    cfg.algorithm = Algorithm::amdm;
  else if (alg_name == "hybrid" || alg_name == "general")
    cfg.algorithm = Algorithm::general;
  else
    throw CLI::ValidationError("--alg", "expected als, amdm, or hybrid");
  cfg.rank = rank;
  cfg.max_sweeps = max_sweeps;
  cfg.tol_change = tol;
  cfg.tol_resid = tol_resid;
  cfg.pinv_rel_tol = pinv_tol;
  cfg.seed = seed;
  cfg.trace_condition = with_cond;
  cfg.granularity = granularity == "subsweep" ? TraceGranularity::per_subsweep
                                              : TraceGranularity::per_sweep;
  if (!schedule.empty()) cfg.schedule = parse_schedule(schedule);
  else if (cfg.algorithm == Algorithm::general)
    cfg.schedule = ThresholdSchedule::decay(rank, 10);

  std::optional<KruskalModel> init;
  if (!init_prefix.empty()) init = read_model(init_prefix);

  RunResult res = run(x, cfg, init);
  write_model(out_prefix, res.model);

  if (trace_path.empty()) trace_path = out_prefix + ".trace.csv";
  std::vector<std::string> comments = {
      "cpdkit decompose",
      "input = " + input,
      "alg = " + alg_name,
      "rank = " + std::to_string(rank),
      "max_sweeps = " + std::to_string(max_sweeps),
      "tol = " + fmt(tol),
      "tol_resid = " + fmt(tol_resid),
      "seed = " + std::to_string(seed),
  };
  if (!schedule.empty()) comments.push_back("schedule = " + schedule);
  write_trace_csv(trace_path, res.trace, comments);

  auto [r, f] = residual_and_fitness(res.model, x);
  std::cout << "sweeps " << res.sweeps_run << "\n";
  std::cout << "residual " << fmt(r) << "\n";
  std::cout << "fitness " << fmt(f) << "\n";
  std::cout << "converged " << (res.converged ? "yes" : "no") << "\n";
  if (res.aborted) std::cout << "aborted " << res.abort_reason << "\n";
  return res.converged ? 0 : 2;
}

int run_condition(const std::string& model_prefix, const std::string& method) {
  KruskalModel m = normalize_model(read_model(model_prefix));
  double kappa = 0.0;
  if (method == "direct")
    kappa = condition_number_direct(m);
  else if (method == "compressed")
    kappa = condition_number_compressed(m);
  else
    kappa = condition_number(m);
  std::cout << fmt(kappa) << "\n";
  return 0;
}

int run_rate(const std::string& trace_path, Index order_hint) {
  auto trace = read_trace_csv(trace_path);
  std::vector<double> rel_residuals;
  for (const auto& r : trace)
    if (r.mode != 0) rel_residuals.push_back(std::max(1.0 - r.fitness, 1e-300));
  if (rel_residuals.empty())
    for (const auto& r : trace) rel_residuals.push_back(std::max(1.0 - r.fitness, 1e-300));
  RateEstimate est = empirical_order(rel_residuals);
  std::cout << "alpha " << fmt(est.alpha) << "\n";
  std::cout << "window " << est.window.size() << "\n";
  std::cout << "fit_residual " << fmt(est.fit_residual) << "\n";
  if (order_hint >= 2)
    std::cout << "theoretical " << fmt(theoretical_rate(order_hint)) << "\n";
  return 0;
}

int run_experiment(const std::string& recipe, const std::string& dims_spec, Index order,
                   Index rank, Index rank_exact, Index trials, Index guesses, Index sweeps,
                   double collinearity, double noise, double eps, const std::string& eps_perp,
                   std::uint64_t seed, std::string out_path, const std::string& input,
                   const std::string& alg) {
  if (out_path.empty()) out_path = recipe + ".csv";

  if (recipe == "exact-rate") {
    Index s = dims_spec.empty() ? (order == 3 ? 30 : 12) : parse_dims(dims_spec)[0];
    Index r = rank > 0 ? rank : (order == 3 ? 8 : 5);
    Index n_trials = trials > 0 ? trials : 5;
    ExactRateResult res =
        exact_rate_experiment(order, s, r, n_trials, seed, sweeps > 0 ? sweeps : 25);
    auto out = open_csv(out_path);
    out << "# cpdkit experiment exact-rate (desk-scale defaults; full-scale study: s^N = 100^3)\n";
    out << "# order = " << order << ", dims = " << s << ", rank = " << r
        << ", trials = " << n_trials << ", seed = " << seed << "\n";
    out << "trial,seed,alpha_factor,alpha_residual,window_factor,window_residual\n";
    for (std::size_t i = 0; i < res.trials.size(); ++i) {
      const auto& t = res.trials[i];
      out << i << ',' << t.seed << ',' << fmt(t.alpha_factor) << ',' << fmt(t.alpha_residual)
          << ',' << t.window_factor << ',' << t.window_residual << "\n";
    }
    std::cout << "alpha_hat " << fmt(res.median_alpha_factor) << "\n";
    std::cout << "alpha_hat_residual " << fmt(res.median_alpha_residual) << "\n";
    std::cout << "theoretical " << fmt(res.theoretical) << "\n";
    return 0;
  }

  if (recipe == "large-rank") {
    Index s = dims_spec.empty() ? 40 : parse_dims(dims_spec)[0];
    Index r = rank > 0 ? rank : 80;
    Index n_sweeps = sweeps > 0 ? sweeps : 40;
    LargeRankResult res = large_rank_experiment(s, r, n_sweeps, seed);
    auto out = open_csv(out_path);
    out << "# cpdkit experiment large-rank (desk-scale defaults; full-scale study: s = 100, R = 200)\n";
    out << "# dims = " << s << ", rank = " << r << ", sweeps = " << n_sweeps
        << ", seed = " << seed << "\n";
    out << "sweep,rel_residual_general,rel_residual_als\n";
    for (std::size_t i = 0; i < res.general_rel_residual.size(); ++i) {
      out << i << ',' << fmt(res.general_rel_residual[i]) << ','
          << fmt(i < res.als_rel_residual.size() ? res.als_rel_residual[i]
                                                 : res.als_rel_residual.back())
          << "\n";
    }
    std::cout << "final_general " << fmt(res.general_rel_residual.back()) << "\n";
    std::cout << "final_als " << fmt(res.als_rel_residual.back()) << "\n";
    return 0;
  }

  if (recipe == "planted-probability") {
    Index s = dims_spec.empty() ? 10 : parse_dims(dims_spec)[0];
    Index re = rank_exact > 0 ? rank_exact : 10;
    Index r = rank > 0 ? rank : re / 2;
    Index n_tensors = trials > 0 ? trials : 20;
    Index n_guesses = guesses > 0 ? guesses : 5;
    std::vector<double> eps_values;
    {
      std::stringstream ss(eps_perp.empty() ? "1e-6" : eps_perp);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) eps_values.push_back(std::stod(item));
    }
    auto points = planted_probability_experiment(s, re, r, n_tensors, n_guesses, eps,
                                                 eps_values, seed,
                                                 sweeps > 0 ? sweeps : 80);
    auto out = open_csv(out_path);
    out << "# cpdkit experiment planted-probability (desk-scale defaults; full-scale study: 100 tensors)\n";
    out << "# dims = " << s << ", rank_exact = " << re << ", rank = " << r
        << ", tensors = " << n_tensors << ", guesses = " << n_guesses << ", eps = " << fmt(eps)
        << ", seed = " << seed << "\n";
    out << "eps_perp,probability,tensors,guesses\n";
    for (const auto& p : points) {
      out << fmt(p.eps_perp) << ',' << fmt(p.probability) << ',' << p.tensors << ','
          << p.guesses << "\n";
      std::cout << "eps_perp " << fmt(p.eps_perp) << " probability " << fmt(p.probability)
                << "\n";
    }
    return 0;
  }

  if (recipe == "noisy-collinear") {
    Index s = dims_spec.empty() ? 40 : parse_dims(dims_spec)[0];
    Index r = rank > 0 ? rank : 10;
    Index n_sweeps = sweeps > 0 ? sweeps : 200;
    NoisyCollinearResult res =
        noisy_collinear_experiment(s, r, collinearity, noise, n_sweeps, seed);
    auto out = open_csv(out_path);
    out << "# cpdkit experiment noisy-collinear (desk-scale defaults; full-scale study: 100^3)\n";
    out << "# dims = " << s << ", rank = " << r << ", collinearity = " << fmt(collinearity)
        << ", noise = " << fmt(noise) << ", sweeps = " << n_sweeps << ", seed = " << seed
        << "\n";
    out << "sweep,f_als,cond_als,f_amdm,cond_amdm,f_hybrid,cond_hybrid\n";
    const auto& traces = res.runs;
    std::size_t rows = 0;
    for (const auto& run : traces) rows = std::max(rows, run.result.trace.size());
    for (std::size_t i = 0; i < rows; ++i) {
      out << i;
      for (const auto& run : traces) {
        if (i < run.result.trace.size()) {
          out << ',' << fmt(run.result.trace[i].fitness);
          const double c = run.result.trace[i].cond;
          out << ',' << (std::isfinite(c) ? fmt(c) : std::string(std::isinf(c) ? "inf" : ""));
        } else {
          out << ",,";
        }
      }
      out << "\n";
    }
    for (const auto& run : traces)
      std::cout << run.label << " fitness " << fmt(run.final_fitness) << " cond "
                << fmt(run.final_condition) << "\n";
    return 0;
  }

  if (recipe == "condition-trace") {
    DenseTensor x({1});
    if (!input.empty()) {
      x = read_tensor(input);
    } else {
      Index s = dims_spec.empty() ? 20 : parse_dims(dims_spec)[0];
      Index r = rank > 0 ? rank : 5;
      auto [clean, truth] =
          collinear_cp(std::vector<Index>(3, s), r, collinearity, derive_seed(seed, 0));
      x = noise > 0.0 ? add_gaussian_noise(clean, noise, derive_seed(seed, 1)) : clean;
    }
    SolverConfig cfg;
    cfg.algorithm = alg == "als"    ? Algorithm::als
                    : alg == "amdm" ? Algorithm::amdm
                                    : Algorithm::general;
    cfg.rank = rank > 0 ? rank : 5;
    if (cfg.algorithm == Algorithm::general)
      cfg.schedule = ThresholdSchedule::decay(cfg.rank, 10);
    cfg.max_sweeps = sweeps > 0 ? sweeps : 50;
    cfg.seed = seed;
    cfg.trace_condition = true;
    cfg.tol_change = 0.0;
    cfg.tol_resid = 0.0;
    RunResult res = run(x, cfg);
    write_trace_csv(out_path, res.trace,
                    {"cpdkit experiment condition-trace", "alg = " + alg,
                     "rank = " + std::to_string(cfg.rank), "seed = " + std::to_string(seed)});
    std::cout << "rows " << res.trace.size() << "\n";
    return 0;
  }

  throw CLI::ValidationError("recipe", "unknown recipe " + recipe);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CP decomposition toolkit: ALS, AMDM, and General-AMDM solvers"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read flag defaults from a config file ([subcommand] sections, key = value)");

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic tensor and its model files");
  std::string g_family, g_dims = "30,30,30", g_out = "tensor";
  Index g_rank = 10;
  double g_coll = 0.9, g_eps_perp = 0.0, g_noise = 0.0;
  std::uint64_t g_seed = 0;
  gen->add_option("--family", g_family, "random | collinear | planted")->required();
  gen->add_option("--dims", g_dims, "Comma-separated mode lengths");
  gen->add_option("--rank", g_rank, "CP rank (full rank for planted)");
  gen->add_option("--collinearity", g_coll, "Column collinearity C in [0,1)");
  gen->add_option("--eps-perp", g_eps_perp, "Planted-family orthogonality noise");
  gen->add_option("--noise", g_noise, "Gaussian noise sigma added to the tensor");
  gen->add_option("--seed", g_seed, "RNG seed");
  gen->add_option("--out", g_out, "Output file prefix");

  // decompose
  auto* dec = app.add_subcommand("decompose", "Run a solver on a tensor file");
  std::string d_input, d_alg = "amdm", d_schedule, d_init, d_out = "model", d_trace,
              d_gran = "sweep";
  Index d_rank = 10, d_sweeps = 100;
  double d_tol = 1e-10, d_tol_resid = 1e-12, d_pinv = 1e-12;
  std::uint64_t d_seed = 0;
  bool d_cond = false;
  dec->add_option("--input", d_input, "Tensor file (TNSR format)")->required();
  dec->add_option("--alg", d_alg, "als | amdm | hybrid");
  dec->add_option("--rank", d_rank, "CP rank");
  dec->add_option("--max-sweeps", d_sweeps, "Sweep budget");
  dec->add_option("--tol", d_tol, "Factor-change convergence tolerance");
  dec->add_option("--tol-resid", d_tol_resid, "Residual-change convergence tolerance");
  dec->add_option("--schedule", d_schedule, "fixed:T | decay:T0:K | reltol:TAU");
  dec->add_option("--pinv-tol", d_pinv, "Pseudoinverse truncation tolerance");
  dec->add_option("--seed", d_seed, "RNG seed");
  dec->add_option("--init", d_init, "Initial model file prefix");
  dec->add_option("--out", d_out, "Output model prefix");
  dec->add_option("--trace", d_trace, "Trace CSV path");
  dec->add_option("--granularity", d_gran, "sweep | subsweep");
  dec->add_flag("--cond", d_cond, "Record the CPD condition number per trace row");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a canned experiment recipe");
  std::string e_recipe, e_dims, e_eps_perp, e_out, e_input, e_alg = "hybrid";
  Index e_order = 3, e_rank = 0, e_rank_exact = 0, e_trials = 0, e_guesses = 0, e_sweeps = 0;
  double e_coll = 0.9, e_noise = 1e-3, e_eps = 1e-3;
  std::uint64_t e_seed = 0;
  exp->add_option("recipe", e_recipe,
                  "exact-rate | large-rank | planted-probability | noisy-collinear | "
                  "condition-trace")
      ->required();
  exp->add_option("--dims", e_dims, "Mode length (equidimensional)");
  exp->add_option("--order", e_order, "Tensor order (exact-rate)");
  exp->add_option("--rank", e_rank, "Solve rank");
  exp->add_option("--rank-exact", e_rank_exact, "Exact rank of the planted tensor");
  exp->add_option("--trials", e_trials, "Trials / tensors");
  exp->add_option("--guesses", e_guesses, "Initial guesses per tensor");
  exp->add_option("--sweeps", e_sweeps, "Sweep budget");
  exp->add_option("--collinearity", e_coll, "Collinearity C");
  exp->add_option("--noise", e_noise, "Gaussian noise sigma");
  exp->add_option("--eps", e_eps, "Initial-guess perturbation");
  exp->add_option("--eps-perp", e_eps_perp, "Comma-separated eps_perp values");
  exp->add_option("--seed", e_seed, "RNG seed");
  exp->add_option("--out", e_out, "Summary CSV path");
  exp->add_option("--input", e_input, "Tensor file (condition-trace)");
  exp->add_option("--alg", e_alg, "Solver for condition-trace");

  // condition
  auto* cond = app.add_subcommand("condition", "Print the CPD condition number of a model");
  std::string c_model, c_method = "auto";
  cond->add_option("--model", c_model, "Model file prefix")->required();
  cond->add_option("--method", c_method, "auto | direct | compressed");

  // rate
  auto* rate = app.add_subcommand("rate", "Estimate the convergence order from a trace CSV");
  std::string r_trace;
  Index r_order = 0;
  rate->add_option("--trace", r_trace, "Trace CSV path")->required();
  rate->add_option("--order", r_order, "Tensor order for the theoretical rate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen)
      return run_generate(g_family, g_dims, g_rank, g_coll, g_eps_perp, g_noise, g_seed, g_out);
    if (*dec)
      return run_decompose(d_input, d_alg, d_rank, d_sweeps, d_tol, d_tol_resid, d_schedule,
                           d_pinv, d_seed, d_init, d_out, d_trace, d_gran, d_cond);
    if (*exp)
      return run_experiment(e_recipe, e_dims, e_order, e_rank, e_rank_exact, e_trials,
                            e_guesses, e_sweeps, e_coll, e_noise, e_eps, e_eps_perp, e_seed,
                            e_out, e_input, e_alg);
    if (*cond) return run_condition(c_model, c_method);
    if (*rate) return run_rate(r_trace, r_order);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
