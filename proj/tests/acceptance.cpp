// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cpdkit/conditioning.hpp"
#include "cpdkit/diagnostics.hpp"
#include "cpdkit/experiments.hpp"
#include "cpdkit/generators.hpp"
#include "cpdkit/io.hpp"
#include "cpdkit/rng.hpp"
#include "cpdkit/solver.hpp"

using namespace cpdkit;

namespace {

int failures = 0;

void report(int criterion, const std::string& what, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double min_rel_residual(const RunResult& res, double xnorm) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rec : res.trace)
    if (rec.mode == 0) best = std::min(best, rec.residual / xnorm);
  return best;
}

// --- criterion 1: exact-rank superlinear convergence ------------------------
void criterion_1() {
  const std::vector<Index> dims = {30, 30, 30};
  const Index rank = 10;
  int amdm_hits = 0, als_hits = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    auto [x_rand, truth_rand] = random_cp(dims, rank, derive_seed(101, s));
    auto [x_coll, truth_coll] = collinear_cp(dims, rank, 0.9, derive_seed(101, s));

    SolverConfig cfg;
    cfg.rank = rank;
    cfg.max_sweeps = 10;
    cfg.seed = derive_seed(757, s);
    cfg.tol_change = 0.0;
    cfg.tol_resid = 0.0;

    cfg.algorithm = Algorithm::amdm;
    if (min_rel_residual(run(x_rand, cfg), x_rand.norm()) < 1e-10) ++amdm_hits;

    cfg.algorithm = Algorithm::als;
    if (min_rel_residual(run(x_coll, cfg), x_coll.norm()) < 1e-10) ++als_hits;
  }
  const bool pass = amdm_hits >= 4 && als_hits == 0;
  report(1, "exact-rank superlinear convergence (30^3, R=10)", pass,
         "amdm < 1e-10 on " + std::to_string(amdm_hits) + "/5 seeds in <= 10 sweeps; als on "
             "collinear C=0.9 on " +
             std::to_string(als_hits) + "/5");
}

// --- criterion 2: convergence order ------------------------------------------
void criterion_2() {
  ExactRateResult r3 = exact_rate_experiment(3, 30, 8, 33, 2024);
  ExactRateResult r4 = exact_rate_experiment(4, 12, 5, 33, 2024);
  const double err3 = std::abs(r3.median_alpha_factor - r3.theoretical) / r3.theoretical;
  const double err4 = std::abs(r4.median_alpha_factor - r4.theoretical) / r4.theoretical;
  const bool pass = err3 < 0.05 && err4 < 0.08;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "N=3 alpha=%.4f (err %.2f%%, tol 5%%); N=4 alpha=%.4f (err %.2f%%, tol 8%%)",
                r3.median_alpha_factor, 100 * err3, r4.median_alpha_factor, 100 * err4);
  report(2, "AMDM subiteration convergence order", pass, detail);
}

// --- criterion 3: rank exceeding dimension -----------------------------------
void criterion_3() {
  LargeRankResult res = large_rank_experiment(40, 80, 40, 33);
  double best_general = std::numeric_limits<double>::infinity();
  for (double r : res.general_rel_residual) best_general = std::min(best_general, r);
  const double final_als = res.als_rel_residual.back();
  const bool pass = best_general < 1e-8 && final_als > 1e-3;
  char detail[120];
  std::snprintf(detail, sizeof(detail), "general best %.2e (< 1e-8); als final %.2e (> 1e-3)",
                best_general, final_als);
  report(3, "rank above dimension (40^3, R=80, relative schedule)", pass, detail);
}

// --- criterion 4: oracle equivalences ----------------------------------------
void criterion_4() {
  double worst_t0 = 0.0, worst_tr = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<Index> dims = {6, 7, 5};
    const Index rank = 4;
    auto [x, truth] = random_cp(dims, rank + 1, derive_seed(404, trial));

    SolverConfig cfg;
    cfg.rank = rank;
    cfg.seed = derive_seed(405, trial);
    SolverState s_ref = make_initial_state(x, cfg);
    SolverState s_gen = s_ref;
    for (Index n = 0; n < 3; ++n) {
      als_update(s_ref, x, n);
      general_amdm_update(s_gen, x, n, {0, 0, 0});
      worst_t0 = std::max(worst_t0,
                          (s_ref.model.factors[n] - s_gen.model.factors[n]).cwiseAbs().maxCoeff());
      worst_t0 = std::max(worst_t0, (s_ref.model.lambda - s_gen.model.lambda).cwiseAbs().maxCoeff());
    }

    SolverState a_ref = make_initial_state(x, cfg);
    SolverState a_gen = a_ref;
    for (Index n = 0; n < 3; ++n) {
      amdm_update(a_ref, x, n);
      general_amdm_update(a_gen, x, n, {rank, rank, rank});
      worst_tr = std::max(worst_tr,
                          (a_ref.model.factors[n] - a_gen.model.factors[n]).cwiseAbs().maxCoeff());
      worst_tr = std::max(worst_tr, (a_ref.model.lambda - a_gen.model.lambda).cwiseAbs().maxCoeff());
    }
  }
  const bool pass = worst_t0 < 1e-12 && worst_tr < 1e-12;
  char detail[120];
  std::snprintf(detail, sizeof(detail), "max |general(t=0) - als| = %.2e; max |general(t=R) - amdm| = %.2e",
                worst_t0, worst_tr);
  report(4, "general-AMDM t=0 / t=R oracle equivalences over 20 states", pass, detail);
}

// --- criterion 5: condition-number oracle ------------------------------------
void criterion_5() {
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const bool n3 = trial < 10;
    auto [x, model] = random_cp(n3 ? std::vector<Index>{8, 8, 8} : std::vector<Index>{5, 5, 5, 5},
                                n3 ? 3 : 2, derive_seed(505, trial));
    const double kd = condition_number_direct(model);
    const double kc = condition_number_compressed(model);
    worst = std::max(worst, std::abs(kc - kd) / kd);
  }
  const bool pass = worst < 1e-10;
  char detail[80];
  std::snprintf(detail, sizeof(detail), "max relative gap %.2e (tol 1e-10)", worst);
  report(5, "compressed vs direct condition number on 20 models", pass, detail);
}

// --- criterion 6: Lemma-4.1-style contraction slope ---------------------------
void criterion_6() {
  bool pass = true;
  std::string detail;
  for (Index order : {3, 4}) {
    const std::vector<Index> dims(order, 12);
    const Index rank = 4;
    std::vector<double> slopes;
    for (int trial = 0; trial < 5; ++trial) {
      auto [x, truth] = random_cp(dims, rank, derive_seed(606 + order, trial));
      std::vector<double> log_eps, log_err;
      for (double eps : {1e-2, 1e-3, 1e-4}) {
        SolverConfig cfg;
        cfg.rank = rank;
        cfg.seed = 1;
        SolverState state = make_initial_state(x, cfg, truth);
        // perturb the first N-1 normalized factors by per-factor eps
        Rng rng(derive_seed(607, trial * 10 + static_cast<int>(-std::log10(eps))));
        for (Index n = 0; n < order - 1; ++n) {
          Matrix delta(state.model.factors[n].rows(), rank);
          for (Index j = 0; j < rank; ++j)
            for (Index i = 0; i < delta.rows(); ++i) delta(i, j) = rng.normal();
          state.model.factors[n] += (eps / delta.norm()) * delta;
          state.model.factors[n] = normalize_columns(state.model.factors[n]).first;
          state.refresh_spectrum(n);
        }
        amdm_update(state, x, order - 1);
        const RecoveryError err = factor_recovery_detail(state.model, truth);
        log_eps.push_back(std::log(eps));
        log_err.push_back(std::log(std::max(err.per_mode[order - 1], 1e-300)));
      }
      // least-squares slope over the three points
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < log_eps.size(); ++i) {
        sx += log_eps[i];
        sy += log_err[i];
        sxx += log_eps[i] * log_eps[i];
        sxy += log_eps[i] * log_err[i];
      }
      const double n = static_cast<double>(log_eps.size());
      slopes.push_back((n * sxy - sx * sy) / (n * sxx - sx * sx));
    }
    std::sort(slopes.begin(), slopes.end());
    const double slope = slopes[slopes.size() / 2];
    const double target = static_cast<double>(order - 1);
    pass = pass && std::abs(slope - target) <= 0.3;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "N=%ld slope %.3f (target %.0f +- 0.3); ",
                  static_cast<long>(order), slope, target);
    detail += buf;
  }
  report(6, "error contraction slope vs perturbation", pass, detail);
}

// --- criterion 7: planted-probability ----------------------------------------
void criterion_7() {
  const std::vector<double> eps_perp = {1e-6, 1e-3, 1e-2, 1e-1};
  auto points = planted_probability_experiment(10, 10, 5, 20, 5, 1e-3, eps_perp, 707);
  bool monotone = true;
  for (std::size_t i = 1; i < points.size(); ++i)
    monotone = monotone && points[i].probability <= points[i - 1].probability + 1e-12;
  const bool pass = points.front().probability == 1.0 && points.back().probability <= 0.5 &&
                    monotone;
  std::string detail = "p =";
  for (const auto& p : points) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), " %.2f", p.probability);
    detail += buf;
  }
  detail += " for eps_perp = 1e-6, 1e-3, 1e-2, 1e-1";
  report(7, "planted-half recovery probability (10^3, R=10->5)", pass, detail);
}

// --- criterion 8: conditioning trade-off --------------------------------------
void criterion_8() {
  NoisyCollinearResult res =
      noisy_collinear_experiment(40, 10, 0.9, 1e-3, 200, 808, /*trace_condition=*/false);
  const auto& als = res.runs[0];
  const auto& amdm = res.runs[1];
  const auto& hybrid = res.runs[2];
  const double ratio = als.final_condition / amdm.final_condition;
  const bool pass = ratio > 10.0 && amdm.final_fitness >= als.final_fitness - 0.02 &&
                    hybrid.final_fitness >= als.final_fitness - 0.005 &&
                    hybrid.final_condition < als.final_condition;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "kappa als/amdm = %.1f (> 10); fitness als %.4f amdm %.4f hybrid %.4f; "
                "kappa hybrid %.1f < als %.1f",
                ratio, als.final_fitness, amdm.final_fitness, hybrid.final_fitness,
                hybrid.final_condition, als.final_condition);
  report(8, "fitness/conditioning trade-off (collinear + noise)", pass, detail);
}

// --- criterion 9: property suites ---------------------------------------------
void criterion_9() {
  std::string detail;
  bool pass = true;

  {  // ALS residual monotonicity across subsweeps
    auto [x0, truth] = random_cp({12, 12, 12}, 6, 909);
    DenseTensor x = add_gaussian_noise(x0, 1e-2, 910);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::als;
    cfg.rank = 4;
    cfg.seed = 911;
    SolverState state = make_initial_state(x, cfg);
    double prev = residual_and_fitness(state.model, x).first;
    bool monotone = true;
    for (int sweep = 0; sweep < 10; ++sweep)
      for (Index n = 0; n < 3; ++n) {
        als_update(state, x, n);
        const double r = residual_and_fitness(state.model, x).first;
        monotone = monotone && r <= prev + 1e-10 * x.norm();
        prev = r;
      }
    pass = pass && monotone;
    detail += std::string("als monotone=") + (monotone ? "yes" : "NO") + "; ";
  }

  {  // Khatri-Rao norm inequality
    Rng rng(912);
    bool ok = true;
    for (int t = 0; t < 20; ++t) {
      Matrix a(4, 3), b(5, 3);
      for (Index j = 0; j < 3; ++j) {
        for (Index i = 0; i < 4; ++i) a(i, j) = rng.normal();
        for (Index i = 0; i < 5; ++i) b(i, j) = rng.normal();
      }
      ok = ok && khatri_rao(a, b).norm() <= a.norm() * b.norm() + 1e-12;
    }
    pass = pass && ok;
    detail += std::string("kr-norm=") + (ok ? "yes" : "NO") + "; ";
  }

  {  // Penrose identities
    Rng rng(913);
    bool ok = true;
    for (int t = 0; t < 10; ++t) {
      Matrix m(7, 4);
      for (Index j = 0; j < 4; ++j)
        for (Index i = 0; i < 7; ++i) m(i, j) = rng.normal();
      Matrix p = pseudoinverse(m);
      ok = ok && (m * p * m - m).norm() < 1e-9 * m.norm();
      ok = ok && (p * m * p - p).norm() < 1e-9 * p.norm();
      ok = ok && ((m * p).transpose() - m * p).norm() < 1e-9;
      ok = ok && ((p * m).transpose() - p * m).norm() < 1e-9;
    }
    pass = pass && ok;
    detail += std::string("penrose=") + (ok ? "yes" : "NO") + "; ";
  }

  {  // matricize/tensorize round-trips
    Rng rng(914);
    bool ok = true;
    std::vector<std::vector<Index>> shapes = {{6}, {4, 5}, {3, 4, 2}, {2, 3, 2, 3}, {2, 2, 3, 2, 2}};
    for (const auto& shape : shapes) {
      DenseTensor t(shape);
      for (Index i = 0; i < t.size(); ++i) t[i] = rng.normal();
      for (Index n = 0; n < t.order(); ++n) {
        DenseTensor back = tensorize(matricize(t, n), shape, n);
        ok = ok && (back.data() - t.data()).norm() == 0.0;
      }
    }
    pass = pass && ok;
    detail += std::string("roundtrip=") + (ok ? "yes" : "NO") + "; ";
  }

  {  // fixed-point defects at an AMDM fixed point on an exact-rank tensor
    auto [x, truth] = random_cp({10, 10, 10}, 4, 915);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::amdm;
    cfg.rank = 4;
    cfg.seed = 916;
    cfg.max_sweeps = 60;
    cfg.tol_change = 1e-14;
    RunResult res = run(x, cfg);
    double worst = 0.0;
    for (double d : stationarity_residual(res.model, x)) worst = std::max(worst, d);
    for (double d : orthonormality_defect(res.model, x)) worst = std::max(worst, d);
    worst = std::max(worst, spectral_diagonalization_defect(res.model, x));
    pass = pass && worst < 1e-8;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "fixed-point defects %.1e; ", worst);
    detail += buf;
  }

  {  // theoretical rate polynomial residuals
    bool ok = true;
    for (Index n = 3; n <= 8; ++n) {
      const double a = theoretical_rate(n);
      double p = std::pow(a, static_cast<double>(n - 1));
      double xe = 1.0;
      for (Index i = 0; i <= n - 2; ++i) {
        p -= xe;
        xe *= a;
      }
      ok = ok && std::abs(p) < 1e-12;
    }
    pass = pass && ok;
    detail += std::string("rate-roots=") + (ok ? "yes" : "NO");
  }

  report(9, "property suites", pass, detail);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d/9 criteria passed in %.1f s\n", 9 - failures, secs);
  return failures == 0 ? 0 : 1;
}
