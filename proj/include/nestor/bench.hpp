#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nestor/report.hpp"

namespace nestor {

struct ExperimentConfig {
  std::string problem_id;
  std::string estimator;            // alg1 | alg2-geo | alg2-trunc | alg3
                                    // | alg4 | alg6
  std::vector<double> eps_grid;     // strictly decreasing, in (0, 1)
  int reps = 30;
  double delta = 0.25;
  std::uint64_t seed = 12345;
  double kappa = 1.0;
  std::string output_dir = ".";
  int workers = 1;
  // Override the desk-scale guardrail (pre-pass classical cost estimate
  // above kStepBudget refuses to run without this).
  bool force = false;
  // Skip CSV/schedule emission (library-level studies in tests).
  bool write_output = true;
};

struct ConvergenceRow {
  double eps = 0.0;
  double empirical_rmse = 0.0;
  double empirical_bias = 0.0;
  double classical_steps_mean = 0.0;
  double quantum_charged = 0.0;  // deterministic per run; 0 for classical
  long long reps = 0;
  std::uint64_t seed = 0;

  bool operator==(const ConvergenceRow&) const = default;
};

inline constexpr double kStepBudget = 1e9;

// Estimated total classical steps the study would consume (exact for the
// deterministic estimators, expected value for the randomized ones).
double study_cost_estimate(const ExperimentConfig& config);

// Run `reps` independent replications per grid point, measure RMSE and
// bias against the registered ground truth, average the ledgers, and
// (unless write_output is false) emit <problem>_<estimator>.csv plus a
// schedule sidecar into output_dir.  Deterministic given the seed,
// independent of worker count.  The per-replication reports of the last
// grid point are also retrievable via run_study_reports for determinism
// checks.
std::vector<ConvergenceRow> run_study(const ExperimentConfig& config);

// Same as run_study but also returns every EstimateReport (grid-major,
// replication order).
std::pair<std::vector<ConvergenceRow>, std::vector<EstimateReport>>
run_study_reports(const ExperimentConfig& config);

// OLS fit of log2(cost / log2^power(1/eps)) against log2(1/eps); returns
// (slope, r^2).  cost_column is "classical_steps_mean" or
// "quantum_charged".  Requires at least 3 rows.
std::pair<double, double> fit_slope(const std::vector<ConvergenceRow>& rows,
                                    const std::string& cost_column,
                                    int log_correction_power);

// Static SVG log-log chart; kind is "rmse_vs_eps" or "cost_vs_eps".
// Draws reference guide lines of slope -1 and -2 and, with >= 2 points,
// the least-squares fit.
void emit_plot(const std::vector<ConvergenceRow>& rows,
               const std::string& kind, const std::string& path);

// CSV with the fixed header
// eps,empirical_rmse,empirical_bias,classical_steps_mean,quantum_charged,
// reps,seed; floats at 17 significant digits.
void write_csv(const std::vector<ConvergenceRow>& rows,
               const std::string& path);
std::vector<ConvergenceRow> read_csv(const std::string& path);

// Flat TOML config: a single [experiment] table with keys matching the
// ExperimentConfig fields (problem, estimator, eps, reps, delta, seed,
// kappa, out, workers, force).
ExperimentConfig load_config(const std::string& path);

}  // namespace nestor
