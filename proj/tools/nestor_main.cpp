#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nestor/bench.hpp"
#include "nestor/errors.hpp"
#include "nestor/registry.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& problem,
            const std::string& estimator, const std::vector<double>& eps,
            int reps, std::int64_t seed, const std::string& out,
            double delta, double kappa, int workers, bool force) {
  nestor::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = nestor::load_config(config_path);
  if (!problem.empty()) cfg.problem_id = problem;
  if (!estimator.empty()) cfg.estimator = estimator;
  if (!eps.empty()) cfg.eps_grid = eps;
  if (reps > 0) cfg.reps = reps;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (!out.empty()) cfg.output_dir = out;
  if (delta > 0.0) cfg.delta = delta;
  if (kappa > 0.0) cfg.kappa = kappa;
  if (workers > 0) cfg.workers = workers;
  if (force) cfg.force = true;

  std::vector<nestor::ConvergenceRow> rows = nestor::run_study(cfg);
  std::printf("# %s / %s: %zu grid points, %d reps, seed %llu\n",
              cfg.problem_id.c_str(), cfg.estimator.c_str(), rows.size(),
              cfg.reps, static_cast<unsigned long long>(cfg.seed));
  std::printf("%-12s %-14s %-14s %-18s %-14s\n", "eps", "rmse", "bias",
              "classical_steps", "quantum");
  for (const auto& r : rows) {
    std::printf("%-12.6g %-14.6g %-14.6g %-18.6g %-14.6g\n", r.eps,
                r.empirical_rmse, r.empirical_bias, r.classical_steps_mean,
                r.quantum_charged);
  }
  std::printf("wrote %s/%s_%s.csv\n", cfg.output_dir.c_str(),
              cfg.problem_id.c_str(), cfg.estimator.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel Monte Carlo estimators for repeatedly nested "
               "expectations, with a quantum cost-model emulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a convergence study");
  std::string config_path, problem, estimator, out;
  std::vector<double> eps;
  int reps = 0, workers = 0;
  std::int64_t seed = -1;
  double delta = 0.0, kappa = 0.0;
  bool force = false;
  run->add_option("--config", config_path, "TOML config file");
  run->add_option("--problem", problem, "Problem id");
  run->add_option("--estimator", estimator,
                  "alg1|alg2-geo|alg2-trunc|alg3|alg4|alg6");
  run->add_option("--eps", eps, "Accuracy grid (strictly decreasing)");
  run->add_option("--reps", reps, "Replications per grid point");
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--out", out, "Output directory");
  run->add_option("--delta", delta, "Schedule parameter delta in (0, 1/2)");
  run->add_option("--kappa", kappa, "Quantum charge constant");
  run->add_option("--workers", workers, "Worker threads");
  run->add_flag("--force", force, "Override the classical-step guardrail");

  // slope
  auto* slope = app.add_subcommand("slope", "Fit a log-log cost slope");
  std::string slope_csv, cost_col = "classical_steps_mean";
  int log_power = 0;
  slope->add_option("--csv", slope_csv, "CSV from `nestor run`")
      ->required();
  slope->add_option("--cost-col", cost_col,
                    "classical_steps_mean|quantum_charged|empirical_rmse");
  slope->add_option("--log-power", log_power,
                    "Divide cost by log2^k(1/eps) before fitting");

  // plot
  auto* plot = app.add_subcommand("plot", "Emit a static SVG chart");
  std::string plot_csv, plot_kind = "cost_vs_eps", plot_out;
  plot->add_option("--csv", plot_csv, "CSV from `nestor run`")->required();
  plot->add_option("--kind", plot_kind, "rmse_vs_eps|cost_vs_eps");
  plot->add_option("--out", plot_out, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << std::endl;
    return 2;
  }

  try {
    if (run->parsed()) {
      return cmd_run(config_path, problem, estimator, eps, reps, seed, out,
                     delta, kappa, workers, force);
    }
    if (slope->parsed()) {
      auto rows = nestor::read_csv(slope_csv);
      auto [s, r2] = nestor::fit_slope(rows, cost_col, log_power);
      std::printf("slope %.6f r2 %.6f (column %s, log power %d)\n", s, r2,
                  cost_col.c_str(), log_power);
      return 0;
    }
    if (plot->parsed()) {
      auto rows = nestor::read_csv(plot_csv);
      nestor::emit_plot(rows, plot_kind, plot_out);
      std::printf("wrote %s\n", plot_out.c_str());
      return 0;
    }
  } catch (const nestor::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 2;
}
