#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nestor/bench.hpp"
#include "nestor/errors.hpp"
#include "nestor/classical.hpp"
#include "nestor/qamc.hpp"
#include "nestor/quantum.hpp"
#include "nestor/registry.hpp"
#include "nestor/schedule.hpp"

namespace py = pybind11;
using namespace nestor;

namespace {

ExperimentConfig make_config(const std::string& problem,
                             const std::string& estimator,
                             const std::vector<double>& eps, int reps,
                             double delta, std::uint64_t seed, double kappa,
                             const std::string& out, int workers, bool force,
                             bool write_output) {
  ExperimentConfig cfg;
  cfg.problem_id = problem;
  cfg.estimator = estimator;
  cfg.eps_grid = eps;
  cfg.reps = reps;
  cfg.delta = delta;
  cfg.seed = seed;
  cfg.kappa = kappa;
  cfg.output_dir = out;
  cfg.workers = workers;
  cfg.force = force;
  cfg.write_output = write_output;
  return cfg;
}

py::dict row_to_dict(const ConvergenceRow& r) {
  py::dict d;
  d["eps"] = r.eps;
  d["empirical_rmse"] = r.empirical_rmse;
  d["empirical_bias"] = r.empirical_bias;
  d["classical_steps_mean"] = r.classical_steps_mean;
  d["quantum_charged"] = r.quantum_charged;
  d["reps"] = r.reps;
  d["seed"] = r.seed;
  return d;
}

py::dict report_to_dict(const EstimateReport& rep) {
  py::dict d;
  d["estimate"] = rep.estimate;
  d["target_error"] = rep.target_error;
  d["stage"] = rep.stage;
  d["mode"] = mode_name(rep.mode);
  d["classical_steps"] = rep.ledger.classical_steps;
  d["quantum_charged"] = rep.ledger.quantum_charged;
  d["per_level"] = rep.ledger.per_level;
  return d;
}

EstimateReport run_one(const std::string& problem_id,
                       const std::string& estimator, double eps,
                       double delta, double kappa, std::uint64_t seed) {
  const NestedProblem& p = find_problem(problem_id);
  RngStream rng(seed);
  CostLedger led;
  Mode mode = mode_from_name(estimator);
  switch (mode) {
    case Mode::Alg2Geo:
      return rmlmc_estimate(p, 0, History{}, eps,
                            LevelDistribution::Kind::Geometric, delta, rng,
                            led);
    case Mode::Alg2Trunc:
      return rmlmc_estimate(p, 0, History{}, eps,
                            LevelDistribution::Kind::Truncated, delta, rng,
                            led);
    case Mode::Alg3:
      return derand_estimate(p, 0, History{}, eps, delta, rng, led);
    case Mode::Alg4: {
      QamcConfig cfg;
      cfg.kappa = kappa;
      return direct_quantized_estimate(p, 0, History{}, eps,
                                       DirectQuantParams{}, cfg, rng, led);
    }
    case Mode::Alg6: {
      QamcConfig cfg;
      cfg.kappa = kappa;
      return qmlmc_estimate(p, 0, History{}, eps, cfg, rng, led);
    }
    case Mode::Alg1: {
      RateSolution rs = solve_rate(0, delta);
      LevelDistribution dist = LevelDistribution::geometric(rs.rate);
      EstimateReport rep;
      rep.estimate = rmlmc_single(p, 0, History{}, dist, rng, led);
      rep.target_error = eps;
      rep.stage = 0;
      rep.ledger = led;
      rep.mode = Mode::Alg1;
      return rep;
    }
  }
  throw ParameterError("unknown estimator '" + estimator + "'");
}

}  // namespace

PYBIND11_MODULE(_nestor, m) {
  m.doc() = "Multilevel Monte Carlo estimators for repeatedly nested "
            "expectations, with a quantum cost-model emulator";

  py::register_exception<ParameterError>(m, "ParameterError",
                                         PyExc_ValueError);
  py::register_exception<ScheduleInfeasibleError>(
      m, "ScheduleInfeasibleError", PyExc_RuntimeError);

  m.def("list_problems", &list_problems,
        "Registered benchmark problem ids.");
  m.def("problem_truth", &problem_truth, py::arg("problem_id"),
        "High-accuracy ground-truth value of the problem's top-level "
        "expectation.");

  m.def(
      "run_study",
      [](const std::string& problem, const std::string& estimator,
         const std::vector<double>& eps, int reps, double delta,
         std::uint64_t seed, double kappa, const std::string& out,
         int workers, bool force, bool write_output) {
        ExperimentConfig cfg =
            make_config(problem, estimator, eps, reps, delta, seed, kappa,
                        out, workers, force, write_output);
        std::vector<ConvergenceRow> rows = run_study(cfg);
        py::list result;
        for (const ConvergenceRow& r : rows) result.append(row_to_dict(r));
        return result;
      },
      py::arg("problem"), py::arg("estimator"), py::arg("eps"),
      py::arg("reps") = 30, py::arg("delta") = 0.25,
      py::arg("seed") = 12345, py::arg("kappa") = 1.0,
      py::arg("out") = ".", py::arg("workers") = 1,
      py::arg("force") = false, py::arg("write_output") = false,
      "Run a convergence study; returns one dict per eps grid point.");

  m.def(
      "estimate",
      [](const std::string& problem, const std::string& estimator,
         double eps, double delta, double kappa, std::uint64_t seed) {
        return report_to_dict(
            run_one(problem, estimator, eps, delta, kappa, seed));
      },
      py::arg("problem"), py::arg("estimator"), py::arg("eps"),
      py::arg("delta") = 0.25, py::arg("kappa") = 1.0,
      py::arg("seed") = 12345,
      "Single estimator run from the trajectory start; returns the report "
      "as a dict.");

  m.def(
      "fit_slope",
      [](const std::vector<std::map<std::string, double>>& rows,
         const std::string& cost_column, int log_power) {
        std::vector<ConvergenceRow> cr;
        for (const auto& r : rows) {
          ConvergenceRow row;
          row.eps = r.at("eps");
          if (auto it = r.find("classical_steps_mean"); it != r.end()) {
            row.classical_steps_mean = it->second;
          }
          if (auto it = r.find("quantum_charged"); it != r.end()) {
            row.quantum_charged = it->second;
          }
          cr.push_back(row);
        }
        return fit_slope(cr, cost_column, log_power);
      },
      py::arg("rows"), py::arg("cost_column") = "classical_steps_mean",
      py::arg("log_power") = 0,
      "OLS slope of log2(cost / log2^k(1/eps)) vs log2(1/eps); returns "
      "(slope, r_squared).");

  m.def(
      "solve_rate",
      [](int d, double delta) {
        RateSolution rs = solve_rate(d, delta);
        return py::make_tuple(rs.rate, rs.rho);
      },
      py::arg("d"), py::arg("delta"),
      "Level-distribution rate r_d and contraction factor rho_d.");
  m.def("truncation_level", &truncation_level, py::arg("lipschitz"),
        py::arg("eps"));
  m.def("replication_count", &replication_count, py::arg("d"),
        py::arg("delta"), py::arg("lipschitz"), py::arg("eps"));

  m.def(
      "qamc_rmse_charge",
      [](double s_bound, double eps, double kappa) {
        QamcConfig cfg;
        cfg.kappa = kappa;
        return qamc_rmse_charge(s_bound, eps, cfg);
      },
      py::arg("s_bound"), py::arg("eps"), py::arg("kappa") = 1.0);
  m.def(
      "qamc_eps_delta_charge",
      [](double sigma, double eps, double delta_fail, double kappa) {
        QamcConfig cfg;
        cfg.kappa = kappa;
        return qamc_eps_delta_charge(sigma, eps, delta_fail, cfg);
      },
      py::arg("sigma"), py::arg("eps"), py::arg("delta_fail"),
      py::arg("kappa") = 1.0);

  m.def(
      "derand_cost",
      [](const std::string& problem, double eps, double delta) {
        return derand_cost(find_problem(problem), 0, eps, delta);
      },
      py::arg("problem"), py::arg("eps"), py::arg("delta") = 0.25,
      "Exact classical step count of the derandomized estimator.");
  m.def(
      "qmlmc_charge",
      [](const std::string& problem, double eps, double kappa) {
        QamcConfig cfg;
        cfg.kappa = kappa;
        return qmlmc_charge(find_problem(problem), 0, eps, cfg);
      },
      py::arg("problem"), py::arg("eps"), py::arg("kappa") = 1.0,
      "Deterministic charged quantum cost of the quantum MLMC estimator.");
}
