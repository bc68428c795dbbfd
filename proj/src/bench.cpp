#include "nestor/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "nestor/classical.hpp"
#include "nestor/errors.hpp"
#include "nestor/quantum.hpp"
#include "nestor/registry.hpp"
#include "nestor/schedule.hpp"

namespace nestor {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

EstimateReport run_one(const NestedProblem& p, Mode mode, double eps,
                       double delta, double kappa, RngStream rng) {
  History empty;
  CostLedger scratch;
  QamcConfig qcfg;
  qcfg.kappa = kappa;
  switch (mode) {
    case Mode::Alg1: {
      RateSolution rs = solve_rate(0, delta);
      LevelDistribution dist = LevelDistribution::geometric(rs.rate);
      CostLedger led;
      double v = rmlmc_single(p, 0, empty, dist, rng, led);
      EstimateReport rep;
      rep.estimate = v;
      rep.target_error = eps;
      rep.stage = 0;
      rep.ledger = led;
      rep.mode = Mode::Alg1;
      return rep;
    }
    case Mode::Alg2Geo:
      return rmlmc_estimate(p, 0, empty, eps,
                            LevelDistribution::Kind::Geometric, delta, rng,
                            scratch);
    case Mode::Alg2Trunc:
      return rmlmc_estimate(p, 0, empty, eps,
                            LevelDistribution::Kind::Truncated, delta, rng,
                            scratch);
    case Mode::Alg3:
      return derand_estimate(p, 0, empty, eps, delta, rng, scratch);
    case Mode::Alg4: {
      DirectQuantParams params;
      return direct_quantized_estimate(p, 0, empty, eps, params, qcfg, rng,
                                       scratch);
    }
    case Mode::Alg6:
      return qmlmc_estimate(p, 0, empty, eps, qcfg, rng, scratch);
  }
  throw ParameterError("unknown mode");
}

void validate(const ExperimentConfig& c) {
  find_problem(c.problem_id);
  mode_from_name(c.estimator);
  if (c.eps_grid.empty()) throw ParameterError("eps grid is empty");
  for (size_t i = 0; i < c.eps_grid.size(); ++i) {
    double e = c.eps_grid[i];
    if (!(e > 0.0 && e < 1.0)) {
      throw ParameterError("eps grid entries must lie in (0, 1)");
    }
    if (i > 0 && !(e < c.eps_grid[i - 1])) {
      throw ParameterError("eps grid must be strictly decreasing");
    }
  }
  if (c.reps < 1) throw ParameterError("reps must be >= 1");
  if (c.workers < 1) throw ParameterError("workers must be >= 1");
  detail::check_delta(c.delta);
  if (!(c.kappa > 0.0)) throw ParameterError("kappa must be > 0");
}

std::uint64_t rep_seed(std::uint64_t seed, size_t grid_index) {
  return seed ^ (0x9e3779b97f4a7c15ULL * (grid_index + 1));
}

}  // namespace

double study_cost_estimate(const ExperimentConfig& config) {
  validate(config);
  const NestedProblem& p = find_problem(config.problem_id);
  Mode mode = mode_from_name(config.estimator);
  double total = 0.0;
  for (double eps : config.eps_grid) {
    double per_rep = 0.0;
    switch (mode) {
      case Mode::Alg1: {
        RateSolution rs = solve_rate(0, config.delta);
        per_rep = rmlmc_single_expected_cost(
            p, 0, LevelDistribution::geometric(rs.rate));
        break;
      }
      case Mode::Alg2Geo:
        per_rep = rmlmc_expected_cost(
            p, 0, eps, LevelDistribution::Kind::Geometric, config.delta);
        break;
      case Mode::Alg2Trunc:
        per_rep = rmlmc_expected_cost(
            p, 0, eps, LevelDistribution::Kind::Truncated, config.delta);
        break;
      case Mode::Alg3:
        per_rep = static_cast<double>(derand_cost(p, 0, eps, config.delta));
        break;
      case Mode::Alg4: {
        DirectQuantParams params;
        per_rep = direct_quantized_classical_cost(p, 0, eps, params);
        break;
      }
      case Mode::Alg6:
        per_rep = qmlmc_classical_cost(p, 0, eps);
        break;
    }
    total += per_rep * config.reps;
  }
  return total;
}

std::pair<std::vector<ConvergenceRow>, std::vector<EstimateReport>>
run_study_reports(const ExperimentConfig& config) {
  validate(config);
  const NestedProblem& p = find_problem(config.problem_id);
  Mode mode = mode_from_name(config.estimator);
  double truth = problem_truth(config.problem_id);

  double estimated = study_cost_estimate(config);
  if (estimated > kStepBudget && !config.force) {
    throw std::runtime_error(
        "study refused: estimated classical cost " + fmt17(estimated) +
        " steps exceeds the guardrail of " + fmt17(kStepBudget) +
        "; pass force=true (--force) to run anyway");
  }

  const size_t grid = config.eps_grid.size();
  const size_t reps = static_cast<size_t>(config.reps);
  std::vector<EstimateReport> reports(grid * reps);

  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      size_t idx = next.fetch_add(1);
      if (idx >= reports.size() || failed.load()) break;
      size_t gi = idx / reps;
      size_t ri = idx % reps;
      try {
        std::uint64_t s = rep_seed(config.seed, gi);
        RngStream rng = RngStream::for_replication(s, ri);
        EstimateReport rep = run_one(p, mode, config.eps_grid[gi],
                                     config.delta, config.kappa, rng);
        rep.seed = s;
        reports[idx] = rep;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };

  int nworkers = std::min<int>(config.workers,
                               static_cast<int>(reports.size()));
  if (nworkers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) std::rethrow_exception(error);

  // Reduce in index order so the output is scheduling-independent.
  std::vector<ConvergenceRow> rows(grid);
  for (size_t gi = 0; gi < grid; ++gi) {
    double sq = 0.0, sum = 0.0, steps = 0.0;
    std::uint64_t charged = reports[gi * reps].ledger.quantum_charged;
    for (size_t ri = 0; ri < reps; ++ri) {
      const EstimateReport& rep = reports[gi * reps + ri];
      double err = rep.estimate - truth;
      sq += err * err;
      sum += rep.estimate;
      steps += static_cast<double>(rep.ledger.classical_steps);
      if (rep.ledger.quantum_charged != charged) {
        throw std::runtime_error(
            "charged cost varied across replications of one cell");
      }
    }
    ConvergenceRow& row = rows[gi];
    row.eps = config.eps_grid[gi];
    row.empirical_rmse = std::sqrt(sq / static_cast<double>(reps));
    row.empirical_bias = sum / static_cast<double>(reps) - truth;
    row.classical_steps_mean = steps / static_cast<double>(reps);
    row.quantum_charged = static_cast<double>(charged);
    row.reps = config.reps;
    row.seed = config.seed;
  }

  if (config.write_output) {
    std::string base = config.output_dir + "/" + config.problem_id + "_" +
                       config.estimator;
    write_csv(rows, base + ".csv");
    if (mode == Mode::Alg2Geo || mode == Mode::Alg2Trunc ||
        mode == Mode::Alg3) {
      std::ofstream out(base + "_schedule.csv");
      if (!out) {
        throw std::runtime_error("cannot write schedule sidecar");
      }
      out << "eps,stage,delta,rate,rho,truncation,replications,p,"
             "per_level\n";
      for (double eps : config.eps_grid) {
        LevelSchedule s = make_schedule(0, config.delta, p.lipschitz[0],
                                        eps, mode == Mode::Alg3);
        out << fmt17(eps) << ",0," << fmt17(s.delta) << ","
            << fmt17(s.rate) << "," << fmt17(s.rho) << "," << s.truncation
            << "," << s.replications << "," << fmt17(s.p) << ",";
        for (size_t i = 0; i < s.per_level.size(); ++i) {
          if (i) out << ';';
          out << s.per_level[i];
        }
        out << "\n";
      }
    }
  }
  return {std::move(rows), std::move(reports)};
}

std::vector<ConvergenceRow> run_study(const ExperimentConfig& config) {
  return run_study_reports(config).first;
}

std::pair<double, double> fit_slope(const std::vector<ConvergenceRow>& rows,
                                    const std::string& cost_column,
                                    int log_correction_power) {
  if (rows.size() < 3) {
    throw ParameterError("fit_slope needs at least 3 rows");
  }
  std::vector<double> xs, ys;
  for (const ConvergenceRow& row : rows) {
    double cost;
    if (cost_column == "classical_steps_mean") {
      cost = row.classical_steps_mean;
    } else if (cost_column == "quantum_charged") {
      cost = row.quantum_charged;
    } else if (cost_column == "empirical_rmse") {
      cost = row.empirical_rmse;
    } else {
      throw ParameterError("unknown cost column '" + cost_column + "'");
    }
    double x = std::log2(1.0 / row.eps);
    if (!(cost > 0.0)) {
      throw ParameterError("fit_slope requires positive cost values");
    }
    if (log_correction_power != 0 && !(x > 0.0)) {
      throw ParameterError(
          "log correction needs eps < 1 on every row");
    }
    double denom =
        (log_correction_power == 0)
            ? 1.0
            : std::pow(x, static_cast<double>(log_correction_power));
    xs.push_back(x);
    ys.push_back(std::log2(cost / denom));
  }
  double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ParameterError("fit_slope: degenerate eps grid");
  double slope = sxy / sxx;
  double r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return {slope, r2};
}

void write_csv(const std::vector<ConvergenceRow>& rows,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for write");
  out << "eps,empirical_rmse,empirical_bias,classical_steps_mean,"
         "quantum_charged,reps,seed\n";
  for (const ConvergenceRow& r : rows) {
    out << fmt17(r.eps) << ',' << fmt17(r.empirical_rmse) << ','
        << fmt17(r.empirical_bias) << ',' << fmt17(r.classical_steps_mean)
        << ',' << fmt17(r.quantum_charged) << ',' << r.reps << ','
        << r.seed << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<ConvergenceRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) ||
      line !=
          "eps,empirical_rmse,empirical_bias,classical_steps_mean,"
          "quantum_charged,reps,seed") {
    throw std::runtime_error("'" + path + "' has an unexpected CSV header");
  }
  std::vector<ConvergenceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 7) {
      throw std::runtime_error("'" + path + "' has a malformed row");
    }
    ConvergenceRow r;
    r.eps = std::stod(fields[0]);
    r.empirical_rmse = std::stod(fields[1]);
    r.empirical_bias = std::stod(fields[2]);
    r.classical_steps_mean = std::stod(fields[3]);
    r.quantum_charged = std::stod(fields[4]);
    r.reps = std::stoll(fields[5]);
    r.seed = std::stoull(fields[6]);
    rows.push_back(r);
  }
  return rows;
}

namespace {

struct PlotPoint {
  double x, y;
};

}  // namespace

void emit_plot(const std::vector<ConvergenceRow>& rows,
               const std::string& kind, const std::string& path) {
  if (rows.empty()) throw ParameterError("emit_plot: no rows");
  bool rmse;
  if (kind == "rmse_vs_eps") {
    rmse = true;
  } else if (kind == "cost_vs_eps") {
    rmse = false;
  } else {
    throw ParameterError("unknown plot kind '" + kind +
                         "' (rmse_vs_eps | cost_vs_eps)");
  }
  std::vector<PlotPoint> pts;
  for (const ConvergenceRow& r : rows) {
    double v = rmse ? r.empirical_rmse
                    : (r.classical_steps_mean > 0.0 ? r.classical_steps_mean
                                                    : r.quantum_charged);
    if (!(v > 0.0) || !(r.eps > 0.0)) continue;
    pts.push_back({std::log2(1.0 / r.eps), std::log2(v)});
  }
  if (pts.empty()) throw ParameterError("emit_plot: no positive data");

  double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
  for (const PlotPoint& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  // Guide lines pass through the first point with slopes -1 and -2 in eps
  // (i.e. +1 and +2 against log2(1/eps)); widen the bounds to keep them
  // visible.
  double span_x = std::max(1.0, xmax - xmin);
  ymin = std::min(ymin, pts[0].y - 0.5);
  ymax = std::max({ymax, pts[0].y + span_x, pts[0].y + 2.0 * span_x});
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  const double W = 640, H = 480, ML = 70, MR = 20, MT = 20, MB = 50;
  auto X = [&](double x) {
    return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR);
  };
  auto Y = [&](double y) {
    return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB);
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for write");
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W
      << "' height='" << H << "'>\n";
  out << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n";
  out << "<line x1='" << ML << "' y1='" << (H - MB) << "' x2='" << (W - MR)
      << "' y2='" << (H - MB) << "' stroke='black'/>\n";
  out << "<line x1='" << ML << "' y1='" << MT << "' x2='" << ML << "' y2='"
      << (H - MB) << "' stroke='black'/>\n";
  out << "<text x='" << (W / 2) << "' y='" << (H - 12)
      << "' text-anchor='middle' font-size='14'>log2(1/eps)</text>\n";
  out << "<text x='18' y='" << (H / 2)
      << "' text-anchor='middle' font-size='14' transform='rotate(-90 18 "
      << (H / 2) << ")'>log2(" << (rmse ? "rmse" : "cost") << ")</text>\n";

  for (int g = 1; g <= 2; ++g) {
    double y0 = pts[0].y, x0 = pts[0].x;
    out << "<line x1='" << X(xmin) << "' y1='"
        << Y(y0 + g * (xmin - x0)) << "' x2='" << X(xmax) << "' y2='"
        << Y(y0 + g * (xmax - x0))
        << "' stroke='#bbbbbb' stroke-dasharray='6,4'/>\n";
    out << "<text x='" << (X(xmax) - 70) << "' y='"
        << (Y(y0 + g * (xmax - x0)) - 5)
        << "' font-size='12' fill='#888888'>slope -" << g << "</text>\n";
  }

  if (pts.size() >= 2) {
    double n = static_cast<double>(pts.size());
    double mx = 0, my = 0;
    for (const PlotPoint& p : pts) {
      mx += p.x;
      my += p.y;
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (const PlotPoint& p : pts) {
      sxx += (p.x - mx) * (p.x - mx);
      sxy += (p.x - mx) * (p.y - my);
    }
    if (sxx > 0) {
      double b = sxy / sxx;
      out << "<line x1='" << X(xmin) << "' y1='"
          << Y(my + b * (xmin - mx)) << "' x2='" << X(xmax) << "' y2='"
          << Y(my + b * (xmax - mx)) << "' stroke='#d62728'/>\n";
    }
  }
  for (const PlotPoint& p : pts) {
    out << "<circle cx='" << X(p.x) << "' cy='" << Y(p.y)
        << "' r='4' fill='#1f77b4'/>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

std::string parse_string(const std::string& v, const std::string& key) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') {
    throw ParameterError("config key '" + key +
                         "' expects a quoted string, got: " + v);
  }
  return v.substr(1, v.size() - 2);
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  ExperimentConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParameterError("config line " + std::to_string(lineno) +
                             ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(lineno) +
                           ": expected key = value");
    }
    if (section != "experiment") {
      throw ParameterError("config line " + std::to_string(lineno) +
                           ": keys must live in the [experiment] table");
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "problem") {
      cfg.problem_id = parse_string(val, key);
    } else if (key == "estimator") {
      cfg.estimator = parse_string(val, key);
    } else if (key == "eps") {
      if (val.size() < 2 || val.front() != '[' || val.back() != ']') {
        throw ParameterError("config key 'eps' expects an array");
      }
      cfg.eps_grid.clear();
      std::stringstream ss(val.substr(1, val.size() - 2));
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) cfg.eps_grid.push_back(std::stod(item));
      }
    } else if (key == "reps") {
      cfg.reps = std::stoi(val);
    } else if (key == "delta") {
      cfg.delta = std::stod(val);
    } else if (key == "seed") {
      cfg.seed = std::stoull(val);
    } else if (key == "kappa") {
      cfg.kappa = std::stod(val);
    } else if (key == "out") {
      cfg.output_dir = parse_string(val, key);
    } else if (key == "workers") {
      cfg.workers = std::stoi(val);
    } else if (key == "force") {
      if (val == "true") {
        cfg.force = true;
      } else if (val == "false") {
        cfg.force = false;
      } else {
        throw ParameterError("config key 'force' expects true or false");
      }
    } else {
      throw ParameterError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

}  // namespace nestor
