#include "nestor/classical.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "nestor/errors.hpp"

namespace nestor {

namespace {

using detail::replication_count_rec;
using detail::truncation_level_rec;

inline void draw_step(const NestedProblem& p, std::vector<double>& path,
                      int d, RngStream& rng, CostLedger& led) {
  path[d] = p.sampler(
      std::span<const double>(path.data(), static_cast<size_t>(d)), rng);
  led.add_step();
}

void check_stage(const NestedProblem& p, int d, const History& h) {
  if (d < 0 || d > p.horizon) {
    throw ParameterError("stage must lie in [0, horizon]");
  }
  if (h.stage() != d) {
    throw ParameterError("history stage " + std::to_string(h.stage()) +
                         " does not match requested stage " +
                         std::to_string(d));
  }
}

std::vector<double> make_path(const NestedProblem& p, const History& h) {
  std::vector<double> path = h.values;
  path.resize(static_cast<size_t>(p.horizon) + 1, 0.0);
  return path;
}

// ---- alg1: antithetic single-sample estimator ---------------------------

// The same level distribution is reused at every recursive stage; the
// estimator is unbiased for any fixed distribution with full support on
// the retained levels, and the per-stage rates only tune moments.
double alg1_rec(const NestedProblem& p, int d, std::vector<double>& path,
                const LevelDistribution& dist, RngStream& rng,
                CostLedger& led) {
  const int D = p.horizon;
  draw_step(p, path, d, rng, led);
  std::span<const double> y_le_d(path.data(), static_cast<size_t>(d) + 1);
  if (d == D) {
    return p.terminal_fn(y_le_d);
  }
  int n = dist.sample(rng);
  double delta;
  if (n == 0) {
    double x1 = alg1_rec(p, d + 1, path, dist, rng, led);
    delta = p.stage_fn(d, y_le_d, x1);
  } else {
    const std::uint64_t count = std::uint64_t{1} << n;
    double sum = 0.0, sum_odd = 0.0, sum_even = 0.0;
    for (std::uint64_t i = 1; i <= count; ++i) {
      double x = alg1_rec(p, d + 1, path, dist, rng, led);
      sum += x;
      ((i & 1) ? sum_odd : sum_even) += x;
    }
    double inv = 1.0 / static_cast<double>(count);
    delta = p.stage_fn(d, y_le_d, sum * inv) -
            0.5 * p.stage_fn(d, y_le_d, sum_odd * 2.0 * inv) -
            0.5 * p.stage_fn(d, y_le_d, sum_even * 2.0 * inv);
  }
  return delta / dist.pmf(n);
}

// ---- alg2/alg3: successive-accuracy recursion ---------------------------

struct Ctx {
  const NestedProblem& p;
  double delta;
  LevelDistribution::Kind kind;  // used by the alg2 recursion
};

double alg2_value(const Ctx& c, int d, std::vector<double>& path, double eps,
                  RngStream& rng, CostLedger& led);
double alg3_value(const Ctx& c, int d, std::vector<double>& path, double eps,
                  RngStream& rng, CostLedger& led);

template <typename Recur>
double delta_rec(const Ctx& c, int d, std::vector<double>& path, int n,
                 Recur&& recur, RngStream& rng, CostLedger& led) {
  std::span<const double> y_le_d(path.data(), static_cast<size_t>(d) + 1);
  RngStream fine_rng = rng.split();
  double fine =
      recur(c, d + 1, path, std::exp2(-0.5 * n), fine_rng, led);
  double v = c.p.stage_fn(d, y_le_d, fine);
  if (n == 0) return v;
  RngStream coarse_rng = rng.split();
  double coarse =
      recur(c, d + 1, path, std::exp2(-0.5 * (n - 1)), coarse_rng, led);
  return v - c.p.stage_fn(d, y_le_d, coarse);
}

double terminal_mean(const Ctx& c, std::vector<double>& path, double eps,
                     RngStream& rng, CostLedger& led) {
  const int D = c.p.horizon;
  long long m =
      replication_count_rec(D, c.delta, c.p.lipschitz[D], eps);
  std::span<const double> y(path.data(), static_cast<size_t>(D) + 1);
  double acc = 0.0;
  for (long long i = 0; i < m; ++i) {
    draw_step(c.p, path, D, rng, led);
    acc += c.p.terminal_fn(y);
  }
  return acc / static_cast<double>(m);
}

double alg2_value(const Ctx& c, int d, std::vector<double>& path, double eps,
                  RngStream& rng, CostLedger& led) {
  const int D = c.p.horizon;
  if (d == D) return terminal_mean(c, path, eps, rng, led);
  double lip = c.p.lipschitz[d];
  RateSolution rs = solve_rate(d, c.delta);
  LevelDistribution dist =
      (c.kind == LevelDistribution::Kind::Geometric)
          ? LevelDistribution::geometric(rs.rate)
          : LevelDistribution::truncated(rs.rate,
                                         truncation_level_rec(lip, eps));
  long long m = replication_count_rec(d, c.delta, lip, eps);
  double acc = 0.0;
  for (long long i = 0; i < m; ++i) {
    draw_step(c.p, path, d, rng, led);
    int n = dist.sample(rng);
    acc += delta_rec(c, d, path, n, alg2_value, rng, led) / dist.pmf(n);
  }
  return acc / static_cast<double>(m);
}

double alg3_value(const Ctx& c, int d, std::vector<double>& path, double eps,
                  RngStream& rng, CostLedger& led) {
  const int D = c.p.horizon;
  if (d == D) return terminal_mean(c, path, eps, rng, led);
  double lip = c.p.lipschitz[d];
  RateSolution rs = solve_rate(d, c.delta);
  int b = truncation_level_rec(lip, eps);
  long long m = replication_count_rec(d, c.delta, lip, eps);
  std::vector<long long> counts =
      per_level_counts(m, LevelDistribution::truncated(rs.rate, b));
  double total = 0.0;
  for (int n = 0; n <= b; ++n) {
    double acc = 0.0;
    for (long long i = 0; i < counts[n]; ++i) {
      draw_step(c.p, path, d, rng, led);
      acc += delta_rec(c, d, path, n, alg3_value, rng, led);
    }
    total += acc / static_cast<double>(counts[n]);
  }
  return total;
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw ParameterError("eps must lie in (0, 1), got " +
                         std::to_string(eps));
  }
}

}  // namespace

double rmlmc_single(const NestedProblem& problem, int d,
                    const History& history, const LevelDistribution& dist,
                    RngStream& rng, CostLedger& ledger) {
  check_stage(problem, d, history);
  std::vector<double> path = make_path(problem, history);
  return alg1_rec(problem, d, path, dist, rng, ledger);
}

double delta_successive(const NestedProblem& problem, int d,
                        const History& y_le_d, int n, double eps_fine,
                        double eps_coarse, const InnerEstimator& inner,
                        RngStream& rng, CostLedger& ledger) {
  if (n < 0) throw ParameterError("level n must be >= 0");
  if (d < 0 || d >= problem.horizon) {
    throw ParameterError("delta_successive requires 0 <= d < horizon");
  }
  if (y_le_d.stage() != d + 1) {
    throw ParameterError("delta_successive expects a history of length d+1");
  }
  std::span<const double> y(y_le_d.values.data(),
                            static_cast<size_t>(d) + 1);
  RngStream fine_rng = rng.split();
  double fine = inner(y_le_d, eps_fine, fine_rng, ledger);
  double v = problem.stage_fn(d, y, fine);
  if (n == 0) return v;
  RngStream coarse_rng = rng.split();
  double coarse = inner(y_le_d, eps_coarse, coarse_rng, ledger);
  return v - problem.stage_fn(d, y, coarse);
}

EstimateReport rmlmc_estimate(const NestedProblem& problem, int d,
                              const History& history, double eps,
                              LevelDistribution::Kind kind, double delta,
                              RngStream& rng, CostLedger& ledger) {
  check_eps(eps);
  detail::check_delta(delta);
  check_stage(problem, d, history);
  Ctx c{problem, delta, kind};
  std::vector<double> path = make_path(problem, history);
  CostLedger local;
  double value = alg2_value(c, d, path, eps, rng, local);
  ledger.merge(local);
  EstimateReport report;
  report.estimate = value;
  report.target_error = eps;
  report.stage = d;
  report.ledger = local;
  report.mode = (kind == LevelDistribution::Kind::Geometric)
                    ? Mode::Alg2Geo
                    : Mode::Alg2Trunc;
  return report;
}

EstimateReport derand_estimate(const NestedProblem& problem, int d,
                               const History& history, double eps,
                               double delta, RngStream& rng,
                               CostLedger& ledger) {
  check_eps(eps);
  detail::check_delta(delta);
  check_stage(problem, d, history);
  Ctx c{problem, delta, LevelDistribution::Kind::Truncated};
  std::vector<double> path = make_path(problem, history);
  CostLedger local;
  double value = alg3_value(c, d, path, eps, rng, local);
  ledger.merge(local);
  EstimateReport report;
  report.estimate = value;
  report.target_error = eps;
  report.stage = d;
  report.ledger = local;
  report.mode = Mode::Alg3;
  return report;
}

namespace {

using CostKey = std::pair<int, std::uint64_t>;

std::uint64_t derand_cost_rec(const NestedProblem& p, double delta, int d,
                              double eps,
                              std::map<CostKey, std::uint64_t>& memo) {
  const int D = p.horizon;
  CostKey key{d, std::bit_cast<std::uint64_t>(eps)};
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::uint64_t total;
  if (d == D) {
    total = static_cast<std::uint64_t>(
        replication_count_rec(D, delta, p.lipschitz[D], eps));
  } else {
    double lip = p.lipschitz[d];
    RateSolution rs = solve_rate(d, delta);
    int b = truncation_level_rec(lip, eps);
    long long m = replication_count_rec(d, delta, lip, eps);
    std::vector<long long> counts =
        per_level_counts(m, LevelDistribution::truncated(rs.rate, b));
    total = 0;
    for (int n = 0; n <= b; ++n) {
      std::uint64_t per =
          1 + derand_cost_rec(p, delta, d + 1, std::exp2(-0.5 * n), memo);
      if (n >= 1) {
        per += derand_cost_rec(p, delta, d + 1, std::exp2(-0.5 * (n - 1)),
                               memo);
      }
      total += static_cast<std::uint64_t>(counts[n]) * per;
    }
  }
  memo[key] = total;
  return total;
}

double rmlmc_expected_cost_rec(const NestedProblem& p, double delta,
                               LevelDistribution::Kind kind, int d,
                               double eps,
                               std::map<CostKey, double>& memo) {
  const int D = p.horizon;
  CostKey key{d, std::bit_cast<std::uint64_t>(eps)};
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  double total;
  if (d == D) {
    total = static_cast<double>(
        replication_count_rec(D, delta, p.lipschitz[D], eps));
  } else {
    double lip = p.lipschitz[d];
    RateSolution rs = solve_rate(d, delta);
    bool trunc = (kind == LevelDistribution::Kind::Truncated);
    int b = trunc ? truncation_level_rec(lip, eps) : 400;
    LevelDistribution dist =
        trunc ? LevelDistribution::truncated(rs.rate, b)
              : LevelDistribution::geometric(rs.rate);
    double m = static_cast<double>(
        replication_count_rec(d, delta, lip, eps));
    double per_rep = 1.0;
    for (int n = 0; n <= b; ++n) {
      double pn = dist.pmf(n);
      if (pn < 1e-16) break;
      double inner = rmlmc_expected_cost_rec(p, delta, kind, d + 1,
                                             std::exp2(-0.5 * n), memo);
      if (n >= 1) {
        inner += rmlmc_expected_cost_rec(p, delta, kind, d + 1,
                                         std::exp2(-0.5 * (n - 1)), memo);
      }
      per_rep += pn * inner;
    }
    total = m * per_rep;
  }
  memo[key] = total;
  return total;
}

}  // namespace

std::uint64_t derand_cost(const NestedProblem& problem, int d, double eps,
                          double delta) {
  check_eps(eps);
  detail::check_delta(delta);
  std::map<CostKey, std::uint64_t> memo;
  return derand_cost_rec(problem, delta, d, eps, memo);
}

double rmlmc_expected_cost(const NestedProblem& problem, int d, double eps,
                           LevelDistribution::Kind kind, double delta) {
  check_eps(eps);
  detail::check_delta(delta);
  std::map<CostKey, double> memo;
  return rmlmc_expected_cost_rec(problem, delta, kind, d, eps, memo);
}

double rmlmc_single_expected_cost(const NestedProblem& problem, int d,
                                  const LevelDistribution& dist) {
  const int D = problem.horizon;
  if (d == D) return 1.0;
  double inner = rmlmc_single_expected_cost(problem, d + 1, dist);
  double fanout = 0.0;
  for (int n = 0; n <= 200; ++n) {
    double pn = dist.pmf(n);
    if (pn < 1e-18 && n > 0) break;
    fanout += pn * std::exp2(n);
  }
  return 1.0 + fanout * inner;
}

}  // namespace nestor
