#include "nestor/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nestor/errors.hpp"

namespace nestor {

namespace detail {

long long ceil_tol(double x) {
  return static_cast<long long>(std::ceil(x - 1e-7));
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw ParameterError("delta must lie in (0, 1/2), got " +
                         std::to_string(delta));
  }
}

int truncation_level_rec(double lipschitz, double eps) {
  if (!(lipschitz >= 1.0)) {
    throw ParameterError("Lipschitz constant must be >= 1");
  }
  if (!(eps > 0.0 && eps <= std::sqrt(2.0) + 1e-12)) {
    throw ParameterError("eps out of recursive domain (0, sqrt(2)]");
  }
  long long b = ceil_tol(2.0 * std::log2(2.0 * lipschitz / eps));
  return static_cast<int>(std::max<long long>(0, b));
}

long long replication_count_rec(int d, double delta, double lipschitz,
                                double eps) {
  check_delta(delta);
  if (d < 0) throw ParameterError("stage must be >= 0");
  if (!(lipschitz >= 1.0)) {
    throw ParameterError("Lipschitz constant must be >= 1");
  }
  if (!(eps > 0.0 && eps <= std::sqrt(2.0) + 1e-12)) {
    throw ParameterError("eps out of recursive domain (0, sqrt(2)]");
  }
  double c = std::pow(2.0 * lipschitz, 2.0 + delta / std::exp2(d - 2));
  double expo = -2.0 * (1.0 + delta / std::exp2(d - 1));
  long long analytic =
      std::max<long long>(1, ceil_tol(c * std::pow(eps, expo)));

  // Feasibility floor.  The analytic constant is chosen so that
  // M_d (1-r)^{B_d} >= 1 asymptotically, but after normalizing the
  // truncated pmf by Z = sum_{n<=B} (1-r)^n and ceiling B_d the floored
  // per-level count at n = B can still hit zero at moderate eps.  The
  // smallest count that guarantees floor(M pmf(B)) >= 1 is
  // ceil(Z / (1-r)^B); take the max so the schedule is always feasible
  // while the analytic rate is unchanged as eps -> 0.
  double r = solve_rate(d, delta).rate;
  int b = truncation_level_rec(lipschitz, eps);
  double q = 1.0 - r;
  double z = (1.0 - std::pow(q, b + 1)) / r;
  long long feasible = ceil_tol(z / std::pow(q, b)) + 1;
  return std::max(analytic, feasible);
}

}  // namespace detail

RateSolution solve_rate(int d, double delta) {
  detail::check_delta(delta);
  if (d < 0) throw ParameterError("stage must be >= 0");
  double a = delta / std::exp2(d);
  double one_minus_r = std::exp2(-(2.0 + a) / (2.0 - a));
  RateSolution out;
  out.rate = 1.0 - one_minus_r;
  out.rho = one_minus_r * std::exp2(1.0 + delta / std::exp2(d + 1));
  return out;
}

int truncation_level(double lipschitz, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw ParameterError("eps must lie in (0, 1), got " +
                         std::to_string(eps));
  }
  return detail::truncation_level_rec(lipschitz, eps);
}

long long replication_count(int d, double delta, double lipschitz,
                            double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw ParameterError("eps must lie in (0, 1), got " +
                         std::to_string(eps));
  }
  return detail::replication_count_rec(d, delta, lipschitz, eps);
}

LevelDistribution LevelDistribution::geometric(double rate) {
  if (!(rate > 0.0 && rate < 1.0)) {
    throw ParameterError("geometric rate must lie in (0, 1)");
  }
  return LevelDistribution(Kind::Geometric, rate, -1);
}

LevelDistribution LevelDistribution::truncated(double rate, int truncation) {
  if (!(rate > 0.0 && rate < 1.0)) {
    throw ParameterError("truncated rate must lie in (0, 1)");
  }
  if (truncation < 0) {
    throw ParameterError("truncation level must be >= 0");
  }
  return LevelDistribution(Kind::Truncated, rate, truncation);
}

double LevelDistribution::pmf(int n) const {
  if (n < 0) return 0.0;
  double q = 1.0 - rate_;
  if (kind_ == Kind::Geometric) {
    return rate_ * std::pow(q, n);
  }
  if (n > truncation_) return 0.0;
  double z = (1.0 - std::pow(q, truncation_ + 1)) / rate_;
  return std::pow(q, n) / z;
}

int LevelDistribution::sample(RngStream& rng) const {
  double u = rng.uniform();
  double log_q = std::log1p(-rate_);
  if (kind_ == Kind::Geometric) {
    int n = static_cast<int>(std::floor(std::log(u) / log_q));
    return std::max(0, n);
  }
  // Inverse CDF of the conditioned geometric: solve
  // 1 - (1-r)^{n+1} >= u * (1 - (1-r)^{B+1}).
  double tail = 1.0 - std::pow(1.0 - rate_, truncation_ + 1);
  int n = static_cast<int>(std::floor(std::log1p(-u * tail) / log_q));
  return std::clamp(n, 0, truncation_);
}

std::vector<long long> per_level_counts(long long replications,
                                        const LevelDistribution& dist) {
  if (dist.kind() != LevelDistribution::Kind::Truncated) {
    throw ParameterError("per_level_counts requires a truncated distribution");
  }
  if (replications < 1) {
    throw ParameterError("replication count must be >= 1");
  }
  std::vector<long long> counts(dist.truncation() + 1);
  for (int n = 0; n <= dist.truncation(); ++n) {
    counts[n] = static_cast<long long>(
        std::floor(static_cast<double>(replications) * dist.pmf(n)));
    if (counts[n] < 1) {
      throw ScheduleInfeasibleError(
          n, "schedule infeasible: level " + std::to_string(n) +
                 " receives zero replications (M=" +
                 std::to_string(replications) + ")");
    }
  }
  return counts;
}

LevelSchedule make_schedule(int d, double delta, double lipschitz, double eps,
                            bool derandomized) {
  LevelSchedule s;
  s.stage = d;
  s.delta = delta;
  RateSolution rs = solve_rate(d, delta);
  s.rate = rs.rate;
  s.rho = rs.rho;
  s.truncation = detail::truncation_level_rec(lipschitz, eps);
  s.replications = detail::replication_count_rec(d, delta, lipschitz, eps);
  s.p = 2.0 - delta / std::exp2(d);
  if (derandomized) {
    s.per_level = per_level_counts(
        s.replications, LevelDistribution::truncated(s.rate, s.truncation));
  }
  return s;
}

}  // namespace nestor
