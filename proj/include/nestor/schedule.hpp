#pragma once

#include <cstdint>
#include <vector>

#include "nestor/rng.hpp"

namespace nestor {

// Level-distribution rate r_d and the contraction factor
// rho_d = (1 - r_d) * 2^{1 + delta/2^{d+1}} < 1 that drives every cost
// bound.  Closed form: 1 - r_d = 2^{-(2 + delta/2^d)/(2 - delta/2^d)}.
struct RateSolution {
  double rate;  // r_d
  double rho;   // rho_d
};

RateSolution solve_rate(int d, double delta);

// B_d = ceil(2 log2(2 L_d / eps)).  Requires eps in (0, 1).
int truncation_level(double lipschitz, double eps);

// M_d = ceil( (2 L_d)^{2 + delta/2^{d-2}} * eps^{-2(1 + delta/2^{d-1})} ),
// raised if necessary to the smallest count that keeps every
// floor(M_d * pmf(n)) >= 1 for the matching truncated level distribution
// (the analytic constant alone does not guarantee this once the pmf is
// normalized and B_d is ceilinged; see replication_count in schedule.cpp).
long long replication_count(int d, double delta, double lipschitz,
                            double eps);

// Distribution of the random MLMC level N.
class LevelDistribution {
 public:
  enum class Kind { Geometric, Truncated };

  static LevelDistribution geometric(double rate);
  static LevelDistribution truncated(double rate, int truncation);

  Kind kind() const { return kind_; }
  double rate() const { return rate_; }
  int truncation() const { return truncation_; }  // -1 for geometric

  // Geometric: r (1-r)^n.  Truncated: (1-r)^n / Z restricted to n <= B.
  double pmf(int n) const;
  int sample(RngStream& rng) const;

 private:
  LevelDistribution(Kind k, double r, int b)
      : kind_(k), rate_(r), truncation_(b) {}
  Kind kind_;
  double rate_;
  int truncation_;
};

// floor(M_d * pmf(n)) for n = 0..B.  Throws ScheduleInfeasibleError
// naming the first level whose count would be zero.
std::vector<long long> per_level_counts(long long replications,
                                        const LevelDistribution& dist);

// Full per-stage parameter bundle.
struct LevelSchedule {
  int stage = 0;
  double delta = 0.0;
  double rate = 0.0;
  double rho = 0.0;
  int truncation = 0;
  long long replications = 0;
  std::vector<long long> per_level;  // derandomized mode only
  double p = 0.0;                    // p_d = 2 - delta/2^d
};

LevelSchedule make_schedule(int d, double delta, double lipschitz, double eps,
                            bool derandomized);

namespace detail {

// Ceiling with a small tolerance so values that are integers up to
// floating-point noise (e.g. 2 log2(2L/eps) at eps -> 1) do not jump to
// the next integer.
long long ceil_tol(double x);

// Variants that admit eps in (0, sqrt(2)]: recursive estimator calls pass
// accuracies 2^{-n/2} with n = 0 (and alpha^0 = 1), which the public
// preconditions exclude.
int truncation_level_rec(double lipschitz, double eps);
long long replication_count_rec(int d, double delta, double lipschitz,
                                double eps);

void check_delta(double delta);

}  // namespace detail

}  // namespace nestor
