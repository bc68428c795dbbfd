#pragma once

#include <functional>

#include "nestor/problem.hpp"
#include "nestor/report.hpp"
#include "nestor/schedule.hpp"

namespace nestor {

// Single-sample unbiased randomized MLMC estimator of gamma_d(y_{<d})
// with antithetic differences:
//
//   sample y_d; at d = D return g_D(y_{<=D}); otherwise draw N ~ dist,
//   make 2^N recursive calls X_i and return Delta^{(N)} / pmf(N) with
//   Delta^{(n)} = g(mean of all X_i) - g(mean of odd X_i)/2
//                                    - g(mean of even X_i)/2,
//   Delta^{(0)} = g(y_{<=d}, X_1).
double rmlmc_single(const NestedProblem& problem, int d,
                    const History& history, const LevelDistribution& dist,
                    RngStream& rng, CostLedger& ledger);

// Estimator of gamma_{d+1}(y_{<=d}) at accuracy eps, used as the inner
// recursion of the successive-accuracy difference.
using InnerEstimator = std::function<double(
    const History& y_le_d, double eps, RngStream& rng, CostLedger& ledger)>;

// Successive-accuracy difference at level n:
//   Delta(y_{<=d}, n) = g_d(y_{<=d}, inner(y_{<=d}, eps_fine))
//                     - g_d(y_{<=d}, inner(y_{<=d}, eps_coarse)),
// with the coarse term dropped at n = 0 so the level sum telescopes to
// E[g_d(y_{<=d}, inner(y_{<=d}, 2^{-B/2}))].  The two inner calls use
// independent split streams.
double delta_successive(const NestedProblem& problem, int d,
                        const History& y_le_d, int n, double eps_fine,
                        double eps_coarse, const InnerEstimator& inner,
                        RngStream& rng, CostLedger& ledger);

// Batched randomized MLMC: M_d replications, each drawing a level
// N ~ P_d (geometric or truncated) and averaging
// Delta(y_{<=d}, N)/P_d(N); recursive calls at accuracies 2^{-N/2},
// 2^{-(N-1)/2} reuse the same construction at stage d+1.
EstimateReport rmlmc_estimate(const NestedProblem& problem, int d,
                              const History& history, double eps,
                              LevelDistribution::Kind kind, double delta,
                              RngStream& rng, CostLedger& ledger);

// Derandomized MLMC: the random level is replaced with the deterministic
// schedule M^{(n)} = floor(M_d pmf(n)), n = 0..B_d; returns
// sum_n mean_m Delta(y^{(n,m)}, n).  Cost is a deterministic function of
// (eps, delta, d, L).
EstimateReport derand_estimate(const NestedProblem& problem, int d,
                               const History& history, double eps,
                               double delta, RngStream& rng,
                               CostLedger& ledger);

// Exact classical step count of derand_estimate (no sampling involved).
std::uint64_t derand_cost(const NestedProblem& problem, int d, double eps,
                          double delta);

// Expected classical step count of rmlmc_estimate (exact arithmetic over
// the level distribution; used by the desk-scale guardrail).
double rmlmc_expected_cost(const NestedProblem& problem, int d, double eps,
                           LevelDistribution::Kind kind, double delta);

// Expected classical step count of one rmlmc_single call.
double rmlmc_single_expected_cost(const NestedProblem& problem, int d,
                                  const LevelDistribution& dist);

}  // namespace nestor
